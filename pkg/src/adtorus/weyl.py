"""Transverse Weyl term convolved against a leafwise distribution function.

The small-h eigenvalue count of the adiabatic operator is governed by

    N_h(lam) ~ h^{-q} (4 pi)^{-q/2} / Gamma(q/2 + 1) *
               integral_{tau < lam} (lam - tau)^{q/2} dF(tau)

with q the transverse dimension (1 for the torus line foliation) and F the
leafwise counting function.  Step functions integrate to an exact finite sum;
smooth densities go through the substitution tau = lam sin^2(theta), which
absorbs both endpoint singularities before any quadrature runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from scipy.integrate import quad

from .leafwise import (
    DistributionFunction,
    SmoothDensity,
    StepFunction,
    leafwise_df,
)
from .slope import Rational, Slope, is_rational
from .spectrum import AdiabaticScale, _as_h


@dataclass(frozen=True)
class WeylParams:
    """Transverse dimension, threshold and quadrature budget."""

    q: int
    lam: float
    quadrature_tolerance: float = 1e-10

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("transverse dimension q must be >= 1")
        if self.quadrature_tolerance <= 0.0:
            raise ValueError("quadrature tolerance must be positive")


def weyl_coefficient(q: int) -> float:
    """(4 pi)^{-q/2} / Gamma(q/2 + 1); equals 1/pi at q = 1."""
    if q < 1:
        raise ValueError("transverse dimension q must be >= 1")
    return (4.0 * math.pi) ** (-q / 2.0) / math.gamma(q / 2.0 + 1.0)


def stieltjes_convolve(df: DistributionFunction, params: WeylParams) -> float:
    """integral over tau < lam of (lam - tau)^{q/2} dF(tau).

    Exact finite sum for step functions; adaptive quadrature after the
    sin^2 substitution for smooth densities, absolute error bounded by
    params.quadrature_tolerance.
    """
    lam = params.lam
    half_q = params.q / 2.0

    if isinstance(df, StepFunction):
        if df.valid_to is not None and lam > df.valid_to:
            from .leafwise import CapExceededError

            raise CapExceededError(
                f"threshold {lam} beyond step-function cap {df.valid_to}"
            )
        terms = []
        for tau, height in df.jumps:
            if tau >= lam:
                break
            gap = lam - tau
            assert gap > 0.0
            terms.append(height * gap ** half_q)
        return math.fsum(terms)

    assert isinstance(df, SmoothDensity)
    if lam <= df.support_start:
        return 0.0

    def integrand(theta: float) -> float:
        s = math.sin(theta)
        c = math.cos(theta)
        tau = lam * s * s
        if tau <= df.support_start or tau >= lam:
            return 0.0
        return (lam - tau) ** half_q * df.density(tau) * 2.0 * lam * s * c

    val, _ = quad(
        integrand, 0.0, math.pi / 2.0,
        epsabs=params.quadrature_tolerance, epsrel=0.0, limit=200,
    )
    return val


def weyl_estimate(s: Slope, h: Union[float, AdiabaticScale], params: WeylParams) -> float:
    """Full transverse-Weyl value h^{-q} * coefficient(q) * convolution."""
    hv = _as_h(h)
    if params.lam <= 0.0:
        return 0.0
    cap = params.lam if is_rational(s) else None
    df = leafwise_df(s, lambda_max=cap).df
    return hv ** (-params.q) * weyl_coefficient(params.q) * stieltjes_convolve(df, params)


def asymptotic_count(s: Slope, h: Union[float, AdiabaticScale], lam: float) -> float:
    """Leading small-h closed form of the eigenvalue count.

    Irrational slope: h^{-1} lam / (4 pi).  Rational slope p/q: the finite sum
    h^{-1} / (pi sqrt(p^2+q^2)) * sum over 4 pi^2 k^2/(p^2+q^2) < lam of
    (lam - 4 pi^2 k^2/(p^2+q^2))^{1/2}.
    """
    hv = _as_h(h)
    if lam <= 0.0:
        return 0.0
    if not is_rational(s):
        return lam / (4.0 * math.pi * hv)

    assert isinstance(s, Rational)
    S = s.p * s.p + s.q * s.q
    base = 4.0 * math.pi * math.pi / S
    terms = [math.sqrt(lam)]
    k = 1
    while base * k * k < lam:
        terms.append(2.0 * math.sqrt(lam - base * k * k))
        k += 1
    return math.fsum(terms) / (math.pi * math.sqrt(S) * hv)
