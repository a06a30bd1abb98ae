"""Heat trace of the adiabatic Laplacian by two independent series.

The spectral sum adds exp(-t lam_{kl}) over the Fourier lattice; the image
sum is the same trace written through the plane heat kernel summed over deck
translations,

    tr = h^{-1}/(4 pi t) * sum exp[ -(k+a l)^2 / (4t(1+a^2))
                                    -(l-a k)^2 / (4t h^2 (1+a^2)) ].

Both are Gaussian sums over Z^2 and share one truncation engine; they share
no analytic derivation, which makes their agreement the strongest cross-check
in this package.  Tail bounds come from the one-dimensional comparison
sum_{n>N} exp(-c n^2) <= exp(-c N^2) r/(1-r) with r = exp(-c(2N+1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .leafwise import DistributionFunction, SmoothDensity, StepFunction
from .slope import Slope, is_rational, slope_value
from .spectrum import FOUR_PI_SQ, AdiabaticScale, _as_h


class RationalSlopeError(ValueError):
    """The closed-form trace limit holds for irrational slopes only."""


class DivergenceError(ValueError):
    """Laplace-Stieltjes transform diverges at the requested t."""


@dataclass(frozen=True)
class HeatTraceResult:
    value: float
    truncation_bound: float
    terms_used: int
    method: str


def _tail_1d(c: float, n: int) -> float:
    # sum_{m > n} exp(-c m^2), bounded by the geometric comparison above.
    r = math.exp(-c * (2 * n + 1))
    return math.exp(-c * n * n) * r / (1.0 - r)


def _full_1d(c: float) -> float:
    # Upper bound for sum over all of Z of exp(-c n^2).
    return 1.0 + 2.0 * _tail_1d(c, 0)


def _half_width(c: float, other_full: float, budget: float) -> int:
    # Smallest practical N with 2 * tail(c, N) * other_full <= budget.
    n = max(1, math.ceil(math.sqrt(max(math.log(max(2.0 * other_full / budget, 2.0)), 1.0) / c)))
    while 2.0 * _tail_1d(c, n) * other_full > budget:
        n += max(1, n // 8)
    return n


_SPLIT = 134217729.0  # 2^27 + 1, Dekker splitting constant


def _two_prod(x: float, y: float):
    # Exact product x*y = p + err without fused multiply-add.
    p = x * y
    xh = x * _SPLIT
    xh = xh - (xh - x)
    xl = x - xh
    yh = y * _SPLIT
    yh = yh - (yh - y)
    yl = y - yh
    err = ((xh * yh - p) + xh * yl + xl * yh) + xl * yl
    return p, err


def _lattice_gauss_sum(alpha: float, cu: float, cv: float, eps: float):
    """sum over (k,l) in Z^2 of exp(-Q), Q = cu (k+a l)^2 + cv (l-a k)^2,
    with the omitted mass rigorously below eps.

    In the raw (k,l) variables Q = a k^2 + 2 b kl + d l^2 cancels badly for
    eccentric scales, so exponents are evaluated in the frame coordinates via
    a compensated product.  The raw coefficients still drive the enumeration:
    Young's inequality gives Q >= gamma (a k^2 + d l^2) with
    gamma = 1 - |b|/sqrt(a d), yielding per-direction box bounds; inside the
    box, terms with exponent above a cutoff are dropped and their count is
    charged against the budget.
    """
    if cu <= 0.0 or cv <= 0.0:
        raise ValueError("quadratic form must be positive definite")
    a = cu + cv * alpha * alpha
    b = alpha * (cu - cv)
    d = cu * alpha * alpha + cv
    gamma = 1.0 - abs(b) / math.sqrt(a * d)
    if gamma <= 0.0:  # lost to rounding; recover via the determinant
        gamma = cu * cv * (1.0 + alpha * alpha) ** 2 / (2.0 * a * d)
    c1 = gamma * a
    c2 = gamma * d

    full1 = _full_1d(c1)
    full2 = _full_1d(c2)
    K = _half_width(c1, full2, eps / 4.0)
    L = _half_width(c2, full1, eps / 4.0)
    outside = 2.0 * _tail_1d(c1, K) * full2 + 2.0 * _tail_1d(c2, L) * full1

    box = (2 * K + 1) * (2 * L + 1)
    q_cut = math.log(2.0 * box / eps)

    exponents = []
    for k in range(-K, K + 1):
        # d l^2 + 2 b k l + (a k^2 - q_cut) <= 0, padded one integer outward.
        disc = (b * k) ** 2 - d * (a * k * k - q_cut)
        if disc <= 0.0:
            continue
        r = math.sqrt(disc)
        lo = max(-L, math.floor((-b * k - r) / d) - 1)
        hi = min(L, math.ceil((-b * k + r) / d) + 1)
        for l in range(lo, hi + 1):
            hi_p, lo_p = _two_prod(alpha, l)
            u = (k + hi_p) + lo_p
            hi_p, lo_p = _two_prod(alpha, k)
            v = (l - hi_p) - lo_p
            q = cu * (u * u) + cv * (v * v)
            if q <= q_cut:
                exponents.append(q)

    # 1.01 covers the float fuzz between the enumeration quadratic and the
    # compensated exponents at the cutoff.
    skipped = 1.01 * (box - len(exponents)) * math.exp(-q_cut)
    # Largest exponents first so fsum sees ascending magnitudes; fsum is
    # exactly rounded either way, the order pins down reproducibility.
    exponents.sort(reverse=True)
    value = math.fsum(math.exp(-q) for q in exponents)
    return value, outside + skipped, len(exponents)


def heat_trace_spectral(
    s: Slope, h: Union[float, AdiabaticScale], t: float, eps: float = 1e-12
) -> HeatTraceResult:
    """Trace by the eigenvalue sum: sum exp(-t lam_{kl}), tail below eps."""
    if t <= 0.0 or eps <= 0.0:
        raise ValueError("t and eps must be positive")
    hv = _as_h(h)
    alpha = slope_value(s)
    base = t * FOUR_PI_SQ / (1.0 + alpha * alpha)
    value, bound, terms = _lattice_gauss_sum(alpha, base, base * hv * hv, eps)
    return HeatTraceResult(value, bound, terms, "spectral")


def heat_trace_image(
    s: Slope, h: Union[float, AdiabaticScale], t: float, eps: float = 1e-12
) -> HeatTraceResult:
    """Trace by the deck-translation sum, prefactor h^{-1}/(4 pi t)."""
    if t <= 0.0 or eps <= 0.0:
        raise ValueError("t and eps must be positive")
    hv = _as_h(h)
    pref = 1.0 / (hv * 4.0 * math.pi * t)
    alpha = slope_value(s)
    base = 1.0 / (4.0 * t * (1.0 + alpha * alpha))
    value, bound, terms = _lattice_gauss_sum(alpha, base, base / (hv * hv), eps / pref)
    return HeatTraceResult(pref * value, pref * bound, terms, "image")


def adiabatic_trace_limit(s: Slope, t: float) -> float:
    """Limit of h * tr exp(-t Delta_h) as h -> 0 for an irrational slope: 1/(4 pi t)."""
    if is_rational(s):
        raise RationalSlopeError(
            "the closed-form trace limit is stated for irrational slopes only"
        )
    if t <= 0.0:
        raise ValueError("t must be positive")
    return 1.0 / (4.0 * math.pi * t)


def laplace_stieltjes(df: DistributionFunction, t: float) -> float:
    """integral of exp(-lam t) dF(lam).

    Step functions reduce to the exact sum of height * exp(-location t) over
    the stored jumps (the transform of the capped representation).  Smooth
    densities are integrated numerically after tau = u^2, which removes the
    sqrt singularity the leafwise density carries at zero.
    """
    growth = getattr(df, "growth_rate", 0.0)
    if t <= growth:
        raise DivergenceError(f"transform diverges for t <= {growth}")

    if isinstance(df, StepFunction):
        terms = sorted(height * math.exp(-tau * t) for tau, height in df.jumps)
        return math.fsum(terms)

    assert isinstance(df, SmoothDensity)
    from scipy.integrate import quad

    pieces = []
    if df.support_start < 0.0:
        val, _ = quad(
            lambda lam: math.exp(-lam * t) * df.density(lam),
            df.support_start, 0.0, epsabs=1e-12, epsrel=0.0, limit=200,
        )
        pieces.append(val)

    u0 = math.sqrt(max(df.support_start, 0.0))

    def integrand(u: float) -> float:
        tau = u * u
        if tau <= df.support_start:
            return 0.0
        return math.exp(-tau * t) * df.density(tau) * 2.0 * u

    val, _ = quad(integrand, u0, math.inf, epsabs=1e-12, epsrel=0.0, limit=200)
    pieces.append(val)
    return math.fsum(pieces)
