"""Leafwise spectrum distribution of the tangential operator.

For an irrational slope every leaf is a dense line and the leafwise counting
function is the smooth F(lam) = sqrt(lam)/pi.  For a rational slope p/q the
leaves are circles of length sqrt(p^2+q^2) and F is a step function jumping
at 4 pi^2 k^2 / (p^2+q^2): height 1/sqrt(p^2+q^2) at zero, twice that for
k >= 1 (the two leaf modes +-k folded together).
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable, Optional, Union

from .slope import Rational, Slope, is_rational

FOUR_PI_SQ = 4.0 * math.pi * math.pi


class CapExceededError(ValueError):
    """Evaluation past the construction cap of a step function."""


@dataclass(frozen=True)
class StepFunction:
    """Non-decreasing left-continuous step function given by its jumps.

    jumps: (location, height) pairs with strictly increasing locations and
    positive heights.  valid_to caps the representation: the jump data is
    only complete up to it, and evaluation beyond it raises.
    """

    jumps: tuple[tuple[float, float], ...]
    valid_to: Optional[float] = None

    def __post_init__(self):
        locs = [t for t, _ in self.jumps]
        if any(b <= a for a, b in zip(locs, locs[1:])):
            raise ValueError("jump locations must be strictly increasing")
        if any(h <= 0 for _, h in self.jumps):
            raise ValueError("jump heights must be positive")

    def evaluate(self, lam: float) -> float:
        if self.valid_to is not None and lam > self.valid_to:
            raise CapExceededError(
                f"evaluation at {lam} beyond construction cap {self.valid_to}"
            )
        # Left continuity: a jump located exactly at lam is excluded.
        idx = bisect_left(self.jumps, (lam, float("-inf")))
        return math.fsum(h for _, h in self.jumps[:idx])


@dataclass(frozen=True)
class SmoothDensity:
    """Distribution function with density `density` supported on [support_start, oo).

    `cumulative`, when provided, is the closed-form integral used by evaluate;
    otherwise evaluation integrates the density numerically.  sqrt_coefficient
    marks the special family F(lam) = c sqrt(lam) used by the leafwise theory
    and drives its compact JSON form.
    """

    density: Callable[[float], float]
    support_start: float = 0.0
    cumulative: Optional[Callable[[float], float]] = None
    sqrt_coefficient: Optional[float] = None

    def evaluate(self, lam: float) -> float:
        if lam <= self.support_start:
            return 0.0
        if self.cumulative is not None:
            return self.cumulative(lam)
        from scipy.integrate import quad

        val, _ = quad(self.density, self.support_start, lam, epsabs=1e-12, epsrel=0.0, limit=200)
        return val


DistributionFunction = Union[StepFunction, SmoothDensity]


@dataclass(frozen=True)
class LeafSpectrum:
    slope: Slope
    df: DistributionFunction


def evaluate(df: DistributionFunction, lam: float) -> float:
    """F(lam), left-continuous at jumps."""
    return df.evaluate(lam)


def sqrt_distribution(coefficient: float) -> SmoothDensity:
    """F(lam) = coefficient * sqrt(lam) on lam > 0, density c / (2 sqrt(tau))."""
    c = float(coefficient)
    return SmoothDensity(
        density=lambda tau: c / (2.0 * math.sqrt(tau)) if tau > 0.0 else 0.0,
        support_start=0.0,
        cumulative=lambda lam: c * math.sqrt(lam) if lam > 0.0 else 0.0,
        sqrt_coefficient=c,
    )


def leafwise_df(s: Slope, lambda_max: Optional[float] = None) -> LeafSpectrum:
    """Leafwise counting function for the slope class.

    Rational slopes produce a step function and need a construction cap
    lambda_max bounding the stored jumps; irrational slopes ignore the cap.
    """
    if not is_rational(s):
        return LeafSpectrum(s, sqrt_distribution(1.0 / math.pi))

    assert isinstance(s, Rational)
    if lambda_max is None:
        raise ValueError("a rational slope needs a construction cap lambda_max")
    S = s.p * s.p + s.q * s.q
    ell = math.sqrt(S)
    base = FOUR_PI_SQ / S
    jumps = [(0.0, 1.0 / ell)]
    k = 1
    while base * k * k <= lambda_max:
        jumps.append((base * k * k, 2.0 / ell))
        k += 1
    return LeafSpectrum(s, StepFunction(tuple(jumps), valid_to=float(lambda_max)))


def df_to_json(df: DistributionFunction) -> str:
    if isinstance(df, StepFunction):
        return json.dumps({"type": "step", "jumps": [[t, h] for t, h in df.jumps]})
    if df.sqrt_coefficient is not None:
        return json.dumps({"type": "sqrt", "coefficient": df.sqrt_coefficient})
    raise ValueError("only step functions and sqrt densities serialize to JSON")


def df_from_json(text: str) -> DistributionFunction:
    obj = json.loads(text)
    if obj["type"] == "step":
        return StepFunction(tuple((float(t), float(h)) for t, h in obj["jumps"]))
    if obj["type"] == "sqrt":
        return sqrt_distribution(float(obj["coefficient"]))
    raise ValueError(f"unknown distribution type {obj['type']!r}")
