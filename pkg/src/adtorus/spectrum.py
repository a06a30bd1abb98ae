"""Exact spectral data of the adiabatic torus Laplacian.

The operator splits into a leafwise part and an h^2-scaled transverse part;
its eigenvalues on the standard Fourier basis are

    lam_{kl} = 4 pi^2 [ (k + a l)^2 + h^2 (l - a k)^2 ] / (1 + a^2),

with a the slope.  Counting eigenvalues below a threshold is a lattice-point
count in a sheared ellipse.  `count_exact` resolves one coordinate strip-wise
in O(1) per strip; `count_naive` is the exhaustive oracle used to verify it.
Both decide membership with the identical float predicate, so they agree to
the bit even when a point sits within rounding distance of the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

from .slope import Rational, Slope, is_rational, slope_value

FOUR_PI_SQ = 4.0 * math.pi * math.pi

_MAX_STRIPS = 1 << 62
_MAX_NAIVE_BOX = 10 ** 8
_MAX_EIGENVALUES = 10 ** 7


class SpectrumError(Exception):
    pass


class StripOverflowError(SpectrumError):
    """The strip range does not fit in 62 bits."""


class InstanceTooLargeError(SpectrumError):
    """The naive enumeration box exceeds the allowed point budget."""


class TooManyEigenvaluesError(SpectrumError):
    """eigenvalues_below would need to materialize more than 1e7 records."""


@dataclass(frozen=True)
class AdiabaticScale:
    """Metric scale h in (0, 1]; h = 1 is the Euclidean torus."""

    h: float

    def __post_init__(self):
        if not (0.0 < self.h <= 1.0) or math.isnan(self.h):
            raise ValueError(f"h must lie in (0, 1], got {self.h}")


@dataclass(frozen=True)
class EnergyWindow:
    """Counting threshold, in absolute units lam or reduced units mu = lam/4pi^2.

    `mu_exact` is set when the window was built from an exact rational mu,
    which is what the opt-in integer-arithmetic counting path consumes.
    """

    lam: float
    mu: float
    unit_tag: str
    mu_exact: Fraction | None = None

    @classmethod
    def absolute(cls, lam: float) -> "EnergyWindow":
        return cls(float(lam), float(lam) / FOUR_PI_SQ, "absolute")

    @classmethod
    def reduced(cls, mu) -> "EnergyWindow":
        mu_exact = Fraction(mu)
        return cls(float(mu_exact) * FOUR_PI_SQ, float(mu_exact), "reduced", mu_exact)


@dataclass(frozen=True)
class LatticeCount:
    count: int
    near_boundary: int
    strips_visited: int


@dataclass(frozen=True)
class EigenvalueRecord:
    k: int
    l: int
    value: float


def _as_h(h: Union[float, AdiabaticScale]) -> float:
    if isinstance(h, AdiabaticScale):
        return h.h
    return AdiabaticScale(float(h)).h


def _as_window(w: Union[float, EnergyWindow]) -> EnergyWindow:
    if isinstance(w, EnergyWindow):
        return w
    return EnergyWindow.absolute(float(w))


def _eig(alpha: float, h2: float, cinv: float, k: int, l: int) -> float:
    # Shared by the public eigenvalue, the naive oracle and the strip counter:
    # one expression, one rounding behaviour.
    u = k + alpha * l
    v = l - alpha * k
    return cinv * (u * u + h2 * (v * v))


def eigenvalue(s: Slope, h: Union[float, AdiabaticScale], k: int, l: int) -> float:
    """lam_{kl} of the adiabatic Laplacian; zero iff both frame components vanish."""
    alpha = slope_value(s)
    hv = _as_h(h)
    return _eig(alpha, hv * hv, FOUR_PI_SQ / (1.0 + alpha * alpha), k, l)


def _strip_bound(lam: float, alpha: float, h: float, swapped: bool) -> int:
    # |k| <= sqrt(lam) (1 + |a|/h) / (2 pi sqrt(1+a^2)); swapping k and l
    # replaces (1 + |a|/h) by (|a| + 1/h).
    if lam <= 0.0:
        return 0
    root = math.sqrt(lam)
    absa = abs(alpha)
    numer = (absa + 1.0 / h) if swapped else (1.0 + absa / h)
    return math.ceil(root * numer / (2.0 * math.pi * math.sqrt(1.0 + alpha * alpha)))


def _integer_interval(A: float, B: float, C: float, pred: Callable[[int], bool]):
    """Integers n with pred(n) true, where pred is a dip of the convex parabola
    A n^2 + B n + C.  The roots only seed candidates; pred has the last word,
    which keeps the strip counter bit-consistent with the naive oracle."""
    disc = B * B - 4.0 * A * C
    vertex = -B / (2.0 * A)
    if disc > 0.0:
        r = math.sqrt(disc)
        lo = math.ceil((-B - r) / (2.0 * A))
        hi = math.floor((-B + r) / (2.0 * A))
    else:
        lo = hi = math.floor(vertex)
    if lo > hi:
        lo = hi = math.floor(vertex)

    # Find an anchor inside the admissible set; it can only sit next to the
    # integer nearest the vertex when the float roots came out empty.
    fv = math.floor(vertex)
    anchor = None
    for n in (lo, hi, fv, fv + 1, fv - 1, fv + 2):
        if pred(n):
            anchor = n
            break
    if anchor is None:
        return None

    lo = min(lo, anchor)
    while pred(lo - 1):
        lo -= 1
    while not pred(lo):
        lo += 1
    hi = max(hi, anchor)
    while pred(hi + 1):
        hi += 1
    while not pred(hi):
        hi -= 1
    return lo, hi


def _count_strips(alpha: float, h: float, lam: float, tol: float):
    h2 = h * h
    cinv = FOUR_PI_SQ / (1.0 + alpha * alpha)
    lam_hi = lam + tol
    lam_lo = lam - tol

    swapped = abs(alpha) > 1.0
    M = _strip_bound(max(lam_hi, 0.0), alpha, h, swapped)
    if 2 * M + 1 > _MAX_STRIPS:
        raise StripOverflowError(f"strip range 2*{M}+1 exceeds 2^62")

    # Quadratic in the free coordinate n for fixed strip index m:
    #   fixed k=m: (a^2+h^2) n^2 + 2 a m (1-h^2) n + m^2 (1+h^2 a^2)
    #   fixed l=m: (1+h^2 a^2) n^2 + 2 a m (1-h^2) n + m^2 (a^2+h^2)
    A_free = (1.0 + h2 * alpha * alpha) if swapped else (alpha * alpha + h2)
    A_fix = (alpha * alpha + h2) if swapped else (1.0 + h2 * alpha * alpha)
    Bc = 2.0 * alpha * (1.0 - h2)
    scale = (1.0 + alpha * alpha) / FOUR_PI_SQ

    count = 0
    near = 0
    for m in range(-M, M + 1):
        if swapped:
            pred_lt = lambda n: _eig(alpha, h2, cinv, n, m) < lam
            pred_le_hi = lambda n: _eig(alpha, h2, cinv, n, m) <= lam_hi
            pred_lt_lo = lambda n: _eig(alpha, h2, cinv, n, m) < lam_lo
        else:
            pred_lt = lambda n: _eig(alpha, h2, cinv, m, n) < lam
            pred_le_hi = lambda n: _eig(alpha, h2, cinv, m, n) <= lam_hi
            pred_lt_lo = lambda n: _eig(alpha, h2, cinv, m, n) < lam_lo

        B = Bc * m
        C0 = A_fix * m * m
        main = _integer_interval(A_free, B, C0 - lam * scale, pred_lt)
        if main is not None:
            count += main[1] - main[0] + 1
        n_le = _integer_interval(A_free, B, C0 - lam_hi * scale, pred_le_hi)
        n_lt = _integer_interval(A_free, B, C0 - lam_lo * scale, pred_lt_lo)
        if n_le is not None:
            near += n_le[1] - n_le[0] + 1
        if n_lt is not None:
            near -= n_lt[1] - n_lt[0] + 1

    return count, near, 2 * M + 1


def count_exact(
    s: Slope,
    h: Union[float, AdiabaticScale],
    w: Union[float, EnergyWindow],
    tol: float = 0.0,
    exact_arith: bool = False,
) -> LatticeCount:
    """Number of eigenvalues strictly below the window, by strip counting.

    near_boundary reports how many lattice points have |lam_{kl} - lam| <= tol;
    when it is zero the count is stable under any perturbation of the threshold
    smaller than tol.  With exact_arith=True (rational slope only) membership
    is decided in integer arithmetic after clearing denominators of h^2 and of
    the reduced threshold mu, and tol is interpreted in reduced units.
    """
    if tol < 0.0:
        raise ValueError("tie tolerance must be nonnegative")
    hv = _as_h(h)
    win = _as_window(w)
    if exact_arith:
        return _count_exact_rational(s, h, win, tol)
    count, near, strips = _count_strips(slope_value(s), hv, win.lam, tol)
    return LatticeCount(count, near, strips)


def count_naive(
    s: Slope,
    h: Union[float, AdiabaticScale],
    w: Union[float, EnergyWindow],
    tol: float = 0.0,
) -> LatticeCount:
    """Exhaustive double-loop oracle over the bounding box of the ellipse."""
    hv = _as_h(h)
    win = _as_window(w)
    alpha = slope_value(s)
    lam = win.lam
    lam_eff = max(lam + tol, 0.0)

    K = _strip_bound(lam_eff, alpha, hv, swapped=False)
    L = _strip_bound(lam_eff, alpha, hv, swapped=True)
    if (2 * K + 1) * (2 * L + 1) > _MAX_NAIVE_BOX:
        raise InstanceTooLargeError(
            f"naive box {2 * K + 1} x {2 * L + 1} exceeds {_MAX_NAIVE_BOX} points"
        )

    h2 = hv * hv
    cinv = FOUR_PI_SQ / (1.0 + alpha * alpha)
    count = 0
    near = 0
    lam_hi = lam + tol
    lam_lo = lam - tol
    for k in range(-K, K + 1):
        for l in range(-L, L + 1):
            val = _eig(alpha, h2, cinv, k, l)
            if val < lam:
                count += 1
            if lam_lo <= val <= lam_hi:
                near += 1
    return LatticeCount(count, near, 2 * K + 1)


def eigenvalues_below(
    s: Slope,
    h: Union[float, AdiabaticScale],
    w: Union[float, EnergyWindow],
) -> list[EigenvalueRecord]:
    """All eigenvalue records strictly below the window, sorted by value then (k, l)."""
    hv = _as_h(h)
    win = _as_window(w)
    total = count_exact(s, hv, win)
    if total.count > _MAX_EIGENVALUES:
        raise TooManyEigenvaluesError(f"{total.count} eigenvalues requested")

    alpha = slope_value(s)
    h2 = hv * hv
    cinv = FOUR_PI_SQ / (1.0 + alpha * alpha)
    lam = win.lam
    swapped = abs(alpha) > 1.0
    M = _strip_bound(max(lam, 0.0), alpha, hv, swapped)

    A_free = (1.0 + h2 * alpha * alpha) if swapped else (alpha * alpha + h2)
    A_fix = (alpha * alpha + h2) if swapped else (1.0 + h2 * alpha * alpha)
    scale = (1.0 + alpha * alpha) / FOUR_PI_SQ

    records = []
    for m in range(-M, M + 1):
        if swapped:
            pred = lambda n: _eig(alpha, h2, cinv, n, m) < lam
        else:
            pred = lambda n: _eig(alpha, h2, cinv, m, n) < lam
        span = _integer_interval(
            A_free, 2.0 * alpha * (1.0 - h2) * m, A_fix * m * m - lam * scale, pred
        )
        if span is None:
            continue
        for n in range(span[0], span[1] + 1):
            k, l = (n, m) if swapped else (m, n)
            records.append(EigenvalueRecord(k, l, _eig(alpha, h2, cinv, k, l)))
    records.sort(key=lambda r: (r.value, r.k, r.l))
    return records


def counting_step_function(s: Slope, h, lambda_max: float):
    """The counting function sampled up to lambda_max, as a step function.

    Jumps sit at the distinct eigenvalues, heights are their multiplicities.
    """
    from .leafwise import StepFunction

    records = eigenvalues_below(s, h, EnergyWindow.absolute(lambda_max))
    jumps: list[tuple[float, float]] = []
    for rec in records:
        if jumps and jumps[-1][0] == rec.value:
            jumps[-1] = (rec.value, jumps[-1][1] + 1.0)
        else:
            jumps.append((rec.value, 1.0))
    return StepFunction(tuple(jumps), valid_to=lambda_max)


# Integer-arithmetic path: for slope p/q the membership test
#     (q k + p l)^2 + h^2 (q l - p k)^2 < mu (p^2 + q^2)
# clears all denominators once h^2 and mu are taken as exact fractions.


def _exact_interval(a: int, b: int, c: int, pred: Callable[[int], bool]):
    # Same contract as _integer_interval but over integer coefficients.
    disc = b * b - 4 * a * c
    if disc < 0:
        mid = -b // (2 * a)
        lo = hi = mid
    else:
        r = math.isqrt(disc)
        lo = -((b + r) // (2 * a)) - 1
        hi = (r - b) // (2 * a) + 1
    anchor = None
    for n in (lo, hi, -b // (2 * a), -b // (2 * a) + 1):
        if pred(n):
            anchor = n
            break
    if anchor is None:
        return None
    lo = min(lo, anchor)
    while pred(lo - 1):
        lo -= 1
    while not pred(lo):
        lo += 1
    hi = max(hi, anchor)
    while pred(hi + 1):
        hi += 1
    while not pred(hi):
        hi -= 1
    return lo, hi


def _count_exact_rational(s: Slope, h, win: EnergyWindow, tol) -> LatticeCount:
    if not is_rational(s):
        raise ValueError("exact_arith requires a rational slope")
    assert isinstance(s, Rational)
    h_frac = Fraction(h.h if isinstance(h, AdiabaticScale) else h)
    if not (0 < h_frac <= 1):
        raise ValueError(f"h must lie in (0, 1], got {h_frac}")
    mu = win.mu_exact if win.mu_exact is not None else Fraction(win.mu)
    tol_mu = Fraction(tol)

    p, q = s.p, s.q
    S = p * p + q * q
    h2 = h_frac * h_frac
    hn, hd = h2.numerator, h2.denominator

    def counter(threshold: Fraction, strict: bool):
        # md hd (qk+pl)^2 + md hn (ql-pk)^2  vs  mn hd S, all integers.
        mn, md = threshold.numerator, threshold.denominator
        if mn < 0:
            return 0
        a = md * (hd * p * p + hn * q * q)
        rhs = mn * hd * S

        # Strips are nonempty only while the k-discriminant is nonnegative:
        # k^2 <= mn (hd p^2 + hn q^2) / (md hn S).
        num = mn * (hd * p * p + hn * q * q)
        den = md * hn * S
        kmax = math.isqrt(num // den) + 1
        if 2 * kmax + 1 > _MAX_STRIPS:
            raise StripOverflowError(f"strip range 2*{kmax}+1 exceeds 2^62")

        total = 0
        for k in range(-kmax, kmax + 1):
            b = 2 * md * p * q * k * (hd - hn)
            c = md * k * k * (hd * q * q + hn * p * p) - rhs

            def pred(l, k=k):
                lhs = md * (hd * (q * k + p * l) ** 2 + hn * (q * l - p * k) ** 2)
                return lhs < rhs if strict else lhs <= rhs

            span = _exact_interval(a, b, c, pred)
            if span is not None:
                total += span[1] - span[0] + 1
        return total

    count = counter(mu, strict=True)
    near = counter(mu + tol_mu, strict=False) - counter(mu - tol_mu, strict=True)

    # strips_visited mirrors the float path's accounting: widest threshold wins.
    num = (mu + tol_mu).numerator * (hd * p * p + hn * q * q)
    den = (mu + tol_mu).denominator * hn * S
    kmax = math.isqrt(num // den) + 1 if (mu + tol_mu) > 0 else 0
    return LatticeCount(count, near, 2 * kmax + 1)
