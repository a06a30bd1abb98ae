"""Foliation slopes: exact rationals, catalogued irrationals, continued fractions.

The slope alpha of the line field (1, alpha) on the torus decides everything
downstream: rational slopes give closed leaves and step-function leaf spectra,
irrational slopes give dense leaves and a smooth one.  Machine floats cannot
carry that dichotomy, so it lives in the type tag, not in the numeric value.
Irrational slopes carry a decimal string of >= 30 significant digits so that
continued-fraction quotients can be certified by interval arithmetic.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union


class SlopeError(ValueError):
    """Base class for slope construction and expansion failures."""


class InvalidSlopeError(SlopeError):
    """Malformed slope: zero denominator, unknown tag, bad decimal string."""


class PrecisionExhaustedError(SlopeError):
    """The stored decimal digits cannot certify the next partial quotient."""


# Reference values to 40 significant digits; the 64-bit `value` attribute is
# the correctly rounded float of the string (CPython float() rounds to nearest).
CATALOG = {
    "golden": "1.618033988749894848204586834365638117720",
    "sqrt2": "1.414213562373095048801688724209698078570",
    "e": "2.718281828459045235360287471352662497757",
    "pi": "3.141592653589793238462643383279502884197",
    "cbrt2": "1.259921049894873164767210607278228350570",
}

_DECIMAL_RE = re.compile(r"^[+-]?(\d+)\.(\d+)$")


@dataclass(frozen=True)
class Rational:
    """Reduced rational slope p/q with q >= 1 and gcd(|p|, q) = 1."""

    p: int
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise InvalidSlopeError(f"denominator must be positive, got {self.q}")
        if math.gcd(abs(self.p), self.q) != 1:
            raise InvalidSlopeError(f"{self.p}/{self.q} is not reduced; use reduce()")

    @property
    def value(self) -> float:
        return self.p / self.q

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __str__(self):
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class NamedIrrational:
    """Irrational slope from the fixed catalog, or a custom decimal string.

    `high_precision` keeps enough digits to certify continued-fraction
    quotients with denominators up to ~1e12.
    """

    tag: str
    high_precision: str = field(default="")

    def __post_init__(self):
        if self.tag in CATALOG:
            if not self.high_precision:
                object.__setattr__(self, "high_precision", CATALOG[self.tag])
            elif self.high_precision != CATALOG[self.tag]:
                raise InvalidSlopeError(f"catalog tag {self.tag!r} with mismatched digits")
        elif self.tag == "custom":
            _check_digits(self.high_precision)
        else:
            raise InvalidSlopeError(f"unknown irrational tag {self.tag!r}")

    @property
    def value(self) -> float:
        return float(self.high_precision)

    def __str__(self):
        return self.tag if self.tag != "custom" else f"dec:{self.high_precision}"


Slope = Union[Rational, NamedIrrational]


def _check_digits(text: str):
    m = _DECIMAL_RE.match(text)
    if not m:
        raise InvalidSlopeError(f"not a plain decimal string: {text!r}")
    significant = (m.group(1) + m.group(2)).lstrip("0")
    if len(significant) < 30:
        raise InvalidSlopeError("custom irrational needs >= 30 significant digits")


def reduce(p: int, q: int) -> Rational:
    """Canonical reduced form of p/q: positive denominator, coprime pair."""
    if q == 0:
        raise InvalidSlopeError("slope denominator is zero")
    if q < 0:
        p, q = -p, -q
    g = math.gcd(abs(p), q)
    return Rational(p // g, q // g)


def named(tag: str) -> NamedIrrational:
    return NamedIrrational(tag)


def custom(decimal_string: str) -> NamedIrrational:
    return NamedIrrational("custom", decimal_string)


def is_rational(s: Slope) -> bool:
    return isinstance(s, Rational)


def slope_value(s: Slope) -> float:
    """The 64-bit value of the slope (p/q division or rounded decimal)."""
    return s.value


def parse_slope(text: str) -> Slope:
    """Parse "p/q", a bare integer, a catalog tag, or "dec:<digits>"."""
    text = text.strip()
    if text in CATALOG:
        return NamedIrrational(text)
    if text.startswith("dec:"):
        return custom(text[4:])
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            return reduce(int(num), int(den))
        except ValueError as exc:
            raise InvalidSlopeError(f"cannot parse slope {text!r}") from exc
    try:
        return reduce(int(text), 1)
    except ValueError as exc:
        raise InvalidSlopeError(f"cannot parse slope {text!r}") from exc


def slope_to_json(s: Slope) -> str:
    if isinstance(s, Rational):
        return json.dumps({"kind": "rational", "p": s.p, "q": s.q})
    return json.dumps({"kind": "irrational", "tag": s.tag, "value": s.high_precision})


def slope_from_json(text: str) -> Slope:
    obj = json.loads(text)
    if obj.get("kind") == "rational":
        return reduce(int(obj["p"]), int(obj["q"]))
    if obj.get("kind") == "irrational":
        tag = obj["tag"]
        if tag == "custom":
            return custom(obj["value"])
        return NamedIrrational(tag)
    raise InvalidSlopeError(f"unknown slope kind in {text!r}")


@dataclass(frozen=True)
class ContinuedFraction:
    """Partial quotients [a0; a1, a2, ...] with their convergents p_n/q_n.

    `terminated` is True when the expansion is complete (rational input).
    """

    partial_quotients: tuple[int, ...]
    convergents: tuple[Fraction, ...]
    terminated: bool


def _convergents(quotients) -> tuple[Fraction, ...]:
    # p_n = a_n p_{n-1} + p_{n-2}, same for q; seeds (1, 0) and (a0, 1).
    out = []
    p_prev, q_prev = 1, 0
    p_cur, q_cur = None, None
    for a in quotients:
        if p_cur is None:
            p_cur, q_cur = a, 1
        else:
            p_cur, p_prev = a * p_cur + p_prev, p_cur
            q_cur, q_prev = a * q_cur + q_prev, q_cur
        out.append(Fraction(p_cur, q_cur))
    return tuple(out)


def _interval_of(s: NamedIrrational) -> tuple[Fraction, Fraction]:
    # The stored string is the value rounded to its last digit, so the true
    # slope lies within half an ulp of the decimal representation.
    m = _DECIMAL_RE.match(s.high_precision)
    x = Fraction(s.high_precision)
    u = Fraction(1, 2 * 10 ** len(m.group(2)))
    return x - u, x + u


def continued_fraction(s: Slope, n_terms: int | None = None) -> ContinuedFraction:
    """Expand a slope into partial quotients and convergents.

    Rational slopes expand exactly (Euclidean algorithm) and terminate;
    n_terms=None means the full expansion.  Irrational slopes require
    n_terms, and every quotient is certified against the stored precision:
    the floor must be identical on both ends of the uncertainty interval,
    otherwise PrecisionExhaustedError is raised.
    """
    if isinstance(s, Rational):
        quots = []
        num, den = s.p, s.q
        while den != 0:
            a, rem = divmod(num, den)
            quots.append(a)
            num, den = den, rem
            if n_terms is not None and len(quots) == n_terms:
                break
        terminated = den == 0
        return ContinuedFraction(tuple(quots), _convergents(quots), terminated)

    if n_terms is None:
        raise InvalidSlopeError("n_terms is required for an irrational slope")
    if n_terms < 1:
        raise InvalidSlopeError("n_terms must be positive")
    lo, hi = _interval_of(s)
    quots: list[int] = []
    for i in range(n_terms):
        flo = math.floor(lo)
        if flo != math.floor(hi):
            raise PrecisionExhaustedError(
                f"quotient a_{i} of {s} not certified by the stored digits"
            )
        quots.append(flo)
        lo, hi = lo - flo, hi - flo
        if i + 1 < n_terms:
            if lo <= 0:
                raise PrecisionExhaustedError(
                    f"remainder after a_{i} of {s} may vanish at this precision"
                )
            lo, hi = 1 / hi, 1 / lo
    return ContinuedFraction(tuple(quots), _convergents(quots), False)
