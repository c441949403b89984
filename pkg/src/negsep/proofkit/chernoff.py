"""Certified rational enclosures for the concentration threshold
sqrt((n/2) * ln(2/beta)).

Everything is computed in integer/rational arithmetic: logarithms come from
the atanh series with an explicit tail bound, square roots from integer
square roots at a chosen scale.  Downstream comparisons against exact
rationals either decide or honestly report indeterminacy.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Optional

from ..errors import BetaOutOfRange

ZERO = Fraction(0)


@dataclass(frozen=True)
class RatInterval:
    """A closed interval with exact rational endpoints enclosing a real."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"inverted interval [{self.lo}, {self.hi}]")

    def __add__(self, other):
        if isinstance(other, RatInterval):
            return RatInterval(self.lo + other.lo, self.hi + other.hi)
        q = Fraction(other)
        return RatInterval(self.lo + q, self.hi + q)

    __radd__ = __add__

    def scale(self, q) -> "RatInterval":
        q = Fraction(q)
        if q >= 0:
            return RatInterval(self.lo * q, self.hi * q)
        return RatInterval(self.hi * q, self.lo * q)

    def div(self, q) -> "RatInterval":
        return self.scale(Fraction(1, 1) / Fraction(q))

    def pow_int(self, k: int) -> "RatInterval":
        if k < 0 or self.lo < 0:
            raise ValueError("only non-negative powers of non-negative intervals")
        return RatInterval(self.lo ** k, self.hi ** k)

    def width(self) -> Fraction:
        return self.hi - self.lo

    # three-way comparisons against exact rationals; None means "straddles"

    def leq(self, q) -> Optional[bool]:
        q = Fraction(q)
        if self.hi <= q:
            return True
        if self.lo > q:
            return False
        return None

    def geq(self, q) -> Optional[bool]:
        q = Fraction(q)
        if self.lo >= q:
            return True
        if self.hi < q:
            return False
        return None

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"


def sqrt_interval(q: Fraction, digits: int = 20) -> RatInterval:
    """Enclosure of sqrt(q) with width at most 10^-digits."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("square root of a negative rational")
    if q == 0:
        return RatInterval(ZERO, ZERO)
    scale = 10 ** digits
    # sqrt(p/d) = sqrt(p*d)/d
    s = isqrt(q.numerator * q.denominator * scale * scale)
    den = q.denominator * scale
    return RatInterval(Fraction(s, den), Fraction(s + 1, den))


def _atanh_interval(t: Fraction, terms: int) -> RatInterval:
    """Enclosure of atanh(t) for 0 <= t < 1 by the odd power series."""
    total = ZERO
    power = t
    tsq = t * t
    for j in range(terms):
        total += power / (2 * j + 1)
        power *= tsq
    # remaining terms are bounded by the geometric tail
    tail = power / ((2 * terms + 1) * (1 - tsq))
    return RatInterval(total, total + tail)


_LN2_CACHE: dict = {}


def _ln2(terms: int) -> RatInterval:
    got = _LN2_CACHE.get(terms)
    if got is None:
        got = _atanh_interval(Fraction(1, 3), terms).scale(2)
        _LN2_CACHE[terms] = got
    return got


def ln_interval(x: Fraction, terms: int = 24) -> RatInterval:
    """Enclosure of the natural logarithm of a positive rational."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("logarithm of a non-positive rational")
    if x == 1:
        return RatInterval(ZERO, ZERO)
    if x < 1:
        return ln_interval(1 / x, terms).scale(-1)
    k = 0
    while x >= 2:
        x /= 2
        k += 1
    # now 1 <= x < 2, so the series argument is below 1/3
    t = (x - 1) / (x + 1)
    reduced = _atanh_interval(t, terms).scale(2)
    return _ln2(terms).scale(k) + reduced


def chernoff_threshold(beta: Fraction, n: int, precision: int = 24) -> RatInterval:
    """Enclosure of sqrt((n/2) * ln(2/beta)) for beta in (0, 1]."""
    beta = Fraction(beta)
    if not 0 < beta <= 1:
        raise BetaOutOfRange(f"failure probability {beta} outside (0, 1]")
    if n < 0:
        raise ValueError("negative count")
    arg = ln_interval(2 / beta, terms=precision).scale(Fraction(n, 2))
    return RatInterval(sqrt_interval(arg.lo, precision).lo,
                       sqrt_interval(arg.hi, precision).hi)


_PRECISIONS = (12, 24, 48, 96)


def threshold_cmp(beta: Fraction, n: int, q: Fraction) -> Optional[bool]:
    """Decide T(beta, n) <= q, refining the enclosure as needed.

    Returns None only if the comparison stayed indeterminate at the highest
    precision (the threshold is irrational, so ties cannot occur for exact
    rational q; indeterminacy signals an extreme proximity instead).
    """
    for precision in _PRECISIONS:
        verdict = chernoff_threshold(beta, n, precision).leq(q)
        if verdict is not None:
            return verdict
    return None


def tail_mass_beyond_threshold(deviation_masses, beta: Fraction, n: int):
    """Exact mass of |deviation| >= T(beta, n).

    `deviation_masses` maps exact rational deviations (already centered) to
    masses.  Returns (mass, exact) where `exact` is False when any comparison
    stayed indeterminate; such points are then counted pessimistically.
    """
    total = ZERO
    exact = True
    for deviation, mass in deviation_masses.items():
        d = abs(Fraction(deviation))
        inside = threshold_cmp(beta, n, d)  # T <= d means the point is in the tail
        if inside is None:
            exact = False
            total += mass
        elif inside:
            total += mass
    return total, exact
