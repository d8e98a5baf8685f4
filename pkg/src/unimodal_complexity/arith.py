"""Ball arithmetic plumbing on top of python-flint's ``arb``.

Values handed across module boundaries are :class:`CertifiedPoint` (an exact
rational midpoint with a rational radius).  Inner loops work on raw ``arb``
balls at the precision set by :func:`working_precision`.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from flint import arb, ctx, fmpq

from .errors import PrecisionExhausted, Undecided

DEFAULT_START_PREC = 64
DEFAULT_MAX_PREC = 4096


@contextmanager
def working_precision(bits: int) -> Iterator[int]:
    """Temporarily set the ball precision (in bits)."""
    old = ctx.prec
    ctx.prec = int(bits)
    try:
        yield int(bits)
    finally:
        ctx.prec = old


def precision_ladder(start: int = DEFAULT_START_PREC, cap: int = DEFAULT_MAX_PREC) -> Iterator[int]:
    """64, 128, 256, ... up to and including ``cap``."""
    p = max(16, int(start))
    while p < cap:
        yield p
        p *= 2
    yield int(cap)


def to_fraction(x) -> Fraction:
    """Exact value of an exact ``arb`` (such as a midpoint or radius)."""
    man, exp = x.man_exp()
    man, exp = int(man), int(exp)
    if exp >= 0:
        return Fraction(man << exp)
    return Fraction(man, 1 << -exp)


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value)
    return Fraction(str(value)) if isinstance(value, str) else Fraction(value)


def exact_ball(value: Fraction) -> arb:
    """Enclosure of a rational number at the current precision."""
    if value.denominator == 1:
        return arb(value.numerator)
    return arb(fmpq(value.numerator, value.denominator))


@dataclass(frozen=True)
class CertifiedPoint:
    """A rigorous enclosure [mid - rad, mid + rad] of a real number."""

    mid: Fraction
    rad: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "mid", as_fraction(self.mid))
        object.__setattr__(self, "rad", as_fraction(self.rad))
        if self.rad < 0:
            raise ValueError("radius must be non-negative")

    @property
    def midpoint(self) -> Fraction:
        return self.mid

    @property
    def radius(self) -> Fraction:
        return self.rad

    @property
    def lower(self) -> Fraction:
        return self.mid - self.rad

    @property
    def upper(self) -> Fraction:
        return self.mid + self.rad

    @property
    def is_exact(self) -> bool:
        return self.rad == 0

    @classmethod
    def exact(cls, value) -> "CertifiedPoint":
        return cls(as_fraction(value))

    @classmethod
    def from_arb(cls, x: arb) -> "CertifiedPoint":
        if not x.is_finite():
            raise PrecisionExhausted("non-finite enclosure")
        return cls(to_fraction(x.mid()), to_fraction(x.rad()))

    def ball(self) -> arb:
        b = exact_ball(self.mid)
        if self.rad:
            b = b + arb(0, exact_ball(self.rad).upper())
        return b

    def contains(self, value) -> bool:
        v = as_fraction(value)
        return self.lower <= v <= self.upper

    def overlaps(self, other: "CertifiedPoint") -> bool:
        return not (self.upper < other.lower or other.upper < self.lower)

    def __float__(self) -> float:
        return float(self.mid)

    def decimal(self, digits: int = 17) -> str:
        """Decimal midpoint with a certified error bound."""
        err = float(self.rad)
        err_txt = f"{err:.2e}" if err else "0"
        return f"{float(self.mid):.{digits}g} +/- {err_txt}"


def compare(x: CertifiedPoint, y: CertifiedPoint) -> Optional[int]:
    """-1, 0 or 1 when certified (0 only for two equal exact points), else None."""
    if x.upper < y.lower:
        return -1
    if y.upper < x.lower:
        return 1
    if x.is_exact and y.is_exact and x.mid == y.mid:
        return 0
    return None


def certified_less(x: CertifiedPoint, y: CertifiedPoint) -> bool:
    """True/False when certified; raises :class:`Undecided` otherwise."""
    s = compare(x, y)
    if s is None:
        raise Undecided(f"cannot order {x.decimal()} and {y.decimal()}")
    return s < 0


@dataclass(frozen=True)
class Interval:
    """Open interval with certified endpoints, left < right certified."""

    left: CertifiedPoint
    right: CertifiedPoint

    def __post_init__(self):
        if not self.left.upper < self.right.lower:
            raise Undecided("interval endpoints not separated")

    @classmethod
    def exact(cls, left, right) -> "Interval":
        return cls(CertifiedPoint.exact(left), CertifiedPoint.exact(right))

    @property
    def length_upper(self) -> Fraction:
        return self.right.upper - self.left.lower

    @property
    def length_lower(self) -> Fraction:
        return self.right.lower - self.left.upper

    def contains_point(self, x: CertifiedPoint) -> Optional[bool]:
        """Open-interval membership; None when undecided."""
        if self.left.upper < x.lower and x.upper < self.right.lower:
            return True
        if x.upper <= self.left.lower or x.lower >= self.right.upper:
            return False
        return None

    def contains_interval(self, other: "Interval") -> Optional[bool]:
        """Closure of ``other`` inside closure of self; None when undecided."""
        if self.left.upper <= other.left.lower and other.right.upper <= self.right.lower:
            return True
        if other.left.upper < self.left.lower or other.right.lower > self.right.upper:
            return False
        return None

    def disjoint_from(self, other: "Interval") -> Optional[bool]:
        if self.right.upper <= other.left.lower or other.right.upper <= self.left.lower:
            return True
        if self.left.upper < other.right.lower and other.left.upper < self.right.lower:
            return False
        return None

    def __str__(self) -> str:
        return f"({self.left.decimal()}, {self.right.decimal()})"
