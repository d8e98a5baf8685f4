"""Certified evaluation of the symmetric power family f(x) = a (1 - |2x - 1|^ell).

The family is unimodal on [0, 1] with turning point c = 1/2, f(0) = f(1) = 0
and f(c) = a.  Every routine works in ball arithmetic; anything that cannot be
decided at the precision cap raises :class:`PrecisionExhausted`.

Extending to another symmetric unimodal map means subclassing :class:`MapSpec`
and overriding ``f_ball`` (the map on balls) and ``inverse_ball`` (the two
monotone inverse branches); everything downstream only uses those two and the
``symmetric`` flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import ClassVar, List, Tuple

from flint import arb, ctx

from .arith import (
    DEFAULT_MAX_PREC,
    DEFAULT_START_PREC,
    CertifiedPoint,
    Interval,
    as_fraction,
    exact_ball,
    precision_ladder,
    working_precision,
)
from .errors import BranchBudgetExceeded, NoFixedPoint, PrecisionExhausted, Undecided

LEFT, CRIT, RIGHT = -1, 0, 1


@lru_cache(maxsize=256)
def _param_ball(a: Fraction, prec: int) -> arb:
    with working_precision(prec):
        return exact_ball(a)


@dataclass(frozen=True)
class MapSpec:
    """Parameters of one map of the family; hashable and immutable."""

    a: Fraction
    ell: Fraction = Fraction(2)

    c: ClassVar[Fraction] = Fraction(1, 2)
    symmetric: ClassVar[bool] = True

    def __post_init__(self):
        a = as_fraction(self.a)
        ell = as_fraction(self.ell)
        if not (0 < a <= 1):
            raise ValueError(f"parameter a must lie in (0, 1], got {a}")
        if not ell > 1:
            raise ValueError(f"critical order must exceed 1, got {ell}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "ell", ell)

    @property
    def ell_is_two(self) -> bool:
        return self.ell == 2

    def a_ball(self) -> arb:
        return _param_ball(self.a, ctx.prec)

    def c_ball(self) -> arb:
        return arb(1) / 2

    def f_ball(self, x: arb) -> arb:
        """f on a ball, at the current precision."""
        t = 2 * x - 1
        if self.ell_is_two:
            p = t * t
        else:
            p = _abs_pow(t, self.ell)
        return self.a_ball() * (1 - p)

    def inverse_ball(self, y: arb, side: int) -> arb:
        """Preimage of y on the left (side=-1) or right (side=+1) lap.

        Only meaningful for y in [0, a]; rounding slightly above a is clipped.
        """
        u = (1 - y / self.a_ball()).nonnegative_part()
        if self.ell_is_two:
            s = u.sqrt()
        else:
            s = _root(u, self.ell)
        return (1 + side * s) / 2


def _abs_pow(t: arb, ell: Fraction) -> arb:
    if ell.denominator == 1 and ell.numerator % 2 == 0:
        p = t
        for _ in range(ell.numerator - 1):
            p = p * t
        return p
    at = abs(t)
    if at > 0:
        return at ** exact_ball(ell)
    hi = at.upper()
    top = hi ** exact_ball(ell) if hi > 0 else arb(0)
    return arb(0).union(top)


def _root(u: arb, ell: Fraction) -> arb:
    if u > 0:
        return u ** (1 / exact_ball(ell))
    hi = u.upper()
    top = hi ** (1 / exact_ball(ell)) if hi > 0 else arb(0)
    return arb(0).union(top)


def side_of(x: arb) -> int | None:
    """L/C/R as -1/0/+1 relative to c = 1/2, or None when undecided."""
    h = arb(1) / 2
    if x < h:
        return LEFT
    if x > h:
        return RIGHT
    if x.is_exact() and x == h:
        return CRIT
    return None


SYMBOL = {LEFT: "L", CRIT: "C", RIGHT: "R"}


def evaluate(m: MapSpec, x: CertifiedPoint, max_radius=None, prec_cap: int = DEFAULT_MAX_PREC) -> CertifiedPoint:
    """Enclosure of f(x).  At fixed precision the radius grows by at most
    roughly 2*ell*a times the input radius plus one rounding error."""
    return iterate(m, x, 1, max_radius=max_radius, prec_cap=prec_cap)


def iterate(
    m: MapSpec,
    x: CertifiedPoint,
    n: int,
    max_radius=None,
    prec_start: int = DEFAULT_START_PREC,
    prec_cap: int = DEFAULT_MAX_PREC,
) -> CertifiedPoint:
    """Enclosure of f^n(x), doubling precision until the radius is at most
    ``max_radius`` (default: 2^-40 or the input radius times 2, whichever is
    larger)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return x
    tol = as_fraction(max_radius) if max_radius is not None else max(Fraction(1, 2**40), 2 * x.rad)
    for prec in precision_ladder(prec_start, prec_cap):
        with working_precision(prec):
            y = x.ball()
            for _ in range(n):
                y = m.f_ball(y)
            if y.is_finite():
                out = CertifiedPoint.from_arb(y)
                if out.rad <= tol:
                    return out
    raise PrecisionExhausted(f"f^{n}(x) radius above {float(tol):.3g} at {prec_cap} bits")


def hat_point(m: MapSpec, x: CertifiedPoint) -> CertifiedPoint:
    """The other preimage of f(x); exact 1 - x for this symmetric family."""
    return CertifiedPoint(1 - x.mid, x.rad)


def fixed_point_q(m: MapSpec, prec: int = 128) -> CertifiedPoint:
    """Orientation-reversing fixed point q in (c, 1), certified by a sign change
    of f(x) - x (which is strictly decreasing on (c, 1))."""
    if m.a <= m.c:
        raise NoFixedPoint(f"f(c) = {m.a} <= c: no orientation-reversing fixed point")
    with working_precision(prec):
        return CertifiedPoint.from_arb(_fixed_point_ball(m, prec))


def _fixed_point_ball(m: MapSpec, prec: int) -> arb:
    """Ball enclosing q, bisecting on exact dyadic endpoints."""
    with working_precision(prec):
        lo, hi = Fraction(1, 2), Fraction(1)
        # g(lo) = a - 1/2 > 0, g(1) = -1 < 0
        for _ in range(prec - 4):
            mid = (lo + hi) / 2
            g = m.f_ball(exact_ball(mid)) - exact_ball(mid)
            if g > 0:
                lo = mid
            elif g < 0:
                hi = mid
            else:
                return exact_ball(mid)
        return exact_ball(lo).union(exact_ball(hi))


def inverse_branch(m: MapSpec, y: CertifiedPoint, side: int, prec: int = 128) -> CertifiedPoint:
    with working_precision(prec):
        return CertifiedPoint.from_arb(m.inverse_ball(y.ball(), side))


def _sides_to_orientation(sides: List[int]) -> int:
    o = 1
    for s in sides:
        o *= -s
    return o


def monotone_branches(
    m: MapSpec,
    n: int,
    window: Interval,
    branch_cap: int = 4096,
    prec: int = 128,
    prec_cap: int = DEFAULT_MAX_PREC,
) -> List[Tuple[Interval, int]]:
    """Maximal subintervals of ``window`` on which f^n is strictly monotone,
    with orientation +1 (increasing) or -1 (decreasing).

    Separators are the points of f^{-j}(c), j < n, inside the window.  They are
    found by refining the branches of f^(j) one level at a time: a branch whose
    image under f^j straddles c is split at the unique preimage of c, obtained
    by composing inverse laps along the branch's itinerary.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    last_err: Exception | None = None
    for p in precision_ladder(prec, prec_cap):
        try:
            return _branches_at(m, n, window, branch_cap, p)
        except Undecided as err:
            last_err = err
    raise PrecisionExhausted(f"monotone_branches undecided at {prec_cap} bits: {last_err}")


def _branches_at(m: MapSpec, n: int, window: Interval, branch_cap: int, prec: int):
    with working_precision(prec):
        half = arb(1) / 2
        # each branch: (left ball, right ball, itinerary sides of f^0..f^{j-1} images)
        branches = [(window.left.ball(), window.right.ball(), [])]
        for j in range(n):
            refined = []
            for lo, hi, sides in branches:
                ylo, yhi = lo, hi
                for _ in range(j):
                    ylo, yhi = m.f_ball(ylo), m.f_ball(yhi)
                lo_side = _strict_side(ylo, half)
                hi_side = _strict_side(yhi, half)
                if lo_side == hi_side and lo_side != 0:
                    refined.append((lo, hi, sides + [lo_side]))
                    continue
                if lo_side != 0 and hi_side != 0:
                    cut = half
                    for s in reversed(sides):
                        cut = m.inverse_ball(cut, s)
                    if not (lo < cut < hi):
                        raise Undecided("separator not isolated from branch ends")
                    refined.append((lo, cut, sides + [lo_side]))
                    refined.append((cut, hi, sides + [hi_side]))
                else:
                    # an endpoint maps exactly onto c: keep the branch, the
                    # interior lies on the side of the other endpoint
                    inner = hi_side if lo_side == 0 else lo_side
                    if inner == 0:
                        raise Undecided("degenerate branch")
                    refined.append((lo, hi, sides + [inner]))
                if len(refined) > branch_cap:
                    raise BranchBudgetExceeded(f"more than {branch_cap} monotone branches")
            branches = refined
        out = []
        for lo, hi, sides in branches:
            span = Interval(CertifiedPoint.from_arb(lo), CertifiedPoint.from_arb(hi))
            out.append((span, _sides_to_orientation(sides)))
        return out


def _strict_side(y: arb, half: arb) -> int:
    if y < half:
        return -1
    if y > half:
        return 1
    if y.is_exact() and y == half:
        return 0
    raise Undecided("branch endpoint image not separated from c")
