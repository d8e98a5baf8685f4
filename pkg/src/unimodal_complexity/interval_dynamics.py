"""Symmetric nice intervals, pull-backs, entry domains, children, nests.

Every nice interval is a critical pull-back of a *base* interval: either the
seed (q_hat, q) bounded by the orientation-reversing fixed point, or, after a
renormalization has been detected, the interval bounded by the
orientation-reversing periodic point of the restrictive return map.  Niceness
is inherited from the base because pull-backs of nice sets are nice.

Geometry (endpoints) is computed by chaining certified inverse laps backwards
along the critical orbit.  Combinatorics (which orbit points lie inside, first
returns, children) use the exact orbit engine in :mod:`orbit`; the two are
cross-checked in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from flint import arb

from .arith import (
    DEFAULT_MAX_PREC,
    CertifiedPoint,
    Interval,
    exact_ball,
    precision_ladder,
    working_precision,
)
from .errors import (
    BudgetExceeded,
    HorizonExceeded,
    HypothesisViolation,
    NoFixedPoint,
    NotInDomain,
    PrecisionExhausted,
    RenormalizationDetected,
    Undecided,
)
from .map_core import MapSpec
from .orbit import CriticalOrbit, Trace, child_times, pullback_trace, threshold_trace

DEFAULT_ORBIT = 200_000


# ---------------------------------------------------------------------------
# base intervals


@dataclass(frozen=True)
class BaseSpec:
    """A symmetric nice interval bounded by a periodic point p of period s.

    p is the unique zero of f^s(x) - x in the bracket (lo, hi), where
    f^s(x) - x changes sign; ``p_side`` says whether p is the right (+1) or
    left (-1) endpoint of the interval.
    """

    period: int
    lo: Fraction
    hi: Fraction
    p_side: int

    @property
    def name(self) -> str:
        return "seed-(q_hat,q)" if self.period == 1 else f"renormalization-seed(period {self.period})"


SEED_BASE = BaseSpec(period=1, lo=Fraction(1, 2), hi=Fraction(1), p_side=1)


def _iterate_ball(m: MapSpec, x: arb, n: int) -> arb:
    for _ in range(n):
        x = m.f_ball(x)
    return x


@lru_cache(maxsize=512)
def periodic_point_ball(m: MapSpec, base: BaseSpec, prec: int) -> arb:
    """Enclosure of the base boundary point at the given precision."""
    with working_precision(prec):
        lo, hi = base.lo, base.hi
        g_lo = _iterate_ball(m, exact_ball(lo), base.period) - exact_ball(lo)
        sign_lo = 1 if g_lo > 0 else -1 if g_lo < 0 else 0
        if sign_lo == 0:
            raise Undecided("sign of f^s(x) - x undecided at the bracket end")
        for _ in range(prec - 6):
            mid = (lo + hi) / 2
            xm = exact_ball(mid)
            g = _iterate_ball(m, xm, base.period) - xm
            if g > 0:
                s = 1
            elif g < 0:
                s = -1
            elif g.is_exact():
                return xm
            else:
                break
            if s == sign_lo:
                lo = mid
            else:
                hi = mid
        return exact_ball(lo).union(exact_ball(hi))


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class NicenessCertificate:
    horizon: int
    checked_numerically: int
    notes: str


@dataclass(frozen=True)
class NiceInterval:
    span: Interval
    base: BaseSpec
    depth: int
    certificate: NicenessCertificate

    @property
    def provenance(self) -> str:
        if self.depth == 0:
            return self.base.name
        return f"critical-pull-back(depth {self.depth}) of {self.base.name}"

    def report_line(self) -> str:
        c = self.certificate
        return "\t".join(
            [
                "nice",
                self.provenance,
                self.span.left.decimal(),
                self.span.right.decimal(),
                f"H={c.horizon}",
            ]
        )


@dataclass(frozen=True)
class Chain:
    """T_0, ..., T_s with T_j a component of f^{-1}(T_{j+1})."""

    intervals: Tuple[Interval, ...]
    critical: Tuple[bool, ...]

    @property
    def order(self) -> int:
        return sum(self.critical[:-1]) if self.critical else 0


@dataclass(frozen=True)
class ChildRecord:
    child: NiceInterval
    transition_time: int

    def report_line(self) -> str:
        return "\t".join(["child", str(self.transition_time), self.child.provenance, self.child.span.left.decimal(), self.child.span.right.decimal()])


@dataclass(frozen=True)
class NestLevel:
    interval: NiceInterval
    return_time: int
    kind: str  # "central" | "non-central"
    height: str  # "high" | "low"


@dataclass(frozen=True)
class CascadeRecord:
    levels: Tuple[NiceInterval, ...]
    shared_return_time: int
    maximal: bool

    @property
    def m(self) -> int:
        return len(self.levels) - 1


# ---------------------------------------------------------------------------
# orbit context


class Dynamics:
    """A map together with its certified critical orbit and cached traces."""

    def __init__(self, m: MapSpec, orbit_length: int = DEFAULT_ORBIT, prec_cap: int = DEFAULT_MAX_PREC, orbit: Optional[CriticalOrbit] = None):
        self.m = m
        self.prec_cap = prec_cap
        self.orbit = orbit if orbit is not None else CriticalOrbit(m, orbit_length, prec_cap=prec_cap)
        self._base_traces: Dict[BaseSpec, Trace] = {}
        self._traces: Dict[Tuple[BaseSpec, int], Trace] = {}

    @property
    def M(self) -> int:
        return self.orbit.M

    def base_trace(self, base: BaseSpec) -> Trace:
        if base not in self._base_traces:
            last = None
            for prec in precision_ladder(self.orbit.prec, self.prec_cap):
                try:
                    with working_precision(prec):
                        p = periodic_point_ball(self.m, base, prec)
                        image = self.m.f_ball(p)
                        count = self.orbit.closer_image_threshold(image)
                    break
                except PrecisionExhausted as err:
                    last = err
            else:
                raise PrecisionExhausted(f"base boundary not separated from the orbit: {last}")
            self._base_traces[base] = threshold_trace(self.orbit, count)
        return self._base_traces[base]

    def trace_at(self, base: BaseSpec, depth: int) -> Trace:
        key = (base, depth)
        if key not in self._traces:
            if depth == 0:
                self._traces[key] = self.base_trace(base)
            else:
                self._traces[key] = pullback_trace(self.orbit, self.base_trace(base), depth)
        return self._traces[key]

    def trace(self, T: NiceInterval) -> Trace:
        return self.trace_at(T.base, T.depth)

    def in_domain(self, base: BaseSpec, depth: int, n: int) -> bool:
        """Is f^n(c) in the pull-back of the base of the given depth?"""
        return self.trace_at(base, depth).contains(n)


_CONTEXTS: Dict[tuple, Dynamics] = {}


def dynamics_for(m: MapSpec, orbit_length: int = DEFAULT_ORBIT, prec_cap: int = DEFAULT_MAX_PREC) -> Dynamics:
    """Shared context per (map, orbit length, precision cap)."""
    key = (m, orbit_length, prec_cap)
    if key not in _CONTEXTS:
        if len(_CONTEXTS) > 8:
            _CONTEXTS.clear()
        _CONTEXTS[key] = Dynamics(m, orbit_length, prec_cap)
    return _CONTEXTS[key]


def _ctx(m: MapSpec, dyn: Optional[Dynamics], need: int = 0) -> Dynamics:
    if dyn is not None:
        return dyn
    length = 4096
    while length < need + 64:
        length *= 2
    return dynamics_for(m, length)


# ---------------------------------------------------------------------------
# geometric pull-backs


def _pullback_balls(m: MapSpec, lo: arb, hi: arb, sides: Sequence[int]):
    """Pull (lo, hi) back along a point whose orbit has the given sides
    (sides[j] is the side of the j-th image, 0 for c itself).

    Returns the list of chain intervals (as ball pairs) from j = 0 to len(sides)
    and which of them contain c.  Raises Undecided on an uncertified branch choice.
    """
    a = m.a_ball()
    chain = [(lo, hi)]
    crit = [False]
    for s in reversed(sides):
        alpha, beta = chain[-1]
        if not alpha < a:
            raise NotInDomain("interval above the critical value has no preimage")
        if beta > a:
            new = (m.inverse_ball(alpha, -1), m.inverse_ball(alpha, 1))
            crit.append(True)
        elif beta < a:
            if s == 0:
                raise NotInDomain("pull-back along c requires the critical value inside")
            if s < 0:
                new = (m.inverse_ball(alpha, -1), m.inverse_ball(beta, -1))
            else:
                new = (m.inverse_ball(beta, 1), m.inverse_ball(alpha, 1))
            crit.append(False)
        else:
            raise Undecided("critical value not separated from a chain endpoint")
        if not new[0] < new[1]:
            raise Undecided("chain interval endpoints not separated")
        chain.append(new)
    chain.reverse()
    crit.reverse()
    return chain, crit


def _base_span_balls(m: MapSpec, base: BaseSpec, prec: int):
    p = periodic_point_ball(m, base, prec)
    ph = 1 - p
    return (ph, p) if base.p_side > 0 else (p, ph)


def _to_interval(pair) -> Interval:
    return Interval(CertifiedPoint.from_arb(pair[0]), CertifiedPoint.from_arb(pair[1]))


def pullback_chain(m: MapSpec, base: BaseSpec, depth: int, sides: Sequence[int], prec_cap: int = DEFAULT_MAX_PREC) -> Chain:
    """Chain of the base interval along an orbit with the given sides."""
    last = None
    for prec in precision_ladder(128, prec_cap):
        try:
            with working_precision(prec):
                lo, hi = _base_span_balls(m, base, prec)
                chain, crit = _pullback_balls(m, lo, hi, sides[:depth])
                return Chain(tuple(_to_interval(c) for c in chain), tuple(crit))
        except Undecided as err:
            last = err
    raise PrecisionExhausted(f"pull-back chain undecided at {prec_cap} bits: {last}")


def _certificate(depth: int, horizon: int, checked: int) -> NicenessCertificate:
    if depth == 0:
        notes = "boundary orbit is the periodic orbit of the base point, outside the open interval"
    else:
        notes = (
            f"f^{depth} maps the boundary onto the base boundary, whose orbit stays outside; "
            f"iterates j <= {checked} checked numerically"
        )
    return NicenessCertificate(horizon=horizon, checked_numerically=checked, notes=notes)


def _make_nice(m: MapSpec, base: BaseSpec, depth: int, side_word: Sequence[int], horizon: int, prec_cap: int) -> NiceInterval:
    chain = pullback_chain(m, base, depth, side_word, prec_cap)
    return NiceInterval(chain.intervals[0], base, depth, _certificate(depth, horizon, 0))


def seed_nice_interval(m: MapSpec, horizon: int = 10_000) -> NiceInterval:
    """(q_hat, q) with q the orientation-reversing fixed point."""
    if m.a <= m.c:
        raise NoFixedPoint(f"f(c) = {m.a} <= c")
    with working_precision(256):
        lo, hi = _base_span_balls(m, SEED_BASE, 256)
        span = _to_interval((lo, hi))
    return NiceInterval(span, SEED_BASE, 0, _certificate(0, horizon, 0))


def _critical_sides(dyn: Dynamics, n: int) -> List[int]:
    if n > dyn.M:
        raise HorizonExceeded(f"critical orbit shorter than {n}")
    return dyn.orbit._side_l[: n + 1]


def critical_pullback(m: MapSpec, T: NiceInterval, n: int, dyn: Optional[Dynamics] = None) -> NiceInterval:
    """Component of f^{-n}(T) containing c; requires f^n(c) in T."""
    dyn = _ctx(m, dyn, n + T.depth + 2)
    if not dyn.trace(T).contains(n):
        raise NotInDomain(f"f^{n}(c) is not in T")
    depth = T.depth + n
    sides = _critical_sides(dyn, depth)
    return _make_nice(m, T.base, depth, sides, T.certificate.horizon, dyn.prec_cap)


def critical_chain(m: MapSpec, T: NiceInterval, n: int, dyn: Optional[Dynamics] = None) -> Chain:
    """The chain from the critical pull-back P_n(T) up to T."""
    dyn = _ctx(m, dyn, n + T.depth + 2)
    if not dyn.trace(T).contains(n):
        raise NotInDomain(f"f^{n}(c) is not in T")
    full = pullback_chain(m, T.base, T.depth + n, _critical_sides(dyn, T.depth + n), dyn.prec_cap)
    return Chain(full.intervals[: n + 1], full.critical[: n + 1])


# ---------------------------------------------------------------------------
# first entry and entry domains (for arbitrary points)


def _membership(T: Interval, x: arb) -> Optional[bool]:
    return T.contains_point(CertifiedPoint.from_arb(x))


def _span_at(m: MapSpec, T: NiceInterval, prec: int, dyn: Optional[Dynamics]):
    lo, hi = _base_span_balls(m, T.base, prec)
    if T.depth == 0:
        return lo, hi
    dyn = _ctx(m, dyn, T.depth + 2)
    chain, _ = _pullback_balls(m, lo, hi, _critical_sides(dyn, T.depth)[: T.depth])
    return chain[0]


def _inside_balls(span, x: arb) -> Optional[bool]:
    lo, hi = span
    if lo < x and x < hi:
        return True
    if x < lo or x > hi:
        return False
    return None


def first_entry(m: MapSpec, x: CertifiedPoint, T: NiceInterval, budget: int = 10_000, dyn: Optional[Dynamics] = None, prec_cap: int = DEFAULT_MAX_PREC) -> Tuple[int, CertifiedPoint]:
    """Smallest k >= 1 with f^k(x) in T, and the landing point."""
    last = None
    for prec in precision_ladder(128, prec_cap):
        with working_precision(prec):
            try:
                span = _span_at(m, T, prec, dyn)
            except Undecided as err:
                last = err
                continue
            y = x.ball()
            undecided = False
            for k in range(1, budget + 1):
                y = m.f_ball(y)
                inside = _inside_balls(span, y)
                if inside is None:
                    undecided = True
                    break
                if inside:
                    return k, CertifiedPoint.from_arb(y)
            if not undecided:
                raise BudgetExceeded(f"no entry into T within {budget} iterates")
            last = f"membership undecided at iterate {k}"
    raise PrecisionExhausted(f"first entry undecided at {prec_cap} bits: {last}")


def entry_domain(m: MapSpec, x: CertifiedPoint, T: NiceInterval, budget: int = 10_000, dyn: Optional[Dynamics] = None, prec_cap: int = DEFAULT_MAX_PREC) -> Interval:
    """The component of D(T) containing x: pull T back along the orbit of x."""
    k, _ = first_entry(m, x, T, budget, dyn, prec_cap)
    last = None
    for prec in precision_ladder(128, prec_cap):
        with working_precision(prec):
            try:
                sides = []
                y = x.ball()
                half = arb(1) / 2
                for _ in range(k):
                    if y < half:
                        sides.append(-1)
                    elif y > half:
                        sides.append(1)
                    elif y.is_exact():
                        sides.append(0)
                    else:
                        raise Undecided("side of an iterate undecided")
                    y = m.f_ball(y)
                lo, hi = _span_at(m, T, prec, dyn)
                chain, _ = _pullback_balls(m, lo, hi, sides)
                return _to_interval(chain[0])
            except Undecided as err:
                last = err
    raise PrecisionExhausted(f"entry domain undecided at {prec_cap} bits: {last}")


def orbit_entry_domain(dyn: Dynamics, T: NiceInterval, e: int, k: int) -> Interval:
    """Entry domain of f^e(c) with known entry time k, via the orbit sides."""
    sides = dyn.orbit._side_l[e : e + k]
    last = None
    for prec in precision_ladder(128, dyn.prec_cap):
        with working_precision(prec):
            try:
                lo, hi = _span_at(dyn.m, T, prec, dyn)
                chain, _ = _pullback_balls(dyn.m, lo, hi, sides)
                return _to_interval(chain[0])
            except Undecided as err:
                last = err
    raise PrecisionExhausted(f"entry domain undecided: {last}")


@dataclass(frozen=True)
class ReturnDomain:
    span: Interval
    return_time: int
    central: bool
    representative: int  # an orbit index inside


def return_domain_keys(dyn: Dynamics, T: NiceInterval, sample: Sequence[int], budget: int) -> Dict[tuple, Tuple[int, int]]:
    """Combinatorial identity of the return domains hit by orbit indices.

    A domain not containing c is determined by its return time and the sides
    of the first return-time iterates; the central domain is the pull-back at
    the first return time of c.
    """
    tr = dyn.trace(T)
    side = dyn.orbit.side
    s1 = tr.first_return(0, budget)
    central = dyn.trace_at(T.base, T.depth + s1)
    keys: Dict[tuple, Tuple[int, int]] = {}
    for e in sample:
        if not tr.contains(e):
            continue
        if central.contains(e):
            key = ("central", s1)
            k = s1
        else:
            k = tr.first_return(e, budget)
            key = (k, side[e : e + k].tobytes())
        if key not in keys:
            keys[key] = (e, k)
    return keys


def return_domains(m: MapSpec, T: NiceInterval, sample: Sequence[int], budget: int = 10_000, dyn: Optional[Dynamics] = None) -> List[ReturnDomain]:
    """Distinct return domains of T containing sampled orbit points, sorted."""
    dyn = _ctx(m, dyn, max(sample, default=0) + budget)
    keys = return_domain_keys(dyn, T, sample, budget)
    out = []
    for key, (e, k) in keys.items():
        if key[0] == "central":
            span = critical_pullback(m, T, k, dyn).span
        else:
            span = orbit_entry_domain(dyn, T, e, k)
        out.append(ReturnDomain(span, k, key[0] == "central", e))
    out.sort(key=lambda d: d.span.left.mid)
    return out


# ---------------------------------------------------------------------------
# children, nests, cascades


def children(m: MapSpec, T: NiceInterval, time_budget: int = 2000, dyn: Optional[Dynamics] = None) -> List[ChildRecord]:
    """Children of T with transition time at most ``time_budget``."""
    dyn = _ctx(m, dyn, 2 * time_budget + T.depth)
    times = child_times(dyn.orbit, dyn.trace(T), time_budget)
    out = []
    for s in times:
        child = critical_pullback(m, T, s, dyn)
        out.append(ChildRecord(child, s))
    return out


def _orientation_until(dyn: Dynamics, start: int, stop: int) -> int:
    """Orientation of f^(stop - start) near f^start(c) (start >= 1)."""
    o = 1
    s = dyn.orbit._side_l
    for j in range(start, stop):
        o *= -s[j]
    return o


def _endpoints_separated(m: MapSpec, base: BaseSpec, d1: int, d2: int, sides: Sequence[int], prec_cap: int) -> bool:
    """Are the pull-backs of depths d1 < d2 certified to be different?"""
    for prec in precision_ladder(256, min(prec_cap, 1024)):
        with working_precision(prec):
            try:
                lo, hi = _base_span_balls(m, base, prec)
                c1, _ = _pullback_balls(m, lo, hi, sides[:d1])
                c2, _ = _pullback_balls(m, lo, hi, sides[:d2])
            except Undecided:
                continue
            if c1[0][0] < c2[0][0]:
                return True
    return False


def principal_nest(m: MapSpec, depth: int, dyn: Optional[Dynamics] = None, base: BaseSpec = SEED_BASE, budget: Optional[int] = None) -> List[NestLevel]:
    """Levels I^0 (the base) ... I^depth with return times and return types.

    Level k records r_k (first return of c to I^k), whether that return is
    central (lands in I^{k+1}) and high (f^{r_k}(I^{k+1}) contains c).
    """
    dyn = _ctx(m, dyn, 0)
    budget = dyn.M // 2 if budget is None else budget
    levels: List[NestLevel] = []
    d = 0
    for k in range(depth + 1):
        T = dyn.trace_at(base, d)
        r = T.first_return(0, budget)
        try:
            T_next = dyn.trace_at(base, d + r)
        except HorizonExceeded as err:
            raise BudgetExceeded(f"nest level {k + 1} needs a longer orbit") from err
        if T_next.same_as(T):
            sides = dyn.orbit._side_l[: d + r + 1]
            if not _endpoints_separated(m, base, d, d + r, sides, dyn.prec_cap):
                raise RenormalizationDetected(f"restrictive interval of period {r} at nest level {k}", period=r, level=k)
        central = T_next.contains(r)
        o = _orientation_until(dyn, 1, r)
        high = dyn.orbit._side_l[r] == o
        interval = _make_nice(m, base, d, dyn.orbit._side_l[: d + 1], 10 * budget, dyn.prec_cap)
        levels.append(NestLevel(interval, r, "central" if central else "non-central", "high" if high else "low"))
        d += r
    return levels


def nest_depths(dyn: Dynamics, depth: int, base: BaseSpec = SEED_BASE) -> Tuple[List[int], List[int]]:
    """Depths D_k of the nest levels (relative to the base) and return times."""
    ds, rs = [0], []
    for k in range(depth):
        r = dyn.trace_at(base, ds[-1]).first_return(0, dyn.M // 2)
        rs.append(r)
        ds.append(ds[-1] + r)
    return ds, rs


def central_cascade(m: MapSpec, T: NiceInterval, dyn: Optional[Dynamics] = None, max_levels: int = 10_000) -> CascadeRecord:
    """T = T^0 ⊃ T^1 ⊃ ... ⊃ T^m, successive central return domains while the
    return time of c stays equal to s; stops at the first T^m missing f^s(c)."""
    dyn = _ctx(m, dyn, 0)
    tr = dyn.trace(T)
    s = tr.first_return(0, dyn.M // 2)
    depths = [T.depth]
    maximal = False
    for _ in range(max_levels):
        d = depths[-1] + s
        depths.append(d)
        if not dyn.trace_at(T.base, d).contains(s):
            maximal = True
            break
    sides = dyn.orbit._side_l[: depths[-1] + 1]
    levels = tuple(_make_nice(m, T.base, d, sides, T.certificate.horizon, dyn.prec_cap) for d in depths)
    return CascadeRecord(levels, s, maximal)


def well_inside_margin(J: Interval, I: Interval) -> CertifiedPoint:
    """min(left gap, right gap) / |J| as an enclosure."""
    inside = I.contains_interval(J)
    if inside is not True:
        raise HypothesisViolation("J is not contained in I", condition="containment")
    gl_lo = J.left.lower - I.left.upper
    gl_hi = J.left.upper - I.left.lower
    gr_lo = I.right.lower - J.right.upper
    gr_hi = I.right.upper - J.right.lower
    len_lo = J.right.lower - J.left.upper
    len_hi = J.right.upper - J.left.lower
    lo = max(Fraction(0), min(gl_lo, gr_lo)) / len_hi
    hi = max(Fraction(0), min(gl_hi, gr_hi)) / len_lo
    return CertifiedPoint((lo + hi) / 2, (hi - lo) / 2)


def niceness_spot_check(m: MapSpec, T: NiceInterval, horizon: Optional[int] = None, prec_cap: int = DEFAULT_MAX_PREC, dyn: Optional[Dynamics] = None) -> NicenessCertificate:
    """Check f^j(∂T) outside T for j = 1 .. min(horizon, depth + period).

    Beyond that the boundary orbit is the base periodic orbit, which the base
    check covers.  Raises HypothesisViolation on a certified failure.
    """
    H = T.certificate.horizon if horizon is None else horizon
    # at depth 0, f^period lands back on the boundary itself, outside the open interval
    steps = min(H, T.depth + T.base.period - (1 if T.depth == 0 else 0))
    for prec in precision_ladder(256, prec_cap):
        with working_precision(prec):
            try:
                span = _span_at(m, T, prec, dyn)
            except Undecided:
                continue
            ok = True
            for b in span:
                y = b
                for j in range(1, steps + 1):
                    y = m.f_ball(y)
                    inside = _inside_balls(span, y)
                    if inside is None:
                        ok = False
                        break
                    if inside:
                        raise HypothesisViolation(f"f^{j} of a boundary point re-enters T", condition="nice")
                if not ok:
                    break
            if ok:
                return NicenessCertificate(H, steps, _certificate(T.depth, H, steps).notes)
    raise PrecisionExhausted("niceness spot check undecided")


def check_nesting(intervals: Sequence[NiceInterval]) -> List[Tuple[int, int]]:
    """Pairs (i, j) that are neither disjoint nor nested (expected empty)."""
    bad = []
    for i in range(len(intervals)):
        for j in range(i + 1, len(intervals)):
            A, B = intervals[i].span, intervals[j].span
            if A.disjoint_from(B) is True:
                continue
            if A.contains_interval(B) is True or B.contains_interval(A) is True:
                continue
            if A.left == B.left and A.right == B.right:
                continue
            bad.append((i, j))
    return bad


# ---------------------------------------------------------------------------
# renormalization seeds


def renormalization_seed(m: MapSpec, K: NiceInterval, period: int, dyn: Optional[Dynamics] = None) -> BaseSpec:
    """Base interval for the next renormalization level.

    K is restrictive of the given period (f^period(K) ⊂ K).  Its orientation
    reversing periodic point p lies on the half of K away from the fixed
    boundary point; the new base is (p, p_hat).
    """
    dyn = _ctx(m, dyn, 0)
    with working_precision(256):
        lo, hi = _span_at(m, K, 256, dyn)
        left = _iterate_ball(m, lo, period)
        # the endpoint fixed by f^period is the one that returns to itself
        left_fixed = abs(left - lo) < abs(left - hi)
    csp = dyn.orbit._side_l[period]
    if left_fixed:
        # search the right half (c, right endpoint)
        brk_lo, brk_hi, p_side = Fraction(1, 2), K.span.right.lower, 1
    else:
        brk_lo, brk_hi, p_side = K.span.left.upper, Fraction(1, 2), -1
    base = BaseSpec(period=period, lo=brk_lo, hi=brk_hi, p_side=p_side)
    with working_precision(256):
        g1 = _iterate_ball(m, exact_ball(brk_lo), period) - exact_ball(brk_lo)
        g2 = _iterate_ball(m, exact_ball(brk_hi), period) - exact_ball(brk_hi)
        if not ((g1 > 0 and g2 < 0) or (g1 < 0 and g2 > 0)):
            raise NotInDomain(f"no sign change of f^{period}(x) - x on the reversing half (side of f^s(c): {csp})")
    return base


def base_interval(m: MapSpec, base: BaseSpec, horizon: int = 10_000) -> NiceInterval:
    with working_precision(256):
        span = _to_interval(_base_span_balls(m, base, 256))
    return NiceInterval(span, base, 0, _certificate(0, horizon, 0))


def renormalization_tower(m: MapSpec, levels: int, dyn: Optional[Dynamics] = None) -> List[NiceInterval]:
    """Base intervals Y_1 (the seed), Y_2, ... of successive renormalizations.

    Each Y_{i+1} is built from the restrictive interval found when the
    principal nest of Y_i stops shrinking.
    """
    dyn = _ctx(m, dyn, 0)
    out = [seed_nice_interval(m)]
    while len(out) < levels:
        Y = out[-1]
        try:
            ds, rs = nest_depths(dyn, 8, Y.base)
        except HorizonExceeded as err:
            raise BudgetExceeded("orbit too short to follow the nest") from err
        found = None
        for k in range(len(rs)):
            T = dyn.trace_at(Y.base, ds[k])
            Tn = dyn.trace_at(Y.base, ds[k + 1])
            if Tn.same_as(T):
                sides = dyn.orbit._side_l[: ds[k + 1] + 1]
                if not _endpoints_separated(m, Y.base, ds[k], ds[k + 1], sides, dyn.prec_cap):
                    found = (ds[k], rs[k])
                    break
        if found is None:
            raise NotInDomain("no restrictive interval found: the map does not look renormalizable")
        d, period = found
        K = NiceInterval(_make_nice(m, Y.base, d, dyn.orbit._side_l[: d + 1], 10_000, dyn.prec_cap).span, Y.base, d, Y.certificate)
        out.append(base_interval(m, renormalization_seed(m, K, period, dyn)))
    return out


def report_lines(records) -> str:
    """Tab-separated report: kind, provenance or transition time, endpoints."""
    header = "# kind\tprovenance|transition_time\tleft\tright\textra"
    return "\n".join([header] + [r.report_line() for r in records]) + "\n"
