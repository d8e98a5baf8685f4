"""Certified critical orbit and the combinatorial engine built on it.

For a symmetric unimodal map the position of every orbit point relative to c,
and the order of the points c_0 = c, c_1, ..., c_{M+1}, determine how an
interval whose endpoints are orbit points moves forward: f maps [c_u, c_v]
onto [c_{u+1}, c_{v+1}] when c is not inside, and onto [c_w, c_1] otherwise,
where c_w is the image of the endpoint farther from c.  Distances to c are
compared through images, dist(c_u) < dist(c_v) iff c_{u+1} > c_{v+1}.

So once the orbit is certified (sides decided, all points strictly ordered),
pull-backs of symmetric nice intervals, first returns, children and the
components counted by q(n) reduce to exact integer bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from flint import arb

from .arith import DEFAULT_MAX_PREC, DEFAULT_START_PREC, CertifiedPoint, precision_ladder, working_precision
from .errors import HorizonExceeded, PrecisionExhausted, SuperattractingParameter
from .map_core import MapSpec


def _exact_key(x: arb, shift: int) -> int:
    man, exp = x.mid().man_exp()
    e = int(exp) + shift
    man = int(man)
    return man << e if e >= 0 else man >> -e


class CriticalOrbit:
    """c_0 = c, ..., c_{M+1} with certified sides and a certified total order.

    ``side[e]`` is -1/+1 (0 only for e = 0), ``pos[e]`` the rank of c_e among
    all stored points, and ``dkey[e]`` (e <= M) a rank that orders points by
    distance to c (0 for c itself).
    """

    def __init__(self, m: MapSpec, length: int, prec_start: int = DEFAULT_START_PREC, prec_cap: int = DEFAULT_MAX_PREC):
        if not m.symmetric:
            raise ValueError("the orbit engine needs a symmetric map")
        self.m = m
        self.M = int(length)
        self.prec_cap = prec_cap
        last = "no attempt"
        for prec in precision_ladder(prec_start, prec_cap):
            ok, last = self._build(prec)
            if ok:
                return
        raise PrecisionExhausted(f"critical orbit of length {self.M} not certified at {prec_cap} bits: {last}")

    def _build(self, prec: int):
        m, n = self.m, self.M + 2
        with working_precision(prec):
            half = arb(1) / 2
            a = m.a_ball()
            pts = [half]
            x = a
            two = m.ell_is_two
            side = np.zeros(n, dtype=np.int8)
            for e in range(1, n):
                if e > 1:
                    if two:
                        t = 2 * x - 1
                        x = a * (1 - t * t)
                    else:
                        x = m.f_ball(x)
                if x < half:
                    side[e] = -1
                elif x > half:
                    side[e] = 1
                elif x.is_exact():
                    raise SuperattractingParameter(f"f^{e}(c) = c")
                else:
                    return False, f"side of f^{e}(c) undecided"
                pts.append(x)
            shift = prec + 8
            keys = [_exact_key(p, shift) for p in pts]
            order = sorted(range(n), key=keys.__getitem__)
            for i in range(n - 1):
                if not pts[order[i]] < pts[order[i + 1]]:
                    return False, f"f^{order[i]}(c) and f^{order[i + 1]}(c) not separated"
        pos = np.empty(n, dtype=np.int64)
        pos[np.asarray(order, dtype=np.int64)] = np.arange(n, dtype=np.int64)
        self.prec = prec
        self.points = pts
        self.side = side
        self.pos = pos
        self.dkey = (n - 1) - pos[1:]  # dkey[e] for e = 0..M
        self.by_distance = np.argsort(self.dkey, kind="stable")
        self._side_l = side.tolist()
        self._pos_l = pos.tolist()
        self._dkey_l = self.dkey.tolist()
        return True, ""

    # -- access ---------------------------------------------------------------

    def ball(self, e: int) -> arb:
        return self.points[e]

    def point(self, e: int) -> CertifiedPoint:
        with working_precision(self.prec):
            return CertifiedPoint.from_arb(self.points[e])

    def floats(self) -> np.ndarray:
        """Midpoints of the orbit balls as doubles (for reports and distances)."""
        if getattr(self, "_floats", None) is None:
            self._floats = np.array([float(p.mid()) for p in self.points])
        return self._floats

    def symbols(self, n: int) -> str:
        return "".join("L" if s < 0 else "R" if s > 0 else "C" for s in self._side_l[1 : n + 1])

    def closer_image_threshold(self, image: arb) -> int:
        """Number of e in 0..M with c_{e+1} > image (points strictly closer to
        c than any preimage of ``image``); they form a prefix of ``by_distance``.
        """
        count = 0
        for e in self.by_distance.tolist():
            p = self.points[e + 1]
            if p > image:
                count += 1
            elif p < image:
                break
            else:
                raise PrecisionExhausted(f"f^{e + 1}(c) not separated from a boundary image")
        return count

    # -- tracking -------------------------------------------------------------

    def step(self, u: int, v: int) -> Tuple[int, int]:
        """Endpoints of f([c_u, c_v]) as orbit indices."""
        s = self._side_l
        if s[u] * s[v] < 0:
            u1, v1 = u + 1, v + 1
            return (u1 if self._pos_l[u1] < self._pos_l[v1] else v1), 1
        return u + 1, v + 1

    def track(self, u: int, v: int, steps: int) -> Tuple[int, int]:
        s, p = self._side_l, self._pos_l
        lim = self.M
        for _ in range(steps):
            if s[u] * s[v] < 0:
                u1, v1 = u + 1, v + 1
                u, v = (u1 if p[u1] < p[v1] else v1), 1
            else:
                u, v = u + 1, v + 1
            if u > lim or v > lim:
                raise HorizonExceeded(f"tracking needs orbit index beyond {lim}")
        return u, v

    def track_many(self, U: np.ndarray, V: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """One tracking step for arrays of intervals."""
        if U.size and (U.max() >= self.M + 1 or V.max() >= self.M + 1):
            raise HorizonExceeded(f"tracking needs orbit index beyond {self.M}")
        cross = (self.side[U].astype(np.int16) * self.side[V]) < 0
        U1, V1 = U + 1, V + 1
        far = np.where(self.pos[U1] < self.pos[V1], U1, V1)
        return np.where(cross, far, U1), np.where(cross, 1, V1)


# ---------------------------------------------------------------------------
# traces of symmetric intervals on the orbit


class Trace:
    """Orbit trace of a symmetric interval around c.

    Membership is a distance threshold: c_e is inside iff dkey[e] <= lo_in,
    outside iff dkey[e] >= hi_out.  Indices in between (possible only when the
    threshold was located from a restricted set of testable indices) are
    resolved by ``direct`` when given.
    """

    def __init__(self, orbit: CriticalOrbit, lo_in: int, hi_out: int, direct: Optional[Callable[[int], bool]] = None, valid_upto: Optional[int] = None):
        self.orbit = orbit
        self.lo_in = lo_in
        self.hi_out = hi_out
        self._direct = direct
        self.valid_upto = orbit.M if valid_upto is None else valid_upto

    def contains(self, e: int) -> bool:
        if e > self.orbit.M:
            raise HorizonExceeded(f"membership of orbit index {e} beyond {self.orbit.M}")
        d = self.orbit._dkey_l[e]
        if d <= self.lo_in:
            return True
        if d >= self.hi_out:
            return False
        if self._direct is None or e > self.valid_upto:
            raise HorizonExceeded(f"membership of orbit index {e} not resolved by the sample")
        return self._direct(e)

    def mask(self, upto: Optional[int] = None) -> np.ndarray:
        """Boolean membership for e = 0..upto (default M)."""
        upto = self.orbit.M if upto is None else upto
        d = self.orbit.dkey[: upto + 1]
        inside = d <= self.lo_in
        amb = np.nonzero((d > self.lo_in) & (d < self.hi_out))[0]
        for e in amb.tolist():
            inside[e] = self.contains(e)
        return inside

    def members(self, E: np.ndarray) -> np.ndarray:
        """Vectorized ``contains`` for an index array."""
        if E.size and int(E.max()) > self.orbit.M:
            raise HorizonExceeded(f"membership of orbit index {int(E.max())} beyond {self.orbit.M}")
        d = self.orbit.dkey[E]
        inside = d <= self.lo_in
        for k in np.nonzero((d > self.lo_in) & (d < self.hi_out))[0].tolist():
            inside[k] = self.contains(int(E[k]))
        return inside

    def visits(self, lo: int, hi: int) -> List[int]:
        """Sorted e in [lo, hi] with c_e inside."""
        idx = np.arange(lo, hi + 1)
        return idx[self.mask(hi)[lo:]].tolist()

    def first_return(self, start: int = 0, limit: Optional[int] = None) -> int:
        """Smallest k >= 1 with c_{start + k} inside."""
        limit = self.orbit.M - start if limit is None else limit
        for k in range(1, limit + 1):
            if self.contains(start + k):
                return k
        raise HorizonExceeded(f"no return of f^{start}(c) within {limit} iterates")

    def same_as(self, other: "Trace") -> bool:
        return self.lo_in == other.lo_in and self.hi_out == other.hi_out

    @property
    def size(self) -> int:
        return self.lo_in + 1


def threshold_trace(orbit: CriticalOrbit, count: int) -> Trace:
    """Trace of a symmetric interval containing exactly the ``count`` closest points."""
    return Trace(orbit, count - 1, count)


def pullback_trace(orbit: CriticalOrbit, base: Trace, depth: int) -> Trace:
    """Trace of the component of f^{-depth}(base) containing c.

    c_e is inside iff f^depth([c, c_e]) lies in base, which is decided by
    tracking; the threshold is found by binary search over the points sorted
    by distance, using only indices whose tracking stays on the orbit.
    """
    if depth == 0:
        return base
    M = orbit.M

    def direct(e: int) -> bool:
        u, v = orbit.track(0, e, depth)
        return base.contains(u) and base.contains(v)

    testable_max = M - depth - 1
    order = orbit.by_distance
    cand = order[order <= testable_max].tolist()
    if not cand or not direct(cand[0]):
        raise HorizonExceeded("f^depth(c) is not in the base interval")
    lo, hi = 0, len(cand)  # cand[:lo+1] inside, cand[hi:] outside
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if direct(cand[mid]):
            lo = mid
        else:
            hi = mid
    dk = orbit._dkey_l
    lo_in = dk[cand[lo]]
    hi_out = dk[cand[hi]] if hi < len(cand) else M + 1
    return Trace(orbit, lo_in, hi_out, direct=direct, valid_upto=testable_max)


# ---------------------------------------------------------------------------
# shadowing depths, children, essential order


def shadow_depths(orbit: CriticalOrbit, T: Trace, indices: Sequence[int], horizon: int, returns: Optional[set] = None) -> Dict[int, int]:
    """For each j, the largest t in N_T (t <= horizon) with f^t([c, c_j]) in T.

    The pull-backs P_t(T) shrink as t grows, so membership of a fixed point is
    an initial segment of N_T; tracking stops at the first failure.  -1 means
    the point lies in no P_t.  All indices are tracked together.
    """
    idx = np.asarray(list(indices), dtype=np.int64)
    if idx.size == 0:
        return {}
    if int(idx.max()) + horizon + 1 > orbit.M:
        raise HorizonExceeded(f"shadowing needs orbit index beyond {orbit.M}")
    if returns is None:
        returns = set(T.visits(1, horizon))
    best = np.full(idx.size, -1, dtype=np.int64)
    alive = np.arange(idx.size)
    U, V = np.zeros_like(idx), idx.copy()
    last = max(returns) if returns else 0
    for t in range(1, min(horizon, last) + 1):
        U, V = orbit.track_many(U, V)
        if t in returns:
            ok = T.members(U) & T.members(V)
            best[alive[ok]] = t
            alive, U, V = alive[ok], U[ok], V[ok]
            if alive.size == 0:
                break
    return dict(zip(idx.tolist(), best.tolist()))


def child_times(orbit: CriticalOrbit, T: Trace, budget: int) -> List[int]:
    """Transition times s <= budget of the children of T.

    P_s(T) is a child iff no intermediate interval of its chain contains c,
    i.e. no earlier visit c_j (j in N_T) lies in P_{s-j}(T).
    """
    NT = T.visits(1, budget)
    if not NT:
        return []
    NTset = set(NT)
    first = NT[0]
    mu = shadow_depths(orbit, T, NT, budget, NTset)
    active = [(j, mu[j]) for j in NT if mu[j] >= first]
    children = []
    for s in NT:
        is_child = True
        for j, mj in active:
            if j >= s:
                break
            d = s - j
            if d <= mj and d in NTset:
                is_child = False
                break
        if is_child:
            children.append(s)
    return children


@dataclass
class ChainPositions:
    """Critical positions t_0 = 0 < t_1 < ... < t_p = n of the chain from
    P_n(Y) to Y: the depths t at which the chain interval contains c."""

    n: int
    positions: List[int]

    @property
    def transition_times(self) -> List[int]:
        p = self.positions
        return [p[i] - p[i - 1] for i in range(1, len(p))]


def chain_positions(orbit: CriticalOrbit, Y: Trace, ns: Sequence[int], mu: Optional[Dict[int, int]] = None) -> Dict[int, ChainPositions]:
    """Chain data for each n in ns (all in N_Y).

    The chain interval at depth t contains c iff c_{n-t} lies in P_t(Y),
    i.e. iff t <= mu(n - t) with mu the shadowing depth.
    """
    nmax = max(ns) if ns else 0
    NY = Y.visits(1, nmax)
    NYset = set(NY)
    if mu is None:
        mu = shadow_depths(orbit, Y, range(1, nmax + 1), nmax, NYset)
    out = {}
    for n in ns:
        if n not in NYset:
            raise ValueError(f"{n} is not a visit time of c to Y")
        pos = [0]
        for t in NY:
            if t > n:
                break
            if t == n or t <= mu.get(n - t, -1):
                pos.append(t)
        out[n] = ChainPositions(n, pos)
    return out
