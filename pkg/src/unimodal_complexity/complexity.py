"""Nice covers and the complexity counts q(n), p(n).

A nice cover of a symmetric nice interval Y consists of Y and the entry
domains of Y met by the critical orbit, which stands in for omega(c).  Orbit
points are coded by the element containing them.

* p(n) is the number of distinct length-n words in that coding.  Cover
  elements are pairwise disjoint open intervals, so each element of the
  n-fold join is a set of points sharing one word, and no proper subfamily
  of the join covers the sample: the minimal subcover is the set of realized
  words.
* q(n) counts components of f^{-n}(Y ∪ D(Y)) meeting the sample.  Two
  neighbouring sample points x < y lie in one component iff f^n([x, y]) sits
  inside a single cover element; f^n([x, y]) is tracked exactly through the
  orbit order, so no separator preimages have to be located numerically.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .arith import Interval
from .errors import HorizonExceeded, InsufficientData, NotInDomain
from .interval_dynamics import (
    Dynamics,
    NiceInterval,
    _ctx,
    nest_depths,
    orbit_entry_domain,
)
from .map_core import MapSpec
from .orbit import ChainPositions, child_times, shadow_depths


# ---------------------------------------------------------------------------
# cover


@dataclass(frozen=True)
class CoverElement:
    entry_time: int  # 0 for Y itself
    sides: bytes
    representative: int  # orbit index of a sample point inside


@dataclass
class NiceCover:
    """Y and the entry domains of Y met by the sample, ordered left to right.

    ``coding[e]`` is the element index of f^e(c) for e = 0..M, or -1 when the
    point does not reach Y inside the orbit horizon or within the budget.
    """

    base: NiceInterval
    dyn: Dynamics
    elements: List[CoverElement]
    coding: np.ndarray
    sample_size: int
    dropped: int = 0
    _spans: Dict[int, Interval] = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def y_index(self) -> int:
        return next(i for i, el in enumerate(self.elements) if el.entry_time == 0)

    def span(self, i: int) -> Interval:
        """Certified endpoints of element i (computed on demand)."""
        if i not in self._spans:
            el = self.elements[i]
            if el.entry_time == 0:
                self._spans[i] = self.base.span
            else:
                self._spans[i] = orbit_entry_domain(self.dyn, self.base, el.representative, el.entry_time)
        return self._spans[i]

    def spans(self) -> List[Interval]:
        return [self.span(i) for i in range(self.size)]


def build_nice_cover(m: MapSpec, Y: NiceInterval, sample: int = 20_000, budget: Optional[int] = None, dyn: Optional[Dynamics] = None) -> NiceCover:
    """Cover of the orbit sample c_1..c_sample by Y and its entry domains."""
    dyn = _ctx(m, dyn, sample)
    orb = dyn.orbit
    M = orb.M
    if sample > M:
        raise HorizonExceeded(f"sample {sample} exceeds the orbit length {M}")
    budget = M if budget is None else budget
    inY = dyn.trace(Y).mask()
    idx = np.where(inY, np.arange(M + 1), M + 10)
    nxt = np.minimum.accumulate(idx[::-1])[::-1]
    side = orb.side
    keys: Dict[tuple, int] = {}
    reps: List[int] = []
    raw = np.full(M + 1, -1, dtype=np.int64)
    dropped = 0
    for e in range(M + 1):
        k = int(nxt[e]) - e
        if nxt[e] > M or k > budget:
            if 1 <= e <= sample:
                dropped += 1
            continue
        key = (0, b"") if k == 0 else (k, side[e : e + k].tobytes())
        if key not in keys:
            keys[key] = len(keys)
            reps.append(e)
        raw[e] = keys[key]
    # drop elements never met by the sample, order the rest left to right
    if (0, b"") not in keys:
        raise NotInDomain("the critical orbit never visits Y")
    used_set = {v for v in np.unique(raw[1 : sample + 1]).tolist() if v >= 0}
    used_set.add(keys[(0, b"")])
    inv = {v: key for key, v in keys.items()}
    used = sorted(used_set, key=lambda v: orb._pos_l[reps[v]])
    remap = np.full(len(keys), -1, dtype=np.int64)
    for new, old in enumerate(used):
        remap[old] = new
    coding = np.where(raw >= 0, remap[np.maximum(raw, 0)], -1)
    elements = [CoverElement(inv[old][0], inv[old][1], reps[old]) for old in used]
    return NiceCover(Y, dyn, elements, coding, sample, dropped)


# ---------------------------------------------------------------------------
# q and p


def _checked(codes: np.ndarray) -> np.ndarray:
    if codes.size and codes.min() < 0:
        raise HorizonExceeded("orbit too short for the requested n (insufficient horizon)")
    return codes


def q_series(cover: NiceCover, n_max: int) -> List[int]:
    """q(0), ..., q(n_max).  Separation of neighbouring sample points is
    permanent because f^{-1}(Y ∪ D(Y)) ⊂ Y ∪ D(Y)."""
    orb = cover.dyn.orbit
    N = cover.sample_size
    samp = np.arange(1, N + 1)
    order = samp[np.argsort(orb.pos[samp])]
    U, V = order[:-1].copy(), order[1:].copy()
    code = cover.coding
    separated = _checked(code[U]) != _checked(code[V])
    out = [1 + int(separated.sum())]
    for _ in range(n_max):
        U, V = orb.track_many(U, V)
        separated |= _checked(code[U]) != _checked(code[V])
        out.append(1 + int(separated.sum()))
    return out


def q_of_n(m: MapSpec, cover: NiceCover, n: int) -> int:
    """q(n) computed directly for one n: count neighbouring sample points
    whose n-th image hulls are not inside a single element."""
    orb = cover.dyn.orbit
    N = cover.sample_size
    samp = np.arange(1, N + 1)
    order = samp[np.argsort(orb.pos[samp])]
    U, V = order[:-1].copy(), order[1:].copy()
    for _ in range(n):
        U, V = orb.track_many(U, V)
    code = cover.coding
    return 1 + int((_checked(code[U]) != _checked(code[V])).sum())


def p_series(cover: NiceCover, n_max: int) -> List[int]:
    """p(0), ..., p(n_max): distinct words of each length in the coding of
    the sample (p(0) = 1, the trivial join)."""
    N = cover.sample_size
    code = cover.coding
    if N + n_max - 1 >= code.size:
        raise HorizonExceeded("orbit too short for the requested word length")
    E = max(cover.size, 1)
    out = [1]
    if n_max == 0:
        return out
    cur = _checked(code[1 : N + 1]).copy()
    out.append(int(np.unique(cur).size))
    for n in range(1, n_max):
        key = cur * E + _checked(code[1 + n : N + 1 + n])
        _, cur = np.unique(key, return_inverse=True)
        cur = cur.astype(np.int64)
        out.append(int(cur.max()) + 1)
    return out


def p_of_n(cover: NiceCover, n: int) -> int:
    """Distinct length-n words, computed directly from the word tuples."""
    if n == 0:
        return 1
    N = cover.sample_size
    code = cover.coding
    if N + n - 1 >= code.size:
        raise HorizonExceeded("orbit too short for the requested word length")
    windows = np.lib.stride_tricks.sliding_window_view(_checked(code[1 : N + n]), n)
    return int(np.unique(windows, axis=0).shape[0])


# ---------------------------------------------------------------------------
# children counts of the critical components Y_{-i}


def critical_component_depths(dyn: Dynamics, Y: NiceInterval, n_max: int) -> List[int]:
    """For i = 0..n_max-1 the pull-back depth t with Y_{-i} = P_t(Y):
    t = 0 for i = 0, otherwise the first visit time of c to Y at or after i."""
    tr = dyn.trace(Y)
    out = [0]
    for i in range(1, n_max):
        t = i
        while not tr.contains(t):
            t += 1
        out.append(t)
    return out


def children_counts(dyn: Dynamics, Y: NiceInterval, n_max: int, child_budget: Optional[int] = None) -> Tuple[List[int], List[int], int]:
    """nu(Y_{-i}) for i < n_max (children with transition time <= budget),
    the pull-back depths used, and the budget."""
    B = child_budget if child_budget is not None else max(16, min(4000, dyn.M // 2 - 2))
    depths = critical_component_depths(dyn, Y, n_max)
    cache: Dict[int, int] = {}
    nu = []
    for t in depths:
        if t not in cache:
            tr = dyn.trace_at(Y.base, Y.depth + t)
            cache[t] = len(child_times(dyn.orbit, tr, B))
        nu.append(cache[t])
    return nu, depths, B


# ---------------------------------------------------------------------------
# essential order


@dataclass(frozen=True)
class EssentialOrderRecord:
    n: int
    critical_indices: Tuple[int, ...]  # 0 = i_0 > i_1 > ... > i_p = -n
    transition_times: Tuple[int, ...]  # s_1 <= ... <= s_p
    jumps: Tuple[int, ...]  # m(1) = 1 < m(2) < ...

    @property
    def M(self) -> int:
        return len(set(self.transition_times))

    @property
    def p(self) -> int:
        return len(self.transition_times)

    def s(self, j: int) -> int:
        return self.transition_times[j - 1]

    def monotone(self) -> bool:
        s = self.transition_times
        return all(s[i] <= s[i + 1] for i in range(len(s) - 1))

    def fibonacci_violations(self) -> List[int]:
        """j >= 3 where s_{m(j)} < s_{m(j-1)} (m(j) - m(j-1)) + s_{m(j-2)}."""
        m, bad = self.jumps, []
        for j in range(3, len(m) + 1):
            mj, mj1, mj2 = m[j - 1], m[j - 2], m[j - 3]
            if self.s(mj) < self.s(mj1) * (mj - mj1) + self.s(mj2):
                bad.append(j)
        return bad


def _jumps(s: Sequence[int]) -> Tuple[int, ...]:
    if not s:
        return ()
    out = [1]
    for idx in range(2, len(s) + 1):
        if s[idx - 1] > s[out[-1] - 1]:
            out.append(idx)
    return tuple(out)


def _record(pos: ChainPositions) -> EssentialOrderRecord:
    s = tuple(pos.transition_times)
    return EssentialOrderRecord(pos.n, tuple(-t for t in pos.positions), s, _jumps(s))


def essential_orders(dyn: Dynamics, Y: NiceInterval, n_max: int) -> Dict[int, EssentialOrderRecord]:
    """Records for every n in N_Y with n <= n_max."""
    orb = dyn.orbit
    tr = dyn.trace(Y)
    NY = tr.visits(1, n_max)
    if not NY:
        return {}
    NYset = set(NY)
    mu = shadow_depths(orb, tr, range(1, n_max + 1), n_max, NYset)
    out = {}
    for n in NY:
        positions = [0]
        for t in NY:
            if t > n:
                break
            if t == n or t <= mu.get(n - t, -1):
                positions.append(t)
        out[n] = _record(ChainPositions(n, positions))
    return out


def essential_order(m: MapSpec, Y: NiceInterval, n: int, dyn: Optional[Dynamics] = None) -> EssentialOrderRecord:
    dyn = _ctx(m, dyn, 4 * n + Y.depth)
    if not dyn.trace(Y).contains(n):
        raise NotInDomain(f"f^{n}(c) is not in Y")
    return essential_orders(dyn, Y, n)[n]


def second_child_ratios(dyn: Dynamics, Y: NiceInterval, ns: Sequence[int], child_budget: int) -> Dict[int, Optional[float]]:
    """Transition time of the second child of Y_{-n} divided by n."""
    out: Dict[int, Optional[float]] = {}
    for n in ns:
        tr = dyn.trace_at(Y.base, Y.depth + n)
        ch = child_times(dyn.orbit, tr, child_budget)
        out[n] = ch[1] / n if len(ch) > 1 else None
    return out


# ---------------------------------------------------------------------------
# curve


@dataclass
class ComplexityCurve:
    a: Fraction
    ell: Fraction
    n_orbit: int
    sample: int
    n_max: int
    child_budget: int
    precision_cap: int
    q: List[int]
    p: List[int]  # p[n] for n = 0 .. n_max + 1
    nu: List[int]  # nu(Y_{-i}) for i = 0 .. n_max - 1
    M: Dict[int, int]
    y_child_times: List[int]
    cover_size: int
    dropped: int = 0

    def nu_sum(self, n: int) -> int:
        return sum(self.nu[:n])

    def rows(self) -> List[Tuple[int, int, int, str, int, str]]:
        out = []
        for n in range(self.n_max + 1):
            notes = []
            if n == 0:
                notes.append("q(0)=cover size")
            if n <= (max(self.y_child_times) if self.y_child_times else 0):
                notes.append("below last child time of Y")
            M = str(self.M[n]) if n in self.M else ""
            out.append((n, self.q[n], self.p[n], M, self.nu_sum(n), ";".join(notes)))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "q", "p", "M", "nu_sum", "notes"])
        for row in self.rows():
            w.writerow(row)
        return buf.getvalue()

    def metadata(self) -> dict:
        return {
            "map": {"a": str(self.a), "ell": str(self.ell), "a_float": float(self.a)},
            "n_orbit": self.n_orbit,
            "sample": self.sample,
            "n_max": self.n_max,
            "child_budget": self.child_budget,
            "precision_cap": self.precision_cap,
            "cover_size": self.cover_size,
            "dropped_sample_points": self.dropped,
            "y_child_times": self.y_child_times,
            "nu_note": "children counted with transition time <= child_budget (lower bounds)",
        }

    def sidecar_json(self) -> str:
        return json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n"


def complexity_curve(m: MapSpec, Y: NiceInterval, n_max: int = 200, sample: int = 20_000, dyn: Optional[Dynamics] = None, child_budget: Optional[int] = None, entry_budget: Optional[int] = None) -> ComplexityCurve:
    dyn = _ctx(m, dyn, sample + 2 * n_max)
    cover = build_nice_cover(m, Y, sample, entry_budget, dyn)
    q = q_series(cover, n_max)
    p = p_series(cover, n_max + 1)
    nu, _, B = children_counts(dyn, Y, n_max, child_budget)
    M = {n: r.M for n, r in essential_orders(dyn, Y, n_max).items()}
    y_children = child_times(dyn.orbit, dyn.trace(Y), B)
    return ComplexityCurve(
        a=m.a,
        ell=m.ell,
        n_orbit=dyn.M,
        sample=sample,
        n_max=n_max,
        child_budget=B,
        precision_cap=dyn.prec_cap,
        q=q,
        p=p,
        nu=nu,
        M=M,
        y_child_times=y_children,
        cover_size=cover.size,
        dropped=cover.dropped,
    )


# ---------------------------------------------------------------------------
# checks


@dataclass
class SandwichReport:
    violations: List[str]
    upper_from: Optional[int]
    notes: List[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def sandwich_check(curve: ComplexityCurve) -> SandwichReport:
    """p(n+1) <= q(n) for all n; q(n) <= sum_{i<n} nu(Y_{-i}) beyond the last
    child transition time of Y.  nu values are lower bounds, which only makes
    the upper inequality harder to pass."""
    bad, notes = [], []
    for n in range(curve.n_max + 1):
        if n + 1 < len(curve.p) and curve.p[n + 1] > curve.q[n]:
            bad.append(f"n={n}: p(n+1)={curve.p[n + 1]} > q(n)={curve.q[n]}")
    upper_from = None
    if not curve.y_child_times:
        notes.append("no children of Y recorded; upper inequality skipped")
    else:
        upper_from = max(curve.y_child_times) + 1
        for n in range(upper_from, curve.n_max + 1):
            if curve.q[n] > curve.nu_sum(n):
                bad.append(f"n={n}: q(n)={curve.q[n]} > sum nu={curve.nu_sum(n)}")
    return SandwichReport(bad, upper_from, notes)


@dataclass
class SpecialCombinatoricsReport:
    components_hit: List[int]  # per level: 0, 1 or 2 sides of Y_k \ Y_{k+1} met
    return_times: List[int]

    @property
    def special(self) -> bool:
        return bool(self.components_hit) and all(c == 1 for c in self.components_hit)


def special_combinatorics_check(m: MapSpec, Y: NiceInterval, depth: int, sample: int = 20_000, dyn: Optional[Dynamics] = None) -> SpecialCombinatoricsReport:
    """For each nest level k < depth, how many of the two components of
    Y_k minus Y_{k+1} contain sample points."""
    dyn = _ctx(m, dyn, sample)
    ds, rs = nest_depths(dyn, depth, Y.base) if Y.depth == 0 else _relative_nest(dyn, Y, depth)
    orb = dyn.orbit
    hits = []
    for k in range(depth):
        outer = dyn.trace_at(Y.base, ds[k]).mask(sample)
        inner = dyn.trace_at(Y.base, ds[k + 1]).mask(sample)
        ring = np.nonzero(outer & ~inner)[0]
        ring = ring[ring >= 1]
        hits.append(int(np.unique(orb.side[ring]).size))
    return SpecialCombinatoricsReport(hits, rs)


def _relative_nest(dyn: Dynamics, Y: NiceInterval, depth: int):
    ds, rs = [Y.depth], []
    for _ in range(depth):
        r = dyn.trace_at(Y.base, ds[-1]).first_return(0, dyn.M // 2)
        rs.append(r)
        ds.append(ds[-1] + r)
    return ds, rs


# ---------------------------------------------------------------------------
# growth fits


MODELS = {
    "C": lambda n: np.ones_like(n),
    "C*n": lambda n: n,
    "C*n*log(n)": lambda n: n * np.log(n),
    "C*n^2": lambda n: n * n,
}
SUPER_NLOGN = {"C*n^2"}


@dataclass
class FitReport:
    best: str
    C: float
    residuals: Dict[str, float]
    coefficients: Dict[str, float]
    sup_over_nlogn: float
    inf_over_n: float
    tail: Tuple[int, int]

    def lines(self) -> List[str]:
        out = [f"best model: {self.best} with C = {self.C:.6g}"]
        for k in MODELS:
            out.append(f"model {k}: C = {self.coefficients[k]:.6g}, rms residual = {self.residuals[k]:.6g}")
        out.append(f"sup value/(n log n) over n in [{self.tail[0]}, {self.tail[1]}]: {self.sup_over_nlogn:.6g}")
        out.append(f"inf value/n over n in [{self.tail[0]}, {self.tail[1]}]: {self.inf_over_n:.6g}")
        return out


def growth_classify(series: Sequence[Tuple[int, float]], tail_from: Optional[int] = None) -> FitReport:
    """Least-squares fit of value ~ C g(n) for g in 1, n, n log n and the
    super-(n log n) sentinel n^2; the smallest rms residual wins (ties go to
    the slower model)."""
    pts = [(int(n), float(v)) for n, v in series if n >= 2]
    if len(pts) < 20:
        raise InsufficientData(f"need at least 20 points with n >= 2, got {len(pts)}")
    n = np.array([p[0] for p in pts], dtype=float)
    v = np.array([p[1] for p in pts], dtype=float)
    if n.max() < 10 * n.min():
        raise InsufficientData("n must span at least one decade")
    residuals, coeffs = {}, {}
    for name, g in MODELS.items():
        gv = g(n)
        C = float(np.dot(gv, v) / np.dot(gv, gv))
        coeffs[name] = C
        residuals[name] = float(np.sqrt(np.mean((v - C * gv) ** 2)))
    scale = max(1.0, float(np.abs(v).max()))
    best = min(MODELS, key=lambda k: (round(residuals[k] / scale, 12), list(MODELS).index(k)))
    lo = int(n.min()) if tail_from is None else tail_from
    mask = n >= lo
    nt, vt = n[mask], v[mask]
    sup_nlogn = float(np.max(vt / (nt * np.log(nt))))
    inf_n = float(np.min(vt / nt))
    return FitReport(best, coeffs[best], residuals, coeffs, sup_nlogn, inf_n, (int(nt.min()), int(nt.max())))


def envelope_sups(values: Dict[int, int], lo: int, hi: int) -> List[float]:
    """sup_{n in [L, hi]} value(n)/(n log n) for L = lo..hi."""
    ratios = [values[n] / (n * math.log(n)) for n in range(lo, hi + 1)]
    out, best = [], -math.inf
    for r in reversed(ratios):
        best = max(best, r)
        out.append(best)
    return list(reversed(out))
