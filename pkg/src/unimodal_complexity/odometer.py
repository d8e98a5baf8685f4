"""Adding machines and cyclic refining covers of the critical orbit.

The truncated adding machine on m digits adds one with carry and wraps to
all zeros when every digit is maximal.  ``build_cyclic_cover`` is the
finite-sample harness for the sufficient condition for conjugacy to an
adding machine: a nice interval T with three return domains T', Q, Q_hat
whose first returns alternate T' -> Q ∪ Q_hat -> T'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .arith import Interval, working_precision
from .errors import ConfigError, HypothesisViolation
from .map_core import MapSpec


# ---------------------------------------------------------------------------
# the adding machine


@dataclass(frozen=True)
class OdometerBase:
    alpha: Tuple[int, ...]

    def __post_init__(self):
        alpha = tuple(int(p) for p in self.alpha)
        if not alpha:
            raise ConfigError("alpha needs at least one digit base")
        if any(p < 2 for p in alpha):
            raise ConfigError(f"every digit base must be at least 2, got {alpha}")
        object.__setattr__(self, "alpha", alpha)

    @property
    def size(self) -> int:
        return math.prod(self.alpha)


@dataclass(frozen=True)
class OdometerState:
    digits: Tuple[int, ...]

    def validate(self, base: OdometerBase) -> None:
        if len(self.digits) != len(base.alpha):
            raise ValueError("digit count does not match the base")
        for x, p in zip(self.digits, base.alpha):
            if not 0 <= x < p:
                raise ValueError(f"digit {x} outside 0..{p - 1}")


def zero_state(base: OdometerBase) -> OdometerState:
    return OdometerState((0,) * len(base.alpha))


def step(base: OdometerBase, s: OdometerState) -> OdometerState:
    """Add one at the first digit and carry to the right."""
    s.validate(base)
    digits = list(s.digits)
    for i, p in enumerate(base.alpha):
        if digits[i] < p - 1:
            digits[i] += 1
            return OdometerState(tuple(digits))
        digits[i] = 0
    return OdometerState(tuple(digits))


def orbit_period(base: OdometerBase) -> int:
    """Period of the orbit of the zero state."""
    start = zero_state(base)
    s, n = step(base, start), 1
    while s != start:
        s = step(base, s)
        n += 1
    return n


def all_states(base: OdometerBase):
    for digits in product(*(range(p) for p in base.alpha)):
        yield OdometerState(tuple(digits))


@dataclass(frozen=True)
class OdometerReport:
    alpha: Tuple[int, ...]
    states: int
    period: int
    bijective: bool
    single_cycle: bool

    @property
    def ok(self) -> bool:
        return self.bijective and self.single_cycle and self.period == self.states

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} alpha: {' '.join(map(str, self.alpha))} states={self.states} period={self.period} bijective={self.bijective}"


def step_many(base: OdometerBase, digits: np.ndarray) -> np.ndarray:
    """``step`` applied to every row of an (N, len(alpha)) digit array."""
    D = np.array(digits, dtype=np.int64, copy=True)
    carry = np.ones(D.shape[0], dtype=bool)
    for i, p in enumerate(base.alpha):
        col = D[:, i]
        inc = carry & (col < p - 1)
        wrap = carry & (col == p - 1)
        col[inc] += 1
        col[wrap] = 0
        carry = wrap
    return D


def _weights(base: OdometerBase) -> np.ndarray:
    return np.cumprod((1,) + base.alpha[:-1]).astype(np.int64)


def check_odometer(base: OdometerBase, limit: int = 10**7, literal_limit: int = 4096) -> OdometerReport:
    """Exhaustive check over all states.

    Every state x is encoded as the mixed-radix integer sum d_i w_i; the map is
    a bijection with a single cycle of full length iff the encoded image of x
    is x + 1 mod N for every x.  Small state spaces are also run through the
    scalar ``step`` one state at a time.
    """
    N = base.size
    if N > limit:
        raise ConfigError(f"state space {N} above the exhaustive limit {limit}")
    x = np.arange(N, dtype=np.int64)
    w = _weights(base)
    D = (x[:, None] // w) % np.array(base.alpha, dtype=np.int64)
    img = step_many(base, D) @ w
    conj = bool(np.array_equal(img, (x + 1) % N))
    bijective = bool(np.unique(img).size == N)
    period = N if conj else _cycle_length(img)
    if N <= literal_limit:
        images = {s: step(base, s) for s in all_states(base)}
        bijective &= len(set(images.values())) == len(images)
        literal_period = orbit_period(base)
        if literal_period != period:
            period = literal_period
    return OdometerReport(base.alpha, N, period, bijective, conj and period == N)


def _cycle_length(img: np.ndarray) -> int:
    """Length of the orbit of 0 under the encoded map (N + 1 when it never returns)."""
    x, n = int(img[0]), 1
    while x != 0 and n <= img.size:
        x, n = int(img[x]), n + 1
    return n


def bases_up_to(bound: int, max_len: Optional[int] = None) -> List[OdometerBase]:
    """All alpha with every p_i >= 2 and product <= bound."""
    out: List[OdometerBase] = []

    def rec(prefix: Tuple[int, ...], prod: int):
        if prefix:
            out.append(OdometerBase(prefix))
        if max_len is not None and len(prefix) >= max_len:
            return
        p = 2
        while prod * p <= bound:
            rec(prefix + (p,), prod * p)
            p += 1

    rec((), 1)
    return out


def factorizations(n: int) -> List[OdometerBase]:
    """Every alpha with product exactly n (ordered factorizations into parts >= 2)."""
    out: List[OdometerBase] = []

    def rec(prefix: Tuple[int, ...], rest: int):
        if rest == 1:
            if prefix:
                out.append(OdometerBase(prefix))
            return
        for p in range(2, rest + 1):
            if rest % p == 0:
                rec(prefix + (p,), rest // p)

    rec((), n)
    return out


@dataclass(frozen=True)
class SweepReport:
    label: str
    checked: int
    states: int
    failures: List[OdometerReport]

    @property
    def ok(self) -> bool:
        return not self.failures

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.label}: {self.checked} bases, {self.states} states, {len(self.failures)} failures"


def sweep(bases: Sequence[OdometerBase], label: str) -> SweepReport:
    bad, states = [], 0
    for b in bases:
        r = check_odometer(b, literal_limit=0)
        states += r.states
        if not r.ok:
            bad.append(r)
    return SweepReport(label, len(bases), states, bad)


# ---------------------------------------------------------------------------
# domains on the orbit sample


@dataclass
class OrbitDomain:
    """An interval described by exact membership of the orbit points c_0..c_M."""

    name: str
    mask: np.ndarray
    span: Optional[Interval] = None


@dataclass
class CyclicCover:
    """U_0, ..., U_{k+l-1} as sets of orbit indices of the sample."""

    k: int
    l: int
    sets: List[np.ndarray]
    labels: Dict[int, int]
    diameters: List[float]
    span_lengths: Dict[str, float] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.k + self.l

    def report_lines(self, points: Optional[np.ndarray] = None) -> List[str]:
        out = [f"# k={self.k} l={self.l} sets={self.size}", "# j\tcount\tmin\tmax"]
        for j, idx in enumerate(self.sets):
            if points is not None and idx.size:
                lo, hi = float(points[idx].min()), float(points[idx].max())
                out.append(f"{j}\t{idx.size}\t{lo:.12g}\t{hi:.12g}")
            else:
                out.append(f"{j}\t{idx.size}\t\t")
        return out


def _next_visit(mask: np.ndarray) -> np.ndarray:
    """nxt[e] = smallest e' > e with mask[e'] (or len(mask) + 1 when none)."""
    M = mask.size
    idx = np.where(mask, np.arange(M), M + 1)
    after = np.empty(M, dtype=np.int64)
    after[:-1] = np.minimum.accumulate(idx[::-1])[::-1][1:]
    after[-1] = M + 1
    return after


def build_cyclic_cover(
    m: MapSpec,
    T: OrbitDomain,
    T_prime: OrbitDomain,
    Q: OrbitDomain,
    Q_hat: OrbitDomain,
    sample: Sequence[int],
    points: Optional[np.ndarray] = None,
    T_sequence: Sequence[OrbitDomain] = (),
) -> CyclicCover:
    """Sets U_j = f^j(T' ∩ sample) for j < k and f^{j-k}((Q ∪ Q_hat) ∩ sample)
    for k <= j < k + l, after checking the hypotheses on the sample:

    (i)   the supplied T sequence has strictly decreasing certified lengths;
    (ii)  c is in T' and f(Q) = f(Q_hat) (certified on the endpoints);
    (iii) every sampled x in T' has R_T(x) in Q ∪ Q_hat;
    (iv)  every sampled x in Q ∪ Q_hat has R_T(x) in T'.

    Violations raise HypothesisViolation naming the condition and point.
    """
    sample = np.asarray(sample, dtype=np.int64)
    M = T.mask.size - 1
    # (i)
    spans = [d.span for d in T_sequence]
    for i in range(1, len(spans)):
        if spans[i] is None or spans[i - 1] is None or not spans[i].length_upper < spans[i - 1].length_lower:
            raise HypothesisViolation("T_n lengths are not certified to decrease", condition="i", point=i)
    # (ii)
    if not T_prime.mask[0]:
        raise HypothesisViolation("T' does not contain c", condition="ii", point=0)
    for a, b in ((T_prime, Q), (T_prime, Q_hat), (Q, Q_hat)):
        if np.any(a.mask & b.mask):
            raise HypothesisViolation(f"{a.name} and {b.name} are not distinct domains", condition="ii", point=int(np.argmax(a.mask & b.mask)))
    if Q.span is not None and Q_hat.span is not None:
        with working_precision(256):
            for x, y in ((Q.span.left, Q_hat.span.right), (Q.span.right, Q_hat.span.left)):
                fx, fy = m.f_ball(x.ball()), m.f_ball(y.ball())
                if not fx.overlaps(fy):
                    raise HypothesisViolation("f(Q) and f(Q_hat) differ", condition="ii", point=None)
    QQ = Q.mask | Q_hat.mask
    for d in (T_prime, Q, Q_hat):
        if np.any(d.mask & ~T.mask):
            raise HypothesisViolation(f"{d.name} is not inside T", condition="ii", point=int(np.argmax(d.mask & ~T.mask)))
    nxt_T = _next_visit(T.mask)
    horizon_ok = sample[nxt_T[sample] <= M]
    in_Tp = horizon_ok[T_prime.mask[horizon_ok]]
    in_QQ = horizon_ok[QQ[horizon_ok]]
    # (iii) and (iv) with the return times k and l
    ret = nxt_T[in_Tp]
    bad = ~QQ[ret]
    if bad.any():
        raise HypothesisViolation("a return from T' misses Q ∪ Q_hat", condition="iii", point=int(in_Tp[bad][0]))
    ret2 = nxt_T[in_QQ]
    bad = ~T_prime.mask[ret2]
    if bad.any():
        raise HypothesisViolation("a return from Q ∪ Q_hat misses T'", condition="iv", point=int(in_QQ[bad][0]))
    ks = np.unique(ret - in_Tp)
    ls = np.unique(ret2 - in_QQ)
    if ks.size != 1 or ls.size != 1:
        raise HypothesisViolation(f"return times not constant: {ks.tolist()} / {ls.tolist()}", condition="iii", point=None)
    k, l = int(ks[0]), int(ls[0])
    period = k + l
    # labels from the most recent visit to T' ∪ Q ∪ Q_hat, or the next one
    union = T_prime.mask | QQ
    idx = np.where(union, np.arange(M + 1), -1)
    prev = np.maximum.accumulate(idx)
    nxt_u = _next_visit(union)
    labels: Dict[int, int] = {}
    for e in sample.tolist():
        p = int(prev[e])
        if p >= 0:
            lab = (e - p) + (0 if T_prime.mask[p] else k)
        else:
            n = int(nxt_u[e])
            if n > M:
                continue
            lab = (k if T_prime.mask[n] else k + l) - (n - e)
            lab %= period
        if not 0 <= lab < period:
            raise HypothesisViolation("orbit point outside the cyclic tower", condition="iii", point=e)
        labels[e] = lab
    for e, lab in labels.items():
        if e + 1 in labels and labels[e + 1] != (lab + 1) % period:
            raise HypothesisViolation("f does not map U_j into U_{j+1}", condition="cyclic", point=e)
    groups: List[List[int]] = [[] for _ in range(period)]
    for e, lab in labels.items():
        groups[lab].append(e)
    sets = [np.array(sorted(g), dtype=np.int64) for g in groups]
    diam = []
    for s in sets:
        if points is not None and s.size:
            diam.append(float(points[s].max() - points[s].min()))
        else:
            diam.append(0.0)
    lengths = {d.name: float(d.span.length_upper) for d in (T, T_prime, Q, Q_hat) if d.span is not None}
    return CyclicCover(k, l, sets, labels, diam, lengths)


def min_separation(cover: CyclicCover, points: np.ndarray) -> float:
    """Smallest distance between sample points carrying different labels
    (positive iff the sets are pairwise disjoint as point sets)."""
    idx = np.array(sorted(cover.labels), dtype=np.int64)
    lab = np.array([cover.labels[e] for e in idx.tolist()])
    order = np.argsort(points[idx], kind="stable")
    x, lab = points[idx][order], lab[order]
    diff = lab[1:] != lab[:-1]
    if not diff.any():
        return float("inf")
    return float(np.min((x[1:] - x[:-1])[diff]))


def refinement_check(coarse: CyclicCover, fine: CyclicCover) -> bool:
    """Every fine set inside a single coarse set (on the common sample)."""
    for s in fine.sets:
        owners = {coarse.labels.get(int(e)) for e in s.tolist()}
        owners.discard(None)
        if len(owners) > 1:
            return False
    return True


def alpha_from_covers(covers: Sequence[CyclicCover]) -> List[int]:
    """(k_1 + l_1, (k_2 + l_2)/(k_1 + l_1), ...)."""
    out, prev = [], 1
    for cov in covers:
        n = cov.size
        if n % prev:
            raise HypothesisViolation(f"cover size {n} not a multiple of {prev}", condition="refinement", point=None)
        out.append(n // prev)
        prev = n
    return out


def alpha_line(alpha: Sequence[int]) -> str:
    return "alpha: " + " ".join(str(p) for p in alpha)
