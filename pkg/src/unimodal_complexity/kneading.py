"""Itineraries, cutting times, kneading maps and the parameter search.

Symbols are the characters ``L``, ``C`` and ``R``.  Position j of a word
(1-based, as in ``word[j - 1]``) is the side of f^j(c).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from flint import arb

from .arith import (
    DEFAULT_MAX_PREC,
    DEFAULT_START_PREC,
    CertifiedPoint,
    precision_ladder,
    working_precision,
)
from .errors import (
    HorizonExceeded,
    NotACuttingSequence,
    NotFound,
    PrecisionExhausted,
    SuperattractingParameter,
)
from .map_core import MapSpec

_SYM_VALUE = {"L": -1, "C": 0, "R": 1}


# ---------------------------------------------------------------------------
# orbit symbols


def _orbit_symbols_at(m: MapSpec, n: int, prec: int, target: Optional[str] = None):
    """Certified symbols of f^1(c)..f^n(c) at one precision.

    Stops early at the first undecided symbol, or (when ``target`` is given) at
    the first symbol differing from the target.  Returns (symbols, undecided).
    """
    out = []
    with working_precision(prec):
        half = arb(1) / 2
        a = m.a_ball()
        x = a
        two = m.ell_is_two
        for j in range(1, n + 1):
            if j > 1:
                if two:
                    t = 2 * x - 1
                    x = a * (1 - t * t)
                else:
                    x = m.f_ball(x)
            if x < half:
                s = "L"
            elif x > half:
                s = "R"
            elif x.is_exact() and x == half:
                s = "C"
            else:
                return "".join(out), True
            out.append(s)
            if target is not None and s != target[j - 1]:
                break
    return "".join(out), False


def itinerary(m: MapSpec, n: int, prec_start: int = DEFAULT_START_PREC, prec_cap: int = DEFAULT_MAX_PREC) -> str:
    """Certified itinerary of f(c): symbols of f^j(c) for j = 1..n.

    A ``C`` beyond position 0 marks a superattracting parameter; it is returned
    in the word (the caller decides whether that is fatal).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    best = ""
    for prec in precision_ladder(prec_start, prec_cap):
        word, undecided = _orbit_symbols_at(m, n, prec)
        if not undecided:
            return word
        best = word
    raise PrecisionExhausted(f"itinerary undecided at position {len(best) + 1} at {prec_cap} bits")


# ---------------------------------------------------------------------------
# pure combinatorics


def cutting_times_from_word(word: str, K: Optional[int] = None) -> List[int]:
    """Cutting times determined by a finite itinerary of f(c).

    S_0 = 1 and S_{k+1} = S_k + min{j >= 1 : symbol j != symbol S_k + j};
    c lies strictly between f^j(c) and f^{S_k + j}(c) exactly when their sides
    differ.  Returns only the cutting times the word determines.
    """
    S = [1]
    n = len(word)
    while K is None or len(S) <= K:
        sk = S[-1]
        j = 1
        found = False
        while sk + j <= n:
            u, v = word[j - 1], word[sk + j - 1]
            if "C" in (u, v):
                raise SuperattractingParameter(f"critical point periodic (C at position {j if u == 'C' else sk + j})")
            if u != v:
                found = True
                break
            j += 1
        if not found:
            break
        S.append(sk + j)
    return S


def word_from_S(S: Sequence[int]) -> str:
    """Itinerary symbols 1..S[-1] determined by a cutting-time sequence.

    Between consecutive cutting times the word copies its own prefix; at each
    cutting time the copied symbol is flipped.
    """
    if not S or S[0] != 1:
        raise NotACuttingSequence("S must start with 1")
    nu = ["R"]
    for k in range(len(S) - 1):
        a, b = S[k], S[k + 1]
        if b <= a:
            raise NotACuttingSequence("S must be strictly increasing")
        for n in range(a + 1, b + 1):
            sym = nu[n - a - 1]
            if n == b:
                sym = "L" if sym == "R" else "R"
            nu.append(sym)
    return "".join(nu)


def kneading_map_from_S(S: Sequence[int]) -> List[int]:
    """Q with S[k+1] - S[k] = S[Q[k+1]] and Q[0] = 0."""
    if not S or S[0] != 1:
        raise NotACuttingSequence("S must start with 1")
    index: Dict[int, int] = {}
    Q = [0]
    for k, s in enumerate(S):
        if k > 0:
            if s <= S[k - 1]:
                raise NotACuttingSequence(f"S not strictly increasing at index {k}")
            d = s - S[k - 1]
            if d not in index:
                raise NotACuttingSequence(f"S[{k}] - S[{k - 1}] = {d} is not an earlier cutting time")
            Q.append(index[d])
        index[s] = k
    return Q


def S_from_Q(Q: Sequence[int], K: Optional[int] = None) -> List[int]:
    """Cutting times S[0..K] from the recursion S[k+1] = S[k] + S[Q[k+1]]."""
    if K is None:
        K = len(Q) - 1
    if K >= len(Q):
        raise IndexError(f"Q has {len(Q)} entries, {K + 1} needed")
    S = [1]
    for k in range(K):
        q = Q[k + 1]
        if not 0 <= q <= k:
            raise IndexError(f"Q[{k + 1}] = {q} refers to a later cutting time")
        S.append(S[k] + S[q])
    return S


def random_admissible_Q(rng: random.Random, length: int) -> List[int]:
    """Q prefix with Q[0] = 0 and 0 <= Q[j] <= j - 1."""
    return [0] + [rng.randint(0, j - 1) for j in range(1, length)]


def twisted_compare(w: str, t: str) -> int:
    """Parity-lexicographic order of kneading words: -1, 0 (prefix match) or 1.

    At the first difference the symbol values L < C < R decide, reversed when
    the common prefix holds an odd number of R's.
    """
    parity = 0
    for x, y in zip(w, t):
        if x != y:
            s = 1 if _SYM_VALUE[x] > _SYM_VALUE[y] else -1
            return s if parity == 0 else -s
        if x == "R":
            parity ^= 1
    return 0


# ---------------------------------------------------------------------------
# cutting times of a concrete map


@dataclass
class KneadingData:
    symbols: str
    S: List[int]
    Q: List[int]
    z: List[CertifiedPoint] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            "S: " + " ".join(str(s) for s in self.S),
            "Q: " + " ".join(str(q) for q in self.Q),
            "sym: " + self.symbols,
        ]
        for k, z in enumerate(self.z):
            lines.append(f"z[{k}]: {z.decimal()}")
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "KneadingData":
        S: List[int] = []
        Q: List[int] = []
        sym = ""
        notes = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition(":")
            val = val.strip()
            if key == "S":
                S = [int(v) for v in val.split()]
            elif key == "Q":
                Q = [int(v) for v in val.split()]
            elif key == "sym":
                sym = val
            elif key == "note":
                notes.append(val)
        return cls(symbols=sym, S=S, Q=Q, notes=notes)


def closest_precritical_points(m: MapSpec, symbols: str, S: Sequence[int], prec: int = 256) -> List[CertifiedPoint]:
    """z_k in (0, c) with f^{S_k}(z_k) = c, closest to c among such points.

    f^j(z_k) shares the side of f^j(c) for 1 <= j < S_k, so z_k is the
    composition of inverse laps along the critical itinerary applied to c.
    """
    out = []
    with working_precision(prec):
        for sk in S:
            x = arb(1) / 2
            for j in range(sk - 1, 0, -1):
                x = m.inverse_ball(x, _SYM_VALUE[symbols[j - 1]])
            x = m.inverse_ball(x, -1)
            out.append(CertifiedPoint.from_arb(x))
    return out


def cutting_times(
    m: MapSpec,
    K: int,
    iterate_budget: int = 1 << 20,
    prec_start: int = DEFAULT_START_PREC,
    prec_cap: int = DEFAULT_MAX_PREC,
    with_z: bool = True,
) -> KneadingData:
    """S_0..S_K, the kneading map and closest precritical points of m.

    The itinerary is computed once, doubling its length until S_K is
    determined, then the cutting times are read off it.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    if m.a <= m.c:
        raise HorizonExceeded("f(c) <= c: the critical orbit never returns across c")
    n = 64
    while True:
        n = min(n, iterate_budget)
        word = itinerary(m, n, prec_start, prec_cap)
        S = cutting_times_from_word(word, K)
        if len(S) > K:
            break
        if n >= iterate_budget:
            raise HorizonExceeded(f"only {len(S)} cutting times within {iterate_budget} iterates")
        n *= 2
    word = word[: S[K]]
    Q = kneading_map_from_S(S)
    z = closest_precritical_points(m, word, S) if with_z and S[K] <= 4096 else []
    return KneadingData(symbols=word, S=S, Q=Q, z=z)


# ---------------------------------------------------------------------------
# the wild combinatorics


@dataclass
class WildCombinatorics:
    r: List[int]
    t: List[int]
    merged_cutting_times: List[int]
    k0_offset: Optional[int] = None


def wild_combinatorics(K: int, r0: int = 3, t0: int = 2) -> WildCombinatorics:
    """r_k, t_k for k <= K and the merged cutting times they generate.

    r_{k+1} = r_k + t_k; t_{k+1} = r_k for odd k and r_{k+1} for even k.  The
    merged list runs r_1, r_1 + r_0, r_2, r_3, r_3 + r_2, r_4, ...
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    r, t = [r0], [t0]
    for k in range(K):
        r.append(r[k] + t[k])
        t.append(r[k] if k % 2 == 1 else r[k + 1])
    merged = []
    m = 0
    while 2 * m + 1 <= K:
        merged.append(r[2 * m + 1])
        merged.append(r[2 * m + 1] + r[2 * m])
        if 2 * m + 2 <= K:
            merged.append(r[2 * m + 2])
        m += 1
    return WildCombinatorics(r=r, t=t, merged_cutting_times=merged)


def wild_cutting_times(K: int) -> List[int]:
    """The full cutting-time sequence 1, 2, 3 followed by the merged tail."""
    return [1, 2, 3] + wild_combinatorics(K).merged_cutting_times


def locate_offset(S: Sequence[int], tail: Sequence[int]) -> Optional[int]:
    """Index k0 with S[k0 + 1 + i] = tail[i] on the common range, or None."""
    if not tail:
        return None
    for k0 in range(-1, len(S) - 1):
        span = min(len(tail), len(S) - k0 - 1)
        if span >= 1 and all(S[k0 + 1 + i] == tail[i] for i in range(span)):
            return k0
    return None


def q_pattern_lock_in(Q: Sequence[int], period: int = 3, min_repeats: int = 3) -> Optional[tuple]:
    """Detect the first k from which Q(k) = k - d[(k - k_start) mod period].

    Returns (k_start, (d_0, .., d_{period-1})) for the earliest start whose
    pattern holds through the end of Q and covers at least ``min_repeats``
    periods, else None.
    """
    n = len(Q)
    for start in range(1, n - period * min_repeats + 1):
        d = tuple(start + i - Q[start + i] for i in range(period))
        if all(k - Q[k] == d[(k - start) % period] for k in range(start, n)):
            return start, d
    return None


@dataclass
class BruinReport:
    k1: int
    N: int
    horizon: int
    failures: List[tuple]

    @property
    def holds(self) -> bool:
        return not self.failures


def bruin_criterion(Q: Sequence[int], k1: int, N: int) -> BruinReport:
    """All k >= k1 on the horizon where Q(k+1) >= Q(Q(k)) + 1 or k - Q(k) <= N fails."""
    fails = []
    for k in range(k1, len(Q) - 1):
        if not Q[k + 1] >= Q[Q[k]] + 1:
            fails.append((k, "Q(k+1) >= Q(Q(k)) + 1"))
        if not k - Q[k] <= N:
            fails.append((k, f"k - Q(k) <= {N}"))
    return BruinReport(k1=k1, N=N, horizon=len(Q) - 1, failures=fails)


def bruin_lock_in(Q: Sequence[int], N: int) -> Optional[int]:
    """Smallest k1 from which the criterion holds on the whole horizon."""
    for k1 in range(len(Q) - 1):
        if bruin_criterion(Q, k1, N).holds:
            return k1
    return None


# ---------------------------------------------------------------------------
# parameter search


@dataclass(frozen=True)
class ParameterEnclosure:
    """Bracket [lo, hi] of width <= tol; ``a`` lies in the target cylinder."""

    lo: Fraction
    hi: Fraction
    a: Fraction
    target_S: tuple
    steps: int

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo


def _compare_at(a: Fraction, ell: Fraction, target: str, prec_start: int, prec_cap: int) -> Optional[int]:
    """Twisted comparison of the itinerary at a with the target, or None if
    undecided at the cap."""
    m = MapSpec(a, ell)
    n = len(target)
    for prec in precision_ladder(max(prec_start, a.denominator.bit_length() + 32), prec_cap):
        word, undecided = _orbit_symbols_at(m, n, prec, target)
        if undecided:
            continue
        if word == target:
            return 0
        # the last symbol is the first mismatch
        return twisted_compare(word, target[: len(word)])
    return None


def parameter_bisection(
    ell,
    target_S: Optional[Sequence[int]] = None,
    target_Q: Optional[Sequence[int]] = None,
    tol=Fraction(1, 10**10),
    max_steps: int = 4000,
    prec_start: int = DEFAULT_START_PREC,
    prec_cap: int = DEFAULT_MAX_PREC,
) -> ParameterEnclosure:
    """Parameter a in (1/2, 1] whose cutting times begin with the target.

    Bisection in the twisted order of the critical itinerary, which is
    monotone in a.  A matching midpoint moves the upper end, so the bracket
    closes on the lower boundary of the target cylinder and ``hi`` is always a
    certified member once one has been found.
    """
    if (target_S is None) == (target_Q is None):
        raise ValueError("give exactly one of target_S, target_Q")
    S = list(target_S) if target_S is not None else S_from_Q(list(target_Q))
    target = word_from_S(S)
    ell = Fraction(ell) if not isinstance(ell, Fraction) else ell
    tol = Fraction(tol) if not isinstance(tol, Fraction) else tol
    lo, hi = Fraction(1, 2), Fraction(1)
    hi_match = _compare_at(hi, ell, target, prec_start, prec_cap) == 0
    steps = 0
    while steps < max_steps:
        if hi_match and hi - lo <= tol:
            return ParameterEnclosure(lo=lo, hi=hi, a=hi, target_S=tuple(S), steps=steps)
        steps += 1
        mid = (lo + hi) / 2
        s = _compare_at(mid, ell, target, prec_start, prec_cap)
        if s is None:
            # undecided at the cap: probe a deterministic neighbour instead
            mid = (3 * lo + 5 * hi) / 8
            s = _compare_at(mid, ell, target, prec_start, prec_cap)
            if s is None:
                raise PrecisionExhausted("parameter bisection undecided at the precision cap")
        if s < 0:
            lo = mid
        else:
            hi = mid
            hi_match = s == 0
    raise NotFound(f"no parameter with the target cutting times within {max_steps} bisection steps")
