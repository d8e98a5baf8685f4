"""The wild adding-machine example: domains I_k, J_k, J_hat_k and checks.

I_0 = (q_hat, q), I_{k+1} is the central return domain of I_k, J_{k+1} the
return domain of I_k containing R_{I_k}(c) and J_hat_{k+1} its mirror image.
A non-central return domain of I_k is fixed by its return time together with
the sides of the iterates before the return, which gives exact membership of
every orbit point; J_hat is the same with the first side flipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from .arith import CertifiedPoint, Interval
from .interval_dynamics import (
    SEED_BASE,
    Dynamics,
    _make_nice,
    orbit_entry_domain,
    seed_nice_interval,
)
from .kneading import wild_combinatorics
from .odometer import CyclicCover, OrbitDomain, _next_visit, build_cyclic_cover


@dataclass
class WildDomains:
    dyn: Dynamics
    depths: List[int]  # pull-back depth of I_k
    r: List[int]  # return time of c to I_k
    t: List[int]  # return time of R_{I_k}(c) to I_k
    I: List[OrbitDomain]
    J: Dict[int, OrbitDomain]  # J_{k+1} keyed by k + 1
    J_hat: Dict[int, OrbitDomain]


def _domain_mask(dyn: Dynamics, parent: np.ndarray, rep: int, ret: int, flip_first: bool) -> np.ndarray:
    """Orbit points in the return domain of ``parent`` with return time ``ret``
    whose side word matches that of f^rep(c) (first side flipped if asked)."""
    side = dyn.orbit.side
    M = parent.size - 1
    nxt = _next_visit(parent)
    word = side[rep : rep + ret].copy()
    if flip_first:
        word[0] = -word[0]
    cand = np.nonzero(parent & (nxt - np.arange(M + 1) == ret))[0]
    cand = cand[cand + ret <= M]
    out = np.zeros(M + 1, dtype=bool)
    for e in cand.tolist():
        if np.array_equal(side[e : e + ret], word):
            out[e] = True
    return out


def wild_domains(dyn: Dynamics, depth: int, with_spans: bool = True) -> WildDomains:
    """I_0..I_depth with r_k, t_k, and J_{k+1}, J_hat_{k+1} for k < depth."""
    orb = dyn.orbit
    depths, r, t = [0], [], []
    I: List[OrbitDomain] = []
    J: Dict[int, OrbitDomain] = {}
    Jh: Dict[int, OrbitDomain] = {}
    m = dyn.m
    for k in range(depth + 1):
        tr = dyn.trace_at(SEED_BASE, depths[k])
        mask = tr.mask()
        span = _make_nice(m, SEED_BASE, depths[k], orb._side_l[: depths[k] + 1], 10_000, dyn.prec_cap).span if with_spans else None
        I.append(OrbitDomain(f"I_{k}", mask, span))
        if k == depth:
            break
        rk = tr.first_return(0)
        tk = tr.first_return(rk)
        r.append(rk)
        t.append(tk)
        depths.append(depths[k] + rk)
        jm = _domain_mask(dyn, mask, rk, tk, False)
        jh = _domain_mask(dyn, mask, rk, tk, True)
        jspan = jh_span = None
        if with_spans:
            jspan = orbit_entry_domain(dyn, seed_nice_interval(m) if depths[k] == 0 else _nice(dyn, depths[k]), rk, tk)
            jh_span = Interval(
                CertifiedPoint(1 - jspan.right.mid, jspan.right.rad),
                CertifiedPoint(1 - jspan.left.mid, jspan.left.rad),
            )
        J[k + 1] = OrbitDomain(f"J_{k + 1}", jm, jspan)
        Jh[k + 1] = OrbitDomain(f"J_hat_{k + 1}", jh, jh_span)
    return WildDomains(dyn, depths, r, t, I, J, Jh)


def _nice(dyn: Dynamics, depth: int):
    return _make_nice(dyn.m, SEED_BASE, depth, dyn.orbit._side_l[: depth + 1], 10_000, dyn.prec_cap)


# ---------------------------------------------------------------------------
# the six properties, checked on the orbit sample


@dataclass
class PropertyReport:
    results: Dict[str, bool]
    details: Dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.results.values())

    def lines(self) -> List[str]:
        return [f"{'PASS' if v else 'FAIL'} {k}" + (f" ({self.details[k]})" if k in self.details else "") for k, v in self.results.items()]


def _returns_of(mask: np.ndarray, points: np.ndarray) -> np.ndarray:
    return _next_visit(mask)[points]


def check_properties(W: WildDomains, sample: int) -> PropertyReport:
    """Properties (1)-(6) of the wild example plus the return-time recursions,
    on levels k available in W and orbit points 1..sample."""
    orb = W.dyn.orbit
    M = orb.M
    depth = len(W.r)
    res: Dict[str, bool] = {}
    det: Dict[str, str] = {}
    I0 = W.I[0].mask
    res["(1) f(c) > c, f^2(c) < q_hat, f^3(c), f^5(c) in I_0"] = bool(orb.side[1] > 0 and orb.side[2] < 0 and not I0[2] and I0[3] and I0[5])
    ok2 = all(not W.I[k + 1].mask[W.r[k]] and not np.any(W.J[k + 1].mask & W.I[k + 1].mask) for k in range(depth))
    res["(2) I_{k+1}, J_{k+1} defined and disjoint"] = ok2
    # (3): non-central and high, so f^{r_k}(I_{k+1}) ⊃ I_{k+1}
    ok3 = True
    for k in range(depth):
        o = 1
        for j in range(1, W.r[k]):
            o *= -int(orb.side[j])
        ok3 &= bool(orb.side[W.r[k]] == o) and not W.I[k + 1].mask[W.r[k]]
    res["(3) R_{I_k}(I_{k+1}) contains I_{k+1}"] = ok3
    # (4): first return of c to I_k equals its second return to I_{k-1}
    ok4 = True
    for k in range(1, depth):
        second = W.r[k - 1] + W.t[k - 1]
        ok4 &= W.r[k] == second and bool(W.I[k].mask[second])
    res["(4) R_{I_k} = R_{I_{k-1}}^2 on I_{k+1}"] = ok4
    pts = np.arange(1, min(sample, M) + 1)
    ok5 = ok6 = True
    for k in range(1, depth):
        Jm = W.J[k + 1].mask
        inJ = pts[Jm[pts]]
        nk1 = _next_visit(W.I[k - 1].mask)
        nk = _next_visit(W.I[k].mask)
        inJ = inJ[nk[inJ] <= M]
        if not inJ.size:
            continue
        first = nk1[inJ]
        inJ, first = inJ[first <= M], first[first <= M]
        if k % 2 == 1:
            good = W.J_hat[k].mask[first] if k in W.J_hat else np.zeros(first.size, dtype=bool)
            second = nk1[first]
            ok5 &= bool(np.all(good)) and bool(np.all(second[second <= M] == nk[inJ][second <= M]))
        elif k >= 2:
            ok6 &= bool(np.all(first == nk[inJ]))
    res["(5) odd k: R_{I_{k-1}}(J_{k+1}) ⊂ J_hat_k, R_{I_k} = R_{I_{k-1}}^2 on J_{k+1}"] = ok5
    res["(6) even k: R_{I_k} = R_{I_{k-1}} on J_{k+1}"] = ok6
    wc = wild_combinatorics(max(depth, 1))
    res["return times r_k, t_k follow the recursions"] = W.r == wc.r[:depth] and W.t == wc.t[:depth]
    det["return times r_k, t_k follow the recursions"] = f"r={W.r} t={W.t}"
    return PropertyReport(res, det)


# ---------------------------------------------------------------------------
# the cyclic covers of the wild example


def wild_cyclic_covers(W: WildDomains, levels: List[int], sample: int) -> List[CyclicCover]:
    """Covers for T_n = I_{2n}, T'_n = I_{2n+1}, Q_n = J_{2n+1}, Q_hat_n = J_hat_{2n+1}."""
    with_points = W.dyn.orbit.floats()
    pts = np.arange(1, sample + 1)
    covers = []
    Ts = [W.I[2 * n] for n in levels]
    for n in levels:
        covers.append(
            build_cyclic_cover(
                W.dyn.m,
                W.I[2 * n],
                W.I[2 * n + 1],
                W.J[2 * n + 1],
                W.J_hat[2 * n + 1],
                pts,
                points=with_points,
                T_sequence=Ts,
            )
        )
    return covers
