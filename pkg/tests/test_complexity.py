import dataclasses
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unimodal_complexity import MapSpec
from unimodal_complexity.complexity import (
    build_nice_cover,
    children_counts,
    complexity_curve,
    critical_component_depths,
    envelope_sups,
    essential_order,
    essential_orders,
    growth_classify,
    p_of_n,
    p_series,
    q_of_n,
    q_series,
    sandwich_check,
    special_combinatorics_check,
)
from unimodal_complexity.errors import InsufficientData, NotInDomain
from unimodal_complexity.interval_dynamics import Dynamics, seed_nice_interval

SMALL = 400  # sample size for the brute-force oracles


@pytest.fixture(scope="module")
def fib_cover(fib_map, fib_dyn, fib_seed):
    return build_nice_cover(fib_map, fib_seed, 19_000, dyn=fib_dyn)


@pytest.fixture(scope="module")
def small_cover(fib_map, fib_dyn, fib_seed):
    return build_nice_cover(fib_map, fib_seed, SMALL, dyn=fib_dyn)


@pytest.fixture(scope="module")
def fib_curve(fib_map, fib_dyn, fib_seed):
    return complexity_curve(fib_map, fib_seed, 200, 19_000, fib_dyn, child_budget=4000)


@pytest.fixture(scope="module")
def wild_curve(wild_map, wild_dyn):
    return complexity_curve(wild_map, seed_nice_interval(wild_map), 200, 19_000, wild_dyn, child_budget=4000)


# -- independent oracles -------------------------------------------------------


def mp_f(a):
    def f(x):
        return a * (1 - (2 * x - 1) ** 2)

    return f


def mp_setup(m, n):
    mpmath.mp.prec = 3000
    a = mpmath.mpf(m.a.numerator) / m.a.denominator
    f = mp_f(a)
    x, orb = mpmath.mpf(1) / 2, [mpmath.mpf(1) / 2]
    for _ in range(n):
        x = f(x)
        orb.append(x)
    return f, orb


def code_of(spans, x):
    """Index of the cover element whose certified span strictly contains x."""
    for i, J in enumerate(spans):
        lo = mpmath.mpf(J.left.upper.numerator) / J.left.upper.denominator
        hi = mpmath.mpf(J.right.lower.numerator) / J.right.lower.denominator
        if lo < x < hi:
            return i
    return None


def brute_p(m, cover, n_max):
    N = cover.sample_size
    _, orb = mp_setup(m, N + n_max + 1)
    spans = cover.spans()
    codes = [code_of(spans, orb[e]) for e in range(1, N + n_max + 1)]
    assert None not in codes
    return [1] + [len({tuple(codes[i : i + n]) for i in range(N)}) for n in range(1, n_max + 1)]


def brute_q(m, cover, n_max):
    """Components of f^{-n}(cover) met by the sample: neighbouring sample
    points share one iff the n-th image of the hull between them lies in a
    single element.  Images of hulls are tracked in mpmath."""
    N = cover.sample_size
    f, orb = mp_setup(m, N)
    half = mpmath.mpf(1) / 2
    spans = cover.spans()
    pts = sorted(orb[1 : N + 1])
    hulls = list(zip(pts, pts[1:]))
    out = []
    for n in range(n_max + 1):
        sep = 0
        for u, v in hulls:
            cu, cv = code_of(spans, u), code_of(spans, v)
            assert cu is not None and cv is not None
            sep += cu != cv
        out.append(1 + sep)
        new = []
        for u, v in hulls:
            fu, fv = f(u), f(v)
            if u < half < v:
                new.append((min(fu, fv), f(half)))
            else:
                new.append((min(fu, fv), max(fu, fv)))
        hulls = new
    return out


# -- cover, p and q ----------------------------------------------------------------


def test_cover_basics(fib_cover):
    assert fib_cover.size == 4
    assert fib_cover.dropped == 0
    assert fib_cover.elements[fib_cover.y_index].entry_time == 0
    spans = fib_cover.spans()
    # open intervals, ordered left to right; neighbours may share an endpoint
    for a, b in zip(spans, spans[1:]):
        assert a.right.lower <= b.left.upper
        assert a.left.upper < b.left.lower


def test_cover_size_is_q0_and_p1(fib_cover):
    assert q_series(fib_cover, 0)[0] == fib_cover.size == p_series(fib_cover, 1)[1]


def test_p_matches_brute_force(fib_map, small_cover):
    assert p_series(small_cover, 15) == brute_p(fib_map, small_cover, 15)


def test_q_matches_brute_force(fib_map, small_cover):
    assert q_series(small_cover, 12) == brute_q(fib_map, small_cover, 12)


def test_p_properties(fib_cover):
    p = p_series(fib_cover, 60)
    assert all(x <= y for x, y in zip(p, p[1:]))
    for j in range(1, 30):
        for k in range(1, 30):
            assert p[j + k] <= p[j] * p[k]


def test_q_non_decreasing(fib_cover):
    q = q_series(fib_cover, 60)
    assert all(x <= y for x, y in zip(q, q[1:]))


@pytest.mark.parametrize("n", [0, 1, 7, 33, 120])
def test_single_n_matches_series(fib_map, fib_cover, n):
    assert q_of_n(fib_map, fib_cover, n) == q_series(fib_cover, n)[n]
    assert p_of_n(fib_cover, n + 1) == p_series(fib_cover, n + 1)[n + 1]


def test_sample_growth_stable(fib_map, fib_dyn, fib_seed, fib_cover):
    small = build_nice_cover(fib_map, fib_seed, 5000, dyn=fib_dyn)
    assert p_series(small, 80) == p_series(fib_cover, 80)
    assert q_series(small, 80) == q_series(fib_cover, 80)


# -- children counts, essential order --------------------------------------------------


def test_component_depths(fib_dyn, fib_seed):
    depths = critical_component_depths(fib_dyn, fib_seed, 40)
    visits = fib_dyn.trace(fib_seed).visits(1, 200)
    assert depths[0] == 0
    for i in range(1, 40):
        assert depths[i] == min(t for t in visits if t >= i)


def test_children_counts_at_seed(fib_dyn, fib_seed, fib_curve):
    nu, depths, B = children_counts(fib_dyn, fib_seed, 10, 2000)
    assert B == 2000 and nu[0] == len(fib_curve.y_child_times) == 2
    assert all(v >= 1 for v in nu)


def test_essential_order_against_chain_definition(fib_map, fib_dyn, fib_seed):
    """t is a critical position of the chain from P_n(Y) iff c_{n-t} lies in P_t(Y)."""
    recs = essential_orders(fib_dyn, fib_seed, 60)
    NY = fib_dyn.trace(fib_seed).visits(1, 60)
    assert sorted(recs) == NY
    for n in NY:
        pos = [0] + [t for t in NY if t <= n and (t == n or fib_dyn.trace_at(fib_seed.base, t).contains(n - t))]
        assert recs[n].critical_indices == tuple(-t for t in pos)
    assert essential_order(fib_map, fib_seed, NY[-1], fib_dyn) == recs[NY[-1]]
    with pytest.raises(NotInDomain):
        essential_order(fib_map, fib_seed, 2, fib_dyn)


@pytest.mark.parametrize("which", ["fibonacci", "wild"])
def test_essential_order_inequalities(fib_dyn, wild_dyn, which):
    dyn = fib_dyn if which == "fibonacci" else wild_dyn
    recs = essential_orders(dyn, seed_nice_interval(dyn.m), 200)
    assert recs
    for r in recs.values():
        assert r.monotone()
        assert r.fibonacci_violations() == []
        assert r.jumps[0] == 1


# -- sandwich and growth -----------------------------------------------------------------


@pytest.mark.parametrize("curve_name", ["fib_curve", "wild_curve"])
def test_sandwich_holds(request, curve_name):
    curve = request.getfixturevalue(curve_name)
    rep = sandwich_check(curve)
    assert rep.ok, rep.violations
    assert rep.upper_from == max(curve.y_child_times) + 1


def test_sandwich_detects_faults(fib_curve):
    p = list(fib_curve.p)
    p[5] = fib_curve.q[4] + 1
    rep = sandwich_check(dataclasses.replace(fib_curve, p=p))
    assert not rep.ok and rep.violations[0].startswith("n=4:")
    q = list(fib_curve.q)
    q[150] = fib_curve.nu_sum(150) + 1
    rep = sandwich_check(dataclasses.replace(fib_curve, q=q))
    assert any(v.startswith("n=150:") for v in rep.violations)


def test_curve_csv(fib_curve):
    lines = fib_curve.to_csv().splitlines()
    assert lines[0] == "n,q,p,M,nu_sum,notes"
    assert len(lines) == 202
    assert lines[1].split(",")[:3] == ["0", str(fib_curve.q[0]), "1"]


def test_fit_constant():
    assert growth_classify([(n, 5) for n in range(2, 201)]).best == "C"


def test_fit_linear():
    rep = growth_classify([(n, 7 * n) for n in range(2, 201)])
    assert rep.best == "C*n" and rep.C == pytest.approx(7)
    assert rep.inf_over_n == pytest.approx(7)


def test_fit_nlogn_and_quadratic():
    assert growth_classify([(n, 3 * n * math.log(n)) for n in range(2, 201)]).best == "C*n*log(n)"
    assert growth_classify([(n, n * n) for n in range(2, 201)]).best == "C*n^2"


def test_fit_needs_data():
    with pytest.raises(InsufficientData):
        growth_classify([(n, n) for n in range(2, 15)])
    with pytest.raises(InsufficientData):
        growth_classify([(n, n) for n in range(50, 100)])


@given(st.lists(st.integers(1, 10**6), min_size=51, max_size=51))
def test_envelope_sups(values):
    d = {n: v for n, v in zip(range(50, 101), values)}
    sups = envelope_sups(d, 50, 100)
    assert all(x >= y for x, y in zip(sups, sups[1:]))
    assert sups[0] == max(v / (n * math.log(n)) for n, v in d.items())


def test_fibonacci_growth_not_super_nlogn(fib_curve):
    rep = growth_classify([(n, fib_curve.p[n]) for n in range(2, 201)], tail_from=50)
    assert rep.best in ("C", "C*n", "C*n*log(n)")


# -- special combinatorics ---------------------------------------------------------------


def test_special_combinatorics_fibonacci(fib_map, fib_dyn, fib_seed):
    rep = special_combinatorics_check(fib_map, fib_seed, 6, 19_000, fib_dyn)
    assert rep.components_hit == [1] * 6 and rep.special
    assert rep.return_times == [3, 5, 8, 13, 21, 34]


def test_special_combinatorics_generic_parameter():
    m = MapSpec(Fraction(97, 100))
    dyn = Dynamics(m, 5000)
    rep = special_combinatorics_check(m, seed_nice_interval(m), 3, 4000, dyn)
    assert not rep.special and 2 in rep.components_hit


# -- renormalizable case ------------------------------------------------------------------


def test_feigenbaum_p_constant(feig_map, feig_dyn):
    Y = seed_nice_interval(feig_map)
    cover = build_nice_cover(feig_map, Y, 19_000, dyn=feig_dyn)
    p = p_series(cover, 200)
    assert cover.size == 2 and set(p[1:]) == {2}
    assert np.all(np.diff(q_series(cover, 200)) == 0)
