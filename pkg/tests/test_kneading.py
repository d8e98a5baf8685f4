import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unimodal_complexity import MapSpec, iterate
from unimodal_complexity.errors import HorizonExceeded, NotACuttingSequence, SuperattractingParameter
from unimodal_complexity.kneading import (
    KneadingData,
    S_from_Q,
    bruin_criterion,
    bruin_lock_in,
    cutting_times,
    cutting_times_from_word,
    itinerary,
    kneading_map_from_S,
    parameter_bisection,
    q_pattern_lock_in,
    random_admissible_Q,
    twisted_compare,
    wild_combinatorics,
    word_from_S,
)


def fib(k):
    S = [1, 2]
    while len(S) < k:
        S.append(S[-1] + S[-2])
    return S[:k]


def mp_orbit(m, n, prec=2000):
    """Critical orbit at high precision (independent of the ball code)."""
    mpmath.mp.prec = prec
    a = mpmath.mpf(m.a.numerator) / m.a.denominator
    ell = mpmath.mpf(m.ell.numerator) / m.ell.denominator
    x, out = mpmath.mpf(1) / 2, [mpmath.mpf(1) / 2]
    for _ in range(n):
        x = a * (1 - abs(2 * x - 1) ** ell)
        out.append(x)
    return out


def brute_cutting_times(m, K, horizon):
    """S_{k+1}: first n > S_k with c strictly between f^n(c) and f^n(z_k) = f^{n - S_k}(c)."""
    orb = mp_orbit(m, horizon)
    half = mpmath.mpf(1) / 2
    S = [1]
    while len(S) <= K:
        sk = S[-1]
        for n in range(sk + 1, horizon + 1):
            u, v = orb[n], orb[n - sk]
            if (u - half) * (v - half) < 0:
                S.append(n)
                break
        else:
            break
    return S


# -- itineraries -------------------------------------------------------------


def test_itinerary_trapped_left():
    assert itinerary(MapSpec(Fraction(2, 5)), 5) == "LLLLL"


def test_itinerary_full_map():
    assert itinerary(MapSpec(1), 4) == "RLLL"


def test_itinerary_fibonacci(fib_map):
    word = itinerary(fib_map, 30)
    assert cutting_times_from_word(word)[:7] == fib(7)
    orb = mp_orbit(fib_map, 30)
    assert word == "".join("L" if x < 0.5 else "R" for x in orb[1:])


def test_word_with_critical_symbol():
    with pytest.raises(SuperattractingParameter):
        cutting_times_from_word("RLCRL")


# -- cutting times ------------------------------------------------------------


def test_cutting_times_fibonacci(fib_map):
    kd = cutting_times(fib_map, 7)
    assert kd.S == brute_cutting_times(fib_map, 7, 60) == [1, 2, 3, 5, 8, 13, 21, 34]
    assert kd.Q == [0, 0, 0, 1, 2, 3, 4, 5]


def test_closest_precritical_points(fib_map):
    kd = cutting_times(fib_map, 7)
    z = kd.z
    assert all(z[k].upper < z[k + 1].lower for k in range(len(z) - 1))
    assert z[-1].upper < Fraction(1, 2)
    for zk, sk in zip(z, kd.S):
        assert iterate(fib_map, zk, sk, max_radius=Fraction(1, 10**6)).contains(Fraction(1, 2))


@pytest.mark.parametrize("a", [Fraction(9, 10), Fraction(95, 100), Fraction(97, 100), Fraction(99, 100)])
def test_cutting_times_match_brute_force(a):
    m = MapSpec(a)
    kd = cutting_times(m, 6)
    assert kd.S == brute_cutting_times(m, 6, kd.S[-1] + 5)[: len(kd.S)]
    for k in range(1, len(kd.S) - 1):
        assert kd.S[k + 1] - kd.S[k] in kd.S[: k + 1]


def test_cutting_times_start_at_one():
    assert cutting_times(MapSpec(Fraction(9, 10)), 1).S[0] == 1


def test_cutting_times_no_return():
    with pytest.raises(HorizonExceeded):
        cutting_times(MapSpec(Fraction(3, 10)), 3)


def test_kneading_text_round_trip(fib_map):
    kd = cutting_times(fib_map, 8)
    back = KneadingData.from_text(kd.to_text())
    assert (back.S, back.Q, back.symbols) == (kd.S, kd.Q, kd.symbols)
    assert kd.to_text().splitlines()[0] == "S: 1 2 3 5 8 13 21 34 55"


# -- kneading maps -------------------------------------------------------------


def test_kneading_map_examples():
    assert kneading_map_from_S(fib(10)) == [0, 0, 0] + list(range(1, 8))
    with pytest.raises(NotACuttingSequence):
        kneading_map_from_S([1, 2, 5])
    with pytest.raises(NotACuttingSequence):
        kneading_map_from_S([2, 3])


def test_S_from_Q_examples():
    assert S_from_Q([0] * 6) == [1, 2, 3, 4, 5, 6]
    assert S_from_Q([max(k - 2, 0) for k in range(10)]) == fib(10)
    assert S_from_Q([0] + [k - 1 for k in range(1, 8)]) == [2**k for k in range(8)]
    with pytest.raises(IndexError):
        S_from_Q([0, 1])


@given(st.integers(1, 40), st.randoms(use_true_random=False))
def test_round_trip(length, rnd):
    Q = random_admissible_Q(rnd, length)
    assert kneading_map_from_S(S_from_Q(Q)) == Q


def test_word_from_S_reproduces_S():
    for S in (fib(9), [1, 2, 4, 8, 16], [1, 2, 3] + wild_combinatorics(8).merged_cutting_times):
        assert cutting_times_from_word(word_from_S(S)) == S


def test_twisted_order_monotone_in_parameter():
    rng = random.Random(3)
    params = sorted(Fraction(rng.randint(5100, 10000), 10000) for _ in range(25))
    words = [itinerary(MapSpec(a), 24) for a in params]
    for w, v in zip(words, words[1:]):
        assert twisted_compare(w, v) <= 0


# -- wild combinatorics ----------------------------------------------------------


def test_wild_examples():
    w2 = wild_combinatorics(2)
    assert (w2.r, w2.t) == ([3, 5, 10], [2, 5, 5])
    w6 = wild_combinatorics(6)
    assert w6.r == [3, 5, 10, 15, 30, 45, 90]
    assert w6.t == [2, 5, 5, 15, 15, 45, 45]
    assert w6.merged_cutting_times == [5, 8, 10, 15, 25, 30, 45, 75, 90]


@given(st.integers(1, 60))
def test_wild_invariants(K):
    w = wild_combinatorics(K)
    r, t = w.r, w.t
    assert r[0] == 3 and t[0] == 2
    for k in range(K):
        assert r[k + 1] == r[k] + t[k]
        assert t[k + 1] == (r[k] if k % 2 == 1 else r[k + 1])
        assert r[k] < r[k + 1] and t[k] <= t[k + 1]
    # t_{k+1} = r_{k+1} for even k, so only the weak inequality holds
    assert all(r[k] >= t[k] for k in range(1, K + 1))
    assert all(r[k] > t[k] for k in range(2, K + 1, 2))
    mc = w.merged_cutting_times
    assert all(x < y for x, y in zip(mc, mc[1:]))


def test_wild_kneading_map_pattern():
    S = [1, 2, 3] + wild_combinatorics(40).merged_cutting_times
    Q = kneading_map_from_S(S)
    start, d = q_pattern_lock_in(Q)
    assert sorted(d) == [2, 3, 5]
    for k in range(start, len(Q)):
        assert k - Q[k] == d[(k - start) % 3]


def test_bruin_examples():
    S = [1, 2, 3] + wild_combinatorics(40).merged_cutting_times
    Q = kneading_map_from_S(S)
    k1 = bruin_lock_in(Q, 5)
    assert k1 is not None and bruin_criterion(Q, k1, 5).holds
    fibQ = [max(k - 2, 0) for k in range(30)]
    assert bruin_criterion(fibQ, 3, 2).holds
    zero = [0] * 20
    rep = bruin_criterion(zero, 1, 5)
    assert any(k > 5 and "k - Q(k)" in why for k, why in rep.failures)


def test_tampered_wild_recursion_breaks_pattern():
    w = wild_combinatorics(30, t0=3)
    assert w.merged_cutting_times[:9] != wild_combinatorics(30).merged_cutting_times[:9]
    assert w.merged_cutting_times[:9] != [5, 8, 10, 15, 25, 30, 45, 75, 90]


# -- parameter bisection ------------------------------------------------------------


def test_bisection_fibonacci_prefix():
    target = fib(6)
    enc = parameter_bisection(2, target_S=target, tol=Fraction(1, 10**10))
    assert enc.width <= Fraction(1, 10**10)
    assert enc.lo <= enc.a <= enc.hi
    # oracle: cutting times at 4x the default starting precision
    kd = cutting_times(MapSpec(enc.a), 5, prec_start=256)
    assert kd.S == target
    assert brute_cutting_times(MapSpec(enc.a), 5, 20) == target


def test_bisection_constant_Q():
    enc = parameter_bisection(2, target_Q=[0, 0, 0], tol=Fraction(1, 1000))
    assert cutting_times(MapSpec(enc.a), 2, prec_start=256).S == [1, 2, 3]


def test_bisection_wild_prefix():
    target = [1, 2, 3, 5, 8, 10, 15]
    enc = parameter_bisection(2, target_S=target, tol=Fraction(1, 10**8))
    S = cutting_times(MapSpec(enc.a), 6, prec_start=256).S
    assert S == target


def test_bisection_nested_under_refinement():
    target = fib(7)
    e1 = parameter_bisection(2, target_S=target, tol=Fraction(1, 10**8))
    e2 = parameter_bisection(2, target_S=target, tol=Fraction(1, 10**9))
    assert e1.lo <= e2.lo and e2.hi <= e1.hi


def test_bisection_other_order():
    target = fib(6)
    enc = parameter_bisection(3, target_S=target, tol=Fraction(1, 10**8))
    assert cutting_times(MapSpec(enc.a, 3), 5).S == target
