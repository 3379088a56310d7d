import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synprog.errors import NotTwoSyndetic, OutOfWindow, PreconditionViolated, WindowTooSmall
from synprog.gpsearch import (
    ANY,
    SQUARE,
    GPWitness,
    RatioClass,
    canonical,
    check_witness,
    find_ratio_nkr,
    find_square_method1,
    find_square_method2,
    oracle_enumerate,
)
from synprog.synsets import SyndeticWindow, materialize


def brute_pairs(window, admits):
    ms = [int(v) for v in window.members]
    mset = set(ms)
    return sorted((x, y) for x in ms for y in range(2 * x, window.upper + 1, x) if y in mset and admits(y // x))


def test_check_witness_examples():
    w = materialize("full", 400)
    assert check_witness(w, GPWitness.square(10, 6))
    assert (2 * 9 + 1) ** 2 - 1 == 360 == GPWitness.square(10, 6).y
    assert not check_witness(w, GPWitness(3, 2, 1, 2))  # r = 2 is not 1 mod 2
    with pytest.raises(OutOfWindow):
        check_witness(w, GPWitness.square(10, 7))


def test_witness_json_round_trip():
    w = GPWitness(3, 2, 2, 3, "nkr-scan")
    d = w.to_json(verified=True)
    assert d["ratio"] == "12" and d["verified"] is True
    assert GPWitness.from_json(d) == w


def test_method1_full_window():
    res = find_square_method1(materialize("full", 10**4))
    assert GPWitness.square(10, 6) in res.witnesses


def test_method1_odds():
    res = find_square_method1(materialize("odds", 10**4))
    assert res.witnesses[0] == GPWitness.square(9, 3)
    assert res.witnesses[0].branch == "odd-square-multiple"


def test_method1_evens():
    # 360 > 100, so the evens example needs a window to 1000
    res = find_square_method1(materialize("evens", 1000))
    assert res.witnesses[0] == GPWitness.square(10, 6)


def test_method2_full_window():
    res = find_square_method2(materialize("full", 10**4))
    assert res.witnesses[0] in (GPWitness.square(1, 7), GPWitness.square(2, 5))


def test_method2_odds_uses_progression():
    res = find_square_method2(materialize("ap(1,2)", 1000))
    assert res.witnesses[0] == GPWitness.square(1, 3)
    assert res.witnesses[0].branch == "residual-progression"


def test_method2_gap_two_window():
    # members 1,3,4,6,7,...: consecutive pairs exist but are sparse
    w = materialize("union(ap(1,3),ap(0,3))", 5000)
    res = find_square_method2(w)
    assert res.witnesses and all(check_witness(w, x) for x in res.witnesses)


def test_rejects_wide_gaps():
    w = materialize("ap(1,3)", 1000)
    for finder in (find_square_method1, find_square_method2):
        with pytest.raises(NotTwoSyndetic):
            finder(w)


def test_tiny_window_is_inconclusive():
    w = materialize("full", 10)
    with pytest.raises(WindowTooSmall):
        find_square_method2(w)


@pytest.mark.parametrize("seed", range(20))
def test_finders_agree_with_oracle(seed):
    w = materialize(f"random-syndetic(l=2,seed={seed})", 20000)
    pairs = oracle_enumerate(w, SQUARE)
    for finder in (find_square_method1, find_square_method2):
        try:
            found = finder(w, threads=3).witnesses
        except WindowTooSmall:
            # method 2 only looks at a with (a+1)(4a+1)^2 <= N
            continue
        for wit in found:
            assert check_witness(w, wit)
            assert wit.is_square_ratio
            assert (wit.x, wit.y) in pairs


@pytest.mark.parametrize("threads", [2, 5, 8])
def test_threads_do_not_change_output(threads):
    w = materialize("random-syndetic(l=2,seed=99,density=0.05)", 50000)
    for finder in (find_square_method1, find_square_method2):
        one = finder(w, threads=1)
        many = finder(w, threads=threads)
        assert [(x, x.branch) for x in one.witnesses] == [(x, x.branch) for x in many.witnesses]
    assert find_ratio_nkr(w, 2, [2, 3], threads=1) == find_ratio_nkr(w, 2, [2, 3], threads=threads)


def test_nkr_examples():
    assert find_ratio_nkr(materialize("ap(0,3)", 100, max_gap=3), 2, {2})[0] == GPWitness(3, 2, 2, 1)
    assert find_ratio_nkr(SyndeticWindow.from_members(100, [1]), 1, {2, 3}) == []
    assert find_ratio_nkr(materialize("full", 100), 1, {3})[0] == GPWitness(1, 3, 1, 1)
    with pytest.raises(PreconditionViolated):
        find_ratio_nkr(materialize("full", 100), 1, {1})


def test_nkr_against_oracle():
    w = materialize("random-syndetic(l=3,seed=4)", 5000)
    cls = RatioClass("nkr", 2, (2, 3, 5))
    found = find_ratio_nkr(w, 2, cls.H, budget=10**6)
    assert sorted({(x.x, x.y) for x in found}) == oracle_enumerate(w, cls).pairs()
    assert [x.sort_key()[:2] for x in found] == sorted(x.sort_key()[:2] for x in found)


def test_oracle_examples():
    squares = SyndeticWindow.from_members(50, [1, 4, 9, 16, 25, 36, 49])
    assert oracle_enumerate(squares, SQUARE).pairs() == [
        (1, 4), (1, 9), (1, 16), (1, 25), (1, 36), (1, 49), (4, 16), (4, 36), (9, 36),
    ]
    primes = materialize("primes", 30, max_gap=None)
    assert oracle_enumerate(primes, ANY).pairs() == []
    assert len(oracle_enumerate(SyndeticWindow.from_members(10, []), ANY)) == 0


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(1, 300), max_size=120), st.sampled_from(["any", "square"]))
def test_oracle_matches_brute_force(members, kind):
    w = SyndeticWindow.from_members(300, sorted(members))
    cls = RatioClass(kind)
    assert oracle_enumerate(w, cls).pairs() == brute_pairs(w, cls.admits)


def test_oracle_full_window_count():
    N = 10**5
    pairs = oracle_enumerate(materialize("full", N), ANY)
    # sum over x of (floor(N/x) - 1)
    assert len(pairs) == sum(N // x - 1 for x in range(1, N + 1))


def test_canonical_order_and_budget():
    ws = [GPWitness.square(9, 3, "b"), GPWitness.square(2, 5, "a"), GPWitness.square(9, 3, "a")]
    out = canonical(ws, budget=2)
    assert out == [GPWitness.square(2, 5), GPWitness.square(9, 3)]
    assert out[1].branch == "a"


def test_square_identities_sampled():
    a = np.arange(1, 2001, dtype=object)
    assert all(a * (4 * a + 3) ** 2 + 1 == (a + 1) * (4 * a + 1) ** 2)
    m = np.arange(1, 2001, 2, dtype=object)
    assert all((2 * m**2 + 1) ** 2 - 1 == 4 * m**2 * (m**2 + 1))
    assert math.isqrt(49) == 7
