import random
from fractions import Fraction

import numpy as np
import pytest

from twospace import montecarlo as mc
from twospace.adversary import Strategy
from twospace.montecarlo import (
    Sampler,
    SimConfig,
    hoeffding_radius,
    mc_agreement_check,
    scaled,
    simulate_counts,
    simulate_monty_hall,
    simulate_scheme,
    split_ranges,
    splitmix64,
    stream,
)


def test_splitmix64_reference_vector():
    # first output of the reference splitmix64 seeded with 0
    assert splitmix64(0, 0) == 0xE220A8397B1DCDAF


def test_vector_stream_matches_scalar():
    for seed in (0, 1, 42, 2**64 - 1):
        words = stream(seed, 5, 20)
        assert [int(w) for w in words] == [splitmix64(seed, 5 + i) for i in range(20)]


def test_scaled_matches_integer_arithmetic():
    rng = random.Random(3)
    us = [rng.getrandbits(64) for _ in range(500)] + [0, 2**64 - 1]
    for d in (1, 2, 3, 7, 40, 2**31 + 11, 2**32 - 1):
        got = scaled(np.array(us, dtype=np.uint64), d)
        assert [int(x) for x in got] == [(u * d) >> 64 for u in us]


def test_sampler_inversion_is_exact():
    weights = [Fraction(1, 6), Fraction(0), Fraction(1, 2), Fraction(1, 3)]
    s = Sampler(weights)
    assert s.denominator == 6
    # every integer r in [0, D) maps to exactly numerator-many slots per outcome
    idx = np.searchsorted(s.cumulative, np.arange(6), side="right")
    counts = np.bincount(idx, minlength=4)
    assert list(counts) == [1, 0, 3, 2]


def test_hoeffding_radius():
    assert hoeffding_radius(10**6) == pytest.approx(0.0019495, abs=1e-7)


def test_agreement_check():
    assert mc_agreement_check(Fraction(1, 2), Fraction(1, 2), 0.0)
    assert not mc_agreement_check(Fraction(1, 2), 0.51, 0.002)


def test_exact_three_quarters_within_radius(toy_v1):
    r = simulate_scheme(toy_v1, SimConfig(200_000, strategy=Strategy.RECEIVER_EMULATION))
    assert mc_agreement_check(Fraction(3, 4), r.empirical_pb, r.hoeffding_radius)


def test_single_trial(toy_v1):
    r = simulate_scheme(toy_v1, SimConfig(1, seed=7))
    assert r.empirical_pb in (0, 1) and r.empirical_pe in (0, 1)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(0)
    with pytest.raises(ValueError):
        SimConfig(10, confidence=Fraction(1))


@pytest.mark.parametrize("strategy", list(Strategy))
def test_same_seed_same_result(toy_v2, strategy):
    cfg = SimConfig(20_000, seed=99, strategy=strategy)
    assert simulate_scheme(toy_v2, cfg) == simulate_scheme(toy_v2, cfg)


def test_different_seed_differs(toy_v2):
    a = simulate_counts(toy_v2, SimConfig(20_000, seed=1))
    b = simulate_counts(toy_v2, SimConfig(20_000, seed=2))
    assert a != b


@pytest.mark.parametrize("parts", [2, 3, 7])
def test_parallel_split(toy_v2, parts):
    cfg = SimConfig(50_001, seed=5, strategy=Strategy.TRIPLE_SAMPLING)
    whole = simulate_counts(toy_v2, cfg)
    pieces = [simulate_counts(toy_v2, cfg, lo, hi) for lo, hi in reversed(split_ranges(cfg.trials, parts))]
    assert tuple(map(sum, zip(*pieces))) == whole


def test_chunking_is_invisible(toy_v1, monkeypatch):
    cfg = SimConfig(30_000, seed=11, strategy=Strategy.BAYES_OPTIMAL)
    ref = simulate_counts(toy_v1, cfg)
    monkeypatch.setattr(mc, "CHUNK", 997)
    assert simulate_counts(toy_v1, cfg) == ref


def test_split_ranges_cover():
    assert split_ranges(10, 3) == [(0, 4), (4, 7), (7, 10)]


def test_uniform_fallback_and_mixed(toy_v1):
    r = simulate_scheme(toy_v1, SimConfig(200_000, strategy=Strategy.ASSUME_S2, fallback="uniform"))
    assert r.exact_pe == Fraction(5, 8) and r.agrees_with_exact
    r = simulate_scheme(toy_v1, SimConfig(200_000, strategy=Strategy.MIXED, lam=Fraction(1, 3)))
    assert r.agrees_with_exact


@pytest.mark.parametrize("strategy, exact", [("stay", Fraction(1, 3)), ("switch", Fraction(2, 3))])
def test_monty_hall_simulation(strategy, exact):
    n = 200_000
    emp = simulate_monty_hall(3, strategy, n)
    assert mc_agreement_check(exact, emp, hoeffding_radius(n))


def test_monty_hall_simulation_many_doors():
    n = 200_000
    assert mc_agreement_check(Fraction(4, 15), simulate_monty_hall(5, "switch", n), hoeffding_radius(n))
