import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iaselect.align import align_system, system_sum_rate
from iaselect.exceptions import SearchSpaceTooLarge
from iaselect.select import (
    Scenario,
    brute_force_select,
    init_subsets,
    o_algorithm,
    orthogonality_metric,
    s_algorithm,
    search_space_size,
)
from iaselect.system import ChannelSet, generate_channels

from conftest import SMALL_ARRAY, LARGE_ARRAY, crandn


def scaled_channels(rng, cfg, norms):
    """Channels whose direct links have the given Frobenius norms in every cell."""
    H = crandn(rng, cfg.L, cfg.K_T, cfg.L, cfg.N, cfg.M)
    for l in range(cfg.L):
        for k, n in enumerate(norms):
            H[l, k, l] *= n / np.linalg.norm(H[l, k, l])
    return ChannelSet(config=cfg, seed=0, H=H)


def test_init_picks_strongest_direct_links(rng):
    ch = scaled_channels(rng, SMALL_ARRAY.with_users(3), [3.0, 1.0, 2.5])
    assert init_subsets(ch).subsets == ((0, 2), (0, 2))


def test_init_ties_go_to_lower_id(rng):
    ch = scaled_channels(rng, SMALL_ARRAY.with_users(4), [1.0, 2.0, 2.0, 2.0])
    H = ch.H.copy()
    for l in range(2):
        H[l, 2, l] = H[l, 3, l] = H[l, 1, l]  # exact ties
    ch = ChannelSet(config=ch.config, seed=0, H=H)
    assert init_subsets(ch).subsets == ((1, 2), (1, 2))


def test_scaled_user_enters_init():
    ch = generate_channels(SMALL_ARRAY.with_users(6), 5)
    H = ch.H.copy()
    H[0, 4, 0] *= 10
    boosted = ChannelSet(config=ch.config, seed=0, H=H)
    assert 4 in init_subsets(boosted).subsets[0]


def test_scenario_rate_matches_full_pipeline():
    ch = generate_channels(LARGE_ARRAY.with_users(4), 3)
    sc = Scenario(ch)
    subsets = ((3, 1), (0, 2))
    a = align_system(ch, subsets)
    for s2 in (1.0, 0.01):
        expected = system_sum_rate(ch, subsets, a.groupings, a.precoders, s2).total
        assert sc.rate(subsets, s2) == pytest.approx(expected, rel=1e-12)
    assert sc.residual(subsets) < 1e-8


@pytest.mark.parametrize("algorithm", [s_algorithm, o_algorithm])
def test_no_spare_users_means_no_steps(algorithm):
    ch = generate_channels(SMALL_ARRAY, 8)
    selection, trace = algorithm(ch)
    assert trace.accepted_steps == []
    assert selection.subsets == init_subsets(ch).subsets
    assert selection.achieved_rate == trace.initial_rate


@pytest.mark.parametrize("k_t", [2, 5, 8])
def test_evaluation_counters(k_t):
    cfg = SMALL_ARRAY.with_users(k_t)
    ch = generate_channels(cfg, 40 + k_t)
    slots = cfg.K * cfg.L
    _, s_trace = s_algorithm(ch)
    _, o_trace = o_algorithm(ch)
    assert s_trace.rate_evaluations == (k_t - cfg.K + 1) * slots
    assert s_trace.candidate_evaluations == (k_t - cfg.K + 1) * slots
    assert o_trace.candidate_evaluations == (k_t - cfg.K + 1) * slots
    assert o_trace.rate_evaluations == slots


@pytest.mark.parametrize("algorithm", [s_algorithm, o_algorithm])
def test_accepted_steps_strictly_increase(algorithm):
    for seed in range(10):
        ch = generate_channels(LARGE_ARRAY.with_users(6), seed)
        selection, trace = algorithm(ch, 0.1)
        rate = trace.initial_rate
        for step in trace.accepted_steps:
            assert step.rate_before == rate
            assert step.rate_after > step.rate_before
            rate = step.rate_after
        assert selection.achieved_rate == rate
        assert Scenario(ch).rate(selection.subsets, 0.1) == pytest.approx(rate, rel=1e-12)


def assert_valid_selection(selection, cfg):
    assert len(selection.subsets) == cfg.L
    for cell in selection.subsets:
        assert len(cell) == cfg.K == len(set(cell))
        assert all(0 <= u < cfg.K_T for u in cell)


@settings(max_examples=15, deadline=None)
@given(k_t=st.integers(2, 6), seed=st.integers(0, 2**32 - 1),
       snr=st.sampled_from([0.0, 10.0, 20.0]))
def test_brute_force_dominates(k_t, seed, snr):
    cfg = SMALL_ARRAY.with_users(k_t)
    sc = Scenario(generate_channels(cfg, seed))
    s2 = 10 ** (-snr / 10)
    best, count = brute_force_select(sc, s2)
    assert count == math.comb(k_t, 2) ** 2
    s_sel, _ = s_algorithm(sc, s2)
    o_sel, _ = o_algorithm(sc, s2)
    init = init_subsets(sc, s2)
    for sel in (best, s_sel, o_sel, init):
        assert_valid_selection(sel, cfg)
    assert best.achieved_rate >= s_sel.achieved_rate
    assert best.achieved_rate >= o_sel.achieved_rate
    assert s_sel.achieved_rate >= init.achieved_rate
    assert o_sel.achieved_rate >= init.achieved_rate


def test_rate_ignores_slot_order():
    sc = Scenario(generate_channels(LARGE_ARRAY.with_users(5), 12))
    assert sc.rate(((1, 3), (4, 0)), 0.1) == sc.rate(((3, 1), (0, 4)), 0.1)


def test_brute_force_is_exhaustive():
    cfg = SMALL_ARRAY.with_users(4)
    sc = Scenario(generate_channels(cfg, 17))
    best, count = brute_force_select(sc)
    combos = list(itertools.combinations(range(4), 2))
    rates = {s: sc.rate(s) for s in itertools.product(combos, repeat=2)}
    assert count == len(rates) == 36
    assert best.achieved_rate == max(rates.values())
    first_best = next(s for s, r in rates.items() if r == best.achieved_rate)
    assert best.subsets == first_best


def test_search_space_guard():
    assert search_space_size(50, 2, 3) == 1_838_265_625
    assert search_space_size(10, 2, 2) == 2025
    ch = generate_channels(SMALL_ARRAY.with_users(10), 0)
    with pytest.raises(SearchSpaceTooLarge):
        brute_force_select(ch, cap=2024)


def test_orthogonality_metric_range():
    cfg = LARGE_ARRAY.with_users(5)
    sc = Scenario(generate_channels(cfg, 9))
    subsets = ((0, 3), (1, 4))
    for cell in range(cfg.L):
        for user in subsets[cell]:
            m = orthogonality_metric(sc, subsets, cell, user)
            # A has d_s columns, B has K(L-1) d_s, so ||AA^H - BB^H||_F^2 <= d_s + rank B
            assert 0.0 <= m <= math.sqrt(cfg.d_s + cfg.K * (cfg.L - 1) * cfg.d_s) + 1e-12
