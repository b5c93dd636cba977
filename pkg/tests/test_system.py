import numpy as np
import pytest

from iaselect.exceptions import InvalidConfig
from iaselect.system import (
    SystemConfig,
    generate_channels,
    next_cell,
    prev_cell,
    reciprocal_channel,
    trial_seed,
    validate_config,
)

from conftest import SMALL_ARRAY, LARGE_ARRAY, crandn


def test_reference_configs_are_valid():
    assert validate_config(SMALL_ARRAY) == []
    assert validate_config(LARGE_ARRAY) == []


def test_two_streams_on_small_array_is_infeasible():
    cfg = SystemConfig(2, 2, 2, 3, 2, 2)
    # d_s <= N still holds; M >= 6 and KN >= 5 both fail
    assert sorted(validate_config(cfg)) == ["rx_feasibility", "tx_feasibility"]


@pytest.mark.parametrize("changes, name", [
    (dict(num_cells=1), "cells_ge_2"),
    (dict(users_per_cell=1), "select_le_users"),
    (dict(rx_antennas=3, tx_antennas=3), "rx_lt_tx"),
    (dict(noise_var=0.0), "positive:noise_var"),
    (dict(tx_antennas=0), "positive_int:tx_antennas"),
])
def test_each_violation_is_named(changes, name):
    from dataclasses import replace

    assert name in validate_config(replace(SMALL_ARRAY, **changes))


def test_generate_rejects_invalid_config():
    with pytest.raises(InvalidConfig):
        generate_channels(SystemConfig(2, 2, 2, 3, 2, 2), 0)


def test_channels_are_deterministic():
    cfg = LARGE_ARRAY.with_users(5)
    a = generate_channels(cfg, 12345)
    b = generate_channels(cfg, 12345)
    assert a.H.shape == (2, 5, 2, 4, 6)
    assert a.H.tobytes() == b.H.tobytes()


def test_distinct_seeds_differ_everywhere():
    a = generate_channels(SMALL_ARRAY, 1).H
    b = generate_channels(SMALL_ARRAY, 2).H
    assert np.all(np.linalg.norm(a - b, axis=(-2, -1)) > 0)


def test_channel_statistics():
    cfg = SystemConfig(2, 50, 2, 19, 10, 1)
    H = generate_channels(cfg, 99).H.ravel()  # 2*50*2*10*19 = 38000 entries
    H = np.concatenate([H, generate_channels(cfg, 100).H.ravel(),
                        generate_channels(cfg, 101).H.ravel()])
    assert H.size >= 10**5
    assert 0.99 <= np.mean(np.abs(H) ** 2) <= 1.01
    assert abs(np.corrcoef(H.real, H.imag)[0, 1]) < 0.02
    assert np.var(H.real) == pytest.approx(0.5, rel=0.02)
    assert np.var(H.imag) == pytest.approx(0.5, rel=0.02)


def test_trial_seed_is_64_bit_and_key_sensitive():
    s = trial_seed(1, 10, 0)
    assert 0 <= s < 2**64
    assert s == trial_seed(1, 10, 0)
    assert len({trial_seed(1, 10, 0), trial_seed(1, 10, 1), trial_seed(1, 11, 0),
                trial_seed(2, 10, 0)}) == 4


def test_cyclic_neighbours():
    assert [next_cell(l, 3) for l in range(3)] == [1, 2, 0]
    assert [prev_cell(l, 3) for l in range(3)] == [2, 0, 1]


def test_reciprocal_channel(rng):
    D = np.diag([1.0, 2.0])
    np.testing.assert_array_equal(reciprocal_channel(D), D)
    H = crandn(rng, 2, 3)
    R = reciprocal_channel(H)
    assert R.shape == (3, 2)
    np.testing.assert_array_equal(reciprocal_channel(R), H)
    assert np.linalg.norm(R) == pytest.approx(np.linalg.norm(H))
