"""System configuration and i.i.d. Rayleigh channel generation.

Cells, users and BSs are indexed from 0. ``channels.H[l, k, j]`` is the
``N x M`` channel from BS ``j`` to user ``k`` of cell ``l``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import InvalidConfig


@dataclass(frozen=True)
class SystemConfig:
    num_cells: int
    users_per_cell: int
    select_per_cell: int
    tx_antennas: int
    rx_antennas: int
    streams_per_user: int
    bs_power: float = 1.0
    noise_var: float = 1.0

    # short aliases matching the usual notation
    @property
    def L(self) -> int:
        return self.num_cells

    @property
    def K_T(self) -> int:
        return self.users_per_cell

    @property
    def K(self) -> int:
        return self.select_per_cell

    @property
    def M(self) -> int:
        return self.tx_antennas

    @property
    def N(self) -> int:
        return self.rx_antennas

    @property
    def d_s(self) -> int:
        return self.streams_per_user

    def with_noise(self, noise_var: float) -> "SystemConfig":
        return replace(self, noise_var=noise_var)

    def with_users(self, users_per_cell: int) -> "SystemConfig":
        return replace(self, users_per_cell=users_per_cell)


def validate_config(cfg: SystemConfig) -> list[str]:
    """Names of every violated constraint; an empty list means valid."""
    violations = []
    for name in ("num_cells", "users_per_cell", "select_per_cell",
                 "tx_antennas", "rx_antennas", "streams_per_user"):
        value = getattr(cfg, name)
        if not isinstance(value, (int, np.integer)) or value < 1:
            violations.append(f"positive_int:{name}")
    for name in ("bs_power", "noise_var"):
        value = getattr(cfg, name)
        if not (np.isfinite(value) and value > 0):
            violations.append(f"positive:{name}")
    if violations:
        return violations

    L, K_T, K = cfg.num_cells, cfg.users_per_cell, cfg.select_per_cell
    M, N, d = cfg.tx_antennas, cfg.rx_antennas, cfg.streams_per_user
    if not d <= N:
        violations.append("streams_le_rx")
    if not N < M:
        violations.append("rx_lt_tx")
    if not M >= (K * (L - 1) + 1) * d:
        violations.append("tx_feasibility")
    if not K * N >= (K - 1) * M + d:
        violations.append("rx_feasibility")
    if not K <= K_T:
        violations.append("select_le_users")
    if not L >= 2:
        violations.append("cells_ge_2")
    return violations


def next_cell(l: int, L: int) -> int:
    return (l + 1) % L


def prev_cell(l: int, L: int) -> int:
    return (l - 1) % L


@dataclass(frozen=True, eq=False)
class ChannelSet:
    config: SystemConfig
    seed: int
    H: np.ndarray = field(repr=False)

    def channel(self, cell: int, user: int, bs: int) -> np.ndarray:
        return self.H[cell, user, bs]


def generate_channels(cfg: SystemConfig, seed: int) -> ChannelSet:
    """Draw every channel entry i.i.d. CN(0, 1) from a PCG64 stream seeded by `seed`."""
    violations = validate_config(cfg)
    if violations:
        raise InvalidConfig(violations)
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    rng = np.random.Generator(np.random.PCG64(seed))
    shape = (cfg.L, cfg.K_T, cfg.L, cfg.N, cfg.M)
    parts = rng.standard_normal(shape + (2,))
    H = (parts[..., 0] + 1j * parts[..., 1]) * np.sqrt(0.5)
    H.setflags(write=False)
    return ChannelSet(config=cfg, seed=seed, H=H)


def trial_seed(master_seed: int, *keys: int) -> int:
    """64-bit per-trial seed hashed from the master seed and integer keys."""
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, *map(int, keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def reciprocal_channel(H) -> np.ndarray:
    """Channel of the reciprocal (uplink) network: the conjugate transpose."""
    return np.asarray(H).conj().T
