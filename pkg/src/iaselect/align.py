"""Interference alignment with the extended grouping scheme.

For every BS ``l`` the selected users of cell ``next(l)`` are grouped:
their receive beamformers are designed jointly so that the interference
BS ``l`` causes them all spans one ``d_s``-dimensional subspace ``G_l``.
Each BS then precodes in the null space of ``G_l``, the effective
channels of the remaining foreign cells, and its own other users.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DegenerateBeamformer, EmptyGains, RankDeficient, RankDeficientDesiredLink
from .linalg import gso, inv_sqrt_hermitian, null_space, water_fill
from .system import ChannelSet, next_cell, prev_cell

Subsets = Sequence[Sequence[int]]

VALIDITY_THRESHOLD = 1e-6
"""Trials whose interference residual exceeds this are flagged as invalid."""


@dataclass(frozen=True, eq=False)
class GroupingResult:
    bs: int
    users: tuple[int, ...]
    G: np.ndarray = field(repr=False)
    U: dict[int, np.ndarray] = field(repr=False)


@dataclass(frozen=True, eq=False)
class EffectiveLink:
    H_bar: np.ndarray
    W: np.ndarray
    singular_values: np.ndarray


@dataclass(frozen=True)
class RateReport:
    per_user: dict[tuple[int, int], float]
    per_cell: list[float]
    total: float


@dataclass(frozen=True, eq=False)
class AlignedSystem:
    """Beamformers for one choice of per-cell user subsets."""

    subsets: tuple[tuple[int, ...], ...]
    groupings: list[GroupingResult] = field(repr=False)
    receivers: dict[tuple[int, int], np.ndarray] = field(repr=False)
    precoders: dict[tuple[int, int], np.ndarray] = field(repr=False)


def grouping_matrix(channels: ChannelSet, bs: int, users: Sequence[int]) -> np.ndarray:
    """The ``KM x (M + KN)`` matrix whose null space holds ``[G; U_1; ...; U_K]``."""
    cfg = channels.config
    M, N = cfg.M, cfg.N
    K = len(users)
    cell = next_cell(bs, cfg.L)
    F = np.zeros((K * M, M + K * N), dtype=np.complex128)
    for k, user in enumerate(users):
        F[k * M:(k + 1) * M, :M] = np.eye(M)
        F[k * M:(k + 1) * M, M + k * N:M + (k + 1) * N] = -channels.H[cell, user, bs].conj().T
    return F


def group_cell(channels: ChannelSet, bs: int, users: Sequence[int]) -> GroupingResult:
    """Align the interference from BS `bs` at the given users of cell ``next(bs)``."""
    cfg = channels.config
    M, N, d = cfg.M, cfg.N, cfg.d_s
    users = tuple(int(u) for u in users)
    X = null_space(grouping_matrix(channels, bs, users), d)
    U = {}
    for k, user in enumerate(users):
        Uk = X[M + k * N:M + (k + 1) * N]
        s = np.linalg.svd(Uk, compute_uv=False)
        if s[0] == 0.0 or s[-1] <= 1e-8 * s[0]:
            raise DegenerateBeamformer(f"receive beamformer of user {user} is rank deficient")
        U[user] = Uk
    try:
        G = gso(X[:M])
    except RankDeficient as exc:
        raise DegenerateBeamformer(f"intersection subspace at BS {bs} is degenerate") from exc
    return GroupingResult(bs=bs, users=users, G=G, U=U)


def receivers_from(
    groupings: Sequence[GroupingResult], L: int
) -> dict[tuple[int, int], np.ndarray]:
    """Map ``(cell, user) -> U`` out of the per-BS grouping results."""
    out = {}
    for g in groupings:
        cell = next_cell(g.bs, L)
        for user, U in g.U.items():
            out[(cell, user)] = U
    return out


def precoder_constraints(
    channels: ChannelSet,
    cell: int,
    user: int,
    subsets: Subsets,
    groupings: Sequence[GroupingResult],
) -> np.ndarray:
    """Stacked ``[K(L-1)d_s] x M`` matrix whose null space holds the precoder."""
    L = channels.config.L
    H = channels.H
    receivers = receivers_from(groupings, L)
    rows = [groupings[cell].G.conj().T]
    for s in range(L):
        if s == cell or s == next_cell(cell, L):
            continue
        for t in subsets[s]:
            rows.append(receivers[(s, t)].conj().T @ H[s, t, cell])
    for t in subsets[cell]:
        if t != user:
            rows.append(receivers[(cell, t)].conj().T @ H[cell, t, cell])
    return np.vstack(rows)


def design_precoder(
    channels: ChannelSet,
    cell: int,
    user: int,
    subsets: Subsets,
    groupings: Sequence[GroupingResult],
) -> np.ndarray:
    """Orthonormal ``M x d_s`` precoder nulling all interference it would cause."""
    A = precoder_constraints(channels, cell, user, subsets, groupings)
    return null_space(A, channels.config.d_s)


def align_system(
    channels: ChannelSet,
    subsets: Subsets,
    groupings: Sequence[GroupingResult] | None = None,
) -> AlignedSystem:
    """Group every cell and design every selected user's precoder."""
    L = channels.config.L
    subsets = tuple(tuple(int(u) for u in s) for s in subsets)
    if groupings is None:
        groupings = [group_cell(channels, l, subsets[next_cell(l, L)]) for l in range(L)]
    groupings = list(groupings)
    receivers = receivers_from(groupings, L)
    precoders = {
        (l, k): design_precoder(channels, l, k, subsets, groupings)
        for l in range(L)
        for k in subsets[l]
    }
    return AlignedSystem(subsets=subsets, groupings=groupings,
                         receivers=receivers, precoders=precoders)


def interference_residual(
    channels: ChannelSet,
    subsets: Subsets,
    receivers: dict[tuple[int, int], np.ndarray],
    precoders: dict[tuple[int, int], np.ndarray],
) -> float:
    """Worst normalized leakage over all inter-user and inter-cell pairs.

    Leakage of stream ``(j, i)`` into user ``(l, k)`` is
    ``||Uo^H H V|| / ||H||`` with ``Uo`` an orthonormal basis of the
    receive beamformer, so the value does not depend on how ``U`` is scaled.
    """
    L = len(subsets)
    H = channels.H
    worst = 0.0
    for l in range(L):
        for k in subsets[l]:
            Uo = gso(receivers[(l, k)])
            for j in range(L):
                Hkj = H[l, k, j]
                h_norm = np.linalg.norm(Hkj)
                for i in subsets[j]:
                    prod = Uo.conj().T @ Hkj @ precoders[(j, i)]
                    if (j, i) == (l, k):
                        s = np.linalg.svd(prod, compute_uv=False)
                        if s[0] == 0.0 or s[-1] <= 1e-6 * s[0]:
                            raise RankDeficientDesiredLink(
                                f"desired link of user {k} in cell {l} is rank deficient")
                    else:
                        worst = max(worst, float(np.linalg.norm(prod) / h_norm))
    return worst


def effective_link(H, U, V) -> EffectiveLink:
    H_bar = U.conj().T @ H @ V
    W = inv_sqrt_hermitian(U.conj().T @ U)
    s = np.linalg.svd(W @ H_bar, compute_uv=False)
    return EffectiveLink(H_bar=H_bar, W=W, singular_values=s)


def cell_sum_rate(
    links: Sequence[EffectiveLink], power: float, noise_var: float
) -> tuple[list[float], float]:
    """Water-fill `power` jointly over every eigenmode of one cell.

    Returns the per-link rates (bits/channel use) and their sum.
    """
    if len(links) == 0:
        raise EmptyGains("a cell needs at least one link")
    sv = [np.asarray(link.singular_values, dtype=float) for link in links]
    owner = np.concatenate([np.full(s.size, i) for i, s in enumerate(sv)])
    gains = np.concatenate(sv) ** 2 / noise_var
    per_link = np.zeros(len(links))
    active = gains > 0.0
    if np.any(active):
        alloc = water_fill(gains[active], power)
        mode_rates = np.log2(1.0 + alloc.powers * gains[active])
        np.add.at(per_link, owner[active], mode_rates)
    rates = [float(r) for r in per_link]
    return rates, math.fsum(rates)


def system_sum_rate(
    channels: ChannelSet,
    subsets: Subsets,
    groupings: Sequence[GroupingResult],
    precoders: dict[tuple[int, int], np.ndarray],
    noise_var: float | None = None,
) -> RateReport:
    cfg = channels.config
    noise_var = cfg.noise_var if noise_var is None else noise_var
    receivers = receivers_from(groupings, cfg.L)
    per_user = {}
    per_cell = []
    for l in range(cfg.L):
        users = list(subsets[l])
        links = [effective_link(channels.H[l, k, l], receivers[(l, k)], precoders[(l, k)])
                 for k in users]
        rates, total = cell_sum_rate(links, cfg.bs_power, noise_var)
        per_user.update({(l, k): r for k, r in zip(users, rates)})
        per_cell.append(total)
    return RateReport(per_user=per_user, per_cell=per_cell, total=math.fsum(per_cell))
