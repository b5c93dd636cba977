"""User selection: brute force, sum-rate coordinate ascent, orthogonality.

Every strategy works on a :class:`Scenario`, which memoizes the pieces of
the alignment that depend only on one cell's subset (the grouping) and the
SNR-independent singular values of each full selection. Several
strategies and several SNRs can therefore share one channel draw cheaply.
Counters in :class:`SelectionTrace` count logical evaluations, not cache
misses.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .align import (
    AlignedSystem,
    GroupingResult,
    align_system,
    cell_sum_rate,
    design_precoder,
    effective_link,
    group_cell,
    interference_residual,
)
from .exceptions import IAError, SearchSpaceTooLarge
from .linalg import chordal_distance, gso
from .system import ChannelSet, next_cell, prev_cell

DEFAULT_BRUTE_CAP = 10**7

Subsets = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Selection:
    subsets: Subsets
    achieved_rate: float


@dataclass(frozen=True)
class Step:
    cell: int
    slot: int
    old_user: int
    new_user: int
    rate_before: float
    rate_after: float


@dataclass
class SelectionTrace:
    initial_rate: float = 0.0
    accepted_steps: list[Step] = field(default_factory=list)
    candidate_evaluations: int = 0
    rate_evaluations: int = 0
    failed_candidates: int = 0


class Scenario:
    """One channel draw plus memoized alignment results.

    Cached work is keyed on the sorted users of each cell: the rate depends
    only on which users are selected, and sorting makes it exactly so
    (otherwise slot order perturbs the last bits of the result).
    """

    def __init__(self, channels: ChannelSet):
        self.channels = channels
        self.config = channels.config
        self._groupings: dict[tuple[int, Subsets], GroupingResult | IAError] = {}
        self._gains: dict[Subsets, list[list[np.ndarray]] | IAError] = {}

    def grouping(self, bs: int, users: Sequence[int]) -> GroupingResult:
        key = (bs, tuple(sorted(int(u) for u in users)))
        hit = self._groupings.get(key)
        if hit is None:
            try:
                hit = group_cell(self.channels, bs, key[1])
            except IAError as exc:
                hit = exc
            self._groupings[key] = hit
        if isinstance(hit, IAError):
            raise hit
        return hit

    def groupings(self, subsets: Subsets) -> list[GroupingResult]:
        L = self.config.L
        return [self.grouping(l, subsets[next_cell(l, L)]) for l in range(L)]

    def align(self, subsets: Subsets) -> AlignedSystem:
        return align_system(self.channels, subsets, self.groupings(subsets))

    def link_gains(self, subsets: Subsets) -> list[list[np.ndarray]]:
        """Per cell, per selected user in ascending id order: the whitened effective links."""
        subsets = _canonical(subsets)
        hit = self._gains.get(subsets)
        if hit is None:
            try:
                hit = self._compute_gains(subsets)
            except IAError as exc:
                hit = exc
            self._gains[subsets] = hit
        if isinstance(hit, IAError):
            raise hit
        return hit

    def _compute_gains(self, subsets: Subsets) -> list[list[np.ndarray]]:
        groupings = self.groupings(subsets)
        L = self.config.L
        H = self.channels.H
        out = []
        for l in range(L):
            U_cell = groupings[prev_cell(l, L)].U
            cell = []
            for k in subsets[l]:
                V = design_precoder(self.channels, l, k, subsets, groupings)
                cell.append(effective_link(H[l, k, l], U_cell[k], V))
            out.append(cell)
        return out

    def rate(self, subsets: Subsets, noise_var: float | None = None) -> float:
        """Sum rate of the water-filled, fully aligned system."""
        noise_var = self.config.noise_var if noise_var is None else noise_var
        links = self.link_gains(subsets)
        return math.fsum(cell_sum_rate(cell, self.config.bs_power, noise_var)[1]
                         for cell in links)

    def residual(self, subsets: Subsets) -> float:
        a = self.align(_freeze(subsets))
        return interference_residual(self.channels, a.subsets, a.receivers, a.precoders)


def _freeze(subsets) -> Subsets:
    return tuple(tuple(int(u) for u in s) for s in subsets)


def _canonical(subsets) -> Subsets:
    return tuple(tuple(sorted(int(u) for u in s)) for s in subsets)


def _scenario(channels) -> Scenario:
    return channels if isinstance(channels, Scenario) else Scenario(channels)


def init_subsets(channels: ChannelSet | Scenario, noise_var: float | None = None) -> Selection:
    """Per cell, the K users with the largest direct-channel Frobenius norm."""
    sc = _scenario(channels)
    cfg = sc.config
    H = sc.channels.H
    subsets = []
    for l in range(cfg.L):
        norms = np.linalg.norm(H[l, :, l], axis=(-2, -1))
        # stable sort on -norm keeps the lower id first on ties
        order = np.argsort(-norms, kind="stable")[:cfg.K]
        subsets.append(tuple(int(u) for u in order))
    subsets = tuple(subsets)
    return Selection(subsets=subsets, achieved_rate=_safe_rate(sc, subsets, noise_var))


def _safe_rate(sc: Scenario, subsets: Subsets, noise_var) -> float:
    try:
        return sc.rate(subsets, noise_var)
    except IAError:
        return -math.inf


def search_space_size(K_T: int, K: int, L: int) -> int:
    return math.comb(K_T, K) ** L


def brute_force_select(
    channels: ChannelSet | Scenario,
    noise_var: float | None = None,
    cap: int = DEFAULT_BRUTE_CAP,
) -> tuple[Selection, int]:
    """Exhaustive search over every combination of per-cell subsets.

    Returns the best selection and the number of combinations evaluated.
    Ties go to the lexicographically smallest subset tuple.
    """
    sc = _scenario(channels)
    cfg = sc.config
    count = search_space_size(cfg.K_T, cfg.K, cfg.L)
    if count > cap:
        raise SearchSpaceTooLarge(count, cap)
    per_cell = list(itertools.combinations(range(cfg.K_T), cfg.K))
    best, best_rate, evaluated = None, -math.inf, 0
    for subsets in itertools.product(per_cell, repeat=cfg.L):
        evaluated += 1
        r = _safe_rate(sc, subsets, noise_var)
        if best is None or r > best_rate:
            best, best_rate = subsets, r
    return Selection(subsets=best, achieved_rate=best_rate), evaluated


def _with_slot(subsets: Subsets, cell: int, slot: int, user: int) -> Subsets:
    cell_users = list(subsets[cell])
    cell_users[slot] = user
    return subsets[:cell] + (tuple(cell_users),) + subsets[cell + 1:]


def _candidates(subsets: Subsets, cell: int, slot: int, K_T: int) -> list[int]:
    others = {u for i, u in enumerate(subsets[cell]) if i != slot}
    return [j for j in range(K_T) if j not in others]


def s_algorithm(
    channels: ChannelSet | Scenario, noise_var: float | None = None
) -> tuple[Selection, SelectionTrace]:
    """Sum-rate based coordinate ascent (one pass over every cell and slot).

    Each candidate re-solves only its own cell's grouping; every precoder
    and the full sum rate are then recomputed for it.
    """
    sc = _scenario(channels)
    cfg = sc.config
    init = init_subsets(sc, noise_var)
    subsets = init.subsets
    best = init.achieved_rate
    trace = SelectionTrace(initial_rate=best)
    for l in range(cfg.L):
        for k in range(cfg.K):
            p, r_p = None, -math.inf
            for j in _candidates(subsets, l, k, cfg.K_T):
                trace.candidate_evaluations += 1
                trace.rate_evaluations += 1
                r = _safe_rate(sc, _with_slot(subsets, l, k, j), noise_var)
                if r == -math.inf:
                    trace.failed_candidates += 1
                if r > r_p:
                    p, r_p = j, r
            if p is not None and r_p > best:
                trace.accepted_steps.append(Step(l, k, subsets[l][k], p, best, r_p))
                subsets = _with_slot(subsets, l, k, p)
                best = r_p
    return Selection(subsets=subsets, achieved_rate=best), trace


def orthogonality_metric(sc: Scenario, subsets: Subsets, cell: int, user: int) -> float:
    """``||A A^H - B B^H||_F`` in the reciprocal network at BS `cell`.

    ``A`` spans the desired uplink signal space of `user`; ``B`` spans the
    interference it competes with: the intersection subspace ``G_cell``, the
    effective channels of the other own-cell users, and those of the users
    of cells other than ``cell`` and ``next(cell)``. The receive beamformers
    of `cell` come from grouping `subsets[cell]` at BS ``prev(cell)``.
    """
    cfg = sc.config
    L = cfg.L
    H = sc.channels.H
    own = sc.grouping(prev_cell(cell, L), subsets[cell]).U
    A = gso(H[cell, user, cell].conj().T @ own[user])
    blocks = [sc.grouping(cell, subsets[next_cell(cell, L)]).G]
    blocks += [H[cell, t, cell].conj().T @ own[t] for t in subsets[cell] if t != user]
    for m in range(L):
        if m == cell or m == next_cell(cell, L):
            continue
        U_m = sc.grouping(prev_cell(m, L), subsets[m]).U
        blocks += [H[m, t, cell].conj().T @ U_m[t] for t in subsets[m]]
    B = gso(np.hstack(blocks))
    return math.sqrt(2.0) * chordal_distance(A, B)


def o_algorithm(
    channels: ChannelSet | Scenario, noise_var: float | None = None
) -> tuple[Selection, SelectionTrace]:
    """Orthogonality based coordinate ascent.

    Candidates are ranked by the chordal metric; only the winner's sum rate
    is evaluated, so each slot costs a single rate evaluation.
    """
    sc = _scenario(channels)
    cfg = sc.config
    init = init_subsets(sc, noise_var)
    subsets = init.subsets
    best = init.achieved_rate
    trace = SelectionTrace(initial_rate=best)
    for l in range(cfg.L):
        for k in range(cfg.K):
            p, score_p = None, -math.inf
            for j in _candidates(subsets, l, k, cfg.K_T):
                trace.candidate_evaluations += 1
                try:
                    score = orthogonality_metric(sc, _with_slot(subsets, l, k, j), l, j)
                except IAError:
                    trace.failed_candidates += 1
                    continue
                if score > score_p:
                    p, score_p = j, score
            if p is None:
                continue
            trace.rate_evaluations += 1
            r_p = _safe_rate(sc, _with_slot(subsets, l, k, p), noise_var)
            if r_p > best:
                trace.accepted_steps.append(Step(l, k, subsets[l][k], p, best, r_p))
                subsets = _with_slot(subsets, l, k, p)
                best = r_p
    return Selection(subsets=subsets, achieved_rate=best), trace
