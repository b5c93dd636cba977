"""Closed-form flop counts for the selection algorithms.

One real multiply or add is one flop, so a complex multiply is 6 and a
complex add is 2. Every function returns an exact Python ``int``.
Water-filling, the small ``d_s x d_s`` inverse and rate logarithms are
not counted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

UMethod = Literal["joint", "decoupled"]


@dataclass(frozen=True)
class FlopParams:
    M: int
    N: int
    K: int
    L: int
    K_T: int
    d_s: int
    u_method: UMethod | None = None

    @property
    def method(self) -> UMethod:
        if self.u_method is not None:
            return self.u_method
        return "joint" if self.K <= 3 else "decoupled"


def flops_svd(n: int, m: int) -> int:
    """Approximate cost of the SVD of a complex ``n x m`` matrix."""
    return 24 * n * m * m + 48 * n * n * m + 54 * n ** 3


def decoupled_dims(K: int, M: int, N: int) -> tuple[list[tuple[int, int]], bool]:
    """Per-recursion ``(rows_i, rows_{i+1})`` dimensions of the decoupled solver.

    Dimensions that would be nonpositive are clamped to 1; the flag reports
    whether any clamping happened.
    """
    dims = []
    clamped = False
    s = [0]  # s_1 = 0, s_i = 2 s_{i-1} + 1
    levels = math.ceil(math.log2(K)) if K > 1 else 0
    for _ in range(levels + 1):
        s.append(2 * s[-1] + 1)
    for i in range(1, levels + 1):
        a = 2 ** (i - 1) * N - s[i - 1] * M
        b = 2 ** i * N - s[i] * M
        if a < 1 or b < 1:
            clamped = True
        dims.append((max(a, 1), max(b, 1)))
    return dims, clamped


def flops_receive_beamformers(p: FlopParams) -> int:
    """Cost of all receive beamformers of one cell (``psi_U``)."""
    if p.method == "joint":
        return flops_svd(p.K * p.M, p.M + p.K * p.N)
    if p.K < 2:
        raise ValueError("the decoupled solver needs K > 1")
    dims, clamped = decoupled_dims(p.K, p.M, p.N)
    if clamped:
        warnings.warn(f"decoupled flop model clamped nonpositive dimensions for {p}",
                      stacklevel=2)
    total = p.K * flops_svd(p.M, p.M + p.N)
    for i, (a, b) in enumerate(dims, start=1):
        groups = -(-p.K // 2 ** i)
        total += groups * (flops_svd(p.M, a) + 8 * p.M * a * b) + p.K * 8 * p.N * a * b
    return total


def _init_flops(p: FlopParams) -> int:
    return 4 * p.K_T * p.L * p.M * p.N


def _rate_terms(p: FlopParams) -> int:
    d = p.d_s
    return 8 * d * d * p.N + 8 * p.N * p.M * d + 8 * p.M * d * d + 8 * d ** 3


def _sweeps(p: FlopParams) -> int:
    return (p.K_T - p.K + 1) * p.K * p.L


def flops_o_algorithm(p: FlopParams) -> int:
    M, N, d = p.M, p.N, p.d_s
    psi_u = flops_receive_beamformers(p)
    interferers = p.K * (p.L - 1)
    per_candidate = (
        psi_u
        + 8 * M * M * d - 2 * M * d
        + 8 * M * N * d * interferers
        + 8 * M * M * interferers * d - 2 * M * interferers * d
        + 8 * M * M * d
        + 8 * M * M * interferers * d
        + 6 * M * M
    )
    return _init_flops(p) + p.L * psi_u + per_candidate * _sweeps(p)


def flops_s_algorithm(p: FlopParams) -> int:
    psi_u = flops_receive_beamformers(p)
    precoder = flops_svd(p.M, p.K * (p.L - 1) * p.d_s)
    per_candidate = psi_u + p.K * p.L * (precoder + _rate_terms(p))
    return _init_flops(p) + p.L * psi_u + per_candidate * _sweeps(p)


def flops_brute_force(p: FlopParams) -> int:
    psi_u = flops_receive_beamformers(p)
    precoder = flops_svd(p.M, p.K * (p.L - 1) * p.d_s)
    per_subset = p.K * p.L * precoder + p.L * psi_u + p.K * p.L * _rate_terms(p)
    return math.comb(p.K_T, p.K) ** p.L * per_subset


FLOP_MODELS = {
    "brute": flops_brute_force,
    "s": flops_s_algorithm,
    "o": flops_o_algorithm,
}
