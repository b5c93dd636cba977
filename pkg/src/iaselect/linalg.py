"""Dense complex-matrix kernels.

All functions take and return plain ``numpy`` arrays. A "basis" is an
``(ambient_dim, subspace_dim)`` array with orthonormal columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DimensionMismatch,
    EmptyGains,
    NotPositiveDefinite,
    NullSpaceTooSmall,
    RankDeficient,
)

RANK_TOL = 1e-10


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A.astype(np.complex128, copy=False)


def gso(A, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormalize the columns of `A` left to right (Gram-Schmidt).

    Modified Gram-Schmidt with one re-orthogonalization pass per column,
    which keeps the output orthonormal to machine precision.

    Raises
    ------
    RankDeficient
        If a column is numerically in the span of the previous ones.
    """
    A = _as_matrix(A)
    n, d = A.shape
    if d > n:
        raise RankDeficient(f"{d} columns cannot be independent in dimension {n}")
    scale = np.linalg.norm(A, 2) if A.size else 0.0
    Q = np.empty((n, d), dtype=np.complex128)
    for j in range(d):
        v = A[:, j].copy()
        for _ in range(2):
            for i in range(j):
                v -= (Q[:, i].conj() @ v) * Q[:, i]
        nv = np.linalg.norm(v)
        if scale == 0.0 or nv <= tol * scale:
            raise RankDeficient(f"column {j} lies in the span of columns 0..{j - 1}")
        Q[:, j] = v / nv
    return Q


def orth(A, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the column space of `A` via SVD (rank-revealing)."""
    A = _as_matrix(A)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return U[:, :0]
    rank = int(np.count_nonzero(s > tol * s[0]))
    return U[:, :rank]


def null_space(A, min_dim: int, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis for `min_dim` directions of the null space of `A`.

    When the numerical nullity exceeds `min_dim`, the right singular
    vectors belonging to the smallest singular values are kept.
    """
    A = _as_matrix(A)
    rows, cols = A.shape
    if min_dim < 1:
        raise ValueError("min_dim must be positive")
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    rank = 0 if s.size == 0 or s[0] == 0.0 else int(np.count_nonzero(s > tol * s[0]))
    nullity = cols - rank
    if nullity < min_dim:
        raise NullSpaceTooSmall(
            f"null space of {rows}x{cols} matrix has dimension {nullity} < {min_dim}"
        )
    return Vh[cols - min_dim:].conj().T


def chordal_distance(P, Q) -> float:
    """Chordal distance ``||P P^H - Q Q^H||_F / sqrt(2)`` between two subspaces.

    `P` and `Q` must have orthonormal columns and the same number of rows.
    """
    P = _as_matrix(P)
    Q = _as_matrix(Q)
    if P.shape[0] != Q.shape[0]:
        raise DimensionMismatch(f"ambient dimensions differ: {P.shape[0]} vs {Q.shape[0]}")
    D = P @ P.conj().T - Q @ Q.conj().T
    return float(np.linalg.norm(D) / np.sqrt(2.0))


def inv_sqrt_hermitian(A) -> np.ndarray:
    """Hermitian inverse square root of a Hermitian positive-definite matrix."""
    A = _as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {A.shape}")
    A = 0.5 * (A + A.conj().T)
    w, E = np.linalg.eigh(A)
    if w[-1] <= 0.0 or w[0] <= 1e-12 * w[-1]:
        raise NotPositiveDefinite(f"eigenvalues range [{w[0]:.3e}, {w[-1]:.3e}]")
    B = (E / np.sqrt(w)) @ E.conj().T
    return 0.5 * (B + B.conj().T)


@dataclass(frozen=True)
class PowerAllocation:
    powers: np.ndarray
    water_level: float
    total_power: float

    def rate(self, gains) -> float:
        """Achieved sum of ``log2(1 + p_i g_i)``."""
        return float(np.sum(np.log2(1.0 + self.powers * np.asarray(gains, dtype=float))))


def water_fill(gains, budget: float) -> PowerAllocation:
    """Water-filling over parallel channels with the given SNR slopes.

    Exact active-set solution: modes are sorted by ``1/g`` and the largest
    active set whose implied water level clears every active floor wins.
    """
    g = np.asarray(gains, dtype=float).ravel()
    if g.size == 0:
        raise EmptyGains("water_fill needs at least one gain")
    if np.any(g <= 0.0) or not np.all(np.isfinite(g)):
        raise ValueError("gains must be positive and finite")
    if budget <= 0.0:
        raise ValueError("budget must be positive")
    floors = 1.0 / g
    order = np.argsort(floors, kind="stable")
    sorted_floors = floors[order]
    csum = np.cumsum(sorted_floors)
    mu = budget + sorted_floors[0]
    for n in range(g.size, 0, -1):
        mu = (budget + csum[n - 1]) / n
        if mu > sorted_floors[n - 1]:
            break
    powers = np.maximum(mu - floors, 0.0)
    return PowerAllocation(powers=powers, water_level=float(mu), total_power=float(budget))
