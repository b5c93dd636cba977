import numpy as np
import pytest

from iaselect.system import SystemConfig

# M=3, N=2, K=2, L=2, d_s=1 and M=6, N=4, K=2, L=2, d_s=2
SMALL_ARRAY = SystemConfig(num_cells=2, users_per_cell=2, select_per_cell=2,
                    tx_antennas=3, rx_antennas=2, streams_per_user=1)
LARGE_ARRAY = SystemConfig(num_cells=2, users_per_cell=2, select_per_cell=2,
                    tx_antennas=6, rx_antennas=4, streams_per_user=2)

ACCEPTANCE_LINES: list[str] = []


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng, n):
    Q, R = np.linalg.qr(crandn(rng, n, n))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def water_fill_bisection(gains, budget, iters=200):
    """Reference water-filling: bisect the water level until the budget is met."""
    floors = 1.0 / np.asarray(gains, dtype=float)
    lo, hi = floors.min(), floors.max() + budget
    for _ in range(iters):
        mu = 0.5 * (lo + hi)
        if np.maximum(mu - floors, 0.0).sum() > budget:
            hi = mu
        else:
            lo = mu
    mu = 0.5 * (lo + hi)
    return np.maximum(mu - floors, 0.0), mu


def determinant_rate(ch, subsets, receivers, precoders, power, noise_var):
    """Sum over cells of log2|I + W Hb Q Hb^H W^H / s2| with water-filled Q."""
    total = 0.0
    for l, users in enumerate(subsets):
        mats, gains, owners = [], [], []
        for k in users:
            U, V = receivers[(l, k)], precoders[(l, k)]
            Hb = U.conj().T @ ch.H[l, k, l] @ V
            evals, E = np.linalg.eigh(U.conj().T @ U)
            W = E @ np.diag(evals ** -0.5) @ E.conj().T
            A = W @ Hb
            _, s, Vh = np.linalg.svd(A)
            mats.append((A, Vh.conj().T))
            gains.extend(s ** 2 / noise_var)
            owners.extend([len(mats) - 1] * s.size)
        p, _ = water_fill_bisection(gains, power)
        for i, (A, Vr) in enumerate(mats):
            pk = np.array([p[j] for j in range(len(p)) if owners[j] == i])
            Q = Vr @ np.diag(pk) @ Vr.conj().T
            M = np.eye(A.shape[0]) + A @ Q @ A.conj().T / noise_var
            total += np.log2(np.linalg.det(M).real)
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
