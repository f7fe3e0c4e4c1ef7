import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fewbody.errors import LinearDependenceError, RankDeficientError
from fewbody.spectral import bordered_energies, candidate_lowest_energy, solve_generalized


def jacobi_eigenvalues(M, sweeps=50):
    """Cyclic Jacobi rotations on a symmetric matrix; independent of LAPACK."""
    a = np.array(M, dtype=float)
    n = a.shape[0]
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off < 1e-15 * np.linalg.norm(a):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / a[p, q]
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))


def random_pencil(rng, n, cond=1e3):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    s = q @ np.diag(np.geomspace(1.0, 1.0 / cond, n)) @ q.T
    h = rng.normal(size=(n, n))
    return 0.5 * (h + h.T), 0.5 * (s + s.T)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 9), seed=st.integers(0, 10**6))
def test_generalized_against_jacobi_rotations(n, seed):
    rng = np.random.default_rng(seed)
    H, S = random_pencil(rng, n)
    L = np.linalg.cholesky(S)
    Li = np.linalg.inv(L)
    ref = jacobi_eigenvalues(Li @ H @ Li.T)
    sol = solve_generalized(H, S, k=n)
    assert np.allclose(sol.energies, ref, rtol=1e-8, atol=1e-9)
    c = sol.coefficients
    assert np.allclose(c.T @ S @ c, np.eye(n), atol=1e-8)
    assert sol.effective_rank == n


def test_rank_projection_drops_duplicate_functions():
    rng = np.random.default_rng(4)
    H, S = random_pencil(rng, 4)
    # append an exact copy of function 0
    H2 = np.pad(H, ((0, 1), (0, 1)))
    S2 = np.pad(S, ((0, 1), (0, 1)))
    H2[4, :4] = H2[:4, 4] = H[0]
    S2[4, :4] = S2[:4, 4] = S[0]
    H2[4, 4], S2[4, 4] = H[0, 0], S[0, 0]
    sol = solve_generalized(H2, S2, k=2)
    assert sol.effective_rank == 4
    assert np.allclose(sol.energies, solve_generalized(H, S, k=2).energies, atol=1e-8)
    with pytest.raises(RankDeficientError):
        solve_generalized(H2, S2, k=5)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 8), k=st.integers(1, 4), seed=st.integers(0, 10**6),
       target=st.integers(0, 2))
def test_bordered_update_equals_full_solve(n, k, seed, target):
    rng = np.random.default_rng(seed)
    H, S = random_pencil(rng, n + k)
    sol = solve_generalized(H[:n, :n], S[:n, :n], k=1)
    target = min(target, n)
    got = bordered_energies(sol, S[n:, :n], H[n:, :n], np.diag(S)[n:], np.diag(H)[n:], target)
    for i in range(k):
        idx = list(range(n)) + [n + i]
        full = solve_generalized(H[np.ix_(idx, idx)], S[np.ix_(idx, idx)], k=n + 1)
        assert got[i] == pytest.approx(full.energies[target], rel=1e-9, abs=1e-9)


def test_dependent_candidate_is_flagged():
    rng = np.random.default_rng(0)
    H, S = random_pencil(rng, 3)
    sol = solve_generalized(H, S, k=1)
    with pytest.raises(LinearDependenceError):
        candidate_lowest_energy(sol, S[1], H[1], S[1, 1], H[1, 1])
