"""Generalized symmetric eigenproblem H c = E S c with rank projection of S."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import LinearDependenceError, RankDeficientError

OVERLAP_FLOOR = 1e-12


@dataclass
class SpectrumSolution:
    """Lowest eigenpairs; ``coefficients[:, k]`` is S-normalized."""

    energies: np.ndarray
    coefficients: np.ndarray
    effective_rank: int
    condition_estimate: float
    # full projected spectrum, used for bordered candidate updates
    all_energies: np.ndarray | None = None
    all_vectors: np.ndarray | None = None


def solve_generalized(H, S, k: int = 1, floor: float = OVERLAP_FLOOR) -> SpectrumSolution:
    """Lowest ``k`` eigenpairs after projecting out directions with s/s_max < floor."""
    H = np.asarray(H, dtype=float)
    S = np.asarray(S, dtype=float)
    s_val, s_vec = scipy.linalg.eigh(S)
    s_max = s_val[-1]
    keep = s_val > floor * s_max
    rank = int(np.count_nonzero(keep))
    if rank < k:
        raise RankDeficientError(f"effective rank {rank} < {k} requested states")
    x = s_vec[:, keep] / np.sqrt(s_val[keep])
    h_red = x.T @ H @ x
    h_red = 0.5 * (h_red + h_red.T)
    e, y = scipy.linalg.eigh(h_red)
    vecs = x @ y
    cond = float(s_max / s_val[keep][0])
    return SpectrumSolution(e[:k].copy(), vecs[:, :k].copy(), rank, cond, e, vecs)


def _secular_root(e, z, zz, target):
    """Root ``target`` of zz - lam - sum z_i^2 / (e_i - lam) = 0, vectorized over rows.

    e: (r,) sorted eigenvalues; z: (K, r); zz: (K,).
    """
    K, r = z.shape
    z2 = z * z
    scale = np.abs(e).max() + np.abs(zz).max() + np.sqrt(z2.sum(axis=1)).max() + 1.0
    if target == 0:
        lo = np.full(K, min(e[0], zz.min()) - 2.0 * scale)
    else:
        lo = np.full(K, e[target - 1])
    if target < r:
        hi = np.full(K, e[target])
    else:
        hi = np.full(K, max(e[-1], zz.max()) + 2.0 * scale)

    def f(lam):
        # a pole hit exactly gives +-inf, which still orders the bisection correctly
        with np.errstate(divide="ignore", invalid="ignore"):
            return zz - lam - (z2 / (e[None, :] - lam[:, None])).sum(axis=1)

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = f(mid)
        up = val > 0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
        if np.all(hi - lo <= 4e-16 * np.maximum(np.abs(lo), np.abs(hi)) + 1e-300):
            break
    return 0.5 * (lo + hi)


def bordered_energies(sol: SpectrumSolution, s_row, h_row, s_diag, h_diag,
                      target: int = 0, dependence_tol: float = 1e-7):
    """Energy of state ``target`` after adding each candidate to the basis.

    Rows are (K, n) overlaps / Hamiltonian elements with the current basis.
    Candidates whose S-orthogonal residual norm is below ``dependence_tol`` of
    their own norm come back as +inf.
    """
    s_row = np.atleast_2d(s_row)
    h_row = np.atleast_2d(h_row)
    s_diag = np.atleast_1d(np.asarray(s_diag, dtype=float))
    h_diag = np.atleast_1d(np.asarray(h_diag, dtype=float))
    e = sol.all_energies
    u = sol.all_vectors
    q = s_row @ u
    g = h_row @ u
    nu = s_diag - np.einsum("kr,kr->k", q, q)
    ok = nu > (dependence_tol**2) * s_diag
    nu_safe = np.where(ok, nu, 1.0)
    z = (g - q * e[None, :]) / np.sqrt(nu_safe)[:, None]
    zz = (h_diag - 2.0 * np.einsum("kr,kr->k", q, g) + np.einsum("kr,r,kr->k", q, e, q)) / nu_safe
    out = _secular_root(e, z, zz, target)
    out[~ok] = np.inf
    return out


def candidate_lowest_energy(sol: SpectrumSolution, s_row, h_row, s_diag, h_diag,
                            target: int = 0, dependence_tol: float = 1e-7) -> float:
    """Single-candidate version of :func:`bordered_energies` that raises on dependence."""
    val = bordered_energies(sol, s_row, h_row, s_diag, h_diag, target, dependence_tol)[0]
    if not np.isfinite(val):
        raise LinearDependenceError("candidate is linearly dependent on the basis")
    return float(val)
