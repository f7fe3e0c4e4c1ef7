"""Correlated Gaussian basis functions and their closed-form matrix elements.

A basis function is exp(-1/2 sum_{i<j} alpha_ij r_ij^2) = exp(-1/2 x^T A x) on
Jacobi coordinates x, with A = sum_{i<j} alpha_ij w_ij w_ij^T. Matrix elements
between two forms only need C = A + B:

    overlap      ((2 pi)^d / det C)^(3/2)
    kinetic      3/2 tr(Lambda A C^-1 B) * overlap
    pair moment  3 c_ij * overlap,           c_ij = w_ij^T C^-1 w_ij
    Gaussian     V0 (beta^2 / (beta^2 + 2 c_ij))^(3/2) * overlap

The scalar functions below follow those formulas literally. The batched
kernels drop the (2 pi)^(3d/2) constant, symmetrize over the identical-particle
group and return elements between unit-normalized symmetrized functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import SingularFormError
from .system import JacobiFrame, PairPotential, SystemSpec, build_jacobi

COND_FLOOR = 1e-14


@dataclass
class CorrelatedGaussian:
    """One basis function, stored both as pair parameters and as its Jacobi form."""

    alphas: np.ndarray
    form: np.ndarray
    symmetrized: bool = False
    permutations: list = field(default_factory=list)

    @classmethod
    def from_alphas(cls, alphas, frame: JacobiFrame, group=None) -> CorrelatedGaussian:
        alphas = np.asarray(alphas, dtype=float)
        if np.any(alphas <= 0):
            raise SingularFormError("pair parameters must be positive")
        form = form_from_alphas(alphas, frame)
        if np.linalg.eigvalsh(form)[0] <= 0:
            raise SingularFormError("form is not positive definite")
        return cls(alphas, form, group is not None, list(group or []))


def form_from_alphas(alphas, frame: JacobiFrame) -> np.ndarray:
    """A = sum_p alpha_p w_p w_p^T; works on a single vector or a (K, npairs) batch."""
    w = frame.pair_vectors
    return np.einsum("...p,pd,pe->...de", np.asarray(alphas, dtype=float), w, w)


def _checked_cholesky(c: np.ndarray) -> np.ndarray:
    diag = np.diag(c)
    try:
        chol = np.linalg.cholesky(c)
    except np.linalg.LinAlgError as exc:
        raise SingularFormError("A + B is not positive definite") from exc
    if np.min(np.diag(chol)) ** 2 < COND_FLOOR * np.max(diag):
        raise SingularFormError("A + B below the conditioning floor")
    return chol


def overlap(A, B) -> float:
    """<A|B> for unnormalized correlated Gaussians in d = dim(A) Jacobi vectors."""
    c = np.atleast_2d(np.asarray(A, float) + np.asarray(B, float))
    d = c.shape[0]
    chol = _checked_cholesky(c)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    return float(np.exp(1.5 * (d * np.log(2.0 * np.pi) - logdet)))


def kinetic(A, B, frame: JacobiFrame) -> float:
    """<A|T|B> with T the kinetic energy relative to the centre of mass (hbar = 1)."""
    A = np.atleast_2d(np.asarray(A, float))
    B = np.atleast_2d(np.asarray(B, float))
    cinv_b = np.linalg.solve(A + B, B)
    tr = np.trace(np.diag(frame.inverse_mass) @ A @ cinv_b)
    return 1.5 * tr * overlap(A, B)


def _pair_c(A, B, w) -> float:
    c = np.atleast_2d(np.asarray(A, float) + np.asarray(B, float))
    w = np.atleast_1d(np.asarray(w, float))
    return float(w @ np.linalg.solve(c, w))


def gaussian_pair_element(A, B, w, potential: PairPotential) -> float:
    """<A| V0 exp(-r_ij^2 / width^2) |B> for the pair with r_i - r_j = w . x."""
    beta2 = potential.width**2
    c = _pair_c(A, B, w)
    return potential.v0 * (beta2 / (beta2 + 2.0 * c)) ** 1.5 * overlap(A, B)


def pair_sq_moment(A, B, w) -> float:
    """<A| r_ij^2 |B>."""
    return 3.0 * _pair_c(A, B, w) * overlap(A, B)


def symmetrize(g: CorrelatedGaussian, group, frame: JacobiFrame) -> list[CorrelatedGaussian]:
    """Distinct images of ``g`` under particle permutations in ``group``.

    ``group`` holds permutations as tuples; perm[i] is the particle moved into
    slot i, so pair (i, j) of the image carries alpha of (perm[i], perm[j]).
    """
    index = {p: k for k, p in enumerate(frame.pairs)}
    images = []
    seen = set()
    for perm in group:
        alphas = np.empty_like(g.alphas)
        for k, (i, j) in enumerate(frame.pairs):
            a, b = sorted((perm[i], perm[j]))
            alphas[k] = g.alphas[index[(a, b)]]
        key = tuple(np.round(alphas, 14))
        if key in seen:
            continue
        seen.add(key)
        images.append(CorrelatedGaussian(alphas, form_from_alphas(alphas, frame),
                                         True, list(group)))
    return images


# ----------------------------------------------------------------- batched kernels

@njit(cache=True)
def _chol_inv(c, d, L, inv):
    """Cholesky factor of c into L, inverse into inv; returns log det or nan."""
    for j in range(d):
        s = c[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if s <= 0.0:
            return np.nan
        ljj = np.sqrt(s)
        L[j, j] = ljj
        for i in range(j + 1, d):
            s = c[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            L[i, j] = s / ljj
    logdet = 0.0
    for j in range(d):
        logdet += 2.0 * np.log(L[j, j])
    # inverse of L (lower), stored in the upper triangle scratch via inv
    for col in range(d):
        for i in range(d):
            s = 1.0 if i == col else 0.0
            for k in range(i):
                s -= L[i, k] * inv[k, col]
            inv[i, col] = s / L[i, i] if i >= col else 0.0
    # C^-1 = L^-T L^-1
    for i in range(d):
        for j in range(i, d):
            s = 0.0
            for k in range(j, d):
                s += inv[k, i] * inv[k, j]
            L[i, j] = s
    for i in range(d):
        for j in range(i, d):
            inv[i, j] = L[i, j]
            inv[j, i] = L[i, j]
    return logdet


@njit(cache=True, fastmath=True, error_model="numpy")
def _sym_elements(ap, fa, ta, lk, b, fb, tb, lj, w, beta2, want_moments):
    """Symmetrized, normalized elements between candidates and basis functions.

    ap: (K, G, d, d) permuted candidate forms, lk: (K,) log self-norms,
    b: (M, d, d) basis forms, lj: (M,) log self-norms. fa/fb hold X Lambda^(1/2)
    and ta/tb tr(Lambda X) for the same forms. The kinetic trace uses
    tr(Lambda A C^-1 B) = tr(Lambda X) - |L^-1 X Lambda^(1/2)|^2 with X the
    narrower of A and B, which avoids cancellation for very unequal widths.
    """
    K, G, d, _ = ap.shape
    M = b.shape[0]
    P = w.shape[0]
    S = np.zeros((K, M))
    T = np.zeros((K, M))
    V = np.zeros((K, M))
    if want_moments:
        R = np.zeros((K, M, P))
    else:
        R = np.zeros((1, 1, 1))
    L = np.empty((d, d))
    y = np.empty((d, d + P))
    rhs = np.empty((d, d + P))
    for p in range(d):
        for q in range(P):
            rhs[p, d + q] = w[q, p]
    for k in range(K):
        for j in range(M):
            ss = 0.0
            tt = 0.0
            vv = 0.0
            for g in range(G):
                ok = True
                for jj in range(d):
                    acc = ap[k, g, jj, jj] + b[j, jj, jj]
                    for q in range(jj):
                        acc -= L[jj, q] * L[jj, q]
                    if acc <= 0.0:
                        ok = False
                        break
                    ljj = np.sqrt(acc)
                    L[jj, jj] = ljj
                    for i in range(jj + 1, d):
                        acc = ap[k, g, i, jj] + b[j, i, jj]
                        for q in range(jj):
                            acc -= L[i, q] * L[jj, q]
                        L[i, jj] = acc / ljj
                if not ok:
                    continue
                logdet = 0.0
                for jj in range(d):
                    logdet += 2.0 * np.log(L[jj, jj])
                s = np.exp(-1.5 * logdet - 0.5 * lk[k] - 0.5 * lj[j])
                use_a = ta[k, g] <= tb[j]
                for p in range(d):
                    for q in range(d):
                        rhs[p, q] = fa[k, g, p, q] if use_a else fb[j, p, q]
                # forward solve L y = rhs
                for p in range(d):
                    for q in range(d + P):
                        acc = rhs[p, q]
                        for r in range(p):
                            acc -= L[p, r] * y[r, q]
                        y[p, q] = acc / L[p, p]
                sub = 0.0
                for p in range(d):
                    for q in range(d):
                        sub += y[p, q] * y[p, q]
                tr = (ta[k, g] if use_a else tb[j]) - sub
                pot = 0.0
                for pp in range(P):
                    cp = 0.0
                    for p in range(d):
                        cp += y[p, d + pp] * y[p, d + pp]
                    pot += (beta2 / (beta2 + 2.0 * cp)) ** 1.5
                    if want_moments:
                        R[k, j, pp] += 3.0 * cp * s
                ss += s
                tt += 1.5 * tr * s
                vv += pot * s
            S[k, j] = ss
            T[k, j] = tt
            V[k, j] = vv
    return S, T, V, R


@njit(cache=True)
def _log_self_norms(ap, a):
    """log sum_g det(A + A_g)^(-3/2) for each function."""
    K, G, d, _ = ap.shape
    out = np.empty(K)
    c = np.empty((d, d))
    L = np.empty((d, d))
    inv = np.empty((d, d))
    vals = np.empty(G)
    for k in range(K):
        m = -np.inf
        for g in range(G):
            for p in range(d):
                for q in range(d):
                    c[p, q] = ap[k, g, p, q] + a[k, p, q]
            logdet = _chol_inv(c, d, L, inv)
            vals[g] = -1.5 * logdet if not np.isnan(logdet) else -np.inf
            if vals[g] > m:
                m = vals[g]
        acc = 0.0
        for g in range(G):
            acc += np.exp(vals[g] - m)
        out[k] = m + np.log(acc)
    return out


class ElementKernel:
    """Batched symmetrized matrix elements for one system.

    Potential elements are returned for unit strength, so the Hamiltonian for
    any depth is ``T + v0 * V``.
    """

    def __init__(self, spec: SystemSpec, frame: JacobiFrame | None = None,
                 symmetrize: bool = True):
        self.spec = spec
        self.frame = frame or build_jacobi(spec)
        self.group = spec.symmetry_group() if symmetrize else [tuple(range(spec.n))]
        self.perm_mats = np.array([self.frame.permutation_matrix(p) for p in self.group])
        self._perm_t = np.ascontiguousarray(np.transpose(self.perm_mats, (0, 2, 1)))
        self.lam = np.ascontiguousarray(self.frame.inverse_mass)
        self.w = np.ascontiguousarray(self.frame.pair_vectors)
        self.beta2 = spec.potential.width ** 2

    @property
    def dim(self) -> int:
        return self.frame.dim

    @property
    def n_pairs(self) -> int:
        return len(self.frame.pairs)

    def forms(self, alphas) -> np.ndarray:
        return np.ascontiguousarray(form_from_alphas(alphas, self.frame))

    def permuted(self, forms) -> np.ndarray:
        """(K, d, d) -> (K, G, d, d) images T^T A T."""
        forms = np.asarray(forms, dtype=float)
        return np.ascontiguousarray(self._perm_t @ forms[:, None] @ self.perm_mats)

    def log_norms(self, forms) -> np.ndarray:
        return _log_self_norms(self.permuted(forms), np.ascontiguousarray(forms))

    def elements(self, forms_a, lnorm_a, forms_b, lnorm_b, moments=False):
        """Normalized S, T, V (and pair moments) between two sets of functions."""
        ap = self.permuted(forms_a)
        fa, ta = self._kinetic_factors(ap)
        b = np.ascontiguousarray(forms_b)
        fb, tb = self._kinetic_factors(b)
        return _sym_elements(ap, fa, ta, np.ascontiguousarray(lnorm_a), b, fb, tb,
                             np.ascontiguousarray(lnorm_b), self.w, self.beta2, moments)

    def _kinetic_factors(self, forms):
        f = np.ascontiguousarray(forms * np.sqrt(self.lam))
        t = np.einsum("...pp,p->...", forms, self.lam)
        return f, np.ascontiguousarray(t)

    def diagonal(self, forms, lnorms):
        """Self elements <k|O|k> for each function (S is 1 by construction)."""
        forms = np.ascontiguousarray(forms)
        ap = self.permuted(forms)
        fa, ta = self._kinetic_factors(ap)
        fb, tb = self._kinetic_factors(forms)
        K = forms.shape[0]
        t = np.empty(K)
        v = np.empty(K)
        for k in range(K):
            sl = slice(k, k + 1)
            _, tk, vk, _ = _sym_elements(ap[sl], fa[sl], ta[sl], lnorms[sl], forms[sl], fb[sl],
                                         tb[sl], lnorms[sl], self.w, self.beta2, False)
            t[k] = tk[0, 0]
            v[k] = vk[0, 0]
        return t, v
