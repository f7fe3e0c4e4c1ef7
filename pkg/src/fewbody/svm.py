"""Stochastic variational growth and refinement of a correlated Gaussian basis."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NoProgressError
from .gaussians import ElementKernel
from .spectral import OVERLAP_FLOOR, SpectrumSolution, bordered_energies, solve_generalized
from .system import SystemSpec, characteristic_energy

log = logging.getLogger(__name__)

CONTINUUM_RADIUS = 1e3


@dataclass(frozen=True)
class SvmConfig:
    """Knobs of the trial-and-select procedure.

    Pair parameters are drawn as alpha = 1/d^2 with d log-uniform in
    [d_min, d_max] (units of b); threshold mode widens d_max to
    ``d_max_threshold`` and doubles the patience.
    """

    candidates: int = 25
    basis_max: int = 150
    target_states: int = 1
    convergence_tol: float = 1e-6
    patience: int = 50
    threshold_mode: bool = False
    seed: int = 0
    refinement_sweeps: int = 2
    d_min: float = 0.1
    d_max: float = 50.0
    d_max_threshold: float = 5000.0
    dependence_tol: float = 1e-7
    ground_fraction: float = 0.4
    basis_min: int = 30
    symmetrize: bool | None = None

    def __post_init__(self):
        if self.candidates < 0:
            raise ValueError("candidates must be >= 0")
        if self.basis_max < self.target_states + 2:
            raise ValueError("basis_max must be at least target_states + 2")
        if self.target_states < 1:
            raise ValueError("need at least one target state")

    @property
    def effective_d_max(self) -> float:
        return self.d_max_threshold if self.threshold_mode else self.d_max

    @property
    def effective_patience(self) -> int:
        return 2 * self.patience if self.threshold_mode else self.patience

    def wants_symmetrization(self, n: int) -> bool:
        return n <= 6 if self.symmetrize is None else self.symmetrize


def _sample_alphas(cfg: SvmConfig, n_pairs: int, b: float, stream: int, step: int,
                   count: int | None = None) -> np.ndarray:
    """Candidate pair parameters; row k depends only on (seed, stream, step, k).

    In threshold mode a third of the rows use the ordinary range, a third the
    widened range and a third pick the range pair by pair, so compact cores and
    diffuse tails are both proposed.
    """
    count = cfg.candidates if count is None else count
    rng = np.random.default_rng([cfg.seed, stream, step])
    lo = np.log(cfg.d_min * b)
    hi_narrow = np.log(cfg.d_max * b)
    hi_wide = np.log(cfg.effective_d_max * b)
    u = rng.uniform(size=(count, n_pairs))
    if cfg.threshold_mode:
        mode = rng.integers(0, 3, size=(count, 1))
        wide = np.where(mode == 2, rng.uniform(size=(count, n_pairs)) < 0.5, mode == 1)
        hi = np.where(wide, hi_wide, hi_narrow)
    else:
        hi = hi_narrow
    d = np.exp(lo + u * (hi - lo))
    return 1.0 / d**2


@dataclass
class BasisEnsemble:
    """Basis functions with cached normalized overlap, kinetic, unit-potential and moment matrices."""

    spec: SystemSpec
    kernel: ElementKernel
    alphas: np.ndarray
    forms: np.ndarray
    lnorms: np.ndarray
    S: np.ndarray
    T: np.ndarray
    V: np.ndarray
    R: np.ndarray
    n_states: int = 1
    solution: SpectrumSolution | None = None
    history: list = field(default_factory=list)
    radius_history: list = field(default_factory=list)
    flags: set = field(default_factory=set)

    @classmethod
    def empty(cls, spec: SystemSpec, kernel: ElementKernel, n_states: int = 1) -> BasisEnsemble:
        d, p = kernel.dim, kernel.n_pairs
        return cls(spec, kernel, np.zeros((0, p)), np.zeros((0, d, d)), np.zeros(0),
                   np.zeros((0, 0)), np.zeros((0, 0)), np.zeros((0, 0)), np.zeros((0, 0, p)),
                   n_states)

    @classmethod
    def from_alphas(cls, spec: SystemSpec, alphas, kernel: ElementKernel | None = None,
                    n_states: int = 1) -> BasisEnsemble:
        """Build caches for a given list of pair-parameter vectors."""
        kernel = kernel or ElementKernel(spec)
        alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
        forms = kernel.forms(alphas)
        ln = kernel.log_norms(forms)
        S, T, V, R = kernel.elements(forms, ln, forms, ln, moments=True)
        ens = cls(spec, kernel, alphas, forms, ln, _sym(S), _sym(T), _sym(V),
                  0.5 * (R + R.transpose(1, 0, 2)), n_states)
        np.fill_diagonal(ens.S, 1.0)
        if len(alphas) >= n_states:
            ens.solve()
        return ens

    def __len__(self) -> int:
        return len(self.alphas)

    @property
    def v0(self) -> float:
        return self.spec.potential.v0

    def hamiltonian(self) -> np.ndarray:
        return self.T + self.v0 * self.V

    def solve(self) -> SpectrumSolution:
        k = min(self.n_states, len(self))
        self.solution = solve_generalized(self.hamiltonian(), self.S, k)
        return self.solution

    @property
    def energies(self) -> np.ndarray:
        """Tracked energies in units of E_s."""
        return self.solution.energies / characteristic_energy(self.spec)

    def with_v0(self, v0: float) -> BasisEnsemble:
        """Same basis, different depth; caches are depth independent and copied."""
        ens = BasisEnsemble(self.spec.with_v0(v0), self.kernel, self.alphas.copy(),
                            self.forms.copy(), self.lnorms.copy(), self.S.copy(), self.T.copy(),
                            self.V.copy(), self.R.copy(), self.n_states)
        if len(ens) >= ens.n_states:
            ens.solve()
        return ens

    def copy(self) -> BasisEnsemble:
        return BasisEnsemble(self.spec, self.kernel, self.alphas.copy(), self.forms.copy(),
                             self.lnorms.copy(), self.S.copy(), self.T.copy(), self.V.copy(),
                             self.R.copy(), self.n_states, self.solution,
                             [h.copy() for h in self.history], list(self.radius_history),
                             set(self.flags))

    # -- mutation helpers -------------------------------------------------

    def _rows(self, alphas):
        forms = self.kernel.forms(alphas)
        ln = self.kernel.log_norms(forms)
        return forms, ln

    def append(self, alphas) -> None:
        alphas = np.atleast_2d(alphas)
        forms, ln = self._rows(alphas)
        s, t, v, r = self.kernel.elements(forms, ln, self.forms, self.lnorms, moments=True)
        _, td, vd, rd = self.kernel.elements(forms, ln, forms, ln, moments=True)
        n = len(self)
        self.alphas = np.vstack([self.alphas, alphas])
        self.forms = np.concatenate([self.forms, forms])
        self.lnorms = np.concatenate([self.lnorms, ln])
        self.S = _border(self.S, s[0], 1.0)
        self.T = _border(self.T, t[0], td[0, 0])
        self.V = _border(self.V, v[0], vd[0, 0])
        p = self.R.shape[2]
        R = np.zeros((n + 1, n + 1, p))
        R[:n, :n] = self.R
        R[n, :n] = r[0]
        R[:n, n] = r[0]
        R[n, n] = rd[0, 0]
        self.R = R

    def drop_last(self) -> None:
        self.alphas = self.alphas[:-1]
        self.forms = self.forms[:-1]
        self.lnorms = self.lnorms[:-1]
        self.S = self.S[:-1, :-1]
        self.T = self.T[:-1, :-1]
        self.V = self.V[:-1, :-1]
        self.R = self.R[:-1, :-1]

    def replace_slot(self, i: int, alphas) -> None:
        alphas = np.atleast_2d(alphas)
        forms, ln = self._rows(alphas)
        s, t, v, r = self.kernel.elements(forms, ln, self.forms, self.lnorms, moments=True)
        _, td, vd, rd = self.kernel.elements(forms, ln, forms, ln, moments=True)
        self.alphas[i] = alphas[0]
        self.forms[i] = forms[0]
        self.lnorms[i] = ln[0]
        for mat, row, dg in ((self.S, s[0], 1.0), (self.T, t[0], td[0, 0]),
                             (self.V, v[0], vd[0, 0])):
            mat[i, :] = row
            mat[:, i] = row
            mat[i, i] = dg
        self.R[i, :] = r[0]
        self.R[:, i] = r[0]
        self.R[i, i] = rd[0, 0]

    def subset(self, keep) -> tuple[np.ndarray, np.ndarray]:
        idx = np.asarray(keep)
        return self.S[np.ix_(idx, idx)], self.hamiltonian()[np.ix_(idx, idx)]

    def spot_check(self, fraction: float = 0.01, seed: int = 0) -> float:
        """Max relative deviation of cached entries against a fresh recomputation."""
        rng = np.random.default_rng(seed)
        n = len(self)
        m = max(1, int(fraction * n * n))
        ii = rng.integers(0, n, m)
        jj = rng.integers(0, n, m)
        worst = 0.0
        for i, j in zip(ii, jj):
            s, t, v, _ = self.kernel.elements(self.forms[i:i + 1], self.lnorms[i:i + 1],
                                              self.forms[j:j + 1], self.lnorms[j:j + 1])
            for cached, fresh in ((self.S[i, j], s[0, 0]), (self.T[i, j], t[0, 0]),
                                  (self.V[i, j], v[0, 0])):
                worst = max(worst, abs(cached - fresh) / max(abs(fresh), 1e-300))
        return worst


def _sym(m):
    return 0.5 * (m + m.T)


def _border(mat, row, diag):
    n = mat.shape[0]
    out = np.empty((n + 1, n + 1))
    out[:n, :n] = mat
    out[n, :n] = row
    out[:n, n] = row
    out[n, n] = diag
    return out


def _record(ens: BasisEnsemble) -> None:
    from .observables import state_msr

    ens.history.append(ens.solution.energies.copy())
    radii = []
    for k in range(len(ens.solution.energies)):
        radii.append(state_msr(ens, k))
    ens.radius_history.append(np.array(radii))


def _evaluate(ens: BasisEnsemble, alphas, target: int, dependence_tol: float):
    forms = ens.kernel.forms(alphas)
    ln = ens.kernel.log_norms(forms)
    if len(ens) == 0:
        t, v = ens.kernel.diagonal(forms, ln)
        return t + ens.v0 * v
    s, t, v, _ = ens.kernel.elements(forms, ln, ens.forms, ens.lnorms)
    td, vd = ens.kernel.diagonal(forms, ln)
    h = t + ens.v0 * v
    hd = td + ens.v0 * vd
    good = np.isfinite(ln) & np.all(np.isfinite(s), axis=1)
    out = bordered_energies(ens.solution, s, h, np.ones(len(alphas)), hd,
                            min(target, ens.solution.effective_rank), dependence_tol)
    out[~good] = np.inf
    return out


def _try_accept(ens: BasisEnsemble, alphas_row, slack: float = 1e-12) -> bool:
    """Append and re-solve; undo if the rank projection raised any tracked energy."""
    before = None if ens.solution is None else ens.solution.energies.copy()
    ens.append(alphas_row)
    if len(ens) < 1:
        return True
    try:
        ens.solve()
    except Exception:
        ens.drop_last()
        if len(ens):
            ens.solve()
        return False
    after = ens.solution.energies
    if before is not None:
        m = min(len(before), len(after))
        tol = slack * np.maximum(1.0, np.abs(before[:m]))
        if np.any(after[:m] > before[:m] + tol):
            ens.drop_last()
            ens.solve()
            return False
    return True


def grow_basis(spec: SystemSpec, cfg: SvmConfig, initial: BasisEnsemble | None = None,
               stream: int = 0) -> BasisEnsemble:
    """Grow the basis one function at a time, best of ``cfg.candidates`` per step.

    State 0 is optimized first; with two target states the remaining budget
    targets state 1 while state 0 is monitored. ``initial`` warm-starts from an
    existing basis (recomputed at this spec's depth).
    """
    if initial is not None:
        ens = initial.with_v0(spec.potential.v0) if initial.spec.masses == spec.masses \
            else BasisEnsemble.from_alphas(spec, initial.alphas, n_states=cfg.target_states)
        ens.n_states = cfg.target_states
        ens.history, ens.radius_history, ens.flags = [], [], set()
        if len(ens) >= cfg.target_states:
            ens.solve()
            _record(ens)
    else:
        kernel = ElementKernel(spec, symmetrize=cfg.wants_symmetrization(spec.n))
        ens = BasisEnsemble.empty(spec, kernel, cfg.target_states)

    npairs = ens.kernel.n_pairs
    b = spec.potential.b
    patience = cfg.effective_patience
    step = 0
    rejected_run = 0
    n_targets = cfg.target_states
    budgets = _stage_budgets(cfg, len(ens))

    for target in range(n_targets):
        calm = 0
        while len(ens) < budgets[target]:
            step += 1
            alphas = _sample_alphas(cfg, npairs, b, stream, step)
            if len(ens) == 0:
                energies = _evaluate(ens, alphas, 0, cfg.dependence_tol)
                order = np.argsort(energies, kind="stable")
            else:
                # a state index beyond the current size means "the new top state"
                t = min(target, len(ens))
                energies = _evaluate(ens, alphas, t, cfg.dependence_tol)
                order = np.argsort(energies, kind="stable")
            accepted = False
            for idx in order:
                if not np.isfinite(energies[idx]):
                    break
                if _try_accept(ens, alphas[idx]):
                    accepted = True
                    break
            if not accepted:
                rejected_run += 1
                if rejected_run >= 10 * patience:
                    raise NoProgressError(f"no acceptable candidate in {rejected_run} steps")
                continue
            rejected_run = 0
            if len(ens) < n_targets:
                continue
            prev = ens.history[-1] if ens.history else None
            _record(ens)
            if prev is not None and len(prev) > target and len(ens.history[-1]) > target:
                old, new = prev[target], ens.history[-1][target]
                rel = abs(old - new) / max(abs(new), 1e-300)
                calm = calm + 1 if rel < cfg.convergence_tol else 0
                if calm >= patience and len(ens) >= cfg.basis_min:
                    log.debug("state %d converged at basis size %d", target, len(ens))
                    break
        budgets = _stage_budgets(cfg, len(ens), after=target + 1)
    if ens.solution is None or len(ens.solution.energies) < n_targets:
        ens.solve()
    _update_flags(ens)
    return ens


def _stage_budgets(cfg: SvmConfig, current: int, after: int = 0) -> list[int]:
    if cfg.target_states == 1:
        return [cfg.basis_max]
    first = max(current, int(cfg.ground_fraction * cfg.basis_max), cfg.target_states)
    budgets = [first] + [cfg.basis_max] * (cfg.target_states - 1)
    if after:
        budgets[after - 1] = current
    return budgets


def refine_basis(ens: BasisEnsemble, cfg: SvmConfig, stream: int = 1) -> BasisEnsemble:
    """One sweep per ``cfg.refinement_sweeps``: try K replacements for every slot.

    A replacement is kept only if it lowers the targeted energy and no tracked
    energy rises.
    """
    if cfg.candidates == 0 or cfg.refinement_sweeps == 0 or len(ens) < 2:
        return ens
    npairs = ens.kernel.n_pairs
    b = ens.spec.potential.b
    target = cfg.target_states - 1
    step = 0
    for sweep in range(cfg.refinement_sweeps):
        for i in range(len(ens)):
            step += 1
            current = ens.solution.energies.copy()
            keep = np.array([j for j in range(len(ens)) if j != i])
            S, H = ens.subset(keep)
            try:
                reduced = solve_generalized(H, S, min(ens.n_states, len(keep)))
            except Exception:
                continue
            alphas = _sample_alphas(cfg, npairs, b, stream + 1000 * (sweep + 1), step)
            forms = ens.kernel.forms(alphas)
            ln = ens.kernel.log_norms(forms)
            s, t, v, _ = ens.kernel.elements(forms, ln, ens.forms[keep], ens.lnorms[keep])
            td, vd = ens.kernel.diagonal(forms, ln)
            t_idx = min(target, reduced.effective_rank)
            cand = bordered_energies(reduced, s, t + ens.v0 * v, np.ones(len(alphas)),
                                     td + ens.v0 * vd, t_idx, cfg.dependence_tol)
            cand[~np.isfinite(ln)] = np.inf
            order = np.argsort(cand, kind="stable")
            for idx in order[:3]:
                if not cand[idx] < current[target] - 1e-14 * abs(current[target]):
                    break
                saved = (ens.alphas[i].copy(), ens.forms[i].copy(), ens.lnorms[i],
                         ens.S.copy(), ens.T.copy(), ens.V.copy(), ens.R.copy())
                ens.replace_slot(i, alphas[idx])
                ok = True
                try:
                    ens.solve()
                    new = ens.solution.energies
                    tol = 1e-12 * np.maximum(1.0, np.abs(current))
                    ok = not np.any(new > current + tol)
                except Exception:
                    ok = False
                if ok:
                    break
                (ens.alphas[i], ens.forms[i], ens.lnorms[i],
                 ens.S, ens.T, ens.V, ens.R) = saved
                ens.solve()
        _record(ens)
    _update_flags(ens)
    return ens


def _update_flags(ens: BasisEnsemble) -> None:
    ens.flags.discard("CONTINUUM_SUSPECT")
    rh = ens.radius_history
    if len(rh) < 5:
        return
    tail = [r for r in rh[-20:]]
    m = min(len(r) for r in tail)
    for k in range(m):
        rms = np.sqrt(np.array([r[k] for r in tail]))
        if rms[-1] > CONTINUUM_RADIUS * ens.spec.potential.b and np.all(np.diff(rms) >= 0):
            ens.flags.add("CONTINUUM_SUSPECT")
            ens.flags.add(f"CONTINUUM_SUSPECT_{k}")


def solve_states(spec: SystemSpec, cfg: SvmConfig, initial: BasisEnsemble | None = None):
    """Grow, refine, and return (energies in E_s, ensemble)."""
    ens = grow_basis(spec, cfg, initial=initial)
    ens = refine_basis(ens, cfg)
    return ens.energies.copy(), ens


def with_config(cfg: SvmConfig, **changes) -> SvmConfig:
    return replace(cfg, **changes)


__all__ = [
    "SvmConfig", "BasisEnsemble", "grow_basis", "refine_basis", "solve_states",
    "OVERLAP_FLOOR",
]
