"""Two-body s-wave reference physics on a radial grid.

Everything here is solved with a fixed-step Numerov recursion, repeated on
successively halved grids and Richardson-extrapolated. The results are the
reference values that the correlated-Gaussian solver is checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.optimize import brentq

from .errors import NoSolutionError, NonConvergedError
from .system import HBAR, PairPotential, WidthConvention

DIVERGED_LIMIT = 1e12
UNRESOLVED_LIMIT = 1e8


class _Unitarity:
    """Sentinel for an infinite two-body scattering length."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNITARITY"


UNITARITY = _Unitarity()


@dataclass(frozen=True)
class RadialSolverConfig:
    """Grid settings. Lengths are in units of the potential's ``b``.

    ``grid_step`` is the finest step; coarser Richardson levels use
    2x, 4x, ... that step.
    """

    r_max: float = 30.0
    grid_step: float = 1.0 / 200.0
    richardson_levels: int = 3
    node_tolerance: float = 1e-8

    def __post_init__(self):
        if self.r_max < 25.0:
            raise ValueError("r_max must be at least 25 b")
        if self.grid_step > 1.0 / 200.0:
            raise ValueError("finest grid_step must not exceed b/200")
        if self.richardson_levels < 1:
            raise ValueError("need at least one grid level")

    def steps(self, b: float) -> list[float]:
        """Grid steps from coarsest to finest."""
        n = self.richardson_levels
        return [b * self.grid_step * 2 ** (n - 1 - i) for i in range(n)]


@dataclass
class TwoBodyResult:
    scattering_length: float
    diverged: bool = False
    bound_energies: list[float] = field(default_factory=list)
    node_count: int = 0


@njit(cache=True)
def _numerov(f, h):
    """Outward Numerov solution of u'' = f u with u(0) = 0, u(h) = h."""
    n = f.shape[0]
    u = np.empty(n)
    u[0] = 0.0
    u[1] = h
    h12 = h * h / 12.0
    for i in range(1, n - 1):
        u[i + 1] = (2.0 * (1.0 + 5.0 * h12 * f[i]) * u[i]
                    - (1.0 - h12 * f[i - 1]) * u[i - 1]) / (1.0 - h12 * f[i + 1])
        if abs(u[i + 1]) > 1e250:
            u[: i + 2] *= 1e-250
    return u


def _count_nodes(u) -> int:
    s = np.sign(u[1:])
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _richardson(values, check_tol=None):
    """Extrapolate values at steps h, h/2, h/4, ... assuming an h^4, h^6, ... series."""
    table = [list(values)]
    power = 4
    while len(table[-1]) > 1:
        prev = table[-1]
        fac = 2.0**power
        table.append([(fac * prev[i + 1] - prev[i]) / (fac - 1.0) for i in range(len(prev) - 1)])
        power += 2
    best = table[-1][0]
    if check_tol is not None and len(values) > 1:
        # compare the two best estimates available
        second = table[-2][-1]
        scale = max(abs(best), 1e-300)
        if abs(best - second) > check_tol * scale and abs(best - second) > 1e-14:
            raise NonConvergedError(
                f"Richardson levels disagree: {second!r} vs {best!r}"
            )
    return best


def _scale(mu: float) -> float:
    return 2.0 * mu / HBAR**2


def _match_radius(potential: PairPotential, cfg: RadialSolverConfig) -> float:
    return cfg.r_max * potential.b


def _zero_energy_solution(potential, mu, h, r_max):
    n = int(round(r_max / h))
    r = h * np.arange(n + 1)
    f = _scale(mu) * potential(r)
    return r, _numerov(f, h)


def _scattering_length_at(potential, mu, h, r_max):
    r, u = _zero_energy_solution(potential, mu, h, r_max)
    i2 = len(r) - 1
    i1 = int(round(0.8 * i2))
    r1, r2, u1, u2 = r[i1], r[i2], u[i1], u[i2]
    nodes = _count_nodes(u)
    if u2 == u1:
        return math.inf, nodes
    a = (r1 * u2 - r2 * u1) / (u2 - u1)
    # a node of the linear tail beyond the grid
    if a > r2:
        nodes += 1
    return a, nodes


def scattering_length(potential: PairPotential, mu: float,
                      cfg: RadialSolverConfig | None = None) -> TwoBodyResult:
    """Zero-energy s-wave scattering length from the asymptote u ~ (r - a).

    Returns ``diverged=True`` (and an infinite length) when |a| exceeds 1e12 b,
    or 1e8 b with grid levels that no longer agree, which only happens within
    rounding distance of a critical depth.
    """
    cfg = cfg or RadialSolverConfig()
    if potential.v0 == 0.0:
        return TwoBodyResult(0.0, False, [], 0)
    r_max = _match_radius(potential, cfg)
    vals = []
    nodes = 0
    for h in cfg.steps(potential.b):
        a, nodes = _scattering_length_at(potential, mu, h, r_max)
        if not np.isfinite(a) or abs(a) > DIVERGED_LIMIT * potential.b:
            return TwoBodyResult(math.copysign(math.inf, a), True, [], nodes)
        vals.append(a)
    try:
        a = _richardson(vals, check_tol=cfg.node_tolerance)
    except NonConvergedError:
        # grid levels only disagree this far out because the depth itself is
        # resolved to ~1e-16: such a value is unitarity for every purpose
        if min(abs(v) for v in vals) > UNRESOLVED_LIMIT * potential.b:
            return TwoBodyResult(math.copysign(math.inf, vals[-1]), True, [], nodes)
        raise
    if abs(a) > DIVERGED_LIMIT * potential.b:
        return TwoBodyResult(math.copysign(math.inf, a), True, [], nodes)
    return TwoBodyResult(a, False, [], nodes)


# ---------------------------------------------------------------- bound states

def _decay_ratio(kappa2: float, h: float) -> float:
    """Decaying root of the Numerov recursion for u'' = kappa^2 u."""
    g = h * h * kappa2 / 12.0
    c = (1.0 + 5.0 * g) / (1.0 - g)
    return c - math.sqrt(c * c - 1.0)


class _Shooter:
    """Regular solution at fixed grid, matched to the exact free tail beyond r_m."""

    def __init__(self, potential: PairPotential, mu: float, h: float):
        self.h = h
        self.k = _scale(mu)
        # V is below 1e-60 |V0| past 12 widths
        r_m = 12.0 * potential.width
        n = int(math.ceil(r_m / h)) + 1
        self.r = h * np.arange(n + 1)
        self.v = self.k * potential(self.r)

    def solve(self, energy: float):
        u = _numerov(self.v - self.k * energy, self.h)
        lam = _decay_ratio(-self.k * energy, self.h)
        mismatch = u[-1] - lam * u[-2]
        return u, mismatch

    def count_below(self, energy: float) -> int:
        """Number of bound states with energy below ``energy`` (< 0)."""
        u, mismatch = self.solve(energy)
        nodes = _count_nodes(u[:-1])
        if np.sign(u[-2]) != np.sign(mismatch):
            nodes += 1
        return nodes

    def mismatch(self, energy: float) -> float:
        u, mismatch = self.solve(energy)
        return mismatch / (abs(u[-2]) + 1e-300)

    def level(self, k: int, e_low: float) -> float:
        lo, hi = e_low, 0.0
        # Sturm bisection down to a bracket containing only level k
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.count_below(mid) > k:
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-9 * abs(hi) + 1e-300:
                break
        try:
            return brentq(self.mismatch, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=200)
        except ValueError:
            return 0.5 * (lo + hi)


def bound_energies(potential: PairPotential, mu: float, k_max: int = 10,
                   cfg: RadialSolverConfig | None = None) -> list[float]:
    """All s-wave bound-state energies (ascending, at most ``k_max``)."""
    cfg = cfg or RadialSolverConfig()
    if potential.v0 >= 0:
        return []
    e_low = potential.v0
    levels = []
    for h in cfg.steps(potential.b):
        sh = _Shooter(potential, mu, h)
        # states strictly below a tiny negative energy
        tiny = -1e-14 * abs(potential.v0)
        count = min(sh.count_below(tiny), k_max)
        levels.append([sh.level(k, e_low) for k in range(count)])
    count = min(len(lv) for lv in levels)
    if count == 0:
        return []
    out = []
    for k in range(count):
        vals = [lv[k] for lv in levels]
        out.append(_richardson(vals))
    return out


# ---------------------------------------------------------- critical strengths

def _strength_to_v0(s: float, mu: float, potential: PairPotential) -> float:
    """Dimensionless depth 2 mu |V0| width^2 / hbar^2 -> V0."""
    return -s * HBAR**2 / (2.0 * mu * potential.width**2)


def _template(b: float, width_convention) -> PairPotential:
    return PairPotential(-1.0, b, WidthConvention(width_convention))


def _zero_energy_tail(s, mu, template, h, r_max):
    pot = template.with_v0(_strength_to_v0(s, mu, template))
    r, u = _zero_energy_solution(pot, mu, h, r_max)
    i2 = len(r) - 1
    i1 = int(round(0.8 * i2))
    slope = (u[i2] - u[i1]) / (r[i2] - r[i1])
    return r[i1], u[i1], slope, u


def _zero_energy_nodes(s, mu, template, h, r_max) -> int:
    r1, u1, slope, u = _zero_energy_tail(s, mu, template, h, r_max)
    nodes = _count_nodes(u)
    # node of the linear tail beyond the grid
    if slope != 0 and np.sign(slope) != np.sign(u[-1]):
        nodes += 1
    return nodes


def _critical_s_at(k, mu, template, h, r_max):
    lo, hi = 0.0, 2.0
    while _zero_energy_nodes(hi, mu, template, h, r_max) < k:
        lo, hi = hi, 2.0 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _zero_energy_nodes(mid, mu, template, h, r_max) >= k:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-6 * hi:
            break

    def slope(s):
        r1, u1, sl, u = _zero_energy_tail(s, mu, template, h, r_max)
        return sl / (abs(u1) + 1e-300)

    return brentq(slope, lo, hi, xtol=1e-15, rtol=1e-15)


def critical_strength(k: int, mu: float, cfg: RadialSolverConfig | None = None,
                      b: float = 1.0,
                      width_convention=WidthConvention.EXP_R2_OVER_B2) -> float:
    """Depth V0 (< 0) at which the k-th s-wave bound state sits at zero energy."""
    if k < 1:
        raise ValueError("k must be >= 1")
    cfg = cfg or RadialSolverConfig()
    template = _template(b, width_convention)
    r_max = cfg.r_max * b
    vals = [_critical_s_at(k, mu, template, h, r_max) for h in cfg.steps(b)]
    s = _richardson(vals)
    return _strength_to_v0(s, mu, template)


def critical_constant(cfg: RadialSolverConfig | None = None) -> float:
    """mu |V0| width^2 / hbar^2 at the first zero-energy bound state of a Gaussian (~1.34)."""
    v0 = critical_strength(1, 0.5, cfg, 1.0, WidthConvention.EXP_R2_OVER_B2)
    return 0.5 * abs(v0) / HBAR**2


def strength_for_scattering_length(a_target, branch: int, mu: float,
                                   cfg: RadialSolverConfig | None = None,
                                   b: float = 1.0,
                                   width_convention=WidthConvention.EXP_R2_OVER_B2) -> float:
    """Depth V0 on the given branch (number of bound states) with scattering length ``a_target``.

    ``a_target`` is a length in units of ``b`` or :data:`UNITARITY`; the latter
    returns the depth where state ``branch + 1`` sits at zero energy.
    """
    cfg = cfg or RadialSolverConfig()
    if branch < 0:
        raise ValueError("branch must be >= 0")
    if a_target is UNITARITY or (isinstance(a_target, float) and math.isinf(a_target)):
        return critical_strength(branch + 1, mu, cfg, b, width_convention)
    a_target = float(a_target)
    if branch == 0:
        if a_target > 0:
            raise NoSolutionError("positive scattering length needs at least one bound state")
        if a_target == 0:
            return 0.0
    template = _template(b, width_convention)
    r_max = cfg.r_max * b
    vals = []
    for h in cfg.steps(b):
        lo = 0.0 if branch == 0 else _critical_s_at(branch, mu, template, h, r_max)
        hi = _critical_s_at(branch + 1, mu, template, h, r_max)

        def resid(s):
            r1, u1, slope, u = _zero_energy_tail(s, mu, template, h, r_max)
            return (u1 - slope * (r1 - a_target * b)) / (abs(u1) + abs(slope) * r1 + 1e-300)

        eps = 1e-12 * hi
        f_lo, f_hi = resid(lo + eps), resid(hi - eps)
        if np.sign(f_lo) == np.sign(f_hi):
            raise NoSolutionError(f"a = {a_target} b not reachable on branch {branch}")
        vals.append(brentq(resid, lo + eps, hi - eps, xtol=1e-15, rtol=1e-15))
    s = _richardson(vals)
    return _strength_to_v0(s, mu, template)


def zero_range_dimer_energy(a: float, mu: float) -> float:
    """-hbar^2 / (2 mu a^2), the universal shallow-dimer energy."""
    return -HBAR**2 / (2.0 * mu * a * a)
