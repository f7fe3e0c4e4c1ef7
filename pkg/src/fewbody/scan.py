"""Strength sweeps, binding thresholds, scaling factors, power-law fits and mass scans."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import radial
from .errors import DegenerateFitError, FewBodyError, ThresholdNotFoundError
from .observables import halo_decompose, nearest_neighbor_radius, pair_distance_by_species, state_msr
from .schematic import g_crit_unitarity
from .svm import SvmConfig, grow_basis, refine_basis, with_config
from .system import PairPotential, SystemSpec, characteristic_energy, reduced_strength

log = logging.getLogger(__name__)

ZERO_RANGE_S0 = 1.00624
ZERO_RANGE_SCALING = math.exp(math.pi / ZERO_RANGE_S0)
LITERATURE_SCALING = 23.0

CSV_COLUMNS = ["v0_over_Es", "inv_a_sq", "E0_over_Es", "E1_over_Es", "msr0", "msr1",
               "rd0", "rd1", "flags"]


def _two_body_a(v0: float, b: float = 1.0, mu: float = 0.5) -> float:
    """Scattering length in units of b for an identical pair; inf at unitarity."""
    res = radial.scattering_length(PairPotential(v0, b), mu)
    return res.scattering_length / b


def signed_inverse_a_sq(a_over_b: float) -> float:
    """(b/a)^2 carrying the sign of a, zero at unitarity."""
    if not math.isfinite(a_over_b):
        return 0.0
    if a_over_b == 0:
        return math.inf
    return math.copysign(1.0 / a_over_b**2, a_over_b)


def eighth_power(x):
    """Sign-preserving |x|^(1/8), the axis transform used for energy-versus-1/a^2 plots."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** 0.125


def _solve(spec: SystemSpec, cfg: SvmConfig, initial=None, stream: int = 0):
    ens = grow_basis(spec, cfg, initial=initial, stream=stream)
    return refine_basis(ens, cfg, stream=stream + 1)


# ------------------------------------------------------------------- sweeps

@dataclass
class ScanRecord:
    """One strength point; energies in E_s, squared radii in b^2, r_d in b."""

    v0: float
    inv_a_sq: float
    a_over_b: float
    energies: list[float] = field(default_factory=list)
    msr: list[float] = field(default_factory=list)
    rd: list[float] = field(default_factory=list)
    pair_msd: list[dict] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    basis_size: int = 0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def csv_row(self) -> dict:
        def pick(seq, k):
            return seq[k] if len(seq) > k else float("nan")

        return {
            "v0_over_Es": self.v0, "inv_a_sq": self.inv_a_sq,
            "E0_over_Es": pick(self.energies, 0), "E1_over_Es": pick(self.energies, 1),
            "msr0": pick(self.msr, 0), "msr1": pick(self.msr, 1),
            "rd0": pick(self.rd, 0), "rd1": pick(self.rd, 1),
            "flags": ";".join(self.flags + ([f"ERROR:{self.error}"] if self.error else [])),
        }

    def to_dict(self) -> dict:
        return asdict(self)


def _observe(ens, n: int):
    msr, rd, pmsd = [], [], []
    for k in range(len(ens.solution.energies)):
        if f"CONTINUUM_SUSPECT_{k}" in ens.flags:
            msr.append(float("nan"))
            rd.append(float("nan"))
            pmsd.append({})
            continue
        val = state_msr(ens, k)
        msr.append(val)
        rd.append(nearest_neighbor_radius(val, n))
        pmsd.append(pair_distance_by_species(ens, k))
    return msr, rd, pmsd


def sweep_strength(n: int, v0_grid, cfg: SvmConfig, b: float = 1.0,
                   mass_ratio: float | None = None, warm_start: bool = True) -> list[ScanRecord]:
    """Solve at every depth in ``v0_grid`` (E_s), deepest first, warm-starting each point.

    Failures are recorded on the point and the sweep continues. Records come
    back sorted by V0.
    """
    grid = sorted((float(v) for v in v0_grid))
    records = []
    prev = None
    es = None
    for i, v in enumerate(grid):
        if mass_ratio is None:
            spec = SystemSpec.identical(n, v, b)
        else:
            spec = SystemSpec.with_light(n, mass_ratio, v, b)
        es = es or characteristic_energy(spec)
        try:
            a = _two_body_a(v, b, 0.5 * spec.heavy_mass)
        except FewBodyError:
            a = float("nan")
        rec = ScanRecord(v / es, signed_inverse_a_sq(a), a)
        try:
            ens = _solve(spec, cfg, prev if warm_start else None, stream=2 * i)
            rec.energies = list(ens.energies / es)
            rec.msr, rec.rd, rec.pair_msd = _observe(ens, n)
            rec.flags = sorted(ens.flags)
            rec.basis_size = len(ens)
            prev = ens
        except FewBodyError as exc:
            rec.error = f"{type(exc).__name__}: {exc}"
            log.warning("sweep point V0=%g failed: %s", v, exc)
        records.append(rec)
    return records


def write_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for rec in records:
            writer.writerow(rec.csv_row())


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, default=_json_default)


def _json_default(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if hasattr(x, "to_dict"):
        return x.to_dict()
    raise TypeError(f"cannot serialize {type(x).__name__}")


# --------------------------------------------------------------- thresholds

@dataclass
class ThresholdPoint:
    v0: float
    energy: float
    channel: float
    msr: float
    basis_size: int

    @property
    def gap(self) -> float:
        return self.energy - self.channel


@dataclass
class ThresholdResult:
    """Binding threshold of one state; V0 in E_s, lengths in b."""

    n: int
    state: int
    v0: float
    a_over_b: float
    msr: float
    method: str
    points: list[ThresholdPoint] = field(default_factory=list)
    upper: float | None = None

    @property
    def v0_reduced(self) -> float:
        return reduced_strength(self.v0)

    @property
    def r_d(self) -> float:
        return nearest_neighbor_radius(self.msr, self.n) if self.msr > 0 else float("nan")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["v0_reduced"] = self.v0_reduced
        out["r_d"] = self.r_d
        return out


class ChannelEnergy:
    """Lowest breakup threshold min(0, E_{N-1}^(0)) as a function of depth.

    Two-body channels are solved radially; larger ones by SVM, skipped (set to
    zero) on the shallow side of a known (N-1)-body threshold.
    """

    def __init__(self, n: int, cfg: SvmConfig, b: float = 1.0,
                 known_threshold: float | None = None):
        self.n_sub = n - 1
        self.cfg = with_config(cfg, target_states=1)
        self.b = b
        self.known_threshold = known_threshold
        self._cache: dict[float, float] = {}
        self._prev = None

    def __call__(self, v0: float) -> float:
        if self.n_sub < 2:
            return 0.0
        if self.known_threshold is not None and v0 >= self.known_threshold:
            return 0.0
        if v0 in self._cache:
            return self._cache[v0]
        if self.n_sub == 2:
            levels = radial.bound_energies(PairPotential(v0, self.b), 0.5, k_max=1)
            val = min(0.0, levels[0]) if levels else 0.0
        else:
            spec = SystemSpec.identical(self.n_sub, v0, self.b)
            ens = _solve(spec, self.cfg, self._prev, stream=7)
            self._prev = ens
            val = min(0.0, float(ens.energies[0]))
        self._cache[v0] = val
        return val


def _quadratic_root(v, g, lo: float, hi: float):
    """Root of the parabola through (v, g) inside [lo, hi], else None."""
    c2, c1, c0 = np.polyfit(v, g, 2)
    if abs(c2) < 1e-14 * max(abs(c1), 1e-300):
        roots = [-c0 / c1] if c1 != 0 else []
    else:
        disc = c1 * c1 - 4 * c2 * c0
        if disc < 0:
            return None
        sq = math.sqrt(disc)
        roots = [(-c1 - sq) / (2 * c2), (-c1 + sq) / (2 * c2)]
    inside = [r for r in roots if lo <= r <= hi]
    return min(inside, key=lambda r: abs(r - lo)) if inside else None


def find_threshold(n: int, state: int = 0, cfg: SvmConfig | None = None,
                   v_bound: float | None = None, b: float = 1.0,
                   channel: ChannelEnergy | None = None, first_step: float = 0.08,
                   stop_fraction: float = 0.01, max_evals: int = 14) -> ThresholdResult:
    """Depth where state ``state`` of N identical bosons reaches its breakup channel.

    Starting from a bound depth (default: unitarity), the depth is moved
    towards zero along secants of gap = E - channel until the gap has shrunk
    to ``stop_fraction`` of its starting value, or until a shallower point
    comes out more bound than the previous one. The last three bound points
    are fitted with a parabola in V0, whose root is the threshold; the squared
    radius is extrapolated from the same points.
    """
    if n == 2:
        v = radial.critical_strength(1, 0.5, b=b)
        return ThresholdResult(2, 0, v, math.inf, math.inf, "exact")
    cfg = cfg or SvmConfig(threshold_mode=True)
    cfg = with_config(cfg, target_states=state + 1)
    channel = channel or ChannelEnergy(n, cfg, b)
    if v_bound is None:
        v_bound = radial.critical_strength(1, 0.5, b=b)

    points: list[ThresholdPoint] = []
    ensembles = []
    upper = None
    evals = 0

    def evaluate(v):
        nonlocal evals
        evals += 1
        warm = ensembles[-1] if ensembles else None
        ens = _solve(SystemSpec.identical(n, v, b), cfg, warm, stream=10 * evals)
        e = float(ens.energies[state])
        ch = channel(v)
        return ThresholdPoint(v, e, ch, state_msr(ens, state), len(ens)), ens

    p, ens = evaluate(v_bound)
    if not p.gap < 0:
        raise ThresholdNotFoundError(f"state {state} of N={n} is not bound at V0={v_bound}")
    points.append(p)
    ensembles.append(ens)
    step = first_step * abs(v_bound)
    while evals < max_evals:
        last = points[-1]
        if len(points) >= 2:
            prev = points[-2]
            slope = (last.gap - prev.gap) / (last.v0 - prev.v0)
            guess = last.v0 - last.gap / slope if slope < 0 else last.v0 + 2 * step
            target = last.v0 + 0.6 * (guess - last.v0)
        else:
            target = last.v0 + step
        if upper is not None:
            target = min(target, 0.5 * (last.v0 + upper))
        target = min(target, -1e-12)
        p, ens = evaluate(target)
        if p.gap < 0 and p.gap <= last.gap:
            # shallower yet deeper bound: the basis no longer resolves the gap
            break
        if p.gap < 0:
            points.append(p)
            ensembles.append(ens)
            step = target - last.v0
            if len(points) >= 3 and p.gap > stop_fraction * points[0].gap:
                break
        else:
            upper = target if upper is None else min(upper, target)
    if len(points) < 2:
        raise ThresholdNotFoundError(f"could not approach the threshold of state {state}, N={n}")

    last = points[-1]
    span = last.v0 - points[0].v0
    hi = upper if upper is not None else last.v0 + span
    tail = points[-3:]
    v = np.array([q.v0 for q in tail])
    g = np.array([q.gap for q in tail])
    r2 = np.array([q.msr for q in tail])
    root, method = None, "quadratic"
    if len(tail) == 3:
        root = _quadratic_root(v, g, last.v0, hi)
    if root is None:
        method = "linear"
        slope = (g[-1] - g[-2]) / (v[-1] - v[-2])
        root = float(np.clip(v[-1] - g[-1] / slope, last.v0, hi))
    deg = 2 if len(tail) == 3 else 1
    msr_th = float(np.polyval(np.polyfit(v, r2, deg), root))
    try:
        a = _two_body_a(root, b)
    except FewBodyError:
        a = float("nan")
    return ThresholdResult(n, state, float(root), a, msr_th, method, points, upper)


# ------------------------------------------------------------ scaling factor

@dataclass
class ScalingResult:
    value: float
    e0: float
    e1: float
    basis_size: int
    zero_range: float = ZERO_RANGE_SCALING
    literature: float = LITERATURE_SCALING

    def to_dict(self) -> dict:
        return asdict(self)


def scaling_factor(cfg: SvmConfig | None = None, b: float = 1.0) -> ScalingResult:
    """sqrt(E3^(0) / E3^(1)) for the trimer at unitarity."""
    cfg = cfg or SvmConfig(basis_max=300, threshold_mode=True, refinement_sweeps=1,
                           convergence_tol=1e-7, patience=40)
    cfg = with_config(cfg, target_states=2)
    v = radial.critical_strength(1, 0.5, b=b)
    ens = _solve(SystemSpec.identical(3, v, b), cfg)
    e0, e1 = (float(x) for x in ens.energies[:2])
    if not (e0 < 0 and e1 < 0):
        raise FewBodyError("trimer states are not both bound")
    return ScalingResult(math.sqrt(e0 / e1), e0, e1, len(ens))


# ----------------------------------------------------------------- power law

@dataclass
class PowerLawFit:
    """<r^2/b^2>_th = C (N-1)^p fitted on log-log axes."""

    C: float
    p: float
    C_err: float
    p_err: float
    r_squared: float
    n_values: list[int]

    def predict(self, n):
        return self.C * (np.asarray(n, dtype=float) - 1.0) ** self.p

    def to_dict(self) -> dict:
        return asdict(self)


def fit_power_law(threshold_radii: dict, fit_range=None) -> PowerLawFit:
    """Least squares of log<r^2> against log(N-1); errors from the residual scatter."""
    items = sorted((int(k), float(v)) for k, v in threshold_radii.items())
    if fit_range is not None:
        lo, hi = fit_range
        items = [(k, v) for k, v in items if lo <= k <= hi]
    if len(items) < 3:
        raise DegenerateFitError(f"need at least 3 points, got {len(items)}")
    ns = np.array([k for k, _ in items], dtype=float)
    r2 = np.array([v for _, v in items])
    if np.any(r2 <= 0) or np.any(ns < 2):
        raise DegenerateFitError("radii must be positive and N >= 2")
    res = stats.linregress(np.log(ns - 1.0), np.log(r2))
    C = math.exp(res.intercept)
    return PowerLawFit(C, res.slope, C * res.intercept_stderr, res.stderr, res.rvalue**2,
                       [k for k, _ in items])


# ----------------------------------------------------------------- mass scan

@dataclass
class MassScanRecord:
    """N-1 identical particles plus one of mass M = ratio * m at heavy-light unitarity."""

    mass_ratio: float
    v0: float
    energies: list[float] = field(default_factory=list)
    energy_ratio: float = float("nan")
    msr: list[float] = field(default_factory=list)
    pair_msd: list[dict] = field(default_factory=list)
    core_msr: float = float("nan")
    r2_halo: float = float("nan")
    b_halo: float = float("nan")
    negative_halo: bool = False
    g_crit: float = float("nan")
    flags: list[str] = field(default_factory=list)
    error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def heavy_light_unitarity(mass_ratio: float, m: float = 1.0, b: float = 1.0) -> float:
    """Common depth at which the heavy-light pair has a zero-energy bound state."""
    M = mass_ratio * m
    return radial.critical_strength(1, m * M / (m + M), b=b)


def mass_scan(n_plus_1: int, ratios, cfg: SvmConfig, b: float = 1.0) -> list[MassScanRecord]:
    """Two lowest states for each mass ratio, all pairs at the heavy-light unitary depth.

    The core (the N identical particles alone at the same depth) is solved too,
    for the halo decomposition and the unitarity G_crit.
    """
    cfg2 = with_config(cfg, target_states=2)
    core_cfg = with_config(cfg, target_states=1)
    out = []
    for ratio in ratios:
        v = heavy_light_unitarity(ratio, 1.0, b)
        rec = MassScanRecord(float(ratio), v)
        try:
            spec = SystemSpec.with_light(n_plus_1, ratio, v, b)
            ens = _solve(spec, cfg2)
            es = characteristic_energy(spec)
            rec.energies = list(ens.energies / es)
            rec.energy_ratio = rec.energies[0] / rec.energies[1]
            rec.msr, _, rec.pair_msd = _observe(ens, n_plus_1)
            rec.flags = sorted(ens.flags)
            core = _solve(SystemSpec.identical(n_plus_1 - 1, v, b), core_cfg, stream=5)
            rec.core_msr = state_msr(core, 0)
            if np.isfinite(rec.msr[1]):
                halo = halo_decompose(rec.core_msr, rec.msr[1], n_plus_1 - 1, 1.0, ratio)
                rec.r2_halo, rec.b_halo, rec.negative_halo = (halo.r2_halo, halo.b_halo,
                                                              halo.negative_halo)
            rec.g_crit = g_crit_unitarity(n_plus_1, ratio, rec.core_msr, b)
        except FewBodyError as exc:
            rec.error = f"{type(exc).__name__}: {exc}"
            log.warning("mass ratio %g failed: %s", ratio, exc)
        out.append(rec)
    return out
