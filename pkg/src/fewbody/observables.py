"""Structural observables of converged states: radii, pair distances, halo estimates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnboundStateError
from .system import HBAR


@dataclass
class HaloEstimate:
    r2_halo: float
    b_halo: float
    negative_halo: bool = False


@dataclass
class ObservableReport:
    """Per-state observables; lengths in b, squared lengths in b^2."""

    msr: list[float]
    pair_msd: list[dict[str, float]]
    r_d: list[float]
    halo: HaloEstimate | None = None
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"msr": self.msr, "pair_msd": self.pair_msd, "r_d": self.r_d, "flags": self.flags}
        if self.halo is not None:
            out["halo"] = {"r2_halo": self.halo.r2_halo, "B_halo": self.halo.b_halo,
                           "negative_halo": self.halo.negative_halo}
        return out


def _class_expectations(ens, state: int) -> dict[str, float]:
    """Class-summed <r_ij^2> of one state, in units of b^2."""
    c = ens.solution.coefficients[:, state]
    b2 = ens.spec.potential.b ** 2
    labels = ens.spec.pair_species()
    moments = np.einsum("i,ijp,j->p", c, ens.R, c)
    out: dict[str, float] = {}
    for lab, val in zip(labels, moments):
        out[lab] = out.get(lab, 0.0) + val / b2
    return out


def state_msr(ens, state: int) -> float:
    """Mass-weighted <sum_i m_i (r_i - R_c)^2> / sum_i m_i in b^2, no continuum check.

    Uses sum_i m_i (r_i - R_c)^2 = sum_{i<j} m_i m_j r_ij^2 / M_total.
    """
    masses = ens.spec.masses
    weight = {"HH": masses[0] * masses[0], "HL": masses[0] * masses[-1]}
    sums = _class_expectations(ens, state)
    return sum(weight[lab] * val for lab, val in sums.items()) / sum(masses) ** 2


def _check_bound(ens, state: int) -> None:
    if f"CONTINUUM_SUSPECT_{state}" in ens.flags:
        raise UnboundStateError(f"state {state} looks like a continuum state")


def mean_square_radius(ens, state: int = 0) -> float:
    """<r^2> of ``state`` in b^2, measured from the (mass-weighted) centre of mass.

    For equal masses this is (1/N^2) sum_{i<j} <r_ij^2>.
    """
    _check_bound(ens, state)
    return state_msr(ens, state)


def pair_distance_by_species(ens, state: int = 0) -> dict[str, float]:
    """Mean <r_ij^2> (b^2) within each species class, 'HH' and (if present) 'HL'."""
    _check_bound(ens, state)
    sums = _class_expectations(ens, state)
    labels = ens.spec.pair_species()
    return {lab: sums[lab] / labels.count(lab) for lab in sums}


def nearest_neighbor_radius(msr: float, n: int) -> float:
    """Radius of a sphere holding one particle of a uniform sphere with this <r^2>."""
    if msr <= 0:
        raise ValueError("mean-square radius must be positive")
    return np.sqrt(5.0 / 3.0) * np.sqrt(msr) / n ** (1.0 / 3.0)


def halo_reduced_mass(n_core: int, m: float, mass: float) -> float:
    """Reduced mass of one particle of mass ``mass`` against a core of n_core masses m."""
    return m * n_core * mass / (n_core * m + mass)


def halo_compose(core_msr: float, r2_halo: float, n_core: int, m: float = 1.0,
                 mass: float | None = None) -> float:
    """Total <r^2> of core plus one extra particle, mass weighted."""
    mass = m if mass is None else mass
    tot = n_core * m + mass
    return core_msr * n_core * m / tot + r2_halo * mass / tot


def halo_decompose(core_msr: float, total_msr: float, n_core: int, m: float = 1.0,
                   mass: float | None = None) -> HaloEstimate:
    """Invert the core-plus-particle radius relation and convert to a halo binding.

    Energies come out in hbar^2 / (mass unit * length unit^2); with m = 1 and
    lengths in b this is E_s. A non-positive halo radius is flagged, not raised.
    """
    if core_msr <= 0 or total_msr <= 0:
        raise ValueError("radii must be positive")
    mass = m if mass is None else mass
    tot = n_core * m + mass
    r2 = (total_msr * tot - core_msr * n_core * m) / mass
    if r2 <= 0:
        return HaloEstimate(r2, float("nan"), True)
    mu_n = halo_reduced_mass(n_core, m, mass)
    return HaloEstimate(r2, HBAR**2 / (4.0 * mu_n * r2), False)


def report(ens, halo_core_msr: float | None = None) -> ObservableReport:
    """Observables for every tracked state; continuum-like states are reported as NaN."""
    msr, pmsd, rd = [], [], []
    for k in range(len(ens.solution.energies)):
        try:
            val = mean_square_radius(ens, k)
            msr.append(val)
            pmsd.append(pair_distance_by_species(ens, k))
            rd.append(nearest_neighbor_radius(val, ens.spec.n))
        except UnboundStateError:
            msr.append(float("nan"))
            pmsd.append({})
            rd.append(float("nan"))
    halo = None
    if halo_core_msr is not None and len(msr) > 1 and np.isfinite(msr[1]):
        spec = ens.spec
        halo = halo_decompose(halo_core_msr, msr[1], spec.n - 1, spec.heavy_mass, spec.masses[-1])
    return ObservableReport(msr, pmsd, rd, halo, sorted(ens.flags))
