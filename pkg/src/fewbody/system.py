"""Physical system definition: masses, Gaussian pair potential, units and Jacobi frames.

Internal units fix hbar = 1. Callers normally also use heavy mass m = 1 and
range b = 1, in which case the characteristic energy hbar^2 / (2 mu b^2) with
mu = m/2 is exactly 1 and every energy is already in units of E_s. Potential
depths are often quoted instead as the reduced strength mu V0 b^2 / hbar^2,
see :func:`reduced_strength`.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

HBAR = 1.0


class WidthConvention(str, enum.Enum):
    """How the range ``b`` enters the Gaussian exponent."""

    EXP_R2_OVER_B2 = "EXP_R2_OVER_B2"  # V0 exp(-r^2 / b^2)
    EXP_R2_OVER_2B2 = "EXP_R2_OVER_2B2"  # V0 exp(-r^2 / (2 b^2))


@dataclass(frozen=True)
class PairPotential:
    """Gaussian pair potential ``v0 * exp(-r^2 / width^2)``.

    ``v0 < 0`` is attractive. ``width`` is ``b`` or ``sqrt(2) b`` depending on
    the convention.
    """

    v0: float
    b: float = 1.0
    width_convention: WidthConvention = WidthConvention.EXP_R2_OVER_B2

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"range b must be positive, got {self.b}")
        object.__setattr__(self, "width_convention", WidthConvention(self.width_convention))

    @property
    def width(self) -> float:
        if self.width_convention is WidthConvention.EXP_R2_OVER_2B2:
            return np.sqrt(2.0) * self.b
        return self.b

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.v0 * np.exp(-(r / self.width) ** 2)

    def with_v0(self, v0: float) -> PairPotential:
        return PairPotential(v0, self.b, self.width_convention)


@dataclass(frozen=True)
class UnitSystem:
    """Energy and length units used for reporting."""

    energy_unit: float
    length_unit: float
    reduced_mass: float


@dataclass(frozen=True)
class SystemSpec:
    """N particles: identical bosons of mass m plus at most one lighter particle.

    The distinguishable particle, when present, is always the last index.
    """

    masses: tuple[float, ...]
    potential: PairPotential
    light_index: int | None = None

    def __post_init__(self):
        masses = tuple(float(m) for m in self.masses)
        object.__setattr__(self, "masses", masses)
        if len(masses) < 2:
            raise ValueError("need at least two particles")
        if min(masses) <= 0:
            raise ValueError("masses must be positive")
        heavy = masses[0]
        odd = [i for i, m in enumerate(masses) if m != heavy]
        if len(odd) > 1:
            raise ValueError("at most one particle may differ in mass")
        if odd:
            if odd[0] != len(masses) - 1:
                raise ValueError("the distinguishable particle must be the last one")
            if masses[-1] > heavy:
                raise ValueError("mass ratio M/m must lie in (0, 1]")
            object.__setattr__(self, "light_index", len(masses) - 1)
        if self.light_index is not None and self.light_index != len(masses) - 1:
            raise ValueError("the distinguishable particle must be the last one")

    @classmethod
    def identical(cls, n: int, v0: float, b: float = 1.0, mass: float = 1.0,
                  width_convention=WidthConvention.EXP_R2_OVER_B2) -> SystemSpec:
        return cls((mass,) * n, PairPotential(v0, b, width_convention))

    @classmethod
    def with_light(cls, n: int, mass_ratio: float, v0: float, b: float = 1.0,
                   mass: float = 1.0,
                   width_convention=WidthConvention.EXP_R2_OVER_B2) -> SystemSpec:
        """``n - 1`` identical particles of mass ``mass`` plus one of mass ``mass_ratio * mass``."""
        if not 0 < mass_ratio <= 1:
            raise ValueError("mass ratio M/m must lie in (0, 1]")
        masses = (mass,) * (n - 1) + (mass * mass_ratio,)
        return cls(masses, PairPotential(v0, b, width_convention), light_index=n - 1)

    @property
    def n(self) -> int:
        return len(self.masses)

    @property
    def heavy_mass(self) -> float:
        return self.masses[0]

    @property
    def mass_ratio(self) -> float:
        return self.masses[-1] / self.masses[0]

    @property
    def has_light(self) -> bool:
        return self.light_index is not None

    def with_v0(self, v0: float) -> SystemSpec:
        return SystemSpec(self.masses, self.potential.with_v0(v0), self.light_index)

    def pairs(self) -> list[tuple[int, int]]:
        return list(itertools.combinations(range(self.n), 2))

    def pair_species(self) -> list[str]:
        """'HH' or 'HL' label for each pair in :meth:`pairs` order."""
        return ["HL" if self.light_index in p else "HH" for p in self.pairs()]

    def symmetry_group(self) -> list[tuple[int, ...]]:
        """Permutations of the identical particles.

        A flagged light particle with M = m is still treated as identical, so
        the unit mass ratio reproduces the identical-boson spectrum.
        """
        if self.light_index is None or self.mass_ratio == 1.0:
            movable = self.n
        else:
            movable = self.n - 1
        rest = tuple(range(movable, self.n))
        return [p + rest for p in itertools.permutations(range(movable))]

    def units(self) -> UnitSystem:
        mu = 0.5 * self.heavy_mass
        return UnitSystem(characteristic_energy(self), self.potential.b, mu)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "masses": list(self.masses),
            "v0": self.potential.v0,
            "b": self.potential.b,
            "width_convention": self.potential.width_convention.value,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> SystemSpec:
        masses = tuple(data["masses"])
        if len(masses) != data["n"]:
            raise ValueError("'n' does not match the number of masses")
        pot = PairPotential(data["v0"], data.get("b", 1.0),
                            data.get("width_convention", WidthConvention.EXP_R2_OVER_B2))
        light = len(masses) - 1 if masses[-1] != masses[0] else None
        return cls(masses, pot, light)

    @classmethod
    def from_json(cls, text: str) -> SystemSpec:
        return cls.from_dict(json.loads(text))


def characteristic_energy(spec: SystemSpec) -> float:
    """hbar^2 / (2 mu b^2) with mu the reduced mass of an identical pair."""
    mu = 0.5 * spec.heavy_mass
    return HBAR**2 / (2.0 * mu * spec.potential.b**2)


def reduced_strength(v0: float, b: float = 1.0, m: float = 1.0) -> float:
    """Dimensionless depth mu V0 b^2 / hbar^2 with mu = m/2, i.e. V0 / (2 E_s).

    Tabulated potential depths (for example the dimer threshold -1.353 and the
    N-body threshold depths) are quoted on this scale, while energies and
    radii are quoted in E_s and b with the exp(-r^2/b^2) width.
    """
    return 0.5 * m * v0 * b**2 / HBAR**2


def depth_from_reduced_strength(s: float, b: float = 1.0, m: float = 1.0) -> float:
    """Inverse of :func:`reduced_strength`."""
    return s * HBAR**2 / (0.5 * m * b**2)


@dataclass(frozen=True)
class JacobiFrame:
    """Mass-weighted Jacobi coordinates x = transform @ r.

    ``inverse_mass[k]`` is 1/mu_k for coordinate k so the relative kinetic
    energy is sum_k inverse_mass[k] * pi_k^2 / 2. ``pair_vectors[p]`` satisfies
    r_i - r_j = pair_vectors[p] @ x for ``pairs[p] = (i, j)``.
    """

    masses: tuple[float, ...]
    transform: np.ndarray
    inverse_mass: np.ndarray
    pair_vectors: np.ndarray
    pairs: list[tuple[int, int]] = field(default_factory=list)
    cm_row: np.ndarray = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.transform.shape[0]

    @cached_property
    def _full_inverse(self) -> np.ndarray:
        full = np.vstack([self.transform, self.cm_row])
        return np.linalg.inv(full)

    def to_jacobi(self, positions: np.ndarray) -> np.ndarray:
        """(..., n, 3) positions -> (..., n-1, 3) Jacobi vectors."""
        return np.einsum("kn,...nc->...kc", self.transform, positions)

    def permutation_matrix(self, perm) -> np.ndarray:
        """Matrix T with x(r permuted) = T @ x(r) for a mass-preserving permutation.

        ``perm[i]`` is the particle whose position moves into slot ``i``.
        """
        n = len(self.masses)
        pi = np.zeros((n, n))
        pi[np.arange(n), list(perm)] = 1.0
        return self.transform @ pi @ self._full_inverse[:, : self.dim]

    def kinetic_matrix(self) -> np.ndarray:
        return np.diag(self.inverse_mass)


def build_jacobi(spec: SystemSpec) -> JacobiFrame:
    """Sequential Jacobi construction; particle k+1 joins the centre of mass of 0..k.

    With the light particle stored last it is attached by the last coordinate.
    """
    masses = np.asarray(spec.masses)
    n = len(masses)
    transform = np.zeros((n - 1, n))
    inv_mass = np.zeros(n - 1)
    cum = np.cumsum(masses)
    for k in range(n - 1):
        transform[k, : k + 1] = -masses[: k + 1] / cum[k]
        transform[k, k + 1] = 1.0
        inv_mass[k] = 1.0 / masses[k + 1] + 1.0 / cum[k]
    cm_row = masses / cum[-1]
    full_inv = np.linalg.inv(np.vstack([transform, cm_row]))
    pairs = list(itertools.combinations(range(n), 2))
    w = np.array([full_inv[i, : n - 1] - full_inv[j, : n - 1] for i, j in pairs])
    frame = JacobiFrame(tuple(masses), transform, inv_mass, w, pairs, cm_row)
    return frame
