"""Closed-form estimates: an N-body oscillator model and a folded Gaussian halo potential.

The oscillator model replaces all pair interactions by springs plus a constant
pair shift V_N; it gives threshold strengths and how the (N+1)-body states sit
at the N-body threshold. The folding model smears the pair Gaussian over a
Gaussian core density, which yields a single Gaussian between the core and one
extra particle, characterized by the dimensionless strength G_crit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import radial
from .radial import RadialSolverConfig
from .system import HBAR, PairPotential

PRINTED = "printed"
SINGLE_QUANTUM = "single_quantum"


# ------------------------------------------------------------------ oscillator

@dataclass(frozen=True)
class OscillatorModel:
    """N particles in a common oscillator with pair shift V_N."""

    omega: float
    V_N: float
    N: int

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if self.N < 2:
            raise ValueError("need at least two particles")

    def energy(self, n: int = 0, mode: str = PRINTED) -> float:
        return oscillator_energy(self.N, n, self.omega, self.V_N, mode)

    def msr(self, n: int = 0, m: float = 1.0) -> float:
        return oscillator_msr(self.N, n, self.omega, m)


def oscillator_energy(N: int, n: int, omega: float, V_N: float, mode: str = PRINTED) -> float:
    """Energy of the n-th state (n = 0, 1) of the N-body oscillator model.

    ``printed``: hbar w sqrt(N/2) (n + 3/2) N - N(N-1) V_N / 2, i.e. every
    particle carries the excitation. ``single_quantum``: one extra quantum
    hbar w sqrt(N/2) on top of the ground state, which is the form behind the
    -1/(2N), +1/(6N) threshold asymptotics.
    """
    if n not in (0, 1):
        raise ValueError("only n = 0 and n = 1 are modelled")
    w = HBAR * omega * math.sqrt(N / 2.0)
    if mode == PRINTED:
        kin = w * (n + 1.5) * N
    elif mode == SINGLE_QUANTUM:
        kin = w * (1.5 * N + n)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return kin - 0.5 * N * (N - 1) * V_N


def oscillator_msr(N: int, n: int, omega: float, m: float = 1.0) -> float:
    """<(r_i - R_c)^2> = (hbar / m w) sqrt(2/N) (n + 3/2)."""
    return HBAR / (m * omega) * math.sqrt(2.0 / N) * (n + 1.5)


def oscillator_threshold_strength(N: int, omega: float) -> float:
    """Pair shift V_N at which the N-body ground state reaches zero energy."""
    if N < 2:
        raise ValueError("need at least two particles")
    return HBAR * omega * 3.0 / (N - 1) * math.sqrt(N / 2.0)


def threshold_brackets(N: int, mode: str = SINGLE_QUANTUM) -> tuple[float, float]:
    """(N+1)-body energies at the N-body threshold strength, in units of
    hbar w (3(N+1)/2) sqrt(N/2).

    For large N these behave as -1/(2N) and, in ``single_quantum`` mode,
    +1/(6N): the excited state is slightly unbound.
    """
    v = oscillator_threshold_strength(N, 1.0)
    unit = 1.5 * (N + 1) * math.sqrt(N / 2.0)
    return (oscillator_energy(N + 1, 0, 1.0, v, mode) / unit,
            oscillator_energy(N + 1, 1, 1.0, v, mode) / unit)


# --------------------------------------------------------------------- folding

@dataclass(frozen=True)
class FoldingModel:
    """Gaussian core density of N particles with mean-square radius R_N^2."""

    N: int
    V0: float
    b: float
    R2: float

    def __post_init__(self):
        if self.N < 1 or not self.b > 0 or self.R2 < 0:
            raise ValueError("invalid folding model parameters")

    @property
    def r_G(self) -> float:
        return math.sqrt(2.0 * self.R2 / 3.0)

    @property
    def rho0(self) -> float:
        if self.R2 == 0:
            return math.inf
        return self.N / (math.pi * self.r_G**2) ** 1.5

    @property
    def width(self) -> float:
        """Range of the folded Gaussian, sqrt(b^2 + r_G^2)."""
        return math.sqrt(self.b**2 + self.r_G**2)

    @property
    def depth(self) -> float:
        return self.N * self.V0 * self.b**3 / self.width**3

    def density(self, r):
        r = np.asarray(r, dtype=float)
        return self.rho0 * np.exp(-(r / self.r_G) ** 2)

    def potential(self) -> PairPotential:
        return PairPotential(self.depth, self.width)


def folded_potential(model: FoldingModel, r):
    """N V0 b^3 / (b^2 + r_G^2)^(3/2) exp(-r^2 / (b^2 + r_G^2))."""
    return model.potential()(r)


def halo_reduced_mass(n_core: int, m: float = 1.0, M: float | None = None) -> float:
    M = m if M is None else M
    return m * n_core * M / (n_core * m + M)


def g_crit(N: int, V0: float, b: float, R2: float, m: float = 1.0,
           M: float | None = None) -> float:
    """mu_N N |V0| b^3 / (hbar^2 (b^2 + 2 R_N^2 / 3)^(1/2)).

    Core of N particles of mass m, extra particle of mass M (default m). A
    value near :func:`critical_constant` means an infinite core-particle
    scattering length.
    """
    mu = halo_reduced_mass(N, m, M)
    return mu * N * abs(V0) * b**3 / (HBAR**2 * math.sqrt(b**2 + 2.0 * R2 / 3.0))


def g_crit_unitarity(N: int, mass_ratio: float, R2_core: float, b: float = 1.0,
                     constant: float | None = None, core_factor: bool = True) -> float:
    """G_crit for N particles in total (N-1 identical + one of mass M = ratio m)
    when the heavy-light pair is held at unitarity.

    Eliminating |V0| through m M |V0| b^2 / (hbar^2 (M+m)) = constant gives
    constant (N-1) (1 + M/m) / ((1 + M/(m(N-1))) (1 + 2 R^2/(3 b^2))^(1/2)).
    ``core_factor=False`` drops the (N-1) from the core sum, which is needed to
    compare with values tabulated without it.
    """
    if constant is None:
        constant = critical_constant()
    k = N - 1
    x = mass_ratio
    val = constant * (1.0 + x) / ((1.0 + x / k) * math.sqrt(1.0 + 2.0 * R2_core / (3.0 * b**2)))
    return val * k if core_factor else val


def critical_constant(cfg: RadialSolverConfig | None = None) -> float:
    """Critical mu |V0| b^2 / hbar^2 for exp(-r^2/b^2), from the radial solver (~1.342)."""
    return radial.critical_constant(cfg)


def halo_scattering_length(g: float, N: int, b: float, R2: float, m: float = 1.0,
                           M: float | None = None,
                           cfg: RadialSolverConfig | None = None) -> float:
    """Core-particle scattering length (in units of b) of the folded Gaussian with strength g.

    The strength is mapped to a Gaussian of range B = (b^2 + 2R^2/3)^(1/2) and
    depth g hbar^2 / (mu_N B^2), which is then solved radially.
    """
    mu = halo_reduced_mass(N, m, M)
    width = math.sqrt(b**2 + 2.0 * R2 / 3.0)
    pot = PairPotential(-g * HBAR**2 / (mu * width**2), width)
    return radial.scattering_length(pot, mu, cfg).scattering_length / b


@dataclass
class HaloRow:
    """One row of the core-plus-particle comparison, lengths in b and energies in E_s."""

    N: int
    v0_reduced: float
    r2_core: float
    r2_excited: float
    r2_halo: float
    b_halo: float
    g_crit: float
    a_halo: float
    b_direct: float | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def halo_row(N: int, v0_reduced: float, r2_core: float, r2_excited: float,
             b_direct: float | None = None, m: float = 1.0, M: float | None = None,
             cfg: RadialSolverConfig | None = None) -> HaloRow:
    """Halo radius, halo binding, G_crit and a_halo from threshold data of one N.

    ``v0_reduced`` is the N-body threshold depth as a reduced strength
    mu V0 b^2 / hbar^2, the scale on which G_crit compares with ~1.34.
    """
    from .observables import halo_decompose

    halo = halo_decompose(r2_core, r2_excited, N, m, M)
    g = g_crit(N, v0_reduced, 1.0, r2_core, m, M)
    a = halo_scattering_length(g, N, 1.0, r2_core, m, M, cfg)
    return HaloRow(N, v0_reduced, r2_core, r2_excited, halo.r2_halo, halo.b_halo, g, a, b_direct)
