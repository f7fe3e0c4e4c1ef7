"""Few-boson bound states with Gaussian pair interactions.

Correlated Gaussian variational solver for N <= 8 bosons (optionally one
lighter particle), a radial two-body solver, structural observables,
closed-form schematic models and threshold / mass scans.
"""

from .errors import (
    DegenerateFitError, FewBodyError, LinearDependenceError, NoProgressError,
    NonConvergedError, NoSolutionError, RankDeficientError, SingularFormError,
    ThresholdNotFoundError, UnboundStateError,
)
from .observables import (
    HaloEstimate, ObservableReport, halo_compose, halo_decompose, mean_square_radius,
    nearest_neighbor_radius, pair_distance_by_species, report,
)
from .radial import (
    UNITARITY, RadialSolverConfig, TwoBodyResult, bound_energies, critical_constant,
    critical_strength, scattering_length, strength_for_scattering_length,
)
from .scan import (
    ChannelEnergy, MassScanRecord, PowerLawFit, ScalingResult, ScanRecord, ThresholdResult,
    find_threshold, fit_power_law, mass_scan, scaling_factor, sweep_strength,
)
from .schematic import FoldingModel, OscillatorModel, g_crit, g_crit_unitarity, halo_row
from .svm import BasisEnsemble, SvmConfig, grow_basis, refine_basis, solve_states
from .system import (
    PairPotential, SystemSpec, WidthConvention, build_jacobi, characteristic_energy,
    depth_from_reduced_strength, reduced_strength,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
