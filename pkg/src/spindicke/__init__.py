"""Generalized spin-1 Dicke model with quadratic Zeeman shift.

Linear stability landscapes of the undepleted-mode operator equations, moment
dynamics of the open system, nonlinear semiclassical dynamics (with and
without the cavity), and phase-map sweeps of the long-time behavior.
"""

__version__ = "0.1.0"

from .model import (DegenerateModelError, DerivedCouplings, ModelParams,
                    apply_symmetry_T, critical_kappa, derive_couplings,
                    dispersive_adiabatic_params)
from .moments import (MomentIntegrityError, MomentState, MomentTrajectory,
                      PopulationSeries, bec_population_analytic,
                      integrate_moments, moment_rhs, populations)
from .phasemap import (PhaseGrid, PhaseLabel, WindowError, WindowStats,
                       chaos_score, classify_phase, phase_sweep, window_stats)
from .semiclassical import (DEFAULT_SEED, AdiabaticState, FullState,
                            SemiclassicalTrajectory, SpinExpectation,
                            adiabatic_rhs, full_rhs, hamiltonian_energy,
                            integrate_semiclassical, spin_expectations,
                            total_population)
from .stability import (BoundarySet, EigenReport, EigensolverError,
                        LandscapeGrid, OpenDeterminantRoots, bec_eigenvalues,
                        bec_matrix, closed_boundaries, closed_determinant,
                        closed_eigenvalues_analytic, closed_matrix,
                        eigenvalues_numeric, landscape_sweep, open_determinant_roots,
                        open_matrix)

__all__ = [
    "__version__",
    "ModelParams", "DerivedCouplings", "DegenerateModelError",
    "derive_couplings", "apply_symmetry_T", "critical_kappa",
    "dispersive_adiabatic_params",
    "EigenReport", "BoundarySet", "OpenDeterminantRoots", "LandscapeGrid",
    "EigensolverError", "bec_matrix", "bec_eigenvalues", "closed_matrix",
    "closed_eigenvalues_analytic", "closed_determinant", "closed_boundaries",
    "open_matrix", "open_determinant_roots", "eigenvalues_numeric",
    "landscape_sweep",
    "MomentState", "MomentTrajectory", "PopulationSeries",
    "MomentIntegrityError", "moment_rhs", "integrate_moments", "populations",
    "bec_population_analytic",
    "DEFAULT_SEED", "AdiabaticState", "FullState", "SpinExpectation",
    "SemiclassicalTrajectory", "adiabatic_rhs", "full_rhs",
    "integrate_semiclassical", "total_population", "spin_expectations",
    "hamiltonian_energy",
    "PhaseLabel", "WindowStats", "PhaseGrid", "WindowError", "window_stats",
    "classify_phase", "phase_sweep", "chaos_score",
]
