"""gaplab: spectral gaps of harmonic oscillator networks with boundary damping.

Builds the drift matrices of damped harmonic lattices, computes their
spectral gap by three independent routes (dense eigensolve, quadratic
pencil, low-rank friction-site reduction with contour root counting),
and drives the size-scaling studies for homogeneous, impurity, and
disordered networks.
"""

from .lattice import (FrictionSet, LatticeShape, SiteSet, boundary_sites,
                      build_shape, friction_preset)
from .operators import (NetworkSpec, OperatorBundle, build_generator,
                        build_schrodinger, matrix_sqrt_spd)
from .records import ScalingFit, SweepRecord, emit_csv, fit_scaling, parse_csv
from .scenarios import (DisorderSpec, LocalizationFit, SpacingReport,
                        identity_suite, localization_fit, min_level_spacing,
                        restricted_eigenvector_check, run_sweep,
                        scenario_disorder, scenario_homogeneous,
                        scenario_impurity)
from .spectra import (EigenSystem, SpectralGapResult,
                      analytic_eigenpairs_homogeneous, eig_symmetric,
                      friction_identity_check, spectral_gap_direct,
                      spectral_gap_pencil, transfer_matrix_bound)
from .wigner import (BallPolicy, RoucheBall, ThetaReport, WignerContext,
                     argument_principle_count, evaluate_R, find_gap_wigner,
                     gap_scan, scalar_fg, theta_norm, wigner_context)

__version__ = "0.1.0"

__all__ = [
    "BallPolicy", "DisorderSpec", "EigenSystem", "FrictionSet", "LatticeShape",
    "LocalizationFit", "NetworkSpec", "OperatorBundle", "RoucheBall",
    "ScalingFit", "SiteSet", "SpacingReport", "SpectralGapResult",
    "SweepRecord", "ThetaReport", "WignerContext",
    "analytic_eigenpairs_homogeneous", "argument_principle_count",
    "boundary_sites", "build_generator", "build_schrodinger", "build_shape",
    "eig_symmetric", "emit_csv", "evaluate_R", "find_gap_wigner",
    "friction_identity_check", "friction_preset", "fit_scaling", "gap_scan",
    "identity_suite", "localization_fit", "matrix_sqrt_spd",
    "min_level_spacing", "parse_csv", "restricted_eigenvector_check",
    "run_sweep", "scalar_fg", "scenario_disorder", "scenario_homogeneous",
    "scenario_impurity", "spectral_gap_direct", "spectral_gap_pencil",
    "theta_norm", "transfer_matrix_bound", "wigner_context",
]
