"""Boundary-control reconstruction of a damping perturbation in 1D.

The package simulates Neumann-to-Dirichlet measurements for the damped wave
equation on an interval, synthesizes exact boundary controls by time
reversal, evaluates the boundary identities that turn those measurements
into interior moments of the damping perturbation, and assembles the
truncated Fourier reconstruction together with its error metrics.
"""

from .control import ControlBundle, ControlReport, build_control, dalembert_field, \
    dalembert_field_dt, verify_control
from .core import (
    BoundaryTrace,
    ConfigurationError,
    FourierCoeffs,
    GridMismatchError,
    GridSpec,
    MediumSpec,
    UnsupportedRegimeError,
    bilinear_time_boundary_pairing,
    discrete_sobolev_norm,
    reflect_trace,
)
from .extension import (
    AnalyticProfile,
    Antiderivative,
    add_profiles,
    antiderivative,
    complex_exponential_profile,
    constant_profile,
    cosine_profile,
    extend,
    scale_profile,
    sine_profile,
    total_integral,
)
from .identity import (
    IdentityReport,
    PairData,
    StabilityReport,
    linearized_rhs,
    nonlinear_identity_residual,
    stability_bound_check,
    weighted_volume_pairing,
)
from .recon import (
    LINEARIZED,
    NONLINEAR_DIFFERENCE,
    ReconResult,
    ReconSettings,
    acquire_clean_pair_data,
    acquire_pair_data,
    add_noise,
    apply_measurement_noise,
    assemble_coefficients,
    fourier_targets,
    mode_wavenumber,
    projection_truth,
    reconstruct,
    reconstruct_from_data,
    synthesize,
)
from .solver import (
    LinearizedOutput,
    SolveOutput,
    linearized_nd_map,
    linearized_nd_map_many,
    nd_map,
    nd_map_many,
    solve,
    solve_many,
)

__version__ = "0.1.0"
