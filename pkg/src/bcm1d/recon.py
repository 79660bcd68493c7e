"""Per-mode boundary-control reconstruction of the damping perturbation.

For each mode index k the pipeline builds the sine/cosine control pair whose
background snapshots are sin(kappa x) and cos(kappa x) with kappa = k pi / L
(L the domain length) and free parameter lam = i kappa, measures the
linearized responses of the derivative controls, and evaluates the boundary
identity for the pairs (f, h), (f, f) and (h, h).  Products of the two
snapshots collapse, via the double-angle relations, to the cosine and sine
moments of the perturbation at spatial frequency 2 kappa:

    a_k = S_hh - S_ff   (cosine moment),
    b_k = 2 S_fh        (sine moment),
    a_0 = S_hh + S_ff at k = 1   (total integral).

The synthesized perturbation is the truncated series with these moments.
Measurements may come from the linearized solver or, to exercise the full
nonlinear route, from differences of nonlinear measurements at perturbed and
background damping; in the latter case the moments are divided by the
linearization scale eps, since the differences approximate the linearized
response to eps * sigma_dot.

Gaussian measurement noise is relative: each measured trace receives i.i.d.
zero-mean samples with standard deviation eps_noise times the trace's RMS
(real and imaginary parts independently, each with 1/sqrt(2) of the
variance).  Noise streams are derived per (mode, trace role), so results
are reproducible and independent of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .control import build_control
from .core import (
    BoundaryTrace,
    FourierCoeffs,
    GridSpec,
    MediumSpec,
    UnsupportedRegimeError,
)
from .extension import AnalyticProfile, cosine_profile, sine_profile
from .identity import PairData, linearized_rhs
from .solver import linearized_nd_map_many, nd_map_many

_REL_L2_FLOOR = 1e-12

LINEARIZED = "linearized"
NONLINEAR_DIFFERENCE = "nonlinear_difference"

# substream labels for the measured traces of one mode
_NOISE_ROLES = {"f_t": 0, "f_tt": 1, "h_t": 2, "h_tt": 3, "f": 4, "h": 5}


@dataclass(frozen=True)
class ReconSettings:
    """Reconstruction configuration (defaults follow the reference setup)."""

    grid: GridSpec
    N: int = 10
    noise_eps: float = 0.0
    seed: int = 0
    data_mode: str = LINEARIZED
    eps_linearization: float = 1e-3
    d: int = 2

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.noise_eps < 0:
            raise ValueError(f"noise_eps must be >= 0, got {self.noise_eps}")
        if self.data_mode not in (LINEARIZED, NONLINEAR_DIFFERENCE):
            raise ValueError(f"unknown data_mode {self.data_mode!r}")
        if self.data_mode == NONLINEAR_DIFFERENCE and self.eps_linearization <= 0:
            raise ValueError("eps_linearization must be positive for "
                             "nonlinear-difference data")


@dataclass(frozen=True)
class ReconResult:
    coeffs: FourierCoeffs
    sigma_recon: np.ndarray  # complex samples on the spatial nodes
    truth: np.ndarray        # real samples the error metrics refer to
    rel_l2: float
    linf: float


class TargetSet(NamedTuple):
    pT_f: AnalyticProfile
    pT_h: AnalyticProfile
    lam: complex


def mode_wavenumber(k: int, grid: GridSpec) -> float:
    return k * np.pi / (grid.b - grid.a)


def fourier_targets(k: int, grid: GridSpec) -> TargetSet:
    """Sine/cosine velocity targets and free parameter for mode ``k``."""
    if k < 1:
        raise ValueError(f"mode index must be >= 1, got {k}")
    kappa = mode_wavenumber(k, grid)
    return TargetSet(sine_profile(kappa), cosine_profile(kappa), 1j * kappa)


def add_noise(
    trace: BoundaryTrace, eps: float, rng: np.random.Generator
) -> BoundaryTrace:
    """Relative Gaussian noise: per-sample std is eps * RMS(trace).

    The RMS is taken over both endpoint series jointly; real and imaginary
    parts are perturbed independently with std eps * RMS / sqrt(2).  A zero
    trace (RMS = 0) and eps = 0 are returned unchanged.
    """
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    n = len(trace)
    rms = np.sqrt(
        (np.sum(np.abs(trace.values_a) ** 2) + np.sum(np.abs(trace.values_b) ** 2))
        / (2 * n)
    )
    if eps == 0.0 or rms == 0.0:
        return trace
    std = eps * rms / np.sqrt(2.0)
    noise_a = std * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    noise_b = std * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return BoundaryTrace(trace.values_a + noise_a, trace.values_b + noise_b,
                         trace.dt)


def _role_rng(seed: int, k: int, role: str) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(k, _NOISE_ROLES[role]))
    return np.random.default_rng(ss)


def apply_measurement_noise(
    pd: PairData, k: int, eps: float, seed: int
) -> PairData:
    """Noisy copy of ``pd``; each measured trace gets its (k, role) substream."""
    if eps == 0.0:
        return pd

    def noisy(trace, role):
        if trace is None:
            return None
        return add_noise(trace, eps, _role_rng(seed, k, role))

    return replace(
        pd,
        meas_f_t=noisy(pd.meas_f_t, "f_t"),
        meas_f_tt=noisy(pd.meas_f_tt, "f_tt"),
        meas_h_t=noisy(pd.meas_h_t, "h_t"),
        meas_h_tt=noisy(pd.meas_h_tt, "h_tt"),
        meas_f=noisy(pd.meas_f, "f"),
        meas_h=noisy(pd.meas_h, "h"),
    )


def _full_sigma(medium: MediumSpec, eps: float) -> np.ndarray:
    sigma = medium.sigma0 + eps * medium.sigma_dot
    if medium.sigma_ddot is not None:
        sigma = sigma + eps**2 * medium.sigma_ddot
    return sigma


def acquire_clean_pair_data(
    k: int,
    settings: ReconSettings,
    medium: MediumSpec,
    with_operator_traces: bool = False,
) -> PairData:
    """Controls, measurements and target snapshots for mode ``k``, no noise.

    In linearized mode the measured traces are linearized responses to the
    analytic derivative controls.  In nonlinear-difference mode they are
    differences of nonlinear measurements at damping sigma0 + eps sigma_dot
    (+ eps^2 sigma_ddot) and at sigma0.  ``with_operator_traces`` also
    measures the responses to the controls themselves, needed by the
    stability check.
    """
    grid = settings.grid
    pT_f, pT_h, lam = fourier_targets(k, grid)
    bf = build_control(pT_f, lam, grid, settings.d)
    bh = build_control(pT_h, lam, grid, settings.d)

    driven = [bf.f_t, bf.f_tt, bh.f_t, bh.f_tt]
    if with_operator_traces:
        driven += [bf.f, bh.f]

    if settings.data_mode == LINEARIZED:
        meas = [out.trace for out in linearized_nd_map_many(grid, medium, driven)]
    else:
        eps = settings.eps_linearization
        full = nd_map_many(grid, medium.rho0, _full_sigma(medium, eps), driven)
        base = nd_map_many(grid, medium.rho0, medium.sigma0, driven)
        meas = [m_full - m_base for m_full, m_base in zip(full, base)]

    xs = grid.xs
    return PairData(
        lam=lam,
        grid=grid,
        f=bf.f, f_t=bf.f_t, f_tt=bf.f_tt,
        h=bh.f, h_t=bh.f_t, h_tt=bh.f_tt,
        meas_f_t=meas[0], meas_f_tt=meas[1],
        meas_h_t=meas[2], meas_h_tt=meas[3],
        meas_f=meas[4] if with_operator_traces else None,
        meas_h=meas[5] if with_operator_traces else None,
        snap_f=np.asarray(pT_f.value(xs), dtype=complex),
        snap_h=np.asarray(pT_h.value(xs), dtype=complex),
    )


def acquire_pair_data(
    k: int,
    settings: ReconSettings,
    medium: MediumSpec,
    with_operator_traces: bool = False,
) -> PairData:
    """Mode-``k`` data with the configured measurement noise applied."""
    pd = acquire_clean_pair_data(k, settings, medium, with_operator_traces)
    return apply_measurement_noise(pd, k, settings.noise_eps, settings.seed)


def assemble_coefficients(
    S_ff: Sequence[complex],
    S_hh: Sequence[complex],
    S_fh: Sequence[complex],
    N: int,
    data_scale: float = 1.0,
) -> FourierCoeffs:
    """Turn per-mode identity values into cosine/sine moments.

    ``S_ff[k-1]``, ``S_hh[k-1]``, ``S_fh[k-1]`` are the identity values of
    the pairs (f_k, f_k), (h_k, h_k), (f_k, h_k).  ``data_scale`` divides
    every moment; it is the linearization scale when the data came from
    nonlinear differences, else 1.
    """
    if not (len(S_ff) == len(S_hh) == len(S_fh) == N):
        raise ValueError(f"need {N} identity values per pair kind")
    S_ff = np.asarray(S_ff, dtype=complex)
    S_hh = np.asarray(S_hh, dtype=complex)
    S_fh = np.asarray(S_fh, dtype=complex)
    return FourierCoeffs(
        N=N,
        a0=complex((S_hh[0] + S_ff[0]) / data_scale),
        a=(S_hh - S_ff) / data_scale,
        b=2.0 * S_fh / data_scale,
    )


def synthesize(coeffs: FourierCoeffs, grid: GridSpec) -> np.ndarray:
    """Sample the truncated series on the spatial grid.

    sigma(x) = a0/L + (2/L) sum_k [ a_k cos(2 kappa_k x) + b_k sin(2 kappa_k x) ]
    with L = b - a; on a length-2 domain this is the familiar
    a0/2 + sum a_k cos(k pi x) + b_k sin(k pi x).
    """
    xs = grid.xs
    L = grid.b - grid.a
    result = np.full(grid.nx, coeffs.a0 / L, dtype=complex)
    for k in range(1, coeffs.N + 1):
        w = 2.0 * mode_wavenumber(k, grid)
        result += (2.0 / L) * (coeffs.a[k - 1] * np.cos(w * xs)
                               + coeffs.b[k - 1] * np.sin(w * xs))
    return result


def projection_truth(N: int, grid: GridSpec) -> np.ndarray:
    """Truncated series of the reference piecewise perturbation on [-1, 1].

    The piecewise levels 2, 3/2, 1 with breakpoints -1/2 and 1/3 have the
    closed-form cosine/sine moments

        c_k = [sin(k pi/3) - sin(k pi/2)] / (2 k pi),
        d_k = -[cos(k pi/3) + cos(k pi/2) - 2 cos(k pi)] / (2 k pi),

    around the mean 35/24.  Only the N-term truncation is recoverable with
    an N-mode basis, so errors are reported against it.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not (np.isclose(grid.a, -1.0) and np.isclose(grid.b, 1.0)):
        raise UnsupportedRegimeError(
            "the piecewise reference perturbation lives on [-1, 1]"
        )
    xs = grid.xs
    out = np.full(grid.nx, 35.0 / 24.0)
    for k in range(1, N + 1):
        c_k = (np.sin(k * np.pi / 3) - np.sin(k * np.pi / 2)) / (2 * k * np.pi)
        d_k = -(np.cos(k * np.pi / 3) + np.cos(k * np.pi / 2)
                - 2 * np.cos(k * np.pi)) / (2 * k * np.pi)
        out += c_k * np.cos(k * np.pi * xs) + d_k * np.sin(k * np.pi * xs)
    return out


def _error_metrics(sigma_recon, truth, grid):
    diff = sigma_recon.real - truth
    num = np.sqrt(np.trapezoid(diff**2, dx=grid.dx))
    den = np.sqrt(np.trapezoid(truth**2, dx=grid.dx))
    rel_l2 = float(num / max(den, _REL_L2_FLOOR))
    return rel_l2, float(np.max(np.abs(diff)))


def reconstruct_from_data(
    pair_data: Sequence[PairData], settings: ReconSettings, truth: np.ndarray
) -> ReconResult:
    """Identity evaluation, coefficient assembly and synthesis for given data."""
    S_ff, S_hh, S_fh = [], [], []
    for pd in pair_data:
        S_fh.append(linearized_rhs(pd))
        S_ff.append(linearized_rhs(pd.pair_ff()))
        S_hh.append(linearized_rhs(pd.pair_hh()))
    scale = (settings.eps_linearization
             if settings.data_mode == NONLINEAR_DIFFERENCE else 1.0)
    coeffs = assemble_coefficients(S_ff, S_hh, S_fh, settings.N, scale)
    sigma_recon = synthesize(coeffs, settings.grid)
    truth = np.asarray(truth, dtype=float)
    rel_l2, linf = _error_metrics(sigma_recon, truth, settings.grid)
    return ReconResult(coeffs=coeffs, sigma_recon=sigma_recon, truth=truth,
                       rel_l2=rel_l2, linf=linf)


def reconstruct(
    settings: ReconSettings, medium: MediumSpec, truth: np.ndarray
) -> ReconResult:
    """Full pipeline: controls -> data -> identity values -> series.

    Deterministic for a fixed seed.  The medium must be the free background
    (rho0 = 1, sigma0 = 0), the regime with exact closed-form controls.
    """
    if medium.rho0 != 1.0 or medium.sigma0 != 0.0:
        raise UnsupportedRegimeError(
            "reconstruction requires rho0 = 1 and sigma0 = 0; got "
            f"rho0 = {medium.rho0}, sigma0 = {medium.sigma0}"
        )
    data = [
        acquire_pair_data(k, settings, medium)
        for k in range(1, settings.N + 1)
    ]
    return reconstruct_from_data(data, settings, truth)
