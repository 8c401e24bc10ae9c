"""Downlink training phase: spatial-frequency analysis, codebook sizing,
received-signal simulation, MVU estimation, and interpolation models.

The reflected-angle channel is treated as a periodic spatial signal whose
Fourier-series bandwidth sets the number of sweep configurations needed for
reconstruction. The series coefficients have no closed form, so they are
integrated numerically (composite trapezoid over [0, pi/2]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .channel import (
    Codebook,
    RadioConstants,
    RisGeometry,
    fundamental_frequency,
)

DEFAULT_QUADRATURE_POINTS = 10_000

# interpolation kernels
SPLINE = "spline"
IDEAL_LOWPASS = "ideal_lowpass"
LINEAR = "linear"
KERNELS = (SPLINE, IDEAL_LOWPASS, LINEAR)


class AnalysisConvergenceError(RuntimeError):
    """Power target not reached within the coefficient cap."""

    def __init__(self, achieved_fraction: float, cap: int):
        self.achieved_fraction = achieved_fraction
        self.cap = cap
        super().__init__(
            f"coefficient cap {cap} reached at power fraction {achieved_fraction:.6f}"
        )


# ---------------------------------------------------------------------------
# Fourier-series analysis of the reflected-angle signal
# ---------------------------------------------------------------------------

class _SpectrumTable:
    """Shared quadrature table for the series coefficients.

    The per-coefficient integrals do not depend on the UE angle, so they are
    computed once as a (m_x, 2*i+1) matrix J and every UE angle reduces to a
    phase-vector product. J grows lazily in blocks of harmonics.
    """

    def __init__(self, geom: RisGeometry, radio: RadioConstants, n_quad: int):
        self.m_x = geom.m_x
        self.f0 = fundamental_frequency(geom, radio)
        self.period = 1.0 / self.f0
        self.theta = np.linspace(0.0, np.pi / 2, n_quad)
        w = np.full(n_quad, self.theta[1] - self.theta[0])
        w[0] *= 0.5
        w[-1] *= 0.5
        self.weights = w
        self.m1 = np.arange(1, self.m_x + 1)
        # U[m, q] = w_q * exp(-j 2 pi F0 (m+1) sin(theta_q))
        self.u = w * np.exp(-2j * np.pi * self.f0 * np.outer(self.m1, np.sin(self.theta)))
        self.i_max = 0
        self.j = np.zeros((self.m_x, 1), dtype=complex)  # placeholder until grown

    def _columns(self, indices: np.ndarray) -> np.ndarray:
        # chunked so the quadrature-by-harmonic basis never materializes
        # more than ~40 MB at a time
        out = np.empty((self.m_x, indices.size), dtype=complex)
        step = 256
        for s in range(0, indices.size, step):
            block = indices[s:s + step]
            v = np.exp(-2j * np.pi * self.f0 * np.outer(self.theta, block))
            out[:, s:s + block.size] = self.u @ v
        return out

    def grow(self, i_max: int) -> None:
        if i_max <= self.i_max and self.i_max > 0:
            return
        if self.i_max == 0:
            idx = np.arange(-i_max, i_max + 1)
            self.j = self._columns(idx)
        else:
            lo = self._columns(np.arange(-i_max, -self.i_max))
            hi = self._columns(np.arange(self.i_max + 1, i_max + 1))
            self.j = np.concatenate([lo, self.j, hi], axis=1)
        self.i_max = i_max

    def coefficients(self, theta_k: float, i_max: int) -> np.ndarray:
        """c(i) for i = -i_max..i_max as a flat array."""
        self.grow(i_max)
        phases = np.exp(2j * np.pi * self.f0 * self.m1 * np.sin(theta_k))
        full = (phases @ self.j) / self.period
        mid = self.i_max
        return full[mid - i_max: mid + i_max + 1]

    def signal(self, theta_k: float) -> np.ndarray:
        return np.exp(
            2j * np.pi * self.f0 * np.outer(self.m1, np.sin(theta_k) - np.sin(self.theta))
        ).sum(axis=0)

    def average_power(self, theta_k: float) -> float:
        a = self.signal(theta_k)
        return float(np.sum(self.weights * np.abs(a) ** 2) / self.period)


_TABLE_CACHE: dict = {}


def _table(geom: RisGeometry, radio: RadioConstants, n_quad: int) -> _SpectrumTable:
    key = (geom.m_x, round(fundamental_frequency(geom, radio), 12), n_quad)
    table = _TABLE_CACHE.get(key)
    if table is None:
        if len(_TABLE_CACHE) > 8:
            _TABLE_CACHE.clear()
        table = _SpectrumTable(geom, radio, n_quad)
        _TABLE_CACHE[key] = table
    return table


@dataclass(frozen=True)
class SpatialSignalAnalysis:
    """Bandwidth analysis of one UE's reflected-angle signal."""

    theta_k: float
    epsilon: float
    fundamental_frequency: float
    fundamental_period: float
    taylor_fmax: float
    power: float
    bandwidth_index: int
    fmax: float                 # bandwidth_index * fundamental_frequency
    coeff_indices: np.ndarray
    coefficients: np.ndarray

    def coefficient(self, i: int) -> complex:
        mid = len(self.coefficients) // 2
        return complex(self.coefficients[mid + i])


def coefficient_cap(geom: RisGeometry, radio: RadioConstants) -> int:
    # 8x the Taylor band covers the chirp content; the floor absorbs the
    # window-discontinuity tails that dominate at small epsilon
    f0 = fundamental_frequency(geom, radio)
    return max(int(math.ceil(8 * math.pi * geom.m_x * f0)), 4096)


def analyze_signal(geom: RisGeometry, radio: RadioConstants, theta_k: float,
                   epsilon: float,
                   quadrature_points: int = DEFAULT_QUADRATURE_POINTS) -> SpatialSignalAnalysis:
    """Fourier-series bandwidth of the reflected-angle signal at one UE angle.

    Finds the smallest symmetric harmonic interval holding a (1 - epsilon)
    fraction of the numerically integrated average power. Raises
    AnalysisConvergenceError if the cap is hit first.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if quadrature_points < 1000:
        raise ValueError("quadrature resolution below 1000 points")
    table = _table(geom, radio, quadrature_points)
    f0 = table.f0
    power = table.average_power(theta_k)
    target = (1.0 - epsilon) * power
    cap = coefficient_cap(geom, radio)

    i_max = min(512, cap)
    while True:
        c = table.coefficients(theta_k, i_max)
        p2 = np.abs(c) ** 2
        mid = i_max
        cum = np.concatenate(
            ([p2[mid]], p2[mid] + np.cumsum(p2[mid + 1:] + p2[mid - 1::-1]))
        )
        hit = np.nonzero(cum >= target)[0]
        if hit.size:
            index = int(hit[0])
            break
        if i_max >= cap:
            raise AnalysisConvergenceError(float(cum[-1] / power), cap)
        i_max = min(2 * i_max, cap)

    return SpatialSignalAnalysis(
        theta_k=float(theta_k),
        epsilon=float(epsilon),
        fundamental_frequency=f0,
        fundamental_period=table.period,
        taylor_fmax=geom.m_x * f0,
        power=power,
        bandwidth_index=index,
        fmax=index * f0,
        coeff_indices=np.arange(-i_max, i_max + 1),
        coefficients=c,
    )


def training_lower_bound(f_max: float) -> int:
    """Sample count needed over [0, pi/2]: ceil(pi * f_max)."""
    if f_max <= 0:
        raise ValueError("f_max must be positive")
    return int(math.ceil(math.pi * f_max))


@dataclass(frozen=True)
class CodebookStatistics:
    """Candidate training-codebook sizes from per-angle bandwidths."""

    epsilon: float
    median_fmax: float
    max_fmax: float
    taylor_fmax: float
    median_bound: int
    max_bound: int
    taylor_bound: int


def codebook_statistics(geom: RisGeometry, radio: RadioConstants, epsilon: float,
                        theta_grid=None,
                        quadrature_points: int = DEFAULT_QUADRATURE_POINTS) -> CodebookStatistics:
    """Median/maximum/Taylor sizing statistics over a grid of UE angles."""
    if theta_grid is None:
        theta_grid = np.linspace(0.0, np.pi / 2, 256)
    theta_grid = np.asarray(theta_grid)
    if theta_grid.size < 64:
        raise ValueError("angle grid must span at least 64 points")
    fmax = np.array([
        analyze_signal(geom, radio, tk, epsilon, quadrature_points).fmax
        for tk in theta_grid
    ])
    f_med = float(np.median(fmax))
    f_max = float(np.max(fmax))
    f_taylor = geom.m_x * fundamental_frequency(geom, radio)
    return CodebookStatistics(
        epsilon=float(epsilon),
        median_fmax=f_med,
        max_fmax=f_max,
        taylor_fmax=f_taylor,
        median_bound=training_lower_bound(f_med),
        max_bound=training_lower_bound(f_max),
        taylor_bound=training_lower_bound(f_taylor),
    )


# ---------------------------------------------------------------------------
# Training codebook and received-signal processing
# ---------------------------------------------------------------------------

def training_sample_period(n_tr: int) -> float:
    return (np.pi / 2) / n_tr


def design_training_codebook(geom: RisGeometry, radio: RadioConstants,
                             theta_a: float, n_tr: int) -> Codebook:
    """Uniform sweep grid theta[n] = n * T_samp on the half-open [0, pi/2)."""
    if n_tr < 1:
        raise ValueError("n_tr must be at least 1")
    t_samp = training_sample_period(n_tr)
    angles = np.arange(n_tr) * t_samp
    return Codebook.for_angles("training", geom, radio, theta_a, angles)


def min_training_symbols(snr_dl: float, delta_tol: float) -> int:
    """Pilot symbols per slot meeting the estimation tolerance."""
    if snr_dl <= 0 or delta_tol <= 0:
        raise ValueError("snr and tolerance must be positive")
    return max(1, int(math.ceil(1.0 / (snr_dl * delta_tol))))


@dataclass(frozen=True)
class TrainingDesign:
    """Training sweep parameters shared by every UE in a frame."""

    codebook: Codebook
    sample_period: float
    symbols_per_slot: int
    estimation_tolerance: float  # target variance of each estimate
    pilot: np.ndarray            # unit energy per symbol

    @property
    def n_tr(self) -> int:
        return len(self.codebook)


def make_training_design(geom: RisGeometry, radio: RadioConstants, theta_a: float,
                         n_tr: int, snr_dl: float, delta_tol: float) -> TrainingDesign:
    codebook = design_training_codebook(geom, radio, theta_a, n_tr)
    l_tr = min_training_symbols(snr_dl, delta_tol) if delta_tol > 0 else 1
    return TrainingDesign(
        codebook=codebook,
        sample_period=training_sample_period(n_tr),
        symbols_per_slot=l_tr,
        estimation_tolerance=float(delta_tol),
        pilot=np.ones(l_tr),
    )


def simulate_training_rx(rng: np.random.Generator, zeta_true, design: TrainingDesign,
                         rho_a: float, sigma2: float) -> np.ndarray:
    """Received pilot block(s) w = sqrt(rho_a) * zeta * pilot + noise.

    `zeta_true` may be a scalar or any array; one extra trailing axis of
    length L_tr is appended. Noise is circularly-symmetric complex Gaussian
    with variance sigma2 per sample, independent across slots.
    """
    zeta = np.asarray(zeta_true, dtype=complex)
    shape = zeta.shape + (design.symbols_per_slot,)
    noise = np.sqrt(sigma2 / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return np.sqrt(rho_a) * zeta[..., None] * design.pilot + noise


def mvu_estimate(samples: np.ndarray, design: TrainingDesign, rho_a: float):
    """Minimum-variance unbiased estimate of the per-slot channel."""
    samples = np.asarray(samples)
    if samples.shape[-1] != design.symbols_per_slot:
        raise ValueError("sample length does not match the training design")
    l_tr = design.symbols_per_slot
    est = samples @ design.pilot / (l_tr * np.sqrt(rho_a))
    if est.ndim == 0:
        return complex(est)
    return est


# ---------------------------------------------------------------------------
# Reconstruction
# ---------------------------------------------------------------------------

class ReconstructionModel:
    """Interpolated map from reflecting angle to predicted channel response.

    `samples` may carry leading batch axes; `query` returns matching
    batched predictions. Spline and linear kernels interpolate exactly at
    the sample angles.
    """

    def __init__(self, samples: np.ndarray, sample_period: float, kernel: str = SPLINE):
        samples = np.asarray(samples, dtype=complex)
        n = samples.shape[-1]
        if kernel not in KERNELS:
            raise ValueError(f"unknown kernel {kernel!r}")
        if kernel in (SPLINE, LINEAR) and n < 2:
            raise ValueError(f"{kernel} kernel needs at least 2 samples")
        if n < 1:
            raise ValueError("no samples")
        self.kernel = kernel
        self.samples = samples
        self.sample_period = float(sample_period)
        self.angles = np.arange(n) * self.sample_period
        self._spline = (
            CubicSpline(self.angles, samples, axis=-1) if kernel == SPLINE else None
        )

    @property
    def n_samples(self) -> int:
        return self.samples.shape[-1]

    def query(self, thetas) -> np.ndarray:
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        if self.kernel == SPLINE:
            return self._spline(thetas)
        if self.kernel == LINEAR:
            pos = np.clip(thetas / self.sample_period, 0.0, self.n_samples - 1)
            lo = np.floor(pos).astype(int)
            hi = np.minimum(lo + 1, self.n_samples - 1)
            frac = pos - lo
            return self.samples[..., lo] * (1 - frac) + self.samples[..., hi] * frac
        # Whittaker kernel sin(pi x / T) / (pi x / T)
        k = np.sinc((thetas[:, None] - self.angles[None, :]) / self.sample_period)
        return self.samples @ k.T


def reconstruct(estimates, sample_period: float, kernel: str = SPLINE) -> ReconstructionModel:
    """Build the queryable interpolation model over [0, pi/2]."""
    return ReconstructionModel(estimates, sample_period, kernel)


def interpolation_weights(n_samples: int, sample_period: float, kernel: str,
                          thetas) -> np.ndarray:
    """Effective kernel weights Lambda(theta - n T) as an (n_samples, G) matrix.

    Obtained by pushing unit samples through the reconstruction, so it is
    exact for every kernel including the spline's cardinal functions.
    """
    eye = np.eye(n_samples)
    model = ReconstructionModel(eye, sample_period, kernel)
    return np.real(model.query(thetas))


def normalized_expected_se(predicted, truth) -> float:
    """Mean squared reconstruction error normalized by mean |truth|^2.

    Both inputs are aligned arrays; all axes are ensemble/grid axes.
    """
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    denom = float(np.mean(np.abs(truth) ** 2))
    if denom == 0.0:
        raise ValueError("true channel has zero power")
    return float(np.mean(np.abs(predicted - truth) ** 2) / denom)
