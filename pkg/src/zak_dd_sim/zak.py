"""Discrete and sampled Zak transforms.

The discrete pair (``dzt``/``idzt``) maps a length-MN vector to an M x N delay-Doppler matrix
with the delay index as the fast axis. The sampled transforms approximate the continuous Zak
transform on the lattice ``tau = i * dt``, ``nu = j / (N_ext * T)``.
"""

from typing import Callable, Optional, Union

import numpy as np
from scipy import fft, linalg

from .errors import CoverageError, DimensionError, QuantizationError
from .grid import DDFrame, DDGrid, DDSampledSurface, TimeSignal, lattice_index

Spectrum = Callable[[np.ndarray], np.ndarray]


def dzt_array(x: np.ndarray, M: int, N: int) -> np.ndarray:
    """DZT of one or more stacked vectors.

    Args:
        x: Array of shape (M*N, ...) with trailing batch axes.
        M: Delay bins.
        N: Doppler bins.

    Returns:
        Array of shape (M, N, ...).
    """
    rest = x.shape[1:]
    blocks = np.swapaxes(x.reshape((N, M) + rest), 0, 1)
    return fft.fft(blocks, axis=1, norm="ortho")


def idzt_array(X: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dzt_array` for arrays of shape (M, N, ...)."""
    M, N = X.shape[:2]
    rest = X.shape[2:]
    blocks = np.swapaxes(fft.ifft(X, axis=1, norm="ortho"), 0, 1)
    return blocks.reshape((M * N,) + rest)


def dzt(x: Union[np.ndarray, TimeSignal], grid: DDGrid) -> DDFrame:
    """Discrete Zak transform of a length-MN vector.

    ``out[l, k] = N**-0.5 * sum_n x[l + n*M] * exp(-2j*pi*n*k/N)``.

    Args:
        x: Vector (or signal whose samples are used) of length M*N.
        grid: Frame geometry.

    Returns:
        DD frame of shape (M, N).
    """
    samples = x.samples if isinstance(x, TimeSignal) else np.asarray(x, dtype=complex)
    if samples.shape != (grid.size,):
        raise DimensionError(
            f"DZT input length {samples.shape} does not match M*N={grid.size}"
        )
    return DDFrame(grid, dzt_array(samples, grid.M, grid.N))


def idzt(X: DDFrame) -> np.ndarray:
    """Inverse discrete Zak transform, exact inverse of :func:`dzt`."""
    return idzt_array(X.data)


def dzt_matrix(grid: DDGrid) -> np.ndarray:
    """Unitary matrix of the DZT acting on vectors, ``vec(dzt(x)) == dzt_matrix(grid) @ x``."""
    return np.kron(linalg.dft(grid.N, scale="sqrtn"), np.eye(grid.M))


def block_dft_matrix(grid: DDGrid) -> np.ndarray:
    """Unitary per-column DFT of an M x N frame (one length-M DFT per multicarrier symbol)."""
    return np.kron(np.eye(grid.N), linalg.dft(grid.M, scale="sqrtn"))


def fold_indices(
    l: np.ndarray, k: np.ndarray, M: int, N: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized index folding with delay period ``M`` and Doppler period ``N``."""
    q = np.floor_divide(l, M)
    l_wrapped = l - q * M
    k_wrapped = np.mod(k, N)
    phase = np.exp(2j * np.pi * q * k_wrapped / N)
    return l_wrapped, k_wrapped, phase


def quasi_periodic_wrap(l: int, k: int, grid: DDGrid) -> tuple[int, int, complex]:
    """Fold an arbitrary DD index pair into the fundamental frame.

    Each delay fold by +M multiplies by ``exp(2j*pi*k_wrapped/N)``; Doppler folds are free.

    Args:
        l: Delay index.
        k: Doppler index.
        grid: Frame geometry.

    Returns:
        Tuple of (l mod M, k mod N, accumulated phase).
    """
    lw, kw, phase = fold_indices(np.asarray(l), np.asarray(k), grid.M, grid.N)
    return int(lw), int(kw), complex(phase)


def _lattice_origin(x: TimeSignal, grid: DDGrid) -> int:
    if not np.isclose(x.sample_rate, grid.sample_rate, rtol=1e-9, atol=0.0):
        raise DimensionError(
            f"Signal rate {x.sample_rate} Hz does not match grid rate {grid.sample_rate} Hz"
        )
    i0 = lattice_index(x.t0, grid.sample_period)
    if i0 is None:
        raise QuantizationError(f"Signal origin {x.t0} s is not on the sample lattice")
    return i0


def _surface_axes(
    grid: DDGrid, delay_periods: int, doppler_periods: int
) -> tuple[np.ndarray, np.ndarray]:
    if delay_periods < 1 or doppler_periods < 1:
        raise DimensionError("delay_periods and doppler_periods must be >= 1")
    tau = np.arange(delay_periods * grid.samples_per_period) * grid.sample_period
    nu = np.arange(doppler_periods * grid.N_ext) / (grid.N_ext * grid.T)
    return tau, nu


def zak_time_sampled(
    x: TimeSignal,
    grid: DDGrid,
    replicas: Optional[int] = None,
    delay_periods: int = 1,
    doppler_periods: int = 1,
) -> DDSampledSurface:
    """Sampled time-domain Zak transform.

    ``Z(tau, nu) = sqrt(T) * sum_{|k| <= replicas} x(tau + k*T) * exp(-2j*pi*k*nu*T)``,
    with samples of ``x`` outside its support taken as zero.

    Args:
        x: Signal at the grid sample rate with origin on the sample lattice.
        grid: Frame geometry.
        replicas: Truncation of the replica sum (default ``N_ext + 2``).
        delay_periods: Number of delay periods to evaluate.
        doppler_periods: Number of Doppler periods to evaluate.

    Returns:
        Sampled surface over ``delay_periods * T`` by ``doppler_periods / T``.
    """
    i0 = _lattice_origin(x, grid)
    if x.duration < grid.T * (1.0 - 1e-12):
        raise CoverageError(
            f"Signal covers {x.duration:.6g} s, shorter than one delay period T={grid.T}"
        )
    if replicas is None:
        replicas = grid.N_ext + 2
    if replicas < 1:
        raise DimensionError(f"Invalid replicas value: {replicas} (must be >= 1)")

    tau, nu = _surface_axes(grid, delay_periods, doppler_periods)
    K = grid.samples_per_period
    shifts = np.arange(-replicas, replicas + 1)

    idx = np.arange(len(tau))[:, None] + shifts[None, :] * K - i0
    valid = (idx >= 0) & (idx < len(x))
    stacked = np.where(valid, x.samples[np.clip(idx, 0, len(x) - 1)], 0.0)

    kernel = np.exp(-2j * np.pi * np.outer(shifts, nu) * grid.T)
    values = np.sqrt(grid.T) * stacked @ kernel
    return DDSampledSurface(grid, values, tau, nu, source="zak_time")


def izak_time(Z: DDSampledSurface) -> TimeSignal:
    """Inverse Zak transform as a Riemann sum over one Doppler period.

    Args:
        Z: Surface whose Doppler axis spans exactly one period 1/T.

    Returns:
        Signal sampled on the surface's delay axis.
    """
    grid = Z.grid
    span = len(Z.nu_axis) * Z.nu_step
    if not np.isclose(span * grid.T, 1.0, rtol=1e-9):
        raise CoverageError(
            f"Doppler axis spans {span:.6g} Hz, izak_time needs exactly 1/T={1.0 / grid.T:.6g} Hz"
        )
    samples = np.sqrt(grid.T) * Z.nu_step * Z.values.sum(axis=1)
    rate = 1.0 / Z.tau_step
    return TimeSignal(samples, rate, float(Z.tau_axis[0]))


def spectrum_of(x: TimeSignal) -> Spectrum:
    """Continuous spectrum ``X(f) = sum_i x_i exp(-2j*pi*f*t_i) * dt`` of a sampled signal."""
    t = x.times()
    samples = x.samples
    dt = x.dt

    def evaluate(f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        return np.exp(-2j * np.pi * f[..., None] * t) @ samples * dt

    return evaluate


def zak_freq_sampled(
    spectrum: Spectrum,
    grid: DDGrid,
    bands: Optional[int] = None,
    m0: Optional[int] = None,
    delay_periods: int = 1,
    doppler_periods: int = 1,
) -> DDSampledSurface:
    """Sampled frequency-domain Zak transform.

    ``Z(tau, nu) = T**-0.5 * sum_m X(nu + m/T) * exp(2j*pi*(nu + m/T)*tau)`` over
    ``m = m0 .. m0 + bands - 1``. With the default of one full sampling bandwidth
    (``bands = M*osr``) the result equals :func:`zak_time_sampled` of the same signal.

    Args:
        spectrum: Callable returning X(f) for an array of frequencies.
        grid: Frame geometry.
        bands: Number of 1/T-wide bands summed.
        m0: First band index (default ``-bands // 2``).
        delay_periods: Number of delay periods to evaluate.
        doppler_periods: Number of Doppler periods to evaluate.

    Returns:
        Sampled surface on the same lattice as the time-domain transform.
    """
    if bands is None:
        bands = grid.samples_per_period
    if bands < 1:
        raise DimensionError(f"Invalid bands value: {bands} (must be >= 1)")
    if m0 is None:
        m0 = -(bands // 2)

    tau, nu = _surface_axes(grid, delay_periods, doppler_periods)
    m = np.arange(m0, m0 + bands)
    freqs = nu[None, :] + m[:, None] / grid.T
    band_values = np.asarray(spectrum(freqs), dtype=complex)

    band_phase = np.exp(2j * np.pi * np.outer(tau, m) / grid.T)
    values = band_phase @ band_values * np.exp(2j * np.pi * np.outer(tau, nu))
    values /= np.sqrt(grid.T)
    return DDSampledSurface(grid, values, tau, nu, source="zak_freq")


def izak_freq(
    Z: DDSampledSurface, bands: Optional[int] = None, m0: Optional[int] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Recover spectrum samples from a sampled Zak surface.

    ``X(f) = T**-0.5 * sum_{tau in one period} Z(tau, f) * exp(-2j*pi*f*tau) * dt``, using
    Doppler periodicity ``Z(tau, nu + m/T) = Z(tau, nu)``.

    Args:
        Z: Surface covering at least one delay period.
        bands: Number of 1/T-wide bands returned (default ``M*osr``).
        m0: First band index (default ``-bands // 2``).

    Returns:
        Tuple of (frequencies, spectrum values), sorted by frequency.
    """
    grid = Z.grid
    rows = lattice_index(grid.T, Z.tau_step)
    if rows is None or rows > len(Z.tau_axis):
        raise CoverageError("Delay axis does not cover one full period T")
    if bands is None:
        bands = grid.samples_per_period
    if m0 is None:
        m0 = -(bands // 2)

    tau = Z.tau_axis[:rows]
    values = Z.values[:rows]
    m = np.arange(m0, m0 + bands)
    freqs = Z.nu_axis[None, :] + m[:, None] / grid.T

    # Z(tau, nu + m/T) = Z(tau, nu), so each band reuses the same columns.
    base = np.exp(-2j * np.pi * np.outer(tau, Z.nu_axis)) * values
    band_phase = np.exp(-2j * np.pi * np.outer(m, tau) / grid.T)
    spectrum = band_phase @ base * Z.tau_step / np.sqrt(grid.T)

    order = np.argsort(freqs, axis=None, kind="stable")
    return freqs.reshape(-1)[order], spectrum.reshape(-1)[order]
