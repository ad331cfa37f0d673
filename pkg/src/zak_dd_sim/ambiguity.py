"""Ambiguity functions of sampled signals and truncated DD bases.

All ambiguities use
``A_{x,y}(tau, nu) = integral x(t) * conj(y(t - tau)) * exp(-2j*pi*nu*(t - tau)) dt``.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy.special import roots_legendre

from .errors import CoverageError, DimensionError, QuantizationError
from .grid import DDGrid, TimeSignal, check_uniform_axis, lattice_index
from .pulses import (
    BasisConfig,
    WindowKind,
    WindowSpec,
    dirichlet,
    window_value,
)
from .zak import zak_time_sampled

logger = logging.getLogger(__name__)


class AmbiguityModel(str, Enum):
    """Evaluation route for the truncated-basis ambiguity."""

    AUTO = "auto"
    PERIODIC = "periodic"
    SUMMATION = "summation"


@dataclass(frozen=True)
class AmbiguitySurface:
    """Ambiguity values over a rectangular (delay, Doppler) region."""

    values: np.ndarray
    tau_axis: np.ndarray
    nu_axis: np.ndarray
    source: str = ""

    def __post_init__(self) -> None:
        tau = np.asarray(self.tau_axis, dtype=float)
        nu = np.asarray(self.nu_axis, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        check_uniform_axis("tau_axis", tau)
        check_uniform_axis("nu_axis", nu)
        if values.shape != (len(tau), len(nu)):
            raise DimensionError(
                f"Ambiguity shape {values.shape} does not match axes ({len(tau)}, {len(nu)})"
            )
        if not np.all(np.isfinite(values)):
            raise DimensionError("Ambiguity values must be finite")
        object.__setattr__(self, "tau_axis", tau)
        object.__setattr__(self, "nu_axis", nu)
        object.__setattr__(self, "values", values)

    def value_at(self, tau: float, nu: float) -> complex:
        """Return the sample nearest to ``(tau, nu)``."""
        i = int(np.argmin(np.abs(self.tau_axis - tau)))
        j = int(np.argmin(np.abs(self.nu_axis - nu)))
        return complex(self.values[i, j])


@dataclass(frozen=True)
class AmbiguityCuts:
    """Zero-Doppler and zero-delay cuts normalized to the origin."""

    tau_axis: np.ndarray
    delay_cut: np.ndarray
    nu_axis: np.ndarray
    doppler_cut: np.ndarray


@dataclass(frozen=True)
class OrthogonalityReport:
    """Normalized ambiguity magnitudes on the integer DD lattice.

    ``boundary`` marks lattice points with ``|l1| = M_ext`` or ``|k1| = N_ext``, which are
    quasi-periodic replicas of the fundamental cell.
    """

    l1: np.ndarray
    k1: np.ndarray
    magnitudes: np.ndarray
    flags: np.ndarray
    boundary: np.ndarray
    threshold: float

    @property
    def origin_value(self) -> float:
        """Normalized magnitude at the origin."""
        return float(self.magnitudes[len(self.l1) // 2, len(self.k1) // 2])

    def all_orthogonal(self) -> bool:
        """True when every interior non-origin point is below the threshold."""
        mask = ~self.boundary
        mask[len(self.l1) // 2, len(self.k1) // 2] = False
        return bool(np.all(self.flags[mask]))

    def worst_interior(self) -> float:
        """Largest interior non-origin magnitude."""
        mask = ~self.boundary
        mask[len(self.l1) // 2, len(self.k1) // 2] = False
        return float(np.max(self.magnitudes[mask])) if np.any(mask) else 0.0


def _delay_shifts(tau_axis: np.ndarray, dt: float) -> np.ndarray:
    shifts = []
    for tau in tau_axis:
        s = lattice_index(float(tau), dt)
        if s is None:
            raise QuantizationError(f"Delay {tau} s is not on the sample lattice (dt={dt})")
        shifts.append(s)
    return np.asarray(shifts, dtype=int)


def cross_ambiguity(
    x: TimeSignal,
    y: TimeSignal,
    tau_axis: np.ndarray,
    nu_axis: np.ndarray,
) -> AmbiguitySurface:
    """Numerical cross ambiguity of two sampled signals.

    Delays are realized as integer sample shifts; Doppler is an exact phase ramp.

    Args:
        x: First signal.
        y: Second signal at the same rate.
        tau_axis: Delays, integer multiples of the sample period.
        nu_axis: Dopplers in Hz.

    Returns:
        Ambiguity surface.
    """
    if not np.isclose(x.sample_rate, y.sample_rate, rtol=1e-12, atol=0.0):
        raise DimensionError(
            f"Sample rate mismatch: {x.sample_rate} Hz vs {y.sample_rate} Hz"
        )
    tau_axis = np.asarray(tau_axis, dtype=float)
    nu_axis = np.asarray(nu_axis, dtype=float)
    dt = x.dt
    shifts = _delay_shifts(tau_axis, dt)
    origin = lattice_index(x.t0 - y.t0, dt)
    if origin is None:
        raise QuantizationError("Signal origins differ by a non-integer number of samples")

    # y(t_i - tau) has index i + origin - shift in y
    idx = np.arange(len(x))[None, :] + origin - shifts[:, None]
    valid = (idx >= 0) & (idx < len(y))
    y_shift = np.where(valid, y.samples[np.clip(idx, 0, max(len(y) - 1, 0))], 0.0)
    products = x.samples[None, :] * np.conj(y_shift)

    t = x.times()
    values = products @ np.exp(-2j * np.pi * np.outer(t, nu_axis))
    values *= np.exp(2j * np.pi * np.outer(tau_axis, nu_axis)) * dt
    return AmbiguitySurface(values, tau_axis, nu_axis, source="numeric")


def window_ambiguity(
    w: WindowSpec,
    tau_axis: np.ndarray,
    nu_axis: np.ndarray,
    step: Optional[float] = None,
) -> AmbiguitySurface:
    """Auto ambiguity of a single window.

    With ``step=None`` a Rect window is evaluated analytically; other kinds use a lattice
    sum with ``span / 4096`` spacing. A given ``step`` always selects the lattice sum
    ``sum_i W(x_i) W(x_i - tau) exp(-2j*pi*nu*(x_i - tau)) * step`` with ``x_i = i * step``.

    Args:
        w: Window specification.
        tau_axis: Shifts in the window's domain.
        nu_axis: Dual-domain modulation values.
        step: Lattice spacing of the sum.

    Returns:
        Ambiguity surface of the window.
    """
    tau = np.asarray(tau_axis, dtype=float)
    nu = np.asarray(nu_axis, dtype=float)

    if step is None and w.kind is WindowKind.RECT:
        amp2 = float(window_value(w, w.center)) ** 2
        u0 = np.maximum(-tau, 0.0)
        u1 = np.minimum(w.span - tau, w.span)
        length = np.maximum(u1 - u0, 0.0)[:, None]
        mid = ((u0 + u1) / 2.0)[:, None]
        values = amp2 * length * np.exp(-2j * np.pi * nu[None, :] * mid) * np.sinc(
            nu[None, :] * length
        )
        return AmbiguitySurface(values, tau, nu, source=f"window:{w.kind.value}")

    if step is None:
        step = w.span / 4096
    x = np.arange(int(math.ceil(w.span / step - 1e-9))) * step
    profile = window_value(w, x)[None, :] * window_value(w, x[None, :] - tau[:, None])
    values = profile @ np.exp(-2j * np.pi * np.outer(x, nu))
    values *= np.exp(2j * np.pi * np.outer(tau, nu)) * step
    return AmbiguitySurface(values, tau, nu, source=f"window:{w.kind.value}")


def _band_ambiguity(cfg: BasisConfig, tau: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fourier-domain form of the periodized filter ambiguity.

    ``(1/T) * sum_q F(q/T) * F((q - m)/T) * exp(2j*pi*q*tau/T)`` for every ``m`` with a
    nonzero coefficient pair.
    """
    T = cfg.grid.T
    q_max = int(math.ceil(cfg.freq_window.span * T))
    coeff = window_value(cfg.freq_window, np.arange(q_max + 1) / T)
    q = np.arange(q_max + 1)
    m = np.arange(-q_max, q_max + 1)
    shifted = q[None, :] - m[:, None]
    valid = (shifted >= 0) & (shifted <= q_max)
    pairs = coeff[None, :] * np.where(valid, coeff[np.clip(shifted, 0, q_max)], 0.0)
    phases = np.exp(2j * np.pi * np.outer(q, tau) / T)
    return m, pairs @ phases / T


def _summation_model(cfg: BasisConfig, tau: np.ndarray, nu: np.ndarray) -> np.ndarray:
    T = cfg.grid.T
    m, band = _band_ambiguity(cfg, tau)
    values = np.zeros((len(tau), len(nu)), dtype=complex)
    step = cfg.grid.sample_period
    for i, shift in enumerate(m):
        weight = band[i]
        if not np.any(np.abs(weight) > 0):
            continue
        tw = window_ambiguity(cfg.time_window, tau, nu - shift / T, step=step).values
        values += weight[:, None] * tw
    return values


def _periodic_model(cfg: BasisConfig, tau: np.ndarray, nu: np.ndarray) -> np.ndarray:
    grid = cfg.grid
    T = grid.T
    nodes, weights = roots_legendre(4 * grid.M_ext + 64)
    s = (nodes + 1.0) * T / 2.0
    weights = weights * T / 2.0

    kernel = dirichlet(s / T, grid.M_ext)
    lagged = dirichlet((s[None, :] - tau[:, None]) / T, grid.M_ext)
    tw = window_value(cfg.time_window, s, clip=False)
    tw_lagged = window_value(cfg.time_window, s[None, :] - tau[:, None], clip=False)
    integrand = weights * kernel * tw * np.conj(lagged) * tw_lagged

    values = integrand @ np.exp(-2j * np.pi * np.outer(s, nu))
    values *= np.exp(2j * np.pi * np.outer(tau, nu))
    fw0 = float(window_value(cfg.freq_window, 0.0))
    doppler = dirichlet(-nu * T, grid.N_ext)
    return (fw0**2 / T) * values * doppler[None, :]


def af_truncated_closed_form(
    cfg: BasisConfig,
    tau_axis: np.ndarray,
    nu_axis: np.ndarray,
    model: Union[AmbiguityModel, str] = AmbiguityModel.AUTO,
) -> AmbiguitySurface:
    """Ambiguity of the truncated basis function at the origin.

    ``periodic`` integrates the product of Dirichlet-kernel DD representations over one delay
    period, with the frequency window samples taken equal to ``FW_F(0)``; it is exact on the
    interior of the lattice for Rect windows. ``summation`` evaluates
    ``sum_m B(tau, m) * A_TW(tau, nu - m/T)`` where ``B`` is the Fourier form of the
    periodized filter ambiguity and ``A_TW`` is the time-window ambiguity on the grid sample
    lattice. ``auto`` picks ``periodic`` for Rect/Cosine windows and ``summation`` otherwise.

    Args:
        cfg: Basis configuration.
        tau_axis: Delays in seconds.
        nu_axis: Dopplers in Hz.
        model: Evaluation route.

    Returns:
        Ambiguity surface.
    """
    model = AmbiguityModel(model)
    if model is AmbiguityModel.AUTO:
        model = AmbiguityModel.PERIODIC if cfg.is_periodic else AmbiguityModel.SUMMATION
    tau = np.asarray(tau_axis, dtype=float)
    nu = np.asarray(nu_axis, dtype=float)
    logger.debug(f"Truncated-basis ambiguity for {cfg.label} via {model.value} model")
    if model is AmbiguityModel.PERIODIC:
        values = _periodic_model(cfg, tau, nu)
    else:
        values = _summation_model(cfg, tau, nu)
    return AmbiguitySurface(values, tau, nu, source=f"{cfg.label}:{model.value}")


def _zero_index(axis: np.ndarray, name: str) -> int:
    i = int(np.argmin(np.abs(axis)))
    scale = np.max(np.abs(axis)) if len(axis) else 1.0
    if abs(axis[i]) > 1e-9 * max(scale, 1e-300):
        raise CoverageError(f"{name} does not contain zero")
    return i


def ambiguity_cuts(surface: AmbiguitySurface) -> AmbiguityCuts:
    """Zero-Doppler and zero-delay magnitude cuts normalized to ``|A(0, 0)|``."""
    i0 = _zero_index(surface.tau_axis, "tau_axis")
    j0 = _zero_index(surface.nu_axis, "nu_axis")
    peak = abs(surface.values[i0, j0])
    if peak == 0:
        raise DimensionError("Ambiguity vanishes at the origin; cuts cannot be normalized")
    return AmbiguityCuts(
        tau_axis=surface.tau_axis,
        delay_cut=np.abs(surface.values[:, j0]) / peak,
        nu_axis=surface.nu_axis,
        doppler_cut=np.abs(surface.values[i0, :]) / peak,
    )


def _replicas_for(x: TimeSignal, grid: DDGrid) -> int:
    extent = max(abs(x.t0), abs(x.t0 + x.duration))
    return max(grid.N_ext + 2, int(math.ceil(extent / grid.T)) + 1)


def zak_af_identity_check(
    x: TimeSignal,
    y: TimeSignal,
    grid: DDGrid,
    n_max: int,
    m_max: int,
) -> float:
    """Compare ``Z_x * conj(Z_y)`` with its ambiguity expansion on the fundamental rectangle.

    The right-hand side is ``sum_n sum_m A_{x,y}(n*T, m/T) exp(-2j*pi*n*nu*T)
    exp(2j*pi*m*tau/T)`` for ``|n| <= n_max`` and ``|m| <= m_max``. On the sample lattice only
    ``M*osr`` consecutive ``m`` are distinct, so the Doppler index range is clipped to
    ``[-K//2, K - K//2)``.

    Args:
        x: First signal.
        y: Second signal.
        grid: Frame geometry setting the lattice.
        n_max: Delay-period truncation.
        m_max: Doppler-period truncation.

    Returns:
        Maximum absolute residual.
    """
    replicas = max(_replicas_for(x, grid), _replicas_for(y, grid))
    Zx = zak_time_sampled(x, grid, replicas=replicas)
    Zy = zak_time_sampled(y, grid, replicas=replicas)
    lhs = Zx.values * np.conj(Zy.values)

    K = grid.samples_per_period
    n = np.arange(-n_max, n_max + 1)
    m = np.arange(max(-m_max, -(K // 2)), min(m_max, K - K // 2 - 1) + 1)
    A = cross_ambiguity(x, y, n * grid.T, m / grid.T).values

    tau_phase = np.exp(2j * np.pi * np.outer(Zx.tau_axis, m) / grid.T)
    nu_phase = np.exp(-2j * np.pi * np.outer(n, Zx.nu_axis) * grid.T)
    rhs = tau_phase @ A.T @ nu_phase
    residual = float(np.max(np.abs(lhs - rhs)))
    logger.debug(f"Zak/ambiguity identity residual: {residual:.3e}")
    return residual


def dd_orthogonality_report(
    cfg: BasisConfig,
    threshold: float = 1e-2,
    model: Union[AmbiguityModel, str] = AmbiguityModel.AUTO,
) -> OrthogonalityReport:
    """Tabulate the normalized truncated-basis ambiguity on the integer DD lattice.

    Lattice points are ``(l1*T/M_ext, k1/(N_ext*T))`` with ``l1`` in ``[-M_ext, M_ext]`` and
    ``k1`` in ``[-N_ext, N_ext]``.

    Args:
        cfg: Basis configuration.
        threshold: Relative magnitude at or below which a point counts as orthogonal.
        model: Evaluation route passed to :func:`af_truncated_closed_form`.

    Returns:
        Orthogonality report.
    """
    grid = cfg.grid
    l1 = np.arange(-grid.M_ext, grid.M_ext + 1)
    k1 = np.arange(-grid.N_ext, grid.N_ext + 1)
    surface = af_truncated_closed_form(
        cfg, l1 * grid.T / grid.M_ext, k1 / (grid.N_ext * grid.T), model=model
    )
    peak = abs(surface.values[grid.M_ext, grid.N_ext])
    magnitudes = np.abs(surface.values) / peak
    boundary = (np.abs(l1)[:, None] == grid.M_ext) | (np.abs(k1)[None, :] == grid.N_ext)
    report = OrthogonalityReport(
        l1=l1,
        k1=k1,
        magnitudes=magnitudes,
        flags=magnitudes <= threshold,
        boundary=boundary,
        threshold=threshold,
    )
    logger.info(
        f"DD orthogonality for {cfg.label}: worst interior magnitude "
        f"{report.worst_interior():.3e} (threshold {threshold:g})"
    )
    return report
