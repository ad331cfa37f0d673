"""Windows, delay-Doppler basis functions and pulsone construction.

A truncated basis function is built from a frequency window ``FW`` (its time dual shapes each
local pulse) and a time window ``TW`` (which truncates the pulse train to ``N_ext`` periods).
Windows live on ``[0, span)``; frequency windows therefore occupy ``[0, M_ext/T)``.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DimensionError, QuantizationError, UnsupportedWindowError
from .grid import DDGrid, DDSampledSurface, TimeSignal, lattice_index
from .zak import zak_time_sampled

logger = logging.getLogger(__name__)


class WindowKind(str, Enum):
    """Supported window shapes."""

    RECT = "rect"
    RRC = "rrc"
    COSINE = "cosine"


class Domain(str, Enum):
    """Domain a window is defined in."""

    TIME = "time"
    FREQUENCY = "frequency"


class AtomKind(str, Enum):
    """Atom pulse placed on the DD lattice."""

    DELTA = "delta"


# Window kinds whose lattice samples FW_F(q/T) are treated as constant.
PERIODIC_KINDS = frozenset({WindowKind.RECT, WindowKind.COSINE})


@dataclass(frozen=True)
class WindowSpec:
    """Window on ``[0, span)`` in time (seconds) or frequency (Hz).

    For RRC windows ``nominal_width`` is the width ``W`` between half-power points and the
    roll-off occupies ``beta * W``; it defaults to ``span / (1 + beta)``. Other kinds use the
    whole span.
    """

    kind: WindowKind
    domain: Domain
    span: float
    beta: float = 0.0
    power_normalized: bool = True
    nominal_width: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", WindowKind(self.kind))
        object.__setattr__(self, "domain", Domain(self.domain))
        if not self.span > 0:
            raise DimensionError(f"Invalid window span: {self.span} (must be > 0)")
        if not 0.0 <= self.beta < 1.0:
            raise DimensionError(f"Invalid roll-off beta: {self.beta} (must be in [0, 1))")
        if self.nominal_width == 0.0:
            width = self.span / (1.0 + self.beta) if self.kind is WindowKind.RRC else self.span
            object.__setattr__(self, "nominal_width", width)
        if self.kind is WindowKind.RRC:
            occupied = (1.0 + self.beta) * self.nominal_width
            if occupied > self.span * (1.0 + 1e-12):
                raise DimensionError(
                    f"RRC width {occupied:.6g} exceeds window span {self.span:.6g}"
                )

    @property
    def center(self) -> float:
        """Midpoint of the span."""
        return self.span / 2.0


@dataclass(frozen=True)
class AtomSpec:
    """Atom pulse of the DD basis."""

    kind: AtomKind = AtomKind.DELTA


@dataclass(frozen=True)
class BasisConfig:
    """Windows and atom that define a truncated DD basis on a grid."""

    grid: DDGrid
    atom: AtomSpec
    time_window: WindowSpec
    freq_window: WindowSpec

    def __post_init__(self) -> None:
        errors = []
        if self.time_window.domain is not Domain.TIME:
            errors.append("time_window must be defined in the time domain")
        if self.freq_window.domain is not Domain.FREQUENCY:
            errors.append("freq_window must be defined in the frequency domain")
        time_span = self.grid.N_ext * self.grid.T
        freq_span = self.grid.M_ext / self.grid.T
        if not math.isclose(self.time_window.span, time_span, rel_tol=1e-9):
            errors.append(
                f"Time window span {self.time_window.span:.6g} s "
                f"must equal N_ext*T={time_span:.6g}"
            )
        if not math.isclose(self.freq_window.span, freq_span, rel_tol=1e-9):
            errors.append(
                f"Frequency window span {self.freq_window.span:.6g} Hz "
                f"must equal M_ext/T={freq_span:.6g}"
            )
        if errors:
            raise DimensionError("; ".join(errors))

    @property
    def is_periodic(self) -> bool:
        """True when both windows are Rect or Cosine."""
        return (
            self.time_window.kind in PERIODIC_KINDS and self.freq_window.kind in PERIODIC_KINDS
        )

    @property
    def label(self) -> str:
        """Short description such as ``rect+rrc``."""
        return f"{self.time_window.kind.value}+{self.freq_window.kind.value}"

    @classmethod
    def create(
        cls,
        grid: DDGrid,
        time_kind: WindowKind = WindowKind.RECT,
        freq_kind: WindowKind = WindowKind.RECT,
        time_beta: float = 0.1,
        freq_beta: float = 0.3,
    ) -> "BasisConfig":
        """Build a configuration, extending the grid for RRC excess span.

        RRC windows set ``M_ext = ceil(M * (1 + freq_beta))`` and
        ``N_ext = ceil(N * (1 + time_beta))``; the nominal widths stay ``M/T`` and ``N*T``.

        Args:
            grid: Base frame geometry.
            time_kind: Time window kind.
            freq_kind: Frequency window kind.
            time_beta: Roll-off of an RRC time window.
            freq_beta: Roll-off of an RRC frequency window.

        Returns:
            Basis configuration on the (possibly extended) grid.
        """
        time_kind = WindowKind(time_kind)
        freq_kind = WindowKind(freq_kind)
        M_ext, N_ext = grid.M_ext, grid.N_ext
        if freq_kind is WindowKind.RRC:
            M_ext = max(M_ext, math.ceil(grid.M * (1.0 + freq_beta) - 1e-9))
        if time_kind is WindowKind.RRC:
            N_ext = max(N_ext, math.ceil(grid.N * (1.0 + time_beta) - 1e-9))
        extended = grid.with_extension(M_ext, N_ext)

        time_window = WindowSpec(
            time_kind,
            Domain.TIME,
            span=N_ext * grid.T,
            beta=time_beta if time_kind is WindowKind.RRC else 0.0,
            nominal_width=grid.N * grid.T if time_kind is WindowKind.RRC else 0.0,
        )
        freq_window = WindowSpec(
            freq_kind,
            Domain.FREQUENCY,
            span=M_ext / grid.T,
            beta=freq_beta if freq_kind is WindowKind.RRC else 0.0,
            nominal_width=grid.M / grid.T if freq_kind is WindowKind.RRC else 0.0,
        )
        logger.debug(
            f"Basis {time_kind.value}+{freq_kind.value} on M={grid.M}, N={grid.N}: "
            f"M_ext={M_ext}, N_ext={N_ext}"
        )
        return cls(extended, AtomSpec(), time_window, freq_window)


def _amplitude(w: WindowSpec) -> float:
    if not w.power_normalized:
        return 1.0
    if w.kind is WindowKind.RECT:
        return 1.0 / math.sqrt(w.span)
    if w.kind is WindowKind.COSINE:
        return 1.0 / math.sqrt(w.span / 2.0 + math.sin(2.0 * w.span) / 4.0)
    return 1.0 / math.sqrt(w.nominal_width)


def _rrc_shape(u: np.ndarray, width: float, beta: float) -> np.ndarray:
    a = np.abs(u)
    lo = (1.0 - beta) * width / 2.0
    hi = (1.0 + beta) * width / 2.0
    out = np.where(a <= lo, 1.0, 0.0)
    if beta > 0:
        roll = (a > lo) & (a <= hi)
        out = np.where(roll, np.cos(np.pi / (2.0 * beta * width) * (a - lo)), out)
    return out


def window_value(w: WindowSpec, x: np.ndarray, clip: bool = True) -> np.ndarray:
    """Evaluate a window.

    Args:
        w: Window specification.
        x: Evaluation points (seconds or Hz) measured from the span start.
        clip: Zero the window outside ``[0, span)``. With ``clip=False`` Rect and Cosine
            windows are evaluated as their unbounded parent functions.

    Returns:
        Real window values with the shape of ``x``.
    """
    x = np.asarray(x, dtype=float)
    amp = _amplitude(w)
    if w.kind is WindowKind.RECT:
        values = np.full(x.shape, amp)
    elif w.kind is WindowKind.COSINE:
        values = amp * np.cos(x)
    else:
        values = amp * _rrc_shape(x - w.center, w.nominal_width, w.beta)
    if clip:
        values = np.where((x >= 0.0) & (x < w.span), values, 0.0)
    return values


def window_samples(w: WindowSpec, step: float, offset: float = 0.0) -> np.ndarray:
    """Sample a window at ``offset + i * step`` for every lattice point below the span end.

    Args:
        w: Window specification.
        step: Lattice spacing.
        offset: First sample position.

    Returns:
        Window samples.
    """
    if not step > 0:
        raise DimensionError(f"Invalid sampling step: {step} (must be > 0)")
    count = max(0, int(math.ceil((w.span - offset) / step - 1e-9)))
    return window_value(w, offset + np.arange(count) * step)


def _rrc_impulse(t: np.ndarray, width: float, beta: float) -> np.ndarray:
    x = t * width
    if beta == 0.0:
        return width * np.sinc(x)
    at_zero = np.abs(x) < 1e-12
    at_pole = np.abs(np.abs(x) - 1.0 / (4.0 * beta)) < 1e-9
    safe = np.where(at_zero | at_pole, 1.0, x)
    num = np.sin(np.pi * safe * (1.0 - beta)) + 4.0 * beta * safe * np.cos(
        np.pi * safe * (1.0 + beta)
    )
    den = np.pi * safe * (1.0 - (4.0 * beta * safe) ** 2)
    h = num / den
    h = np.where(at_zero, 1.0 - beta + 4.0 * beta / np.pi, h)
    pole_value = (beta / math.sqrt(2.0)) * (
        (1.0 + 2.0 / np.pi) * math.sin(np.pi / (4.0 * beta))
        + (1.0 - 2.0 / np.pi) * math.cos(np.pi / (4.0 * beta))
    )
    h = np.where(at_pole, pole_value, h)
    return width * h


def window_dual(w: WindowSpec, t: np.ndarray) -> np.ndarray:
    """Analytic transform ``integral W(x) exp(2j*pi*x*t) dx`` over the window support.

    For a frequency window this is its time-domain dual ``FW_T(t)``. The spectrum of a time
    window is ``window_dual(tw, -f)``.

    Args:
        w: Window specification.
        t: Dual-domain evaluation points.

    Returns:
        Complex dual values.
    """
    t = np.asarray(t, dtype=float)
    amp = _amplitude(w)
    S = w.span
    if w.kind is WindowKind.RECT:
        return amp * S * np.exp(1j * np.pi * S * t) * np.sinc(S * t)
    if w.kind is WindowKind.RRC:
        return amp * np.exp(1j * np.pi * S * t) * _rrc_impulse(t, w.nominal_width, w.beta)

    out = np.zeros(t.shape, dtype=complex)
    for sign in (1.0, -1.0):
        a = 2.0 * np.pi * t + sign
        small = np.abs(a) < 1e-12
        safe = np.where(small, 1.0, a)
        out += 0.5 * np.where(small, S, (np.exp(1j * safe * S) - 1.0) / (1j * safe))
    return amp * out


def _band_coefficients(fw: WindowSpec, period: float) -> tuple[np.ndarray, np.ndarray]:
    q = np.arange(0, int(math.ceil(fw.span * period)) + 1)
    coeff = window_value(fw, q / period)
    keep = coeff != 0.0
    return q[keep], coeff[keep]


def periodized_filter(fw: WindowSpec, t: np.ndarray, period: float) -> np.ndarray:
    """T-periodization of a frequency window's time dual.

    ``sum_n FW_T(t - n*period) = (1/period) * sum_q FW_F(q/period) * exp(2j*pi*q*t/period)``.

    Args:
        fw: Frequency window.
        t: Time points.
        period: Periodization interval.

    Returns:
        Complex local pulse shape at ``t``.
    """
    q, coeff = _band_coefficients(fw, period)
    t = np.asarray(t, dtype=float)
    return np.exp(2j * np.pi * np.multiply.outer(t, q / period)) @ coeff / period


def dirichlet(x: np.ndarray, n: int) -> np.ndarray:
    """Dirichlet kernel ``sum_{k<n} exp(2j*pi*k*x)``, equal to ``n`` at integer ``x``."""
    x = np.asarray(x, dtype=float)
    s = np.sin(np.pi * x)
    small = np.abs(s) < 1e-12
    safe = np.where(small, 1.0, s)
    ratio = np.exp(1j * np.pi * (n - 1) * x) * np.sin(np.pi * n * x) / safe
    return np.where(small, float(n), ratio)


def _check_index(l: int, k: int, grid: DDGrid) -> None:
    if not (0 <= l < grid.M and 0 <= k < grid.N):
        raise DimensionError(
            f"Basis index ({l}, {k}) out of range for M={grid.M}, N={grid.N}"
        )


def pulsone_time(l: int, k: int, cfg: BasisConfig) -> TimeSignal:
    """Sampled truncated basis function for DD index ``(l, k)``.

    A train of FW-shaped pulses at ``tau_l + n*T`` modulated by ``exp(2j*pi*nu_k*(t - tau_l))``
    and truncated by the time window starting at ``tau_l``.

    Args:
        l: Delay index in ``[0, M)``.
        k: Doppler index in ``[0, N)``.
        cfg: Basis configuration.

    Returns:
        Signal at the grid sample rate with origin ``tau_l``.
    """
    grid = cfg.grid
    _check_index(l, k, grid)
    count = int(round(cfg.time_window.span / grid.sample_period))
    t = np.arange(count) * grid.sample_period
    nu_k = k * grid.doppler_resolution
    local = periodized_filter(cfg.freq_window, t, grid.T)
    samples = (
        np.sqrt(grid.T) * np.exp(2j * np.pi * nu_k * t) * local * window_value(cfg.time_window, t)
    )
    return TimeSignal(samples, grid.sample_rate, t0=l * grid.delay_resolution)


def pulsone_freq(l: int, k: int, cfg: BasisConfig, f: np.ndarray) -> np.ndarray:
    """Spectrum of the truncated basis function for DD index ``(l, k)``.

    TW-shaped tones at ``nu_k + q/T`` weighted by ``FW_F(q/T)``, with the delay phase
    ``exp(-2j*pi*f*tau_l)``.

    Args:
        l: Delay index in ``[0, M)``.
        k: Doppler index in ``[0, N)``.
        cfg: Basis configuration.
        f: Frequencies in Hz.

    Returns:
        Complex spectrum values.
    """
    grid = cfg.grid
    _check_index(l, k, grid)
    f = np.asarray(f, dtype=float)
    q, coeff = _band_coefficients(cfg.freq_window, grid.T)
    nu_k = k * grid.doppler_resolution
    offsets = np.subtract.outer(f, nu_k + q / grid.T)
    tones = window_dual(cfg.time_window, -offsets) @ coeff
    tau_l = l * grid.delay_resolution
    return np.exp(-2j * np.pi * f * tau_l) * tones / np.sqrt(grid.T)


def ideal_basis_time(l: int, k: int, grid: DDGrid, n_periods: Optional[int] = None) -> TimeSignal:
    """Delta-atom basis function as a train of Kronecker spikes.

    Spikes of height ``sqrt(T) * exp(2j*pi*k*n/N) / dt`` sit at ``tau_l + n*T``.

    Args:
        l: Delay index in ``[0, M)``.
        k: Doppler index in ``[0, N)``.
        grid: Frame geometry.
        n_periods: Number of spikes (default ``N_ext``).

    Returns:
        Signal with origin ``tau_l``.
    """
    _check_index(l, k, grid)
    if n_periods is None:
        n_periods = grid.N_ext
    K = grid.samples_per_period
    samples = np.zeros(n_periods * K, dtype=complex)
    n = np.arange(n_periods)
    samples[n * K] = np.sqrt(grid.T) * np.exp(2j * np.pi * k * n / grid.N) / grid.sample_period
    return TimeSignal(samples, grid.sample_rate, t0=l * grid.delay_resolution)


def basis_zak_surface(
    l: int,
    k: int,
    cfg: BasisConfig,
    delay_periods: int = 1,
    doppler_periods: int = 1,
) -> DDSampledSurface:
    """Sampled Zak transform of the truncated pulsone ``(l, k)``."""
    surface = zak_time_sampled(
        pulsone_time(l, k, cfg),
        cfg.grid,
        replicas=cfg.grid.N_ext + 2,
        delay_periods=delay_periods,
        doppler_periods=doppler_periods,
    )
    return DDSampledSurface(
        surface.grid, surface.values, surface.tau_axis, surface.nu_axis, source=f"pulsone({l},{k})"
    )


def truncated_basis_dd_closed_form(
    tau: np.ndarray, nu: np.ndarray, cfg: BasisConfig
) -> np.ndarray:
    """Closed-form DD representation of the truncated basis at the origin.

    ``FW_F(0) * TW_T(tau) * D_{M_ext}(tau/T) * D_{N_ext}(-nu*T)`` with Dirichlet kernels
    ``D_n``. Only periodic (Rect or Cosine) windows are supported.

    Args:
        tau: Delays in seconds.
        nu: Dopplers in Hz (broadcast against ``tau``).
        cfg: Basis configuration with periodic windows.

    Returns:
        Complex values.
    """
    if not cfg.is_periodic:
        raise UnsupportedWindowError(
            f"Closed form requires Rect or Cosine windows, got {cfg.label}"
        )
    grid = cfg.grid
    tau = np.asarray(tau, dtype=float)
    nu = np.asarray(nu, dtype=float)
    fw0 = float(window_value(cfg.freq_window, 0.0))
    return (
        fw0
        * window_value(cfg.time_window, tau)
        * dirichlet(tau / grid.T, grid.M_ext)
        * dirichlet(-nu * grid.T, grid.N_ext)
    )


def tf_consistent_shift(base: TimeSignal, tau0: float, nu0: float) -> TimeSignal:
    """Phase-rotate then delay: ``out(t) = exp(2j*pi*nu0*(t - tau0)) * base(t - tau0)``.

    Args:
        base: Signal to shift.
        tau0: Delay, an integer multiple of the sample period.
        nu0: Doppler shift in Hz.

    Returns:
        Shifted signal.
    """
    if lattice_index(tau0, base.dt) is None:
        raise QuantizationError(
            f"Delay {tau0} s is not a multiple of the sample period {base.dt} s"
        )
    rotated = base.samples * np.exp(2j * np.pi * nu0 * base.times())
    return TimeSignal(rotated, base.sample_rate, base.t0 + tau0)
