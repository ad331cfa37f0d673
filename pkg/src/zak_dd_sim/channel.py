"""Sparse delay-Doppler channel model, its time and DD domain actions, and AWGN."""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Optional, Union, overload

import numpy as np

from .errors import ChannelError, CoverageError, CrystallizationError, QuantizationError
from .grid import DDFrame, DDGrid, DDSampledSurface, TimeSignal, lattice_index
from .zak import fold_indices

logger = logging.getLogger(__name__)


class PowerProfile(str, Enum):
    """Per-path average power allocation."""

    UNIFORM = "uniform"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class ChannelPath:
    """One resolvable path: complex gain, delay (s) and Doppler (Hz)."""

    gain: complex
    delay: float
    doppler: float


@dataclass(frozen=True)
class NoiseSpec:
    """Complex AWGN with variance ``N0`` per sample."""

    N0: float
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not self.N0 >= 0:
            raise ChannelError(f"Invalid N0 value: {self.N0} (must be >= 0)")


@dataclass(frozen=True)
class DDChannel:
    """Sparse P-path doubly dispersive channel.

    No two paths may share both delay and Doppler, and delays are non-negative.
    """

    paths: tuple[ChannelPath, ...]
    seed: Optional[int] = None
    power_profile: PowerProfile = PowerProfile.UNIFORM

    def __post_init__(self) -> None:
        paths = tuple(self.paths)
        object.__setattr__(self, "paths", paths)
        object.__setattr__(self, "power_profile", PowerProfile(self.power_profile))
        if not paths:
            raise ChannelError("Channel must have at least one path")

        errors = []
        seen: set[tuple[float, float]] = set()
        for i, path in enumerate(paths):
            if path.delay < 0:
                errors.append(f"Path {i}: invalid delay {path.delay} (must be >= 0)")
            key = (path.delay, path.doppler)
            if key in seen:
                errors.append(
                    f"Path {i}: duplicate (delay, Doppler) = ({path.delay}, {path.doppler})"
                )
            seen.add(key)
        if errors:
            raise ChannelError("; ".join(errors))

    @classmethod
    def identity(cls) -> "DDChannel":
        """Single unit path at zero delay and Doppler."""
        return cls((ChannelPath(1.0 + 0j, 0.0, 0.0),))

    @classmethod
    def from_paths(
        cls, triples: Iterable[tuple[complex, float, float]], seed: Optional[int] = None
    ) -> "DDChannel":
        """Build a channel from ``(gain, delay, doppler)`` triples."""
        return cls(tuple(ChannelPath(complex(h), float(d), float(v)) for h, d, v in triples), seed)

    @property
    def num_paths(self) -> int:
        """Number of paths P."""
        return len(self.paths)

    @property
    def gains(self) -> np.ndarray:
        """Complex path gains."""
        return np.array([p.gain for p in self.paths], dtype=complex)

    @property
    def delays(self) -> np.ndarray:
        """Path delays in seconds."""
        return np.array([p.delay for p in self.paths], dtype=float)

    @property
    def dopplers(self) -> np.ndarray:
        """Path Dopplers in Hz."""
        return np.array([p.doppler for p in self.paths], dtype=float)

    @property
    def max_delay(self) -> float:
        """Largest path delay."""
        return float(self.delays.max())

    def to_record(self, grid: DDGrid) -> dict[str, Any]:
        """Serialize to a YAML/JSON-safe record with delays in sample ticks.

        Args:
            grid: Grid whose sample period defines a tick.

        Returns:
            Record dictionary.
        """
        paths = []
        for p in self.paths:
            ticks = lattice_index(p.delay, grid.sample_period)
            if ticks is None:
                raise QuantizationError(f"Path delay {p.delay} s is not on the sample lattice")
            paths.append(
                {
                    "gain_re": float(np.real(p.gain)),
                    "gain_im": float(np.imag(p.gain)),
                    "delay_ticks": ticks,
                    "doppler_hz": float(p.doppler),
                }
            )
        return {
            "seed": self.seed,
            "power_profile": self.power_profile.value,
            "sample_period": grid.sample_period,
            "paths": paths,
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "DDChannel":
        """Inverse of :meth:`to_record`."""
        dt = float(record["sample_period"])
        paths = tuple(
            ChannelPath(
                complex(p["gain_re"], p["gain_im"]),
                int(p["delay_ticks"]) * dt,
                float(p["doppler_hz"]),
            )
            for p in record["paths"]
        )
        return cls(paths, record.get("seed"), record.get("power_profile", PowerProfile.UNIFORM))


def sample_random_channel(
    P: int,
    l_max: float,
    k_max: float,
    grid: DDGrid,
    fractional: bool = True,
    rng_seed: int = 0,
    power_profile: Union[PowerProfile, str] = PowerProfile.UNIFORM,
) -> DDChannel:
    """Draw a random sparse channel.

    Delay indices are uniform on ``[0, l_max]`` and Doppler indices uniform on
    ``[-k_max/2, k_max/2]`` (integers in both ranges when ``fractional`` is False). Fractional
    delays are quantized to the sample lattice ``T/(M*osr)``; Dopplers stay continuous. Gains are
    circularly-symmetric complex Gaussian with total average power one.

    Args:
        P: Number of paths.
        l_max: Maximum delay index in units of ``T/M``.
        k_max: Doppler index range in units of ``1/(N*T)``.
        grid: Frame geometry.
        fractional: Draw continuous rather than integer indices.
        rng_seed: Seed of the generator.
        power_profile: Uniform ``1/P`` or exponential ``exp(-l_p/l_max)`` path powers.

    Returns:
        Channel with P distinct paths.
    """
    if P < 1:
        raise ChannelError(f"Invalid P value: {P} (must be >= 1)")
    if l_max < 0 or k_max < 0:
        raise ChannelError(f"Invalid spreads l_max={l_max}, k_max={k_max} (must be >= 0)")
    if l_max >= grid.M or k_max >= grid.N:
        raise CrystallizationError(
            f"Spreads l_max={l_max}, k_max={k_max} violate l_max < M={grid.M}, k_max < N={grid.N}"
        )
    profile = PowerProfile(power_profile)
    k_lo, k_hi = math.ceil(-k_max / 2.0), math.floor(k_max / 2.0)
    if not fractional:
        available = (int(math.floor(l_max)) + 1) * (k_hi - k_lo + 1)
        if available < P:
            raise ChannelError(f"Only {available} integer lattice points for P={P} paths")

    rng = np.random.default_rng(rng_seed)
    draws: list[tuple[int, float]] = []
    attempts = 0
    while len(draws) < P:
        attempts += 1
        if attempts > 1000 * P:
            raise ChannelError(f"Could not draw {P} distinct paths from the given spreads")
        if fractional:
            ticks = int(round(rng.uniform(0.0, l_max) * grid.osr))
            k = float(rng.uniform(-k_max / 2.0, k_max / 2.0))
        else:
            ticks = int(rng.integers(0, int(math.floor(l_max)) + 1)) * grid.osr
            k = float(rng.integers(k_lo, k_hi + 1))
        if (ticks, k) not in draws:
            draws.append((ticks, k))

    if profile is PowerProfile.EXPONENTIAL and l_max > 0:
        l_idx = np.array([t for t, _ in draws], dtype=float) / grid.osr
        weights = np.exp(-l_idx / l_max)
    else:
        weights = np.ones(P)
    weights /= weights.sum()
    gains = np.sqrt(weights / 2.0) * (rng.standard_normal(P) + 1j * rng.standard_normal(P))

    paths = tuple(
        ChannelPath(complex(h), t * grid.sample_period, k * grid.doppler_resolution)
        for h, (t, k) in zip(gains, draws)
    )
    channel = DDChannel(paths, seed=rng_seed, power_profile=profile)
    logger.debug(
        f"Sampled {P}-path channel (seed={rng_seed}, fractional={fractional}, "
        f"profile={profile.value})"
    )
    return channel


def crystallization_check(ch: DDChannel, T: float) -> bool:
    """True iff the delay spread is below ``T`` and the Doppler spread below ``1/T``."""
    delays, dopplers = ch.delays, ch.dopplers
    return bool(np.ptp(delays) < T and np.ptp(dopplers) < 1.0 / T)


def channel_to_integer_indices(ch: DDChannel, grid: DDGrid) -> list[tuple[complex, int, int]]:
    """Express every path on the integer DD lattice.

    Args:
        ch: Channel.
        grid: Frame geometry with resolutions ``T/M`` and ``1/(N*T)``.

    Returns:
        List of ``(gain, delay index, Doppler index)``.
    """
    out = []
    for p in ch.paths:
        l = lattice_index(p.delay, grid.delay_resolution)
        k = lattice_index(p.doppler, grid.doppler_resolution)
        if l is None or k is None:
            raise ChannelError(
                f"Path (delay={p.delay}, Doppler={p.doppler}) is not on the integer DD lattice"
            )
        out.append((p.gain, l, k))
    return out


def _path_ticks(ch: DDChannel, dt: float) -> list[int]:
    ticks = []
    for p in ch.paths:
        t = lattice_index(p.delay, dt)
        if t is None:
            raise QuantizationError(f"Path delay {p.delay} s is not a multiple of dt={dt}")
        ticks.append(t)
    return ticks


def apply_paths(
    samples: np.ndarray, times: np.ndarray, ch: DDChannel, dt: float
) -> np.ndarray:
    """Apply the channel to one signal or to signals stacked along trailing axes.

    ``r(t) = sum_p h_p * exp(2j*pi*nu_p*(t - tau_p)) * s(t - tau_p)``; ``times`` are the input
    sample instants and the output grows by the largest path delay.

    Args:
        samples: Array of shape (L, ...).
        times: Input sample instants of shape (L,).
        ch: Channel with delays on the ``dt`` lattice.
        dt: Sample period.

    Returns:
        Array of shape (L + max_ticks, ...).
    """
    ticks = _path_ticks(ch, dt)
    L = samples.shape[0]
    out = np.zeros((L + max(ticks),) + samples.shape[1:], dtype=complex)
    extra = (slice(None),) + (None,) * (samples.ndim - 1)
    for p, d in zip(ch.paths, ticks):
        ramp = p.gain * np.exp(2j * np.pi * p.doppler * times)
        out[d : d + L] += ramp[extra] * samples
    return out


def apply_time_channel(s: TimeSignal, ch: DDChannel) -> TimeSignal:
    """Pass a sampled signal through the channel in the time domain.

    Args:
        s: Input signal.
        ch: Channel with delays on the sample lattice of ``s``.

    Returns:
        Output signal with the same origin, longer by the maximum delay.
    """
    out = apply_paths(s.samples, s.times(), ch, s.dt)
    return TimeSignal(out, s.sample_rate, t0=s.t0)


def _twisted_frame(X: DDFrame, ch: DDChannel) -> DDFrame:
    grid = X.grid
    M, N = grid.M, grid.N
    l = np.arange(M)[:, None]
    k = np.arange(N)[None, :]
    out = np.zeros((M, N), dtype=complex)
    for h, lp, kp in channel_to_integer_indices(ch, grid):
        lw, kw, phase = fold_indices(l - lp, k - kp, M, N)
        twist = np.exp(2j * np.pi * kp * (l - lp) / (M * N))
        out += h * twist * phase * X.data[lw, kw]
    return DDFrame(grid, out)


def _twisted_surface(S: DDSampledSurface, ch: DDChannel) -> DDSampledSurface:
    grid = S.grid
    tau_step, nu_step = S.tau_step, S.nu_step
    K = lattice_index(grid.T, tau_step)
    Nd = lattice_index(1.0 / grid.T, nu_step)
    a0 = lattice_index(float(S.tau_axis[0]), tau_step)
    b0 = lattice_index(float(S.nu_axis[0]), nu_step)
    if K is None or Nd is None or a0 is None or b0 is None:
        raise QuantizationError("Surface axes do not tile one delay and Doppler period")
    if len(S.tau_axis) < K or len(S.nu_axis) < Nd:
        raise CoverageError("Surface must cover at least one full delay and Doppler period")

    a = a0 + np.arange(len(S.tau_axis))[:, None]
    b = b0 + np.arange(len(S.nu_axis))[None, :]
    aw, bw, phase = fold_indices(a, b, K, Nd)
    cell = np.zeros((K, Nd), dtype=complex)
    cell[aw, bw] = S.values * np.conj(phase)
    scale = float(np.max(np.abs(S.values))) if S.values.size else 0.0
    residual = float(np.max(np.abs(S.values - phase * cell[aw, bw]))) if scale else 0.0
    if residual > 1e-9 * scale:
        raise ChannelError(f"Surface is not quasi-periodic (residual {residual:.3e})")

    tau = a * tau_step
    out = np.zeros(S.values.shape, dtype=complex)
    for p in ch.paths:
        d = lattice_index(p.delay, tau_step)
        e = lattice_index(p.doppler, nu_step)
        if d is None or e is None:
            raise QuantizationError(
                f"Path (delay={p.delay}, Doppler={p.doppler}) is off the surface lattice"
            )
        sw, tw, shift_phase = fold_indices(a - d, b - e, K, Nd)
        twist = np.exp(2j * np.pi * p.doppler * (tau - p.delay))
        out += p.gain * twist * shift_phase * cell[sw, tw]
    return DDSampledSurface(grid, out, S.tau_axis, S.nu_axis, source=f"{S.source}|channel")


@overload
def twisted_convolve_dd(S: DDFrame, ch: DDChannel) -> DDFrame: ...


@overload
def twisted_convolve_dd(S: DDSampledSurface, ch: DDChannel) -> DDSampledSurface: ...


def twisted_convolve_dd(
    S: Union[DDFrame, DDSampledSurface], ch: DDChannel
) -> Union[DDFrame, DDSampledSurface]:
    """Apply the channel in the DD domain as a twisted convolution.

    ``r(tau, nu) = sum_p h_p * exp(2j*pi*nu_p*(tau - tau_p)) * s(tau - tau_p, nu - nu_p)``, with
    arguments outside the fundamental rectangle folded quasi-periodically. Frames need an
    integer-lattice channel; sampled surfaces need paths on their own lattice and must be
    quasi-periodic.

    Args:
        S: DD frame or sampled Zak surface.
        ch: Channel.

    Returns:
        Object of the same type as ``S``.
    """
    if isinstance(S, DDFrame):
        return _twisted_frame(S, ch)
    return _twisted_surface(S, ch)


def add_awgn(
    s: TimeSignal, noise: NoiseSpec, rng: Optional[np.random.Generator] = None
) -> TimeSignal:
    """Add circularly-symmetric complex Gaussian noise of variance ``N0`` per sample.

    Args:
        s: Input signal.
        noise: Noise level and seed.
        rng: Generator to draw from instead of ``noise.rng_seed``.

    Returns:
        Noisy copy of ``s``.
    """
    if noise.N0 == 0:
        return TimeSignal(s.samples.copy(), s.sample_rate, s.t0)
    if rng is None:
        rng = np.random.default_rng(noise.rng_seed)
    n = len(s)
    w = np.sqrt(noise.N0 / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return TimeSignal(s.samples + w, s.sample_rate, s.t0)
