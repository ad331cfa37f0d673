"""Practical delay-Doppler modem: IDZT, cyclic prefix, pulse shaping, matched filtering, DZT.

The transmitter places the IDZT output of a frame on the delay lattice ``t = i * T/M`` and
shapes every sample with the time dual ``FW_T`` of the frequency window. With periodic shaping
(the default) the filter is its ``N*T``-periodization applied to the cyclically extended frame,
so the cyclic prefix is the periodic continuation itself. With linear shaping the last
``cp_len`` IDZT samples are prepended and filtered by the literal ``FW_T``. The result is then
truncated by the time window, which covers the frame and the prefix.

``cp_len`` counts IDZT output samples (spacing ``T/M``).
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
from scipy import fft

from .ambiguity import AmbiguityModel, AmbiguitySurface, af_truncated_closed_form
from .channel import (
    ChannelPath,
    DDChannel,
    apply_paths,
    channel_to_integer_indices,
    crystallization_check,
    twisted_convolve_dd,
)
from .errors import (
    ChannelError,
    CoverageError,
    CrystallizationError,
    DimensionError,
    QuantizationError,
    UnsupportedWindowError,
)
from .grid import DDFrame, DDGrid, TimeSignal, lattice_index
from .pulses import (
    BasisConfig,
    Domain,
    WindowKind,
    WindowSpec,
    periodized_filter,
    window_dual,
    window_value,
)
from .zak import block_dft_matrix, dzt_array, dzt_matrix, fold_indices, idzt_array

logger = logging.getLogger(__name__)

# Probe columns per worker task in effective_time_matrix.
PROBE_CHUNK = 64

# Entries below this fraction of the peak are outside the detected band.
BAND_TOL = 1e-10


class FrameTransform(str, Enum):
    """Unitary map between time-domain symbol vectors and frames."""

    DZT = "dzt"
    BLOCK_DFT = "block_dft"


def default_transmit_window(grid: DDGrid, basis: BasisConfig, cp_len: int) -> WindowSpec:
    """Transmit time window covering the frame and its cyclic prefix.

    A Rect window spans exactly ``N*T + cp`` starting at ``-cp``. An RRC window keeps that
    interval inside its flat part and adds a whole number of samples of roll-off on both
    sides.

    Args:
        grid: Frame geometry.
        basis: Basis whose time window kind and roll-off are reused.
        cp_len: Cyclic prefix length in IDZT samples.

    Returns:
        Time window on ``[0, span)`` measured from the first transmitted sample.
    """
    covered = grid.frame_duration + cp_len * grid.delay_resolution
    kind = basis.time_window.kind
    if kind is WindowKind.RECT:
        return WindowSpec(WindowKind.RECT, Domain.TIME, covered)
    if kind is WindowKind.RRC:
        beta = basis.time_window.beta
        width = covered / (1.0 - beta)
        excess = (1.0 + beta) * width - covered
        margin = math.ceil(excess / (2.0 * grid.sample_period) - 1e-9)
        span = covered + 2 * margin * grid.sample_period
        return WindowSpec(WindowKind.RRC, Domain.TIME, span, beta=beta, nominal_width=width)
    raise UnsupportedWindowError(f"No transmit window for time window kind '{kind.value}'")


@dataclass(frozen=True)
class ModemConfig:
    """Transmit/receive chain configuration.

    Attributes:
        grid: Frame geometry (M, N, T and osr must match ``basis.grid``).
        basis: Windows of the truncated basis.
        cp_len: Cyclic prefix length in IDZT samples.
        normalize: Apply the ``sqrt(N*T)`` factor at transmit and receive.
        periodic_shaping: Use the periodized shaping filter instead of the linear one.
        time_window: Transmit window; derived from the basis when omitted.
    """

    grid: DDGrid
    basis: BasisConfig
    cp_len: int = 0
    normalize: bool = True
    periodic_shaping: bool = True
    time_window: Optional[WindowSpec] = None

    def __post_init__(self) -> None:
        g, b = self.grid, self.basis.grid
        errors = []
        if (g.M, g.N, g.osr) != (b.M, b.N, b.osr) or not math.isclose(g.T, b.T):
            errors.append(
                f"Grid M={g.M}, N={g.N}, T={g.T}, osr={g.osr} does not match basis grid "
                f"M={b.M}, N={b.N}, T={b.T}, osr={b.osr}"
            )
        if self.cp_len < 0:
            errors.append(f"Invalid cp_len value: {self.cp_len} (must be >= 0)")
        elif self.cp_len > g.size:
            errors.append(f"Invalid cp_len value: {self.cp_len} (must be <= M*N={g.size})")
        if b.M_ext > g.samples_per_period:
            errors.append(
                f"Invalid osr value: {g.osr} (M*osr={g.samples_per_period} must be >= "
                f"M_ext={b.M_ext})"
            )
        if errors:
            raise DimensionError("; ".join(errors))

        if self.time_window is None:
            object.__setattr__(
                self, "time_window", default_transmit_window(g, self.basis, self.cp_len)
            )
        window = self.window
        if window.domain is not Domain.TIME:
            raise DimensionError("Transmit window must be defined in the time domain")
        covered = g.frame_duration + self.cp_duration
        if window.span < covered * (1.0 - 1e-12):
            raise DimensionError(
                f"Time window span {window.span:.6g} s is shorter than N*T + CP = {covered:.6g} s"
            )
        if self._margin() is None:
            raise QuantizationError(
                "Time window excess over the frame must split into whole samples on both sides"
            )

    @classmethod
    def create(
        cls,
        grid: DDGrid,
        time_kind: WindowKind = WindowKind.RECT,
        freq_kind: WindowKind = WindowKind.RECT,
        cp_len: int = 0,
        time_beta: float = 0.1,
        freq_beta: float = 0.3,
        normalize: bool = True,
        periodic_shaping: bool = True,
    ) -> "ModemConfig":
        """Build a modem together with its basis on the extended grid."""
        basis = BasisConfig.create(grid, time_kind, freq_kind, time_beta, freq_beta)
        return cls(basis.grid, basis, cp_len, normalize, periodic_shaping)

    @property
    def window(self) -> WindowSpec:
        """The transmit time window."""
        return self.time_window or default_transmit_window(self.grid, self.basis, self.cp_len)

    @property
    def cp_duration(self) -> float:
        """Cyclic prefix duration in seconds."""
        return self.cp_len * self.grid.delay_resolution

    @property
    def cp_samples(self) -> int:
        """Cyclic prefix length at the output sample rate."""
        return self.cp_len * self.grid.osr

    def _margin(self) -> Optional[int]:
        covered = self.grid.frame_duration + self.cp_duration
        return lattice_index((self.window.span - covered) / 2.0, self.grid.sample_period)

    @property
    def margin_samples(self) -> int:
        """Window roll-off samples on each side of the frame and prefix."""
        return int(self._margin() or 0)

    @property
    def start_index(self) -> int:
        """Index of the first transmitted sample on the ``dt`` lattice."""
        return -(self.cp_samples + self.margin_samples)

    @property
    def num_samples(self) -> int:
        """Transmitted samples per frame."""
        return int(round(self.window.span / self.grid.sample_period))

    @property
    def scale(self) -> float:
        """Normalization applied at transmit and again at receive."""
        return math.sqrt(self.grid.frame_duration) if self.normalize else 1.0

    def check_channel(self, ch: DDChannel) -> None:
        """Raise ChannelError when a path delay exceeds the cyclic prefix."""
        if ch.max_delay > self.cp_duration * (1.0 + 1e-9) + 1e-15:
            raise ChannelError(
                f"Channel delay {ch.max_delay:.6g} s exceeds the cyclic prefix "
                f"{self.cp_duration:.6g} s (cp_len={self.cp_len})"
            )


def _harmonics(cfg: ModemConfig) -> tuple[np.ndarray, np.ndarray]:
    grid = cfg.grid
    period = grid.frame_duration
    fw = cfg.basis.freq_window
    m = np.arange(int(math.ceil(fw.span * period - 1e-9)))
    coeff = window_value(fw, m / period) / period
    keep = coeff != 0.0
    return m[keep], coeff[keep]


def _window_at(cfg: ModemConfig, t: np.ndarray) -> np.ndarray:
    origin = cfg.start_index * cfg.grid.sample_period
    return cfg.scale * window_value(cfg.window, np.asarray(t) - origin)


def _pulse_matrix(cfg: ModemConfig, t: np.ndarray) -> np.ndarray:
    """Shaped pulse of every IDZT sample evaluated at times ``t``, shape (len(t), MN)."""
    grid = cfg.grid
    fw = cfg.basis.freq_window
    positions = np.arange(grid.size) * grid.delay_resolution
    lag = t[:, None] - positions[None, :]
    if cfg.periodic_shaping:
        return periodized_filter(fw, lag, grid.frame_duration)
    pulses = window_dual(fw, lag)
    if cfg.cp_len:
        tail = np.arange(grid.size - cfg.cp_len, grid.size)
        pulses[:, tail] += window_dual(fw, lag[:, tail] + grid.frame_duration)
    return pulses


def _shape_vectors(x: np.ndarray, cfg: ModemConfig) -> np.ndarray:
    """Shaped but unwindowed samples of IDZT vectors ``x`` (MN, B) over the transmit span."""
    grid = cfg.grid
    j = cfg.start_index + np.arange(cfg.num_samples)
    if cfg.periodic_shaping:
        L = grid.frame_samples
        m, coeff = _harmonics(cfg)
        spectrum = fft.fft(x, axis=0)
        acc = np.zeros((L,) + x.shape[1:], dtype=complex)
        np.add.at(acc, m % L, coeff[:, None] * spectrum[m % grid.size])
        periodic = L * fft.ifft(acc, axis=0)
        return periodic[j % L]

    dt = grid.sample_period
    positions = np.arange(-cfg.cp_len, grid.size) * grid.delay_resolution
    shaping = window_dual(cfg.basis.freq_window, j[:, None] * dt - positions[None, :])
    extended = np.concatenate([x[grid.size - cfg.cp_len :], x], axis=0)
    return shaping @ extended


def transmit_vectors(x: np.ndarray, cfg: ModemConfig) -> np.ndarray:
    """Transmit IDZT-domain vectors stacked as columns.

    Args:
        x: Array of shape (M*N, B).
        cfg: Modem configuration.

    Returns:
        Samples of shape (num_samples, B) starting at ``start_index * dt``.
    """
    grid = cfg.grid
    if x.ndim != 2 or x.shape[0] != grid.size:
        raise DimensionError(f"Expected vectors of shape ({grid.size}, B), got {x.shape}")
    t = (cfg.start_index + np.arange(cfg.num_samples)) * grid.sample_period
    return _window_at(cfg, t)[:, None] * _shape_vectors(x, cfg)


def _match_gated(w: np.ndarray, cfg: ModemConfig) -> np.ndarray:
    """Matched filter of windowed samples on ``[0, N*T)`` against every lattice pulse."""
    grid = cfg.grid
    dt = grid.sample_period
    if cfg.periodic_shaping:
        m, coeff = _harmonics(cfg)
        spectrum = fft.fft(w, axis=0)
        acc = np.zeros((grid.size,) + w.shape[1:], dtype=complex)
        np.add.at(acc, m % grid.size, np.conj(coeff)[:, None] * spectrum[m % grid.frame_samples])
        return dt * grid.size * fft.ifft(acc, axis=0)

    t = np.arange(grid.frame_samples) * dt
    positions = np.arange(grid.size) * grid.delay_resolution
    pulses = window_dual(cfg.basis.freq_window, t[:, None] - positions[None, :])
    return dt * (pulses.conj().T @ w)


def receive_vectors(r: np.ndarray, t0: float, cfg: ModemConfig) -> np.ndarray:
    """Matched-filter received samples (L, B) that start at ``t0``; returns (M*N, B)."""
    grid = cfg.grid
    dt = grid.sample_period
    i0 = lattice_index(-t0, dt)
    if i0 is None:
        raise QuantizationError(f"Signal origin {t0} s is not on the sample lattice")
    L = grid.frame_samples
    if i0 < 0 or r.shape[0] < i0 + L:
        raise CoverageError(
            f"Received signal from {t0:.6g} s with {r.shape[0]} samples does not cover "
            f"the frame [0, {grid.frame_duration:.6g}) s"
        )
    t = np.arange(L) * dt
    gate = np.conj(_window_at(cfg, t))
    return _match_gated(gate[:, None] * r[i0 : i0 + L], cfg)


def _check_frame(X: DDFrame, cfg: ModemConfig) -> None:
    if (X.grid.M, X.grid.N) != (cfg.grid.M, cfg.grid.N):
        raise DimensionError(
            f"Frame of size {X.grid.M}x{X.grid.N} does not match modem grid "
            f"{cfg.grid.M}x{cfg.grid.N}"
        )


def transmit(X: DDFrame, cfg: ModemConfig) -> TimeSignal:
    """Modulate one DD frame into a sampled baseband signal.

    Args:
        X: Frame of symbols.
        cfg: Modem configuration.

    Returns:
        Signal at rate ``M*osr/T`` whose first sample lies before the prefix.
    """
    _check_frame(X, cfg)
    x = idzt_array(X.data)[:, None]
    samples = transmit_vectors(x, cfg)[:, 0]
    grid = cfg.grid
    return TimeSignal(samples, grid.sample_rate, t0=cfg.start_index * grid.sample_period)


def transmit_stream(frames: Sequence[DDFrame], cfg: ModemConfig) -> TimeSignal:
    """Transmit consecutive frames every ``N*T + cp`` seconds, overlapping roll-off summed."""
    if not frames:
        raise DimensionError("transmit_stream needs at least one frame")
    grid = cfg.grid
    hop = (grid.size + cfg.cp_len) * grid.osr
    blocks = []
    for X in frames:
        _check_frame(X, cfg)
        blocks.append(idzt_array(X.data))
    shaped = transmit_vectors(np.stack(blocks, axis=1), cfg)
    out = np.zeros(hop * (len(frames) - 1) + cfg.num_samples, dtype=complex)
    for f in range(len(frames)):
        out[f * hop : f * hop + cfg.num_samples] += shaped[:, f]
    return TimeSignal(out, grid.sample_rate, t0=cfg.start_index * grid.sample_period)


def receive(r: TimeSignal, cfg: ModemConfig) -> DDFrame:
    """Demodulate the frame starting at ``t = 0`` of a received signal.

    Args:
        r: Received signal at the modem sample rate covering ``[0, N*T)``.
        cfg: Modem configuration.

    Returns:
        Matched-filtered DD frame.
    """
    grid = cfg.grid
    if not np.isclose(r.sample_rate, grid.sample_rate, rtol=1e-9, atol=0.0):
        raise DimensionError(
            f"Signal rate {r.sample_rate} Hz does not match modem rate {grid.sample_rate} Hz"
        )
    y = receive_vectors(r.samples[:, None], r.t0, cfg)[:, 0]
    return DDFrame(grid, dzt_array(y, grid.M, grid.N))


def chain_gain(cfg: ModemConfig) -> complex:
    """End-to-end gain of symbol (0, 0) through the noiseless identity channel."""
    x = np.zeros((cfg.grid.size, 1), dtype=complex)
    x[0, 0] = 1.0
    s = transmit_vectors(x, cfg)
    y = receive_vectors(s, cfg.start_index * cfg.grid.sample_period, cfg)
    return complex(y[0, 0])


def noise_variance_dd(cfg: ModemConfig, N0: float) -> float:
    """Average per-sample DD noise variance after the receiver for white noise of density N0.

    Args:
        cfg: Modem configuration.
        N0: Variance of each complex time-domain noise sample.

    Returns:
        ``N0 * ||R||_F**2 / (M*N)`` where R is the linear receive map.
    """
    grid = cfg.grid
    L = grid.frame_samples
    gate = np.conj(_window_at(cfg, np.arange(L) * grid.sample_period))
    total = 0.0
    for start in range(0, L, PROBE_CHUNK * 4):
        cols = np.arange(start, min(start + PROBE_CHUNK * 4, L))
        probe = np.zeros((L, len(cols)), dtype=complex)
        probe[cols, np.arange(len(cols))] = gate[cols]
        total += float(np.sum(np.abs(_match_gated(probe, cfg)) ** 2))
    return N0 * total / grid.size


@dataclass(frozen=True)
class EffectiveChannel:
    """Effective channel matrices of the modem chain.

    ``H_T`` maps time-domain symbol vectors to matched-filter outputs; ``H_DD`` is the same map
    between vectorized frames. ``transform`` names the unitary U with ``H_DD = U H_T U^H``:
    the DZT for DD signaling, a per-symbol DFT for the multicarrier baseline.
    """

    grid: DDGrid
    H_T: np.ndarray
    H_DD: np.ndarray
    band_half_width: int
    transform: FrameTransform = FrameTransform.DZT

    def __post_init__(self) -> None:
        object.__setattr__(self, "transform", FrameTransform(self.transform))
        shape = (self.grid.size, self.grid.size)
        if self.H_T.shape != shape or self.H_DD.shape != shape:
            raise DimensionError(
                f"Effective matrices {self.H_T.shape}, {self.H_DD.shape} must be {shape}"
            )

    def apply(self, X: DDFrame) -> DDFrame:
        """Noiseless DD output ``unvec(H_DD @ vec(X))``."""
        return DDFrame.from_vec(self.grid, self.H_DD @ X.vec())

    def unitary(self) -> np.ndarray:
        """Frame transform matrix U acting on time-domain symbol vectors."""
        if self.transform is FrameTransform.BLOCK_DFT:
            return block_dft_matrix(self.grid)
        return dzt_matrix(self.grid)

    def conjugation_residual(self) -> float:
        """Largest deviation of ``H_DD`` from ``U @ H_T @ U^H``."""
        U = self.unitary()
        return float(np.max(np.abs(U @ self.H_T @ U.conj().T - self.H_DD)))

    def save(self, path: Union[str, Path], header: Optional[dict[str, Any]] = None) -> Path:
        """Write both matrices and a header to a compressed ``.npz`` archive."""
        path = Path(path)
        meta = {"M": self.grid.M, "N": self.grid.N, "T": self.grid.T, "osr": self.grid.osr}
        meta.update(header or {})
        np.savez_compressed(
            path,
            H_T=self.H_T,
            H_DD=self.H_DD,
            band_half_width=self.band_half_width,
            transform=np.array(self.transform.value),
            header=np.array(json.dumps(meta, sort_keys=True)),
        )
        return path if path.suffix == ".npz" else path.with_suffix(path.suffix + ".npz")

    @classmethod
    def load(cls, path: Union[str, Path], grid: DDGrid) -> "EffectiveChannel":
        """Read matrices written by :meth:`save` for the given grid."""
        with np.load(Path(path)) as data:
            return cls(
                grid,
                data["H_T"],
                data["H_DD"],
                int(data["band_half_width"]),
                FrameTransform(str(data["transform"])),
            )


def band_half_width(H: np.ndarray, tol: float = BAND_TOL) -> int:
    """Largest cyclic distance between row and column among significant entries."""
    n = H.shape[0]
    peak = np.max(np.abs(H))
    if peak == 0.0:
        return 0
    rows, cols = np.nonzero(np.abs(H) >= tol * peak)
    d = (rows - cols) % n
    return int(np.max(np.minimum(d, n - d)))


def effective_time_matrix(
    cfg: ModemConfig, ch: DDChannel, threads: Optional[int] = None
) -> EffectiveChannel:
    """Probe the modem chain with every unit symbol vector.

    Args:
        cfg: Modem configuration.
        ch: Channel with delays on the sample lattice.
        threads: Worker threads (default lets the executor decide).

    Returns:
        Effective channel with ``H_DD = U @ H_T @ U^H`` for the unitary DZT matrix U.
    """
    grid = cfg.grid
    if not crystallization_check(ch, grid.T):
        raise CrystallizationError(
            f"Channel spreads exceed the crystallization region of T={grid.T}"
        )
    cfg.check_channel(ch)

    MN = grid.size
    dt = grid.sample_period
    t0 = cfg.start_index * dt
    times = t0 + np.arange(cfg.num_samples) * dt

    def probe(cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.zeros((MN, len(cols)), dtype=complex)
        x[cols, np.arange(len(cols))] = 1.0
        r = apply_paths(transmit_vectors(x, cfg), times, ch, dt)
        return cols, receive_vectors(r, t0, cfg)

    chunks = np.array_split(np.arange(MN), max(1, math.ceil(MN / PROBE_CHUNK)))
    H_T = np.zeros((MN, MN), dtype=complex)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for cols, y in pool.map(probe, chunks):
            H_T[:, cols] = y

    U = dzt_matrix(grid)
    H_DD = U @ H_T @ U.conj().T
    L = band_half_width(H_T)
    logger.debug(f"Effective channel {grid.M}x{grid.N}, {ch.num_paths} paths: band L={L}")
    return EffectiveChannel(grid, H_T, H_DD, L)


def effective_matrix_quadrature(cfg: ModemConfig, ch: DDChannel) -> np.ndarray:
    """Effective time-domain matrix from the coefficient integral on the sample lattice.

    Every entry is ``dt * sum_n conj(g_i(t_n)) * TW*(t_n) * r_j(t_n)`` over ``t_n`` in
    ``[0, N*T)``, where ``r_j`` is the channel output for pulse ``j``. Intended for small grids.

    Args:
        cfg: Modem configuration.
        ch: Channel with delays on the sample lattice.

    Returns:
        Matrix of shape (M*N, M*N).
    """
    grid = cfg.grid
    dt = grid.sample_period
    t = np.arange(grid.frame_samples) * dt
    matched = np.conj(_pulse_matrix(cfg, t))
    gate = np.conj(_window_at(cfg, t))
    H = np.zeros((grid.size, grid.size), dtype=complex)
    for p in ch.paths:
        shifted = t - p.delay
        ramp = p.gain * np.exp(2j * np.pi * p.doppler * shifted)
        weight = gate * ramp * _window_at(cfg, shifted)
        H += dt * matched.T @ (weight[:, None] * _pulse_matrix(cfg, shifted))
    return H


def io_integer_closed_form(X: DDFrame, ch: DDChannel) -> DDFrame:
    """DD output of an integer channel as a twisted convolution with quasi-periodic folding.

    ``Y[l, k] = sum_p h_p * exp(2j*pi*k_p*(l - l_p)/(M*N)) * alpha * X[(l-l_p) mod M,
    (k-k_p) mod N]`` with ``alpha = exp(-2j*pi*(k - k_p mod N)/N)`` when ``l < l_p``.
    """
    channel_to_integer_indices(ch, X.grid)
    return twisted_convolve_dd(X, ch)


def closed_form_dd_matrix(ch: DDChannel, grid: DDGrid) -> np.ndarray:
    """Matrix form of :func:`io_integer_closed_form` acting on ``vec(X)``."""
    M, N = grid.M, grid.N
    l = np.arange(M)[:, None]
    k = np.arange(N)[None, :]
    rows = np.broadcast_to(l + k * M, (M, N))
    H = np.zeros((grid.size, grid.size), dtype=complex)
    for h, lp, kp in channel_to_integer_indices(ch, grid):
        lw, kw, phase = fold_indices(l - lp, k - kp, M, N)
        coeff = h * np.exp(2j * np.pi * kp * (l - lp) / grid.size) * phase
        lw, kw, coeff = np.broadcast_arrays(lw, kw, coeff)
        np.add.at(H, (rows.ravel(), (lw + kw * M).ravel()), coeff.ravel())
    return H


def asymptotic_axes(path: ChannelPath, grid: DDGrid) -> tuple[np.ndarray, np.ndarray]:
    """Delay and Doppler offsets at which a path samples the basis ambiguity.

    Delays cover ``(l - l') * T/M - tau_p`` for every pair of delay bins; Dopplers cover the N
    offsets ``dk / (N*T) - nu_p`` with ``dk`` centred on the path's nearest Doppler bin.
    """
    M, N, T = grid.M, grid.N, grid.T
    tau = np.arange(-(M - 1), M) * (T / M) - path.delay
    k_path = int(np.round(path.doppler * N * T))
    dk = np.arange(N) + k_path - N // 2
    return tau, dk / (N * T) - path.doppler


def io_asymptotic(
    X: DDFrame,
    ch: DDChannel,
    cfg: BasisConfig,
    model: AmbiguityModel = AmbiguityModel.AUTO,
    surfaces: Optional[Sequence[AmbiguitySurface]] = None,
    prune: float = 1e-6,
) -> DDFrame:
    """Symbol-wise DD output through the basis ambiguity function.

    ``Y[l, k] = sum_p h_p sum_{l', k'} exp(2j*pi*nu_p*(tau_l - tau_p))
    * exp(2j*pi*nu_k' * (tau_l - tau_p - tau_l')) * X[l', k']
    * A(tau_l - tau_p - tau_l', nu_k - nu_p - nu_k')``.

    Args:
        X: Input frame.
        ch: Channel (fractional values allowed).
        cfg: Basis whose ambiguity function is used.
        model: Closed-form model when surfaces are computed here.
        surfaces: Optional precomputed ambiguity per path on :func:`asymptotic_axes`.
        prune: Ambiguity values below this fraction of the per-path peak are dropped.

    Returns:
        Output frame.
    """
    grid = cfg.grid
    M, N, T = grid.M, grid.N, grid.T
    if (X.grid.M, X.grid.N) != (M, N):
        raise DimensionError(f"Frame of size {X.grid.M}x{X.grid.N} does not match basis {M}x{N}")
    if surfaces is not None and len(surfaces) != ch.num_paths:
        raise DimensionError(f"Got {len(surfaces)} surfaces for {ch.num_paths} paths")

    l = np.arange(M)
    k = np.arange(N)
    tau_l = l * (T / M)
    nu_k = k / (N * T)
    dl_idx = l[:, None] - l[None, :] + M - 1
    Y = np.zeros((M, N), dtype=complex)
    for p_idx, path in enumerate(ch.paths):
        tau, nu = asymptotic_axes(path, grid)
        if surfaces is None:
            A = af_truncated_closed_form(cfg, tau, nu, model).values
        else:
            surface = surfaces[p_idx]
            if not (
                np.allclose(surface.tau_axis, tau, rtol=0.0, atol=1e-12 * T)
                and np.allclose(surface.nu_axis, nu, rtol=0.0, atol=1e-12 / T)
            ):
                raise DimensionError(f"Surface for path {p_idx} is not on the expected axes")
            A = surface.values
        peak = np.max(np.abs(A))
        A = np.where(np.abs(A) < prune * peak, 0.0, A)

        k_path = int(np.round(path.doppler * N * T))
        dk_idx = (k[:, None] - k[None, :] - k_path + N // 2) % N
        kernel = A[dl_idx[:, None, :, None], dk_idx[None, :, None, :]]
        lag = (tau_l[:, None] - path.delay - tau_l[None, :])[:, None, :, None]
        twist = np.exp(2j * np.pi * nu_k[None, None, None, :] * lag)
        inner = np.einsum("akbc,bc->ak", kernel * twist, X.data)
        Y += path.gain * np.exp(2j * np.pi * path.doppler * (tau_l - path.delay))[:, None] * inner
    return DDFrame(X.grid, Y)
