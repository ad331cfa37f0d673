"""OFDM (discrete multi-tone) baseline sharing the DD modem's channel and detector harness.

Column ``n`` of an M x N frame is one OFDM symbol of duration T carrying M subcarriers spaced
``1/T`` apart, preceded by its own cyclic prefix. The frame-level prefix budget ``cp_len`` is
split over the N symbols, ``ceil(cp_len / N)`` IDZT samples each.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import fft

from .channel import DDChannel, apply_paths
from .errors import CoverageError, DimensionError, QuantizationError
from .grid import DDFrame, DDGrid, TimeSignal, lattice_index
from .modem import PROBE_CHUNK, EffectiveChannel, FrameTransform, band_half_width
from .zak import block_dft_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OfdmConfig:
    """OFDM baseline geometry.

    Attributes:
        grid: Frame geometry; M subcarriers, N symbols.
        cp_len: Frame-level prefix budget in samples of spacing ``T/M``.
    """

    grid: DDGrid
    cp_len: int = 0

    def __post_init__(self) -> None:
        if self.cp_len < 0:
            raise DimensionError(f"Invalid cp_len value: {self.cp_len} (must be >= 0)")

    @property
    def cp_per_symbol(self) -> int:
        """Prefix per OFDM symbol in samples of spacing ``T/M``."""
        return math.ceil(self.cp_len / self.grid.N)

    @property
    def symbol_samples(self) -> int:
        """Output samples per OFDM symbol including its prefix."""
        return (self.grid.M + self.cp_per_symbol) * self.grid.osr

    @property
    def num_samples(self) -> int:
        """Output samples per frame."""
        return self.grid.N * self.symbol_samples

    @property
    def t0(self) -> float:
        """Time of the first sample; the first useful part starts at 0."""
        return -self.cp_per_symbol * self.grid.delay_resolution


def _modulate(X: np.ndarray, cfg: OfdmConfig) -> np.ndarray:
    """Samples of frames stacked as (M, N, B); returns (num_samples, B)."""
    grid = cfg.grid
    K = grid.samples_per_period
    cp = cfg.cp_per_symbol * grid.osr
    padded = np.zeros((K,) + X.shape[1:], dtype=complex)
    padded[: grid.M] = X
    symbols = (K / math.sqrt(grid.T)) * fft.ifft(padded, axis=0)
    with_cp = np.concatenate([symbols[K - cp :], symbols], axis=0)
    # (symbol_samples, N, B) -> symbol-major sample order
    return np.swapaxes(with_cp, 0, 1).reshape((cfg.num_samples,) + X.shape[2:])


def _demodulate(r: np.ndarray, i0: int, cfg: OfdmConfig) -> np.ndarray:
    """Subcarrier outputs (M, N, B) of samples (L, B) whose index ``i0`` is time 0."""
    grid = cfg.grid
    K = grid.samples_per_period
    starts = i0 + np.arange(grid.N) * cfg.symbol_samples
    if i0 < 0 or r.shape[0] < starts[-1] + K:
        raise CoverageError(
            f"Received signal with {r.shape[0]} samples does not cover {grid.N} OFDM symbols"
        )
    blocks = np.stack([r[s : s + K] for s in starts], axis=1)
    scale = grid.sample_period / math.sqrt(grid.T)
    return scale * fft.fft(blocks, axis=0)[: grid.M]


def ofdm_baseline(X: DDFrame, cfg: OfdmConfig) -> TimeSignal:
    """Modulate an M x N frame as N OFDM symbols with per-symbol cyclic prefix.

    Args:
        X: Frame indexed [subcarrier, symbol].
        cfg: OFDM configuration.

    Returns:
        Signal at the DD modem's sample rate starting at ``cfg.t0``.
    """
    grid = cfg.grid
    if (X.grid.M, X.grid.N) != (grid.M, grid.N):
        raise DimensionError(
            f"Frame of size {X.grid.M}x{X.grid.N} does not match OFDM grid {grid.M}x{grid.N}"
        )
    samples = _modulate(X.data[:, :, None], cfg)[:, 0]
    return TimeSignal(samples, grid.sample_rate, t0=cfg.t0)


def ofdm_receive(r: TimeSignal, cfg: OfdmConfig) -> DDFrame:
    """Remove each symbol's prefix and take its DFT; unit gain without a channel."""
    grid = cfg.grid
    if not np.isclose(r.sample_rate, grid.sample_rate, rtol=1e-9, atol=0.0):
        raise DimensionError(
            f"Signal rate {r.sample_rate} Hz does not match OFDM rate {grid.sample_rate} Hz"
        )
    i0 = lattice_index(-r.t0, grid.sample_period)
    if i0 is None:
        raise QuantizationError(f"Signal origin {r.t0} s is not on the sample lattice")
    return DDFrame(grid, _demodulate(r.samples[:, None], i0, cfg)[:, :, 0])


def ofdm_noise_variance(cfg: OfdmConfig, N0: float) -> float:
    """Per-subcarrier noise variance after the DFT for time-domain sample variance N0."""
    return N0 * cfg.grid.sample_period


def ofdm_effective_matrix(
    cfg: OfdmConfig, ch: DDChannel, threads: Optional[int] = None
) -> EffectiveChannel:
    """Probe the OFDM chain with every unit subcarrier symbol.

    ``H_DD`` maps vectorized frames (subcarrier index fastest) to receiver outputs and
    ``H_T = U^H H_DD U`` with U the per-symbol DFT, so the same detector can run on it.

    Args:
        cfg: OFDM configuration.
        ch: Channel with delays on the sample lattice.
        threads: Worker threads.

    Returns:
        Effective channel with ``transform`` set to the block DFT.
    """
    grid = cfg.grid
    MN = grid.size
    dt = grid.sample_period
    times = cfg.t0 + np.arange(cfg.num_samples) * dt
    i0 = cfg.cp_per_symbol * grid.osr

    def probe(cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        X = np.zeros((MN, len(cols)), dtype=complex)
        X[cols, np.arange(len(cols))] = 1.0
        frames = X.reshape((grid.N, grid.M, len(cols))).swapaxes(0, 1)
        r = apply_paths(_modulate(frames, cfg), times, ch, dt)
        out = _demodulate(r, i0, cfg)
        return cols, out.swapaxes(0, 1).reshape((MN, len(cols)))

    chunks = np.array_split(np.arange(MN), max(1, math.ceil(MN / PROBE_CHUNK)))
    H_DD = np.zeros((MN, MN), dtype=complex)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for cols, y in pool.map(probe, chunks):
            H_DD[:, cols] = y

    U = block_dft_matrix(grid)
    H_T = U.conj().T @ H_DD @ U
    L = band_half_width(H_T)
    logger.debug(f"OFDM effective channel, cp per symbol {cfg.cp_per_symbol}: band L={L}")
    return EffectiveChannel(grid, H_T, H_DD, L, FrameTransform.BLOCK_DFT)
