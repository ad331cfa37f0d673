"""Link-level metrics: bit error rate, pragmatic capacity and power spectral density."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import signal, special

from .errors import DimensionError
from .grid import TimeSignal

logger = logging.getLogger(__name__)

# Below this many symbols a capacity estimate is flagged as low confidence.
MIN_CAPACITY_SAMPLES = 10_000

# dB floor for spectral bins with zero power.
DB_FLOOR = -300.0

GAUSS_HERMITE_POINTS = 80


@dataclass
class MetricSeries:
    """One curve of an experiment, exported as a CSV table.

    Attributes:
        x: Abscissa (SNR in dB or frequency in Hz).
        values: Metric value per abscissa point.
        stderr: Standard error per point (zero when not estimated).
        n_trials: Number of trials averaged per point.
        x_name: Column name of the abscissa.
        meta: Run metadata (scheme, seed, config hash, reference levels).
    """

    x: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    n_trials: np.ndarray
    x_name: str = "x"
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        self.n_trials = np.asarray(self.n_trials, dtype=np.int64)
        errors = []
        n = len(self.x)
        for name in ("values", "stderr", "n_trials"):
            if len(getattr(self, name)) != n:
                errors.append(f"Column '{name}' has {len(getattr(self, name))} rows, x has {n}")
        if not errors and not np.all(np.isfinite(self.values)):
            errors.append("Metric values must be finite")
        if errors:
            raise DimensionError("; ".join(errors))

    @classmethod
    def from_trials(
        cls,
        x: Sequence[float],
        trials: Sequence[Sequence[float]],
        x_name: str = "x",
        meta: Optional[dict[str, Any]] = None,
    ) -> "MetricSeries":
        """Average per-trial values at every abscissa point.

        Args:
            x: Abscissa values.
            trials: One sequence of per-trial values for every abscissa point.
            x_name: Column name of the abscissa.
            meta: Run metadata.

        Returns:
            Series of means with their standard errors.
        """
        if len(x) != len(trials):
            raise DimensionError(f"Got {len(trials)} trial groups for {len(x)} points")
        means, errs, counts = [], [], []
        for group in trials:
            arr = np.asarray(group, dtype=float)
            if arr.size == 0:
                raise DimensionError("Every point needs at least one trial")
            mean = math.fsum(arr) / arr.size
            means.append(mean)
            errs.append(float(np.std(arr, ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0)
            counts.append(arr.size)
        return cls(np.asarray(x), np.asarray(means), np.asarray(errs), counts, x_name, meta or {})

    def to_frame(self) -> pd.DataFrame:
        """Table with columns (x_name, value, stderr, n_trials)."""
        return pd.DataFrame(
            {
                self.x_name: self.x,
                "value": self.values,
                "stderr": self.stderr,
                "n_trials": self.n_trials,
            }
        )


@dataclass(frozen=True)
class CapacityEstimate:
    """Monte Carlo estimate of the pragmatic capacity in bits per channel use."""

    value: float
    stderr: float
    n_samples: int
    low_confidence: bool


def ber(tx_bits: np.ndarray, rx_bits: np.ndarray) -> float:
    """Fraction of positions where the two bit streams differ."""
    tx = np.asarray(tx_bits).reshape(-1)
    rx = np.asarray(rx_bits).reshape(-1)
    if tx.size != rx.size:
        raise DimensionError(f"Bit streams differ in length: {tx.size} vs {rx.size}")
    if tx.size == 0:
        raise DimensionError("Bit streams are empty")
    return int(np.count_nonzero(tx != rx)) / tx.size


def pragmatic_capacity(llrs: np.ndarray, tx_bits: np.ndarray) -> CapacityEstimate:
    """Bit-interleaved mutual information estimated from LLRs of known transmitted bits.

    Each bit level contributes ``1 - E[log2(1 + exp(-(1 - 2b) * LLR))]``; the levels are summed
    and the total is clipped to ``[0, bits_per_symbol]``.

    Args:
        llrs: LLRs of shape (n_symbols, bits_per_symbol), positive favouring bit 0.
        tx_bits: Transmitted bits, same number of entries (flat input is reshaped).

    Returns:
        Estimate with the standard error over symbols.
    """
    llrs = np.asarray(llrs, dtype=float)
    if llrs.ndim != 2:
        raise DimensionError(f"LLRs must be 2-D (symbols, bit levels), got shape {llrs.shape}")
    bits = np.asarray(tx_bits).reshape(-1)
    if bits.size != llrs.size:
        raise DimensionError(f"Got {bits.size} bits for {llrs.size} LLRs")
    bits = bits.reshape(llrs.shape)
    n, k = llrs.shape
    signed = (1.0 - 2.0 * bits) * llrs
    per_symbol = k - np.sum(np.logaddexp(0.0, -signed), axis=1) / math.log(2.0)
    value = float(np.clip(math.fsum(per_symbol) / n, 0.0, k))
    stderr = float(np.std(per_symbol, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    low = n < MIN_CAPACITY_SAMPLES
    if low:
        logger.warning(
            f"Capacity estimate from {n} symbols (< {MIN_CAPACITY_SAMPLES}) has low confidence"
        )
    return CapacityEstimate(value, stderr, n, low)


def qpsk_ber_theory(snr_db: np.ndarray) -> np.ndarray:
    """Uncoded Gray QPSK bit error rate in AWGN at ``Es/N0 = snr_db``."""
    snr = 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
    return 0.5 * special.erfc(np.sqrt(snr / 2.0))


def bicm_capacity_awgn(snr_db: np.ndarray) -> np.ndarray:
    """Bit-interleaved mutual information of Gray QPSK in AWGN at ``Es/N0 = snr_db``.

    Gray QPSK splits into two antipodal components of amplitude ``1/sqrt(2)`` in real noise of
    variance ``N0/2``; each is integrated with Gauss-Hermite quadrature.
    """
    snr_db = np.atleast_1d(np.asarray(snr_db, dtype=float))
    nodes, weights = np.polynomial.hermite.hermgauss(GAUSS_HERMITE_POINTS)
    out = np.empty_like(snr_db)
    a = 1.0 / math.sqrt(2.0)
    for i, s in enumerate(snr_db):
        sigma2 = 0.5 * 10.0 ** (-s / 10.0)
        y = a + math.sqrt(2.0 * sigma2) * nodes
        llr = 2.0 * a * y / sigma2
        loss = np.sum(weights * np.logaddexp(0.0, -llr)) / (math.sqrt(math.pi) * math.log(2.0))
        out[i] = 2.0 * (1.0 - loss)
    return out


def psd(
    s: TimeSignal,
    nfft: int = 256,
    overlap: float = 0.5,
    center: float = 0.0,
    band_half_width: Optional[float] = None,
) -> MetricSeries:
    """Welch power spectral density with Hann segments, in dB relative to the in-band mean.

    Args:
        s: Complex baseband signal.
        nfft: Segment length.
        overlap: Fraction of each segment shared with the next one.
        center: Frequency mapped to 0 on the output axis.
        band_half_width: In-band half width around ``center`` (default a quarter of the rate).

    Returns:
        Series over frequency offsets from ``center`` in ``[-fs/2, fs/2)``. ``meta`` holds the
        reference density ``in_band_density`` (linear, per Hz) and the bin width ``df``.
    """
    if nfft < 2:
        raise DimensionError(f"Invalid nfft value: {nfft} (must be >= 2)")
    if not 0.0 <= overlap < 1.0:
        raise DimensionError(f"Invalid overlap value: {overlap} (must be in [0, 1))")
    if len(s) < nfft:
        raise DimensionError(f"Signal with {len(s)} samples is shorter than nfft={nfft}")
    fs = s.sample_rate
    if band_half_width is None:
        band_half_width = fs / 4.0

    freqs, density = signal.welch(
        s.samples,
        fs=fs,
        window="hann",
        nperseg=nfft,
        noverlap=int(overlap * nfft),
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    offset = np.mod(freqs - center + fs / 2.0, fs) - fs / 2.0
    order = np.argsort(offset, kind="stable")
    offset, density = offset[order], density[order]

    in_band = np.abs(offset) <= band_half_width
    if not np.any(in_band):
        raise DimensionError(f"No PSD bin within {band_half_width} Hz of the center")
    ref = float(np.mean(density[in_band]))
    if ref <= 0.0:
        raise DimensionError("Signal has no in-band power")
    values = 10.0 * np.log10(np.maximum(density / ref, 10.0 ** (DB_FLOOR / 10.0)))
    n_segments = 1 + (len(s) - nfft) // (nfft - int(overlap * nfft))
    logger.debug(f"PSD: {n_segments} segments of {nfft} samples, fs={fs:.6g} Hz")
    meta = {
        "in_band_density": ref,
        "df": fs / nfft,
        "center": center,
        "band_half_width": band_half_width,
    }
    return MetricSeries(
        offset, values, np.zeros_like(values), np.full(len(values), n_segments), "freq_hz", meta
    )


def oob_power_db(series: MetricSeries, band_edge: float) -> float:
    """Power beyond ``|f| > band_edge`` relative to the power within it, in dB."""
    power = 10.0 ** (series.values / 10.0)
    outside = np.abs(series.x) > band_edge
    if not np.any(outside) or np.all(outside):
        raise DimensionError(f"Band edge {band_edge} Hz does not split the PSD frequency range")
    return float(10.0 * np.log10(np.sum(power[outside]) / np.sum(power[~outside])))
