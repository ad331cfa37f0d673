"""Constellation mapping, soft demapping and the LMMSE and cross-domain iterative detectors."""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from .errors import DimensionError
from .grid import DDFrame, DDGrid
from .zak import dzt_matrix

logger = logging.getLogger(__name__)

# LLR magnitude clamp.
LLR_CLIP = 30.0

# Smallest noise variance used by the demapper.
NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class Constellation:
    """Unit-energy symbol alphabet with bit labels.

    ``labels[i]`` holds the bits of ``points[i]``, most significant bit first.
    """

    name: str
    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=complex)
        labels = np.asarray(self.labels, dtype=np.int8)
        errors = []
        size = len(points)
        if size < 2 or size & (size - 1):
            errors.append(f"Invalid constellation size: {size} (must be a power of two >= 2)")
        elif labels.shape != (size, int(math.log2(size))):
            errors.append(f"Label table shape {labels.shape} does not match {size} points")
        if errors:
            raise DimensionError("; ".join(errors))
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def qpsk(cls) -> "Constellation":
        """Gray-labelled QPSK, ``(b0, b1) -> ((1 - 2*b0) + 1j*(1 - 2*b1)) / sqrt(2)``."""
        labels = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])
        points = ((1 - 2 * labels[:, 0]) + 1j * (1 - 2 * labels[:, 1])) / math.sqrt(2.0)
        return cls("qpsk", points, labels)

    @property
    def bits_per_symbol(self) -> int:
        """Bits carried by one symbol."""
        return int(self.labels.shape[1])

    @property
    def energy(self) -> float:
        """Mean symbol energy."""
        return float(np.mean(np.abs(self.points) ** 2))


@dataclass(frozen=True)
class DetectorOutput:
    """Result of a detector run on one frame.

    Attributes:
        symbols: Hard symbol decisions.
        llrs: Bit LLRs of shape (M*N, bits_per_symbol); positive favours bit 0.
        estimate: Soft symbol estimates the decisions were taken from.
        iterations: Iterations used (1 for one-shot detectors).
        residual: ``||y - H x_hard||`` of the returned decisions.
        converged: False when an iterative detector hit its iteration limit.
    """

    symbols: DDFrame
    llrs: np.ndarray
    estimate: DDFrame
    iterations: int = 1
    residual: float = 0.0
    converged: bool = True

    def bits(self) -> np.ndarray:
        """Hard bits consistent with the LLR signs, symbol-major."""
        return (self.llrs < 0).astype(np.int8).reshape(-1)


def map_bits(bits: np.ndarray, c: Constellation, grid: DDGrid) -> DDFrame:
    """Map a bit stream onto a frame in vectorized order (delay index fastest).

    Args:
        bits: 0/1 array of length ``M*N*bits_per_symbol``.
        c: Constellation.
        grid: Frame geometry.

    Returns:
        Frame of constellation points.
    """
    bits = np.asarray(bits, dtype=np.int64).reshape(-1)
    k = c.bits_per_symbol
    expected = grid.size * k
    if bits.size != expected:
        raise DimensionError(f"Got {bits.size} bits, frame needs M*N*{k}={expected}")
    weights = 1 << np.arange(k - 1, -1, -1)
    index = bits.reshape(grid.size, k) @ weights
    lookup = np.empty(len(c.points), dtype=np.int64)
    lookup[c.labels.astype(np.int64) @ weights] = np.arange(len(c.points))
    return DDFrame.from_vec(grid, c.points[lookup[index]])


def demap(
    y: Union[DDFrame, np.ndarray],
    c: Constellation,
    noise_var: Union[float, np.ndarray],
) -> np.ndarray:
    """Exact Gaussian bit LLRs ``log P(b=0|y) - log P(b=1|y)`` with equiprobable symbols.

    Args:
        y: Observations (a frame is read in vectorized order).
        c: Constellation.
        noise_var: Scalar or per-observation complex noise variance.

    Returns:
        LLRs of shape (len(y), bits_per_symbol), clamped to +-30.
    """
    obs = y.vec() if isinstance(y, DDFrame) else np.asarray(y, dtype=complex).reshape(-1)
    var = np.maximum(np.broadcast_to(np.asarray(noise_var, dtype=float), obs.shape), NOISE_FLOOR)
    metric = -np.abs(obs[:, None] - c.points[None, :]) ** 2 / var[:, None]
    llrs = np.empty((obs.size, c.bits_per_symbol))
    for b in range(c.bits_per_symbol):
        zero = c.labels[:, b] == 0
        llrs[:, b] = logsumexp(metric[:, zero], axis=1) - logsumexp(metric[:, ~zero], axis=1)
    return np.clip(llrs, -LLR_CLIP, LLR_CLIP)


def hard_decision(y: np.ndarray, c: Constellation) -> np.ndarray:
    """Nearest constellation point of every observation."""
    y = np.asarray(y, dtype=complex).reshape(-1)
    return c.points[np.argmin(np.abs(y[:, None] - c.points[None, :]), axis=1)]


def _factor(A: np.ndarray) -> tuple[np.ndarray, bool]:
    try:
        return linalg.cho_factor(A)
    except linalg.LinAlgError:
        delta = 1e-10 * max(float(np.real(np.trace(A))) / A.shape[0], 1.0)
        logger.warning(f"LMMSE system is singular, regularizing with {delta:.3g} * I")
        return linalg.cho_factor(A + delta * np.eye(A.shape[0]))


def lmmse_dd(
    Y: DDFrame, H: np.ndarray, N0: float, c: Optional[Constellation] = None
) -> DetectorOutput:
    """One-shot LMMSE equalizer in the DD domain.

    ``x_hat = H^H A^-1 y`` with ``A = H H^H + N0 I`` and per-symbol bias
    ``mu = diag(H^H A^-1 H)``.
    The demapper sees ``x_hat / mu`` with variance ``(1 - mu) / mu``.

    Args:
        Y: Received frame.
        H: Effective DD matrix of shape (M*N, M*N).
        N0: Noise variance per DD sample.
        c: Constellation (QPSK by default).

    Returns:
        Detector output whose estimate is the unnormalized ``x_hat``.
    """
    c = c or Constellation.qpsk()
    grid = Y.grid
    if H.shape != (grid.size, grid.size):
        raise DimensionError(f"Channel matrix {H.shape} does not match M*N={grid.size}")
    if N0 < 0:
        raise DimensionError(f"Invalid N0 value: {N0} (must be >= 0)")
    y = Y.vec()
    A = H @ H.conj().T + N0 * np.eye(grid.size)
    factor = _factor(A)
    x_hat = H.conj().T @ linalg.cho_solve(factor, y)
    mu = np.real(np.einsum("ij,ij->j", H.conj(), linalg.cho_solve(factor, H)))
    mu = np.clip(mu, NOISE_FLOOR, 1.0)
    unbiased = x_hat / mu
    llrs = demap(unbiased, c, (1.0 - mu) / mu)
    decided = hard_decision(unbiased, c)
    residual = float(np.linalg.norm(y - H @ decided))
    return DetectorOutput(
        DDFrame.from_vec(grid, decided), llrs, DDFrame.from_vec(grid, x_hat), 1, residual
    )


def _symbol_posterior(
    z: np.ndarray, var: float, c: Constellation
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means and variances of symbols observed as ``z`` in noise of variance ``var``."""
    metric = -np.abs(z[:, None] - c.points[None, :]) ** 2 / max(var, NOISE_FLOOR)
    prob = np.exp(metric - logsumexp(metric, axis=1, keepdims=True))
    mean = prob @ c.points
    variance = np.sum(prob * np.abs(c.points[None, :] - mean[:, None]) ** 2, axis=1)
    return mean, variance


def cross_domain_detect(
    y: np.ndarray,
    H_T: np.ndarray,
    N0: float,
    c: Constellation,
    grid: DDGrid,
    unitary: Optional[np.ndarray] = None,
    max_iters: int = 10,
    damping: float = 0.5,
    tol: float = 1e-4,
) -> DetectorOutput:
    """Iterative detection alternating time-domain LMMSE and DD-domain symbol estimation.

    Each iteration runs an LMMSE estimate of the time-domain vector ``x_T = U^H x`` under the
    current Gaussian prior, turns it into an extrinsic observation of the DD symbols through
    ``U``, and computes symbol posteriors that become the next prior. Posterior updates after the
    first iteration are damped. The iterate with the smallest hard-decision residual is kept.

    Args:
        y: Time-domain observation ``H_T x_T + n`` of length M*N.
        H_T: Effective time-domain matrix.
        N0: Noise variance per sample of ``y``.
        c: Constellation.
        grid: Frame geometry.
        unitary: Map from time-domain vectors to frames (DZT matrix by default).
        max_iters: Iteration limit.
        damping: Weight of the new posterior in the damped update.
        tol: Stop when the largest change of the posterior means falls below this value.

    Returns:
        Detector output; ``converged`` is False when ``max_iters`` was reached.
    """
    n = grid.size
    y = np.asarray(y, dtype=complex).reshape(-1)
    if H_T.shape != (n, n) or y.shape != (n,):
        raise DimensionError(f"Observation {y.shape} and matrix {H_T.shape} must match M*N={n}")
    if max_iters < 1:
        raise DimensionError(f"Invalid max_iters value: {max_iters} (must be >= 1)")
    if not 0.0 < damping <= 1.0:
        raise DimensionError(f"Invalid damping value: {damping} (must be in (0, 1])")
    U = dzt_matrix(grid) if unitary is None else unitary
    noise = max(N0, NOISE_FLOOR)

    gram, V = linalg.eigh(H_T.conj().T @ H_T)
    gram = np.maximum(gram, 0.0)
    matched = V.conj().T @ (H_T.conj().T @ y)

    mean = np.zeros(n, dtype=complex)
    var = c.energy
    best: tuple[float, np.ndarray, np.ndarray, np.ndarray] = (math.inf, mean, mean, np.empty(0))
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        prior = U.conj().T @ mean
        post_var = 1.0 / (gram / noise + 1.0 / var)
        post_mean = V @ (post_var * (matched / noise + V.conj().T @ prior / var))
        eps = float(np.mean(post_var))
        ext_var = float(np.clip(eps * var / max(var - eps, 1e-300), 1e-12, 1e12))
        ext_mean = ext_var * (post_mean / eps - prior / var)
        z = U @ ext_mean

        new_mean, new_var = _symbol_posterior(z, ext_var, c)
        if it > 1:
            new_mean = damping * new_mean + (1.0 - damping) * mean
            new_var = damping * new_var + (1.0 - damping) * var
        change = float(np.max(np.abs(new_mean - mean)))
        mean = new_mean
        var = max(float(np.mean(new_var)), 1e-8)

        decided = hard_decision(z, c)
        residual = float(np.linalg.norm(y - H_T @ (U.conj().T @ decided)))
        # the first iterate is always kept
        if it == 1 or residual < best[0]:
            best = (residual, decided, z, demap(z, c, ext_var))
        logger.debug(f"Iteration {it}: residual={residual:.4g}, ext_var={ext_var:.3g}")
        if (it > 1 and change < tol) or float(np.mean(new_var)) < tol:
            converged = True
            break

    if not converged:
        logger.warning(f"Cross-domain detector stopped at max_iters={max_iters}")
    residual, decided, z, llrs = best
    return DetectorOutput(
        DDFrame.from_vec(grid, decided),
        llrs,
        DDFrame.from_vec(grid, z),
        iterations=it,
        residual=residual,
        converged=converged,
    )
