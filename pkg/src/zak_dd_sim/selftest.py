"""Numerical invariant suite run by the ``selftest`` subcommand."""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .ambiguity import dd_orthogonality_report
from .channel import apply_time_channel, sample_random_channel, twisted_convolve_dd
from .errors import InvariantError
from .grid import DDFrame, DDGrid, TimeSignal
from .modem import ModemConfig, effective_time_matrix, receive, transmit
from .pulses import BasisConfig, basis_zak_surface, truncated_basis_dd_closed_form
from .zak import dzt, dzt_array, idzt, idzt_array

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one invariant check."""

    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)


def _complex_normal(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def check_transform_exactness(rng: np.random.Generator, threads: Optional[int] = None) -> float:
    """Worst relative DZT round-trip and energy error over 100 random frames per size."""
    worst = 0.0
    for M in (4, 8, 16):
        for N in (4, 8, 16):
            x = _complex_normal(rng, (M * N, 100))
            X = dzt_array(x, M, N)
            roundtrip = np.max(np.abs(idzt_array(X) - x)) / np.max(np.abs(x))
            energy_x = np.sum(np.abs(x) ** 2, axis=0)
            energy_X = np.sum(np.abs(X) ** 2, axis=(0, 1))
            parseval = np.max(np.abs(energy_X - energy_x) / energy_x)
            worst = max(worst, float(roundtrip), float(parseval))
    return worst


def check_quasi_periodicity(rng: np.random.Generator, threads: Optional[int] = None) -> float:
    """Sampled Zak surfaces of pulsones: delay quasi-periodicity and Doppler periodicity."""
    cfg = BasisConfig.create(DDGrid(M=8, N=8))
    grid = cfg.grid
    K, Ne = grid.samples_per_period, grid.N_ext
    worst = 0.0
    for _ in range(3):
        l, k = int(rng.integers(grid.M)), int(rng.integers(grid.N))
        Z = basis_zak_surface(l, k, cfg, delay_periods=2, doppler_periods=2)
        scale = np.max(np.abs(Z.values))
        phase = np.exp(2j * np.pi * Z.nu_axis * grid.T)
        delay = np.max(np.abs(Z.values[K:] - phase * Z.values[:K])) / scale
        doppler = np.max(np.abs(Z.values[:, Ne:] - Z.values[:, :Ne])) / scale
        worst = max(worst, float(delay), float(doppler))
    return worst


def check_channel_commutation(rng: np.random.Generator, threads: Optional[int] = None) -> float:
    """DZT of the prefixed channel output against the twisted convolution of the DZT."""
    grid = DDGrid(M=8, N=8)
    M, N = grid.M, grid.N
    rate = M / grid.T
    cp = 5
    worst = 0.0
    for _ in range(20):
        X = DDFrame(grid, _complex_normal(rng, (M, N)))
        seed = int(rng.integers(2**31))
        ch = sample_random_channel(3, cp, 6, grid, fractional=False, rng_seed=seed)
        x = idzt(X)
        tx = TimeSignal(np.concatenate([x[-cp:], x]), rate, t0=-cp / rate)
        rx = apply_time_channel(tx, ch).samples[cp : cp + M * N]
        expected = twisted_convolve_dd(X, ch).data
        err = np.max(np.abs(dzt(rx, grid).data - expected)) / np.max(np.abs(expected))
        worst = max(worst, float(err))
    return worst


def check_lattice_orthogonality(rng: np.random.Generator, threads: Optional[int] = None) -> float:
    """Rect/Rect ambiguity: unit origin and zeros on the interior DD lattice."""
    report = dd_orthogonality_report(BasisConfig.create(DDGrid(M=8, N=8)))
    return max(report.worst_interior(), abs(report.origin_value - 1.0))


def check_closed_form(rng: np.random.Generator, threads: Optional[int] = None) -> float:
    """Zak transform of the sampled truncated pulsone against its closed form."""
    cfg = BasisConfig.create(DDGrid(M=8, N=8))
    Z = basis_zak_surface(0, 0, cfg)
    expected = truncated_basis_dd_closed_form(Z.tau_axis[:, None], Z.nu_axis[None, :], cfg)
    return float(np.max(np.abs(Z.values - expected)) / np.max(np.abs(expected)))


def check_matrix_consistency(rng: np.random.Generator, threads: Optional[int] = None) -> float:
    """Probed effective channel: chain agreement and DZT conjugation of H_T."""
    cfg = ModemConfig.create(DDGrid(M=8, N=8), cp_len=3)
    grid = cfg.grid
    seed = int(rng.integers(2**31))
    ch = sample_random_channel(3, 3, 2, grid, fractional=True, rng_seed=seed)
    eff = effective_time_matrix(cfg, ch, threads=threads)
    X = DDFrame(grid, _complex_normal(rng, (grid.M, grid.N)))
    expected = eff.apply(X).data
    got = receive(apply_time_channel(transmit(X, cfg), ch), cfg).data
    chain = float(np.max(np.abs(got - expected)) / np.max(np.abs(expected)))
    return max(chain, eff.conjugation_residual())


Check = Callable[[np.random.Generator, Optional[int]], float]

CHECKS: list[tuple[str, Check, float]] = [
    ("transform_exactness", check_transform_exactness, 1e-12),
    ("quasi_periodicity", check_quasi_periodicity, 1e-9),
    ("channel_commutation", check_channel_commutation, 1e-9),
    ("lattice_orthogonality", check_lattice_orthogonality, 1e-10),
    ("closed_form", check_closed_form, 1e-10),
    ("matrix_consistency", check_matrix_consistency, 1e-9),
]


def run_selftest(
    seed: int = 0, threads: Optional[int] = None, raise_on_failure: bool = False
) -> list[CheckResult]:
    """Run every invariant check.

    Args:
        seed: Seed of the random frames and channels.
        threads: Worker threads for the effective-channel probe.
        raise_on_failure: Raise InvariantError when any check fails.

    Returns:
        One result per check, in a fixed order.
    """
    rng = np.random.default_rng(seed)
    results = []
    for name, check, tolerance in CHECKS:
        result = CheckResult(name, check(rng, threads), tolerance)
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(level, f"{name}: residual {result.residual:.3e} (tolerance {tolerance:.0e})")
        results.append(result)

    failed = [r.name for r in results if not r.passed]
    if failed and raise_on_failure:
        raise InvariantError(f"Self-test failed: {', '.join(failed)}")
    return results
