"""Frame geometry and sampled signal containers."""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DimensionError

# Relative tolerance used when checking that reals sit on a lattice.
LATTICE_TOL = 1e-9


def lattice_index(value: float, step: float) -> Optional[int]:
    """Return value/step as an integer if it lies on the lattice, else None.

    Args:
        value: Real coordinate.
        step: Lattice spacing.

    Returns:
        Integer index, or None when value is off the lattice.
    """
    ratio = value / step
    nearest = int(np.round(ratio))
    if abs(ratio - nearest) > LATTICE_TOL * max(1.0, abs(ratio)):
        return None
    return nearest


@dataclass(frozen=True)
class DDGrid:
    """Delay-Doppler frame geometry.

    ``M_ext`` and ``N_ext`` default to ``M`` and ``N`` when left at 0.
    """

    M: int
    N: int
    T: float = 1.0
    osr: int = 2
    M_ext: int = 0
    N_ext: int = 0

    def __post_init__(self) -> None:
        if self.M_ext == 0:
            object.__setattr__(self, "M_ext", self.M)
        if self.N_ext == 0:
            object.__setattr__(self, "N_ext", self.N)

        errors = []
        if self.M < 1:
            errors.append(f"Invalid M value: {self.M} (must be >= 1)")
        if self.N < 1:
            errors.append(f"Invalid N value: {self.N} (must be >= 1)")
        if self.osr < 1:
            errors.append(f"Invalid osr value: {self.osr} (must be >= 1)")
        if not self.T > 0:
            errors.append(f"Invalid T value: {self.T} (must be > 0)")
        if self.M_ext < self.M:
            errors.append(f"Invalid M_ext value: {self.M_ext} (must be >= M={self.M})")
        if self.N_ext < self.N:
            errors.append(f"Invalid N_ext value: {self.N_ext} (must be >= N={self.N})")
        if errors:
            raise DimensionError("; ".join(errors))

    @property
    def size(self) -> int:
        """Number of symbols per frame (M*N)."""
        return self.M * self.N

    @property
    def samples_per_period(self) -> int:
        """Samples in one delay period T."""
        return self.M * self.osr

    @property
    def frame_samples(self) -> int:
        """Samples in one frame of duration N*T."""
        return self.M * self.N * self.osr

    @property
    def sample_period(self) -> float:
        """Sample spacing T/(M*osr) in seconds."""
        return self.T / (self.M * self.osr)

    @property
    def sample_rate(self) -> float:
        """Sample rate M*osr/T in Hz."""
        return self.M * self.osr / self.T

    @property
    def frame_duration(self) -> float:
        """Frame duration N*T in seconds."""
        return self.N * self.T

    @property
    def bandwidth(self) -> float:
        """Nominal bandwidth M/T in Hz."""
        return self.M / self.T

    @property
    def delay_resolution(self) -> float:
        """Delay bin width T/M."""
        return self.T / self.M

    @property
    def doppler_resolution(self) -> float:
        """Doppler bin width 1/(N*T)."""
        return 1.0 / (self.N * self.T)

    def with_extension(self, M_ext: int, N_ext: int) -> "DDGrid":
        """Return a copy with new extended sizes."""
        return replace(self, M_ext=M_ext, N_ext=N_ext)


@dataclass(frozen=True)
class DDFrame:
    """M x N complex symbol matrix indexed [delay, Doppler]."""

    grid: DDGrid
    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=complex)
        expected = (self.grid.M, self.grid.N)
        if data.shape != expected:
            raise DimensionError(f"Frame shape {data.shape} does not match grid {expected}")
        object.__setattr__(self, "data", data)

    @classmethod
    def zeros(cls, grid: DDGrid) -> "DDFrame":
        """Create an all-zero frame."""
        return cls(grid, np.zeros((grid.M, grid.N), dtype=complex))

    @classmethod
    def from_vec(cls, grid: DDGrid, vec: np.ndarray) -> "DDFrame":
        """Build a frame from a column-major vector (index l + k*M)."""
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (grid.size,):
            raise DimensionError(f"Vector length {vec.shape} does not match M*N={grid.size}")
        return cls(grid, vec.reshape((grid.M, grid.N), order="F"))

    def vec(self) -> np.ndarray:
        """Column-major vectorization, delay index fastest."""
        return self.data.reshape(-1, order="F")


@dataclass(frozen=True)
class TimeSignal:
    """Uniformly sampled complex baseband signal."""

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1:
            raise DimensionError(f"Signal samples must be 1-D, got shape {samples.shape}")
        if not self.sample_rate > 0:
            raise DimensionError(f"Invalid sample rate: {self.sample_rate} (must be > 0)")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def dt(self) -> float:
        """Sample period."""
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        """Covered duration len * dt."""
        return len(self.samples) * self.dt

    def times(self) -> np.ndarray:
        """Sample instants."""
        return self.t0 + np.arange(len(self.samples)) * self.dt

    def energy(self) -> float:
        """Energy sum |x|^2 dt."""
        return float(np.sum(np.abs(self.samples) ** 2) * self.dt)


def check_uniform_axis(name: str, axis: np.ndarray) -> None:
    """Raise DimensionError unless ``axis`` is 1-D, strictly increasing and uniform."""
    if axis.ndim != 1:
        raise DimensionError(f"{name} must be 1-D")
    if len(axis) < 2:
        return
    steps = np.diff(axis)
    if np.any(steps <= 0):
        raise DimensionError(f"{name} must be strictly increasing")
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise DimensionError(f"{name} must be uniformly spaced")


@dataclass(frozen=True)
class DDSampledSurface:
    """Complex function sampled on a rectangular (delay, Doppler) lattice."""

    grid: DDGrid
    values: np.ndarray
    tau_axis: np.ndarray
    nu_axis: np.ndarray
    source: str = field(default="")

    def __post_init__(self) -> None:
        tau = np.asarray(self.tau_axis, dtype=float)
        nu = np.asarray(self.nu_axis, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        check_uniform_axis("tau_axis", tau)
        check_uniform_axis("nu_axis", nu)
        if values.shape != (len(tau), len(nu)):
            raise DimensionError(
                f"Surface shape {values.shape} does not match axes ({len(tau)}, {len(nu)})"
            )
        object.__setattr__(self, "tau_axis", tau)
        object.__setattr__(self, "nu_axis", nu)
        object.__setattr__(self, "values", values)

    @property
    def tau_step(self) -> float:
        """Delay spacing (grid sample period for single-point axes)."""
        if len(self.tau_axis) > 1:
            return float(self.tau_axis[1] - self.tau_axis[0])
        return self.grid.sample_period

    @property
    def nu_step(self) -> float:
        """Doppler spacing (1/(N_ext*T) for single-point axes)."""
        if len(self.nu_axis) > 1:
            return float(self.nu_axis[1] - self.nu_axis[0])
        return 1.0 / (self.grid.N_ext * self.grid.T)
