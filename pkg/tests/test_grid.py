"""Unit tests for frame geometry and signal containers."""

import numpy as np
import pytest
from zak_dd_sim.errors import DimensionError
from zak_dd_sim.grid import (
    DDFrame,
    DDGrid,
    DDSampledSurface,
    TimeSignal,
    lattice_index,
)


class TestDDGrid:
    """Test cases for DDGrid."""

    def test_extended_sizes_default_to_frame_sizes(self):
        """Test M_ext and N_ext fall back to M and N."""
        grid = DDGrid(M=16, N=8)
        assert grid.M_ext == 16
        assert grid.N_ext == 8

    def test_derived_quantities(self):
        """Test sample period, duration and bandwidth."""
        grid = DDGrid(M=16, N=8, T=2.0, osr=2)
        assert grid.sample_period == pytest.approx(2.0 / 32)
        assert grid.sample_rate == pytest.approx(16.0)
        assert grid.frame_duration == pytest.approx(16.0)
        assert grid.bandwidth == pytest.approx(8.0)
        assert grid.frame_samples == 16 * 8 * 2
        assert grid.size == 128

    def test_invalid_values_are_reported_together(self):
        """Test every invalid field appears in the error."""
        with pytest.raises(DimensionError) as excinfo:
            DDGrid(M=0, N=4, osr=0)
        message = str(excinfo.value)
        assert "Invalid M value: 0" in message
        assert "Invalid osr value: 0" in message

    def test_extension_smaller_than_frame(self):
        """Test M_ext below M is rejected."""
        with pytest.raises(DimensionError, match="M_ext"):
            DDGrid(M=8, N=8, M_ext=4)

    def test_nonpositive_period(self):
        """Test T must be positive."""
        with pytest.raises(DimensionError, match="T value"):
            DDGrid(M=4, N=4, T=0.0)


class TestDDFrame:
    """Test cases for DDFrame."""

    def test_vec_is_delay_fastest(self, small_grid):
        """Test vectorization uses index l + k*M."""
        data = np.arange(64).reshape(8, 8).astype(complex)
        frame = DDFrame(small_grid, data)
        vec = frame.vec()
        assert vec[3 + 2 * 8] == data[3, 2]

    def test_from_vec_inverts_vec(self, small_grid, rng):
        """Test from_vec rebuilds the same matrix."""
        data = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        frame = DDFrame(small_grid, data)
        np.testing.assert_array_equal(DDFrame.from_vec(small_grid, frame.vec()).data, data)

    def test_shape_mismatch(self, small_grid):
        """Test wrong matrix shape raises DimensionError."""
        with pytest.raises(DimensionError):
            DDFrame(small_grid, np.zeros((8, 4)))


class TestTimeSignal:
    """Test cases for TimeSignal."""

    def test_times_and_energy(self):
        """Test sample instants and energy."""
        signal = TimeSignal(np.ones(4), sample_rate=2.0, t0=1.0)
        np.testing.assert_allclose(signal.times(), [1.0, 1.5, 2.0, 2.5])
        assert signal.energy() == pytest.approx(2.0)
        assert signal.duration == pytest.approx(2.0)

    def test_rejects_two_dimensional_samples(self):
        """Test multi-dimensional samples are rejected."""
        with pytest.raises(DimensionError):
            TimeSignal(np.zeros((2, 2)), sample_rate=1.0)


class TestDDSampledSurface:
    """Test cases for DDSampledSurface."""

    def test_nonuniform_axis(self, small_grid):
        """Test non-uniform axes are rejected."""
        with pytest.raises(DimensionError, match="uniformly"):
            DDSampledSurface(
                small_grid, np.zeros((3, 2)), np.array([0.0, 1.0, 3.0]), np.array([0.0, 1.0])
            )

    def test_decreasing_axis(self, small_grid):
        """Test decreasing axes are rejected."""
        with pytest.raises(DimensionError, match="increasing"):
            DDSampledSurface(
                small_grid, np.zeros((2, 2)), np.array([1.0, 0.0]), np.array([0.0, 1.0])
            )

    def test_steps(self, small_grid):
        """Test axis spacing properties."""
        surface = DDSampledSurface(
            small_grid, np.zeros((2, 3)), np.array([0.0, 0.5]), np.array([0.0, 0.25, 0.5])
        )
        assert surface.tau_step == pytest.approx(0.5)
        assert surface.nu_step == pytest.approx(0.25)


class TestLatticeIndex:
    """Test cases for lattice_index."""

    def test_on_lattice(self):
        """Test on-lattice values return their index."""
        assert lattice_index(0.375, 0.125) == 3
        assert lattice_index(-0.25, 0.125) == -2

    def test_off_lattice(self):
        """Test off-lattice values return None."""
        assert lattice_index(0.3, 0.125) is None
