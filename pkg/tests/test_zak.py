"""Unit tests for discrete and sampled Zak transforms."""

import numpy as np
import pytest
from zak_dd_sim.errors import CoverageError, DimensionError, QuantizationError
from zak_dd_sim.grid import DDFrame, DDGrid, DDSampledSurface, TimeSignal
from zak_dd_sim.zak import (
    block_dft_matrix,
    dzt,
    dzt_matrix,
    fold_indices,
    idzt,
    izak_freq,
    izak_time,
    quasi_periodic_wrap,
    spectrum_of,
    zak_freq_sampled,
    zak_time_sampled,
)


def _random_vector(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


class TestDiscreteZak:
    """Test cases for dzt and idzt."""

    @pytest.fixture
    def grid4(self):
        """Create a 4 x 4 grid."""
        return DDGrid(M=4, N=4)

    def test_zero_input(self, grid4):
        """Test zero vector maps to zero frame."""
        assert np.all(dzt(np.zeros(16), grid4).data == 0)

    def test_unit_impulse(self, grid4):
        """Test impulse at index 0 spreads evenly along Doppler."""
        x = np.zeros(16)
        x[0] = 1.0
        out = dzt(x, grid4).data
        np.testing.assert_allclose(out[0], 0.5 * np.ones(4), atol=1e-15)
        np.testing.assert_allclose(out[1:], 0.0, atol=1e-15)

    def test_matches_brute_force(self, rng):
        """Test DZT against the direct double sum."""
        M, N = 16, 16
        grid = DDGrid(M=M, N=N)
        x = _random_vector(rng, M * N)
        expected = np.zeros((M, N), dtype=complex)
        for l in range(M):
            for k in range(N):
                n = np.arange(N)
                expected[l, k] = np.sum(x[l + n * M] * np.exp(-2j * np.pi * n * k / N))
        expected /= np.sqrt(N)
        np.testing.assert_allclose(dzt(x, grid).data, expected, atol=1e-12)

    def test_idzt_single_symbol(self, grid4):
        """Test IDZT of a single symbol at (0, 0)."""
        data = np.zeros((4, 4), dtype=complex)
        data[0, 0] = 1.0
        out = idzt(DDFrame(grid4, data))
        expected = np.zeros(16)
        expected[::4] = 0.5
        np.testing.assert_allclose(out, expected, atol=1e-15)

    @pytest.mark.parametrize("M", [4, 8, 16])
    @pytest.mark.parametrize("N", [4, 8, 16])
    def test_roundtrip_and_parseval(self, rng, M, N):
        """Test exact inversion and energy preservation on random frames."""
        grid = DDGrid(M=M, N=N)
        for _ in range(100):
            x = _random_vector(rng, M * N)
            X = dzt(x, grid)
            np.testing.assert_allclose(idzt(X), x, atol=1e-12)
            energy = np.sum(np.abs(x) ** 2)
            assert abs(np.sum(np.abs(X.data) ** 2) - energy) <= 1e-12 * energy

            frame = DDFrame(grid, _random_vector(rng, (M, N)))
            np.testing.assert_allclose(dzt(idzt(frame), grid).data, frame.data, atol=1e-12)

    def test_length_mismatch(self, grid4):
        """Test wrong input length raises DimensionError."""
        with pytest.raises(DimensionError):
            dzt(np.zeros(15), grid4)

    def test_accepts_time_signal(self, grid4, rng):
        """Test a TimeSignal is transformed through its samples."""
        x = _random_vector(rng, 16)
        np.testing.assert_array_equal(
            dzt(TimeSignal(x, sample_rate=8.0), grid4).data, dzt(x, grid4).data
        )


class TestTransformMatrices:
    """Test cases for dzt_matrix and block_dft_matrix."""

    @pytest.fixture
    def grid(self):
        """Create a non-square grid."""
        return DDGrid(M=4, N=6)

    def test_dzt_matrix_matches_dzt(self, grid, rng):
        """Test the matrix applied to a vector equals the vectorized DZT."""
        x = _random_vector(rng, grid.size)
        np.testing.assert_allclose(dzt_matrix(grid) @ x, dzt(x, grid).vec(), atol=1e-12)

    def test_block_dft_is_per_symbol_fft(self, grid, rng):
        """Test the block DFT transforms every column of the frame."""
        frame = DDFrame(grid, _random_vector(rng, (grid.M, grid.N)))
        expected = DDFrame(grid, np.fft.fft(frame.data, axis=0, norm="ortho")).vec()
        np.testing.assert_allclose(block_dft_matrix(grid) @ frame.vec(), expected, atol=1e-12)

    @pytest.mark.parametrize("build", [dzt_matrix, block_dft_matrix])
    def test_unitary(self, grid, build):
        """Test both matrices are unitary."""
        U = build(grid)
        np.testing.assert_allclose(U.conj().T @ U, np.eye(grid.size), atol=1e-12)


class TestQuasiPeriodicWrap:
    """Test cases for quasi_periodic_wrap."""

    @pytest.fixture
    def grid(self):
        """Create a 16 x 16 grid."""
        return DDGrid(M=16, N=16)

    def test_no_fold(self, grid):
        """Test indices inside the frame are unchanged."""
        assert quasi_periodic_wrap(3, 2, grid) == (3, 2, 1.0)

    def test_negative_delay_fold(self, grid):
        """Test a negative delay picks up the quasi-periodic phase."""
        l, k, phase = quasi_periodic_wrap(-2, 5, grid)
        assert (l, k) == (14, 5)
        assert phase == pytest.approx(np.exp(-2j * np.pi * 5 / 16))

    def test_doppler_fold_is_free(self, grid):
        """Test Doppler folding has unit phase."""
        l, k, phase = quasi_periodic_wrap(2, -3, grid)
        assert (l, k) == (2, 13)
        assert phase == pytest.approx(1.0)

    def test_round_trips(self, grid):
        """Test multiple folds return to the same index with unit-modulus phase."""
        for dl, dk in [(16, 0), (-16, 0), (0, 16), (32, -16), (-48, 48)]:
            l, k, phase = quasi_periodic_wrap(5 + dl, 7 + dk, grid)
            assert (l, k) == (5, 7)
            assert abs(phase) == pytest.approx(1.0)

    def test_consistent_with_dzt(self, rng):
        """Test folding matches the DZT of a periodically extended vector."""
        grid = DDGrid(M=4, N=4)
        x = _random_vector(rng, 16)
        X = dzt(x, grid).data
        # Z[l + M, k] computed from the shifted periodic sequence
        shifted = np.roll(x, -4)
        X_shift = dzt(shifted, grid).data
        for l in range(4):
            for k in range(4):
                lw, kw, phase = quasi_periodic_wrap(l + 4, k, grid)
                assert X_shift[l, k] == pytest.approx(phase * X[lw, kw])

    def test_fold_indices_matches_scalar(self, grid):
        """Test the vectorized fold agrees with the scalar wrap."""
        l = np.array([-17, -1, 0, 15, 16, 40])
        k = np.array([3, -5, 20, 7, -16, 9])
        lw, kw, phase = fold_indices(l, k, grid.M, grid.N)
        for i in range(len(l)):
            expected = quasi_periodic_wrap(int(l[i]), int(k[i]), grid)
            assert (lw[i], kw[i]) == expected[:2]
            assert phase[i] == pytest.approx(expected[2])


class TestSampledZak:
    """Test cases for the sampled continuous Zak transforms."""

    @pytest.fixture
    def grid(self):
        """Create an 8 x 8 grid with unit period."""
        return DDGrid(M=8, N=8, T=1.0, osr=2)

    @pytest.fixture
    def signal(self, grid, rng):
        """Create a random signal supported on three delay periods."""
        K = grid.samples_per_period
        return TimeSignal(_random_vector(rng, 3 * K), grid.sample_rate)

    def test_zero_signal(self, grid):
        """Test zero signal gives a zero surface."""
        x = TimeSignal(np.zeros(grid.samples_per_period), grid.sample_rate)
        assert np.all(zak_time_sampled(x, grid).values == 0)

    def test_single_spike(self, grid):
        """Test a spike at t=0 gives a flat Doppler profile at tau=0."""
        samples = np.zeros(grid.samples_per_period, dtype=complex)
        samples[0] = 0.7
        Z = zak_time_sampled(TimeSignal(samples, grid.sample_rate), grid)
        np.testing.assert_allclose(Z.values[0], np.sqrt(grid.T) * 0.7, atol=1e-15)
        np.testing.assert_allclose(Z.values[1:], 0.0, atol=1e-15)

    def test_quasi_periodicity(self, grid, signal):
        """Test delay quasi-periodicity and Doppler periodicity of the surface."""
        Z = zak_time_sampled(signal, grid, delay_periods=2, doppler_periods=2)
        K, Ne = grid.samples_per_period, grid.N_ext
        scale = np.max(np.abs(Z.values))
        phase = np.exp(2j * np.pi * Z.nu_axis * grid.T)
        delay_residual = Z.values[K:] - phase[None, :] * Z.values[:K]
        doppler_residual = Z.values[:, Ne:] - Z.values[:, :Ne]
        assert np.max(np.abs(delay_residual)) <= 1e-9 * scale
        assert np.max(np.abs(doppler_residual)) <= 1e-9 * scale

    def test_inverse_roundtrip(self, grid, signal):
        """Test izak_time recovers the signal over its support."""
        Z = zak_time_sampled(signal, grid, delay_periods=3)
        x = izak_time(Z)
        scale = np.max(np.abs(signal.samples))
        np.testing.assert_allclose(x.samples, signal.samples, atol=1e-9 * scale)
        assert x.sample_rate == pytest.approx(grid.sample_rate)
        assert x.t0 == 0.0

    def test_inverse_of_constant_row(self, grid):
        """Test a surface constant in Doppler at one delay gives a single spike."""
        K, Ne = grid.samples_per_period, grid.N_ext
        values = np.zeros((K, Ne), dtype=complex)
        values[3] = 2.0 - 1.0j
        tau = np.arange(K) * grid.sample_period
        nu = np.arange(Ne) / (Ne * grid.T)
        x = izak_time(DDSampledSurface(grid, values, tau, nu))
        expected = np.zeros(K, dtype=complex)
        expected[3] = np.sqrt(grid.T) * (2.0 - 1.0j)
        np.testing.assert_allclose(x.samples, expected, atol=1e-12)

    def test_inverse_requires_one_doppler_period(self, grid, signal):
        """Test izak_time rejects a Doppler axis spanning two periods."""
        Z = zak_time_sampled(signal, grid, doppler_periods=2)
        with pytest.raises(CoverageError):
            izak_time(Z)

    def test_short_signal(self, grid):
        """Test a signal shorter than T raises CoverageError."""
        x = TimeSignal(np.ones(grid.samples_per_period - 1), grid.sample_rate)
        with pytest.raises(CoverageError):
            zak_time_sampled(x, grid)

    def test_rate_mismatch(self, grid):
        """Test a signal at the wrong rate raises DimensionError."""
        x = TimeSignal(np.ones(64), 2 * grid.sample_rate)
        with pytest.raises(DimensionError):
            zak_time_sampled(x, grid)

    def test_off_lattice_origin(self, grid):
        """Test a signal origin between samples raises QuantizationError."""
        x = TimeSignal(np.ones(64), grid.sample_rate, t0=0.3 * grid.sample_period)
        with pytest.raises(QuantizationError):
            zak_time_sampled(x, grid)

    def test_shifted_origin(self, grid, rng):
        """Test a signal starting at -T is placed by its origin."""
        K = grid.samples_per_period
        samples = _random_vector(rng, 2 * K)
        early = TimeSignal(samples, grid.sample_rate, t0=-grid.T)
        Z = zak_time_sampled(early, grid)
        # x(tau) is the second period of the samples
        x = izak_time(Z)
        np.testing.assert_allclose(x.samples, samples[K:], atol=1e-9)

    def test_frequency_definition_matches_time(self, grid, signal):
        """Test frequency-domain Zak transform equals the time-domain one."""
        Zt = zak_time_sampled(signal, grid, delay_periods=2)
        Zf = zak_freq_sampled(spectrum_of(signal), grid, delay_periods=2)
        scale = np.max(np.abs(Zt.values))
        np.testing.assert_allclose(Zf.values, Zt.values, atol=1e-9 * scale)

    def test_inverse_frequency_recovers_spectrum(self, grid, signal):
        """Test izak_freq returns the signal spectrum."""
        Z = zak_time_sampled(signal, grid)
        freqs, values = izak_freq(Z)
        expected = spectrum_of(signal)(freqs)
        np.testing.assert_allclose(values, expected, atol=1e-9 * np.max(np.abs(expected)))
        assert np.all(np.diff(freqs) > 0)
