"""Unit tests for mapping, demapping and the detectors."""

import logging

import numpy as np
import pytest
from scipy.special import erfc
from zak_dd_sim.channel import DDChannel
from zak_dd_sim.cli import build_scheme, simulate_frame
from zak_dd_sim.config import build_config
from zak_dd_sim.detect import (
    Constellation,
    cross_domain_detect,
    demap,
    hard_decision,
    lmmse_dd,
    map_bits,
)
from zak_dd_sim.errors import DimensionError
from zak_dd_sim.grid import DDFrame, DDGrid
from zak_dd_sim.modem import ModemConfig, effective_time_matrix
from zak_dd_sim.pulses import WindowKind
from zak_dd_sim.zak import dzt_matrix


def _noise(rng, n, N0):
    return np.sqrt(N0 / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


class TestConstellation:
    """Test cases for Constellation and bit mapping."""

    @pytest.fixture
    def qpsk(self):
        """Create the QPSK constellation."""
        return Constellation.qpsk()

    def test_qpsk_points(self, qpsk):
        """Test the Gray labelling and unit energy of QPSK."""
        assert qpsk.bits_per_symbol == 2
        assert qpsk.energy == pytest.approx(1.0)
        assert qpsk.points[0] == pytest.approx((1 + 1j) / np.sqrt(2))
        assert qpsk.points[3] == pytest.approx((-1 - 1j) / np.sqrt(2))

    def test_invalid_size(self):
        """Test a constellation whose size is not a power of two is rejected."""
        with pytest.raises(DimensionError, match="power of two"):
            Constellation("bad", np.ones(3), np.zeros((3, 2)))

    def test_map_then_demap_recovers_bits(self, qpsk, small_grid, rng):
        """Test demapping a noiseless frame returns the mapped bits."""
        bits = rng.integers(0, 2, small_grid.size * 2)
        X = map_bits(bits, qpsk, small_grid)
        llrs = demap(X, qpsk, 1e-3)
        assert llrs.shape == (small_grid.size, 2)
        np.testing.assert_array_equal((llrs < 0).astype(int).reshape(-1), bits)
        assert np.all(np.abs(llrs) == pytest.approx(30.0))

    def test_map_delay_index_fastest(self, qpsk):
        """Test consecutive symbols fill the delay axis first."""
        grid = DDGrid(M=4, N=4)
        bits = np.zeros(grid.size * 2, dtype=int)
        bits[2:4] = 1
        X = map_bits(bits, qpsk, grid)
        assert X.data[1, 0] == pytest.approx(qpsk.points[3])
        assert X.data[0, 1] == pytest.approx(qpsk.points[0])

    def test_bit_count_mismatch(self, qpsk, small_grid):
        """Test a bit stream of the wrong length raises DimensionError."""
        with pytest.raises(DimensionError, match="bits"):
            map_bits(np.zeros(7, dtype=int), qpsk, small_grid)

    def test_hard_decision(self, qpsk):
        """Test hard decisions snap to the nearest point."""
        y = np.array([0.3 + 0.1j, -2.0 + 0.5j, -0.1 - 0.2j])
        expected = qpsk.points[[0, 2, 3]]
        np.testing.assert_allclose(hard_decision(y, qpsk), expected)

    def test_awgn_bit_error_rate(self, qpsk):
        """Test hard bits from the demapper match the QPSK error rate in AWGN."""
        rng = np.random.default_rng(3)
        N0 = 0.5
        n = 100_000
        bits = rng.integers(0, 2, (n, 2))
        symbols = qpsk.points[bits[:, 0] * 2 + bits[:, 1]]
        llrs = demap(symbols + _noise(rng, n, N0), qpsk, N0)
        ber = np.mean((llrs < 0).astype(int) != bits)
        theory = 0.5 * erfc(np.sqrt(1.0 / N0) / np.sqrt(2.0))
        assert ber == pytest.approx(theory, rel=0.05)


class TestLmmse:
    """Test cases for lmmse_dd."""

    def test_scalar_channel_closed_form(self, small_grid, rng):
        """Test a scaled identity gives conj(c) y / (|c|^2 + N0)."""
        c, N0 = 0.7 - 0.4j, 0.2
        Y = DDFrame(small_grid, rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)))
        out = lmmse_dd(Y, c * np.eye(small_grid.size), N0)
        expected = np.conj(c) * Y.data / (abs(c) ** 2 + N0)
        np.testing.assert_allclose(out.estimate.data, expected, atol=1e-12)

    def test_matches_direct_solve(self, rng):
        """Test the estimate against a dense solve of the normal equations."""
        grid = DDGrid(M=4, N=4)
        n = grid.size
        H = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(n)
        Y = DDFrame.from_vec(grid, rng.standard_normal(n) + 1j * rng.standard_normal(n))
        N0 = 0.1
        out = lmmse_dd(Y, H, N0)
        direct = np.linalg.solve(H.conj().T @ H + N0 * np.eye(n), H.conj().T @ Y.vec())
        np.testing.assert_allclose(out.estimate.vec(), direct, atol=1e-9)

    def test_identity_noiseless(self, small_grid, rng):
        """Test the identity channel without noise returns the transmitted symbols."""
        c = Constellation.qpsk()
        bits = rng.integers(0, 2, small_grid.size * 2)
        X = map_bits(bits, c, small_grid)
        out = lmmse_dd(X, np.eye(small_grid.size), 0.0)
        np.testing.assert_allclose(out.symbols.data, X.data)
        np.testing.assert_array_equal(out.bits(), bits)
        assert out.residual == pytest.approx(0.0, abs=1e-9)

    def test_singular_system_is_regularized(self, small_grid, caplog):
        """Test a singular system logs a warning and still returns an estimate."""
        Y = DDFrame.zeros(small_grid)
        with caplog.at_level(logging.WARNING, logger="zak_dd_sim.detect"):
            out = lmmse_dd(Y, np.zeros((small_grid.size, small_grid.size)), 0.0)
        assert "singular" in caplog.text
        assert np.all(np.isfinite(out.llrs))

    def test_llr_signs_match_decisions(self, rng):
        """Test the LLR signs reproduce the hard decisions."""
        grid = DDGrid(M=4, N=4)
        c = Constellation.qpsk()
        n = grid.size
        H = np.eye(n) + 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        X = map_bits(rng.integers(0, 2, n * 2), c, grid)
        Y = DDFrame.from_vec(grid, H @ X.vec() + _noise(rng, n, 0.3))
        out = lmmse_dd(Y, H, 0.3)
        np.testing.assert_allclose(map_bits(out.bits(), c, grid).data, out.symbols.data)

    def test_shape_mismatch(self, small_grid):
        """Test a matrix of the wrong size raises DimensionError."""
        with pytest.raises(DimensionError):
            lmmse_dd(DDFrame.zeros(small_grid), np.eye(4), 0.1)


class TestCrossDomain:
    """Test cases for cross_domain_detect."""

    @pytest.fixture
    def qpsk(self):
        """Create the QPSK constellation."""
        return Constellation.qpsk()

    def test_identity_converges_immediately(self, small_grid, qpsk, rng):
        """Test the noiseless identity channel is solved in one iteration."""
        X = map_bits(rng.integers(0, 2, small_grid.size * 2), qpsk, small_grid)
        y = dzt_matrix(small_grid).conj().T @ X.vec()
        out = cross_domain_detect(y, np.eye(small_grid.size), 0.0, qpsk, small_grid)
        assert out.converged
        assert out.iterations == 1
        np.testing.assert_allclose(out.symbols.data, X.data)
        assert out.residual == pytest.approx(0.0, abs=1e-9)

    def test_llr_signs_match_decisions(self, small_grid, qpsk, rng):
        """Test the returned LLRs agree with the returned decisions."""
        n = small_grid.size
        H = np.eye(n) + 0.2 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        x = map_bits(rng.integers(0, 2, n * 2), qpsk, small_grid).vec()
        U = dzt_matrix(small_grid)
        y = H @ (U.conj().T @ x) + _noise(rng, n, 0.2)
        out = cross_domain_detect(y, H, 0.2, qpsk, small_grid)
        np.testing.assert_allclose(map_bits(out.bits(), qpsk, small_grid).data, out.symbols.data)

    def test_not_worse_than_lmmse(self, qpsk):
        """Test the iterative detector makes no more errors than LMMSE on a real channel."""
        rng = np.random.default_rng(17)
        cfg = ModemConfig.create(DDGrid(M=8, N=8), WindowKind.RRC, WindowKind.RRC, cp_len=3)
        grid = cfg.grid
        ch = DDChannel.from_paths([(0.8, 0.0, 0.0), (0.5j, 1 / 8, 0.15), (0.3, 2 / 8, -0.25)])
        eff = effective_time_matrix(cfg, ch)
        U = dzt_matrix(grid)
        N0 = 0.05 * float(np.mean(np.abs(np.diag(eff.H_DD)) ** 2))
        errors_cd = errors_lmmse = 0
        for _ in range(20):
            bits = rng.integers(0, 2, grid.size * 2)
            x = map_bits(bits, qpsk, grid).vec()
            y = eff.H_T @ (U.conj().T @ x) + _noise(rng, grid.size, N0)
            cd = cross_domain_detect(y, eff.H_T, N0, qpsk, grid, unitary=U)
            lm = lmmse_dd(DDFrame.from_vec(grid, U @ y), eff.H_DD, N0, qpsk)
            errors_cd += int(np.sum(cd.bits() != bits))
            errors_lmmse += int(np.sum(lm.bits() != bits))
        assert errors_cd <= errors_lmmse * 1.05 + 3

    @pytest.mark.slow
    def test_fractional_link_at_14db(self):
        """Test the 16 x 16 four-path link at 14 dB, against LMMSE on the same frames."""
        errors: dict[str, int] = {}
        for kind in ("cross_domain", "lmmse"):
            config = build_config(
                {
                    "channel": {"seed": 3},
                    "detector": {"kind": kind},
                    "sweep": {"snr_db": [14.0], "frames": 20, "schemes": ["rect"]},
                }
            )
            schemes = [build_scheme("rect", config)]
            errors[kind] = total = 0
            for seed in np.random.SeedSequence(3).spawn(20):
                (outcome,) = simulate_frame(schemes, config, seed)["rect"]
                errors[kind] += int(np.sum(outcome.output.bits() != outcome.bits))
                total += outcome.bits.size
        assert errors["cross_domain"] / total < 1e-3
        assert errors["cross_domain"] <= errors["lmmse"]

    def test_iteration_limit_warns(self, small_grid, qpsk, rng, caplog):
        """Test hitting max_iters logs a warning and reports no convergence."""
        n = small_grid.size
        H = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        y = _noise(rng, n, 1.0)
        with caplog.at_level(logging.WARNING, logger="zak_dd_sim.detect"):
            out = cross_domain_detect(y, H, 1.0, qpsk, small_grid, max_iters=1, tol=0.0)
        assert not out.converged
        assert "max_iters" in caplog.text
        # the single iterate is returned
        assert out.iterations == 1
        assert out.llrs.shape == (n, 2)
        assert np.isfinite(out.residual)

    @pytest.mark.parametrize(
        "kwargs,match",
        [
            ({"max_iters": 0}, "max_iters"),
            ({"damping": 0.0}, "damping"),
            ({"damping": 1.5}, "damping"),
        ],
    )
    def test_invalid_arguments(self, small_grid, qpsk, kwargs, match):
        """Test invalid iteration settings raise DimensionError."""
        n = small_grid.size
        with pytest.raises(DimensionError, match=match):
            cross_domain_detect(np.zeros(n), np.eye(n), 0.1, qpsk, small_grid, **kwargs)

    def test_shape_mismatch(self, small_grid, qpsk):
        """Test an observation of the wrong length raises DimensionError."""
        with pytest.raises(DimensionError):
            cross_domain_detect(np.zeros(5), np.eye(small_grid.size), 0.1, qpsk, small_grid)
