"""Command-line experiment runner.

Every subcommand reads one experiment configuration, writes its tables to the output directory
and finishes with ``manifest.json`` listing the config hash, seeds and a SHA-256 per file.
"""

import argparse
import hashlib
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd

from . import __version__
from .ambiguity import af_truncated_closed_form, ambiguity_cuts, dd_orthogonality_report
from .channel import (
    DDChannel,
    NoiseSpec,
    add_awgn,
    apply_time_channel,
    sample_random_channel,
)
from .config import ConfigValidator, ExperimentConfig, load_config
from .detect import Constellation, DetectorOutput, cross_domain_detect, lmmse_dd, map_bits
from .errors import ConfigError, InvariantError
from .grid import DDFrame, DDGrid, TimeSignal
from .metrics import (
    MetricSeries,
    ber,
    bicm_capacity_awgn,
    oob_power_db,
    pragmatic_capacity,
    psd,
    qpsk_ber_theory,
)
from .modem import (
    EffectiveChannel,
    ModemConfig,
    chain_gain,
    effective_time_matrix,
    noise_variance_dd,
    receive,
    transmit,
    transmit_stream,
)
from .ofdm import (
    OfdmConfig,
    ofdm_baseline,
    ofdm_effective_matrix,
    ofdm_noise_variance,
    ofdm_receive,
)
from .pulses import BasisConfig, WindowKind, basis_zak_surface, pulsone_freq, pulsone_time
from .selftest import run_selftest

logger = logging.getLogger(__name__)

COMMANDS = ("ambiguity", "basis", "channel-matrix", "ber", "capacity", "psd", "selftest")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_IO = 4

SNR_DEFINITION = "Es/N0 per DD symbol after the receiver, unit-energy QPSK (Es = 1)"

# Out-of-band edge relative to each scheme's own band edge (1 + beta) * M/(2T).
OOB_EDGE_FACTOR = 1.25


@dataclass(frozen=True)
class LinkScheme:
    """One transmission scheme of the link-level sweep.

    Attributes:
        name: Scheme name as used in the configuration.
        grid: Frame geometry of the transmitted frames.
        transmit: Frame to waveform.
        receive: Waveform to received frame.
        effective: Effective channel for a channel draw.
        gain: Noiseless end-to-end gain of the chain.
        unit_noise: Received noise variance per DD sample for unit time-domain N0.
    """

    name: str
    grid: DDGrid
    transmit: Callable[[DDFrame], TimeSignal]
    receive: Callable[[TimeSignal], DDFrame]
    effective: Callable[[DDChannel], EffectiveChannel]
    gain: complex
    unit_noise: float


@dataclass
class FrameOutcome:
    """Detector result of one frame at one SNR point."""

    bits: np.ndarray
    output: DetectorOutput


def build_scheme(name: str, config: ExperimentConfig) -> LinkScheme:
    """Create the transmitter/receiver pair of a scheme on the configured grid."""
    g = config.grid
    grid = DDGrid(M=g.M, N=g.N, T=g.T, osr=g.osr)
    if name == "ofdm":
        ofdm_cfg = OfdmConfig(grid, config.modem.cp_len)
        return LinkScheme(
            name,
            grid,
            partial(ofdm_baseline, cfg=ofdm_cfg),
            partial(ofdm_receive, cfg=ofdm_cfg),
            partial(ofdm_effective_matrix, ofdm_cfg, threads=1),
            1.0 + 0j,
            ofdm_noise_variance(ofdm_cfg, 1.0),
        )
    kind = WindowKind.RECT if name == "rect" else WindowKind.RRC
    cfg = ModemConfig.create(
        grid,
        kind,
        kind,
        cp_len=config.modem.cp_len,
        time_beta=config.windows.time_beta,
        freq_beta=config.windows.freq_beta,
        normalize=config.modem.normalize,
        periodic_shaping=config.modem.periodic_shaping,
    )
    return LinkScheme(
        name,
        cfg.grid,
        partial(transmit, cfg=cfg),
        partial(receive, cfg=cfg),
        partial(effective_time_matrix, cfg, threads=1),
        chain_gain(cfg),
        noise_variance_dd(cfg, 1.0),
    )


def time_noise_level(scheme: LinkScheme, snr_db: float) -> float:
    """Time-domain N0 giving ``|gain|^2 / N0_dd = 10^(snr_db/10)`` at the detector."""
    return abs(scheme.gain) ** 2 / (10.0 ** (snr_db / 10.0) * scheme.unit_noise)


def simulate_frame(
    schemes: Sequence[LinkScheme],
    config: ExperimentConfig,
    seed: np.random.SeedSequence,
) -> dict[str, list[FrameOutcome]]:
    """Simulate one channel draw for every scheme and SNR point.

    Args:
        schemes: Schemes sharing the channel draw.
        config: Experiment configuration.
        seed: Seed of this frame's channel, bits and noise.

    Returns:
        Outcomes per scheme, one per SNR point in sweep order.
    """
    ch_cfg = config.channel
    det = config.detector
    rng = np.random.default_rng(seed)
    channel_seed = int(seed.generate_state(1)[0])
    c = Constellation.qpsk()
    g = config.grid
    ch = sample_random_channel(
        ch_cfg.P,
        ch_cfg.l_max,
        ch_cfg.k_max,
        DDGrid(M=g.M, N=g.N, T=g.T, osr=g.osr),
        fractional=ch_cfg.fractional,
        rng_seed=channel_seed,
        power_profile=ch_cfg.power_profile,
    )

    outcomes: dict[str, list[FrameOutcome]] = {}
    for scheme in schemes:
        eff = scheme.effective(ch)
        U = eff.unitary()
        results: list[FrameOutcome] = []
        for snr_db in config.sweep.snr_db:
            bits = rng.integers(0, 2, scheme.grid.size * c.bits_per_symbol)
            X = map_bits(bits, c, scheme.grid)
            N0 = time_noise_level(scheme, snr_db)
            r = add_awgn(apply_time_channel(scheme.transmit(X), ch), NoiseSpec(N0), rng=rng)
            Y = scheme.receive(r)
            N0_dd = N0 * scheme.unit_noise
            if det.kind == "lmmse":
                out = lmmse_dd(Y, eff.H_DD, N0_dd, c)
            else:
                y = U.conj().T @ Y.vec()
                out = cross_domain_detect(
                    y,
                    eff.H_T,
                    N0_dd,
                    c,
                    scheme.grid,
                    unitary=U,
                    max_iters=det.max_iters,
                    damping=det.damping,
                    tol=det.tol,
                )
            results.append(FrameOutcome(bits, out))
        outcomes[scheme.name] = results
    return outcomes


def _with_scheme(series: dict[str, MetricSeries]) -> pd.DataFrame:
    frames: list[pd.DataFrame] = []
    for name, s in series.items():
        frame = s.to_frame()
        frame.insert(0, "scheme", name)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class ExperimentRunner:
    """Runs one subcommand and records its artifacts."""

    def __init__(self, config: ExperimentConfig, threads: Optional[int] = None) -> None:
        """Initialize the runner.

        Args:
            config: Validated experiment configuration.
            threads: Worker threads for trials and probes (None lets the pool decide).
        """
        self.logger = logging.getLogger(__name__)
        self.config = config
        self.threads = threads
        self.invariant_failures: list[str] = []
        self._written: list[Path] = []
        self._sweep: Optional[dict[str, list[list[FrameOutcome]]]] = None

    def run(self, command: str, out_dir: Path) -> list[Path]:
        """Run a subcommand and write its manifest.

        Files written by a run that raises are removed before the exception propagates.

        Args:
            command: Subcommand name.
            out_dir: Output directory (created if missing).

        Returns:
            Paths of all written files, manifest last.
        """
        method = getattr(self, f"run_{command.replace('-', '_')}", None)
        if command not in COMMANDS or method is None:
            raise ConfigError([f"Unknown subcommand '{command}'"])
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        self._written = []
        self.invariant_failures = []
        self.logger.info(f"Running '{command}' into {out_dir}")
        try:
            files = method(out_dir)
            files.append(self._write_manifest(out_dir, command, files))
        except Exception:
            self._cleanup()
            raise
        for path in files:
            self.logger.info(f"Wrote {path}")
        return files

    def _cleanup(self) -> None:
        for path in self._written:
            try:
                path.unlink(missing_ok=True)
            except OSError as e:
                self.logger.error(f"Failed to remove partial output {path}: {e}")
        self._written = []

    def _track(self, path: Path) -> Path:
        self._written.append(path)
        return path

    def _write_table(self, frame: pd.DataFrame, out_dir: Path, stem: str) -> Path:
        if self.config.outputs.format == "json":
            path = self._track(out_dir / f"{stem}.json")
            frame.to_json(path, orient="records", indent=2, double_precision=12)
        else:
            path = self._track(out_dir / f"{stem}.csv")
            frame.to_csv(path, index=False, float_format="%.12g")
        return path

    def _write_manifest(self, out_dir: Path, command: str, files: list[Path]) -> Path:
        config = self.config
        manifest = {
            "version": __version__,
            "command": command,
            "config_sha256": config.digest(),
            "config": config.to_dict(),
            "seeds": {
                "base": config.channel.seed,
                "frames": config.sweep.frames,
                "derivation": "numpy SeedSequence(base).spawn(frames)",
            },
            "snr_definition": SNR_DEFINITION,
            "power_profile": config.channel.power_profile,
            "ofdm_cp_per_symbol": OfdmConfig(self._grid(), config.modem.cp_len).cp_per_symbol,
            "files": [{"path": p.name, "sha256": _sha256(p)} for p in files],
        }
        path = self._track(out_dir / "manifest.json")
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    def _grid(self) -> DDGrid:
        g = self.config.grid
        return DDGrid(M=g.M, N=g.N, T=g.T, osr=g.osr)

    def _bases(self) -> list[BasisConfig]:
        """Rect/Rect basis plus the configured one when it differs."""
        w = self.config.windows
        grid = self._grid()
        bases = [BasisConfig.create(grid)]
        configured = BasisConfig.create(
            grid, WindowKind(w.time_kind), WindowKind(w.freq_kind), w.time_beta, w.freq_beta
        )
        if configured.label != bases[0].label:
            bases.append(configured)
        return bases

    def run_ambiguity(self, out_dir: Path) -> list[Path]:
        """Ambiguity surfaces, zero-delay/zero-Doppler cuts and the lattice orthogonality table."""
        surfaces: list[pd.DataFrame] = []
        cuts: list[pd.DataFrame] = []
        lattice: list[pd.DataFrame] = []
        for cfg in self._bases():
            M, N, T = cfg.grid.M, cfg.grid.N, cfg.grid.T
            tau = np.arange(-2 * M, 2 * M + 1) * T / (2 * M)
            nu = np.arange(-2 * N, 2 * N + 1) / (2 * N * T)
            surface = af_truncated_closed_form(cfg, tau, nu)
            magnitude = np.abs(surface.values) / abs(surface.value_at(0.0, 0.0))
            tt, vv = np.meshgrid(tau, nu, indexing="ij")
            surfaces.append(
                pd.DataFrame(
                    {
                        "basis": cfg.label,
                        "tau_s": tt.ravel(),
                        "nu_hz": vv.ravel(),
                        "magnitude": magnitude.ravel(),
                        "magnitude_db": 20.0 * np.log10(np.maximum(magnitude.ravel(), 1e-15)),
                    }
                )
            )
            c = ambiguity_cuts(surface)
            cuts.append(
                pd.DataFrame(
                    {
                        "basis": cfg.label,
                        "cut": ["delay"] * len(c.tau_axis) + ["doppler"] * len(c.nu_axis),
                        "offset": np.concatenate([c.tau_axis, c.nu_axis]),
                        "magnitude": np.concatenate([c.delay_cut, c.doppler_cut]),
                    }
                )
            )
            report = dd_orthogonality_report(cfg)
            ll, kk = np.meshgrid(report.l1, report.k1, indexing="ij")
            lattice.append(
                pd.DataFrame(
                    {
                        "basis": cfg.label,
                        "l1": ll.ravel(),
                        "k1": kk.ravel(),
                        "magnitude": report.magnitudes.ravel(),
                        "orthogonal": report.flags.ravel(),
                        "boundary": report.boundary.ravel(),
                    }
                )
            )
            self.logger.info(
                f"{cfg.label}: worst interior lattice magnitude {report.worst_interior():.3e}"
            )
        return [
            self._write_table(pd.concat(surfaces, ignore_index=True), out_dir, "ambiguity"),
            self._write_table(pd.concat(cuts, ignore_index=True), out_dir, "ambiguity_cuts"),
            self._write_table(pd.concat(lattice, ignore_index=True), out_dir, "orthogonality"),
        ]

    def run_basis(self, out_dir: Path) -> list[Path]:
        """Time, frequency and DD samples of the basis function at the origin."""
        times: list[pd.DataFrame] = []
        spectra: list[pd.DataFrame] = []
        surfaces: list[pd.DataFrame] = []
        for cfg in self._bases():
            grid = cfg.grid
            s = pulsone_time(0, 0, cfg)
            times.append(
                pd.DataFrame(
                    {
                        "basis": cfg.label,
                        "t_s": s.times(),
                        "re": s.samples.real,
                        "im": s.samples.imag,
                        "magnitude": np.abs(s.samples),
                    }
                )
            )
            f = np.arange(-2 * 4 * grid.N_ext, (grid.M_ext + 2) * 4 * grid.N_ext) / (
                4 * grid.N_ext * grid.T
            )
            X = pulsone_freq(0, 0, cfg, f)
            spectra.append(
                pd.DataFrame(
                    {
                        "basis": cfg.label,
                        "f_hz": f,
                        "re": X.real,
                        "im": X.imag,
                        "magnitude": np.abs(X),
                    }
                )
            )
            Z = basis_zak_surface(0, 0, cfg)
            tt, vv = np.meshgrid(Z.tau_axis, Z.nu_axis, indexing="ij")
            surfaces.append(
                pd.DataFrame(
                    {
                        "basis": cfg.label,
                        "tau_s": tt.ravel(),
                        "nu_hz": vv.ravel(),
                        "magnitude": np.abs(Z.values).ravel(),
                    }
                )
            )
        return [
            self._write_table(pd.concat(times, ignore_index=True), out_dir, "basis_time"),
            self._write_table(pd.concat(spectra, ignore_index=True), out_dir, "basis_freq"),
            self._write_table(pd.concat(surfaces, ignore_index=True), out_dir, "basis_dd"),
        ]

    def run_channel_matrix(self, out_dir: Path) -> list[Path]:
        """Effective H_T/H_DD of one channel draw for the configured windows."""
        config = self.config
        c, w = config.channel, config.windows
        grid = self._grid()
        cfg = ModemConfig.create(
            grid,
            WindowKind(w.time_kind),
            WindowKind(w.freq_kind),
            cp_len=config.modem.cp_len,
            time_beta=w.time_beta,
            freq_beta=w.freq_beta,
            normalize=config.modem.normalize,
            periodic_shaping=config.modem.periodic_shaping,
        )
        ch = sample_random_channel(
            c.P, c.l_max, c.k_max, grid, c.fractional, c.seed, c.power_profile
        )
        eff = effective_time_matrix(cfg, ch, threads=self.threads)
        header = {"basis": cfg.basis.label, "cp_len": cfg.cp_len, "seed": c.seed}
        matrix = self._track(eff.save(out_dir / "channel_matrix", header))

        record = ch.to_record(grid)
        paths = pd.DataFrame(record["paths"])
        paths["delay_index"] = paths["delay_ticks"] / grid.osr
        paths["doppler_index"] = paths["doppler_hz"] / grid.doppler_resolution
        self.logger.info(
            f"Effective channel for {cfg.basis.label}: band half-width L={eff.band_half_width}, "
            f"conjugation residual {eff.conjugation_residual():.2e}"
        )
        return [matrix, self._write_table(paths, out_dir, "channel_paths")]

    def _link_sweep(self) -> dict[str, list[list[FrameOutcome]]]:
        """Outcomes per scheme and SNR point over all frames, computed once per runner."""
        if self._sweep is not None:
            return self._sweep
        config = self.config
        schemes = [build_scheme(name, config) for name in config.sweep.schemes]
        seeds = np.random.SeedSequence(config.channel.seed).spawn(config.sweep.frames)
        self.logger.info(
            f"Simulating {config.sweep.frames} frames for {', '.join(config.sweep.schemes)} "
            f"at SNR {config.sweep.snr_db} dB"
        )
        task = partial(simulate_frame, schemes, config)
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            frames = list(pool.map(task, seeds))
        points = range(len(config.sweep.snr_db))
        sweep = {s.name: [[frame[s.name][i] for frame in frames] for i in points] for s in schemes}
        self._sweep = sweep
        return sweep

    def run_ber(self, out_dir: Path) -> list[Path]:
        """Uncoded bit error rate per scheme and SNR, with the AWGN reference."""
        snr = self.config.sweep.snr_db
        series: dict[str, MetricSeries] = {}
        for name, points in self._link_sweep().items():
            trials = [[ber(o.bits, o.output.bits()) for o in point] for point in points]
            series[name] = MetricSeries.from_trials(snr, trials, "snr_db")
            for x, value in zip(snr, series[name].values):
                self.logger.info(f"{name} at {x:g} dB: BER {value:.3e}")
        theory = qpsk_ber_theory(np.asarray(snr))
        zeros = np.zeros(len(snr))
        series["awgn_theory"] = MetricSeries(snr, theory, zeros, zeros, "snr_db")
        return [self._write_table(_with_scheme(series), out_dir, "ber")]

    def run_capacity(self, out_dir: Path) -> list[Path]:
        """Pragmatic capacity per scheme and SNR, with the AWGN BICM reference."""
        snr = self.config.sweep.snr_db
        series: dict[str, MetricSeries] = {}
        for name, points in self._link_sweep().items():
            values: list[float] = []
            errs: list[float] = []
            for x, point in zip(snr, points):
                llrs = np.concatenate([o.output.llrs for o in point])
                bits = np.concatenate([o.bits for o in point])
                est = pragmatic_capacity(llrs, bits)
                values.append(est.value)
                errs.append(est.stderr)
                self.logger.info(f"{name} at {x:g} dB: {est.value:.4f} bits/symbol")
            counts = [len(point) for point in points]
            series[name] = MetricSeries(snr, values, errs, counts, "snr_db")
        reference = bicm_capacity_awgn(np.asarray(snr))
        series["awgn_bicm"] = MetricSeries(
            snr, reference, np.zeros(len(snr)), np.zeros(len(snr)), "snr_db"
        )
        return [self._write_table(_with_scheme(series), out_dir, "capacity")]

    def run_psd(self, out_dir: Path) -> list[Path]:
        """Welch PSD of Rect and RRC transmit signals and their out-of-band power."""
        config = self.config
        p = config.psd
        T = config.grid.T
        grid = DDGrid(M=p.M, N=p.N, T=T, osr=p.osr)
        cp_len = min(config.modem.cp_len, p.M * p.N)
        half_band = p.M / (2.0 * T)
        c = Constellation.qpsk()

        variants = [("rect", WindowKind.RECT, 0.0)]
        variants += [(f"rrc_{beta:g}", WindowKind.RRC, beta) for beta in p.betas]
        series: dict[str, MetricSeries] = {}
        oob: list[dict[str, object]] = []
        for name, kind, beta in variants:
            cfg = ModemConfig.create(
                grid,
                kind,
                kind,
                cp_len=cp_len,
                time_beta=beta,
                freq_beta=beta,
                normalize=config.modem.normalize,
                periodic_shaping=config.modem.periodic_shaping,
            )
            rng = np.random.default_rng(config.channel.seed)
            frames = [
                map_bits(rng.integers(0, 2, grid.size * c.bits_per_symbol), c, cfg.grid)
                for _ in range(p.frames)
            ]
            s = transmit_stream(frames, cfg)
            center = cfg.basis.freq_window.center
            series[name] = psd(s, p.nfft, p.overlap, center=center, band_half_width=half_band)
            nominal = (1.0 + beta) * half_band
            edge = OOB_EDGE_FACTOR * nominal
            level = oob_power_db(series[name], edge)
            oob.append(
                {
                    "scheme": name,
                    "nominal_edge_hz": nominal,
                    "band_edge_hz": edge,
                    "oob_db": level,
                }
            )
            self.logger.info(f"{name}: out-of-band power beyond {edge:.4g} Hz is {level:.2f} dB")
        return [
            self._write_table(_with_scheme(series), out_dir, "psd"),
            self._write_table(pd.DataFrame(oob), out_dir, "psd_oob"),
        ]

    def run_selftest(self, out_dir: Path) -> list[Path]:
        """Invariant suite; failures are recorded in ``invariant_failures``."""
        results = run_selftest(seed=self.config.channel.seed, threads=self.threads)
        table = pd.DataFrame(
            {
                "check": [r.name for r in results],
                "residual": [r.residual for r in results],
                "tolerance": [r.tolerance for r in results],
                "passed": [r.passed for r in results],
            }
        )
        self.invariant_failures = [r.name for r in results if not r.passed]
        return [self._write_table(table, out_dir, "selftest")]


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment configuration (YAML or JSON)")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--seed", type=int, help="base seed of channels, bits and noise")
    common.add_argument("--threads", type=int, help="worker threads")
    common.add_argument("--format", choices=["csv", "json"], help="table format")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")

    parser = argparse.ArgumentParser(
        prog="zak-dd-sim", description="Delay-Doppler (Zak-OTFS) link-level simulator"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=f"run the {name} experiment")
    return parser


def apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    """Apply command-line overrides and re-validate.

    Raises:
        ConfigError: If an override makes the configuration invalid.
    """
    if args.seed is not None:
        config = replace(config, channel=replace(config.channel, seed=args.seed))
    if args.out is not None:
        config = replace(config, outputs=replace(config.outputs, directory=str(args.out)))
    if args.format is not None:
        config = replace(config, outputs=replace(config.outputs, format=args.format))
    messages = ConfigValidator().validate(config.to_dict())
    if args.threads is not None and args.threads < 1:
        messages.append(f"Invalid threads value: {args.threads} (must be >= 1)")
    if messages:
        raise ConfigError(messages)
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the ``zak-dd-sim`` command.

    Returns:
        0 on success, 2 for configuration errors, 3 for failed invariants, 4 for I/O errors and
        1 for any other failure.
    """
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        config = apply_overrides(load_config(args.config), args)
    except ConfigError as e:
        for message in e.messages:
            logger.error(f"Configuration error: {message}")
        return EXIT_CONFIG

    runner = ExperimentRunner(config, threads=args.threads)
    try:
        runner.run(args.command, Path(config.outputs.directory))
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except InvariantError as e:
        logger.error(f"Invariant check failed: {e}")
        return EXIT_INVARIANT
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO
    except Exception as e:
        logger.error(f"Error running '{args.command}': {e}")
        return EXIT_FAILURE

    if runner.invariant_failures:
        logger.error(f"Self-test failed: {', '.join(runner.invariant_failures)}")
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
