"""Command-line surface: simulate spectra, estimate delays, tabulate
Fisher information, and demo the classical correlation/spectrum pair.

Human-friendly units at the boundary (ps, nm) are converted to SI
immediately; every run writes its outputs atomically plus a JSON manifest
recording the resolved configuration, seed, digests, and wall time.
Exit codes: 0 ok, 2 bad configuration, 3 bad input data, 4 estimation
failure (partial diagnostics are still written).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from ._version import __version__
from .biphoton import (
    BiphotonSource,
    DelayProfile,
    ForwardModelConfig,
    bandwidth_nm_to_rads,
    joint_spectral_intensity,
)
from .errors import (
    ConfigurationError,
    EstimationError,
    InputDataError,
)
from .estimation import (
    extract_delays,
    fisher_information,
    mle_fit,
    quantum_fisher_information,
    sweep,
)
from .hom import DetectionModel, OutcomeTable, outcome_probabilities, sample_counts
from .io import (
    SCHEMA_VERSION,
    RunManifest,
    read_spectrum,
    sha256_digest,
    write_json,
    write_manifest,
    write_spectrum,
    write_table,
)
from .transform import (
    FrequencyGrid,
    SpectralPattern,
    classical_wkt,
    inverse_qwkt,
)

_UNIT_SCALE = {"": 1.0, "s": 1.0, "ps": 1e-12, "nm": 1e-9}


def _parse_axis(spec: str, default_unit: str = "") -> list[float]:
    """Axis spec 'start:stop:count' or a single value, with optional unit
    suffix (ps, nm, s) applying to all values. count = 0 gives an empty axis."""
    body = spec.strip()
    unit = ""
    for suffix in ("ps", "nm", "s"):
        if body.endswith(suffix):
            unit = suffix
            body = body[: -len(suffix)]
            break
    scale = _UNIT_SCALE[unit or default_unit]
    parts = body.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0]) * scale]
        if len(parts) != 3:
            raise ValueError("expected start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigurationError(f"bad axis spec {spec!r}: {exc}") from exc
    if count < 0:
        raise ConfigurationError(f"axis count must be nonnegative in {spec!r}")
    return [float(v) * scale for v in np.linspace(start, stop, count)]


def _parse_layers(spec: str) -> list[tuple[float, float]]:
    """Layer list 'tau_ps:weight,tau_ps:weight,...' in picoseconds."""
    pairs = []
    for chunk in spec.split(","):
        parts = chunk.strip().split(":")
        if len(parts) != 2:
            raise ConfigurationError(f"bad layer spec {chunk!r}: expected tau_ps:weight")
        try:
            pairs.append((float(parts[0]) * 1e-12, float(parts[1])))
        except ValueError as exc:
            raise ConfigurationError(f"bad layer spec {chunk!r}: {exc}") from exc
    return pairs


def _trials(text: str) -> int:
    value = int(float(text))
    if value < 1:
        raise argparse.ArgumentTypeError("trials must be a positive count")
    return value


def _source_from_args(args) -> BiphotonSource:
    return BiphotonSource(
        sigma_spectral=bandwidth_nm_to_rads(args.sigma_nm * 1e-9, args.center_nm * 1e-9),
        center_wavelength_signal=args.center_nm * 1e-9,
        center_wavelength_idler=args.center_nm * 1e-9,
        pump_wavelength=args.pump_nm * 1e-9,
    )


def _grid_from_args(args, source: BiphotonSource) -> FrequencyGrid:
    return FrequencyGrid(
        omega_max=args.span_sd * 2.0 * source.sigma_spectral, n_bins=args.bins
    )


def _add_source_options(parser) -> None:
    parser.add_argument("--sigma-nm", type=float, default=20.0,
                        help="single-photon bandwidth, nm equivalent")
    parser.add_argument("--center-nm", type=float, default=810.0,
                        help="signal/idler center wavelength, nm")
    parser.add_argument("--pump-nm", type=float, default=405.0,
                        help="pump wavelength, nm")


def _add_grid_options(parser) -> None:
    parser.add_argument("--bins", type=int, default=4096,
                        help="frequency bins (even)")
    parser.add_argument("--span-sd", type=float, default=6.0,
                        help="half window in units of the envelope RMS 2*sigma")


def _add_model_options(parser) -> None:
    parser.add_argument("--gamma", type=float, default=0.0, help="per-photon loss")
    parser.add_argument("--alpha", type=float, default=1.0, help="fringe visibility")
    parser.add_argument("--variant", choices=("two-port", "trinomial"),
                        default="two-port", help="outcome model variant")


def _finish(manifest: RunManifest, outputs: dict, started: float, manifest_path) -> None:
    manifest = RunManifest(
        command=manifest.command,
        config=manifest.config,
        seed=manifest.seed,
        version=manifest.version,
        input_digests=manifest.input_digests,
        output_digests={name: sha256_digest(p) for name, p in outputs.items()},
        duration_seconds=time.perf_counter() - started,
    )
    write_manifest(manifest_path, manifest)


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    source = _source_from_args(args)
    grid = _grid_from_args(args, source)
    if (args.tau_ps is None) == (args.layers is None):
        raise ConfigurationError("provide exactly one of --tau-ps or --layers")
    if args.tau_ps is not None:
        profile = DelayProfile.single(args.tau_ps * 1e-12)
    else:
        profile = DelayProfile.normalized(_parse_layers(args.layers))
    cfg = ForwardModelConfig(phi=args.phi)
    out = Path(args.out)
    comments = (
        f"qwkt {__version__} simulate",
        f"sigma {args.sigma_nm} nm equivalent at {args.center_nm} nm center, pump {args.pump_nm} nm",
        "delays_ps " + ",".join(format(t * 1e12, ".17g") for t in profile.delays),
    )
    if args.ideal:
        values = joint_spectral_intensity(source, profile, grid.values, cfg)
        pattern = SpectralPattern(grid=grid, values=values, kind="ideal-density")
    else:
        model = DetectionModel(
            grid=grid, gamma=args.gamma, alpha=args.alpha,
            n_trials=args.trials, variant=args.variant,
        )
        table = outcome_probabilities(model, source, profile, cfg)
        sampled = sample_counts(table, args.trials, args.seed)
        pattern = SpectralPattern(
            grid=grid, values=sampled.counts_coincidence, kind="counts"
        )
    write_spectrum(out, pattern, center_wavelength=args.center_nm * 1e-9, comments=comments)
    manifest = RunManifest(
        command="simulate",
        config={
            "sigma_rad_per_s": source.sigma_spectral,
            "center_wavelength_m": args.center_nm * 1e-9,
            "pump_wavelength_m": args.pump_nm * 1e-9,
            "delays_s": list(map(float, profile.delays)),
            "weights": list(map(float, profile.weights)),
            "phi_rad": args.phi,
            "gamma": args.gamma,
            "alpha": args.alpha,
            "variant": args.variant,
            "n_trials": args.trials,
            "n_bins": args.bins,
            "span_sd": args.span_sd,
            "ideal": bool(args.ideal),
            "out": str(out),
        },
        seed=None if args.ideal else args.seed,
        version=__version__,
    )
    _finish(manifest, {out.name: out}, started, args.manifest or f"{out}.manifest.json")
    return 0


def cmd_estimate(args) -> int:
    started = time.perf_counter()
    source = _source_from_args(args)
    in_path = Path(args.input)
    pattern = read_spectrum(in_path, center_wavelength=args.center_nm * 1e-9)
    out = Path(args.out)
    sidecar = out.parent / (out.stem + ".correlation.csv")
    result: dict = {"schema_version": SCHEMA_VERSION, "command": "estimate", "input": str(in_path)}
    outputs = {out.name: out, sidecar.name: sidecar}
    manifest = RunManifest(
        command="estimate",
        config={
            "input": str(in_path),
            "sigma_rad_per_s": source.sigma_spectral,
            "center_wavelength_m": args.center_nm * 1e-9,
            "threshold": args.threshold,
            "min_separation": args.min_separation,
            "mle": bool(args.mle),
            "k_layers": args.layers,
            "gamma": args.gamma,
            "alpha": args.alpha,
            "variant": args.variant,
            "n_trials": args.trials,
            "phi_rad": args.phi,
            "out": str(out),
        },
        seed=None,
        version=__version__,
        input_digests={in_path.name: sha256_digest(in_path)},
    )
    manifest_path = args.manifest or f"{out}.manifest.json"

    correlation = inverse_qwkt(pattern)
    write_table(
        sidecar,
        ("delay_s", "correlation_real", "correlation_imag", "correlation_abs"),
        (
            (t, v.real, v.imag, abs(v))
            for t, v in zip(correlation.grid.values, correlation.values)
        ),
        comments=(f"qwkt {__version__} estimate: inverted correlation",),
    )

    if args.mle and pattern.kind != "counts":
        raise InputDataError("--mle needs a counts spectrum; this file is an ideal density")

    try:
        report = extract_delays(
            pattern, source, threshold=args.threshold, min_separation=args.min_separation
        )
        result["peaks"] = {
            "delays": [
                {"tau_s": t, "weight": w, "relative_height": h}
                for t, w, h in report.delays
            ],
            "ambiguity_flag": report.ambiguity_flag,
            "grid_resolution_s": report.grid_resolution,
        }

        n_diag = args.trials
        if n_diag is None:
            n_diag = int(np.sum(pattern.values)) if pattern.kind == "counts" else 1
        n_diag = max(n_diag, 1)
        model = DetectionModel(
            grid=pattern.grid, gamma=args.gamma, alpha=args.alpha,
            n_trials=n_diag, variant=args.variant,
        )
        qfi = quantum_fisher_information(source, n_diag)
        crb_rows = []
        for tau_hat, _, _ in report.delays:
            fisher = fisher_information(source, tau_hat, model)
            crb_rows.append({"tau_s": tau_hat, "g_omega": fisher.g_omega, "crb_s": fisher.crb})
        result["crb"] = {
            "variant": args.variant,
            "n_trials": n_diag,
            "per_delay": crb_rows,
            "q_rad2_per_s2": qfi.q,
            "qcrb_s": qfi.qcrb,
        }

        if args.mle:
            counts_table = OutcomeTable(
                variant=args.variant,
                grid=pattern.grid,
                counts_coincidence=pattern.values,
            )
            fit = mle_fit(
                counts_table, model, source, args.layers,
                init=report, cfg=ForwardModelConfig(phi=args.phi),
            )
            result["mle"] = {
                "layers": [
                    {"tau_s": t, "weight": w, "stderr_tau_s": st, "stderr_weight": sw}
                    for (t, w), st, sw in zip(fit.layers, fit.stderr_tau, fit.stderr_weight)
                ],
                "log_likelihood": fit.log_likelihood,
                "converged": fit.converged,
                "iterations": fit.iterations,
            }
    except EstimationError as exc:
        result["error"] = str(exc)
        write_json(out, result)
        _finish(manifest, outputs, started, manifest_path)
        raise
    write_json(out, result)
    _finish(manifest, outputs, started, manifest_path)
    return 0


def _sweep_to_csv(args, result, out: Path) -> None:
    write_table(
        out,
        ("sigma_rad_per_s", "tau_s", "gamma", "alpha", "variant", "g_omega", "crb_s", "error"),
        (
            (c.sigma, c.tau, c.gamma, c.alpha, c.variant, c.g_omega, c.crb, c.error or "")
            for c in result.rows
        ),
        comments=(f"qwkt {__version__} {args.command}: Fisher information sweep",),
    )


def _run_sweep(args, sigma_values, tau_values, gamma_values, alpha_values) -> int:
    started = time.perf_counter()
    result = sweep(
        sigma_values, tau_values, gamma_values, alpha_values,
        variant=args.variant, n_trials=args.trials, span_sd=args.span_sd,
    )
    out = Path(args.out)
    _sweep_to_csv(args, result, out)
    outputs = {out.name: out}
    if args.command == "sweep":
        mono_path = out.parent / (out.stem + ".monotonicity.json")
        write_json(mono_path, {
            "schema_version": SCHEMA_VERSION,
            "monotonicity": result.monotonicity,
        })
        outputs[mono_path.name] = mono_path
    manifest = RunManifest(
        command=args.command,
        config={
            "sigma_rad_per_s": list(map(float, sigma_values)),
            "tau_s": list(map(float, tau_values)),
            "gamma": list(map(float, gamma_values)),
            "alpha": list(map(float, alpha_values)),
            "variant": args.variant,
            "n_trials": args.trials,
            "span_sd": args.span_sd,
            "out": str(out),
        },
        seed=None,
        version=__version__,
    )
    _finish(manifest, outputs, started, args.manifest or f"{out}.manifest.json")
    if result.rows and all(c.error is not None for c in result.rows):
        raise EstimationError("every sweep cell failed; see the error column")
    return 0


def cmd_fisher(args) -> int:
    center = args.center_nm * 1e-9
    sigma_values = [bandwidth_nm_to_rads(args.sigma_nm * 1e-9, center)]
    tau_values = (
        _parse_axis(args.tau_axis, default_unit="ps")
        if args.tau_axis is not None
        else [args.tau_ps * 1e-12]
    )
    return _run_sweep(args, sigma_values, tau_values, [args.gamma], [args.alpha])


def cmd_sweep(args) -> int:
    center = args.center_nm * 1e-9
    sigma_values = [
        bandwidth_nm_to_rads(dl, center)
        for dl in _parse_axis(args.sigma_axis, default_unit="nm")
    ]
    return _run_sweep(
        args,
        sigma_values,
        _parse_axis(args.tau_axis, default_unit="ps"),
        _parse_axis(args.gamma_axis),
        _parse_axis(args.alpha_axis),
    )


def cmd_wkt_demo(args) -> int:
    started = time.perf_counter()
    n = int(round(args.duration_s * args.rate_hz))
    t = (np.arange(n) - n // 2) / args.rate_hz
    if args.waveform == "cosine":
        x = np.cos(2.0 * np.pi * args.frequency_hz * t)
    elif args.waveform == "gaussian-pulse":
        x = np.exp(-(t**2) / (2.0 * args.width_s**2))
    else:  # two-pulse
        half = 0.5 * args.delay_s
        x = np.exp(-((t - half) ** 2) / (2.0 * args.width_s**2)) + np.exp(
            -((t + half) ** 2) / (2.0 * args.width_s**2)
        )
    demo = classical_wkt(x, sample_rate=args.rate_hz)
    base = Path(args.out)
    paths = {
        "signal": base.parent / (base.name + ".signal.csv"),
        "autocorrelation": base.parent / (base.name + ".autocorrelation.csv"),
        "spectrum": base.parent / (base.name + ".spectrum.csv"),
    }
    tag = f"qwkt {__version__} wkt-demo: {args.waveform}"
    write_table(paths["signal"], ("time_s", "x"), zip(t, x), comments=(tag,))
    write_table(paths["autocorrelation"], ("lag_s", "autocorrelation"),
                zip(demo.lags, demo.acf), comments=(tag,))
    write_table(paths["spectrum"], ("omega_rad_per_s", "power"),
                zip(demo.freqs, demo.psd), comments=(tag,))
    manifest = RunManifest(
        command="wkt-demo",
        config={
            "waveform": args.waveform,
            "frequency_hz": args.frequency_hz,
            "rate_hz": args.rate_hz,
            "duration_s": args.duration_s,
            "width_s": args.width_s,
            "delay_s": args.delay_s,
            "out": str(base),
        },
        seed=None,
        version=__version__,
    )
    _finish(manifest, {p.name: p for p in paths.values()}, started,
            args.manifest or f"{base}.manifest.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwkt",
        description="Spectrally resolved two-photon interference: simulate, invert, estimate.",
    )
    parser.add_argument("--version", action="version", version=f"qwkt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(
            name, help=help_text, formatter_class=argparse.ArgumentDefaultsHelpFormatter
        )
        p.set_defaults(func=func)
        p.add_argument("--manifest", default=None, help="manifest path (default: OUT.manifest.json)")
        return p

    p = add("simulate", cmd_simulate, "emit an ideal or sampled coincidence spectrum")
    _add_source_options(p)
    _add_grid_options(p)
    _add_model_options(p)
    p.add_argument("--tau-ps", type=float, default=None, help="single layer delay, ps")
    p.add_argument("--layers", default=None, help="layer list tau_ps:weight,tau_ps:weight")
    p.add_argument("--phi", type=float, default=0.0, help="fringe phase, rad")
    p.add_argument("--ideal", action="store_true", help="write the ideal density instead of counts")
    p.add_argument("--trials", type=_trials, default=100000, help="trials to sample")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--out", default="spectrum.csv", help="output CSV path")

    p = add("estimate", cmd_estimate, "invert a spectrum and estimate layer delays")
    _add_source_options(p)
    _add_model_options(p)
    p.add_argument("--input", required=True, help="spectrum CSV to analyze")
    p.add_argument("--threshold", type=float, default=0.02, help="side-peak height threshold")
    p.add_argument("--min-separation", type=int, default=2, help="peak separation, grid steps")
    p.add_argument("--mle", action="store_true", help="refine with a maximum-likelihood fit")
    p.add_argument("--layers", type=int, default=1, help="layer count for the MLE")
    p.add_argument("--trials", type=_trials, default=None,
                   help="trials behind the counts; per-bin for trinomial fits "
                        "(default: column total)")
    p.add_argument("--phi", type=float, default=0.0, help="fringe phase, rad")
    p.add_argument("--out", default="estimate.json", help="output JSON path")

    p = add("fisher", cmd_fisher, "Fisher information along a delay axis")
    _add_source_options(p)
    _add_model_options(p)
    p.add_argument("--tau-ps", type=float, default=0.5, help="single delay, ps")
    p.add_argument("--tau-axis", default=None, help="delay axis start:stop:count[ps]")
    p.add_argument("--trials", type=_trials, default=1, help="trials for the CRB column")
    p.add_argument("--span-sd", type=float, default=6.0,
                   help="integration half window in units of 2*sigma")
    p.add_argument("--out", default="fisher.csv", help="output CSV path")

    p = add("sweep", cmd_sweep, "Fisher information over a parameter grid")
    p.add_argument("--center-nm", type=float, default=810.0,
                   help="signal/idler center wavelength, nm")
    p.add_argument("--variant", choices=("two-port", "trinomial"),
                   default="two-port", help="outcome model variant")
    p.add_argument("--sigma-axis", default="20", help="bandwidth axis start:stop:count[nm]")
    p.add_argument("--tau-axis", default="0.5", help="delay axis start:stop:count[ps]")
    p.add_argument("--gamma-axis", default="0", help="loss axis start:stop:count")
    p.add_argument("--alpha-axis", default="1", help="visibility axis start:stop:count")
    p.add_argument("--trials", type=_trials, default=1, help="trials for the CRB column")
    p.add_argument("--span-sd", type=float, default=6.0,
                   help="integration half window in units of 2*sigma")
    p.add_argument("--out", default="sweep.csv", help="output CSV path")

    p = add("wkt-demo", cmd_wkt_demo, "classical time series, autocorrelation, spectrum")
    p.add_argument("--waveform", required=True,
                   choices=("cosine", "gaussian-pulse", "two-pulse"))
    p.add_argument("--frequency-hz", type=float, default=5.0, help="cosine frequency")
    p.add_argument("--rate-hz", type=float, default=64.0, help="sample rate")
    p.add_argument("--duration-s", type=float, default=8.0, help="record length")
    p.add_argument("--width-s", type=float, default=0.25, help="pulse RMS width")
    p.add_argument("--delay-s", type=float, default=1.0, help="two-pulse separation")
    p.add_argument("--out", default="wkt", help="output path prefix")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InputDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except EstimationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
