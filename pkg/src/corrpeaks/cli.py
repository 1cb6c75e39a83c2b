"""Command-line interface: transforms, toy fields, MC ensembles, peak reports.

Every subcommand is a pure function of its flags, config file, and seed;
output CSVs embed a '#'-prefixed manifest of the resolved settings and
are byte-identical across reruns and thread counts.

Exit codes: 0 success, 1 usage error (bad flags or parameters),
2 computation or input-data error.
"""

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .corr_models import Toy2Distance, Toy2Uniform, default_model, model_from_params
from .csvio import (
    CsvFormatError,
    read_config,
    read_correlation,
    read_spectrum,
    write_correlation,
    write_ensemble_stats,
    write_peak_report,
    write_spectrum,
    write_summary,
)
from .peak_analysis import InsufficientPeaksError, analyze_spectrum
from .toy_disks_analytic import correlation_toy1, preset_case
from .toy_disks_mc import DiskEnsembleConfig, PackingError, run_ensemble
from .transforms import (
    ExtrapolationError,
    TabulatedCorrelation,
    correlation_from_spectrum,
    legendre_coefficients,
    small_angle_spectrum,
)

MODEL_CHOICES = ("c1", "c2", "toy2-uniform", "toy2-distance")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage problems; the contract here is 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def parse_angle(text):
    """Angle flag value in radians; plain numbers are degrees.

    Accepts '5', '5deg', '0.1rad' (case-insensitive, spaces tolerated).
    """
    s = str(text).strip().lower()
    unit = "deg"
    for suffix in ("deg", "rad"):
        if s.endswith(suffix):
            unit = suffix
            s = s[: -len(suffix)].strip()
            break
    try:
        value = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None
    return value if unit == "rad" else math.radians(value)


def _fmt_deg(rad):
    return "%.12g" % math.degrees(rad)


def _add_common(parser, top_level):
    # Registered on the root parser (with real defaults) and again on every
    # subparser (defaults suppressed), so the flags work in either position.
    kw = {} if top_level else {"default": argparse.SUPPRESS}
    parser.add_argument(
        "--seed", type=int, help="base RNG seed", **({"default": 0} if top_level else kw)
    )
    parser.add_argument("--config", type=Path, help="key = value config file", **kw)
    parser.add_argument(
        "--out-dir",
        type=Path,
        help="directory for outputs",
        **({"default": Path(".")} if top_level else kw),
    )
    parser.add_argument(
        "--threads",
        type=int,
        help="worker threads where supported",
        **({"default": 1} if top_level else kw),
    )
    parser.add_argument(
        "--gnuplot",
        action="store_true",
        help="also write a gnuplot script stub",
        **({} if top_level else kw),
    )


def _common_parent():
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, top_level=False)
    return common


def build_parser():
    common = _common_parent()
    parser = _Parser(prog="corrpeaks", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"corrpeaks {__version__}")
    _add_common(parser, top_level=True)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser(
        "transform",
        parents=[common],
        help="spectrum of a model or tabulated correlation",
    )
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", choices=MODEL_CHOICES, help="built-in model")
    src.add_argument("--input", type=Path, help="correlation or spectrum CSV")
    p.add_argument(
        "--mode",
        choices=("legendre", "smallangle", "resum"),
        default="legendre",
        help="legendre: C_ell; smallangle: flat-sky P(k); resum: spectrum -> C(theta)",
    )
    p.add_argument("--ell-max", type=int, default=2000)
    p.add_argument("--n-nodes", type=int, default=4096, help="quadrature order per panel")
    p.add_argument("--k-min", type=float, default=2.0)
    p.add_argument("--k-max", type=float, default=2000.0)
    p.add_argument("--n-k", type=int, default=1000)
    p.add_argument("--theta-min", type=parse_angle, default=0.0, help="resum grid start")
    p.add_argument(
        "--theta-max", type=parse_angle, default=math.pi, help="resum grid end"
    )
    p.add_argument("--n-theta", type=int, default=721, help="resum grid points")
    p.add_argument("--output", help="output file name override")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser(
        "toy1", parents=[common], help="analytic disk-field correlation"
    )
    p.add_argument("--case", required=True, choices=("a", "b", "c", "d"))
    p.add_argument("--n-disks", type=float, default=1000.0)
    p.add_argument("--radius", type=parse_angle, default=math.radians(1.0))
    p.add_argument("--theta-min", type=parse_angle, default=math.radians(0.05))
    p.add_argument("--theta-max", type=parse_angle, default=math.radians(4.0))
    p.add_argument("--n-theta", type=int, default=64)
    p.add_argument("--output", help="output file name override")
    p.set_defaults(func=cmd_toy1)

    p = sub.add_parser(
        "toy2",
        parents=[common],
        help="variable-radius disk models: correlation, spectrum, peak verdict",
    )
    p.add_argument("--variant", required=True, choices=("uniform", "distance"))
    p.add_argument("--r-min", type=parse_angle, default=math.radians(1.0))
    p.add_argument("--r-max", type=parse_angle, default=math.radians(2.0))
    p.add_argument("--a0", type=float, default=0.02)
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--distance-min", type=float, default=3.0)
    p.add_argument("--distance-max", type=float, default=50.0)
    p.add_argument("--ell-max", type=int, default=2000)
    p.add_argument("--n-theta", type=int, default=512, help="correlation output grid")
    p.set_defaults(func=cmd_toy2)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo disk ensembles")
    p.add_argument("--n-disks", type=int)
    p.add_argument("--radius", type=parse_angle)
    p.add_argument("--radius-min", type=parse_angle)
    p.add_argument("--radius-max", type=parse_angle)
    p.add_argument("--points-per-disk", type=int)
    p.add_argument("--patch-size", type=float)
    p.add_argument("--hard-core", action="store_true", default=None)
    p.add_argument("--realizations", type=int)
    p.add_argument("--n-bins", type=int)
    p.add_argument("--theta-max", type=parse_angle)
    p.add_argument("--output", help="output file name override")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("analyze", parents=[common], help="peak report for a spectrum CSV")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--smoothing-window", type=int, default=5)
    p.add_argument("--prominence-frac", type=float, default=0.01)
    p.set_defaults(func=cmd_analyze)

    return parser


def _load_config(args):
    if args.config is None:
        return {}
    return read_config(args.config)


def _base_manifest(args, command, **extra):
    manifest = {
        "tool": "corrpeaks",
        "version": __version__,
        "command": command,
        "seed": args.seed,
    }
    manifest.update(extra)
    return manifest


def _write_gnuplot(args, csv_name, columns, title):
    if not args.gnuplot:
        return None
    path = args.out_dir / (Path(csv_name).stem + ".gp")
    lines = [
        "set datafile separator ','",
        f"set title '{title}'",
        "set key off",
        f"plot '{csv_name}' using {columns} with lines",
        "pause -1",
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _resolve_model(args, config):
    if args.model is not None:
        return default_model(args.model), args.model
    if "model" in config:
        model = model_from_params(config)
        return model, config["model"]
    return None, None


def _print_peak_preview(spec):
    if spec.grid.size < 16:
        return
    report = analyze_spectrum(spec)
    if report.n_peaks == 0:
        print("peaks: none detected")
        return
    head = ", ".join("%.6g" % loc for loc in report.locations[:3])
    print(f"peaks: first at {head} (n={report.n_peaks}, detected={report.detected})")


def cmd_transform(args):
    config = _load_config(args)
    model, model_name = _resolve_model(args, config)

    if args.mode == "resum":
        if args.input is None:
            raise ValueError("resum mode needs --input SPECTRUM_CSV")
        spec = read_spectrum(args.input)
        theta = np.linspace(args.theta_min, args.theta_max, args.n_theta)
        tab = correlation_from_spectrum(spec, theta)
        name = args.output or f"correlation_{args.input.stem}.csv"
        manifest = _base_manifest(
            args, "transform", mode="resum", input=args.input.name,
            theta_min_deg=_fmt_deg(args.theta_min),
            theta_max_deg=_fmt_deg(args.theta_max), n_theta=args.n_theta,
        )
        write_correlation(args.out_dir / name, tab, manifest)
        print(f"wrote {args.out_dir / name}")
        _write_gnuplot(args, name, "1:2", "resummed correlation")
        return 0

    if args.input is not None:
        source, label = read_correlation(args.input), args.input.stem
    elif model is not None:
        source, label = model, model_name
    else:
        raise ValueError("need --model or --input (or a config with model params)")

    if args.mode == "legendre":
        spec = legendre_coefficients(source, ell_max=args.ell_max, n_nodes=args.n_nodes)
        manifest = _base_manifest(
            args, "transform", mode="legendre", source=label,
            ell_max=args.ell_max, n_nodes=args.n_nodes,
        )
    else:
        k_grid = np.linspace(args.k_min, args.k_max, args.n_k)
        spec = small_angle_spectrum(source, k_grid, n_nodes=args.n_nodes)
        manifest = _base_manifest(
            args, "transform", mode="smallangle", source=label,
            k_min=args.k_min, k_max=args.k_max, n_k=args.n_k, n_nodes=args.n_nodes,
        )
    name = args.output or f"spectrum_{label}_{args.mode}.csv"
    write_spectrum(args.out_dir / name, spec, manifest)
    print(f"wrote {args.out_dir / name}")
    _print_peak_preview(spec)
    _write_gnuplot(args, name, "1:2", f"spectrum of {label}")
    return 0


def cmd_toy1(args):
    profile, centers = preset_case(args.case, args.radius)
    theta = np.linspace(args.theta_min, args.theta_max, args.n_theta)
    tab = correlation_toy1(theta, profile, centers, args.n_disks)
    name = args.output or f"toy1_case_{args.case}.csv"
    manifest = _base_manifest(
        args, "toy1", case=args.case, n_disks="%.12g" % args.n_disks,
        radius_deg=_fmt_deg(args.radius),
        theta_min_deg=_fmt_deg(args.theta_min),
        theta_max_deg=_fmt_deg(args.theta_max), n_theta=args.n_theta,
    )
    write_correlation(args.out_dir / name, tab, manifest)
    print(f"wrote {args.out_dir / name}")
    _write_gnuplot(args, name, "1:2", f"disk-field correlation, case {args.case}")
    return 0


def cmd_toy2(args):
    config = _load_config(args)
    if "model" in config:
        model = model_from_params(config)
    elif args.variant == "uniform":
        model = Toy2Uniform(args.r_min, args.r_max)
    else:
        model = Toy2Distance(args.a0, args.length, args.distance_min, args.distance_max)

    params = model.to_params()
    upper = min(max(model.breakpoints()) * 1.25, math.pi)
    theta = np.linspace(upper / args.n_theta, upper, args.n_theta)
    tab = TabulatedCorrelation(theta, model(theta))
    spec = legendre_coefficients(model, ell_max=args.ell_max)
    report = analyze_spectrum(spec)

    manifest = _base_manifest(args, "toy2", **{k: params[k] for k in sorted(params)})
    corr_name = f"toy2_{args.variant}.csv"
    spec_name = f"toy2_{args.variant}_spectrum.csv"
    peaks_name = f"toy2_{args.variant}_peaks.csv"
    write_correlation(args.out_dir / corr_name, tab, manifest)
    write_spectrum(
        args.out_dir / spec_name, spec, {**manifest, "ell_max": args.ell_max}
    )
    write_peak_report(args.out_dir / peaks_name, report, manifest)
    for name in (corr_name, spec_name, peaks_name):
        print(f"wrote {args.out_dir / name}")
    print(
        f"oscillation detected: {str(report.detected).lower()} "
        f"(peaks={report.n_peaks}, quasi_period={report.quasi_period:.6g})"
    )
    _write_gnuplot(args, spec_name, "1:2", f"toy2 {args.variant} spectrum")
    return 0


_MC_CONFIG_KEYS = {
    "n_disks": int,
    "points_per_disk": int,
    "patch_size": float,
    "hard_core": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "n_realizations": int,
    "seed": int,
    "n_bins": int,
}


def _mc_config(args):
    """Layer DiskEnsembleConfig from defaults, then config file, then flags."""
    values = {}
    config = _load_config(args)
    for key, conv in _MC_CONFIG_KEYS.items():
        if key in config:
            values[key] = conv(config[key])
    if "radius_deg" in config:
        values["radius"] = math.radians(float(config["radius_deg"]))
    if "radius_min_deg" in config and "radius_max_deg" in config:
        values["radius"] = (
            math.radians(float(config["radius_min_deg"])),
            math.radians(float(config["radius_max_deg"])),
        )
    if "theta_max_deg" in config:
        values["theta_max"] = math.radians(float(config["theta_max_deg"]))

    if args.n_disks is not None:
        values["n_disks"] = args.n_disks
    if args.radius is not None:
        values["radius"] = args.radius
    if args.radius_min is not None and args.radius_max is not None:
        values["radius"] = (args.radius_min, args.radius_max)
    if args.points_per_disk is not None:
        values["points_per_disk"] = args.points_per_disk
    if args.patch_size is not None:
        values["patch_size"] = args.patch_size
    if args.hard_core is not None:
        values["hard_core"] = args.hard_core
    if args.realizations is not None:
        values["n_realizations"] = args.realizations
    if args.n_bins is not None:
        values["n_bins"] = args.n_bins
    if args.theta_max is not None:
        values["theta_max"] = args.theta_max
    values.setdefault("seed", args.seed)
    return DiskEnsembleConfig(**values)


def cmd_mc(args):
    config = _mc_config(args)
    stats = run_ensemble(config, threads=max(1, args.threads))
    lo, hi = config.radius_range
    manifest = _base_manifest(
        args, "mc",
        n_disks=config.n_disks,
        points_per_disk=config.points_per_disk,
        realizations=config.n_realizations,
        patch_size="%.12g" % config.patch_size,
        hard_core=str(config.hard_core).lower(),
        radius_deg=_fmt_deg(lo) if lo == hi else f"{_fmt_deg(lo)}..{_fmt_deg(hi)}",
        n_bins=config.n_bins,
        theta_max_deg=_fmt_deg(config.bin_edges[-1]),
    )
    manifest["seed"] = config.seed
    name = args.output or "mc_stats.csv"
    write_ensemble_stats(args.out_dir / name, stats, manifest)
    print(f"wrote {args.out_dir / name}")
    _write_gnuplot(args, name, "1:2:3 with yerrorbars", "MC ensemble correlation")
    return 0


def cmd_analyze(args):
    spec = read_spectrum(args.input)
    report = analyze_spectrum(
        spec,
        smoothing_window=args.smoothing_window,
        prominence_frac=args.prominence_frac,
    )
    manifest = _base_manifest(
        args, "analyze", input=args.input.name,
        smoothing_window=args.smoothing_window,
        prominence_frac="%.12g" % args.prominence_frac,
    )
    stem = args.input.stem
    peaks_path = args.out_dir / f"{stem}_peaks.csv"
    summary_path = args.out_dir / f"{stem}_summary.txt"
    write_peak_report(peaks_path, report, manifest)
    write_summary(
        summary_path,
        {
            "detected": str(report.detected).lower(),
            "n_peaks": report.n_peaks,
            "quasi_period": "%.12g" % report.quasi_period,
            "quasi_period_std": "%.12g" % report.quasi_period_std,
            "envelope_exponent": "%.12g" % report.envelope_exponent,
            "envelope_stderr": "%.12g" % report.envelope_stderr,
            "score": "%.12g" % report.score,
        },
    )
    print(f"wrote {peaks_path}")
    print(f"wrote {summary_path}")
    print(
        f"oscillation detected: {str(report.detected).lower()} "
        f"(peaks={report.n_peaks}, score={report.score:.3g})"
    )
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1

    try:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        return args.func(args)
    except (CsvFormatError, ExtrapolationError, InsufficientPeaksError) as exc:
        print(f"corrpeaks: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, OSError, ArithmeticError) as exc:
        # PackingError and friends: the request was well-formed but the
        # computation could not be carried out.
        print(f"corrpeaks: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"corrpeaks: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
