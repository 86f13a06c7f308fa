"""``repcount`` command line.

Subcommands: count, eval, sweep, ablate, synth, export-waveform.
Exit status is 0 on success, 1 for usage errors and 2 for data errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .counter import Fusion, PeakParams, count_repetitions, working_matrix
from .errors import ConfigError, MissingFile, RepCountError, SpecInvalid
from .evaluate import (
    ablate_fmf,
    combine_datasets,
    evaluate,
    load_manifest,
    render_ablation,
    render_datasets,
    render_report,
    render_sweep,
    sweep_thresholds,
)
from .matrix_io import format_value, load_matrix
from .pca import first_component_waveform
from .spectral import TABLE1_ALPHAS, FmfConfig, dft, fmf, parse_ladder
from .synth import SynthSpec, write_fixture

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

_DEFAULT_FMF = FmfConfig()
_DEFAULT_PEAKS = PeakParams()


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _add_config_flags(p: argparse.ArgumentParser, *, fusion=True, fmf_toggle=True) -> None:
    if fusion:
        p.add_argument("--fusion", choices=[f.value for f in Fusion], default=Fusion.SPATIAL.value,
                       help="which features to count on (default: %(default)s)")
    p.add_argument("--alpha", type=int, default=None,
                   help="fixed threshold; disables the multi-stage ladder (default: adaptive)")
    p.add_argument("--ladder", metavar="PATH", default=None,
                   help="JSON ladder [[max_band_count|null, alpha], ...] (default: "
                        "[[1,15],[3,20],[6,25],[null,35]])")
    p.add_argument("--beta", type=float, default=_DEFAULT_FMF.beta,
                   help="significance fraction for the band count (default: %(default)s)")
    p.add_argument("--high-band-start", type=float, default=_DEFAULT_FMF.high_band_start,
                   help="start of the high band as a fraction of N (default: %(default)s)")
    p.add_argument("--dominant-factor", type=float, default=_DEFAULT_FMF.dominant_factor,
                   help="keep-band covers this multiple of the strongest bin (default: %(default)s)")
    p.add_argument("--no-keep-dominant", action="store_true",
                   help="do not widen the keep-band around the strongest bin")
    p.add_argument("--gamma", type=float, default=_DEFAULT_PEAKS.gamma,
                   help="minimum peak prominence as a fraction of the p95-p5 range (default: %(default)s)")
    p.add_argument("--min-separation", type=int, default=_DEFAULT_PEAKS.min_separation,
                   help="minimum distance between peaks in frames (default: %(default)s)")
    if fmf_toggle:
        p.add_argument("--no-fmf", action="store_true", help="skip the frequency filter")
    p.add_argument("--format", choices=["json", "table"], default="table",
                   help="output format (default: %(default)s)")
    p.add_argument("--out", metavar="PATH", default=None, help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="repcount", description="Count repetitions of periodic motion in per-frame features.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("count", help="count repetitions in one video")
    p.add_argument("--spatial", metavar="PATH")
    p.add_argument("--temporal", metavar="PATH")
    _add_config_flags(p)

    p = sub.add_parser("eval", help="evaluate a manifest (MAE and sigma)")
    p.add_argument("--manifest", metavar="PATH", action="append", required=True,
                   help="repeat to report several datasets plus overall rows")
    _add_config_flags(p)

    p = sub.add_parser("sweep", help="fixed-threshold sweep plus the multi-stage run")
    p.add_argument("--manifest", metavar="PATH", required=True)
    p.add_argument("--alphas", default=",".join(map(str, TABLE1_ALPHAS)),
                   help="comma-separated thresholds (default: %(default)s; empty for multi-stage only)")
    _add_config_flags(p, fmf_toggle=False)

    p = sub.add_parser("ablate", help="FMF on/off for spatial, temporal and concatenated features")
    p.add_argument("--manifest", metavar="PATH", required=True)
    _add_config_flags(p, fusion=False, fmf_toggle=False)

    p = sub.add_parser("synth", help="write synthetic fixtures from a spec JSON")
    p.add_argument("--spec", metavar="PATH", required=True,
                   help="a SynthSpec object or an array of them (optional keys: id, format, temporal_seed)")
    p.add_argument("--out", metavar="DIR", required=True)
    p.add_argument("--seed", type=int, default=None, help="override every spec's seed (default: keep)")

    p = sub.add_parser("export-waveform", help="raw and filtered waveform plus spectrum as columns")
    p.add_argument("--spatial", metavar="PATH")
    p.add_argument("--temporal", metavar="PATH")
    _add_config_flags(p)
    return parser


def _fmf_config(args) -> FmfConfig:
    ladder = _DEFAULT_FMF.ladder
    if args.ladder:
        try:
            ladder = parse_ladder(json.loads(Path(args.ladder).read_text(encoding="utf-8")))
        except FileNotFoundError:
            raise ConfigError(f"ladder file not found: {args.ladder}") from None
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"invalid ladder file {args.ladder}: {exc}") from None
    return FmfConfig(
        ladder=ladder,
        beta=args.beta,
        high_band_start=args.high_band_start,
        fixed_alpha=args.alpha,
        keep_dominant=not args.no_keep_dominant,
        dominant_factor=args.dominant_factor,
        enabled=not getattr(args, "no_fmf", False),
    )


def _peak_params(args) -> PeakParams:
    return PeakParams(gamma=args.gamma, min_separation=args.min_separation)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_streams(args):
    if not args.spatial and not args.temporal:
        raise UsageError(f"{args.command}: at least one of --spatial / --temporal is required")
    ms = load_matrix(args.spatial) if args.spatial else None
    mt = load_matrix(args.temporal) if args.temporal else None
    return ms, mt


def cmd_count(args) -> int:
    cfg, p = _fmf_config(args), _peak_params(args)
    ms, mt = _load_streams(args)
    report = count_repetitions(ms, mt, cfg, p, args.fusion)
    if args.format == "json":
        _emit(_dumps(report.to_dict()), args.out)
    else:
        d = report.to_dict()
        rows = [[k, format_value(v) if isinstance(v, float) else str(v)] for k, v in d.items() if k != "peaks"]
        rows.append(["peaks", " ".join(map(str, report.peaks))])
        _emit("\n".join(f"{k:<22}{v}" for k, v in rows) + "\n", args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg, p = _fmf_config(args), _peak_params(args)
    reports = {}
    for i, path in enumerate(args.manifest):
        name = path if path not in reports else f"{path} ({i + 1})"
        reports[name] = evaluate(load_manifest(path), cfg, p, args.fusion)
    if args.format == "json":
        if len(reports) == 1:
            obj = next(iter(reports.values())).to_dict()
        else:
            obj = {
                "datasets": {k: r.to_dict() for k, r in reports.items()},
                "summary": [
                    {"dataset": n, "mae": a, "sigma_counts": b, "sigma_percent": c}
                    for n, a, b, c in combine_datasets(reports)
                ],
            }
        _emit(_dumps(obj), args.out)
    else:
        text = ""
        for name, r in reports.items():
            if len(reports) > 1:
                text += f"== {name}\n"
            text += render_report(r)
        if len(reports) > 1:
            text += "== summary\n" + render_datasets(combine_datasets(reports))
        _emit(text, args.out)
    return EXIT_OK


def _parse_alphas(text: str) -> list[int]:
    try:
        return [int(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise UsageError(f"--alphas must be comma-separated integers, got {text!r}") from None


def cmd_sweep(args) -> int:
    alphas = _parse_alphas(args.alphas)
    cfg, p = _fmf_config(args), _peak_params(args)
    rows = sweep_thresholds(load_manifest(args.manifest), alphas, cfg, p, args.fusion)
    if args.format == "json":
        obj = {"rows": [r.to_dict() for r in rows],
               "reports": {r.label: r.report.to_dict() for r in rows}}
        _emit(_dumps(obj), args.out)
    else:
        _emit(render_sweep(rows), args.out)
    return EXIT_OK


def cmd_ablate(args) -> int:
    cfg, p = _fmf_config(args), _peak_params(args)
    table = ablate_fmf(load_manifest(args.manifest), cfg, p)
    if args.format == "json":
        obj = {"rows": [
            {"stream": s, "fmf": state, "mae": r.mae, "sigma_counts": r.sigma_counts,
             "sigma_percent": r.sigma_percent, "n_videos": len(r.per_video),
             "failures": [{"id": i, "error": e} for i, e in r.failures]}
            for (s, state), r in table.items()
        ]}
        _emit(_dumps(obj), args.out)
    else:
        _emit(render_ablation(table), args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        obj = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise MissingFile(f"no such file: {args.spec}") from None
    except json.JSONDecodeError as exc:
        raise SpecInvalid(f"{args.spec}: invalid JSON: {exc}") from None
    items = obj if isinstance(obj, list) else [obj]
    manifest = []
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise SpecInvalid(f"spec item {i} is not an object")
        item = dict(item)
        name = str(item.pop("id", f"synth_{i:03d}"))
        fmt = item.pop("format", "bin")
        temporal_seed = item.pop("temporal_seed", None)
        if args.seed is not None:
            item["seed"] = args.seed
        spec = SynthSpec.from_dict(item)
        manifest.append(write_fixture(spec, args.out, name, fmt, temporal_seed))
    (Path(args.out) / "manifest.json").write_text(_dumps(manifest), encoding="utf-8")
    print(f"wrote {len(manifest)} fixture(s) to {args.out}")
    return EXIT_OK


def cmd_export_waveform(args) -> int:
    cfg = _fmf_config(args)
    _peak_params(args)
    ms, mt = _load_streams(args)
    m = working_matrix(ms, mt, args.fusion)
    raw = first_component_waveform(m)
    filtered, trace = fmf(raw, cfg)
    mags = dft(raw).magnitudes()
    if args.format == "json":
        obj = {"trace": trace.to_dict(), "raw": raw.samples.tolist(),
               "filtered": filtered.samples.tolist(), "magnitude": mags.tolist()}
        _emit(_dumps(obj), args.out)
    else:
        lines = [f"# alpha={trace.alpha} band_count={trace.band_count} "
                 f"kept_energy_fraction={format_value(trace.kept_energy_fraction)}",
                 "frame,raw,filtered,magnitude"]
        for i, row in enumerate(np.column_stack([raw.samples, filtered.samples, mags])):
            lines.append(",".join([str(i), *map(format_value, row)]))
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


COMMANDS = {
    "count": cmd_count,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "ablate": cmd_ablate,
    "synth": cmd_synth,
    "export-waveform": cmd_export_waveform,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage() + "repcount: error: a command is required")
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (UsageError, ConfigError) as exc:
        msg = str(exc)
        if not msg.startswith("usage:"):
            msg = f"{parser.format_usage()}repcount: error: {msg}"
        print(msg, file=sys.stderr)
        return EXIT_USAGE
    except RepCountError as exc:
        print(f"repcount: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())
