"""Dataset-level evaluation: per-video errors, MAE and dispersion, threshold
sweeps and the FMF on/off ablation.

Manifest format (JSON)::

    [{"id": "v01", "spatial": "v01.bin", "temporal": "v01_flow.bin",
      "ground_truth": 12}, ...]

Relative paths are resolved against the manifest's directory.  An entry
that fails (unreadable file, missing stream, degenerate features) is listed
under ``failures`` and excluded from the aggregates; it is never dropped
silently.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .counter import Fusion, PeakParams, count_repetitions
from .errors import ManifestError, MissingFile, RepCountError
from .matrix_io import FeatureMatrix, load_matrix
from .spectral import FmfConfig

MULTI_STAGE = "multi-stage"


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    ground_truth: int
    spatial_path: str | None = None
    temporal_path: str | None = None

    def __post_init__(self):
        if self.spatial_path is None and self.temporal_path is None:
            raise ManifestError(f"entry {self.id!r}: needs a spatial or temporal path")
        if int(self.ground_truth) != self.ground_truth or self.ground_truth < 1:
            raise ManifestError(f"entry {self.id!r}: ground_truth must be a positive integer")


def parse_manifest(obj, base: str | os.PathLike | None = None) -> list[ManifestEntry]:
    if not isinstance(obj, list):
        raise ManifestError("manifest must be a JSON array")
    base = Path(base) if base is not None else None

    def resolve(p):
        if p is None:
            return None
        p = Path(p)
        if base is not None and not p.is_absolute():
            p = base / p
        return str(p)

    out = []
    for i, item in enumerate(obj):
        try:
            out.append(
                ManifestEntry(
                    id=str(item["id"]),
                    ground_truth=item["ground_truth"],
                    spatial_path=resolve(item.get("spatial")),
                    temporal_path=resolve(item.get("temporal")),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"manifest entry {i}: missing or invalid field {exc}") from None
    return out


def load_manifest(path: str | os.PathLike) -> list[ManifestEntry]:
    p = Path(path)
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise MissingFile(f"no such file: {p}") from None
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{p}: invalid JSON: {exc}") from None
    return parse_manifest(obj, p.parent)


@dataclass(frozen=True)
class VideoResult:
    id: str
    G: int
    R: int
    percent_error: float

    def to_dict(self) -> dict:
        return {"id": self.id, "G": self.G, "R": self.R, "percent_error": self.percent_error}


@dataclass(frozen=True)
class EvalReport:
    per_video: tuple[VideoResult, ...]
    failures: tuple[tuple[str, str], ...]
    mae: float | None
    sigma_counts: float | None
    sigma_percent: float | None
    config_echo: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mae": self.mae,
            "sigma_counts": self.sigma_counts,
            "sigma_percent": self.sigma_percent,
            "n_videos": len(self.per_video),
            "per_video": [r.to_dict() for r in self.per_video],
            "failures": [{"id": i, "error": e} for i, e in self.failures],
            "config": self.config_echo,
        }


def percent_error(g: int, r: int) -> float:
    return abs(g - r) / g * 100.0


def aggregate(pairs) -> tuple[float | None, float | None, float | None]:
    """MAE (percent), sigma over raw count differences, and population std
    of the percentage errors, for ``(G, R)`` pairs."""
    pairs = list(pairs)
    if not pairs:
        return None, None, None
    n = len(pairs)
    pe = [percent_error(g, r) for g, r in pairs]
    mae = math.fsum(pe) / n
    sigma_counts = math.sqrt(math.fsum((g - r) ** 2 for g, r in pairs) / n)
    sigma_percent = math.sqrt(math.fsum((e - mae) ** 2 for e in pe) / n)
    return mae, sigma_counts, sigma_percent


def report_from_results(results, failures=(), config_echo=None) -> EvalReport:
    results = tuple(results)
    mae, sc, sp = aggregate((r.G, r.R) for r in results)
    return EvalReport(results, tuple(failures), mae, sc, sp, dict(config_echo or {}))


class _Loader:
    """Caches loaded matrices so sweeps and ablations read each file once."""

    def __init__(self):
        self._cache: dict[str, FeatureMatrix | RepCountError] = {}

    def __call__(self, path: str | None) -> FeatureMatrix | None:
        if path is None:
            return None
        if path not in self._cache:
            try:
                self._cache[path] = load_matrix(path)
            except RepCountError as exc:
                self._cache[path] = exc
        hit = self._cache[path]
        if isinstance(hit, RepCountError):
            raise hit
        return hit


def config_echo(cfg: FmfConfig, p: PeakParams, fusion) -> dict:
    return {"fmf": cfg.to_dict(), "peaks": p.to_dict(), "fusion": Fusion(fusion).value}


def evaluate(
    manifest: list[ManifestEntry],
    cfg: FmfConfig = FmfConfig(),
    p: PeakParams = PeakParams(),
    fusion: Fusion | str = Fusion.SPATIAL,
    _loader: _Loader | None = None,
) -> EvalReport:
    loader = _loader or _Loader()
    results, failures = [], []
    for entry in manifest:
        try:
            # only load what the fusion mode needs
            f = Fusion(fusion)
            ms = loader(entry.spatial_path) if f is not Fusion.TEMPORAL else None
            mt = loader(entry.temporal_path) if f is not Fusion.SPATIAL else None
            rep = count_repetitions(ms, mt, cfg, p, f)
        except RepCountError as exc:
            failures.append((entry.id, f"{type(exc).__name__}: {exc}"))
            continue
        results.append(
            VideoResult(entry.id, int(entry.ground_truth), rep.count,
                        percent_error(entry.ground_truth, rep.count))
        )
    return report_from_results(results, failures, config_echo(cfg, p, fusion))


@dataclass(frozen=True)
class TableRow:
    label: str
    report: EvalReport

    def to_dict(self) -> dict:
        r = self.report
        return {
            "label": self.label,
            "mae": r.mae,
            "sigma_counts": r.sigma_counts,
            "sigma_percent": r.sigma_percent,
            "n_videos": len(r.per_video),
            "n_failures": len(r.failures),
        }


def sweep_thresholds(
    manifest: list[ManifestEntry],
    alphas,
    cfg: FmfConfig = FmfConfig(),
    p: PeakParams = PeakParams(),
    fusion: Fusion | str = Fusion.SPATIAL,
) -> list[TableRow]:
    """One run per fixed alpha (input order), then the multi-stage run."""
    loader = _Loader()
    adaptive = replace(cfg, fixed_alpha=None, enabled=True)
    rows = [
        TableRow(str(a), evaluate(manifest, replace(adaptive, fixed_alpha=int(a)), p, fusion, loader))
        for a in alphas
    ]
    rows.append(TableRow(MULTI_STAGE, evaluate(manifest, adaptive, p, fusion, loader)))
    return rows


ABLATION_STREAMS = (Fusion.SPATIAL, Fusion.TEMPORAL, Fusion.CONCAT)


def ablate_fmf(
    manifest: list[ManifestEntry],
    cfg: FmfConfig = FmfConfig(),
    p: PeakParams = PeakParams(),
) -> dict[tuple[str, str], EvalReport]:
    """Keys are ``(stream, "off" | "on")``, ordered like the two blocks of
    the published ablation table (all "off" first)."""
    loader = _Loader()
    out = {}
    for state in ("off", "on"):
        c = replace(cfg, enabled=(state == "on"))
        for stream in ABLATION_STREAMS:
            out[(stream.value, state)] = evaluate(manifest, c, p, stream, loader)
    return out


def combine_datasets(reports: dict[str, EvalReport]) -> list[tuple[str, float | None, float | None, float | None]]:
    """Per-dataset rows plus two "overall" rows: the mean of the per-dataset
    values, and the statistics pooled over every video."""
    rows = [(name, r.mae, r.sigma_counts, r.sigma_percent) for name, r in reports.items()]
    valid = [r for r in reports.values() if r.mae is not None]
    if valid:
        mean = lambda xs: math.fsum(xs) / len(xs)  # noqa: E731
        rows.append((
            "overall (mean of datasets)",
            mean([r.mae for r in valid]),
            mean([r.sigma_counts for r in valid]),
            mean([r.sigma_percent for r in valid]),
        ))
    else:
        rows.append(("overall (mean of datasets)", None, None, None))
    pooled = aggregate((v.G, v.R) for r in reports.values() for v in r.per_video)
    rows.append(("overall (pooled)", *pooled))
    return rows


# -- text tables -------------------------------------------------------------

def fmt(x: float | None) -> str:
    return "n/a" if x is None else f"{x:.4f}"


def render_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def render_report(report: EvalReport) -> str:
    rows = [[v.id, str(v.G), str(v.R), str(v.R - v.G), fmt(v.percent_error)] for v in report.per_video]
    out = render_table(["id", "G", "R", "R-G", "error%"], rows)
    for vid, err in report.failures:
        out += f"FAILED {vid}: {err}\n"
    out += render_table(
        ["videos", "failed", "mae", "sigma_counts", "sigma_percent"],
        [[str(len(report.per_video)), str(len(report.failures)),
          fmt(report.mae), fmt(report.sigma_counts), fmt(report.sigma_percent)]],
    )
    return out


def render_sweep(rows: list[TableRow]) -> str:
    return render_table(
        ["alpha", "mae", "sigma_counts", "sigma_percent", "videos", "failed"],
        [[r.label, fmt(r.report.mae), fmt(r.report.sigma_counts), fmt(r.report.sigma_percent),
          str(len(r.report.per_video)), str(len(r.report.failures))] for r in rows],
    )


_STREAM_LABEL = {"spatial": "RGB", "temporal": "FLOW", "concat": "RGB+FLOW"}


def render_ablation(table: dict[tuple[str, str], EvalReport]) -> str:
    rows = []
    for (stream, state), r in table.items():
        rows.append([
            "with FMF" if state == "on" else "without FMF",
            _STREAM_LABEL[stream],
            fmt(r.mae), fmt(r.sigma_counts), fmt(r.sigma_percent),
            str(len(r.per_video)), str(len(r.failures)),
        ])
    return render_table(["block", "stream", "mae", "sigma_counts", "sigma_percent", "videos", "failed"], rows)


def render_datasets(rows) -> str:
    return render_table(
        ["dataset", "mae", "sigma_counts", "sigma_percent"],
        [[name, fmt(a), fmt(b), fmt(c)] for name, a, b, c in rows],
    )
