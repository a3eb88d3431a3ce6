"""Result serialization and report emission (CSV, JSON, SVG charts).

CSV and JSON outputs are byte-stable for identical inputs: floats are
written with repr (shortest round-trip form) and JSON keys are sorted.
Charts are rendered with matplotlib's SVG backend; a fixed hash salt and
stripped date metadata keep those stable too, apart from the backend's
own version comment line.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "mvd"

import matplotlib.pyplot as plt

from .classify import EvalResult
from .degrade import DegradationConfig
from .errors import InvalidInput, ParseError
from .pareto import (
    DEFAULT_RETENTION_THETA,
    CurvePoint,
    KneeReport,
    MvdSelection,
    knee,
    pareto_frontier,
    select_mvd,
)
from .sweep import CostBreakdown, SweepResult

RESULT_COLUMNS = (
    "sample_rate_hz",
    "bit_depth",
    "clip_length_s",
    "mean_accuracy",
    "fold_accuracies",
    "bytes_per_clip",
    "relative_cost",
    "wall_time_s",
)

AXES = ("bytes", "rate", "depth", "length")


# --- results CSV ----------------------------------------------------------


def results_to_csv(results: list[SweepResult], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for r in results:
            writer.writerow(
                [
                    r.config.sample_rate_hz,
                    r.config.bit_depth,
                    repr(float(r.config.clip_length_s)),
                    repr(r.eval.mean_accuracy),
                    ";".join(repr(a) for a in r.eval.per_fold_accuracy),
                    r.cost.bytes_per_clip,
                    repr(r.cost.relative_cost),
                    repr(r.wall_time_s),
                ]
            )


def results_from_csv(path) -> list[SweepResult]:
    """Rehydrate sweep results from their CSV form.

    The confusion matrix is not serialized, so loaded results carry an
    empty one; everything the analysis layer needs survives the trip.
    """
    results = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != RESULT_COLUMNS:
            raise ParseError(f"{path}: expected columns {','.join(RESULT_COLUMNS)}")
        for row in reader:
            try:
                config = DegradationConfig(
                    sample_rate_hz=int(row["sample_rate_hz"]),
                    bit_depth=int(row["bit_depth"]),
                    clip_length_s=float(row["clip_length_s"]),
                )
                folds = tuple(float(v) for v in row["fold_accuracies"].split(";") if v)
                evaluation = EvalResult(
                    labels=(),
                    mean_accuracy=float(row["mean_accuracy"]),
                    per_fold_accuracy=folds,
                    confusion=np.zeros((0, 0), dtype=np.int64),
                )
                cost = CostBreakdown(
                    bytes_per_clip=int(row["bytes_per_clip"]),
                    bytes_per_second_stream=int(row["sample_rate_hz"]) * int(row["bit_depth"]) / 8.0,
                    relative_cost=float(row["relative_cost"]),
                )
                wall = float(row["wall_time_s"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{path}: bad row {row!r}: {exc}") from None
            results.append(SweepResult(config=config, eval=evaluation, cost=cost, wall_time_s=wall))
    if not results:
        raise ParseError(f"{path}: no result rows")
    return results


# --- analysis -------------------------------------------------------------


@dataclass(frozen=True)
class AxisCurve:
    axis: str
    points: tuple[CurvePoint, ...]
    knee: KneeReport | None  # None when the curve is too short to assess


@dataclass(frozen=True)
class FrontierPoint:
    sample_rate_hz: int
    bit_depth: int
    clip_length_s: float
    accuracy: float
    bytes_per_clip: int
    relative_cost: float


@dataclass(frozen=True)
class SavingsSummary:
    relative_cost: float
    bytes_saved_per_clip: int
    bytes_saved_per_1000_clips: int


@dataclass(frozen=True)
class AnalysisReport:
    theta: float
    primary_axis: str
    curves: tuple[AxisCurve, ...]
    frontier: tuple[FrontierPoint, ...]
    mvd: MvdSelection
    savings: SavingsSummary


def _axis_value(result: SweepResult, axis: str) -> float:
    if axis == "rate":
        return float(result.config.sample_rate_hz)
    if axis == "depth":
        return float(result.config.bit_depth)
    if axis == "length":
        return float(result.config.clip_length_s)
    return float(result.cost.bytes_per_clip)


def _axis_curve(results: list[SweepResult], axis: str) -> AxisCurve | None:
    """Accuracy-vs-axis curve, other axes pinned at their best values.

    The bytes axis uses every result, collapsing equal-byte configs to
    their best accuracy so costs stay strictly increasing.
    """
    if axis == "bytes":
        best: dict[float, float] = {}
        for r in results:
            cost = _axis_value(r, axis)
            best[cost] = max(best.get(cost, -1.0), r.accuracy)
        pool = sorted(best.items())
        points = [CurvePoint(cost=c, accuracy=a) for c, a in pool]
    else:
        others = {"rate": ("depth", "length"), "depth": ("rate", "length"), "length": ("rate", "depth")}
        pinned = {o: max(_axis_value(r, o) for r in results) for o in others[axis]}
        selected = [
            r
            for r in results
            if all(_axis_value(r, o) == pinned[o] for o in others[axis])
        ]
        selected.sort(key=lambda r: _axis_value(r, axis))
        points = [CurvePoint(cost=_axis_value(r, axis), accuracy=r.accuracy) for r in selected]
    if len(points) < 2:
        return None
    report = knee(points) if len(points) >= 3 else None
    return AxisCurve(axis=axis, points=tuple(points), knee=report)


def analyze(
    results: list[SweepResult],
    theta: float = DEFAULT_RETENTION_THETA,
    primary_axis: str = "bytes",
) -> AnalysisReport:
    """Distill sweep results into knees, the frontier, and the MVD pick."""
    if not results:
        raise InvalidInput("analyze needs at least one result")
    if primary_axis not in AXES:
        raise InvalidInput(f"primary_axis must be one of {AXES}, got {primary_axis!r}")
    curves = tuple(c for c in (_axis_curve(results, a) for a in AXES) if c is not None)
    frontier = tuple(
        FrontierPoint(
            sample_rate_hz=r.config.sample_rate_hz,
            bit_depth=r.config.bit_depth,
            clip_length_s=float(r.config.clip_length_s),
            accuracy=r.accuracy,
            bytes_per_clip=r.cost.bytes_per_clip,
            relative_cost=r.cost.relative_cost,
        )
        for r in pareto_frontier(results)
    )
    mvd = select_mvd(results, theta)
    chosen = next(r for r in results if r.config == mvd.config)
    baseline_bytes = max(r.cost.bytes_per_clip for r in results)
    saved = baseline_bytes - chosen.cost.bytes_per_clip
    return AnalysisReport(
        theta=theta,
        primary_axis=primary_axis,
        curves=curves,
        frontier=frontier,
        mvd=mvd,
        savings=SavingsSummary(
            relative_cost=chosen.cost.relative_cost,
            bytes_saved_per_clip=saved,
            bytes_saved_per_1000_clips=saved * 1000,
        ),
    )


# --- JSON round trip ------------------------------------------------------


def _point_dict(p: CurvePoint) -> dict:
    return {"cost": p.cost, "accuracy": p.accuracy}


def report_to_dict(report: AnalysisReport) -> dict:
    return {
        "theta": report.theta,
        "primary_axis": report.primary_axis,
        "curves": [
            {
                "axis": c.axis,
                "points": [_point_dict(p) for p in c.points],
                "knee": None
                if c.knee is None
                else {
                    "knee": None if c.knee.knee is None else _point_dict(c.knee.knee),
                    "knee_strength": c.knee.knee_strength,
                    "method": c.knee.method,
                },
            }
            for c in report.curves
        ],
        "frontier": [asdict(f) for f in report.frontier],
        "mvd": {
            "config": {
                "sample_rate_hz": report.mvd.config.sample_rate_hz,
                "bit_depth": report.mvd.config.bit_depth,
                "clip_length_s": float(report.mvd.config.clip_length_s),
            },
            "retention": report.mvd.retention,
            "savings": report.mvd.savings,
        },
        "savings": {
            "relative_cost": report.savings.relative_cost,
            "bytes_saved_per_clip": report.savings.bytes_saved_per_clip,
            "bytes_saved_per_1000_clips": report.savings.bytes_saved_per_1000_clips,
        },
    }


def report_to_json(report: AnalysisReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> AnalysisReport:
    data = json.loads(text)

    def point(d):
        return CurvePoint(cost=d["cost"], accuracy=d["accuracy"])

    curves = tuple(
        AxisCurve(
            axis=c["axis"],
            points=tuple(point(p) for p in c["points"]),
            knee=None
            if c["knee"] is None
            else KneeReport(
                knee=None if c["knee"]["knee"] is None else point(c["knee"]["knee"]),
                knee_strength=c["knee"]["knee_strength"],
                method=c["knee"]["method"],
            ),
        )
        for c in data["curves"]
    )
    frontier = tuple(FrontierPoint(**f) for f in data["frontier"])
    mvd = MvdSelection(
        config=DegradationConfig(
            sample_rate_hz=data["mvd"]["config"]["sample_rate_hz"],
            bit_depth=data["mvd"]["config"]["bit_depth"],
            clip_length_s=data["mvd"]["config"]["clip_length_s"],
        ),
        retention=data["mvd"]["retention"],
        savings=data["mvd"]["savings"],
    )
    return AnalysisReport(
        theta=data["theta"],
        primary_axis=data["primary_axis"],
        curves=curves,
        frontier=frontier,
        mvd=mvd,
        savings=SavingsSummary(**data["savings"]),
    )


# --- SVG charts -----------------------------------------------------------

_AXIS_LABELS = {
    "rate": "sample rate (Hz)",
    "depth": "bit depth (bits)",
    "length": "clip length (s)",
    "bytes": "bytes per clip",
}


def _save_svg(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _curve_chart(curve: AxisCurve, report: AnalysisReport, mvd_bytes: int, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.2), dpi=96)
    xs = [p.cost for p in curve.points]
    ys = [p.accuracy for p in curve.points]
    (line,) = ax.plot(xs, ys, marker="o")
    line.set_gid("data-points")
    if curve.knee is not None and curve.knee.knee is not None:
        rule = ax.axvline(curve.knee.knee.cost, linestyle="--", color="tab:red", alpha=0.8)
        rule.set_gid("knee-rule")
        ax.annotate(
            f"knee {curve.knee.knee.cost:g}",
            xy=(curve.knee.knee.cost, curve.knee.knee.accuracy),
            xytext=(4, -12),
            textcoords="offset points",
            fontsize=8,
            color="tab:red",
        )
    mvd_x = {
        "rate": float(report.mvd.config.sample_rate_hz),
        "depth": float(report.mvd.config.bit_depth),
        "length": float(report.mvd.config.clip_length_s),
        "bytes": float(mvd_bytes),
    }[curve.axis]
    if mvd_x is not None:
        match = next((p for p in curve.points if p.cost == mvd_x), None)
        if match is not None:
            ring = ax.scatter(
                [match.cost], [match.accuracy], s=160, facecolors="none",
                edgecolors="tab:green", linewidths=1.6,
            )
            ring.set_gid("mvd-marker")
    ax.set_xlabel(_AXIS_LABELS[curve.axis])
    ax.set_ylabel("accuracy")
    ax.grid(linestyle=":", linewidth=0.5, alpha=0.7)
    fig.tight_layout()
    _save_svg(fig, path)


def _heatmap_chart(results: list[SweepResult], path: Path) -> None:
    rates = sorted({r.config.sample_rate_hz for r in results}, reverse=True)
    depths = sorted({r.config.bit_depth for r in results}, reverse=True)
    grid = np.full((len(rates), len(depths)), np.nan)
    for r in results:
        grid[rates.index(r.config.sample_rate_hz), depths.index(r.config.bit_depth)] = r.accuracy
    fig, ax = plt.subplots(figsize=(5.0, 3.6), dpi=96)
    image = ax.imshow(grid, aspect="auto", cmap="viridis", vmin=0.0, vmax=1.0)
    image.set_gid("accuracy-grid")
    ax.set_xticks(range(len(depths)), [str(d) for d in depths])
    ax.set_yticks(range(len(rates)), [str(r) for r in rates])
    ax.set_xlabel("bit depth (bits)")
    ax.set_ylabel("sample rate (Hz)")
    for i in range(len(rates)):
        for j in range(len(depths)):
            if np.isfinite(grid[i, j]):
                ax.text(j, i, f"{grid[i, j]:.2f}", ha="center", va="center", fontsize=7,
                        color="white" if grid[i, j] < 0.6 else "black")
    fig.colorbar(image, ax=ax, label="accuracy")
    fig.tight_layout()
    _save_svg(fig, path)


def emit_report(
    results: list[SweepResult],
    analysis: AnalysisReport,
    out_dir,
    formats: tuple[str, ...] = ("csv", "json", "svg"),
) -> list[Path]:
    """Write results CSV, analysis JSON, and one SVG per available axis.

    Combined sweeps (several rates x several depths) also get an
    accuracy heat grid. `formats` restricts what is emitted. Returns the
    written paths.
    """
    if not results:
        raise InvalidInput("emit_report needs at least one result")
    unknown = set(formats) - {"csv", "json", "svg"}
    if unknown:
        raise InvalidInput(f"unknown report formats: {sorted(unknown)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    if "csv" in formats:
        csv_path = out / "results.csv"
        results_to_csv(results, csv_path)
        written.append(csv_path)

    if "json" in formats:
        json_path = out / "analysis.json"
        json_path.write_text(report_to_json(analysis))
        written.append(json_path)

    if "svg" in formats:
        mvd_bytes = next(
            r.cost.bytes_per_clip for r in results if r.config == analysis.mvd.config
        )
        for curve in analysis.curves:
            svg_path = out / f"accuracy_vs_{curve.axis}.svg"
            _curve_chart(curve, analysis, mvd_bytes, svg_path)
            written.append(svg_path)

        rates = {r.config.sample_rate_hz for r in results}
        depths = {r.config.bit_depth for r in results}
        if len(rates) >= 2 and len(depths) >= 2:
            heat_path = out / "accuracy_heatmap.svg"
            _heatmap_chart(results, heat_path)
            written.append(heat_path)
    return written
