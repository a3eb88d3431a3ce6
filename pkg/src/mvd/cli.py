"""`mvd` command line: synth, degrade, features, classify, sweep, analyze,
plan, report, and the sweep+analyze+report `pipeline` convenience.

Exit codes: 0 success, 1 usage error, 2 data error. All defaults are
fixed (seed 1729, not time-based) so repeated runs produce identical
CSV/JSON output.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import audio_io, degrade, pareto, report, sweep
from .classify import EvalResult, ModelKind, TrainConfig, cross_validate
from .degrade import FULL_LENGTH, DegradationConfig, ResampleMode
from .errors import InvalidInput, MvdError
from .features import FeatureVector, MfccParams, featurize
from .sweep import Phase, SweepPlan

DEFAULT_SEED = 1729

log = logging.getLogger("mvd")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract here is 1
    def error(self, message):
        raise _UsageError(message)


def _parse_length(text: str):
    if text == FULL_LENGTH:
        return FULL_LENGTH
    return float(text)


def _mfcc_from_json(path) -> MfccParams:
    data = json.loads(Path(path).read_text())
    try:
        return MfccParams(**data)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{path}: bad MFCC params: {exc}") from None


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        model=ModelKind(args.model),
        seed=args.seed,
        folds=args.folds,
    )


def _plan_from_args(args, source_rate: int, source_depth: int, source_duration: float) -> SweepPlan:
    phase = Phase(args.phase)
    mfcc_params = _mfcc_from_json(args.params) if args.params else MfccParams()
    base = sweep.default_plan(
        phase,
        source_rate_hz=source_rate,
        source_bit_depth=source_depth,
        source_duration_s=source_duration,
        resample_mode=ResampleMode(args.mode),
        mfcc_params=mfcc_params,
        train_config=_train_config(args),
    )
    if not args.plan:
        return base
    overrides = json.loads(Path(args.plan).read_text())
    known = {"sample_rates_hz", "bit_depths", "clip_lengths_s"}
    unknown = set(overrides) - known
    if unknown:
        raise InvalidInput(f"{args.plan}: unknown plan keys {sorted(unknown)}")
    kwargs = {}
    for key in known & set(overrides):
        values = overrides[key]
        if key == "clip_lengths_s":
            values = tuple(v if v == FULL_LENGTH else float(v) for v in values)
        else:
            values = tuple(int(v) for v in values)
        kwargs[key] = values
    return replace(base, **kwargs)


# --- feature CSV ----------------------------------------------------------


def _write_features_csv(vectors: list[FeatureVector], path) -> None:
    dim = vectors[0].values.size
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + [f"f{i}" for i in range(dim)])
        for v in vectors:
            writer.writerow([v.label] + [repr(float(x)) for x in v.values])


def _read_features_csv(path) -> list[FeatureVector]:
    vectors = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "label":
            raise InvalidInput(f"{path}: expected a 'label,f0..' feature CSV")
        for row in reader:
            if not row:
                continue
            vectors.append(FeatureVector(values=np.array([float(x) for x in row[1:]]), label=row[0]))
    if not vectors:
        raise InvalidInput(f"{path}: no feature rows")
    return vectors


def _eval_to_dict(result: EvalResult) -> dict:
    return {
        "mean_accuracy": result.mean_accuracy,
        "per_fold_accuracy": list(result.per_fold_accuracy),
        "labels": list(result.labels),
        "confusion": result.confusion.tolist(),
    }


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --- subcommands ----------------------------------------------------------


def _cmd_synth(args) -> int:
    spec = audio_io.SynthSpec(
        num_classes=args.classes,
        clips_per_class=args.clips_per_class,
        sample_rate_hz=args.rate,
        duration_s=args.duration,
        seed=args.seed,
        max_content_hz=args.max_content_hz,
    )
    clips = audio_io.generate_synthetic(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, clip in enumerate(clips):
        name = f"{clip.label}_{i % args.clips_per_class:03d}.wav"
        audio_io.write_wav(clip, 16, out_dir / name)
        rows.append((name, clip.label))
    manifest = out_dir / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "label"])
        writer.writerows(rows)
    print(manifest)
    return 0


def _cmd_degrade(args) -> int:
    clip = audio_io.read_wav(args.in_path)
    cfg = DegradationConfig(
        sample_rate_hz=args.rate if args.rate else clip.sample_rate_hz,
        bit_depth=args.bits if args.bits else clip.source_bit_depth,
        clip_length_s=args.length,
    )
    degraded = degrade.apply(clip, cfg, ResampleMode(args.mode))
    container = next(b for b in audio_io.SUPPORTED_FILE_DEPTHS if b >= degraded.source_bit_depth)
    audio_io.write_wav(degraded, container, args.out_path)
    return 0


def _cmd_features(args) -> int:
    manifest = audio_io.load_manifest(args.manifest)
    clips, failures = sweep.load_dataset(manifest)
    params = _mfcc_from_json(args.params) if args.params else MfccParams()
    vectors = [featurize(clip, params) for clip in clips]
    _write_features_csv(vectors, args.out)
    if failures:
        print(f"skipped {len(failures)} unreadable entries", file=sys.stderr)
    return 0


def _cmd_classify(args) -> int:
    vectors = _read_features_csv(args.features)
    result = cross_validate(vectors, _train_config(args))
    _emit_json(_eval_to_dict(result), args.out)
    return 0


def _load_clips(args):
    manifest = audio_io.load_manifest(args.manifest)
    clips, failures = sweep.load_dataset(manifest)
    if failures:
        print(f"skipped {len(failures)} unreadable entries", file=sys.stderr)
    return clips


def _run_sweep(args) -> list[sweep.SweepResult]:
    clips = _load_clips(args)
    plan = _plan_from_args(
        args,
        source_rate=max(c.sample_rate_hz for c in clips),
        source_depth=max(c.source_bit_depth for c in clips),
        source_duration=max(c.duration_seconds for c in clips),
    )
    cache_dir = args.cache_dir or os.environ.get("MVD_CACHE_DIR")
    return sweep.run_sweep(clips, plan, workers=args.workers, cache_dir=cache_dir)


def _cmd_sweep(args) -> int:
    results = _run_sweep(args)
    report.results_to_csv(results, args.out)
    return 0


def _cmd_analyze(args) -> int:
    results = report.results_from_csv(args.results)
    analysis = report.analyze(results, theta=args.theta, primary_axis=args.axis)
    _emit_json(report.report_to_dict(analysis), args.out)
    return 0


def _cmd_plan(args) -> int:
    raw = json.loads(Path(args.catalog).read_text())
    try:
        catalog = [pareto.SensorCatalogEntry(**entry) for entry in raw]
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{args.catalog}: bad catalog entry: {exc}") from None
    plan = pareto.plan_fleet(args.budget, args.years, catalog, args.min_acc)
    _emit_json(asdict(plan), args.out)
    return 0


def _cmd_report(args) -> int:
    results = report.results_from_csv(args.results)
    analysis = report.analyze(results, theta=args.theta, primary_axis=args.axis)
    for path in report.emit_report(results, analysis, args.out_dir):
        print(path)
    return 0


def _cmd_pipeline(args) -> int:
    results = _run_sweep(args)
    analysis = report.analyze(results, theta=args.theta, primary_axis=args.axis)
    for path in report.emit_report(results, analysis, args.out_dir):
        print(path)
    return 0


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mvd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_seed(p):
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("synth", help="generate a seeded synthetic WAV corpus + manifest")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--clips-per-class", type=int, default=40)
    p.add_argument("--rate", type=int, default=44_100)
    p.add_argument("--duration", type=float, default=2.0)
    p.add_argument("--max-content-hz", type=float, default=1_500.0)
    add_seed(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("degrade", help="degrade one WAV file")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", dest="out_path", required=True)
    p.add_argument("--rate", type=int)
    p.add_argument("--bits", type=int)
    p.add_argument("--len", dest="length", type=_parse_length, default=FULL_LENGTH)
    p.add_argument("--mode", choices=[m.value for m in ResampleMode], default="decimate")
    p.set_defaults(func=_cmd_degrade)

    p = sub.add_parser("features", help="featurize a manifest into a CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--params", help="MFCC params JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("classify", help="cross-validate a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--model", choices=[m.value for m in ModelKind], default="svm")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out")
    add_seed(p)
    p.set_defaults(func=_cmd_classify)

    def add_sweep_args(p):
        p.add_argument("--manifest", required=True)
        p.add_argument("--phase", choices=[ph.value for ph in Phase], required=True)
        p.add_argument("--plan", help="JSON grid overrides")
        p.add_argument("--params", help="MFCC params JSON")
        p.add_argument("--model", choices=[m.value for m in ModelKind], default="svm")
        p.add_argument("--folds", type=int, default=5)
        p.add_argument("--mode", choices=[m.value for m in ResampleMode], default="decimate")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        p.add_argument("--cache-dir", help="feature cache (or env MVD_CACHE_DIR)")
        add_seed(p)

    p = sub.add_parser("sweep", help="run a degradation sweep over a manifest")
    add_sweep_args(p)
    p.add_argument("--out", default="results.csv", help="results CSV path (default ./results.csv)")
    p.set_defaults(func=_cmd_sweep)

    def add_analysis_args(p):
        p.add_argument("--theta", type=float, default=pareto.DEFAULT_RETENTION_THETA)
        p.add_argument("--axis", choices=report.AXES, default="bytes")

    p = sub.add_parser("analyze", help="knees, frontier, and MVD from a results CSV")
    p.add_argument("--results", required=True)
    add_analysis_args(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("plan", help="budget a sensor fleet from a catalog JSON")
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--years", type=float, default=0.0)
    p.add_argument("--catalog", required=True)
    p.add_argument("--min-acc", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("report", help="render CSV/JSON/SVG outputs from results")
    p.add_argument("--results", required=True)
    p.add_argument("--out-dir", required=True)
    add_analysis_args(p)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("pipeline", help="sweep + analyze + report in one go")
    add_sweep_args(p)
    add_analysis_args(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except MvdError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
