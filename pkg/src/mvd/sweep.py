"""Degradation-grid sweeps: degrade -> featurize -> cross-validate per point.

A sweep takes a dataset and a plan (which axes vary, which stay fixed),
runs every grid point, and returns accuracy plus the storage/bandwidth
cost of each configuration relative to the full-fidelity point.
Degradation happens on the fly; an optional cache directory memoizes
per-config feature matrices for repeated runs.
"""

from __future__ import annotations

import hashlib
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from . import degrade
from .audio_io import AudioClip, DatasetManifest, read_wav
from .classify import EvalResult, TrainConfig, cross_validate
from .degrade import FULL_LENGTH, DegradationConfig, ResampleMode
from .errors import ConfigFailed, InvalidBaseline, InvalidDataset, InvalidInput, MvdError
from .features import FeatureVector, MfccParams, featurize

log = logging.getLogger(__name__)

DEFAULT_SAMPLE_RATES = (44_100, 22_050, 16_000, 8_000, 4_000)
DEFAULT_BIT_DEPTHS = (16, 12, 10, 8, 4)
_LONG_CLIP_GRID = (30.0, 20.0, 10.0, 5.0, 4.0, 3.0, 2.0, 1.0)


class Phase(Enum):
    SAMPLE_RATE = "rate"
    BIT_DEPTH = "depth"
    COMBINED = "combined"
    CLIP_LENGTH = "length"


@dataclass(frozen=True)
class CostBreakdown:
    """Storage/bandwidth cost of a config: file size = bitrate x length."""

    bytes_per_clip: int
    bytes_per_second_stream: float
    relative_cost: float


@dataclass(frozen=True, eq=False)
class SweepResult:
    config: DegradationConfig
    eval: EvalResult
    cost: CostBreakdown
    wall_time_s: float
    skipped_clips: int = 0

    @property
    def accuracy(self) -> float:
        return self.eval.mean_accuracy


@dataclass(frozen=True)
class SweepPlan:
    """Grid definition for one experimental phase.

    The varying axes come from `phase`; every fixed axis must hold
    exactly one value. All axes are listed highest-fidelity first.
    """

    phase: Phase
    sample_rates_hz: tuple[int, ...]
    bit_depths: tuple[int, ...]
    clip_lengths_s: tuple[float | str, ...] = (FULL_LENGTH,)
    resample_mode: ResampleMode = ResampleMode.DECIMATE
    mfcc_params: MfccParams = field(default_factory=MfccParams)
    train_config: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        varying = {
            Phase.SAMPLE_RATE: ("sample_rates_hz",),
            Phase.BIT_DEPTH: ("bit_depths",),
            Phase.COMBINED: ("sample_rates_hz", "bit_depths"),
            Phase.CLIP_LENGTH: ("clip_lengths_s",),
        }[self.phase]
        for name in ("sample_rates_hz", "bit_depths", "clip_lengths_s"):
            values = getattr(self, name)
            if not values:
                raise InvalidInput(f"{name} must be non-empty")
            if name not in varying and len(values) != 1:
                raise InvalidInput(
                    f"{name} is fixed for phase {self.phase.value!r} and must "
                    f"hold exactly one value, got {len(values)}"
                )
            keys = [_fidelity_key(v) for v in values]
            if len(set(keys)) != len(keys):
                raise InvalidInput(f"{name} holds duplicate values; grid points must be unique")
            if keys != sorted(keys, reverse=True):
                raise InvalidInput(f"{name} must be sorted descending (highest fidelity first)")

    def grid(self) -> list[DegradationConfig]:
        """All grid points, rate-major, highest fidelity first per axis."""
        return [
            DegradationConfig(sample_rate_hz=r, bit_depth=b, clip_length_s=c)
            for r in self.sample_rates_hz
            for b in self.bit_depths
            for c in self.clip_lengths_s
        ]


def _fidelity_key(value) -> float:
    return math.inf if value == FULL_LENGTH else float(value)


def default_grids(source_duration_s: float | None = None):
    """The published sweep axes: rates, depths, and (if a source duration
    is given) the matching clip-length grid."""
    lengths = None if source_duration_s is None else default_clip_grid(source_duration_s)
    return DEFAULT_SAMPLE_RATES, DEFAULT_BIT_DEPTHS, lengths


def default_clip_grid(source_duration_s: float) -> tuple[float, ...]:
    """Descending clip-length grid matched to the source duration.

    Long sources (> 5 s) step down 30/20/10/5/4/3/2/1 s; sources up to
    5 s step down in 0.5 s half-steps to 1 s; sub-second sources fall
    back to quarter fractions. The native duration always leads the grid
    so the full-fidelity point exists.
    """
    if source_duration_s <= 0:
        raise InvalidInput(f"source duration must be positive, got {source_duration_s}")
    d = float(source_duration_s)
    if d > 5.0:
        shorter = [v for v in _LONG_CLIP_GRID if v < d]
    elif d > 1.0:
        steps = np.arange(5.0, 0.9, -0.5)
        shorter = [float(v) for v in steps if v < d]
    else:
        shorter = [round(d * f, 4) for f in (0.75, 0.5, 0.25)]
    return tuple([d] + shorter)


def default_plan(
    phase: Phase,
    source_rate_hz: int = 44_100,
    source_bit_depth: int = 16,
    source_duration_s: float | None = None,
    resample_mode: ResampleMode = ResampleMode.DECIMATE,
    mfcc_params: MfccParams | None = None,
    train_config: TrainConfig | None = None,
) -> SweepPlan:
    """Build the default grids, clamped to the source's capabilities.

    Grid rates above the source rate (no upsampling) and depths above
    the source depth are dropped; the source value itself is used when
    nothing in the default grid fits.
    """
    rates = tuple(r for r in DEFAULT_SAMPLE_RATES if r <= source_rate_hz) or (source_rate_hz,)
    depths = tuple(b for b in DEFAULT_BIT_DEPTHS if b <= source_bit_depth) or (source_bit_depth,)
    if phase is Phase.CLIP_LENGTH:
        if source_duration_s is None:
            raise InvalidInput("clip-length phase needs source_duration_s for its grid")
        lengths: tuple[float | str, ...] = default_clip_grid(source_duration_s)
    else:
        lengths = (FULL_LENGTH,)
    if phase is Phase.SAMPLE_RATE:
        depths = depths[:1]
    elif phase is Phase.BIT_DEPTH:
        rates = rates[:1]
    elif phase is Phase.CLIP_LENGTH:
        rates, depths = rates[:1], depths[:1]
    return SweepPlan(
        phase=phase,
        sample_rates_hz=rates,
        bit_depths=depths,
        clip_lengths_s=lengths,
        resample_mode=resample_mode,
        mfcc_params=mfcc_params or MfccParams(),
        train_config=train_config or TrainConfig(),
    )


def cost_of(cfg: DegradationConfig, baseline: DegradationConfig) -> CostBreakdown:
    """Cost of cfg relative to a dominating full-fidelity baseline.

    bytes_per_clip = ceil(rate * depth * length / 8). relative_cost is
    the unrounded bit-volume ratio, so halving any single axis halves it
    exactly; rounding bytes first would break that. Clip lengths must be
    numeric here (run_sweep resolves "full" before costing).
    """
    for c in (cfg, baseline):
        if c.clip_length_s == FULL_LENGTH:
            raise InvalidInput("cost_of needs numeric clip lengths; resolve 'full' first")
    if (
        cfg.sample_rate_hz > baseline.sample_rate_hz
        or cfg.bit_depth > baseline.bit_depth
        or float(cfg.clip_length_s) > float(baseline.clip_length_s)
    ):
        raise InvalidBaseline(f"{cfg} exceeds baseline {baseline} on some axis")
    bits = cfg.sample_rate_hz * cfg.bit_depth * float(cfg.clip_length_s)
    base_bits = baseline.sample_rate_hz * baseline.bit_depth * float(baseline.clip_length_s)
    return CostBreakdown(
        bytes_per_clip=math.ceil(bits / 8.0),
        bytes_per_second_stream=cfg.sample_rate_hz * cfg.bit_depth / 8.0,
        relative_cost=bits / base_bits,
    )


def load_dataset(manifest: DatasetManifest) -> tuple[list[AudioClip], list[str]]:
    """Read every manifest entry; unreadable entries are reported, not fatal."""
    clips, failures = [], []
    for path, label in manifest.entries:
        try:
            clip = read_wav(path)
        except (MvdError, OSError) as exc:
            failures.append(f"{path}: {exc}")
            log.warning("skipping %s: %s", path, exc)
            continue
        expected = manifest.expected_sample_rate_hz
        if expected is not None and clip.sample_rate_hz != expected:
            log.warning("%s: sample rate %d differs from expected %d", path, clip.sample_rate_hz, expected)
        clips.append(replace(clip, label=label))
    if not clips:
        raise InvalidDataset(f"manifest {manifest.name!r}: no readable clips")
    if len({c.label for c in clips}) < 2:
        raise InvalidDataset(f"manifest {manifest.name!r}: fewer than 2 classes survived loading")
    return clips, failures


def _resolve_full(cfg: DegradationConfig, full_length_s: float) -> DegradationConfig:
    if cfg.clip_length_s == FULL_LENGTH:
        return replace(cfg, clip_length_s=full_length_s)
    return cfg


def _cache_key(clips, cfg, plan) -> str:
    text = "|".join(
        [
            "feature-cache-v1",
            ",".join(c.origin for c in clips),
            repr(cfg),
            plan.resample_mode.value,
            repr(plan.mfcc_params),
        ]
    )
    return hashlib.sha256(text.encode()).hexdigest()[:32]


def _featurize_config(
    clips: list[AudioClip],
    cfg: DegradationConfig,
    plan: SweepPlan,
    cache_dir: Path | None,
) -> tuple[list[FeatureVector], int]:
    """Degrade + featurize every clip for one grid point."""
    cache_file = None
    if cache_dir is not None:
        cache_file = Path(cache_dir) / f"{_cache_key(clips, cfg, plan)}.npz"
        if cache_file.exists():
            data = np.load(cache_file, allow_pickle=False)
            vectors = [
                FeatureVector(values=row, label=str(label))
                for row, label in zip(data["values"], data["labels"])
            ]
            return vectors, int(data["skipped"])

    vectors, skipped, last_error = [], 0, None
    for clip in clips:
        try:
            degraded = degrade.apply(clip, cfg, plan.resample_mode)
            vectors.append(featurize(degraded, plan.mfcc_params))
        except MvdError as exc:
            skipped += 1
            last_error = exc
            log.warning("config %s: skipping clip %s: %s", cfg, clip.origin, exc)
    if not vectors:
        raise ConfigFailed(f"all {len(clips)} clips failed for {cfg}: {last_error}")
    if skipped:
        log.warning("config %s: %d of %d clips skipped", cfg, skipped, len(clips))

    if cache_file is not None:
        cache_file.parent.mkdir(parents=True, exist_ok=True)
        np.savez(
            cache_file,
            values=np.stack([v.values for v in vectors]),
            labels=np.array([v.label for v in vectors]),
            skipped=skipped,
        )
    return vectors, skipped


def run_sweep(
    dataset: DatasetManifest | list[AudioClip],
    plan: SweepPlan,
    workers: int = 1,
    cache_dir=None,
) -> list[SweepResult]:
    """Evaluate every grid point; results come back in descending cost order.

    Grid points are independent and run on a bounded worker pool; the
    merge order is fixed by the grid, not by completion time, so a given
    seed reproduces every accuracy bit for bit at any worker count.
    """
    if isinstance(dataset, DatasetManifest):
        clips, _ = load_dataset(dataset)
    else:
        clips = list(dataset)
    if not clips:
        raise InvalidDataset("no clips to sweep")
    full_length = max(c.duration_seconds for c in clips)
    cache_path = Path(cache_dir) if cache_dir is not None else None

    grid = [_resolve_full(cfg, full_length) for cfg in plan.grid()]
    baseline = DegradationConfig(
        sample_rate_hz=max(c.sample_rate_hz for c in grid),
        bit_depth=max(c.bit_depth for c in grid),
        clip_length_s=max(float(c.clip_length_s) for c in grid),
    )

    def run_point(cfg: DegradationConfig) -> SweepResult:
        started = time.perf_counter()
        vectors, skipped = _featurize_config(clips, cfg, plan, cache_path)
        evaluation = cross_validate(vectors, plan.train_config)
        return SweepResult(
            config=cfg,
            eval=evaluation,
            cost=cost_of(cfg, baseline),
            wall_time_s=time.perf_counter() - started,
            skipped_clips=skipped,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_point, grid))
    else:
        results = [run_point(cfg) for cfg in grid]

    results.sort(
        key=lambda r: (
            r.cost.bytes_per_clip,
            r.config.sample_rate_hz,
            r.config.bit_depth,
            float(r.config.clip_length_s),
        ),
        reverse=True,
    )
    return results
