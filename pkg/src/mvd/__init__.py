"""Minimum-viable-data toolkit for audio classification pipelines.

Sweep controlled degradations (sample rate, bit depth, clip length) over
a labeled corpus, measure classification accuracy per configuration, and
turn the resulting cost/accuracy curves into knee points, Pareto
frontiers, an MVD operating point, and fleet deployment plans.
"""

from .audio_io import AudioClip, DatasetManifest, SynthSpec, generate_synthetic, load_manifest, read_wav, write_wav
from .classify import EvalResult, ModelKind, TrainConfig, cross_validate, predict, stratified_folds, train
from .degrade import DegradationConfig, ResampleMode, quantize, resample, truncate
from .features import FeatureVector, MfccParams, aggregate, featurize, fit_normalizer, mfcc
from .pareto import (
    CurvePoint,
    FleetPlan,
    KneeReport,
    MvdSelection,
    SensorCatalogEntry,
    knee,
    pareto_frontier,
    plan_fleet,
    select_mvd,
)
from .report import AnalysisReport, analyze, emit_report
from .sweep import (
    CostBreakdown,
    Phase,
    SweepPlan,
    SweepResult,
    cost_of,
    default_grids,
    default_plan,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "DatasetManifest",
    "SynthSpec",
    "generate_synthetic",
    "load_manifest",
    "read_wav",
    "write_wav",
    "DegradationConfig",
    "ResampleMode",
    "quantize",
    "resample",
    "truncate",
    "FeatureVector",
    "MfccParams",
    "aggregate",
    "featurize",
    "fit_normalizer",
    "mfcc",
    "EvalResult",
    "ModelKind",
    "TrainConfig",
    "cross_validate",
    "predict",
    "stratified_folds",
    "train",
    "CurvePoint",
    "FleetPlan",
    "KneeReport",
    "MvdSelection",
    "SensorCatalogEntry",
    "knee",
    "pareto_frontier",
    "plan_fleet",
    "select_mvd",
    "AnalysisReport",
    "analyze",
    "emit_report",
    "CostBreakdown",
    "Phase",
    "SweepPlan",
    "SweepResult",
    "cost_of",
    "default_grids",
    "default_plan",
    "run_sweep",
]
