"""Decision layer: knee points, Pareto frontier, MVD choice, fleet plans.

The knee detector is the Kneedle-family max-chord-distance rule on
min-max-normalized axes, with an explicit strength threshold because
some curves (near-linear ones) simply have no knee worth reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .degrade import DegradationConfig
from .errors import (
    InsufficientPoints,
    InvalidBudget,
    InvalidCurve,
    InvalidInput,
)
from .sweep import SweepResult

KNEE_METHOD = "normalized-max-chord-distance"
DEFAULT_KNEE_THRESHOLD = 0.05
DEFAULT_RETENTION_THETA = 0.95


@dataclass(frozen=True)
class CurvePoint:
    cost: float  # resource axis: Hz, bits, seconds, or bytes
    accuracy: float

    def __post_init__(self):
        if not (math.isfinite(self.cost) and math.isfinite(self.accuracy)):
            raise ValueError("curve points must be finite")
        if self.cost <= 0:
            raise ValueError(f"cost must be positive, got {self.cost}")


@dataclass(frozen=True)
class KneeReport:
    knee: CurvePoint | None
    knee_strength: float
    method: str = KNEE_METHOD


@dataclass(frozen=True)
class MvdSelection:
    """Cheapest config whose accuracy retains >= theta of the best."""

    config: DegradationConfig
    retention: float
    savings: float  # 1 - relative_cost


@dataclass(frozen=True)
class SensorCatalogEntry:
    name: str
    unit_cost: float
    accuracy: float
    lifetime_cost_per_year: float = 0.0

    def __post_init__(self):
        if self.unit_cost <= 0:
            raise ValueError(f"unit_cost must be positive, got {self.unit_cost}")
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy must be in [0, 1], got {self.accuracy}")
        if self.lifetime_cost_per_year < 0:
            raise ValueError("lifetime_cost_per_year must be >= 0")


@dataclass(frozen=True)
class FleetPlan:
    """Homogeneous deployment of one catalog entry under a budget."""

    sensor: str
    units: int
    unit_cost: float
    total_cost: float
    accuracy: float
    below_target: bool  # no entry met the accuracy floor
    feasible: bool  # at least one unit fits the budget


def _normalize(values: np.ndarray) -> np.ndarray:
    span = values.max() - values.min()
    if span <= 0:
        return np.zeros_like(values)
    return (values - values.min()) / span


def knee(points: list[CurvePoint], strength_threshold: float = DEFAULT_KNEE_THRESHOLD) -> KneeReport:
    """Locate the interior point farthest from the first-to-last chord.

    Both axes are min-max normalized first, which makes the result
    invariant under affine rescaling of either axis. Ties go to the
    lower cost. When the best distance falls below strength_threshold
    the curve is treated as knee-free (knee=None) but the strength is
    still reported.
    """
    if len(points) < 3:
        raise InsufficientPoints(f"knee detection needs >= 3 points, got {len(points)}")
    costs = np.array([p.cost for p in points])
    if not np.all(np.diff(costs) > 0):
        raise InvalidCurve("curve costs must be strictly increasing")
    x = _normalize(costs)
    y = _normalize(np.array([p.accuracy for p in points]))
    dx, dy = x[-1] - x[0], y[-1] - y[0]
    span = math.hypot(dx, dy)
    if span <= 0:
        distances = np.zeros(len(points))
    else:
        distances = np.abs(dy * (x - x[0]) - dx * (y - y[0])) / span
    interior = distances[1:-1]
    best = int(np.argmax(interior)) + 1  # argmax already prefers the lower cost
    strength = float(interior[best - 1])
    return KneeReport(
        knee=points[best] if strength >= strength_threshold else None,
        knee_strength=strength,
    )


def pareto_frontier(results: list[SweepResult]) -> list[SweepResult]:
    """Configs not dominated in (lower bytes_per_clip, higher accuracy).

    Returned in ascending cost order. Exact (cost, accuracy) duplicates
    collapse to the entry with the lowest bit depth, then lowest rate.
    """
    if not results:
        raise InvalidInput("pareto_frontier needs at least one result")
    deduped: dict[tuple[int, float], SweepResult] = {}
    for r in results:
        key = (r.cost.bytes_per_clip, r.accuracy)
        held = deduped.get(key)
        if held is None or (r.config.bit_depth, r.config.sample_rate_hz) < (
            held.config.bit_depth,
            held.config.sample_rate_hz,
        ):
            deduped[key] = r
    ordered = sorted(deduped.values(), key=lambda r: (r.cost.bytes_per_clip, -r.accuracy))
    frontier = []
    best_accuracy = -math.inf
    for r in ordered:
        if r.accuracy > best_accuracy:
            frontier.append(r)
            best_accuracy = r.accuracy
    return frontier


def select_mvd(results: list[SweepResult], theta: float = DEFAULT_RETENTION_THETA) -> MvdSelection:
    """Cheapest config with accuracy >= theta * best accuracy.

    Byte-cost ties break toward lower sample rate, then lower bit depth,
    then shorter clip. The argmax-accuracy config always qualifies, so
    a selection always exists.
    """
    if not results:
        raise InvalidInput("select_mvd needs at least one result")
    if not 0.0 < theta <= 1.0:
        raise InvalidInput(f"theta must be in (0, 1], got {theta}")
    best_accuracy = max(r.accuracy for r in results)
    qualifying = [r for r in results if r.accuracy >= theta * best_accuracy]
    chosen = min(
        qualifying,
        key=lambda r: (
            r.cost.bytes_per_clip,
            r.config.sample_rate_hz,
            r.config.bit_depth,
            float(r.config.clip_length_s),
        ),
    )
    retention = 1.0 if best_accuracy == 0 else chosen.accuracy / best_accuracy
    return MvdSelection(
        config=chosen.config,
        retention=retention,
        savings=1.0 - chosen.cost.relative_cost,
    )


def plan_fleet(
    budget: float,
    horizon_years: float,
    catalog: list[SensorCatalogEntry],
    min_accuracy: float,
) -> FleetPlan:
    """Pick the catalog entry maximizing installed units under the budget.

    Per-unit lifetime cost is unit_cost + horizon_years * annual cost.
    Only entries meeting min_accuracy compete; if none does, the plan
    falls back to the most accurate entry at (at most) a single unit and
    is flagged below_target.
    """
    if budget <= 0:
        raise InvalidBudget(f"budget must be positive, got {budget}")
    if horizon_years < 0:
        raise InvalidInput(f"horizon_years must be >= 0, got {horizon_years}")
    if not catalog:
        raise InvalidInput("catalog must be non-empty")

    def per_unit(entry: SensorCatalogEntry) -> float:
        return entry.unit_cost + horizon_years * entry.lifetime_cost_per_year

    def units_for(entry: SensorCatalogEntry) -> int:
        return int(budget // per_unit(entry))

    qualifying = [e for e in catalog if e.accuracy >= min_accuracy]
    if qualifying:
        chosen = max(qualifying, key=lambda e: (units_for(e), e.accuracy, -per_unit(e), e.name))
        units = units_for(chosen)
        below_target = False
    else:
        chosen = max(catalog, key=lambda e: (e.accuracy, -per_unit(e), e.name))
        units = min(1, units_for(chosen))
        below_target = True
    return FleetPlan(
        sensor=chosen.name,
        units=units,
        unit_cost=chosen.unit_cost,
        total_cost=units * per_unit(chosen),
        accuracy=chosen.accuracy,
        below_target=below_target,
        feasible=units >= 1,
    )
