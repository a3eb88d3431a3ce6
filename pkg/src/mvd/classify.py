"""Lightweight deterministic classifiers over feature vectors.

Everything here is seeded and self-contained by design: the sweep
harness needs bit-identical accuracies across re-runs, which rules out
thread-dependent or implicitly-randomized training. The linear models
train with per-sample SGD (hinge or log loss, one-vs-rest) using the
inverse-scaling step eta_t = eta0 / (1 + eta0 * lambda * t), which
follows the classic 1/(lambda*t) decay asymptotically.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.special import expit

from .errors import InsufficientClassSize, InvalidInput
from .features import FeatureVector, apply_normalizer, fit_normalizer


class ModelKind(Enum):
    LINEAR_SVM = "svm"
    KNN = "knn"
    LOGISTIC = "logistic"


KNN_NEIGHBORS = 5


@dataclass(frozen=True)
class TrainConfig:
    model: ModelKind = ModelKind.LINEAR_SVM
    seed: int = 1729
    epochs: int = 50
    l2_lambda: float = 1e-4
    learning_rate: float = 0.1
    folds: int = 5

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.folds < 2:
            raise ValueError(f"folds must be >= 2, got {self.folds}")
        if self.l2_lambda < 0:
            raise ValueError(f"l2_lambda must be >= 0, got {self.l2_lambda}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")


@dataclass(frozen=True, eq=False)
class LinearModel:
    """One-vs-rest linear scorer: one weight row and bias per class."""

    kind: ModelKind
    labels: tuple[str, ...]
    weights: np.ndarray  # (classes, dims)
    biases: np.ndarray  # (classes,)
    objective_per_epoch: tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class KnnModel:
    """Memorized training set; majority vote over the nearest neighbors."""

    labels: tuple[str, ...]
    points: np.ndarray  # (n, dims)
    point_labels: np.ndarray  # (n,) indices into labels
    k: int


Model = LinearModel | KnnModel


@dataclass(frozen=True, eq=False)
class EvalResult:
    """Cross-validation outcome: accuracies plus a pooled confusion matrix
    (rows = true label, columns = predicted, counts summed over folds)."""

    labels: tuple[str, ...]
    mean_accuracy: float
    per_fold_accuracy: tuple[float, ...]
    confusion: np.ndarray


def _as_matrix(features: list[FeatureVector]) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    if not features:
        raise InvalidInput("empty feature set")
    dims = {v.values.size for v in features}
    if len(dims) != 1:
        raise InvalidInput(f"inconsistent feature dimensions: {sorted(dims)}")
    labels = tuple(sorted({v.label for v in features}))
    index = {label: i for i, label in enumerate(labels)}
    x = np.stack([v.values for v in features])
    y = np.array([index[v.label] for v in features], dtype=np.int64)
    return x, y, labels


def stratified_folds(features: list[FeatureVector], k: int, seed: int) -> list[np.ndarray]:
    """Partition indices into k folds with per-class counts differing by <= 1.

    Each class's indices are shuffled with the seeded generator and dealt
    round-robin, with the starting fold rotated per class to balance fold
    sizes. Deterministic for a fixed seed.
    """
    if k < 2:
        raise InvalidInput(f"need at least 2 folds, got {k}")
    _, y, labels = _as_matrix(features)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for class_idx, label in enumerate(labels):
        members = np.flatnonzero(y == class_idx)
        if members.size < k:
            raise InsufficientClassSize(
                f"class {label!r} has {members.size} members, fewer than {k} folds"
            )
        members = rng.permutation(members)
        for j, sample_idx in enumerate(members):
            folds[(j + class_idx) % k].append(int(sample_idx))
    return [np.array(sorted(fold), dtype=np.int64) for fold in folds]


def _train_sgd(x: np.ndarray, y: np.ndarray, n_classes: int, cfg: TrainConfig):
    """Per-sample one-vs-rest SGD shared by the SVM and logistic models."""
    n, dims = x.shape
    weights = np.zeros((n_classes, dims))
    biases = np.zeros(n_classes)
    targets = np.full((n, n_classes), -1.0)
    targets[np.arange(n), y] = 1.0
    rng = np.random.default_rng(cfg.seed)
    objective: list[float] = []
    t = 1
    for _ in range(cfg.epochs):
        for i in rng.permutation(n):
            eta = cfg.learning_rate / (1.0 + cfg.learning_rate * cfg.l2_lambda * t)
            scores = weights @ x[i] + biases
            weights *= 1.0 - eta * cfg.l2_lambda
            if cfg.model is ModelKind.LINEAR_SVM:
                violated = targets[i] * scores < 1.0
                if violated.any():
                    weights[violated] += eta * np.outer(targets[i, violated], x[i])
                    biases[violated] += eta * targets[i, violated]
            else:  # logistic: gradient of log loss on 0/1 targets
                err = expit(scores) - (targets[i] > 0)
                weights -= eta * np.outer(err, x[i])
                biases -= eta * err
            t += 1
        if cfg.model is ModelKind.LINEAR_SVM:
            margins = 1.0 - targets * (x @ weights.T + biases)
            hinge = np.maximum(0.0, margins).mean(axis=0).sum()
            objective.append(float(hinge + 0.5 * cfg.l2_lambda * np.sum(weights**2)))
    return weights, biases, tuple(objective)


def train(train_set: list[FeatureVector], cfg: TrainConfig) -> Model:
    """Fit one model on an (already normalized) training split.

    Deterministic for a fixed cfg.seed. Requires at least two classes.
    """
    x, y, labels = _as_matrix(train_set)
    if len(labels) < 2:
        raise InvalidInput(f"training set has {len(labels)} class(es); need >= 2")
    if cfg.model is ModelKind.KNN:
        return KnnModel(labels=labels, points=x, point_labels=y, k=min(KNN_NEIGHBORS, len(y)))
    weights, biases, objective = _train_sgd(x, y, len(labels), cfg)
    return LinearModel(
        kind=cfg.model, labels=labels, weights=weights, biases=biases,
        objective_per_epoch=objective,
    )


def _predict_indices(model: Model, x: np.ndarray) -> np.ndarray:
    """Predicted class indices for a (n, dims) matrix."""
    if isinstance(model, LinearModel):
        scores = x @ model.weights.T + model.biases
        return np.argmax(scores, axis=1)  # argmax takes the lowest tied index

    out = np.empty(x.shape[0], dtype=np.int64)
    for row, point in enumerate(x):
        dists = np.linalg.norm(model.points - point, axis=1)
        order = np.argsort(dists, kind="stable")[: model.k]
        votes = np.bincount(model.point_labels[order], minlength=len(model.labels))
        top = np.flatnonzero(votes == votes.max())
        if top.size == 1:
            out[row] = top[0]
        else:
            # tie: side with the closest neighbor among the tied classes
            for neighbor in order:
                if model.point_labels[neighbor] in top:
                    out[row] = model.point_labels[neighbor]
                    break
    return out


def predict(model: Model, vector: FeatureVector) -> str:
    dims = model.weights.shape[1] if isinstance(model, LinearModel) else model.points.shape[1]
    if vector.values.size != dims:
        raise InvalidInput(f"feature has {vector.values.size} dims, model expects {dims}")
    idx = _predict_indices(model, vector.values[None, :])[0]
    return model.labels[idx]


def cross_validate(
    features: list[FeatureVector],
    cfg: TrainConfig,
    folds: list[np.ndarray] | None = None,
) -> EvalResult:
    """Stratified k-fold evaluation with leak-free normalization.

    For each fold the normalizer and the model are fitted on the other
    folds only, then scored on the held-out fold. `folds` overrides the
    seeded stratified split (used to test fold-placement sensitivity).
    """
    _, y_all, labels = _as_matrix(features)
    if folds is None:
        folds = stratified_folds(features, cfg.folds, cfg.seed)
    n_classes = len(labels)
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    per_fold = []
    for fold_idx, test_idx in enumerate(folds):
        test_set = set(int(i) for i in test_idx)
        train_vecs = [v for i, v in enumerate(features) if i not in test_set]
        test_vecs = [features[i] for i in test_idx]
        normalizer = fit_normalizer(train_vecs)
        train_norm = [apply_normalizer(normalizer, v) for v in train_vecs]
        model = train(train_norm, replace(cfg, seed=cfg.seed + fold_idx))
        x_test = np.stack([normalizer.transform(v.values) for v in test_vecs])
        # model labels can be a subset of the global set under custom folds
        to_global = np.array([labels.index(name) for name in model.labels])
        predicted = to_global[_predict_indices(model, x_test)]
        truth = y_all[test_idx]
        per_fold.append(float(np.mean(predicted == truth)))
        np.add.at(confusion, (truth, predicted), 1)
    return EvalResult(
        labels=labels,
        mean_accuracy=float(np.mean(per_fold)),
        per_fold_accuracy=tuple(per_fold),
        confusion=confusion,
    )
