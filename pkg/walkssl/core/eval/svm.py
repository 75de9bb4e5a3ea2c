"""
Copyright 2024 The walkssl authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""

"""
Linear one-vs-rest SVM trained by primal stochastic subgradient descent.

Each class gets a weight vector and bias minimizing
``reg/2 * |w|^2 + mean(max(0, 1 - y * (w.x + b)))`` on standardized
features. The bias is trained as the weight of a constant input.
"""

import logging
from typing import Sequence

import numpy as np
import pandas as pd
from pydantic import Field, field_validator, model_validator

from walkssl.core.abc import ArrayModel, ConfigError, DatasetError, DimensionError
from walkssl.libs import SysUtil

logger = logging.getLogger(__name__)

DEFAULT_REG_GRID = (1e-4, 1e-3, 1e-2, 1e-1)


class SvmModel(ArrayModel):
    """
    Attributes:
        classes (list[str]): Class labels; row ``c`` of ``weights`` scores ``classes[c]``.
        weights (np.ndarray): (C, F) weights in standardized feature space.
        biases (np.ndarray): (C,) biases.
        mean (np.ndarray): (F,) training feature mean.
        scale (np.ndarray): (F,) training feature standard deviation, zeros replaced by 1.
        reg_strength (float): L2 regularization strength.
        epochs (int): Passes over the training set.
        seed (int): Seed of the sample order.
        objective (list[float]): Mean objective over classes, at start and after every epoch.
    """

    classes: list[str]
    weights: np.ndarray
    biases: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    reg_strength: float = Field(1e-3, gt=0)
    epochs: int = Field(50, ge=0)
    seed: int = 0
    objective: list[float] = Field(default_factory=list)

    @field_validator("weights", mode="before")
    @classmethod
    def _coerce_weights(cls, value):
        return cls.as_array(value, np.float64, ndim=2)

    @field_validator("biases", "mean", "scale", mode="before")
    @classmethod
    def _coerce_vectors(cls, value):
        return cls.as_array(value, np.float64, ndim=1)

    @model_validator(mode="after")
    def _check(self):
        n_classes, dim = self.weights.shape
        if len(self.classes) != n_classes or self.biases.shape[0] != n_classes:
            raise DimensionError(f"{len(self.classes)} weight rows and biases", n_classes)
        if self.mean.shape[0] != dim or self.scale.shape[0] != dim:
            raise DimensionError(dim, (self.mean.shape[0], self.scale.shape[0]))
        return self

    @property
    def dim(self) -> int:
        return int(self.weights.shape[1])

    def standardize(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dim:
            raise DimensionError(self.dim, x.shape[-1])
        return (x - self.mean) / self.scale

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        """Per-class decision values, (C,) for one feature or (n, C) for a matrix."""
        return self.standardize(x) @ self.weights.T + self.biases


def _split_features(features: Sequence, labels: Sequence[str] | None):
    if labels is None:
        labels = [f.label for f in features]
        features = [f.values for f in features]
    x = np.stack([np.asarray(f, dtype=np.float64) for f in features])
    if len(labels) != x.shape[0]:
        raise DimensionError(x.shape[0], len(labels))
    if any(label is None for label in labels):
        raise DatasetError("Every SVM training sample needs a label.")
    return x, [str(label) for label in labels]


def _objective(w: np.ndarray, x: np.ndarray, y: np.ndarray, reg: float) -> float:
    hinge = np.maximum(0.0, 1.0 - y * (x @ w.T)).mean(axis=0)
    return float(np.mean(0.5 * reg * np.sum(w * w, axis=1) + hinge))


def svm_train(
    features: Sequence,
    labels: Sequence[str] | None = None,
    reg_strength: float = 1e-3,
    epochs: int = 50,
    seed: int = 0,
) -> SvmModel:
    """
    Train one-vs-rest linear SVMs.

    ``features`` are FeatureVectors carrying their labels, or arrays paired
    with ``labels``. Every class shares the same per-epoch sample order drawn
    from ``seed``, with step size ``1 / (reg_strength * t)``.

    Raises:
        ConfigError: If ``reg_strength`` is not positive.
        DatasetError: If fewer than two classes are present.
    """
    if reg_strength <= 0:
        raise ConfigError(f"reg_strength must be positive, got {reg_strength}.")
    if not len(features):
        raise DatasetError("SVM training needs at least one sample.")
    x, labels = _split_features(features, labels)
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise DatasetError(f"SVM training needs at least two classes, got {classes}.")

    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0] = 1.0
    xs = np.hstack([(x - mean) / scale, np.ones((x.shape[0], 1))])
    y = np.where(np.array(labels)[:, None] == np.array(classes)[None, :], 1.0, -1.0)

    n = xs.shape[0]
    w = np.zeros((len(classes), xs.shape[1]))
    radius = 1.0 / np.sqrt(reg_strength)
    objective = [_objective(w, xs, y, reg_strength)]
    t = 0
    for epoch in range(epochs):
        for i in SysUtil.rng(seed, epoch).permutation(n):
            t += 1
            eta = 1.0 / (reg_strength * t)
            violated = y[i] * (w @ xs[i]) < 1.0
            w *= 1.0 - eta * reg_strength
            w[violated] += eta * y[i, violated, None] * xs[i]
            norms = np.linalg.norm(w, axis=1)
            shrink = np.minimum(1.0, radius / np.maximum(norms, 1e-300))
            w *= shrink[:, None]
        objective.append(_objective(w, xs, y, reg_strength))
    logger.debug(
        f"SVM trained on {n} samples, {len(classes)} classes: objective {objective[0]:.4f} -> {objective[-1]:.4f}"
    )
    return SvmModel(
        classes=classes,
        weights=w[:, :-1],
        biases=w[:, -1],
        mean=mean,
        scale=scale,
        reg_strength=reg_strength,
        epochs=epochs,
        seed=seed,
        objective=objective,
    )


def svm_predict(model: SvmModel, feature) -> str:
    """
    Class with the largest decision value; ties go to the lowest class index.

    Raises:
        DimensionError: If the feature size differs from the model's.
    """
    values = getattr(feature, "values", feature)
    scores = model.decision_function(np.asarray(values, dtype=np.float64).reshape(-1))
    return model.classes[int(np.argmax(scores))]


def svm_predict_many(model: SvmModel, features: Sequence) -> list[str]:
    if not len(features):
        return []
    x = np.stack([np.asarray(getattr(f, "values", f), dtype=np.float64) for f in features])
    return [model.classes[i] for i in np.argmax(model.decision_function(x), axis=1)]


def accuracy(predictions: Sequence[str], labels: Sequence[str]) -> float:
    """
    Fraction of predictions equal to their label.

    Raises:
        DatasetError: If the inputs are empty.
        DimensionError: If the lengths differ.
    """
    if len(predictions) != len(labels):
        raise DimensionError(len(labels), len(predictions))
    if not len(labels):
        raise DatasetError("Accuracy of an empty prediction set is undefined.")
    return float(np.mean([p == t for p, t in zip(predictions, labels)]))


def confusion_matrix(
    predictions: Sequence[str], labels: Sequence[str], classes: Sequence[str] | None = None
) -> pd.DataFrame:
    """Counts with true labels as rows and predictions as columns."""
    if len(predictions) != len(labels):
        raise DimensionError(len(labels), len(predictions))
    classes = list(classes) if classes is not None else sorted(set(labels) | set(predictions))
    table = pd.crosstab(
        pd.Series(list(labels), name="true"), pd.Series(list(predictions), name="predicted")
    )
    return table.reindex(index=classes, columns=classes, fill_value=0).astype(int)


def holdout_split(labels: Sequence[str], fraction: float = 0.2, seed: int = 0) -> np.ndarray:
    """
    Boolean mask of a stratified hold-out fold.

    Each class with at least two samples gives ``max(1, round(fraction * n))``
    of them, chosen by a permutation drawn from ``seed``.
    """
    labels = np.asarray(labels, dtype=object)
    mask = np.zeros(labels.shape[0], dtype=bool)
    rng = SysUtil.rng(seed)
    for label in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == label)
        if idx.size < 2:
            continue
        n_out = min(idx.size - 1, max(1, int(round(fraction * idx.size))))
        mask[rng.permutation(idx)[:n_out]] = True
    return mask


def svm_grid_search(
    features: Sequence,
    labels: Sequence[str] | None = None,
    grid: Sequence[float] = DEFAULT_REG_GRID,
    epochs: int = 50,
    seed: int = 0,
    holdout: float = 0.2,
) -> tuple[float, dict[float, float]]:
    """
    Pick the regularization strength with the best hold-out accuracy.

    Ties go to the strongest regularization.

    Returns:
        The chosen strength and the hold-out accuracy of every grid value.
    """
    x, labels = _split_features(features, labels)
    mask = holdout_split(labels, holdout, seed)
    if not mask.any():
        raise DatasetError("Grid search needs a class with at least two samples.")
    y = np.array(labels, dtype=object)
    scores = {}
    for reg in grid:
        model = svm_train(list(x[~mask]), y[~mask].tolist(), reg, epochs, seed)
        scores[float(reg)] = accuracy(svm_predict_many(model, list(x[mask])), y[mask].tolist())
    best = max(sorted(scores, reverse=True), key=lambda r: scores[r])
    logger.info(f"SVM grid search picked reg_strength={best:g} ({scores[best]:.4f} hold-out accuracy)")
    return best, scores


def classification_report(model: SvmModel, features: Sequence) -> dict:
    """
    Returns:
        ``{"accuracy", "confusion_matrix", "classes", "n_samples"}`` over labelled ``features``.
    """
    labels = [f.label for f in features]
    if any(label is None for label in labels):
        raise DatasetError("A classification report needs labelled features.")
    preds = svm_predict_many(model, features)
    classes = sorted(set(model.classes) | set(labels))
    cm = confusion_matrix(preds, labels, classes)
    return {
        "accuracy": accuracy(preds, labels),
        "confusion_matrix": cm.values.tolist(),
        "classes": classes,
        "n_samples": len(labels),
    }
