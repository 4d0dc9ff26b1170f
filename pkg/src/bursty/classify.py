"""Multinomial Naive Bayes over real-valued term weights, per-class
metrics, and accuracy over a grid of penalty parameters.

Features are non-negative weights laid out documents-by-terms (the
output of :mod:`bursty.weights`).  Fractional feature mass is used as-is,
as with count features.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp

from . import _io
from ._parallel import pmap
from .corpus import TermDocumentMatrix, compute_stats
from .errors import DomainError, SingleClass
from .weights import PenaltyParams, WeightMatrix, _normalize_scheme, weight_blocks

__all__ = [
    "NbModel",
    "ClassificationReport",
    "SensitivityGrid",
    "train_nb",
    "predict",
    "posterior",
    "evaluate",
    "resolve_penalty",
    "fit_evaluate",
    "sensitivity_grid",
]


@dataclass(frozen=True, eq=False)
class NbModel:
    """``log_theta[c]`` is the log of a probability vector over terms."""

    classes: tuple[str, ...]
    log_prior: np.ndarray
    log_theta: np.ndarray
    smoothing: float

    def scores(self, block) -> np.ndarray:
        """Unnormalized log-posteriors for a ``(docs, m)`` feature block."""
        if block.shape[1] != self.log_theta.shape[1]:
            raise DomainError("feature width differs from the training vocabulary")
        return np.asarray(block @ self.log_theta.T) + self.log_prior

    def to_json(self) -> dict:
        return {
            "classes": list(self.classes),
            "log_prior": self.log_prior.tolist(),
            "smoothing": self.smoothing,
        }


Features = WeightMatrix | np.ndarray | sp.spmatrix | Iterable


def _blocks(features: Features):
    """Normalize the accepted feature containers to ``(slice, block)`` pairs."""
    if isinstance(features, WeightMatrix):
        features = features.values
    if isinstance(features, (np.ndarray, sp.spmatrix)):
        yield slice(0, features.shape[0]), features
        return
    yield from features


def _check_nonnegative(block) -> None:
    data = block.data if sp.issparse(block) else block
    if data.size and data.min() < 0:
        raise DomainError("multinomial Naive Bayes needs non-negative features")


def train_nb(features: Features, labels: Sequence[str], smoothing: float = 1.0) -> NbModel:
    """Fit class priors and smoothed per-class term distributions.

    ``features`` is a :class:`WeightMatrix`, an array/CSR matrix, or an
    iterable of ``(row_slice, block)`` pairs in document order (as produced
    by :func:`bursty.weights.weight_blocks`).  Each class's parameter
    vector is ``(S_c + smoothing) / (sum(S_c) + m * smoothing)`` where
    ``S_c`` sums the class's feature rows.
    """
    if not smoothing > 0:
        raise DomainError("smoothing must be positive")
    labels = list(labels)
    classes = tuple(sorted(set(labels)))
    if len(classes) < 2:
        raise SingleClass(f"training labels contain {len(classes)} class(es); need at least 2")
    index = {c: k for k, c in enumerate(classes)}
    y = np.array([index[c] for c in labels])
    mass = None
    seen = 0
    for rows, block in _blocks(features):
        _check_nonnegative(block)
        onehot = sp.csr_matrix(
            (np.ones(rows.stop - rows.start), (y[rows], np.arange(rows.stop - rows.start))),
            shape=(len(classes), rows.stop - rows.start),
        )
        part = np.asarray((onehot @ block).todense() if sp.issparse(block) else onehot @ block)
        mass = part if mass is None else mass + part
        seen = rows.stop
    if mass is None or seen != len(labels):
        raise DomainError(f"features cover {seen} documents but {len(labels)} labels were given")
    smoothed = mass + smoothing
    log_theta = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    prior = np.bincount(y, minlength=len(classes)) / len(y)
    return NbModel(classes, np.log(prior), log_theta, float(smoothing))


def _scores(model: NbModel, features: Features) -> np.ndarray:
    parts = []
    for _, block in _blocks(features):
        parts.append(model.scores(block))
    return np.vstack(parts) if parts else np.empty((0, len(model.classes)))


def predict(model: NbModel, features: Features) -> list[str]:
    """Most probable class per document; ties go to the first class in
    sorted order."""
    return [model.classes[k] for k in np.argmax(_scores(model, features), axis=1)]


def posterior(model: NbModel, features: Features) -> np.ndarray:
    scores = _scores(model, features)
    return np.exp(scores - logsumexp(scores, axis=1, keepdims=True))


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    """Per-class metrics; the confusion matrix has true classes on rows.

    Precision (recall) of a class with no predicted (true) documents is 0.
    """

    classes: tuple[str, ...]
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    confusion: np.ndarray
    config: dict

    @classmethod
    def from_confusion(cls, classes, confusion, config: dict | None = None) -> ClassificationReport:
        confusion = np.asarray(confusion, dtype=np.int64)
        tp = np.diag(confusion).astype(float)
        predicted = confusion.sum(axis=0)
        support = confusion.sum(axis=1)
        precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
        recall = np.divide(tp, support, out=np.zeros_like(tp), where=support > 0)
        denom = precision + recall
        f1 = np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)
        return cls(tuple(classes), precision, recall, f1, support, confusion, dict(config or {}))

    @classmethod
    def from_predictions(cls, y_true, y_pred, classes=None, config=None) -> ClassificationReport:
        classes = tuple(sorted(set(y_true) | set(y_pred))) if classes is None else tuple(classes)
        index = {c: k for k, c in enumerate(classes)}
        confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
        np.add.at(confusion, ([index[c] for c in y_true], [index[c] for c in y_pred]), 1)
        return cls.from_confusion(classes, confusion, config)

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.confusion)) / self.total if self.total else 0.0

    def macro(self) -> dict:
        return {
            "precision": float(self.precision.mean()),
            "recall": float(self.recall.mean()),
            "f1": float(self.f1.mean()),
        }

    def weighted(self) -> dict:
        w = self.support / self.support.sum()
        return {
            "precision": float(w @ self.precision),
            "recall": float(w @ self.recall),
            "f1": float(w @ self.f1),
        }

    def to_json(self) -> dict:
        return {
            "schema": "bursty.classification",
            "schema_version": _io.SCHEMA_VERSION,
            "config": self.config,
            "classes": {
                c: {
                    "precision": float(self.precision[k]),
                    "recall": float(self.recall[k]),
                    "f1": float(self.f1[k]),
                    "support": int(self.support[k]),
                }
                for k, c in enumerate(self.classes)
            },
            "order": list(self.classes),
            "macro": self.macro(),
            "weighted": self.weighted(),
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
        }

    def to_text(self) -> str:
        width = max([len(c) for c in self.classes] + [len("weighted avg")])
        head = f"{'':>{width}}  precision    recall  f1-score   support\n\n"
        lines = [head]
        for k, c in enumerate(self.classes):
            lines.append(
                f"{c:>{width}}  {self.precision[k]:9.4f} {self.recall[k]:9.4f}"
                f" {self.f1[k]:9.4f} {int(self.support[k]):9d}\n"
            )
        lines.append("\n")
        total = int(self.support.sum())
        lines.append(f"{'accuracy':>{width}}  {'':9} {'':9} {self.accuracy:9.4f} {total:9d}\n")
        for name, avg in (("macro avg", self.macro()), ("weighted avg", self.weighted())):
            lines.append(
                f"{name:>{width}}  {avg['precision']:9.4f} {avg['recall']:9.4f}"
                f" {avg['f1']:9.4f} {total:9d}\n"
            )
        return _io.meta_line(self.config) + "".join(lines)


def evaluate(
    model: NbModel, features: Features, labels: Sequence[str], config: dict | None = None
) -> ClassificationReport:
    """Report over the union of training classes and test labels."""
    labels = list(labels)
    pred = predict(model, features)
    if len(pred) != len(labels):
        raise DomainError("number of predictions and labels differ")
    classes = tuple(sorted(set(model.classes) | set(labels)))
    return ClassificationReport.from_predictions(labels, pred, classes, config)


def resolve_penalty(train: TermDocumentMatrix, mu: float | str = "auto", sigma2: float = 1.0) -> PenaltyParams:
    """``mu='auto'`` is the training mean document length."""
    if mu == "auto":
        mu = train.n / train.d
    return PenaltyParams(float(mu), float(sigma2))


def _labels(matrix: TermDocumentMatrix) -> tuple[str, ...]:
    if matrix.labels is None:
        raise DomainError("the collection carries no labels")
    return matrix.labels


def fit_evaluate(
    train: TermDocumentMatrix,
    test: TermDocumentMatrix,
    scheme: str = "sigmoid_lambda",
    penalty: PenaltyParams | None = None,
    smoothing: float = 1.0,
    block_size: int = 512,
) -> ClassificationReport:
    """Weight both splits with training statistics, train and evaluate.

    ``test`` must already be aligned to the training vocabulary
    (:func:`bursty.corpus.split` does this).  Dense lambda weights are
    produced and consumed block by block.
    """
    scheme = _normalize_scheme(scheme)
    if test.vocab != train.vocab:
        raise DomainError("test collection is not aligned to the training vocabulary")
    stats = compute_stats(train)
    if scheme in ("lambda", "sigmoid_lambda") and penalty is None:
        penalty = resolve_penalty(train)
    model = train_nb(
        weight_blocks(train, scheme, stats, penalty, block_size), _labels(train), smoothing
    )
    config = {"scheme": scheme, "smoothing": smoothing, "d_train": train.d, "d_test": test.d}
    if penalty is not None:
        config.update(mu=penalty.mu, sigma2=penalty.sigma2)
    return evaluate(model, weight_blocks(test, scheme, stats, penalty, block_size), _labels(test), config)


@dataclass(frozen=True)
class SensitivityGrid:
    mu_values: tuple[float, ...]
    sigma2_values: tuple[float, ...]
    accuracy: np.ndarray  # (len(mu_values), len(sigma2_values))
    config: dict

    def peak(self) -> tuple[float, float, float]:
        k = int(np.argmax(self.accuracy))
        a, b = np.unravel_index(k, self.accuracy.shape)
        return self.mu_values[a], self.sigma2_values[b], float(self.accuracy[a, b])

    def to_csv(self) -> str:
        rows = (
            (float(mu), float(s2), float(self.accuracy[a, b]))
            for a, mu in enumerate(self.mu_values)
            for b, s2 in enumerate(self.sigma2_values)
        )
        return _io.csv_text(("mu", "sigma2", "accuracy"), rows, self.config)


def sensitivity_grid(
    train: TermDocumentMatrix,
    test: TermDocumentMatrix,
    mu_values: Sequence[float],
    sigma2_values: Sequence[float],
    smoothing: float = 1.0,
    scheme: str = "sigmoid_lambda",
    workers: int | None = None,
) -> SensitivityGrid:
    """Accuracy for every ``(mu, sigma2)`` pair, with weights recomputed per
    cell.  Guard-violating terms use the clamped per-document weights."""
    mu_values = tuple(float(v) for v in mu_values)
    sigma2_values = tuple(float(v) for v in sigma2_values)
    if not mu_values or not sigma2_values:
        raise DomainError("grids must be non-empty")
    cells = [(mu, s2) for mu in mu_values for s2 in sigma2_values]

    def one(cell):
        penalty = PenaltyParams(*cell)
        return fit_evaluate(train, test, scheme, penalty, smoothing).accuracy

    acc = np.array(pmap(one, cells, workers)).reshape(len(mu_values), len(sigma2_values))
    config = {"scheme": _normalize_scheme(scheme), "smoothing": smoothing}
    return SensitivityGrid(mu_values, sigma2_values, acc, config)

