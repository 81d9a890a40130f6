"""Linear SVM on embeddings and the stratified k-fold evaluation harness.

The SVM minimizes the primal objective

    J(w, b) = 0.5 ||w||^2 + C * sum_i max(0, 1 - y_i (w . x_i + b))

by full-batch projected-free subgradient descent with the classic decaying
step eta_t = 1 / (lambda_reg * t), lambda_reg = 1 / (C m).  Subgradient
descent is not a descent method, so the incumbent (best objective seen so
far) is tracked each epoch and returned as the model; the recorded objective
trajectory is the incumbent's and is therefore nonincreasing.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    EmptyDataError,
    FoldMissingClassError,
    SingleClassError,
    TooFewSamplesError,
)

__all__ = [
    "LinearSvmModel",
    "svm_train",
    "svm_predict",
    "CvResult",
    "kfold_evaluate",
]


@dataclass
class LinearSvmModel:
    """Linear decision rule sign(w . x + b), ties resolved to +1."""

    weights: np.ndarray
    bias: float
    c: float
    objective_history: list


def _objective(w, b, features, labels, c):
    margins = labels * (features @ w + b)
    return 0.5 * float(w @ w) + c * float(np.maximum(0.0, 1.0 - margins).sum())


def _check_labels(labels):
    labels = np.asarray(labels)
    if labels.size == 0:
        raise EmptyDataError("no samples")
    if not np.all(np.isin(labels, (-1, 1))):
        raise ValueError("labels must be -1 or +1")
    if np.unique(labels).size < 2:
        raise SingleClassError("training data contains a single class")
    return labels.astype(np.float64)


def svm_train(features, labels, c=1.0, epochs=100, seed=0) -> LinearSvmModel:
    """Train a linear SVM by deterministic full-batch subgradient descent.

    ``seed`` is accepted for interface stability; the full-batch solver has
    no random component.  One subgradient step per epoch on the scaled
    objective, step size 1 / (lambda_reg * t); the returned model is the
    best-objective iterate (the zero model included as the t=0 incumbent).
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise EmptyDataError(f"features must be a nonempty 2-d matrix, got {features.shape}")
    y = _check_labels(labels)
    if y.shape[0] != features.shape[0]:
        raise DimensionMismatchError("features and labels disagree on sample count")
    m = features.shape[0]
    if c <= 0.0:
        raise ValueError("c must be > 0")

    lambda_reg = 1.0 / (c * m)
    w = np.zeros(features.shape[1])
    b = 0.0
    best_w, best_b = w.copy(), b
    best_obj = _objective(w, b, features, y, c)
    history = []
    for t in range(1, epochs + 1):
        margins = y * (features @ w + b)
        viol = margins < 1.0
        # subgradient of the (1 / (C m))-scaled objective
        grad_w = lambda_reg * w - (y[viol] @ features[viol]) / m
        grad_b = -float(y[viol].sum()) / m
        eta = 1.0 / (lambda_reg * t)
        w = w - eta * grad_w
        b = b - eta * grad_b
        obj = _objective(w, b, features, y, c)
        if obj < best_obj:
            best_obj = obj
            best_w, best_b = w.copy(), b
        history.append(best_obj)
    return LinearSvmModel(weights=best_w, bias=float(best_b), c=c, objective_history=history)


def svm_predict(model: LinearSvmModel, x) -> int:
    """Predict the label of one feature vector; a decision value of 0 maps to +1."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != model.weights.shape:
        raise DimensionMismatchError(f"input {x.shape} != weights {model.weights.shape}")
    return 1 if float(model.weights @ x + model.bias) >= 0.0 else -1


def _predict_batch(model, features):
    return np.where(features @ model.weights + model.bias >= 0.0, 1, -1)


@dataclass
class CvResult:
    """Per-fold accuracies, their arithmetic mean, and the fold-assignment seed."""

    fold_accuracies: list
    mean_accuracy: float
    seed: int


def _stratified_folds(labels, k, rng):
    """Deal each class's shuffled indices cyclically into k test folds.

    The deal position carries over between classes, so fold sizes stay within
    one of each other both per class and overall (no fold is ever empty when
    there are at least k samples).
    """
    folds = [[] for _ in range(k)]
    offset = 0
    for cls in (-1, 1):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(idx.size)]
        for j, sample in enumerate(idx):
            folds[(offset + j) % k].append(int(sample))
        offset = (offset + idx.size) % k
    return [np.array(sorted(f), dtype=int) for f in folds]


def kfold_evaluate(features, labels, k=10, c=1.0, epochs=100, seed=0,
                   standardize=True) -> CvResult:
    """Stratified k-fold cross-validation of a linear SVM.

    Folds are a true partition with per-class round-robin assignment after a
    seeded shuffle.  When ``standardize`` is on, feature mean/std are fitted
    on each training fold only and applied to its test fold, so no statistics
    leak across the split.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if features.ndim != 2 or features.shape[0] != labels.shape[0]:
        raise DimensionMismatchError("features and labels disagree on sample count")
    y = _check_labels(labels).astype(int)
    m = features.shape[0]
    if m < k:
        raise TooFewSamplesError(f"{m} samples cannot fill {k} folds")

    rng = np.random.default_rng(seed)
    folds = _stratified_folds(y, k, rng)
    accuracies = []
    for test_idx in folds:
        mask = np.ones(m, dtype=bool)
        mask[test_idx] = False
        train_x, train_y = features[mask], y[mask]
        test_x, test_y = features[test_idx], y[test_idx]
        if np.unique(train_y).size < 2:
            raise FoldMissingClassError("a training fold lost one class entirely")
        if standardize:
            mu = train_x.mean(axis=0)
            sd = train_x.std(axis=0)
            sd = np.where(sd == 0.0, 1.0, sd)
            train_x = (train_x - mu) / sd
            test_x = (test_x - mu) / sd
        model = svm_train(train_x, train_y, c=c, epochs=epochs, seed=seed)
        accuracies.append(float(np.mean(_predict_batch(model, test_x) == test_y)))
    return CvResult(
        fold_accuracies=accuracies,
        mean_accuracy=float(np.mean(accuracies)),
        seed=seed,
    )
