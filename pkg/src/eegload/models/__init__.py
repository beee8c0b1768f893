"""Standardization and the five classifier families behind one fit/predict surface."""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .linear import LogisticRegression
from .mlp import MLP
from .svm import SVM
from .trees import GradientBoostedTrees, RandomForest

FAMILIES = ("logreg", "svm", "random_forest", "gradient_boosted_trees", "mlp")

DEFAULT_GRIDS = {
    "logreg": {"C": [0.01, 0.1, 1, 10], "penalty": ["l1", "l2"]},
    "svm": [
        {"kernel": ["linear"], "C": [0.1, 1, 10]},
        {"kernel": ["rbf"], "C": [0.1, 1, 10], "gamma": ["scale", 0.01]},
        {"kernel": ["poly"], "degree": [2, 3], "C": [0.1, 1, 10], "gamma": ["scale", 0.01]},
    ],
    "random_forest": {"n_estimators": [100, 300], "max_depth": [None, 5, 10]},
    "gradient_boosted_trees": {
        "max_depth": [3, 5], "learning_rate": [0.1, 0.3], "subsample": [0.8, 1.0],
        "colsample_bytree": [0.8, 1.0], "reg_lambda": [1.0],
    },
    "mlp": {"hidden": [[64], [64, 32]], "activation": ["relu", "tanh"], "alpha": [1e-4, 1e-2]},
}

_CONSTRUCTORS = {
    "logreg": LogisticRegression,
    "svm": SVM,
    "random_forest": RandomForest,
    "gradient_boosted_trees": GradientBoostedTrees,
    "mlp": MLP,
}


class Standardizer:
    """Per-feature centering and scaling by the population sd.

    Zero-variance features are centered but left unscaled.
    """

    def fit(self, X):
        X = np.asarray(X, dtype=np.float64)
        self.mean_ = X.mean(axis=0)
        sd = X.std(axis=0)
        self.scale_ = np.where(sd > 0, sd, 1.0)
        return self

    def transform(self, X):
        if not hasattr(self, "mean_"):
            raise RuntimeError("Standardizer used before fit")
        return (np.asarray(X, dtype=np.float64) - self.mean_) / self.scale_

    def fit_transform(self, X):
        return self.fit(X).transform(X)


def fit_standardizer(X_train):
    return Standardizer().fit(X_train)


def expand_grid(grid):
    """Ordered, de-duplicated list of parameter dicts.

    ``grid`` is a mapping of parameter -> candidates or a list of such
    mappings. Order follows the mapping order; it decides tie-breaking.
    """
    grids = grid if isinstance(grid, list) else [grid]
    out, seen = [], set()
    for g in grids:
        keys = list(g)
        for combo in itertools.product(*(g[k] for k in keys)):
            params = dict(zip(keys, combo))
            key = repr(sorted(params.items(), key=lambda kv: kv[0]))
            if key not in seen:
                seen.add(key)
                out.append(params)
    if not out:
        raise ValueError("empty parameter grid")
    return out


@dataclass
class ModelSpec:
    family: str
    grid: object = None
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}; known: {FAMILIES}")
        if self.grid is None:
            self.grid = DEFAULT_GRIDS[self.family]
        self.candidates = expand_grid(self.grid)
        for params in self.candidates:
            _make(self.family, params, 0)


@dataclass
class TrainedModel:
    family: str
    params: dict
    classes: np.ndarray
    standardizer: Standardizer
    estimator: object
    n_features: int
    meta: dict = field(default_factory=dict)


def _make(family, params, seed):
    p = dict(params)
    if family == "mlp" and "hidden" in p:
        p["hidden"] = tuple(p["hidden"])
    try:
        return _CONSTRUCTORS[family](seed=seed, **p)
    except TypeError as exc:
        raise ValueError(f"invalid parameters for {family}: {params}: {exc}") from None


def fit(spec, params, X, y, seed=None, row_ids=None, audit=None):
    """Standardize on ``X`` then fit one family with fixed ``params``.

    ``spec`` is a ModelSpec or a family name. When ``audit`` is given it is
    called as ``audit(row_ids)`` with the ids of every row consumed.
    """
    family = spec.family if isinstance(spec, ModelSpec) else spec
    if seed is None:
        seed = spec.seed if isinstance(spec, ModelSpec) else 0
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"X shape {X.shape} does not match {y.shape[0]} labels")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    classes = np.unique(y)
    if classes.size < 2:
        raise ValueError("training set contains a single class")
    if audit is not None:
        audit(np.arange(X.shape[0]) if row_ids is None else np.asarray(row_ids))
    scaler = fit_standardizer(X)
    estimator = _make(family, params, seed).fit(scaler.transform(X), np.searchsorted(classes, y))
    return TrainedModel(family, dict(params), classes, scaler, estimator, X.shape[1])


def _check(model, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1 and X.size == 0:
        X = X.reshape(0, model.n_features)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} columns, got shape {X.shape}")
    return model.standardizer.transform(X)


def predict_proba(model, X):
    Z = _check(model, X)
    if not hasattr(model.estimator, "predict_proba"):
        raise NotImplementedError(f"{model.family} does not provide probabilities")
    if Z.shape[0] == 0:
        return np.zeros((0, model.classes.size))
    return model.estimator.predict_proba(Z)


def predict(model, X):
    Z = _check(model, X)
    if Z.shape[0] == 0:
        return model.classes[:0]
    if hasattr(model.estimator, "predict_index"):
        idx = model.estimator.predict_index(Z)
    else:
        # argmax returns the first maximum: lowest class label wins ties
        idx = np.argmax(model.estimator.predict_proba(Z), axis=1)
    return model.classes[idx]


def describe(model):
    """Structured-text (JSON-ready) dump of a trained model for audit."""
    est = model.estimator
    doc = {"family": model.family, "params": model.params, "classes": model.classes.tolist(),
           "standardizer": {"mean": model.standardizer.mean_.tolist(),
                            "scale": model.standardizer.scale_.tolist()}}
    if isinstance(est, LogisticRegression):
        doc["weights"] = {"coef": est.coef_.tolist(), "intercept": est.intercept_.tolist()}
    elif isinstance(est, SVM):
        doc["weights"] = {"dual_coef": est.dual_coef_.tolist(),
                          "support_vectors": est.support_vectors_.tolist(), "gamma": est._gamma}
    elif isinstance(est, MLP):
        doc["weights"] = {"layers": [{"W": W.tolist(), "b": b.tolist()}
                                     for W, b in zip(est.weights, est.biases)]}
    else:
        trees = est.trees if isinstance(est, RandomForest) else [t for r in est.trees for t in r]
        doc["weights"] = {"trees": [{"feature": t.feature.tolist(), "threshold": t.threshold.tolist(),
                                     "left": t.left.tolist(), "right": t.right.tolist(),
                                     "value": t.value.tolist()} for t in trees]}
    return doc
