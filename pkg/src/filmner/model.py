"""Second stage: penalized logistic regression over candidate features.

Training is full-batch proximal gradient descent with a fixed step of
``1/L``, where ``L`` bounds the curvature of the mean log-loss. The L1
penalty is handled by soft-thresholding and the L2 penalty by its own
proximal shrink, so the step does not shrink as the penalty grows. The bias
is never penalized. Features are standardized with
training statistics and the transform travels with the model.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

PENALTIES = ("l1", "l2")
STRENGTHS = (0.001, 0.01, 0.1, 1.0, 10.0)
DEFAULT_GRID = tuple((p, s) for p in PENALTIES for s in STRENGTHS)
DECISION_THRESHOLDS = tuple(round(0.1 * i, 1) for i in range(1, 10))

MAX_ITER = 5000
TOL = 1e-9
# log-loss differences below this are treated as ties in the permutation test
_LOSS_TIE = 1e-9


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _augment(Xs: np.ndarray) -> np.ndarray:
    return np.hstack([Xs, np.ones((Xs.shape[0], 1))])


def log_loss(theta: np.ndarray, Xa: np.ndarray, y: np.ndarray) -> float:
    z = Xa @ theta
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def penalty_value(w: np.ndarray, penalty: str, strength: float) -> float:
    if penalty == "l1":
        return strength * float(np.abs(w).sum())
    return 0.5 * strength * float(w @ w)


def objective(theta: np.ndarray, Xa: np.ndarray, y: np.ndarray,
              penalty: str, strength: float) -> float:
    """Mean log-loss plus penalty; ``theta`` is weights followed by the bias."""
    return log_loss(theta, Xa, y) + penalty_value(theta[:-1], penalty, strength)


def gradient(theta: np.ndarray, Xa: np.ndarray, y: np.ndarray,
             penalty: str, strength: float) -> np.ndarray:
    """Gradient of :func:`objective` (sign subgradient for L1 away from zero)."""
    g = Xa.T @ (sigmoid(Xa @ theta) - y) / Xa.shape[0]
    w = theta[:-1]
    if penalty == "l1":
        g[:-1] += strength * np.sign(w)
    else:
        g[:-1] += strength * w
    return g


def lipschitz_bound(Xa: np.ndarray) -> float:
    """Curvature bound of the mean log-loss: sigma_max(Xa)^2 / (4 n)."""
    spectral = np.linalg.norm(Xa, 2) if Xa.size else 0.0
    return max(0.25 * spectral ** 2 / max(Xa.shape[0], 1), 1e-12)


def _check_penalty(penalty: str, strength: float) -> None:
    if penalty not in PENALTIES:
        raise ValueError(f"penalty must be one of {PENALTIES}, got {penalty!r}")
    if not strength > 0:
        raise ValueError(f"strength must be positive, got {strength}")


def fit_standardized(Xs: np.ndarray, y: np.ndarray, penalty: str, strength: float,
                     max_iter: int = MAX_ITER, tol: float = TOL,
                     init: Optional[np.ndarray] = None,
                     history: Optional[list] = None) -> np.ndarray:
    """Proximal gradient descent on already-standardized features.

    Returns ``theta`` (weights then bias). If ``history`` is a list, the
    objective after every iteration is appended to it.
    """
    _check_penalty(penalty, strength)
    Xa = _augment(Xs)
    n = Xa.shape[0]
    step = 1.0 / lipschitz_bound(Xa)
    theta = np.zeros(Xa.shape[1]) if init is None else np.array(init, dtype=float)
    shrink = step * strength
    for _ in range(max_iter):
        g = Xa.T @ (sigmoid(Xa @ theta) - y) / n
        new = theta - step * g
        w = new[:-1]
        if penalty == "l1":
            new[:-1] = np.sign(w) * np.maximum(np.abs(w) - shrink, 0.0)
        else:
            new[:-1] = w / (1.0 + shrink)
        delta = np.max(np.abs(new - theta))
        theta = new
        if history is not None:
            history.append(objective(theta, Xa, y, penalty, strength))
        if delta < tol:
            break
    return theta


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    penalty: str
    strength: float
    decision_threshold: float = 0.5
    mean: np.ndarray = field(default=None)
    scale: np.ndarray = field(default=None)
    feature_names: Optional[list[str]] = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        d = self.weights.shape[0]
        self.mean = np.zeros(d) if self.mean is None else np.asarray(self.mean, dtype=float)
        self.scale = np.ones(d) if self.scale is None else np.asarray(self.scale, dtype=float)
        if not 0.0 < self.decision_threshold < 1.0:
            raise ValueError("decision_threshold must lie strictly between 0 and 1")
        if self.mean.shape != (d,) or self.scale.shape != (d,):
            raise ValueError("standardization statistics do not match the weights")
        if self.feature_names is not None and len(self.feature_names) != d:
            raise ValueError("feature_names do not match the weights")

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def standardize(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[-1]}")
        return (X - self.mean) / self.scale

    def decision_function(self, X) -> np.ndarray:
        return self.standardize(X) @ self.weights + self.bias

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X) >= self.decision_threshold

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "bias": float(self.bias),
            "penalty": self.penalty,
            "strength": float(self.strength),
            "decision_threshold": float(self.decision_threshold),
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "feature_names": self.feature_names,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "LinearModel":
        return cls(np.array(d["weights"], dtype=float), d["bias"], d["penalty"],
                   d["strength"], d["decision_threshold"], np.array(d["mean"]),
                   np.array(d["scale"]), d.get("feature_names"))

    def save(self, path: str | Path, extra: Optional[dict] = None) -> None:
        payload = self.to_dict()
        if extra:
            payload.update(extra)
        Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "LinearModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def predict_proba(model: LinearModel, x) -> np.ndarray:
    return model.predict_proba(x)


def _check_data(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a non-empty 2-D feature matrix")
    if y.shape != (X.shape[0],):
        raise ValueError("labels do not match the feature rows")
    if not np.all(np.isfinite(X)):
        raise ValueError("features contain non-finite values")
    if not set(np.unique(y)) <= {0.0, 1.0}:
        raise ValueError("labels must be 0 or 1")
    if len(np.unique(y)) < 2:
        raise ValueError("training data must contain both classes")
    return X, y


def standardization(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    return mean, scale


def train(X, y, penalty: str = "l2", strength: float = 1.0, seed: int = 0,
          decision_threshold: float = 0.5, feature_names: Optional[list[str]] = None,
          max_iter: int = MAX_ITER, tol: float = TOL) -> LinearModel:
    """Fit a penalized logistic regression.

    The solver starts from zero and uses no randomness; ``seed`` is accepted
    so callers can thread one seed through a whole run.
    """
    del seed
    X, y = _check_data(X, y)
    mean, scale = standardization(X)
    theta = fit_standardized((X - mean) / scale, y, penalty, strength, max_iter, tol)
    return LinearModel(theta[:-1].copy(), float(theta[-1]), penalty, float(strength),
                       decision_threshold, mean, scale, feature_names)


# -- hyperparameter selection -------------------------------------------------------

def inner_folds(groups: Sequence, y: np.ndarray, k: int = 3, seed: int = 0) -> list[np.ndarray]:
    """Row-index folds, by group when there are at least two groups."""
    groups = np.asarray(groups, dtype=object)
    distinct = sorted(set(groups.tolist()))
    if len(distinct) >= 2:
        k = min(k, len(distinct))
        slot = {gname: i % k for i, gname in enumerate(distinct)}
        key = np.array([slot[gname] for gname in groups.tolist()])
    else:
        # stratified round-robin over a seeded permutation
        rng = np.random.default_rng(seed)
        key = np.empty(len(y), dtype=int)
        for cls in (0, 1):
            rows = rng.permutation(np.flatnonzero(y == cls))
            key[rows] = np.arange(rows.size) % k
    folds = [np.flatnonzero(key == f) for f in range(k)]
    return [f for f in folds if f.size]


def _fold_probs(args) -> list[np.ndarray]:
    X, y, folds, penalty, strength = args
    out = []
    for test in folds:
        train_rows = np.setdiff1d(np.arange(len(y)), test)
        ytr = y[train_rows]
        if train_rows.size == 0 or len(np.unique(ytr)) < 2:
            base = float(ytr.mean()) if ytr.size else 0.5
            out.append(np.full(test.size, base))
            continue
        m = train(X[train_rows], ytr, penalty, strength)
        out.append(m.predict_proba(X[test]))
    return out


def fold_f1(pred: np.ndarray, y: np.ndarray, missed: int = 0) -> float:
    tp = int(np.sum(pred & (y == 1)))
    fp = int(np.sum(pred & (y == 0)))
    fn = int(np.sum(~pred & (y == 1))) + missed
    if tp == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


@dataclass(frozen=True)
class Selection:
    penalty: str
    strength: float
    decision_threshold: float
    score: float


def select_hyperparameters(X, y, groups: Sequence, grid=DEFAULT_GRID,
                           missed: Optional[Mapping] = None, seed: int = 0,
                           jobs: int = 1) -> Selection:
    """Choose penalty, strength and decision threshold by inner cross-validation.

    Each ``(penalty, strength)`` pair is scored at every decision threshold
    by the mean over inner folds of the mention-level F1. ``missed`` maps a
    group to the number of its gold mentions that produced no candidate;
    those count as false negatives in whichever fold holds the group. Ties
    go to the larger strength, then L2, then the threshold nearest 0.5.
    """
    grid = sorted({(str(p), float(s)) for p, s in grid})
    if not grid:
        raise ValueError("hyperparameter grid is empty")
    for p, s in grid:
        _check_penalty(p, s)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    groups = list(groups)
    folds = inner_folds(groups, y, seed=seed)
    missed = missed or {}
    fold_missed = []
    for f in folds:
        fold_groups = {groups[i] for i in f}
        fold_missed.append(sum(missed.get(gname, 0) for gname in fold_groups))

    tasks = [(X, y, folds, p, s) for p, s in grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            all_probs = list(pool.map(_fold_probs, tasks))
    else:
        all_probs = [_fold_probs(t) for t in tasks]

    best_key, best = None, None
    for (p, s), probs in zip(grid, all_probs):
        for thr in DECISION_THRESHOLDS:
            scores = [fold_f1(pr >= thr, y[f], m) for pr, f, m in zip(probs, folds, fold_missed)]
            score = round(float(np.mean(scores)), 12)
            key = (-score, -s, p != "l2", abs(thr - 0.5), thr)
            if best_key is None or key < best_key:
                best_key, best = key, Selection(p, s, thr, score)
    return best


# -- significance ------------------------------------------------------------------

def feature_significance(X, y, model: LinearModel, trials: int = 1000, seed: int = 0,
                         columns: Optional[Sequence[int]] = None) -> dict[int, float]:
    """Permutation p-values for individual feature columns.

    For a column, the observed statistic is how much the training log-loss
    improves when the column is available versus zeroed out, refitting with
    the model's penalty and strength each time. The p-value is the share of
    refits with the column randomly permuted (labels untouched) whose
    improvement meets or exceeds the observed one.
    """
    if trials < 100:
        raise ValueError("need at least 100 permutation trials")
    X, y = _check_data(X, y)
    Xs = model.standardize(X)
    theta0 = np.concatenate([model.weights, [model.bias]])
    rng = np.random.default_rng(seed)
    if columns is None:
        columns = range(X.shape[1])

    pvalues = {}
    for j in columns:
        ablated = Xs.copy()
        ablated[:, j] = 0.0
        theta_ab = fit_standardized(ablated, y, model.penalty, model.strength, init=theta0)
        ablated_loss = log_loss(theta_ab, _augment(ablated), y)
        # every refit below starts from the ablated optimum
        full = fit_standardized(Xs, y, model.penalty, model.strength, init=theta_ab)
        observed = ablated_loss - log_loss(full, _augment(Xs), y)
        hits = 0
        permuted = Xs.copy()
        for _ in range(trials):
            permuted[:, j] = rng.permutation(Xs[:, j])
            theta_p = fit_standardized(permuted, y, model.penalty, model.strength, init=theta_ab)
            if ablated_loss - log_loss(theta_p, _augment(permuted), y) >= observed - _LOSS_TIE:
                hits += 1
        pvalues[int(j)] = hits / trials
    return pvalues
