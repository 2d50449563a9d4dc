"""Polynomial-kernel SVM meta-classifier fusing the similarity scores.

Training is sequential minimal optimization over the standard dual with
maximal-violating-pair working-set selection (size 2, ties broken by
lowest index) and the usual box clipping.  Probabilities come from Platt
scaling: a sigmoid 1 / (1 + exp(A*d + B)) fit by Newton steps with
backtracking on a held-out calibration split.  The decision threshold
defaults to 0.7 on the calibrated probability.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractError, FormatError, InputError, TrainingError

FEATURE_ORDER_M1 = ("unnormalized", "normalized", "avg_embedding", "fuzzy")
FEATURE_ORDER_M5 = FEATURE_ORDER_M1 + ("sentence",)
_MODE_DIMS = {"M1": 4, "M5": 5}

DEFAULT_C = 0.2
DEFAULT_DEGREE = 2
DEFAULT_THRESHOLD = 0.7
SMO_TOL = 1e-3
SMO_MAX_ITER = 10_000


@dataclass(frozen=True)
class LabeledPair:
    question1: str
    question2: str
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise InputError(f"label must be 0 or 1, got {self.label!r}")


def mode_for(n_features: int) -> str:
    for mode, dim in _MODE_DIMS.items():
        if dim == n_features:
            return mode
    raise ContractError(f"feature vectors must have 4 (M1) or 5 (M5) entries, got {n_features}")


def kernel(x: np.ndarray, y: np.ndarray, *, gamma: float, coef0: float = 0.0,
           degree: int = DEFAULT_DEGREE) -> float:
    """Polynomial kernel (gamma * <x, y> + coef0) ** degree."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ContractError(f"feature mode mismatch: {x.shape} vs {y.shape}")
    return float((gamma * np.dot(x, y) + coef0) ** degree)


@dataclass
class MetaClassifier:
    mode: str
    C: float
    degree: int
    gamma: float
    coef0: float
    bias: float
    platt_a: float
    platt_b: float
    threshold: float
    support_vectors: np.ndarray  # (n_sv, dim) float64
    dual_coefs: np.ndarray       # (n_sv,) float64, y_i * alpha_i
    feature_order: tuple[str, ...] = field(default=FEATURE_ORDER_M1)

    @property
    def n_features(self) -> int:
        return _MODE_DIMS[self.mode]

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.n_features:
            raise ContractError(
                f"model mode {self.mode} expects {self.n_features} features, got {x.shape[-1]}"
            )
        return x

    def decision(self, x: np.ndarray) -> float | np.ndarray:
        """Sum_i dual_coef_i * kernel(sv_i, x) + bias; accepts (d,) or (n, d)."""
        x = self._check(x)
        gram = (self.gamma * (x @ self.support_vectors.T) + self.coef0) ** self.degree
        out = gram @ self.dual_coefs + self.bias
        return float(out) if x.ndim == 1 else out

    def predict_proba(self, x: np.ndarray) -> float | np.ndarray:
        d = self.decision(x)
        if isinstance(d, float):
            return float(_platt_predict(np.asarray([d]), self.platt_a, self.platt_b)[0])
        return _platt_predict(d, self.platt_a, self.platt_b)

    def classify(self, x: np.ndarray, threshold: float | None = None) -> str:
        t = self.threshold if threshold is None else threshold
        return "similar" if self.predict_proba(x) >= t else "not_similar"


def train(
    features: np.ndarray,
    labels: np.ndarray,
    C: float = DEFAULT_C,
    degree: int = DEFAULT_DEGREE,
    gamma: float | None = None,
    coef0: float = 0.0,
    threshold: float = DEFAULT_THRESHOLD,
    seed: int = 0,
    tol: float = SMO_TOL,
    max_iter: int = SMO_MAX_ITER,
) -> MetaClassifier:
    """SMO-train on an 80% split, Platt-calibrate on the held-out 20%."""
    X = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] != labels.shape[0]:
        raise InputError(f"features {X.shape} and labels {labels.shape} do not line up")
    if not np.all(np.isfinite(X)):
        raise InputError("non-finite feature values")
    if not set(np.unique(labels)) <= {0, 1}:
        raise InputError("labels must be 0 or 1")
    if len(np.unique(labels)) < 2:
        raise TrainingError("training data contains a single class")
    mode = mode_for(X.shape[1])
    if gamma is None:
        var = float(X.var())
        gamma = 1.0 / (X.shape[1] * var) if var > 0 else 1.0

    train_idx, calib_idx = calibration_split(labels, seed)
    y = 2.0 * labels[train_idx].astype(np.float64) - 1.0
    Xt = X[train_idx]
    K = (gamma * (Xt @ Xt.T) + coef0) ** degree
    alphas, bias = _smo(K, y, C, tol, max_iter)

    sv_mask = alphas > 0.0
    support_vectors = Xt[sv_mask]
    dual_coefs = (alphas * y)[sv_mask]

    model = MetaClassifier(
        mode=mode,
        C=C,
        degree=degree,
        gamma=gamma,
        coef0=coef0,
        bias=bias,
        platt_a=0.0,
        platt_b=0.0,
        threshold=threshold,
        support_vectors=support_vectors,
        dual_coefs=dual_coefs,
        feature_order=FEATURE_ORDER_M1 if mode == "M1" else FEATURE_ORDER_M5,
    )
    # calibrate on the holdout when it has both classes, else on the train split
    calib = calib_idx if len(np.unique(labels[calib_idx])) == 2 else train_idx
    decisions = np.atleast_1d(model.decision(X[calib]))
    model.platt_a, model.platt_b = _fit_platt(decisions, labels[calib])
    return model


def calibration_split(labels: np.ndarray, seed: int, frac: float = 0.2):
    """Deterministic stratified split; classes too small to spare a point
    contribute nothing to the calibration side."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    calib_idx: list[int] = []
    for cls in (0, 1):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(len(idx))]
        k = int(math.floor(frac * len(idx)))
        calib_idx.extend(idx[:k].tolist())
        train_idx.extend(idx[k:].tolist())
    return np.asarray(sorted(train_idx), dtype=int), np.asarray(sorted(calib_idx), dtype=int)


def _smo(K: np.ndarray, y: np.ndarray, C: float, tol: float, max_iter: int):
    """Maximal-violating-pair SMO on the dual; returns (alphas, bias)."""
    n = len(y)
    Q = (np.outer(y, y) * K).astype(np.float64)
    alphas = np.zeros(n)
    G = -np.ones(n)  # gradient of 0.5*a'Qa - e'a

    for _ in range(max_iter):
        up = ((y > 0) & (alphas < C)) | ((y < 0) & (alphas > 0))
        low = ((y > 0) & (alphas > 0)) | ((y < 0) & (alphas < C))
        if not up.any() or not low.any():
            break
        vals = -y * G
        i = int(np.argmax(np.where(up, vals, -np.inf)))
        j = int(np.argmin(np.where(low, vals, np.inf)))
        if vals[i] - vals[j] < tol:
            break

        old_i, old_j = alphas[i], alphas[j]
        if y[i] != y[j]:
            quad = max(Q[i, i] + Q[j, j] + 2.0 * Q[i, j], 1e-12)
            delta = (-G[i] - G[j]) / quad
            diff = old_i - old_j
            ai, aj = old_i + delta, old_j + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            else:
                if ai < 0:
                    ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            else:
                if aj > C:
                    aj, ai = C, C + diff
        else:
            quad = max(Q[i, i] + Q[j, j] - 2.0 * Q[i, j], 1e-12)
            delta = (G[i] - G[j]) / quad
            total = old_i + old_j
            ai, aj = old_i - delta, old_j + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            else:
                if aj < 0:
                    aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            else:
                if ai < 0:
                    ai, aj = 0.0, total
        alphas[i], alphas[j] = ai, aj
        G += Q[:, i] * (ai - old_i) + Q[:, j] * (aj - old_j)

    # recover the bias from the KKT conditions
    u = y * (G + 1.0)  # u_t = sum_s alpha_s y_s K_ts
    free = (alphas > 0) & (alphas < C)
    if free.any():
        bias = float(np.mean((y - u)[free]))
    else:
        lower_mask = ((alphas == 0) & (y > 0)) | ((alphas == C) & (y < 0))
        upper_mask = ((alphas == 0) & (y < 0)) | ((alphas == C) & (y > 0))
        lower = np.max((y - u)[lower_mask]) if lower_mask.any() else -np.inf
        upper = np.min((y - u)[upper_mask]) if upper_mask.any() else np.inf
        if not np.isfinite(lower):
            bias = float(upper)
        elif not np.isfinite(upper):
            bias = float(lower)
        else:
            bias = float((lower + upper) / 2.0)
    return alphas, bias


def _fit_platt(decisions: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    """Maximum-likelihood sigmoid fit (Newton with backtracking line search)."""
    d = np.asarray(decisions, dtype=np.float64)
    lab = np.asarray(labels)
    prior1 = int(np.sum(lab == 1))
    prior0 = int(np.sum(lab == 0))
    hi = (prior1 + 1.0) / (prior1 + 2.0)
    lo = 1.0 / (prior0 + 2.0)
    t = np.where(lab == 1, hi, lo)

    max_iter, min_step, sigma, eps = 100, 1e-10, 1e-12, 1e-5
    A, B = 0.0, math.log((prior0 + 1.0) / (prior1 + 1.0))

    def objective(a: float, b: float) -> float:
        f = d * a + b
        pos = f >= 0
        val = np.empty_like(f)
        val[pos] = t[pos] * f[pos] + np.log1p(np.exp(-f[pos]))
        val[~pos] = (t[~pos] - 1.0) * f[~pos] + np.log1p(np.exp(f[~pos]))
        return float(val.sum())

    fval = objective(A, B)
    for _ in range(max_iter):
        f = d * A + B
        pos = f >= 0
        p = np.empty_like(f)
        q = np.empty_like(f)
        ef = np.exp(-np.abs(f))
        p[pos] = ef[pos] / (1.0 + ef[pos])
        q[pos] = 1.0 / (1.0 + ef[pos])
        p[~pos] = 1.0 / (1.0 + ef[~pos])
        q[~pos] = ef[~pos] / (1.0 + ef[~pos])
        d2 = p * q
        h11 = sigma + float(np.sum(d * d * d2))
        h22 = sigma + float(np.sum(d2))
        h21 = float(np.sum(d * d2))
        d1 = t - p
        g1 = float(np.sum(d * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < eps and abs(g2) < eps:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= min_step:
            newA, newB = A + step * dA, B + step * dB
            newf = objective(newA, newB)
            if newf < fval + 1e-4 * step * gd:
                A, B, fval = newA, newB, newf
                break
            step /= 2.0
        else:
            break
    return A, B


def _platt_predict(decisions: np.ndarray, A: float, B: float) -> np.ndarray:
    f = decisions * A + B
    pos = f >= 0
    out = np.empty_like(f, dtype=np.float64)
    e = np.exp(-np.abs(f))
    out[pos] = e[pos] / (1.0 + e[pos])
    out[~pos] = 1.0 / (1.0 + e[~pos])
    return out


def predict_proba(model: MetaClassifier, x: np.ndarray) -> float | np.ndarray:
    return model.predict_proba(x)


def decision(model: MetaClassifier, x: np.ndarray) -> float | np.ndarray:
    return model.decision(x)


def classify(model: MetaClassifier, x: np.ndarray, threshold: float | None = None) -> str:
    return model.classify(x, threshold)


def save_model(model: MetaClassifier, path: str | Path) -> None:
    payload = {
        "mode": model.mode,
        "C": model.C,
        "degree": model.degree,
        "gamma": model.gamma,
        "coef0": model.coef0,
        "bias": model.bias,
        "platt_A": model.platt_a,
        "platt_B": model.platt_b,
        "threshold": model.threshold,
        "support_vectors": model.support_vectors.tolist(),
        "dual_coefs": model.dual_coefs.tolist(),
        "feature_order": list(model.feature_order),
    }
    Path(path).write_text(json.dumps(payload, indent=1), encoding="utf-8")


def load_model(path: str | Path) -> MetaClassifier:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from None
    required = {
        "mode", "C", "degree", "gamma", "coef0", "bias", "platt_A", "platt_B",
        "threshold", "support_vectors", "dual_coefs", "feature_order",
    }
    missing = required - set(payload)
    if missing:
        raise FormatError(f"{path}: missing fields {sorted(missing)}")
    mode = payload["mode"]
    if mode not in _MODE_DIMS:
        raise FormatError(f"{path}: unknown mode {mode!r}")
    sv = np.asarray(payload["support_vectors"], dtype=np.float64)
    coefs = np.asarray(payload["dual_coefs"], dtype=np.float64)
    if sv.ndim != 2 or sv.shape[0] == 0 or sv.shape[0] != coefs.shape[0]:
        raise FormatError(f"{path}: support vectors / dual coefs shape mismatch")
    if sv.shape[1] != _MODE_DIMS[mode]:
        raise FormatError(f"{path}: {sv.shape[1]} feature dims for mode {mode}")
    C = float(payload["C"])
    if np.any(np.abs(coefs) > C + 1e-9):
        raise FormatError(f"{path}: |dual_coef| exceeds C={C}")
    if abs(float(coefs.sum())) > 1e-6:
        raise FormatError(f"{path}: sum of dual coefs {coefs.sum():g} not 0 within 1e-6")
    if int(payload["degree"]) != 2:
        raise FormatError(f"{path}: kernel degree must be 2, got {payload['degree']}")
    order = tuple(payload["feature_order"])
    if len(order) != _MODE_DIMS[mode]:
        raise FormatError(f"{path}: feature_order length != mode dims")
    threshold = float(payload["threshold"])
    if not 0.0 <= threshold <= 1.0:
        raise FormatError(f"{path}: threshold {threshold} outside [0, 1]")
    return MetaClassifier(
        mode=mode,
        C=C,
        degree=int(payload["degree"]),
        gamma=float(payload["gamma"]),
        coef0=float(payload["coef0"]),
        bias=float(payload["bias"]),
        platt_a=float(payload["platt_A"]),
        platt_b=float(payload["platt_B"]),
        threshold=threshold,
        support_vectors=sv,
        dual_coefs=coefs,
        feature_order=order,
    )
