"""Binary logistic regression trained by Newton-Raphson (IRLS), from scratch.

The optimizer maximizes the ridge-penalized log-likelihood; the intercept is
never penalized. Numerical failures (singular Hessian, non-finite values)
restart training with the next rung of a small ridge ladder rather than
surfacing as crashes, since perfectly separable weekly slices are common.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, DegenerateLabelsError

RIDGE_LADDER = (1e-6, 1e-4, 1e-2)
MAX_HALVINGS = 30


class _NumericalFailure(Exception):
    pass


Z_CLAMP = 709.0  # largest |z| exp() survives; keeps sigmoid(-1000) positive


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function; never underflows to 0 or NaN."""
    z = np.clip(np.asarray(z, dtype=np.float64), -Z_CLAMP, Z_CLAMP)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def add_intercept(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return np.hstack([np.ones((X.shape[0], 1)), X])


def penalized_ll(beta: np.ndarray, X1: np.ndarray, y: np.ndarray, ridge: float) -> float:
    """Ridge-penalized Bernoulli log-likelihood; beta[0] is the unpenalized intercept.

    Uses y*z - log(1 + e^z) via logaddexp so large |z| cannot overflow.
    """
    z = X1 @ beta
    ll = float(np.sum(y * z - np.logaddexp(0.0, z)))
    return ll - 0.5 * ridge * float(np.sum(beta[1:] ** 2))


def penalized_gradient(beta: np.ndarray, X1: np.ndarray, y: np.ndarray, ridge: float) -> np.ndarray:
    p = sigmoid(X1 @ beta)
    grad = X1.T @ (y - p)
    grad[1:] -= ridge * beta[1:]
    return grad


@dataclass
class TrainedModel:
    beta: np.ndarray           # intercept first, then one weight per column
    ridge: float
    converged: bool
    iterations: int
    ll_history: list[float] = field(default_factory=list)
    columns: list[str] | None = None
    # z-score statistics of the training matrix, so a serialized model can be
    # applied to raw (unnormalized) rows later
    norm_means: np.ndarray | None = None
    norm_scales: np.ndarray | None = None


def _irls(X1: np.ndarray, y: np.ndarray, ridge: float, tol: float, max_iter: int) -> TrainedModel:
    n, d = X1.shape
    beta = np.zeros(d)
    penalty = np.zeros(d)
    penalty[1:] = ridge
    ll = penalized_ll(beta, X1, y, ridge)
    history = [ll]
    converged = False
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        p = sigmoid(X1 @ beta)
        w = p * (1.0 - p)
        hessian = X1.T @ (X1 * w[:, None])
        hessian[np.diag_indices(d)] += penalty
        grad = X1.T @ (y - p)
        grad -= penalty * beta
        try:
            direction = np.linalg.solve(hessian, grad)
        except np.linalg.LinAlgError as exc:
            raise _NumericalFailure("singular Hessian") from exc
        if not np.all(np.isfinite(direction)):
            raise _NumericalFailure("non-finite Newton direction")

        # Damped Newton: halve the step until the penalized likelihood stops
        # getting worse, so overshoot on steep slices cannot diverge. A step
        # that never improves means the solve produced a junk direction
        # (numerically singular Hessian), which the ridge ladder handles.
        eta = 1.0
        for _ in range(MAX_HALVINGS + 1):
            candidate = beta + eta * direction
            ll_new = penalized_ll(candidate, X1, y, ridge)
            if np.isfinite(ll_new) and ll_new >= ll:
                break
            eta *= 0.5
        else:
            raise _NumericalFailure("no improving Newton step")
        if not np.all(np.isfinite(candidate)):
            raise _NumericalFailure("non-finite coefficients")
        step = eta * direction
        beta = candidate
        ll = ll_new
        history.append(ll)
        if float(np.max(np.abs(step))) < tol:
            converged = True
            break
    return TrainedModel(
        beta=beta, ridge=ridge, converged=converged, iterations=iterations, ll_history=history
    )


def train(
    X: np.ndarray,
    y: np.ndarray,
    ridge: float = 0.0,
    tol: float = 1e-8,
    max_iter: int = 100,
    columns: list[str] | None = None,
) -> TrainedModel:
    """Fit a logistic model; escalate the ridge on numerical failure.

    Raises DegenerateLabelsError unless y contains both classes.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise DataError(f"shape mismatch: X {X.shape}, y {y.shape}")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise DataError("labels must be 0 or 1")
    if np.all(y == y[0] if y.size else True):
        raise DegenerateLabelsError("labels contain a single class")
    X1 = add_intercept(X)
    current = ridge
    while True:
        try:
            model = _irls(X1, y, current, tol, max_iter)
            model.columns = list(columns) if columns is not None else None
            return model
        except _NumericalFailure as exc:
            steps = [r for r in RIDGE_LADDER if r > current]
            if not steps:
                raise DataError(f"logistic training failed at ridge {current}: {exc}") from exc
            current = steps[0]


def predict_proba(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != model.beta.size - 1:
        raise DataError(
            f"model expects {model.beta.size - 1} columns, got {X.shape[1]}"
        )
    return sigmoid(model.beta[0] + X @ model.beta[1:])


def decide(probs: np.ndarray, threshold: float) -> np.ndarray:
    """Hard labels from probabilities; the threshold itself maps to 1."""
    return (np.asarray(probs) >= threshold).astype(np.int64)


def apply_model(model: TrainedModel, X_raw: np.ndarray) -> np.ndarray:
    """Predict from raw rows, replaying the model's stored normalization."""
    X_raw = np.asarray(X_raw, dtype=np.float64)
    if model.norm_means is None or model.norm_scales is None:
        return predict_proba(model, X_raw)
    return predict_proba(model, (X_raw - model.norm_means) / model.norm_scales)


MODEL_FORMAT = "stopout-model-v1"


def _vec(values: np.ndarray | None) -> str:
    return "" if values is None else ",".join(repr(float(v)) for v in values)


def save_model(model: TrainedModel, path: str | Path) -> None:
    lines = [
        MODEL_FORMAT,
        f"ridge={model.ridge!r}",
        f"converged={int(model.converged)}",
        f"iterations={model.iterations}",
        "columns=" + (",".join(model.columns) if model.columns else ""),
        "norm_means=" + _vec(model.norm_means),
        "norm_scales=" + _vec(model.norm_scales),
        "beta=" + ",".join(repr(float(b)) for b in model.beta),
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _unvec(text: str) -> np.ndarray | None:
    return None if not text else np.array([float(v) for v in text.split(",")])


def load_model(path: str | Path) -> TrainedModel:
    path = Path(path)
    if not path.exists():
        raise DataError(f"model file not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != MODEL_FORMAT:
        raise DataError(f"{path}: unknown model format")
    fields = {}
    for ln in lines[1:]:
        if ln:
            key, _, value = ln.partition("=")
            fields[key] = value
    try:
        columns = fields["columns"].split(",") if fields["columns"] else None
        return TrainedModel(
            beta=np.array([float(v) for v in fields["beta"].split(",")]),
            ridge=float(fields["ridge"]),
            converged=bool(int(fields["converged"])),
            iterations=int(fields["iterations"]),
            ll_history=[],
            columns=columns,
            norm_means=_unvec(fields["norm_means"]),
            norm_scales=_unvec(fields["norm_scales"]),
        )
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: malformed model file: {exc}") from exc
