"""Feature importance by stability selection over l1 logistic models.

Many stratified subsamples are fit with an l1 penalty whose per-column
weights are randomly rescaled; a feature's importance is how often its
coefficient survives. Columns repeat once per lag week, so a base feature's
score is the max over its copies, then averaged across prediction problems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset_builder import ProblemSpec, flatten, normalize
from .errors import DataError, InsufficientDataError
from .evaluator import ALL_COHORT, STATUS_DEGENERATE, STATUS_INSUFFICIENT, STATUS_OK, cell_seed
from .featurizer import FEATURE_IDS, FeatureMatrix
from .logistic_model import sigmoid

SELECT_EPS = 1e-6
DEFAULT_SUBSAMPLES = 200
DEFAULT_FRACTION = 0.75
DEFAULT_WEIGHT_FLOOR = 0.5
DEFAULT_TARGET_SUPPORT = 8


def soft_threshold(v: np.ndarray, tau: np.ndarray) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def l1_logistic(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    weights: np.ndarray | None = None,
    tol: float = 1e-7,
    max_iter: int = 1000,
) -> np.ndarray:
    """l1-penalized logistic fit by FISTA; returns beta with intercept first.

    Minimizes mean logistic loss plus lam * sum_j weights_j * |beta_j| over
    the non-intercept coordinates. The step size comes from the loss's exact
    Lipschitz bound, so no line search is needed.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    X1 = np.hstack([np.ones((n, 1)), X])
    if weights is None:
        weights = np.ones(d)
    tau = np.zeros(d + 1)
    tau[1:] = lam * weights

    lipschitz = np.linalg.norm(X1, ord=2) ** 2 / (4.0 * n)
    step = 1.0 / lipschitz
    beta = np.zeros(d + 1)
    look = beta
    t = 1.0
    for _ in range(max_iter):
        p = sigmoid(X1 @ look)
        grad = X1.T @ (p - y) / n
        new_beta = soft_threshold(look - step * grad, step * tau)
        t_new = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        look = new_beta + ((t - 1.0) / t_new) * (new_beta - beta)
        delta = float(np.max(np.abs(new_beta - beta)))
        beta = new_beta
        t = t_new
        if delta < tol:
            break
    return beta


def _base_id(column: str) -> str:
    return column.split("_", 1)[1]


def _support_size(beta: np.ndarray, columns: list[str], eps: float) -> int:
    selected = set()
    for j, col in enumerate(columns):
        if abs(beta[j + 1]) > eps:
            selected.add(_base_id(col))
    return len(selected)


def calibrate_lambda(
    X: np.ndarray,
    y: np.ndarray,
    columns: list[str],
    target_support: int = DEFAULT_TARGET_SUPPORT,
    eps: float = SELECT_EPS,
    steps: int = 25,
) -> float:
    """Pick the l1 strength whose full-data support is closest to the target.

    Support counts base features, not columns. Geometric bisection between a
    tiny penalty and the smallest all-zero penalty; ties prefer the sparser
    (larger) lambda.
    """
    n = X.shape[0]
    resid = y - float(np.mean(y))
    lam_max = float(np.max(np.abs(X.T @ resid))) / n
    if lam_max <= 0.0:
        raise DataError("cannot calibrate l1 strength on constant labels")
    lo, hi = lam_max * 1e-4, lam_max
    best_lam, best_diff = hi, abs(0 - target_support)
    for _ in range(steps):
        mid = float(np.sqrt(lo * hi))
        support = _support_size(l1_logistic(X, y, mid), columns, eps)
        diff = abs(support - target_support)
        if diff < best_diff or (diff == best_diff and mid > best_lam):
            best_lam, best_diff = mid, diff
        if support > target_support:
            lo = mid
        else:
            hi = mid
    return best_lam


def _stratified_subsample(y: np.ndarray, fraction: float, rng: np.random.Generator) -> np.ndarray:
    parts = []
    for cls in (0.0, 1.0):
        members = np.flatnonzero(y == cls)
        take = max(1, int(round(fraction * members.size)))
        parts.append(members[rng.permutation(members.size)][:take])
    return np.sort(np.concatenate(parts))


@dataclass
class StabilityResult:
    columns: list[str]
    column_freq: np.ndarray
    base_freq: dict[str, float]
    lam: float
    subsamples: int


def stability_select(
    X: np.ndarray,
    y: np.ndarray,
    columns: list[str],
    rng: np.random.Generator,
    subsamples: int = DEFAULT_SUBSAMPLES,
    fraction: float = DEFAULT_FRACTION,
    weight_floor: float = DEFAULT_WEIGHT_FLOOR,
    target_support: int = DEFAULT_TARGET_SUPPORT,
    lam: float | None = None,
    eps: float = SELECT_EPS,
) -> StabilityResult:
    """Selection frequencies from repeated randomized-l1 fits.

    Each round draws a stratified row subsample and fresh per-column penalty
    weights uniform on [weight_floor, 1]; a column counts as selected when its
    coefficient magnitude clears eps. Base-feature scores take the max over
    that feature's weekly copies.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    # Canonical row order: shuffled copies of one dataset must give bitwise
    # equal frequencies, and float sums depend on row order. Ties are only
    # between identical rows, which are interchangeable.
    order = np.lexsort(np.vstack([X.T, y[None, :]]))
    X = X[order]
    y = y[order]
    Xn, _, _, _ = normalize(X)
    if lam is None:
        lam = calibrate_lambda(Xn, y, columns, target_support=target_support, eps=eps)
    hits = np.zeros(len(columns))
    for _ in range(subsamples):
        weights = rng.uniform(weight_floor, 1.0, size=len(columns))
        idx = _stratified_subsample(y, fraction, rng)
        beta = l1_logistic(Xn[idx], y[idx], lam, weights=weights)
        hits += (np.abs(beta[1:]) > eps).astype(np.float64)
    freq = hits / subsamples
    base: dict[str, float] = {}
    for j, col in enumerate(columns):
        fid = _base_id(col)
        base[fid] = max(base.get(fid, 0.0), float(freq[j]))
    return StabilityResult(
        columns=list(columns), column_freq=freq, base_freq=base, lam=lam, subsamples=subsamples
    )


@dataclass
class ImportanceReport:
    cohort: str
    seed: int
    subsamples: int
    fraction: float
    weight_floor: float
    statuses: list[tuple[str, int, int, str]]  # (cohort, lead, lag, status)
    lams: list[float] = field(default_factory=list)
    base_freq: dict[str, float] = field(default_factory=dict)

    def ranked(self) -> list[tuple[str, float]]:
        order = {fid: i for i, fid in enumerate(FEATURE_IDS)}
        return sorted(self.base_freq.items(), key=lambda kv: (-kv[1], order[kv[0]]))


def run_importance(
    matrix: FeatureMatrix,
    specs: list[ProblemSpec],
    assignments: dict[str, str] | None = None,
    seed: int = 0,
    subsamples: int = DEFAULT_SUBSAMPLES,
    fraction: float = DEFAULT_FRACTION,
    weight_floor: float = DEFAULT_WEIGHT_FLOOR,
    target_support: int = DEFAULT_TARGET_SUPPORT,
    min_rows: int = 10,
) -> ImportanceReport:
    """Stability selection over a set of problems, averaged per base feature.

    Problems without enough usable rows or with fewer than two examples of a
    class are skipped with a recorded status; at least one problem must
    survive or InsufficientDataError is raised.
    """
    labels = {spec.cohort if spec.cohort is not None else ALL_COHORT for spec in specs}
    cohort = labels.pop() if len(labels) == 1 else "mixed"
    report = ImportanceReport(
        cohort=cohort, seed=seed, subsamples=subsamples,
        fraction=fraction, weight_floor=weight_floor, statuses=[],
    )
    sums: dict[str, float] = {fid: 0.0 for fid in FEATURE_IDS}
    used = 0
    for spec in specs:
        label = spec.cohort if spec.cohort is not None else ALL_COHORT
        X, y, _, columns = flatten(matrix, spec, assignments)
        if y.size < min_rows:
            report.statuses.append((label, spec.lead, spec.lag, STATUS_INSUFFICIENT))
            continue
        pos = int(np.sum(y == 1))
        if min(pos, y.size - pos) < 2:
            report.statuses.append((label, spec.lead, spec.lag, STATUS_DEGENERATE))
            continue
        rng = np.random.default_rng(cell_seed(seed, f"importance|{label}", spec.lead, spec.lag))
        result = stability_select(
            X, y, columns, rng,
            subsamples=subsamples, fraction=fraction,
            weight_floor=weight_floor, target_support=target_support,
        )
        for fid in FEATURE_IDS:
            sums[fid] += result.base_freq.get(fid, 0.0)
        used += 1
        report.lams.append(result.lam)
        report.statuses.append((label, spec.lead, spec.lag, STATUS_OK))
    if used == 0:
        raise InsufficientDataError("no prediction problem had enough usable rows")
    report.base_freq = {fid: sums[fid] / used for fid in FEATURE_IDS}
    return report


IMPORTANCE_HEADER = "cohort\tfeature_id\tfrequency"


def export_importance(reports: ImportanceReport | list[ImportanceReport], path: str | Path) -> None:
    if isinstance(reports, ImportanceReport):
        reports = [reports]
    rows = [IMPORTANCE_HEADER]
    for report in reports:
        for fid, freq in report.ranked():
            rows.append(f"{report.cohort}\t{fid}\t{freq!r}")
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_importance(path: str | Path) -> dict[tuple[str, str], float]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"importance file not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != IMPORTANCE_HEADER:
        raise DataError(f"{path}: not an importance export")
    out = {}
    for ln in lines[1:]:
        if not ln:
            continue
        cohort, fid, freq = ln.split("\t")
        out[(cohort, fid)] = float(freq)
    return out
