"""Model evaluation: ROC AUC, stratified cross-validation, lead/lag grids.

AUC is computed by two independent routes on every call (threshold sweep with
trapezoids, and the rank statistic with midrank tie handling in exact integer
arithmetic); a disagreement beyond 1e-9 is a hard error, not a warning.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset_builder import ProblemSpec, enumerate_problems, flatten, normalize, stratified_split
from .errors import DataError, DegenerateLabelsError
from .featurizer import FeatureMatrix
from .logistic_model import TrainedModel, predict_proba, train

STATUS_OK = "ok"
STATUS_INSUFFICIENT = "insufficient_data"
STATUS_DEGENERATE = "degenerate_labels"
ALL_COHORT = "all"
AUC_ROUTE_TOL = 1e-9


def _counts(y: np.ndarray) -> tuple[int, int]:
    pos = int(np.sum(y == 1))
    neg = int(np.sum(y == 0))
    return pos, neg


def _auc_rank(y: np.ndarray, scores: np.ndarray, pos: int, neg: int) -> float:
    # Mann-Whitney with midranks, kept in integers until the final division:
    # each positive beats every negative scored strictly below it and half-wins
    # each tied negative, so 2*U stays integral.
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    t = y[order]
    twice_u = 0
    neg_below = 0
    i = 0
    n = s.size
    while i < n:
        j = i
        pos_g = 0
        neg_g = 0
        while j < n and s[j] == s[i]:
            if t[j] == 1:
                pos_g += 1
            else:
                neg_g += 1
            j += 1
        twice_u += pos_g * (2 * neg_below + neg_g)
        neg_below += neg_g
        i = j
    return twice_u / (2 * pos * neg)


def _sweep_points(y: np.ndarray, scores: np.ndarray, pos: int, neg: int) -> list[tuple[float, float]]:
    # Sweep the decision threshold down through every distinct score; each
    # stop adds one (fpr, tpr) operating point after the (0, 0) sentinel.
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    t = y[order]
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    n = s.size
    while i < n:
        j = i
        while j < n and s[j] == s[i]:
            if t[j] == 1:
                tp += 1
            else:
                fp += 1
            j += 1
        points.append((fp / neg, tp / pos))
        i = j
    return points


def _auc_sweep(y: np.ndarray, scores: np.ndarray, pos: int, neg: int) -> float:
    points = _sweep_points(y, scores, pos, neg)
    area = 0.0
    for (fpr0, tpr0), (fpr1, tpr1) in zip(points, points[1:]):
        area += (fpr1 - fpr0) * (tpr1 + tpr0) / 2.0
    return area


def roc_points(y_true: np.ndarray, scores: np.ndarray) -> list[tuple[float, float]]:
    """ROC operating points from (0,0) to (1,1), one per distinct threshold."""
    y = np.asarray(y_true, dtype=np.float64)
    s = np.asarray(scores, dtype=np.float64)
    pos, neg = _counts(y)
    if pos == 0 or neg == 0:
        raise DegenerateLabelsError("ROC needs both classes present")
    return _sweep_points(y, s, pos, neg)


def roc_auc(y_true: np.ndarray, scores: np.ndarray) -> float:
    """Area under the ROC curve; ties earn half credit.

    Raises DegenerateLabelsError when either class is absent.
    """
    y = np.asarray(y_true, dtype=np.float64)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 1:
        raise DataError(f"shape mismatch: labels {y.shape}, scores {s.shape}")
    if not np.all(np.isfinite(s)):
        raise DataError("scores must be finite")
    pos, neg = _counts(y)
    if pos == 0 or neg == 0:
        raise DegenerateLabelsError("AUC needs both classes present")
    by_rank = _auc_rank(y, s, pos, neg)
    by_sweep = _auc_sweep(y, s, pos, neg)
    if abs(by_rank - by_sweep) > AUC_ROUTE_TOL:
        raise DataError(
            f"AUC routes disagree: rank={by_rank!r} sweep={by_sweep!r}"
        )
    return by_rank


def cross_validate(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    folds: int = 10,
    ridge: float = 0.0,
) -> list[float]:
    """Stratified k-fold AUCs; k shrinks to the minority count when needed.

    Folds are assigned round-robin within each shuffled class, so every fold
    holds at least one example of each class. Normalization statistics are
    recomputed inside each fold from its own training split.
    """
    y = np.asarray(y, dtype=np.float64)
    pos, neg = _counts(y)
    k = min(folds, pos, neg)
    if k < 2:
        raise DegenerateLabelsError(
            f"cross-validation needs 2+ of each class, got {pos} pos / {neg} neg"
        )
    if k < folds:
        warnings.warn(
            f"reducing cross-validation folds from {folds} to {k} "
            f"(minority class has {min(pos, neg)} rows)",
            RuntimeWarning,
            stacklevel=2,
        )
    fold_id = np.empty(y.size, dtype=np.int64)
    for cls in (0.0, 1.0):
        members = np.flatnonzero(y == cls)
        shuffled = members[rng.permutation(members.size)]
        fold_id[shuffled] = np.arange(shuffled.size) % k
    aucs = []
    for f in range(k):
        test_mask = fold_id == f
        Xtr, Xte, _, _ = normalize(X[~test_mask], X[test_mask])
        model = train(Xtr, y[~test_mask], ridge=ridge)
        aucs.append(roc_auc(y[test_mask], predict_proba(model, Xte)))
    return aucs


@dataclass
class Evaluation:
    model: TrainedModel
    cv_aucs: list[float]
    train_auc: float
    test_auc: float
    n_train: int
    n_test: int

    @property
    def cv_mean(self) -> float:
        return sum(self.cv_aucs) / len(self.cv_aucs)


def evaluate_problem(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    ratio: float = 0.7,
    ridge: float = 0.0,
    folds: int = 10,
    columns: list[str] | None = None,
) -> Evaluation:
    """Split, cross-validate on train, fit on full train, score both sides."""
    train_idx, test_idx = stratified_split(y, ratio, rng)
    X_train, y_train = X[train_idx], y[train_idx]
    X_test, y_test = X[test_idx], y[test_idx]
    cv_aucs = cross_validate(X_train, y_train, rng, folds=folds, ridge=ridge)
    Xtr, Xte, means, scales = normalize(X_train, X_test)
    model = train(Xtr, y_train, ridge=ridge, columns=columns)
    model.norm_means = means
    model.norm_scales = scales
    train_auc = roc_auc(y_train, predict_proba(model, Xtr))
    test_auc = roc_auc(y_test, predict_proba(model, Xte))
    return Evaluation(
        model=model,
        cv_aucs=cv_aucs,
        train_auc=train_auc,
        test_auc=test_auc,
        n_train=int(train_idx.size),
        n_test=int(test_idx.size),
    )


def cell_seed(master_seed: int, cohort: str, lead: int, lag: int) -> int:
    """Stable per-cell RNG seed, independent of grid iteration order."""
    key = f"{master_seed}|{cohort}|{lead}|{lag}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:16], "big")


@dataclass
class CellResult:
    cohort: str
    lead: int
    lag: int
    predicted_week: int
    status: str
    n_rows: int
    n_train: int = 0
    n_test: int = 0
    cv_mean: float | None = None
    train_auc: float | None = None
    test_auc: float | None = None


@dataclass
class GridResult:
    cohort: str
    num_weeks: int
    seed: int
    cells: list[CellResult] = field(default_factory=list)

    def cell(self, lead: int, lag: int) -> CellResult:
        for c in self.cells:
            if c.lead == lead and c.lag == lag:
                return c
        raise KeyError(f"no cell for lead={lead} lag={lag}")


def run_grid(
    matrix: FeatureMatrix,
    assignments: dict[str, str] | None = None,
    cohort: str | None = None,
    seed: int = 0,
    min_rows: int = 10,
    ratio: float = 0.7,
    ridge: float = 0.0,
    folds: int = 10,
    shuffle_labels: bool = False,
    specs: list[ProblemSpec] | None = None,
) -> GridResult:
    """Evaluate every lead/lag prediction problem for one population.

    Cells that cannot be evaluated are recorded with a typed status instead of
    raising: too few eligible learners, or a single-class label vector
    somewhere in the pipeline. shuffle_labels permutes y before splitting, as
    a no-signal control.
    """
    label = cohort if cohort is not None else ALL_COHORT
    if specs is None:
        specs = enumerate_problems(matrix.num_weeks, cohort=cohort)
    grid = GridResult(cohort=label, num_weeks=matrix.num_weeks, seed=seed)
    for spec in specs:
        X, y, _, columns = flatten(matrix, spec, assignments)
        cell = CellResult(
            cohort=label,
            lead=spec.lead,
            lag=spec.lag,
            predicted_week=spec.predicted_week,
            status=STATUS_OK,
            n_rows=int(y.size),
        )
        if y.size < min_rows:
            cell.status = STATUS_INSUFFICIENT
            grid.cells.append(cell)
            continue
        rng = np.random.default_rng(cell_seed(seed, label, spec.lead, spec.lag))
        if shuffle_labels:
            y = y[rng.permutation(y.size)]
        try:
            ev = evaluate_problem(X, y, rng, ratio=ratio, ridge=ridge, folds=folds, columns=columns)
        except DegenerateLabelsError:
            cell.status = STATUS_DEGENERATE
            grid.cells.append(cell)
            continue
        cell.n_train = ev.n_train
        cell.n_test = ev.n_test
        cell.cv_mean = ev.cv_mean
        cell.train_auc = ev.train_auc
        cell.test_auc = ev.test_auc
        grid.cells.append(cell)
    return grid


GRID_COLUMNS = (
    "cohort", "lead", "lag", "predicted_week", "status",
    "n_rows", "n_train", "n_test", "cv_mean", "train_auc", "test_auc",
)


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def export_grid(grid: GridResult, path: str | Path) -> None:
    rows = ["\t".join(GRID_COLUMNS)]
    ordered = sorted(grid.cells, key=lambda c: (c.lag, c.lead))
    for c in ordered:
        rows.append("\t".join((
            c.cohort, str(c.lead), str(c.lag), str(c.predicted_week), c.status,
            str(c.n_rows), str(c.n_train), str(c.n_test),
            _fmt(c.cv_mean), _fmt(c.train_auc), _fmt(c.test_auc),
        )))
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def export_heatmap_matrix(grid: GridResult, path: str | Path, value: str = "test_auc") -> None:
    """Lag-by-predicted-week matrix view; empty cells for anything not ok.

    Rows are lag 1..num_weeks-1, columns predicted week 2..num_weeks. Cells
    outside the triangle (predicted week <= lag) are empty strings too.
    """
    W = grid.num_weeks
    by_pos = {(c.lag, c.predicted_week): c for c in grid.cells}
    rows = ["\t".join(["lag"] + [str(pw) for pw in range(2, W + 1)])]
    for lag in range(1, W):
        cells = [str(lag)]
        for pw in range(2, W + 1):
            cell = by_pos.get((lag, pw))
            if cell is not None and cell.status == STATUS_OK:
                cells.append(repr(float(getattr(cell, value))))
            else:
                cells.append("")
        rows.append("\t".join(cells))
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_heatmap_matrix(path: str | Path) -> dict[tuple[int, int], float]:
    """Parse a heatmap matrix back into {(lag, predicted_week): value}."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"heatmap matrix not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("lag\t"):
        raise DataError(f"{path}: not a heatmap matrix export")
    pws = [int(v) for v in lines[0].split("\t")[1:]]
    out: dict[tuple[int, int], float] = {}
    for ln in lines[1:]:
        if not ln:
            continue
        parts = ln.split("\t")
        lag = int(parts[0])
        for pw, cell in zip(pws, parts[1:]):
            if cell:
                out[(lag, pw)] = float(cell)
    return out


def load_grid(path: str | Path) -> GridResult:
    path = Path(path)
    if not path.exists():
        raise DataError(f"grid file not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "\t".join(GRID_COLUMNS):
        raise DataError(f"{path}: not a grid export")
    cells = []
    cohort = ALL_COHORT
    num_weeks = 0
    for ln in lines[1:]:
        if not ln:
            continue
        parts = ln.split("\t")
        if len(parts) != len(GRID_COLUMNS):
            raise DataError(f"{path}: bad grid row {ln!r}")
        cohort = parts[0]
        cell = CellResult(
            cohort=parts[0],
            lead=int(parts[1]),
            lag=int(parts[2]),
            predicted_week=int(parts[3]),
            status=parts[4],
            n_rows=int(parts[5]),
            n_train=int(parts[6]),
            n_test=int(parts[7]),
            cv_mean=float(parts[8]) if parts[8] else None,
            train_auc=float(parts[9]) if parts[9] else None,
            test_auc=float(parts[10]) if parts[10] else None,
        )
        num_weeks = max(num_weeks, cell.predicted_week)
        cells.append(cell)
    return GridResult(cohort=cohort, num_weeks=num_weeks, seed=-1, cells=cells)
