"""ROC computation, cross-validation, and the lead/lag evaluation grid."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import pairwise_auc
from stopout.cohorts import PASSIVE
from stopout.dataset_builder import ProblemSpec, flatten
from stopout.errors import DataError, DegenerateLabelsError
from stopout.evaluator import (
    STATUS_DEGENERATE,
    STATUS_INSUFFICIENT,
    STATUS_OK,
    CellResult,
    GridResult,
    cell_seed,
    cross_validate,
    evaluate_problem,
    export_grid,
    export_heatmap_matrix,
    load_grid,
    load_heatmap_matrix,
    roc_auc,
    roc_points,
    run_grid,
)

# labels then scores, both ways, to exercise ties and mid cases
binary_case = st.integers(2, 25).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(
            lambda ls: 0 < sum(ls) < len(ls)
        ),
        st.lists(st.integers(-5, 5), min_size=n, max_size=n),
    )
)


# ---------------------------------------------------------------------------
# roc_auc

def test_auc_examples():
    assert roc_auc(np.array([0, 0, 1, 1]), np.array([0.1, 0.2, 0.8, 0.9])) == 1.0
    assert roc_auc(np.array([1, 1, 0, 0]), np.array([0.1, 0.2, 0.8, 0.9])) == 0.0
    assert roc_auc(np.array([0, 1, 0, 1]), np.array([0.4, 0.4, 0.4, 0.4])) == 0.5
    assert roc_auc(np.array([1, 0, 1, 0]), np.array([0.9, 0.8, 0.7, 0.6])) == 0.75
    assert roc_auc(np.array([1, 0]), np.array([0.5, 0.5])) == 0.5


def test_auc_errors():
    with pytest.raises(DegenerateLabelsError):
        roc_auc(np.array([1, 1]), np.array([0.1, 0.2]))
    with pytest.raises(DataError, match="shape"):
        roc_auc(np.array([1, 0]), np.array([0.1, 0.2, 0.3]))
    with pytest.raises(DataError, match="finite"):
        roc_auc(np.array([1, 0]), np.array([np.nan, 0.2]))


@given(binary_case)
def test_auc_matches_pairwise_oracle(case):
    labels, scores = case
    y = np.array(labels, dtype=float)
    s = np.array(scores, dtype=float)
    assert roc_auc(y, s) == float(pairwise_auc(s, y))


@given(binary_case)
def test_auc_complement_identity(case):
    labels, scores = case
    y = np.array(labels, dtype=float)
    s = np.array(scores, dtype=float)
    assert roc_auc(y, s) + roc_auc(y, -s) == pytest.approx(1.0, abs=1e-12)
    assert pairwise_auc(s, y) + pairwise_auc(-s, y) == Fraction(1)


@given(binary_case)
def test_auc_invariant_under_monotone_transform(case):
    labels, scores = case
    y = np.array(labels, dtype=float)
    s = np.array(scores, dtype=float)
    assert roc_auc(y, 3.0 * s + 10.0) == roc_auc(y, s)


# ---------------------------------------------------------------------------
# roc_points

def test_roc_points_shape_and_area():
    y = np.array([1, 0, 1, 0, 1])
    s = np.array([0.9, 0.8, 0.7, 0.3, 0.2])
    pts = roc_points(y, s)
    assert pts[0] == (0.0, 0.0)
    assert pts[-1] == (1.0, 1.0)
    assert len(pts) == 6  # distinct thresholds + sentinel
    xs, ys = zip(*pts)
    assert all(a <= b for a, b in zip(xs, xs[1:]))
    assert all(a <= b for a, b in zip(ys, ys[1:]))
    area = sum(
        (x1 - x0) * (y1 + y0) / 2 for (x0, y0), (x1, y1) in zip(pts, pts[1:])
    )
    assert area == pytest.approx(roc_auc(y, s), abs=1e-9)


def test_roc_points_merges_ties():
    pts = roc_points(np.array([1, 0, 1, 0]), np.array([0.5, 0.5, 0.5, 0.5]))
    assert pts == [(0.0, 0.0), (1.0, 1.0)]


def test_roc_points_needs_both_classes():
    with pytest.raises(DegenerateLabelsError):
        roc_points(np.array([0, 0]), np.array([0.1, 0.2]))


# ---------------------------------------------------------------------------
# cross-validation

def balanced_problem(n: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    z = X @ np.array([2.0, -1.0, 0.0])
    y = (rng.random(n) < 1 / (1 + np.exp(-z))).astype(float)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    return X, y


def test_cv_returns_one_auc_per_fold():
    X, y = balanced_problem(100)
    aucs = cross_validate(X, y, np.random.default_rng(0), folds=10)
    assert len(aucs) == 10
    assert all(0.0 <= a <= 1.0 for a in aucs)


def test_cv_is_seed_deterministic():
    X, y = balanced_problem(80, seed=3)
    a = cross_validate(X, y, np.random.default_rng(5), folds=5)
    b = cross_validate(X, y, np.random.default_rng(5), folds=5)
    assert a == b


def test_cv_reduces_folds_with_warning():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(40, 2))
    y = np.zeros(40)
    y[:3] = 1.0
    with pytest.warns(RuntimeWarning, match="reducing cross-validation folds from 10 to 3"):
        aucs = cross_validate(X, y, np.random.default_rng(0), folds=10)
    assert len(aucs) == 3


def test_cv_floor_is_two_folds():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(20, 2))
    y = np.zeros(20)
    y[0] = 1.0
    with pytest.raises(DegenerateLabelsError, match="cross-validation"):
        cross_validate(X, y, np.random.default_rng(0), folds=10)


def test_cv_tracks_heldout_auc_on_planted_cell(planted_course):
    X, y, _, cols = flatten(planted_course.matrix, ProblemSpec(lead=1, lag=3))
    ev = evaluate_problem(X, y, np.random.default_rng(11), folds=10, columns=cols)
    assert abs(ev.cv_mean - ev.test_auc) < 0.05
    assert ev.n_train + ev.n_test == y.size
    assert ev.model.norm_means is not None and ev.model.norm_means.size == X.shape[1]
    assert ev.model.columns == cols


# ---------------------------------------------------------------------------
# grid

def test_grid_on_tiny_course_is_insufficient(fixture_matrix):
    grid = run_grid(fixture_matrix, seed=0)
    assert len(grid.cells) == 1
    cell = grid.cells[0]
    assert cell.status == STATUS_INSUFFICIENT
    assert cell.n_rows == 4
    assert cell.cv_mean is None and cell.test_auc is None


def test_grid_degenerate_cell_is_typed(fixture_matrix):
    grid = run_grid(fixture_matrix, seed=0, min_rows=3)
    assert grid.cells[0].status == STATUS_DEGENERATE


def test_grid_covers_all_problems(small_course):
    m = small_course.matrix
    grid = run_grid(m, seed=9, ridge=1e-6, folds=5)
    assert len(grid.cells) == (m.num_weeks - 1) * m.num_weeks // 2
    stopout = m.stopout_week
    for cell in grid.cells:
        assert cell.status in (STATUS_OK, STATUS_INSUFFICIENT, STATUS_DEGENERATE)
        assert cell.predicted_week == cell.lead + cell.lag
        assert cell.n_rows == int(np.sum(stopout > cell.lag))
        if cell.status == STATUS_OK:
            assert cell.n_train + cell.n_test == cell.n_rows
            for v in (cell.cv_mean, cell.train_auc, cell.test_auc):
                assert v is not None and 0.0 <= v <= 1.0
    assert any(c.status == STATUS_OK for c in grid.cells)


def test_grid_cells_do_not_depend_on_iteration_order(small_course):
    m = small_course.matrix
    specs = [ProblemSpec(lead=1, lag=1), ProblemSpec(lead=2, lag=3), ProblemSpec(lead=3, lag=2)]
    a = run_grid(m, seed=4, folds=4, specs=specs)
    b = run_grid(m, seed=4, folds=4, specs=list(reversed(specs)))
    by_key = {(c.lead, c.lag): c for c in b.cells}
    for cell in a.cells:
        assert by_key[(cell.lead, cell.lag)] == cell


def test_grid_label_shuffle_is_deterministic_and_destroys_signal(small_course):
    m = small_course.matrix
    specs = [ProblemSpec(lead=1, lag=2)]
    a = run_grid(m, seed=4, folds=4, specs=specs, shuffle_labels=True)
    b = run_grid(m, seed=4, folds=4, specs=specs, shuffle_labels=True)
    assert a.cells[0] == b.cells[0]
    real = run_grid(m, seed=4, folds=4, specs=specs)
    assert real.cells[0].test_auc != a.cells[0].test_auc


def test_grid_cohort_restriction(small_course):
    grid = run_grid(
        small_course.matrix,
        assignments=small_course.assignments,
        cohort=PASSIVE,
        seed=1,
        folds=4,
        specs=[ProblemSpec(lead=1, lag=1, cohort=PASSIVE)],
    )
    assert grid.cohort == PASSIVE
    in_cohort = sum(1 for c in small_course.assignments.values() if c == PASSIVE)
    stopout = small_course.matrix.stopout_week
    eligible = {
        lid
        for lid, so in zip(small_course.matrix.learners, stopout.tolist())
        if so > 1 and small_course.assignments.get(lid) == PASSIVE
    }
    assert grid.cells[0].n_rows == len(eligible) <= in_cohort


def test_cell_seed_is_stable_and_distinct():
    base = cell_seed(42, "all", 1, 2)
    assert base == cell_seed(42, "all", 1, 2)
    others = {
        cell_seed(42, "all", 2, 1),
        cell_seed(42, "passive_collaborator", 1, 2),
        cell_seed(43, "all", 1, 2),
    }
    assert base not in others
    assert 0 <= base < 2**128


# ---------------------------------------------------------------------------
# exports

def test_grid_round_trip(small_course, tmp_path):
    grid = run_grid(small_course.matrix, seed=2, folds=4, specs=[
        ProblemSpec(lead=1, lag=1), ProblemSpec(lead=1, lag=2), ProblemSpec(lead=5, lag=1),
    ])
    path = tmp_path / "grid.tsv"
    export_grid(grid, path)
    again = load_grid(path)
    assert sorted(
        (c.lead, c.lag) for c in again.cells
    ) == sorted((c.lead, c.lag) for c in grid.cells)
    by_key = {(c.lead, c.lag): c for c in again.cells}
    for cell in grid.cells:
        assert by_key[(cell.lead, cell.lag)] == cell


def test_grid_export_is_sorted_by_lag_then_lead(small_course, tmp_path):
    grid = run_grid(small_course.matrix, seed=2, folds=4)
    path = tmp_path / "grid.tsv"
    export_grid(grid, path)
    rows = [ln.split("\t") for ln in path.read_text(encoding="utf-8").splitlines()[1:]]
    keys = [(int(r[2]), int(r[1])) for r in rows]
    assert keys == sorted(keys)


def test_heatmap_matrix_round_trip(small_course, tmp_path):
    grid = run_grid(small_course.matrix, seed=2, folds=4)
    path = tmp_path / "heat.tsv"
    export_heatmap_matrix(grid, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    W = small_course.matrix.num_weeks
    assert lines[0].split("\t") == ["lag"] + [str(pw) for pw in range(2, W + 1)]
    assert len(lines) == W  # header + one row per lag
    loaded = load_heatmap_matrix(path)
    expected = {
        (c.lag, c.predicted_week): c.test_auc
        for c in grid.cells
        if c.status == STATUS_OK
    }
    assert loaded == expected  # repr round-trips floats bit-exactly


def test_heatmap_matrix_leaves_invalid_cells_empty(tmp_path):
    grid = GridResult(cohort="all", num_weeks=3, seed=0, cells=[
        CellResult(cohort="all", lead=1, lag=1, predicted_week=2, status=STATUS_OK,
                   n_rows=50, n_train=35, n_test=15, cv_mean=0.8, train_auc=0.9, test_auc=0.85),
        CellResult(cohort="all", lead=2, lag=1, predicted_week=3, status=STATUS_INSUFFICIENT, n_rows=3),
        CellResult(cohort="all", lead=1, lag=2, predicted_week=3, status=STATUS_DEGENERATE, n_rows=40),
    ])
    path = tmp_path / "heat.tsv"
    export_heatmap_matrix(grid, path)
    assert load_heatmap_matrix(path) == {(1, 2): 0.85}
    row_lag1 = path.read_text(encoding="utf-8").splitlines()[1].split("\t")
    assert row_lag1 == ["1", "0.85", ""]


def test_loaders_reject_junk(tmp_path):
    junk = tmp_path / "junk.tsv"
    junk.write_text("nope\n", encoding="utf-8")
    for loader in (load_grid, load_heatmap_matrix):
        with pytest.raises(DataError):
            loader(junk)
        with pytest.raises(DataError, match="not found"):
            loader(tmp_path / "absent.tsv")
