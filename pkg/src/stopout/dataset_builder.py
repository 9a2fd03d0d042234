"""Turn the weekly feature cube into flat train/test design matrices.

A prediction problem is a (lead, lag) pair, optionally restricted to one
cohort: the features of weeks 1..lag predict the persistence label at week
lag+lead. Learners who stopped out during the lag window are excluded since
their outcome is already decided.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .featurizer import FEATURE_IDS, FeatureMatrix


@dataclass(frozen=True, slots=True)
class ProblemSpec:
    lead: int
    lag: int
    cohort: str | None = None

    def __post_init__(self) -> None:
        if self.lead < 1 or self.lag < 1:
            raise ConfigError(f"lead and lag must be >= 1, got lead={self.lead} lag={self.lag}")

    @property
    def predicted_week(self) -> int:
        return self.lead + self.lag


def enumerate_problems(num_weeks: int, cohort: str | None = None) -> list[ProblemSpec]:
    """All (lead, lag) pairs whose predicted week fits inside the course.

    The final week's label is constant by construction (nobody can stop out
    after it), so predicted weeks run only up to num_weeks.
    """
    specs = []
    for lag in range(1, num_weeks):
        for lead in range(1, num_weeks - lag + 1):
            specs.append(ProblemSpec(lead=lead, lag=lag, cohort=cohort))
    return specs


def column_names(lag: int) -> list[str]:
    return [f"w{w}_{fid}" for w in range(1, lag + 1) for fid in FEATURE_IDS]


def flatten(
    matrix: FeatureMatrix,
    spec: ProblemSpec,
    assignments: dict[str, str] | None = None,
) -> tuple[np.ndarray, np.ndarray, list[str], list[str]]:
    """Build (X, y, learner_ids, column_names) for one prediction problem.

    Rows keep only learners still active after the lag window (stopout week
    strictly beyond lag) and, when the spec names a cohort, only that cohort.
    X stacks weeks 1..lag left to right, each week in feature-id order.
    """
    pw = spec.predicted_week
    if pw > matrix.num_weeks:
        raise ConfigError(
            f"predicted week {pw} exceeds course length {matrix.num_weeks}"
        )
    if spec.cohort is not None and assignments is None:
        raise ConfigError("cohort-restricted problem needs cohort assignments")

    keep = matrix.stopout_week > spec.lag
    if spec.cohort is not None:
        in_cohort = np.array(
            [assignments.get(lid) == spec.cohort for lid in matrix.learners]
        )
        keep = keep & in_cohort

    idx = np.flatnonzero(keep)
    # explicit width: reshape(-1) cannot infer columns when no row survives
    X = matrix.values[idx, : spec.lag, :].reshape(idx.size, spec.lag * len(FEATURE_IDS))
    y = matrix.labels[idx, pw - 1].astype(np.float64)
    learners = [matrix.learners[i] for i in idx]
    return X, y, learners, column_names(spec.lag)


def stratified_split(
    y: np.ndarray, ratio: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Split row indices into (train, test) with per-class largest-remainder counts.

    The train side gets round(ratio * N) rows overall; each class contributes
    floor(ratio * n_c), and the leftover goes to the classes with the largest
    fractional remainders. Returned index arrays are sorted ascending.
    """
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"split ratio must be in (0, 1), got {ratio}")
    n = y.size
    target = int(round(ratio * n))
    classes = np.unique(y)
    counts = {c: int(np.sum(y == c)) for c in classes}
    base = {c: int(ratio * counts[c]) for c in classes}
    leftover = target - sum(base.values())
    # Largest fractional remainder first; break ties toward the bigger class,
    # then the smaller label, so the allocation is deterministic.
    order = sorted(
        classes,
        key=lambda c: (-(ratio * counts[c] - base[c]), -counts[c], c),
    )
    k = 0
    while leftover > 0 and k < 2 * len(order):
        c = order[k % len(order)]
        if base[c] < counts[c]:
            base[c] += 1
            leftover -= 1
        k += 1

    train_parts, test_parts = [], []
    for c in classes:
        members = np.flatnonzero(y == c)
        perm = rng.permutation(members.size)
        shuffled = members[perm]
        train_parts.append(shuffled[: base[c]])
        test_parts.append(shuffled[base[c]:])
    train = np.sort(np.concatenate(train_parts)) if train_parts else np.zeros(0, dtype=np.int64)
    test = np.sort(np.concatenate(test_parts)) if test_parts else np.zeros(0, dtype=np.int64)
    return train, test


def normalize(
    X_train: np.ndarray, X_test: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray | None, np.ndarray, np.ndarray]:
    """Z-score with train-set statistics; constant columns are only centered.

    Returns (train, test, means, scales); scales holds the divisor actually
    used, 1.0 wherever the train column had zero variance.
    """
    means = X_train.mean(axis=0) if X_train.size else np.zeros(X_train.shape[1])
    stds = X_train.std(axis=0) if X_train.size else np.zeros(X_train.shape[1])
    scales = np.where(stds > 0.0, stds, 1.0)
    train = (X_train - means) / scales
    test = None if X_test is None else (X_test - means) / scales
    return train, test, means, scales
