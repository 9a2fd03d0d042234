"""Independent reference implementations used only by tests.

Deliberately slow and simple: AUC by exhaustive pair counting in exact
rational arithmetic, and logistic maximum likelihood by a dense coefficient
grid search with iterative refinement. Production code has to match these,
never the other way around.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def pairwise_auc(scores, labels) -> Fraction:
    """Exact AUC: over all (positive, negative) pairs, wins count 1 and ties
    count 1/2. No floating-point accumulation anywhere."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    if not pos or not neg:
        raise ValueError("need both classes")
    twice = 0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                twice += 2
            elif sp == sn:
                twice += 1
    return Fraction(twice, 2 * len(pos) * len(neg))


def penalized_ll_reference(beta: np.ndarray, X: np.ndarray, y: np.ndarray, ridge: float) -> float:
    """Same objective the trainer maximizes, written independently."""
    X1 = np.hstack([np.ones((X.shape[0], 1)), np.asarray(X, dtype=np.float64)])
    z = X1 @ np.asarray(beta, dtype=np.float64)
    ll = float(np.sum(np.asarray(y, dtype=np.float64) * z - np.logaddexp(0.0, z)))
    return ll - 0.5 * ridge * float(np.sum(np.asarray(beta)[1:] ** 2))


def grid_mle_ll(
    X: np.ndarray,
    y: np.ndarray,
    ridge: float,
    span: float = 8.0,
    points: int = 13,
    rounds: int = 25,
    shrink: float = 0.45,
) -> float:
    """Best penalized log-likelihood found by a recentering dense grid search.

    Each round lays a points^d grid of width +-span around the incumbent and
    jumps to its argmax. The window only shrinks when the argmax is interior,
    so optima outside the initial window are reachable by walking.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    X1 = np.hstack([np.ones((X.shape[0], 1)), X])
    d = X1.shape[1]

    def batch_ll(B: np.ndarray) -> np.ndarray:
        Z = X1 @ B.T
        data = np.sum(y[:, None] * Z - np.logaddexp(0.0, Z), axis=0)
        return data - 0.5 * ridge * np.sum(B[:, 1:] ** 2, axis=1)

    center = np.zeros(d)
    width = span
    best = -np.inf
    for _ in range(rounds):
        axes = [np.linspace(c - width, c + width, points) for c in center]
        mesh = np.meshgrid(*axes, indexing="ij")
        B = np.stack([m.ravel() for m in mesh], axis=1)
        vals = batch_ll(B)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best = float(vals[k])
            center = B[k]
        idx = np.unravel_index(k, (points,) * d)
        on_edge = any(i == 0 or i == points - 1 for i in idx)
        if not on_edge:
            width *= shrink
    return best
