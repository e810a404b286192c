"""Matrix-learning equivalence: solve min_A 0.5||A - Y||_F^2 + eta||A||_*
three ways and compare objectives.

(a) closed-form singular value soft-thresholding,
(b) gradient descent on the factorized objective over U V^T,
(c) subgradient descent on the convex objective itself.
"""

from __future__ import annotations

import numpy as np

from ..linalg import nuclear_norm, svd, svt
from ..rng import stream
from .report import ExperimentReport

__all__ = ["nuclear_objective", "factorized_objective", "run_matrix_equiv"]


def nuclear_objective(A, Y, eta):
    return 0.5 * float(np.sum((A - Y) ** 2)) + eta * nuclear_norm(A)


def factorized_objective(U, V, Y, eta):
    A = U @ V.T
    return 0.5 * float(np.sum((A - Y) ** 2)) + 0.5 * eta * (
        float(np.sum(U * U)) + float(np.sum(V * V)))


def _factorized_descent(Y, eta, rng, iters=4000, lr=0.05):
    """Adam on 0.5||UV^T - Y||^2 + (eta/2)(||U||^2 + ||V||^2), r = min(m,n)."""
    m, n = Y.shape
    r = min(m, n)
    U = rng.normal(0.0, 0.5, size=(m, r))
    V = rng.normal(0.0, 0.5, size=(n, r))
    mu = {k: np.zeros_like(v) for k, v in (("U", U), ("V", V))}
    vu = {k: np.zeros_like(v) for k, v in (("U", U), ("V", V))}
    b1, b2, eps = 0.9, 0.999, 1e-8
    for t in range(1, iters + 1):
        R = U @ V.T - Y
        gU = R @ V + eta * U
        gV = R.T @ U + eta * V
        for key, param, g in (("U", U, gU), ("V", V, gV)):
            mu[key] = b1 * mu[key] + (1 - b1) * g
            vu[key] = b2 * vu[key] + (1 - b2) * g * g
            mhat = mu[key] / (1 - b1 ** t)
            vhat = vu[key] / (1 - b2 ** t)
            param -= lr * mhat / (np.sqrt(vhat) + eps)
    return U, V


def _subgradient_descent(Y, eta, iters=2000, lr=0.2):
    """Polyak-style diminishing steps on the convex objective."""
    A = Y.copy()
    best = A.copy()
    best_obj = nuclear_objective(A, Y, eta)
    for t in range(1, iters + 1):
        res = svd(A)
        r = res.rank
        sub = res.U[:, :r] @ res.V[:, :r].T if r else np.zeros_like(A)
        g = (A - Y) + eta * sub
        A = A - (lr / np.sqrt(t)) * g
        obj = nuclear_objective(A, Y, eta)
        if obj < best_obj:
            best_obj = obj
            best = A.copy()
    return best, best_obj


def run_matrix_equiv(Y, eta, seed=0, out_dir=None, factor_iters=4000,
                     subgrad_iters=2000):
    Y = np.asarray(Y, float)
    if max(Y.shape) > 64:
        raise ValueError("matrix equivalence runs are capped at 64 per side")
    rng = stream(seed, "init")

    A_svt = svt(Y, eta)
    obj_svt = nuclear_objective(A_svt, Y, eta)

    U, V = _factorized_descent(Y, eta, rng, iters=factor_iters)
    obj_fact = factorized_objective(U, V, Y, eta)

    A_sub, obj_sub = _subgradient_descent(Y, eta, iters=subgrad_iters)

    summary = {
        "eta": eta,
        "shape": list(Y.shape),
        "objective_svt": obj_svt,
        "objective_factorized": obj_fact,
        "objective_subgradient": obj_sub,
        "rel_gap_factorized": abs(obj_fact - obj_svt) / max(abs(obj_svt), 1e-12),
        "rel_gap_subgradient": abs(obj_sub - obj_svt) / max(abs(obj_svt), 1e-12),
        "seed": seed,
    }
    report = ExperimentReport(
        config={"experiment": "matrix_equiv", "eta": eta, "seed": seed,
                "shape": list(Y.shape), "factor_iters": factor_iters,
                "subgrad_iters": subgrad_iters},
        summary=summary)
    if out_dir is not None:
        report.save(out_dir)
    return report, (A_svt, U @ V.T, A_sub)
