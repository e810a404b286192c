"""Fast oracle and invariant checks, printable as a pass/fail table.

These duplicate the cheap end of the test suite so an installation can
be validated without pytest.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .linalg import (check_subgradient_optimality, frobenius_sq, nuclear_norm,
                     optimal_shrink, srebro_factorize, svd, svt)
from .models import ModelSpec, init_composite
from .regularizers import (exact_nuclear_penalty, frob_norm_estimate,
                           frobenius_split_penalty, hutchinson_regularizer)
from .rng import stream


def _gradcheck():
    rng = np.random.default_rng(1)
    A = rng.normal(size=(3, 3))
    b = rng.normal(size=3)
    x0 = rng.normal(size=3)

    def loss(v):
        r = T.sub(T.matmul(T.tensor(A), v), T.tensor(b))
        return T.scale(T.sumsq(r), 0.5)

    xt = T.tensor(x0, track_grad=True)
    g = T.backward(loss(xt))[xt].data
    fd = np.zeros(3)
    h = 1e-5
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd[i] = (loss(T.tensor(x0 + e)).item() - loss(T.tensor(x0 - e)).item()) / (2 * h)
    return np.max(np.abs(g - fd)) < 1e-5 * max(1.0, np.max(np.abs(fd)))


def _svd_reconstruction():
    rng = np.random.default_rng(2)
    M = rng.normal(size=(5, 3))
    res = svd(M)
    return np.linalg.norm(res.reconstruct() - M) <= 1e-10 * np.linalg.norm(M)


def _srebro_energy():
    rng = np.random.default_rng(3)
    M = rng.normal(size=(6, 4))
    U, V = srebro_factorize(M)
    energy = 0.5 * (frobenius_sq(U) + frobenius_sq(V))
    return abs(energy - nuclear_norm(M)) < 1e-8


def _svt_beats_random():
    rng = np.random.default_rng(4)
    Y = rng.normal(size=(5, 4))
    tau = 0.5
    A = svt(Y, tau)
    obj = 0.5 * np.sum((A - Y) ** 2) + tau * nuclear_norm(A)
    for _ in range(200):
        C = A + rng.normal(0.0, 0.3, size=A.shape)
        if 0.5 * np.sum((C - Y) ** 2) + tau * nuclear_norm(C) < obj - 1e-9:
            return False
    return True


def _shrinker_subgradient():
    rng = np.random.default_rng(5)
    Y = rng.normal(size=(6, 20))
    eta = 0.05
    res = optimal_shrink(Y, eta)
    return check_subgradient_optimality(res.A_star, Y, eta).satisfied()


def _estimator_linear():
    rng = np.random.default_rng(6)
    A = rng.normal(size=(4, 4))
    est = frob_norm_estimate(lambda t: T.matmul(t, T.tensor(A.T)),
                             np.zeros(4), sigma=0.5, K=4000,
                             rng=stream(6, "probes"))
    return abs(est - frobenius_sq(A)) < 0.2 * frobenius_sq(A)


def _penalties_consistent():
    spec = ModelSpec(n_in=3, n_out=3, inner_dim=4, hidden=8, depth=2)
    model = init_composite(spec, seed=7)
    x = np.array([0.3, -0.1, 0.5])
    nuc = float(exact_nuclear_penalty(model, x).data)
    split = float(frobenius_split_penalty(model, x, 1.0).data)
    hutch = float(hutchinson_regularizer(model, x, sigma=1e-3, K=2000,
                                         rng=stream(7, "probes")).data)
    return nuc <= split + 1e-10 and abs(hutch - split) < 0.15 * max(split, 1e-9)


CHECKS = [
    ("gradients match finite differences", _gradcheck),
    ("svd reconstruction", _svd_reconstruction),
    ("factorization energy equals nuclear norm", _srebro_energy),
    ("soft-thresholding beats random candidates", _svt_beats_random),
    ("shrinker satisfies subgradient condition", _shrinker_subgradient),
    ("probe estimator unbiased on linear map", _estimator_linear),
    ("penalty ordering and probe consistency", _penalties_consistent),
]


def run_selftest():
    all_ok = True
    width = max(len(name) for name, _ in CHECKS)
    for name, fn in CHECKS:
        try:
            ok = bool(fn())
        except Exception as ex:  # surfaced in the table, not swallowed silently
            ok = False
            name = f"{name} ({type(ex).__name__}: {ex})"
        all_ok &= ok
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}")
    print("selftest:", "PASS" if all_ok else "FAIL")
    return all_ok
