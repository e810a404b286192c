"""The three Jacobian penalties: exact nuclear norm, the Frobenius
split over a composite model, and the probe-based estimator that needs
only extra function evaluations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .linalg import svd

__all__ = [
    "RegularizerSpec",
    "JACOBIAN_SIZE_GUARD",
    "exact_nuclear_penalty",
    "gradient_norm_penalty",
    "frobenius_split_penalty",
    "hutchinson_regularizer",
    "frob_norm_estimate",
    "frob_norm_samples",
]

JACOBIAN_SIZE_GUARD = 4096

_KINDS = ("exact_nuclear", "frobenius_split", "hutchinson")


@dataclass
class RegularizerSpec:
    """Which penalty to apply and its knobs.

    ``sigma`` (probe noise std) and ``samples`` (draws per evaluation)
    only matter for the hutchinson kind.  ``shared_probes`` reuses one
    draw for both composite terms when the dimensions allow it.
    """

    kind: str
    eta: float
    sigma: float = 0.05
    samples: int = 1
    shared_probes: bool = True

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown regularizer kind {self.kind!r}")
        if not np.isfinite(self.eta) or self.eta < 0:
            raise ValueError("eta must be finite and >= 0")
        if self.kind == "hutchinson":
            if not (np.isfinite(self.sigma) and self.sigma > 0):
                raise ValueError("sigma must be finite and > 0")
            if self.samples < 1:
                raise ValueError("samples must be >= 1")


def _guard(n, m):
    if n * m > JACOBIAN_SIZE_GUARD:
        raise ValueError(
            f"explicit Jacobian of size {m}x{n} exceeds the {JACOBIAN_SIZE_GUARD} "
            "entry guard; use the hutchinson regularizer instead"
        )


def _jacobian_rows(model, x):
    """Per-output gradient rows of f at a single input, kept on the tape."""
    xt = T.Tensor(np.asarray(x, float), track_grad=True)
    y = model(xt)
    m = int(np.atleast_1d(y.data).size)
    _guard(xt.size, m)
    yflat = T.reshape(y, (-1,))
    rows = [T.grad(T.take(yflat, i), xt, create_graph=True) for i in range(m)]
    return rows


def exact_nuclear_penalty(model, x):
    """||Jf[x]||_* with a parameter subgradient.

    The subgradient is obtained by holding U V^T from the SVD of the
    Jacobian value fixed and differentiating <U V^T, Jf[x]>.
    """
    rows = _jacobian_rows(model, x)
    J = np.stack([r.data.reshape(-1) for r in rows])
    res = svd(J)
    r = res.rank
    D = res.U[:, :r] @ res.V[:, :r].T if r else np.zeros_like(J)
    pen = T.Tensor(np.zeros(()))
    for i, row in enumerate(rows):
        pen = T.add(pen, T.tsum(T.mul(T.Tensor(D[i]), T.reshape(row, (-1,)))))
    return pen


def gradient_norm_penalty(model, xb, floor=1e-12):
    """Batch mean of ||grad_x f(x_i)||_2 for scalar-output models.

    For m = 1 the Jacobian is a row vector and its nuclear norm is the
    Euclidean norm of the input gradient; the subgradient uses the
    normalized gradient held constant (zero below ``floor``).
    """
    xt = T.Tensor(np.asarray(xb, float), track_grad=True)
    y = model(xt)
    if np.atleast_2d(y.data).shape[-1] != 1:
        raise ValueError("gradient_norm_penalty requires a scalar-output model")
    g = T.grad(T.tsum(y), xt, create_graph=True)
    norms = np.linalg.norm(g.data, axis=-1, keepdims=True)
    direction = np.where(norms > floor, g.data / np.maximum(norms, floor), 0.0)
    per_sample = T.tsum(T.mul(T.Tensor(direction), g), axis=-1)
    batch = xt.data.shape[0] if xt.data.ndim == 2 else 1
    return T.scale(T.tsum(per_sample), 1.0 / batch)


def frobenius_split_penalty(model, xb, eta):
    """(eta/2) * batch mean of ||Jg[h(x)]||_F^2 + ||Jh[x]||_F^2.

    Exact Jacobians via one VJP per output coordinate; the result stays
    differentiable w.r.t. the model parameters through the nested tape.
    """
    xb = np.asarray(xb, float)
    single = xb.ndim == 1
    batch = 1 if single else xb.shape[0]
    n = xb.shape[-1]
    d = model.inner_dim
    m = model.spec.n_out
    _guard(n, d)
    _guard(d, m)

    xt = T.Tensor(xb, track_grad=True)
    z = model.forward_h(xt)
    y = model.forward_g(z)

    total = T.Tensor(np.zeros(()))
    z2 = z if not single else T.reshape(z, (1, -1))
    y2 = y if not single else T.reshape(y, (1, -1))
    for i in range(m):
        gi = T.grad(T.tsum(T.slice_last(y2, i, i + 1)), z, create_graph=True)
        total = T.add(total, T.sumsq(gi))
    for j in range(d):
        gj = T.grad(T.tsum(T.slice_last(z2, j, j + 1)), xt, create_graph=True)
        total = T.add(total, T.sumsq(gj))
    return T.scale(total, 0.5 * eta / batch)


def hutchinson_regularizer(model, xb, sigma, K, rng, shared_probes=True):
    """Probe estimate of (1/2) * (||Jg[h(x)]||_F^2 + ||Jh[x]||_F^2).

    Mean over K Gaussian draws eps ~ N(0, sigma^2 I) of
    (||g(h(x)+eps) - g(h(x))||^2 + ||h(x+eps) - h(x)||^2) / (2 sigma^2),
    averaged over the batch.  One draw is reused for both terms when
    ``shared_probes`` and the inner dimension equals the input
    dimension; otherwise the terms consume independent draws from the
    same stream.
    """
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    if K < 1:
        raise ValueError("K must be >= 1")
    xb = np.asarray(xb, float)
    single = xb.ndim == 1
    batch = 1 if single else xb.shape[0]
    n = xb.shape[-1]
    d = model.inner_dim

    x2 = xb.reshape(batch, n)
    x0 = T.Tensor(x2)
    hx = model.forward_h(x0)
    ghx = model.forward_g(hx)

    # all K draws evaluated in one stacked forward pass
    eps_h = rng.normal(0.0, sigma, size=(K, batch, n))
    if shared_probes and n == d and K == 1:
        eps_g = eps_h
    else:
        eps_g = rng.normal(0.0, sigma, size=(K, batch, d))

    h_pert = model.forward_h(T.Tensor((x2[None] + eps_h).reshape(K * batch, n)))
    h_diff = T.sub(T.reshape(h_pert, (K, batch, d)), hx)

    z_pert = T.reshape(T.add(T.reshape(hx, (1, batch, d)), T.Tensor(eps_g)),
                       (K * batch, d))
    g_pert = model.forward_g(z_pert)
    m = ghx.data.shape[-1]
    g_diff = T.sub(T.reshape(g_pert, (K, batch, m)), ghx)

    acc = T.add(T.sumsq(g_diff), T.sumsq(h_diff))
    return T.scale(acc, 1.0 / (2.0 * sigma * sigma * K * batch))


def frob_norm_samples(f, x, sigma, K, rng):
    """Per-draw values of ||f(x+eps) - f(x)||^2 / sigma^2 (batched draws)."""
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    x = np.asarray(x, float)
    with T.no_grad():
        eps = rng.normal(0.0, sigma, size=(K,) + x.shape)
        fx = np.atleast_1d(f(T.Tensor(x)).data)
        fpert = f(T.Tensor(x[None, :] + eps)).data
        diffs = fpert - fx[None, :]
    return np.sum(diffs * diffs, axis=-1) / (sigma * sigma)


def frob_norm_estimate(f, x, sigma, K, rng):
    """Monte Carlo estimate of ||Jf[x]||_F^2 from function evaluations."""
    return float(np.mean(frob_norm_samples(f, x, sigma, K, rng)))
