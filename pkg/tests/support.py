"""Shared helpers for the test suite."""

import numpy as np

from jacreg import tensor as T
from jacreg.models import ModelSpec
from jacreg.rng import stream


class LinearComposite:
    """g(z) = z B^T after h(x) = x A^T; Jacobians are the matrices."""

    def __init__(self, A, B):
        self.A = np.asarray(A, float)
        self.B = np.asarray(B, float)
        self.spec = ModelSpec(n_in=self.A.shape[1], n_out=self.B.shape[0],
                              inner_dim=self.A.shape[0])
        self.At = T.tensor(self.A.T, track_grad=True)
        self.Bt = T.tensor(self.B.T, track_grad=True)

    @property
    def inner_dim(self):
        return self.A.shape[0]

    @property
    def params(self):
        return [self.At, self.Bt]

    def forward_h(self, x):
        return T.matmul(x if isinstance(x, T.Tensor) else T.tensor(x), self.At)

    def forward_g(self, z):
        return T.matmul(z, self.Bt)

    def __call__(self, x):
        return self.forward_g(self.forward_h(x))


def estimator_bias_curve(model, x, sigmas, K, seed):
    """Taylor bias of the probe estimator at each sigma.

    Uses antithetic probe pairs and the exact directional values ||J u||^2
    on the same draws as a control variate, so the Monte Carlo noise of the
    leading term cancels and the O(sigma^2) bias is measurable at feasible K.
    Returns (biases, standard errors) aligned with ``sigmas``.
    """
    x = np.asarray(x, float)
    J = T.jacobian(model, T.Tensor(x)).data
    rng = stream(seed, "probes")
    U = rng.normal(size=(K, x.size))
    biases, stderrs = [], []
    with T.no_grad():
        fx = model(T.Tensor(x)).data
        JU = U @ J.T
        exact_k = np.sum(JU * JU, axis=-1)
        for s in sigmas:
            fp = model(T.Tensor(x[None, :] + s * U)).data
            fm = model(T.Tensor(x[None, :] - s * U)).data
            est_k = 0.5 * (np.sum((fp - fx) ** 2, axis=-1)
                           + np.sum((fm - fx) ** 2, axis=-1)) / (s * s)
            b = est_k - exact_k
            biases.append(abs(float(np.mean(b))))
            stderrs.append(float(np.std(b, ddof=1) / np.sqrt(K)))
    return np.array(biases), np.array(stderrs)
