"""Jacobian singular-spectrum analysis at a point: normalized spectrum
plus the leading left-singular directions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import tensor as T
from ..linalg import svd
from ..regularizers import JACOBIAN_SIZE_GUARD

__all__ = ["SpectrumResult", "spectrum_analysis"]


@dataclass
class SpectrumResult:
    normalized_sigma: np.ndarray  # descending, in [0, 1]; sigma / sigma_1
    directions: np.ndarray        # (m, k) orthonormal left-singular vectors
    sigma: np.ndarray             # raw singular values
    zero_jacobian: bool

    @property
    def nuclear_ratio(self):
        """Sum of normalized singular values (nuclear norm / sigma_1)."""
        return float(np.sum(self.normalized_sigma))


def spectrum_analysis(model, x, top_k):
    x = np.asarray(x, float)
    J = T.jacobian(model, T.Tensor(x)).data
    if J.size > JACOBIAN_SIZE_GUARD:
        raise ValueError("Jacobian exceeds the explicit size guard")
    res = svd(J)
    k = min(top_k, res.sigma.size)
    if res.sigma[0] <= 0.0:
        return SpectrumResult(
            normalized_sigma=np.zeros(res.sigma.size),
            directions=res.U[:, :k], sigma=res.sigma, zero_jacobian=True)
    return SpectrumResult(
        normalized_sigma=res.sigma / res.sigma[0],
        directions=res.U[:, :k], sigma=res.sigma, zero_jacobian=False)
