"""Dense SVD and nuclear-norm machinery.

The SVD is a one-sided Jacobi iteration: accurate at the matrix sizes
used here (<= 512 per side) and simple enough to keep bit-level control
over ordering and tie-breaking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SvdResult",
    "ShrinkagePolicy",
    "ShrinkageResult",
    "SubgradientReport",
    "SvdConvergenceError",
    "svd",
    "nuclear_norm",
    "frobenius_sq",
    "srebro_factorize",
    "svt",
    "optimal_shrink",
    "check_subgradient_optimality",
]

MAX_SWEEPS = 100
OFFDIAG_TOL = 1e-12
RANK_TOL = 1e-12


class SvdConvergenceError(RuntimeError):
    def __init__(self, residual):
        super().__init__(
            f"one-sided Jacobi SVD failed to converge in {MAX_SWEEPS} sweeps "
            f"(off-diagonal residual {residual:.3e})"
        )
        self.residual = residual


@dataclass
class SvdResult:
    """Thin SVD: A = U @ diag(sigma) @ V.T with sigma descending."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def reconstruct(self):
        return (self.U * self.sigma) @ self.V.T

    @property
    def rank(self):
        if self.sigma.size == 0 or self.sigma[0] <= 0.0:
            return 0
        return int(np.sum(self.sigma > RANK_TOL * self.sigma[0]))


@dataclass
class ShrinkagePolicy:
    """Which singular-value shrinkage to apply.

    ``threshold`` is tau for ``soft_threshold`` and N*eta for
    ``optimal_gamma``.
    """

    kind: str
    threshold: float

    def __post_init__(self):
        if self.kind not in ("soft_threshold", "optimal_gamma"):
            raise ValueError(f"unknown shrinkage kind {self.kind!r}")
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")


def _jacobi_orthogonalize(W, V):
    """Rotate column pairs of W (and accumulate in V) until the columns
    of W are mutually orthogonal."""
    n = W.shape[1]
    residual = 0.0
    for _ in range(MAX_SWEEPS):
        residual = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = W[:, p] @ W[:, p]
                beta = W[:, q] @ W[:, q]
                gamma = W[:, p] @ W[:, q]
                denom = np.sqrt(alpha * beta)
                if denom > 0.0:
                    residual = max(residual, abs(gamma) / denom)
                if gamma == 0.0 or denom == 0.0:
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.sign(zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                if zeta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                wp = W[:, p].copy()
                W[:, p] = c * wp - s * W[:, q]
                W[:, q] = s * wp + c * W[:, q]
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
        if residual < OFFDIAG_TOL:
            return
    raise SvdConvergenceError(residual)


def _complete_column(U, used_cols, m):
    """Deterministic orthonormal completion for a zero singular value."""
    for k in range(m):
        cand = np.zeros(m)
        cand[k] = 1.0
        for j in used_cols:
            cand -= (U[:, j] @ cand) * U[:, j]
        norm = np.linalg.norm(cand)
        if norm > 0.5:
            return cand / norm
    raise RuntimeError("failed to complete orthonormal basis")


def svd(A):
    """Thin SVD via one-sided Jacobi.

    Singular values are non-increasing; ties keep the original column
    order (stable sort).
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"svd expects a matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("svd requires finite entries")
    m, n = A.shape
    if m < n:
        res = svd(A.T)
        return SvdResult(U=res.V, sigma=res.sigma, V=res.U)

    W = A.copy()
    V = np.eye(n)
    _jacobi_orthogonalize(W, V)

    sigma = np.linalg.norm(W, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    W = W[:, order]
    V = V[:, order]

    U = np.zeros((m, n))
    cutoff = RANK_TOL * sigma[0] if n > 0 and sigma[0] > 0 else 0.0
    used = []
    for j in range(n):
        if sigma[j] > cutoff and sigma[j] > 0.0:
            U[:, j] = W[:, j] / sigma[j]
        else:
            U[:, j] = _complete_column(U, used, m)
        used.append(j)
    return SvdResult(U=U, sigma=sigma, V=V)


def nuclear_norm(A):
    """Sum of singular values."""
    return float(np.sum(svd(A).sigma))


def frobenius_sq(A):
    """Sum of squared entries (equals the sum of squared singular values)."""
    A = np.asarray(A, dtype=np.float64)
    return float(np.sum(A * A))


def srebro_factorize(A):
    """Factor A = U' V'.T with (||U'||_F^2 + ||V'||_F^2) / 2 = ||A||_*.

    Construction: thin SVD A = U S V.T, then U' = U sqrt(S), V' = V sqrt(S).
    """
    res = svd(A)
    root = np.sqrt(res.sigma)
    return res.U * root, res.V * root


def svt(Y, tau):
    """Singular value soft-thresholding: sigma -> max(sigma - tau, 0).

    Closed-form minimizer of 0.5 * ||A - Y||_F^2 + tau * ||A||_*.
    """
    if tau < 0:
        raise ValueError("threshold tau must be >= 0")
    res = svd(Y)
    shrunk = np.maximum(res.sigma - tau, 0.0)
    return (res.U * shrunk) @ res.V.T


@dataclass
class ShrinkageResult:
    A_star: np.ndarray
    denoised: np.ndarray
    gamma: np.ndarray
    shrunk_sigma: np.ndarray
    svd_y: SvdResult


def optimal_shrink(Y, eta):
    """Optimal linear self-denoiser A* = U Gamma U.T for the problem
    min_A ||AY - Y||_F^2 / (2N) + eta * ||A||_*.

    Gamma_d = 1 - N*eta / sigma_d^2 when sigma_d^2 >= N*eta, else 0, so
    the shrunk singular values of A* Y are (sigma_d^2 - N*eta) / sigma_d
    above the cutoff and 0 below.
    """
    if eta < 0:
        raise ValueError("eta must be >= 0")
    Y = np.asarray(Y, dtype=np.float64)
    N = Y.shape[1]
    res = svd(Y)
    cutoff = N * eta
    gamma = np.zeros_like(res.sigma)
    shrunk = np.zeros_like(res.sigma)
    for d, s in enumerate(res.sigma):
        if s > 0.0 and s * s >= cutoff:
            gamma[d] = 1.0 - cutoff / (s * s)
            shrunk[d] = (s * s - cutoff) / s
    A_star = (res.U * gamma) @ res.U.T
    denoised = (res.U * shrunk) @ res.V.T
    return ShrinkageResult(A_star=A_star, denoised=denoised, gamma=gamma,
                           shrunk_sigma=shrunk, svd_y=res)


@dataclass
class SubgradientReport:
    """Residuals of the first-order optimality condition
    (Y - A*Y) Y.T / (N eta) in the nuclear-norm subdifferential at A*."""

    ut_w: float
    w_v: float
    sigma_excess: float

    def satisfied(self, tol=1e-8):
        return self.ut_w <= tol and self.w_v <= tol and self.sigma_excess <= tol


def check_subgradient_optimality(A_star, Y, eta):
    """Decompose (Y - A*Y) Y.T / (N eta) as U_A V_A.T + W and report
    ||U_A.T W||_F, ||W V_A||_F and sigma_max(W) - 1."""
    if eta <= 0:
        raise ValueError("eta must be > 0 for the subgradient check")
    A_star = np.asarray(A_star, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    N = Y.shape[1]
    G = (Y - A_star @ Y) @ Y.T / (N * eta)

    res = svd(A_star)
    r = res.rank
    UA = res.U[:, :r]
    VA = res.V[:, :r]
    W = G - UA @ VA.T
    ut_w = float(np.linalg.norm(UA.T @ W)) if r else 0.0
    w_v = float(np.linalg.norm(W @ VA)) if r else 0.0
    smax = float(svd(W).sigma[0]) if W.size else 0.0
    return SubgradientReport(ut_w=ut_w, w_v=w_v, sigma_excess=smax - 1.0)
