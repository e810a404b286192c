"""Training loop: AdamW, penalty-weight warmup, data sources, metrics.

The loop is deliberately plain: sample a batch, build the loss (mean
data term plus eta times the penalty), run one reverse sweep, apply one
decoupled-weight-decay Adam step, and log.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import tensor as T
from .regularizers import RegularizerSpec

__all__ = [
    "WarmupSpec",
    "TrainConfig",
    "DataSource",
    "MetricsLog",
    "TrainingDivergedError",
    "AdamW",
    "adamw_step",
    "eta_schedule",
    "train",
    "rof_loss",
    "denoise_loss",
    "supervised_mse",
    "n2n_loss",
]


class TrainingDivergedError(RuntimeError):
    def __init__(self, iteration):
        super().__init__(f"loss became non-finite at iteration {iteration}")
        self.iteration = iteration


@dataclass
class WarmupSpec:
    """Staircase schedule: start at ``start`` and add ``increment``
    every ``period`` iterations until the target is reached."""

    start: float
    increment: float
    period: int

    def __post_init__(self):
        if self.start < 0 or self.increment <= 0 or self.period <= 0:
            raise ValueError("warmup fields must be positive")


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    iterations: int = 1000
    batch_size: int = 128
    seed: int = 0
    eta: float = 0.0
    warmup: Optional[WarmupSpec] = None
    regularizer: Optional[RegularizerSpec] = None
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 1e-2
    eval_every: int = 0  # 0 disables periodic reference evaluation

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size <= 0 or self.iterations < 0:
            raise ValueError("learning_rate, batch_size must be positive")
        if self.warmup is not None and self.iterations > 0:
            steps = int(np.ceil(max(self.eta - self.warmup.start, 0.0)
                                / self.warmup.increment))
            if steps * self.warmup.period >= self.iterations:
                raise ValueError(
                    "warmup does not reach the target eta within the "
                    f"iteration budget ({steps} steps of {self.warmup.period})"
                )


@dataclass
class DataSource:
    """Seeded sampler for the experiment inputs.

    kinds:
      uniform_box      -- bounds: (n, 2) array of per-dimension [low, high]
      empirical        -- matrix: (N, n) rows sampled with replacement
      noisy_manifold   -- clean_sampler(count, rng) -> (count, n) plus
                          additive N(0, sigma_eps^2) noise
    """

    kind: str
    bounds: Optional[np.ndarray] = None
    matrix: Optional[np.ndarray] = None
    clean_sampler: Optional[Callable] = None
    sigma_eps: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform_box", "empirical", "noisy_manifold"):
            raise ValueError(f"unknown data source kind {self.kind!r}")

    def sample(self, count, rng):
        if self.kind == "uniform_box":
            b = np.asarray(self.bounds, float)
            return rng.uniform(b[:, 0], b[:, 1], size=(count, b.shape[0]))
        if self.kind == "empirical":
            idx = rng.integers(0, self.matrix.shape[0], size=count)
            return self.matrix[idx]
        clean = self.clean_sampler(count, rng)
        return clean + self.sigma_eps * rng.standard_normal(clean.shape)

    def sample_clean_noisy(self, count, rng, copies=1):
        """Clean points plus ``copies`` independent noisy versions."""
        if self.kind != "noisy_manifold":
            raise ValueError("clean/noisy sampling needs a noisy_manifold source")
        clean = self.clean_sampler(count, rng)
        noisy = [clean + self.sigma_eps * rng.standard_normal(clean.shape)
                 for _ in range(copies)]
        return (clean, *noisy)


@dataclass
class MetricsLog:
    rows: list = field(default_factory=list)

    COLUMNS = ("iteration", "objective", "data_term", "penalty_term", "eta", "mae")

    def log(self, iteration, objective, data_term, penalty_term, eta, mae=None):
        if self.rows and iteration <= self.rows[-1][0]:
            raise ValueError("iteration indices must be strictly increasing")
        self.rows.append((iteration, objective, data_term, penalty_term, eta, mae))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.COLUMNS)
            for it, obj, dt, pt, eta, mae in self.rows:
                w.writerow([it, repr(obj), repr(dt), repr(pt), repr(eta),
                            "" if mae is None else repr(mae)])

    def column(self, name):
        i = self.COLUMNS.index(name)
        return np.array([r[i] for r in self.rows if r[i] is not None], float)


def adamw_step(param, grad, state, lr, betas=(0.9, 0.999), eps=1e-8,
               weight_decay=0.0):
    """One AdamW update on a raw array; mutates ``param`` and ``state``.

    Decoupled decay shrinks the parameter before the Adam step; moments
    use standard bias correction.
    """
    b1, b2 = betas
    state["t"] += 1
    t = state["t"]
    if weight_decay:
        param *= 1.0 - lr * weight_decay
    state["m"] = b1 * state["m"] + (1.0 - b1) * grad
    state["v"] = b2 * state["v"] + (1.0 - b2) * grad * grad
    mhat = state["m"] / (1.0 - b1 ** t)
    vhat = state["v"] / (1.0 - b2 ** t)
    param -= lr * mhat / (np.sqrt(vhat) + eps)
    return param, state


class AdamW:
    def __init__(self, params, lr, betas=(0.9, 0.999), eps=1e-8, weight_decay=1e-2):
        self.params = list(params)
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.state = [{"m": np.zeros_like(p.data), "v": np.zeros_like(p.data), "t": 0}
                      for p in self.params]

    def step(self, grads):
        """``grads``: dict mapping param tensors to gradient tensors."""
        for p, st in zip(self.params, self.state):
            g = grads.get(p)
            if g is None:
                continue
            adamw_step(p.data, g.data, st, self.lr, self.betas, self.eps,
                       self.weight_decay)


def eta_schedule(config: TrainConfig, iteration):
    """Current penalty weight under the staircase warmup."""
    if config.warmup is None:
        return config.eta
    w = config.warmup
    eta = w.start + w.increment * (iteration // w.period)
    return min(eta, config.eta)


def train(step_fn, model, data: DataSource, config: TrainConfig,
          rng_data, rng_probes, mae_fn=None):
    """Generic loop.  ``step_fn(model, batch, eta, rng_probes)`` returns
    (loss tensor, data-term value, penalty value)."""
    opt = AdamW(model.params, lr=config.learning_rate, betas=config.betas,
                eps=config.eps, weight_decay=config.weight_decay)
    log = MetricsLog()
    for it in range(config.iterations):
        eta = eta_schedule(config, it)
        batch = data.sample(config.batch_size, rng_data)
        loss, data_val, pen_val = step_fn(model, batch, eta, rng_probes)
        obj = float(loss.data)
        if not np.isfinite(obj):
            raise TrainingDivergedError(it)
        grads = T.backward(loss)
        opt.step(grads)
        mae = None
        if mae_fn is not None and config.eval_every and (
                (it + 1) % config.eval_every == 0 or it == config.iterations - 1):
            mae = float(mae_fn(model))
        log.log(it, obj, data_val, pen_val, eta, mae)
    return model, log


# ---------------------------------------------------------------------------
# data terms


def _half_mean_sq(resid, batch):
    return T.scale(T.sumsq(resid), 0.5 / batch)


def rof_loss(model, xb, target_fn):
    """Mean of 0.5 * (f(x) - tau(x))^2 over the batch."""
    xb = np.asarray(xb, float)
    tau = np.asarray(target_fn(xb), float).reshape(-1, 1)
    y = model(T.Tensor(xb))
    return _half_mean_sq(T.sub(y, T.Tensor(tau)), xb.shape[0])


def denoise_loss(model, yb):
    """Self-reconstruction term 0.5 * ||f(y) - y||^2, batch mean."""
    yb = np.asarray(yb, float)
    out = model(T.Tensor(yb))
    return _half_mean_sq(T.sub(out, T.Tensor(yb)), yb.shape[0])


def supervised_mse(model, noisy, clean):
    """0.5 * ||f(x + noise) - x||^2 on clean/noisy pairs, batch mean."""
    noisy = np.asarray(noisy, float)
    out = model(T.Tensor(noisy))
    return _half_mean_sq(T.sub(out, T.Tensor(np.asarray(clean, float))), noisy.shape[0])


def n2n_loss(model, noisy_a, noisy_b):
    """Map one noisy copy to an independent noisy copy of the same point."""
    noisy_a = np.asarray(noisy_a, float)
    out = model(T.Tensor(noisy_a))
    return _half_mean_sq(T.sub(out, T.Tensor(np.asarray(noisy_b, float))),
                         noisy_a.shape[0])
