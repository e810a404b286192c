"""Regression to the unit-ball indicator with a Jacobian norm penalty.

The closed-form solution is a rescaled indicator, which makes this the
one experiment where trained models can be scored against an exact
reference field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import tensor as T
from ..models import ModelSpec, init_composite
from ..regularizers import (frobenius_split_penalty, gradient_norm_penalty,
                            hutchinson_regularizer)
from ..rng import stream
from ..training import DataSource, TrainConfig, WarmupSpec, rof_loss, train
from .report import ExperimentReport, LabeledArray

__all__ = ["RofProblem", "rof_exact_solution", "run_rof", "VARIANTS",
           "default_rof_config"]

VARIANTS = ("exact_penalty", "split_penalty", "hutchinson")

DEFAULT_BOX = {2: 10.0, 5: 2.0}


@dataclass
class RofProblem:
    n: int
    eta: float
    box: float = 0.0  # half-width of the sampling box; 0 picks the default

    def __post_init__(self):
        if self.box <= 0:
            if self.n not in DEFAULT_BOX:
                raise ValueError(f"no default box for n={self.n}")
            self.box = DEFAULT_BOX[self.n]
        if not 0 <= self.eta < 1.0 / self.n:
            raise ValueError(
                f"eta must lie in [0, 1/n) so the plateau 1 - n*eta stays "
                f"positive; got eta={self.eta}, n={self.n}"
            )

    def target(self, x):
        """Indicator of the closed unit ball."""
        x = np.atleast_2d(np.asarray(x, float))
        return (np.linalg.norm(x, axis=-1) <= 1.0).astype(float)


def rof_exact_solution(x, n, eta):
    """(1 - n*eta) inside the closed unit ball, 0 outside."""
    x = np.asarray(x, float)
    r = np.linalg.norm(np.atleast_2d(x), axis=-1)
    out = np.where(r <= 1.0, 1.0 - n * eta, 0.0)
    return float(out[0]) if x.ndim == 1 else out


def default_rof_config(problem: RofProblem, seed=0, iterations=20_000,
                       batch_size=2048):
    """Desk-scale training budget with the staircase eta warmup scaled
    to fit inside it."""
    warmup = None
    if problem.eta > 0:
        inc = 0.05 if problem.n == 2 else 0.01
        start = min(inc, problem.eta)
        steps = int(np.ceil(max(problem.eta - start, 0.0) / inc))
        period = max(1, iterations // (2 * max(steps, 1)))
        if steps > 0:
            warmup = WarmupSpec(start=start, increment=inc, period=period)
    return TrainConfig(
        learning_rate=1e-3,
        iterations=iterations,
        batch_size=batch_size,
        seed=seed,
        eta=problem.eta,
        warmup=warmup,
        eval_every=max(1, iterations // 20),
    )


def _make_model(problem: RofProblem, seed):
    spec = ModelSpec(n_in=problem.n, n_out=1, inner_dim=32, hidden=64,
                     depth=2, fourier_k=32,
                     fourier_scale=0.15 / problem.box * 10.0)
    return init_composite(spec, seed)


def _make_step_fn(problem, variant, hutch_sigma, hutch_samples):
    def step_fn(model, batch, eta, rng_probes):
        data_term = rof_loss(model, batch, problem.target)
        if eta == 0.0 or variant is None:
            pen_val = 0.0
            loss = data_term
            return loss, float(data_term.data), pen_val
        if variant == "exact_penalty":
            pen = gradient_norm_penalty(model, batch)
        elif variant == "split_penalty":
            pen = T.scale(frobenius_split_penalty(model, batch, 1.0), 1.0)
        else:
            pen = hutchinson_regularizer(model, batch, hutch_sigma,
                                         hutch_samples, rng_probes)
        loss = T.add(data_term, T.scale(pen, eta))
        return loss, float(data_term.data), float(pen.data)

    return step_fn


def run_rof(problem: RofProblem, variant, config: TrainConfig = None,
            out_dir=None, hutch_sigma=0.05, hutch_samples=4,
            heatmap_res=128, n_test_points=10_000):
    """Train one variant and score it against the exact solution."""
    if variant not in VARIANTS and variant is not None:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if problem.n not in (2, 5):
        raise ValueError("supported input dimensions are 2 and 5")
    if config is None:
        config = default_rof_config(problem)

    seed = config.seed
    model = _make_model(problem, seed)
    bounds = np.tile([-problem.box, problem.box], (problem.n, 1))
    data = DataSource(kind="uniform_box", bounds=bounds)

    rng_eval = stream(seed, "eval")
    test_points = rng_eval.uniform(-problem.box, problem.box,
                                   size=(n_test_points, problem.n))
    exact_vals = rof_exact_solution(test_points, problem.n, problem.eta)

    def mae_fn(m):
        with T.no_grad():
            pred = m(T.Tensor(test_points)).data.reshape(-1)
        return float(np.mean(np.abs(pred - exact_vals)))

    step_fn = _make_step_fn(problem, variant, hutch_sigma, hutch_samples)
    model, log = train(step_fn, model, data, config,
                       rng_data=stream(seed, "data"),
                       rng_probes=stream(seed, "probes"),
                       mae_fn=mae_fn)

    with T.no_grad():
        pred = model(T.Tensor(test_points)).data.reshape(-1)

    # score both variants with the same functional: exact data term plus
    # eta times the mean input-gradient norm, on the held-out points
    data_eval = 0.0
    pen_eval = 0.0
    for lo in range(0, n_test_points, 2048):
        chunk = test_points[lo:lo + 2048]
        data_eval += rof_loss(model, chunk, problem.target).item() * len(chunk)
        pen_eval += gradient_norm_penalty(model, chunk).item() * len(chunk)
    data_eval /= n_test_points
    pen_eval /= n_test_points

    radii = np.linalg.norm(test_points, axis=-1)
    inside = radii <= 0.75
    far = radii >= 1.5
    tail = max(1, config.iterations // 20)
    objectives = log.column("objective")

    summary = {
        "variant": variant,
        "n": problem.n,
        "eta": problem.eta,
        "final_objective": float(np.mean(objectives[-tail:])) if len(objectives) else None,
        "final_objective_eval": float(data_eval + problem.eta * pen_eval),
        "final_penalty_eval": float(pen_eval),
        "final_mae": float(np.mean(np.abs(pred - exact_vals))),
        "plateau_mean": float(np.mean(pred[inside])) if inside.any() else None,
        "plateau_target": 1.0 - problem.n * problem.eta,
        "outside_max_abs": float(np.max(np.abs(pred[far]))) if far.any() else None,
        "seed": seed,
    }

    arrays = {}
    if problem.n == 2:
        axis = np.linspace(-problem.box, problem.box, heatmap_res)
        gx, gy = np.meshgrid(axis, axis, indexing="ij")
        grid = np.stack([gx.reshape(-1), gy.reshape(-1)], axis=-1)
        with T.no_grad():
            zgrid = model(T.Tensor(grid)).data.reshape(heatmap_res, heatmap_res)
        egrid = rof_exact_solution(grid, problem.n, problem.eta).reshape(
            heatmap_res, heatmap_res)
        arrays["heatmap_model"] = LabeledArray(zgrid, "x", "y", axis, axis)
        arrays["heatmap_exact"] = LabeledArray(egrid, "x", "y", axis, axis)

    report = ExperimentReport(
        config={
            "experiment": "rof", "variant": variant, "n": problem.n,
            "eta": problem.eta, "box": problem.box, "seed": seed,
            "iterations": config.iterations, "batch_size": config.batch_size,
            "learning_rate": config.learning_rate,
            "hutch_sigma": hutch_sigma, "hutch_samples": hutch_samples,
        },
        summary=summary, metrics=log, arrays=arrays)
    if out_dir is not None:
        report.save(out_dir)
    return report, model
