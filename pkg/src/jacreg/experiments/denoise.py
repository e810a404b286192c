"""Synthetic unsupervised denoising on manifold-supported data.

Four denoisers are trained or fit on the same noisy set: the
penalty-trained net (self-reconstruction plus the probe regularizer at
eta equal to the noise level), a supervised net, a Noise2Noise net,
and the closed-form linear shrinker.  Clean test points give exact MSE.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import tensor as T
from ..models import ModelSpec, init_composite
from ..regularizers import hutchinson_regularizer
from ..rng import stream
from ..training import (DataSource, TrainConfig, denoise_loss, n2n_loss,
                        supervised_mse, train)
from .report import ExperimentReport, LabeledArray
from .spectrum import spectrum_analysis

__all__ = ["ManifoldSpec", "run_synthetic_denoise", "default_denoise_config"]


@dataclass
class ManifoldSpec:
    kind: str  # circle | sphere | swiss_roll
    ambient_dim: int
    n_samples: int
    sigma_eps: float
    radius: float = 2.0

    INTRINSIC = {"circle": 1, "sphere": 2, "swiss_roll": 2}
    EMBED = {"circle": 2, "sphere": 3, "swiss_roll": 3}

    def __post_init__(self):
        if self.kind not in self.INTRINSIC:
            raise ValueError(f"unknown manifold kind {self.kind!r}")
        if self.intrinsic_dim >= self.ambient_dim:
            raise ValueError("intrinsic dimension must be below the ambient one")
        if self.ambient_dim > 32:
            raise ValueError("ambient dimension capped at 32")

    @property
    def intrinsic_dim(self):
        return self.INTRINSIC[self.kind]

    def frame(self, seed):
        """Fixed orthonormal embedding of the low-dim chart into R^D."""
        rng = stream(seed, "init")
        raw = rng.normal(size=(self.ambient_dim, self.EMBED[self.kind]))
        q, _ = np.linalg.qr(raw)
        return q

    def chart_sampler(self, seed):
        Q = self.frame(seed)

        def sample(count, rng):
            if self.kind == "circle":
                t = rng.uniform(0.0, 2.0 * np.pi, size=count)
                pts = np.stack([np.cos(t), np.sin(t)], axis=-1) * self.radius
            elif self.kind == "sphere":
                v = rng.standard_normal((count, 3))
                pts = v / np.linalg.norm(v, axis=-1, keepdims=True) * self.radius
            else:
                t = rng.uniform(1.5 * np.pi, 4.5 * np.pi, size=count)
                h = rng.uniform(-1.0, 1.0, size=count)
                pts = np.stack([t * np.cos(t), t * np.sin(t), 6.0 * h],
                               axis=-1) * (self.radius / (4.5 * np.pi))
            return pts @ Q.T

        return sample


def default_denoise_config(seed=0, iterations=4000, batch_size=256, eta=0.0):
    return TrainConfig(learning_rate=1e-3, iterations=iterations,
                       batch_size=batch_size, seed=seed, eta=eta,
                       eval_every=max(1, iterations // 10))


def _make_model(D, seed):
    spec = ModelSpec(n_in=D, n_out=D, inner_dim=16, hidden=64, depth=2)
    return init_composite(spec, seed)


def run_synthetic_denoise(manifold: ManifoldSpec, config: TrainConfig = None,
                          out_dir=None, probe_sigma=0.05, probe_samples=1,
                          n_test=1024, n_spectrum_points=16):
    D = manifold.ambient_dim
    seed = 0 if config is None else config.seed
    if config is None:
        config = default_denoise_config(seed=seed, eta=manifold.sigma_eps)
    eta = config.eta

    sampler = manifold.chart_sampler(seed)
    rng_data = stream(seed, "data")
    train_clean = sampler(manifold.n_samples, rng_data)
    train_noisy = train_clean + manifold.sigma_eps * rng_data.standard_normal(
        train_clean.shape)

    rng_eval = stream(seed, "eval")
    test_clean = sampler(n_test, rng_eval)
    test_noisy = test_clean + manifold.sigma_eps * rng_eval.standard_normal(
        test_clean.shape)

    def test_mse(predict):
        pred = predict(test_noisy)
        return float(np.mean(np.sum((pred - test_clean) ** 2, axis=-1)))

    def net_predict(model):
        def predict(ys):
            with T.no_grad():
                return model(T.Tensor(ys)).data
        return predict

    # ours: trained on the fixed noisy set only
    noisy_source = DataSource(kind="empirical", matrix=train_noisy)

    def ours_step(model, batch, cur_eta, rng_probes):
        data_term = denoise_loss(model, batch)
        if cur_eta > 0:
            pen = hutchinson_regularizer(model, batch, probe_sigma,
                                         probe_samples, rng_probes)
            loss = T.add(data_term, T.scale(pen, cur_eta))
            return loss, float(data_term.data), float(pen.data)
        return data_term, float(data_term.data), 0.0

    ours_cfg = TrainConfig(**{**config.__dict__, "eta": eta})
    ours = _make_model(D, seed)
    ours, ours_log = train(ours_step, ours, noisy_source, ours_cfg,
                           rng_data=stream(seed, "data"),
                           rng_probes=stream(seed, "probes"),
                           mae_fn=lambda m: test_mse(net_predict(m)))

    # supervised and noise2noise: clean points from the same finite
    # training set, with fresh noise each step
    def train_set_sampler(count, rng):
        idx = rng.integers(0, train_clean.shape[0], size=count)
        return train_clean[idx]

    pair_source = DataSource(kind="noisy_manifold",
                             clean_sampler=train_set_sampler,
                             sigma_eps=manifold.sigma_eps)

    def supervised_step(model, batch, cur_eta, rng_probes):
        clean = batch[:, :D]
        noisy = batch[:, D:2 * D]
        loss = supervised_mse(model, noisy, clean)
        return loss, float(loss.data), 0.0

    def n2n_step(model, batch, cur_eta, rng_probes):
        noisy_a = batch[:, D:2 * D]
        noisy_b = batch[:, 2 * D:]
        loss = n2n_loss(model, noisy_a, noisy_b)
        return loss, float(loss.data), 0.0

    class _PairSource(DataSource):
        def sample(self, count, rng):
            clean, a, b = pair_source.sample_clean_noisy(count, rng, copies=2)
            return np.concatenate([clean, a, b], axis=-1)

    pairs = _PairSource(kind="noisy_manifold",
                        clean_sampler=train_set_sampler,
                        sigma_eps=manifold.sigma_eps)
    base_cfg = TrainConfig(**{**config.__dict__, "eta": 0.0})

    supervised = _make_model(D, seed + 1)
    supervised, _ = train(supervised_step, supervised, pairs, base_cfg,
                          rng_data=stream(seed, "data"),
                          rng_probes=stream(seed, "probes"))

    n2n = _make_model(D, seed + 2)
    n2n, _ = train(n2n_step, n2n, pairs, base_cfg,
                   rng_data=stream(seed, "data"),
                   rng_probes=stream(seed, "probes"))

    # linear baseline: closed-form shrinker fit on the noisy training
    # matrix at its own optimal weight (the noise variance)
    from ..linalg import optimal_shrink
    shrink_eta = manifold.sigma_eps ** 2
    shrink = optimal_shrink(train_noisy.T, shrink_eta) if shrink_eta > 0 else None

    def shrink_predict(ys):
        if shrink is None:
            return ys
        return (shrink.A_star @ ys.T).T

    mses = {
        "ours": test_mse(net_predict(ours)),
        "supervised": test_mse(net_predict(supervised)),
        "n2n": test_mse(net_predict(n2n)),
        "shrink": test_mse(shrink_predict),
        "identity": test_mse(lambda ys: ys),
    }

    # Jacobian spectra at noisy test points
    spec_points = test_noisy[:n_spectrum_points]
    spectra = {}
    ratios = {}
    for name, model in (("ours", ours), ("supervised", supervised)):
        results = [spectrum_analysis(model, p, top_k=D) for p in spec_points]
        spectra[name] = np.mean([r.normalized_sigma for r in results], axis=0)
        ratios[name] = float(np.mean([r.nuclear_ratio for r in results]))

    summary = {
        "manifold": manifold.kind, "ambient_dim": D,
        "n_samples": manifold.n_samples, "sigma_eps": manifold.sigma_eps,
        "eta": eta,
        "test_mse": mses,
        "spectrum_nuclear_ratio": ratios,
        "seed": seed,
    }
    arrays = {
        "spectrum_ours": LabeledArray(spectra["ours"].reshape(1, -1),
                                      "series", "index"),
        "spectrum_supervised": LabeledArray(spectra["supervised"].reshape(1, -1),
                                            "series", "index"),
    }
    report = ExperimentReport(
        config={"experiment": "denoise", "manifold": manifold.kind,
                "ambient_dim": D, "n_samples": manifold.n_samples,
                "sigma_eps": manifold.sigma_eps, "radius": manifold.radius,
                "seed": seed, "iterations": config.iterations,
                "batch_size": config.batch_size,
                "learning_rate": config.learning_rate,
                "probe_sigma": probe_sigma, "probe_samples": probe_samples},
        summary=summary, metrics=ours_log, arrays=arrays)
    if out_dir is not None:
        report.save(out_dir)
    return report, {"ours": ours, "supervised": supervised, "n2n": n2n}
