"""End-to-end acceptance checks at pinned tolerances.

Each test prints a single pass/fail line for its criterion; the slow
tests train full desk-budget models and dominate the suite runtime.
"""

import time

import numpy as np
import pytest
from support import estimator_bias_curve

from jacreg import tensor as T
from jacreg.experiments import (ManifoldSpec, RofProblem,
                                default_denoise_config, default_rof_config,
                                run_matrix_equiv, run_rof,
                                run_synthetic_denoise)
from jacreg.linalg import (check_subgradient_optimality, frobenius_sq,
                           nuclear_norm, optimal_shrink, srebro_factorize,
                           svd)
from jacreg.models import ModelSpec, init_composite
from jacreg.regularizers import frob_norm_samples, frobenius_split_penalty
from jacreg.rng import stream


def verdict(name, ok, detail=""):
    print(f"[acceptance] {name}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{name} failed: {detail}"


# --------------------------------------------------------------------------
# trained-model fixtures (shared across criteria)


@pytest.fixture(scope="module")
def rof_runs():
    runs = {}
    for eta in (0.1, 0.25):
        prob = RofProblem(n=2, eta=eta)
        for variant in ("hutchinson", "exact_penalty"):
            cfg = default_rof_config(prob, seed=1, iterations=20_000,
                                     batch_size=2048)
            report, _ = run_rof(prob, variant, cfg, hutch_sigma=0.05,
                                hutch_samples=4)
            runs[(variant, eta)] = report.summary
    return runs


@pytest.fixture(scope="module")
def denoise_run():
    manifold = ManifoldSpec(kind="circle", ambient_dim=10, n_samples=4096,
                            sigma_eps=0.3)
    cfg = default_denoise_config(seed=0, iterations=4000, batch_size=256,
                                 eta=manifold.sigma_eps)
    report, _ = run_synthetic_denoise(manifold, cfg)
    return report.summary


# --------------------------------------------------------------------------
# criteria


def test_factorization_energy_identity():
    t0 = time.time()
    rng = np.random.default_rng(0)
    max_gap = 0.0
    beaten = False
    mats = [rng.normal(size=(rng.integers(1, 9), rng.integers(1, 9)))
            for _ in range(200)]
    for A in mats:
        U, V = srebro_factorize(A)
        energy = 0.5 * (frobenius_sq(U) + frobenius_sq(V))
        max_gap = max(max_gap, abs(energy - nuclear_norm(A)))
    for i in range(1000):
        A = mats[i % len(mats)]
        nuc = nuclear_norm(A)
        U0, V0 = srebro_factorize(A)
        r = U0.shape[1]
        M = rng.normal(size=(r, r)) + 2.0 * np.eye(r)
        alt = 0.5 * (frobenius_sq(U0 @ M)
                     + frobenius_sq(V0 @ np.linalg.inv(M).T))
        if alt < nuc - 1e-8:
            beaten = True
    elapsed = time.time() - t0
    verdict("factorization energy identity",
            max_gap <= 1e-8 and not beaten and elapsed < 10.0,
            f"max gap {max_gap:.2e}, beaten={beaten}, {elapsed:.1f}s")


def test_matrix_objective_equivalence():
    t0 = time.time()
    rng = np.random.default_rng(1)
    worst = 0.0
    for i in range(20):
        Y = rng.normal(size=(8, 6))
        eta = float(rng.uniform(0.2, 1.5))
        report, _ = run_matrix_equiv(Y, eta, seed=i, factor_iters=3000,
                                     subgrad_iters=100)
        worst = max(worst, report.summary["rel_gap_factorized"])
    elapsed = time.time() - t0
    verdict("matrix objective equivalence",
            worst <= 0.01 and elapsed < 120.0,
            f"worst rel gap {worst:.2e}, {elapsed:.1f}s")


@pytest.mark.slow
def test_indicator_regression_matches_closed_form(rof_runs):
    checks = []
    for eta in (0.1, 0.25):
        s = rof_runs[("hutchinson", eta)]
        target = 1.0 - 2 * eta
        checks.append((f"eta={eta}",
                       abs(s["plateau_mean"] - target) <= 0.05
                       and s["outside_max_abs"] <= 0.05
                       and s["final_mae"] <= 0.05,
                       f"plateau {s['plateau_mean']:.3f} (target {target}), "
                       f"outside {s['outside_max_abs']:.3f}, "
                       f"mae {s['final_mae']:.3f}"))
    ok = all(c[1] for c in checks)
    verdict("indicator regression closed form", ok,
            "; ".join(f"{c[0]}: {c[2]}" for c in checks))


@pytest.mark.slow
def test_exact_and_probe_objectives_agree(rof_runs):
    gaps = {}
    for eta in (0.1, 0.25):
        a = rof_runs[("exact_penalty", eta)]["final_objective_eval"]
        b = rof_runs[("hutchinson", eta)]["final_objective_eval"]
        gaps[eta] = abs(a - b) / max(abs(a), 1e-12)
    ok = all(g <= 0.05 for g in gaps.values())
    verdict("exact/probe objective equivalence", ok,
            ", ".join(f"eta={k}: gap {v:.3f}" for k, v in gaps.items()))


def test_probe_estimator_statistics():
    t0 = time.time()
    rng = np.random.default_rng(2)
    A = rng.normal(size=(5, 5))
    target = frobenius_sq(A)
    samples = frob_norm_samples(lambda t: T.matmul(t, T.tensor(A.T)),
                                np.zeros(5), sigma=0.3, K=10_000,
                                rng=stream(2, "probes"))
    stderr = np.std(samples, ddof=1) / np.sqrt(samples.size)
    linear_ok = abs(np.mean(samples) - target) <= 3.0 * stderr

    spec = ModelSpec(n_in=3, n_out=3, inner_dim=4, hidden=8, depth=2)
    model = init_composite(spec, seed=3)
    sigmas = [1e-1, 3e-2, 1e-2, 3e-3]
    biases, _ = estimator_bias_curve(model, np.array([0.3, 0.2, -0.1]),
                                     sigmas, K=100_000, seed=3)
    slope = np.polyfit(np.log(sigmas), np.log(biases), 1)[0]
    elapsed = time.time() - t0
    verdict("probe estimator statistics",
            linear_ok and slope >= 0.9 and elapsed < 60.0,
            f"linear within 3 stderr: {linear_ok}, bias slope {slope:.2f}, "
            f"{elapsed:.1f}s")


def test_linear_shrinker_optimality():
    t0 = time.time()
    rng = np.random.default_rng(4)
    worst_resid = 0.0
    worst_excess = -np.inf
    formula_exact = True
    for _ in range(20):
        D = int(rng.integers(3, 10))
        N = int(rng.integers(D, 60))
        Y = rng.normal(size=(D, N))
        eta = float(rng.uniform(0.005, 0.1))
        res = optimal_shrink(Y, eta)
        rep = check_subgradient_optimality(res.A_star, Y, eta)
        worst_resid = max(worst_resid, rep.ut_w, rep.w_v)
        worst_excess = max(worst_excess, rep.sigma_excess)
        cutoff = N * eta
        for d, s in enumerate(res.svd_y.sigma):
            expect = (s * s - cutoff) / s if s > 0 and s * s >= cutoff else 0.0
            if res.shrunk_sigma[d] != expect:
                formula_exact = False
    elapsed = time.time() - t0
    verdict("linear shrinker optimality",
            worst_resid <= 1e-8 and worst_excess <= 1e-8 and formula_exact
            and elapsed < 10.0,
            f"max residual {worst_resid:.2e}, max sigma excess "
            f"{worst_excess:.2e}, formula exact: {formula_exact}, "
            f"{elapsed:.1f}s")


def test_gradient_integrity():
    from test_regularizers import _param_fd
    from test_tensor import OPS, fd_gradient

    t0 = time.time()
    worst_first = 0.0
    for name, (build, x0) in OPS.items():
        xt = T.tensor(np.asarray(x0, float), track_grad=True)
        g = T.grad(build(xt), xt).data
        fd = fd_gradient(lambda a: build(T.tensor(a)).item(), x0)
        rel = np.max(np.abs(g - fd)) / max(1.0, np.max(np.abs(fd)))
        worst_first = max(worst_first, rel)

    spec = ModelSpec(n_in=2, n_out=2, inner_dim=3, hidden=4, depth=2)
    model = init_composite(spec, seed=5)
    x = np.array([0.4, -0.2])
    pen_fn = lambda: frobenius_split_penalty(model, x, 1.0)
    grads = T.backward(pen_fn())
    worst_second = 0.0
    for p, fd in zip(model.params, _param_fd(pen_fn, model)):
        g = grads.get(p)
        gd = g.data if g is not None else np.zeros_like(fd)
        rel = np.max(np.abs(gd - fd)) / max(1.0, np.max(np.abs(fd)))
        worst_second = max(worst_second, rel)
    elapsed = time.time() - t0
    verdict("gradient integrity",
            worst_first <= 1e-5 and worst_second <= 1e-4 and elapsed < 60.0,
            f"first-order {worst_first:.2e}, double-backprop "
            f"{worst_second:.2e}, {elapsed:.1f}s")


@pytest.mark.slow
def test_unsupervised_denoising(denoise_run):
    mse = denoise_run["test_mse"]
    ratio = denoise_run["spectrum_nuclear_ratio"]
    ok = (mse["ours"] < mse["shrink"]
          and mse["ours"] <= 1.3 * mse["supervised"]
          and ratio["ours"] < ratio["supervised"])
    verdict("unsupervised denoising", ok,
            f"mse ours {mse['ours']:.3f}, shrink {mse['shrink']:.3f}, "
            f"supervised {mse['supervised']:.3f}; spectrum ratio ours "
            f"{ratio['ours']:.2f} vs supervised {ratio['supervised']:.2f}")


@pytest.mark.slow
def test_run_determinism(tmp_path):
    prob = RofProblem(n=2, eta=0.1)
    outs = []
    for sub in ("a", "b"):
        cfg = default_rof_config(prob, seed=7, iterations=60, batch_size=64)
        out = tmp_path / sub
        run_rof(prob, "hutchinson", cfg, out_dir=str(out), heatmap_res=16,
                n_test_points=200)
        outs.append((out / "metrics.csv").read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    verdict("seeded run determinism", ok,
            f"{len(outs[0])} bytes, identical: {outs[0] == outs[1]}")
