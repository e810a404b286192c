"""Penalty values and gradients against closed-form linear oracles."""

import numpy as np
import pytest

from jacreg import tensor as T
from jacreg.linalg import frobenius_sq, nuclear_norm, srebro_factorize
from jacreg.models import ModelSpec, init_composite
from jacreg.regularizers import (RegularizerSpec, exact_nuclear_penalty,
                                 frob_norm_estimate, frob_norm_samples,
                                 frobenius_split_penalty,
                                 gradient_norm_penalty, hutchinson_regularizer)
from jacreg.rng import stream


from support import LinearComposite

RNG = np.random.default_rng(77)


def test_exact_penalty_equals_nuclear_norm_for_linear_maps():
    A = RNG.normal(size=(4, 3))
    B = RNG.normal(size=(2, 4))
    model = LinearComposite(A, B)
    pen = exact_nuclear_penalty(model, np.zeros(3)).item()
    assert abs(pen - nuclear_norm(B @ A)) < 1e-9


def test_split_penalty_equals_frobenius_energies_for_linear_maps():
    A = RNG.normal(size=(4, 3))
    B = RNG.normal(size=(2, 4))
    model = LinearComposite(A, B)
    eta = 0.7
    pen = frobenius_split_penalty(model, np.zeros(3), eta).item()
    expect = 0.5 * eta * (frobenius_sq(B) + frobenius_sq(A))
    assert abs(pen - expect) < 1e-9


def test_balanced_linear_split_attains_eta_times_nuclear_norm():
    M = RNG.normal(size=(3, 5))
    U, V = srebro_factorize(M)  # M = U V^T, balanced energies
    model = LinearComposite(V.T, U)  # h: x -> V^T x, g: z -> U z, f = M
    eta = 0.3
    pen = frobenius_split_penalty(model, np.zeros(5), eta).item()
    assert abs(pen - eta * nuclear_norm(M)) < 1e-8


def test_split_penalty_upper_bounds_nuclear_penalty():
    spec = ModelSpec(n_in=3, n_out=3, inner_dim=4, hidden=8, depth=2)
    model = init_composite(spec, seed=1)
    for x in RNG.normal(size=(5, 3)):
        nuc = exact_nuclear_penalty(model, x).item()
        split = frobenius_split_penalty(model, x, 1.0).item()
        assert nuc <= split + 1e-10


def test_split_penalty_batch_is_mean_of_singles():
    spec = ModelSpec(n_in=3, n_out=2, inner_dim=4, hidden=8, depth=2)
    model = init_composite(spec, seed=2)
    xb = RNG.normal(size=(4, 3))
    batch = frobenius_split_penalty(model, xb, 1.0).item()
    singles = np.mean([frobenius_split_penalty(model, x, 1.0).item()
                       for x in xb])
    assert abs(batch - singles) < 1e-12


def test_gradient_norm_penalty_matches_row_nuclear_norm():
    spec = ModelSpec(n_in=3, n_out=1, inner_dim=4, hidden=8, depth=2)
    model = init_composite(spec, seed=3)
    xb = RNG.normal(size=(6, 3))
    pen = gradient_norm_penalty(model, xb).item()
    expect = np.mean([exact_nuclear_penalty(model, x).item() for x in xb])
    assert abs(pen - expect) < 1e-10


def test_gradient_norm_penalty_rejects_vector_outputs():
    spec = ModelSpec(n_in=3, n_out=2, inner_dim=4, hidden=8, depth=2)
    model = init_composite(spec, seed=4)
    with pytest.raises(ValueError):
        gradient_norm_penalty(model, RNG.normal(size=(2, 3)))


def _param_fd(pen_fn, model, h=1e-6):
    """Central finite differences of a penalty w.r.t. every parameter."""
    fds = []
    for p in model.params:
        flat = p.data.reshape(-1)
        fd = np.zeros_like(flat)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            hi = pen_fn().item()
            flat[i] = old - h
            lo = pen_fn().item()
            flat[i] = old
            fd[i] = (hi - lo) / (2.0 * h)
        fds.append(fd.reshape(p.data.shape))
    return fds


@pytest.mark.parametrize("which", ["split", "exact"])
def test_penalty_parameter_gradients_match_fd(which):
    spec = ModelSpec(n_in=2, n_out=2, inner_dim=3, hidden=4, depth=2)
    model = init_composite(spec, seed=5)
    x = np.array([0.4, -0.2])

    if which == "split":
        pen_fn = lambda: frobenius_split_penalty(model, x, 1.0)
    else:
        pen_fn = lambda: exact_nuclear_penalty(model, x)

    grads = T.backward(pen_fn())
    fds = _param_fd(pen_fn, model)
    for p, fd in zip(model.params, fds):
        g = grads.get(p)
        gd = g.data if g is not None else np.zeros_like(fd)
        scale = max(1.0, np.max(np.abs(fd)))
        assert np.max(np.abs(gd - fd)) <= 1e-4 * scale


def test_probe_estimate_is_unbiased_for_linear_maps():
    A = RNG.normal(size=(4, 4))
    target = frobenius_sq(A)
    samples = frob_norm_samples(lambda t: T.matmul(t, T.tensor(A.T)),
                                np.zeros(4), sigma=0.3, K=10_000,
                                rng=stream(6, "probes"))
    stderr = np.std(samples, ddof=1) / np.sqrt(samples.size)
    assert abs(np.mean(samples) - target) <= 3.0 * stderr


def test_probe_regularizer_converges_to_split_penalty():
    spec = ModelSpec(n_in=3, n_out=3, inner_dim=4, hidden=8, depth=2)
    model = init_composite(spec, seed=7)
    x = np.array([0.2, -0.5, 0.1])
    split = frobenius_split_penalty(model, x, 1.0).item()
    est = hutchinson_regularizer(model, x, sigma=1e-3, K=4000,
                                 rng=stream(7, "probes")).item()
    assert abs(est - split) <= 0.1 * split


def test_probe_bias_shrinks_with_sigma():
    from support import estimator_bias_curve

    spec = ModelSpec(n_in=3, n_out=3, inner_dim=4, hidden=8, depth=2)
    model = init_composite(spec, seed=8)
    x = np.array([0.3, 0.2, -0.1])
    sigmas = [1e-1, 3e-2, 1e-2]
    biases, stderrs = estimator_bias_curve(model, x, sigmas, K=20_000, seed=8)
    assert np.all(biases > 3.0 * stderrs)  # bias resolved above noise
    slope = np.polyfit(np.log(sigmas), np.log(biases), 1)[0]
    assert slope >= 0.9


def test_probe_regularizer_is_nonnegative_and_seeded():
    spec = ModelSpec(n_in=2, n_out=2, inner_dim=3, hidden=4, depth=2)
    model = init_composite(spec, seed=9)
    xb = RNG.normal(size=(4, 2))
    a = hutchinson_regularizer(model, xb, 0.05, 3, stream(9, "probes")).item()
    b = hutchinson_regularizer(model, xb, 0.05, 3, stream(9, "probes")).item()
    assert a >= 0.0
    assert a == b


def test_size_guard_rejects_huge_jacobians():
    class Wide:
        spec = ModelSpec(n_in=5000, n_out=2, inner_dim=4)
        inner_dim = 4

        def __call__(self, x):
            return T.tsum(x)

    with pytest.raises(ValueError, match="hutchinson"):
        exact_nuclear_penalty(Wide(), np.zeros(5000))


def test_regularizer_spec_validation():
    RegularizerSpec(kind="hutchinson", eta=0.1)
    with pytest.raises(ValueError):
        RegularizerSpec(kind="nope", eta=0.1)
    with pytest.raises(ValueError):
        RegularizerSpec(kind="exact_nuclear", eta=-1.0)
    with pytest.raises(ValueError):
        RegularizerSpec(kind="hutchinson", eta=0.1, sigma=0.0)
    with pytest.raises(ValueError):
        RegularizerSpec(kind="hutchinson", eta=0.1, samples=0)


def test_probe_helpers_reject_bad_arguments():
    spec = ModelSpec(n_in=2, n_out=2, inner_dim=3, hidden=4, depth=2)
    model = init_composite(spec, seed=10)
    with pytest.raises(ValueError):
        hutchinson_regularizer(model, np.zeros(2), sigma=0.0, K=1,
                               rng=stream(0, "probes"))
    with pytest.raises(ValueError):
        hutchinson_regularizer(model, np.zeros(2), sigma=0.1, K=0,
                               rng=stream(0, "probes"))
    with pytest.raises(ValueError):
        frob_norm_estimate(lambda t: t, np.zeros(2), sigma=-1.0, K=10,
                           rng=stream(0, "probes"))
