"""MLPs with ELU activations and Fourier-feature inputs, composed as
f = g . h so that the two halves expose the inner representation."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .rng import stream

__all__ = ["Mlp", "FourierFeatures", "CompositeModel", "ModelSpec", "init_composite",
           "save_checkpoint", "load_checkpoint"]


class Mlp:
    """Fully-connected net: ELU on hidden layers, identity output."""

    def __init__(self, widths, rng):
        if any(w <= 0 for w in widths):
            raise ValueError(f"widths must be positive, got {widths}")
        self.widths = list(widths)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            b = rng.uniform(-bound, bound, size=(fan_out,))
            self.weights.append(T.tensor(w, track_grad=True))
            self.biases.append(T.tensor(b, track_grad=True))

    @property
    def params(self):
        return [p for pair in zip(self.weights, self.biases) for p in pair]

    def __call__(self, x):
        """Forward pass; accepts (n,) vectors or (batch, n) matrices."""
        h = x if isinstance(x, T.Tensor) else T.tensor(x)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = T.add(T.matmul(h, w), b)
            if i < last:
                h = T.elu(h)
        return h


class FourierFeatures:
    """x -> [cos(2 pi B x); sin(2 pi B x)] for a fixed random projection B.

    B has shape (k, n) with N(0, scale^2) entries drawn once at
    construction and never trained, so ||gamma(x)||^2 = k for every x.
    """

    def __init__(self, n_in, k, scale, rng):
        self.n_in = int(n_in)
        self.k = int(k)
        self.scale = float(scale)
        self.B = rng.normal(0.0, scale, size=(k, n_in))

    @property
    def n_out(self):
        return 2 * self.k

    def __call__(self, x):
        h = x if isinstance(x, T.Tensor) else T.tensor(x)
        z = T.scale(T.matmul(h, T.tensor(self.B.T)), 2.0 * np.pi)
        return T.concat_last(T.cos(z), T.sin(z))


@dataclass
class ModelSpec:
    n_in: int
    n_out: int
    inner_dim: int
    hidden: int = 64
    depth: int = 2  # layers per half
    fourier_k: int = 0  # 0 disables the feature map
    fourier_scale: float = 1.0


class CompositeModel:
    """f = g . h with h optionally preceded by Fourier features."""

    def __init__(self, spec: ModelSpec, features, h_mlp, g_mlp):
        self.spec = spec
        self.features = features
        self.h_mlp = h_mlp
        self.g_mlp = g_mlp

    @property
    def inner_dim(self):
        return self.spec.inner_dim

    @property
    def params(self):
        return self.h_mlp.params + self.g_mlp.params

    def forward_h(self, x):
        h = x if isinstance(x, T.Tensor) else T.tensor(x)
        if self.features is not None:
            h = self.features(h)
        return self.h_mlp(h)

    def forward_g(self, z):
        return self.g_mlp(z)

    def __call__(self, x):
        return self.forward_g(self.forward_h(x))


def init_composite(spec: ModelSpec, seed):
    """Build a composite model with seeded uniform fan-in initialization."""
    rng = stream(seed, "init")
    features = None
    h_in = spec.n_in
    if spec.fourier_k > 0:
        features = FourierFeatures(spec.n_in, spec.fourier_k, spec.fourier_scale, rng)
        h_in = features.n_out
    h_widths = [h_in] + [spec.hidden] * (spec.depth - 1) + [spec.inner_dim]
    g_widths = [spec.inner_dim] + [spec.hidden] * (spec.depth - 1) + [spec.n_out]
    h_mlp = Mlp(h_widths, rng)
    g_mlp = Mlp(g_widths, rng)
    return CompositeModel(spec, features, h_mlp, g_mlp)


_MAGIC = b"JRCKPT1\n"


def save_checkpoint(model: CompositeModel, path, seed=None):
    """JSON header plus a flat little-endian float64 parameter block."""
    s = model.spec
    header = {
        "n_in": s.n_in, "n_out": s.n_out, "inner_dim": s.inner_dim,
        "hidden": s.hidden, "depth": s.depth,
        "fourier_k": s.fourier_k, "fourier_scale": s.fourier_scale,
        "seed": seed,
        "shapes": [list(p.shape) for p in model.params],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    flat = np.concatenate([p.data.reshape(-1) for p in model.params]).astype("<f8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(flat.tobytes())
    if model.features is not None:
        np.save(str(path) + ".fourier.npy", model.features.B)


def load_checkpoint(path):
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ValueError(f"{path} is not a model checkpoint")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        flat = np.frombuffer(fh.read(), dtype="<f8")
    spec = ModelSpec(n_in=header["n_in"], n_out=header["n_out"],
                     inner_dim=header["inner_dim"], hidden=header["hidden"],
                     depth=header["depth"], fourier_k=header["fourier_k"],
                     fourier_scale=header["fourier_scale"])
    model = init_composite(spec, seed=header["seed"] if header["seed"] is not None else 0)
    offset = 0
    for p, shape in zip(model.params, header["shapes"]):
        size = int(np.prod(shape))
        p.data = flat[offset:offset + size].reshape(shape).copy()
        offset += size
    if model.features is not None:
        import os
        fpath = str(path) + ".fourier.npy"
        if os.path.exists(fpath):
            model.features.B = np.load(fpath)
    return model
