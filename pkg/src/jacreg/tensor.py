"""Dense float64 tensors with reverse-mode automatic differentiation.

The tape is implicit: every operation whose inputs are connected to the
graph creates a node holding its parents and a vector-Jacobian rule.
Adjoint rules are themselves written in terms of these same operations,
so running ``backward`` with ``create_graph=True`` records the adjoint
computation and makes second-order derivatives available.  Nesting is
capped at depth 2 (gradient-of-gradient); attempting a third order
raises ``GradError``.
"""

from __future__ import annotations

import contextlib

import numpy as np

__all__ = [
    "Tensor",
    "GradError",
    "ShapeError",
    "tensor",
    "no_grad",
    "add",
    "sub",
    "mul",
    "neg",
    "scale",
    "matmul",
    "transpose",
    "reshape",
    "tsum",
    "broadcast_to",
    "exp",
    "sin",
    "cos",
    "elu",
    "take",
    "slice_last",
    "concat_last",
    "sumsq",
    "mean",
    "backward",
    "grad",
    "jacobian",
    "hessian",
    "grad_of_grad",
]


class ShapeError(ValueError):
    """Raised when operand shapes do not conform."""


class GradError(RuntimeError):
    """Raised on invalid differentiation requests."""


_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad():
    """Disable graph recording inside the block."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


class _Node:
    __slots__ = ("parents", "vjp")

    def __init__(self, parents, vjp):
        self.parents = parents
        self.vjp = vjp


class Tensor:
    """A dense float64 array, optionally connected to the tape."""

    __slots__ = ("data", "track_grad", "node", "grad_order")

    def __init__(self, data, track_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.track_grad = bool(track_grad)
        self.node = None
        self.grad_order = 0

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self):
        return float(self.data)

    def detach(self):
        t = Tensor(self.data)
        return t

    def _connected(self):
        return self.track_grad or self.node is not None

    # operator sugar
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        if np.isscalar(other):
            return scale(self, float(other))
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, _coerce(other))

    def __repr__(self):
        return f"Tensor(shape={self.shape}, track_grad={self.track_grad})"


def tensor(data, track_grad=False):
    return Tensor(data, track_grad=track_grad)


def _coerce(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, parents, vjp):
    out = Tensor(data)
    live = [p for p in parents if p._connected()]
    if _GRAD_ENABLED and live:
        out.node = _Node(tuple(parents), vjp)
    if parents:
        out.grad_order = max(p.grad_order for p in parents)
    return out


def _check_broadcast(a, b, opname):
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(
            f"{opname}: shapes {a.shape} and {b.shape} do not broadcast"
        ) from None


def _unbroadcast(g, shape):
    """Reduce adjoint ``g`` back to ``shape`` after numpy broadcasting."""
    extra = g.data.ndim - len(shape)
    if extra > 0:
        g = tsum(g, axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = tsum(g, axis=axes, keepdims=True)
    if g.shape != tuple(shape):
        g = reshape(g, shape)
    return g


# ---------------------------------------------------------------------------
# primitives


def add(a, b):
    a, b = _coerce(a), _coerce(b)
    _check_broadcast(a, b, "add")

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _make(a.data + b.data, (a, b), vjp)


def sub(a, b):
    a, b = _coerce(a), _coerce(b)
    _check_broadcast(a, b, "sub")

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(neg(g), b.shape)

    return _make(a.data - b.data, (a, b), vjp)


def mul(a, b):
    a, b = _coerce(a), _coerce(b)
    _check_broadcast(a, b, "mul")

    def vjp(g):
        return _unbroadcast(mul(g, b), a.shape), _unbroadcast(mul(g, a), b.shape)

    return _make(a.data * b.data, (a, b), vjp)


def neg(a):
    a = _coerce(a)

    def vjp(g):
        return (neg(g),)

    return _make(-a.data, (a,), vjp)


def scale(a, c):
    a = _coerce(a)
    c = float(c)

    def vjp(g):
        return (scale(g, c),)

    return _make(a.data * c, (a,), vjp)


def matmul(a, b):
    a, b = _coerce(a), _coerce(b)
    if a.data.ndim not in (1, 2) or b.data.ndim not in (1, 2):
        raise ShapeError(f"matmul: expects 1-D or 2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dimensions differ for {a.shape} @ {b.shape}")

    a_vec = a.data.ndim == 1
    b_vec = b.data.ndim == 1

    def vjp(g):
        ga = gb = None
        g2 = g
        if a_vec and b_vec:
            # scalar result of a dot product
            ga = mul(g, b)
            gb = mul(g, a)
            return ga, gb
        if a_vec:
            g2 = reshape(g, (1, -1)) if g.data.ndim == 1 else g
            ga = reshape(matmul(g2, transpose(b)), a.shape)
            gb = matmul(reshape(a, (-1, 1)), g2)
            return ga, gb
        if b_vec:
            gc = reshape(g, (-1, 1)) if g.data.ndim == 1 else g
            ga = matmul(gc, reshape(b, (1, -1)))
            gb = reshape(matmul(transpose(a), gc), b.shape)
            return ga, gb
        return matmul(g, transpose(b)), matmul(transpose(a), g)

    return _make(a.data @ b.data, (a, b), vjp)


def transpose(a):
    a = _coerce(a)

    def vjp(g):
        return (transpose(g),)

    return _make(a.data.T, (a,), vjp)


def reshape(a, shape):
    a = _coerce(a)
    shape = tuple(int(s) for s in np.atleast_1d(shape)) if not isinstance(shape, tuple) else shape

    def vjp(g):
        return (reshape(g, a.shape),)

    return _make(a.data.reshape(shape), (a,), vjp)


def tsum(a, axis=None, keepdims=False):
    a = _coerce(a)

    def vjp(g):
        if axis is None:
            return (broadcast_to(g, a.shape),)
        gg = g
        if not keepdims:
            kshape = list(a.shape)
            for ax in np.atleast_1d(axis):
                kshape[int(ax)] = 1
            gg = reshape(g, tuple(kshape))
        return (broadcast_to(gg, a.shape),)

    return _make(a.data.sum(axis=axis, keepdims=keepdims), (a,), vjp)


def broadcast_to(a, shape):
    a = _coerce(a)
    shape = tuple(shape)

    def vjp(g):
        return (_unbroadcast(g, a.shape),)

    return _make(np.broadcast_to(a.data, shape).copy(), (a,), vjp)


def exp(a):
    a = _coerce(a)
    out_data = np.exp(a.data)

    def vjp(g):
        return (mul(g, out),)

    out = _make(out_data, (a,), vjp)
    return out


def sin(a):
    a = _coerce(a)

    def vjp(g):
        return (mul(g, cos(a)),)

    return _make(np.sin(a.data), (a,), vjp)


def cos(a):
    a = _coerce(a)

    def vjp(g):
        return (neg(mul(g, sin(a))),)

    return _make(np.cos(a.data), (a,), vjp)


def _elu_prime(a):
    """Derivative of ELU: 1 for x > 0, exp(x) otherwise.  Its own
    adjoint uses the (a.e.) second derivative held as a constant, which
    is all the depth-2 nesting cap requires."""
    a = _coerce(a)
    expneg = np.exp(np.minimum(a.data, 0.0))
    val = np.where(a.data > 0.0, 1.0, expneg)
    second = np.where(a.data > 0.0, 0.0, expneg)

    def vjp(g):
        return (mul(g, Tensor(second)),)

    return _make(val, (a,), vjp)


def elu(a):
    """ELU with alpha=1: x for x > 0, exp(x) - 1 otherwise."""
    a = _coerce(a)
    val = np.where(a.data > 0.0, a.data, np.expm1(np.minimum(a.data, 0.0)))

    def vjp(g):
        return (mul(g, _elu_prime(a)),)

    return _make(val, (a,), vjp)


def take(a, idx):
    """Select a single element (by flat index for 1-D, tuple otherwise)."""
    a = _coerce(a)

    def vjp(g):
        return (_scatter(g, idx, a.shape),)

    return _make(a.data[idx], (a,), vjp)


def _scatter(g, idx, shape):
    g = _coerce(g)

    def vjp(gg):
        return (take(gg, idx),)

    z = np.zeros(shape)
    z[idx] = g.data
    return _make(z, (g,), vjp)


def slice_last(a, start, stop):
    a = _coerce(a)

    def vjp(g):
        return (_pad_last(g, start, a.shape),)

    return _make(a.data[..., start:stop], (a,), vjp)


def _pad_last(g, start, shape):
    g = _coerce(g)
    width = g.shape[-1]

    def vjp(gg):
        return (slice_last(gg, start, start + width),)

    z = np.zeros(shape)
    z[..., start : start + width] = g.data
    return _make(z, (g,), vjp)


def concat_last(a, b):
    a, b = _coerce(a), _coerce(b)
    if a.shape[:-1] != b.shape[:-1]:
        raise ShapeError(f"concat_last: leading shapes differ, {a.shape} vs {b.shape}")
    ka = a.shape[-1]

    def vjp(g):
        return (
            slice_last(g, 0, ka),
            slice_last(g, ka, ka + b.shape[-1]),
        )

    return _make(np.concatenate([a.data, b.data], axis=-1), (a, b), vjp)


# ---------------------------------------------------------------------------
# composites


def sumsq(a, axis=None, keepdims=False):
    """Squared L2 norm: sum of squared entries."""
    a = _coerce(a)
    return tsum(mul(a, a), axis=axis, keepdims=keepdims)


def mean(a, axis=None):
    a = _coerce(a)
    n = a.data.size if axis is None else np.prod([a.shape[int(ax)] for ax in np.atleast_1d(axis)])
    return scale(tsum(a, axis=axis), 1.0 / float(n))


# ---------------------------------------------------------------------------
# backward


def _toposort(root):
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        t, processed = stack.pop()
        if processed:
            order.append(t)
            continue
        if id(t) in seen or t.node is None:
            continue
        seen.add(id(t))
        stack.append((t, True))
        for p in t.node.parents:
            if p.node is not None and id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss, wrt=None, create_graph=False):
    """Reverse-mode sweep from a scalar loss.

    Returns a dict mapping each reachable ``track_grad`` leaf to its
    gradient, or a list of gradients aligned with ``wrt`` when given
    (zero tensors for unreachable entries).
    """
    if loss.data.ndim != 0 and loss.data.size != 1:
        raise GradError(f"backward requires a scalar loss, got shape {loss.shape}")
    if loss.grad_order >= 2:
        raise GradError("nesting depth > 2 unsupported")

    adjoints = {id(loss): Tensor(np.ones_like(loss.data))}
    holders = {id(loss): loss}
    ctx = contextlib.nullcontext() if create_graph else no_grad()
    with ctx:
        for t in reversed(_toposort(loss)):
            g = adjoints.get(id(t))
            if g is None:
                continue
            pgrads = t.node.vjp(g)
            for p, pg in zip(t.node.parents, pgrads):
                if pg is None or not p._connected():
                    continue
                if id(p) in adjoints:
                    adjoints[id(p)] = add(adjoints[id(p)], pg)
                else:
                    adjoints[id(p)] = pg
                holders[id(p)] = p

    order = loss.grad_order + 1 if create_graph else loss.grad_order

    def _finish(g):
        g.grad_order = max(g.grad_order, order)
        return g

    if wrt is not None:
        out = []
        for p in wrt:
            g = adjoints.get(id(p))
            if g is None:
                g = Tensor(np.zeros_like(p.data))
            out.append(_finish(g))
        return out
    return {
        holders[k]: _finish(g)
        for k, g in adjoints.items()
        if holders[k].track_grad and holders[k] is not loss
    }


def grad(loss, wrt, create_graph=False):
    """Gradient of a scalar loss w.r.t. a single tensor."""
    return backward(loss, wrt=[wrt], create_graph=create_graph)[0]


def jacobian(f, x):
    """Full Jacobian of ``f`` at ``x`` from one VJP per output coordinate."""
    if not isinstance(x, Tensor):
        x = Tensor(x)
    probe = Tensor(x.data, track_grad=True)
    y = f(probe)
    ydata = np.atleast_1d(y.data)
    rows = []
    for i in range(ydata.size):
        yi = take(reshape(y, (-1,)), i)
        rows.append(backward(yi, wrt=[probe])[0].data.reshape(-1))
    return Tensor(np.stack(rows))


def hessian(f, x):
    """Hessian of a scalar-valued ``f`` via gradient-of-gradient."""
    probe = Tensor(np.atleast_1d(np.asarray(x.data if isinstance(x, Tensor) else x, float)),
                   track_grad=True)
    g = grad(f(probe), probe, create_graph=True)
    n = probe.data.size
    rows = []
    for i in range(n):
        gi = take(reshape(g, (-1,)), i)
        rows.append(backward(gi, wrt=[probe])[0].data.reshape(-1))
    return Tensor(np.stack(rows))


def grad_of_grad(f, x, component=0):
    """Gradient of one component of the gradient of a scalar-valued ``f``."""
    probe = Tensor(np.atleast_1d(np.asarray(x.data if isinstance(x, Tensor) else x, float)),
                   track_grad=True)
    g = grad(f(probe), probe, create_graph=True)
    gi = take(reshape(g, (-1,)), component)
    out = backward(gi, wrt=[probe])[0]
    return Tensor(out.data.reshape(probe.shape))
