"""Tape-based reverse-mode automatic differentiation over float64 numpy arrays.

Every op returns a new :class:`Tensor`. When gradient recording is enabled and
at least one input requires a gradient, the result keeps references to its
inputs and a closure that maps the output gradient to input gradients.
:func:`backpropagate` walks that graph in reverse topological order.

Only leaf tensors (those created directly with ``requires_grad=True``) receive
an accumulated ``.grad``; intermediate gradients live only for the duration of
one backward pass.
"""

from __future__ import annotations

import contextlib
import threading

import numpy as np

from .errors import NamegenError, ShapeError

DTYPE = np.float64

_state = threading.local()


def grad_enabled():
    return getattr(_state, "enabled", True)


@contextlib.contextmanager
def no_grad():
    """Disable tape recording in the current thread."""
    prev = grad_enabled()
    _state.enabled = False
    try:
        yield
    finally:
        _state.enabled = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad=False, name=None):
        arr = np.asarray(data, dtype=DTYPE)
        self.data = arr
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._backward = None
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def values(self):
        return self.data.reshape(-1)

    def numpy(self):
        return self.data

    def item(self):
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else _not_scalar(self)

    def zero_grad(self):
        self.grad = None

    def backward(self):
        backpropagate(self)

    def __repr__(self):
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return index(self, key)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis=axis, keepdims=keepdims)


def _not_scalar(t):
    raise NamegenError(f"item() needs a single-element tensor, got shape {t.shape}")


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _result(data, parents, backward):
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.name = None
    if grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
    else:
        out.requires_grad = False
        out._parents = ()
        out._backward = None
    return out


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(op, a, b):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(op, a.shape, b.shape) from None


# ---------------------------------------------------------------- elementwise


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)
    sa, sb = a.shape, b.shape
    return _result(a.data + b.data, (a, b),
                   lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a, b)
    sa, sb = a.shape, b.shape
    return _result(a.data - b.data, (a, b),
                   lambda g: (_unbroadcast(g, sa), -_unbroadcast(g, sb)))


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)
    ad, bd = a.data, b.data
    return _result(ad * bd, (a, b),
                   lambda g: (_unbroadcast(g * bd, ad.shape), _unbroadcast(g * ad, bd.shape)))


def neg(a):
    a = as_tensor(a)
    return _result(-a.data, (a,), lambda g: (-g,))


def scale(a, factor):
    a = as_tensor(a)
    factor = float(factor)
    return _result(a.data * factor, (a,), lambda g: (g * factor,))


def tanh(a):
    a = as_tensor(a)
    y = np.tanh(a.data)
    return _result(y, (a,), lambda g: (g * (1.0 - y * y),))


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a):
    a = as_tensor(a)
    y = _sigmoid(a.data)
    return _result(y, (a,), lambda g: (g * y * (1.0 - y),))


def exp(a):
    a = as_tensor(a)
    y = np.exp(a.data)
    return _result(y, (a,), lambda g: (g * y,))


def log(a):
    a = as_tensor(a)
    x = a.data
    if np.any(x <= 0):
        raise NamegenError("log: input outside domain (values must be > 0)")
    return _result(np.log(x), (a,), lambda g: (g / x,))


def clamp_min(a, lo):
    """max(a, lo); the gradient is zero wherever the floor is active."""
    a = as_tensor(a)
    keep = a.data >= lo
    return _result(np.where(keep, a.data, lo), (a,), lambda g: (g * keep,))


def softmax(a, axis=-1, mask=None):
    """Softmax along ``axis`` with max-subtraction.

    ``mask`` (broadcastable boolean array) marks valid entries; masked entries
    get probability exactly zero. Every slice must keep at least one entry.
    """
    a = as_tensor(a)
    x = a.data
    if mask is not None:
        mask = np.broadcast_to(np.asarray(mask, dtype=bool), x.shape)
        if not np.all(mask.any(axis=axis)):
            raise NamegenError("softmax: a slice has every entry masked")
        x = np.where(mask, x, -np.inf)
    z = x - x.max(axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return _result(y, (a,), backward)


# ---------------------------------------------------------------- reductions


def sum_(a, axis=None, keepdims=False):
    a = as_tensor(a)
    shape = a.shape
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return _result(np.asarray(out, dtype=DTYPE), (a,), backward)


def mean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    if axis is None:
        count = a.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([a.shape[i] for i in axes]))
    return scale(sum_(a, axis=axis, keepdims=keepdims), 1.0 / count)


# ---------------------------------------------------------------- linear algebra


def matmul(a, b):
    """numpy ``matmul`` semantics, including 1-D promotion and batch broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim == 0 or b.ndim == 0:
        raise ShapeError("matmul", a.shape, b.shape, detail="scalars not allowed")
    A = a.data if a.ndim > 1 else a.data[None, :]
    B = b.data if b.ndim > 1 else b.data[:, None]
    if A.shape[-1] != B.shape[-2]:
        raise ShapeError("matmul", a.shape, b.shape)
    try:
        full = A @ B
    except ValueError:
        raise ShapeError("matmul", a.shape, b.shape, detail="batch dims") from None
    out = full
    if a.ndim == 1:
        out = out[..., 0, :]
    if b.ndim == 1:
        out = out[..., 0]
    sa, sb, sfull = a.shape, b.shape, full.shape

    def backward(g):
        g = g.reshape(sfull)
        gA = _unbroadcast(g @ np.swapaxes(B, -1, -2), A.shape).reshape(sa)
        gB = _unbroadcast(np.swapaxes(A, -1, -2) @ g, B.shape).reshape(sb)
        return gA, gB

    return _result(out, (a, b), backward)


# ---------------------------------------------------------------- structure


def concat(tensors, axis=-1):
    ts = [as_tensor(t) for t in tensors]
    if not ts:
        raise NamegenError("concat: empty input list")
    nd = ts[0].ndim
    ax = axis % nd if nd else 0
    for t in ts[1:]:
        if t.ndim != nd or any(t.shape[i] != ts[0].shape[i] for i in range(nd) if i != ax):
            raise ShapeError("concat", *(x.shape for x in ts))
    sizes = [t.shape[ax] for t in ts]
    splits = np.cumsum(sizes)[:-1]
    out = np.concatenate([t.data for t in ts], axis=ax)
    return _result(out, tuple(ts), lambda g: tuple(np.split(g, splits, axis=ax)))


def reshape(a, shape):
    a = as_tensor(a)
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise ShapeError("reshape", a.shape, tuple(shape)) from None
    old = a.shape
    return _result(out, (a,), lambda g: (g.reshape(old),))


def index(a, key):
    """Basic or advanced indexing; repeated indices accumulate in backward."""
    a = as_tensor(a)
    out = a.data[key]
    shape = a.shape

    def backward(g):
        z = np.zeros(shape, dtype=DTYPE)
        np.add.at(z, key, g)
        return (z,)

    return _result(np.array(out, dtype=DTYPE), (a,), backward)


def embedding(table, ids):
    """Row lookup ``table[ids]`` for an integer array ``ids`` of any shape."""
    table = as_tensor(table)
    ids = np.asarray(ids)
    if table.ndim != 2:
        raise ShapeError("embedding", table.shape, ids.shape, detail="table must be 2-D")
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise ShapeError("embedding", table.shape, ids.shape, detail="id out of range")
    shape = table.shape

    def backward(g):
        z = np.zeros(shape, dtype=DTYPE)
        np.add.at(z, ids.reshape(-1), g.reshape(-1, shape[1]))
        return (z,)

    return _result(table.data[ids], (table,), backward)


def pick(a, idx):
    """Select one entry per row along the last axis: ``out[...] = a[..., idx[...]]``."""
    a = as_tensor(a)
    idx = np.asarray(idx, dtype=np.int64)
    if idx.shape != a.shape[:-1]:
        raise ShapeError("pick", a.shape, idx.shape)
    out = np.take_along_axis(a.data, idx[..., None], axis=-1)[..., 0]
    shape = a.shape

    def backward(g):
        z = np.zeros(shape, dtype=DTYPE)
        np.put_along_axis(z, idx[..., None], g[..., None], axis=-1)
        return (z,)

    return _result(out, (a,), backward)


def scatter_add(values, idx, size):
    """``out[..., k] = sum of values[..., j] where idx[..., j] == k``; out has last dim ``size``."""
    values = as_tensor(values)
    idx = np.asarray(idx, dtype=np.int64)
    if idx.shape != values.shape:
        raise ShapeError("scatter_add", values.shape, idx.shape)
    if idx.size and (idx.min() < 0 or idx.max() >= size):
        raise ShapeError("scatter_add", values.shape, idx.shape, detail="index out of range")
    lead = values.shape[:-1]
    rows = int(np.prod(lead)) if lead else 1
    v2 = values.data.reshape(rows, -1)
    i2 = idx.reshape(rows, -1)
    out = np.zeros((rows, size), dtype=DTYPE)
    np.add.at(out, (np.arange(rows)[:, None], i2), v2)

    def backward(g):
        g2 = g.reshape(rows, size)
        return (np.take_along_axis(g2, i2, axis=1).reshape(values.shape),)

    return _result(out.reshape(lead + (size,)), (values,), backward)


# ---------------------------------------------------------------- backward


def backpropagate(loss):
    """Accumulate d(loss)/d(leaf) into ``.grad`` of every reachable leaf.

    Calling this twice without zeroing grads adds the second gradient to the
    first.
    """
    if not isinstance(loss, Tensor) or loss.size != 1:
        shape = loss.shape if isinstance(loss, Tensor) else type(loss)
        raise NamegenError(f"backpropagate needs a scalar loss, got shape {shape}")
    if not loss.requires_grad:
        return
    order = []
    seen = set()
    stack = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))

    grads = {id(loss): np.ones(loss.shape, dtype=DTYPE)}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            node.grad = g.copy() if node.grad is None else node.grad + g
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = pg


PRIMITIVES = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "neg": neg,
    "scale": scale,
    "tanh": tanh,
    "sigmoid": sigmoid,
    "exp": exp,
    "log": log,
    "clamp_min": clamp_min,
    "softmax": softmax,
    "sum": sum_,
    "mean": mean,
    "matmul": matmul,
    "concat": lambda *ts, **kw: concat(ts, **kw),
    "reshape": reshape,
    "index": index,
    "embedding": embedding,
    "pick": pick,
    "scatter_add": scatter_add,
}


def forward_primitive(kind, inputs, **attrs):
    """Apply the primitive named ``kind`` to ``inputs`` (a list of tensors/arrays)."""
    try:
        fn = PRIMITIVES[kind]
    except KeyError:
        raise NamegenError(f"unknown primitive {kind!r}") from None
    return fn(*inputs, **attrs)
