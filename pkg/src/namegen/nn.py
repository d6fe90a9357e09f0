"""Parameters, the LSTM cell, tensor checkpoints and the finite-difference oracle."""

from __future__ import annotations

import base64
import hashlib
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .errors import CheckpointError, NamegenError, ShapeError
from .tensor import Tensor

FORMAT_NAME = "namegen-tensors"
FORMAT_VERSION = 1


def _derived_rng(seed, name):
    digest = hashlib.sha256(f"{int(seed)}/{name}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


class ParamStore:
    """Named trainable tensors.

    Initial values depend only on ``(seed, name, shape)``, so adding or
    reordering parameters never perturbs the others.
    """

    def __init__(self, seed=0):
        self.seed = int(seed)
        self._params: dict[str, Tensor] = {}

    def create(self, name, shape, init="uniform"):
        if name in self._params:
            raise NamegenError(f"parameter {name!r} already exists")
        shape = tuple(int(n) for n in shape)
        if init == "uniform":
            fan_in = shape[0]
            fan_out = shape[1] if len(shape) > 1 else 1
            r = math.sqrt(6.0 / (fan_in + fan_out))
            data = _derived_rng(self.seed, name).uniform(-r, r, size=shape)
        elif init == "zeros":
            data = np.zeros(shape)
        else:
            raise NamegenError(f"unknown init {init!r}")
        t = Tensor(data, requires_grad=True, name=name)
        self._params[name] = t
        return t

    def __getitem__(self, name):
        return self._params[name]

    def __contains__(self, name):
        return name in self._params

    def __iter__(self):
        return iter(self._params)

    def __len__(self):
        return len(self._params)

    def items(self):
        return self._params.items()

    def names(self):
        return list(self._params)

    def zero_grad(self):
        for p in self._params.values():
            p.grad = None

    def num_entries(self):
        return sum(p.size for p in self._params.values())

    def arrays(self):
        return {k: v.data for k, v in self._params.items()}

    def load_arrays(self, arrays):
        missing = set(self._params) ^ set(arrays)
        if missing:
            raise CheckpointError(f"parameter set mismatch: {sorted(missing)}")
        for k, arr in arrays.items():
            if arr.shape != self._params[k].shape:
                raise CheckpointError(
                    f"shape mismatch for {k}: {arr.shape} vs {self._params[k].shape}")
        for k, arr in arrays.items():
            self._params[k].data = np.array(arr, dtype=np.float64)


# ---------------------------------------------------------------- LSTM


@dataclass
class LSTMParams:
    """Fused gate weights: ``W`` is (input+hidden, 4*hidden), gates ordered i, f, g, o."""

    W: Tensor
    b: Tensor

    @property
    def hidden_size(self):
        return self.W.shape[1] // 4

    @property
    def input_size(self):
        return self.W.shape[0] - self.hidden_size

    @classmethod
    def create(cls, store, prefix, input_size, hidden_size):
        W = store.create(f"{prefix}.W", (input_size + hidden_size, 4 * hidden_size))
        b = store.create(f"{prefix}.b", (4 * hidden_size,), init="zeros")
        return cls(W, b)


def lstm_cell(x_t, h_prev, c_prev, params):
    """One LSTM step. Inputs may carry any leading batch dimensions."""
    x_t, h_prev, c_prev = T.as_tensor(x_t), T.as_tensor(h_prev), T.as_tensor(c_prev)
    H = params.hidden_size
    if (x_t.shape[-1] != params.input_size or h_prev.shape[-1] != H
            or c_prev.shape != h_prev.shape):
        raise ShapeError("lstm_cell", x_t.shape, h_prev.shape, c_prev.shape, params.W.shape)
    z = T.concat([x_t, h_prev], axis=-1) @ params.W + params.b
    i = T.sigmoid(z[..., :H])
    f = T.sigmoid(z[..., H:2 * H])
    g = T.tanh(z[..., 2 * H:3 * H])
    o = T.sigmoid(z[..., 3 * H:])
    c_t = f * c_prev + i * g
    h_t = o * T.tanh(c_t)
    return h_t, c_t


# ---------------------------------------------------------------- checkpoint format


def _encode_array(arr):
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii")


def _decode_array(blob, shape):
    raw = base64.b64decode(blob.encode("ascii"), validate=True)
    arr = np.frombuffer(raw, dtype="<f8")
    if arr.size != int(np.prod(shape)):
        raise CheckpointError("tensor payload length does not match its shape")
    return arr.reshape(shape).astype(np.float64)


def _body_digest(body):
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def save_tensors(path, tensors, seed, meta=None):
    """Write ``{name: array}`` as JSON: shape plus base64 little-endian float64.

    The write goes through a temporary file so readers never see a partial file.
    """
    body = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "seed": int(seed),
        "meta": meta or {},
        "tensors": {
            name: {"shape": list(arr.shape), "data": _encode_array(arr)}
            for name, arr in tensors.items()
        },
    }
    doc = dict(body, sha256=_body_digest(body))
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
    os.replace(tmp, path)


def load_tensors(path):
    """Return ``(arrays, seed, meta)``; raises CheckpointError on any defect."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint not found: {path}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise CheckpointError(f"{path}: not a {FORMAT_NAME} file")
    if doc.get("version") != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported format version {doc.get('version')} (expected {FORMAT_VERSION})")
    digest = doc.pop("sha256", None)
    if digest != _body_digest(doc):
        raise CheckpointError(f"{path}: checksum mismatch")
    arrays = {}
    try:
        for name, rec in doc["tensors"].items():
            arrays[name] = _decode_array(rec["data"], tuple(rec["shape"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: malformed tensor record: {exc}") from None
    return arrays, int(doc["seed"]), doc.get("meta", {})


def save_params(path, store, meta=None):
    save_tensors(path, store.arrays(), store.seed, meta)


def load_params(path, store):
    arrays, seed, meta = load_tensors(path)
    store.load_arrays(arrays)
    store.seed = seed
    return meta


# ---------------------------------------------------------------- gradient oracle


def finite_difference_check(f, store, eps=1e-5, names=None):
    """Largest relative error between backprop and central-difference gradients.

    ``f(store)`` must build a scalar loss from the store's tensors. Relative
    error per entry is ``|a - n| / max(|a|, |n|, 1e-8)``.
    """
    if eps <= 0:
        raise NamegenError("eps must be positive")
    names = list(store) if names is None else list(names)
    store.zero_grad()
    loss = f(store)
    if not np.all(np.isfinite(loss.data)):
        raise NamegenError("finite_difference_check: loss is not finite")
    T.backpropagate(loss)
    analytic = {n: (store[n].grad if store[n].grad is not None else np.zeros(store[n].shape))
                for n in names}

    worst = 0.0
    with T.no_grad():
        for n in names:
            p = store[n]
            flat = p.data.reshape(-1)
            a_flat = analytic[n].reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + eps
                fp = float(f(store).data)
                flat[i] = orig - eps
                fm = float(f(store).data)
                flat[i] = orig
                if not (math.isfinite(fp) and math.isfinite(fm)):
                    raise NamegenError(f"finite_difference_check: non-finite loss at {n}[{i}]")
                num = (fp - fm) / (2 * eps)
                a = float(a_flat[i])
                err = abs(a - num) / max(abs(a), abs(num), 1e-8)
                worst = max(worst, err)
    store.zero_grad()
    return worst
