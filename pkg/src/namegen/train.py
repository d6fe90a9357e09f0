"""Momentum-SGD training with teacher forcing, checkpointing and exact resume."""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import tensor as T
from .errors import CheckpointError, DataError, NamegenError, ValidationError
from .model import ModelConfig, NameModel, loss_on_batch, make_batch, model_from_arrays
from .nn import load_tensors, save_tensors

log = logging.getLogger(__name__)

VELOCITY_PREFIX = "velocity/"


@dataclass
class TrainConfig:
    batch_size: int = 16
    learning_rate: float = 0.01
    lr_decay: float = 0.95
    momentum: float = 0.9
    epochs: int = 10
    seed: int = 0
    grad_clip_norm: float = 5.0
    checkpoint_interval: int = 0
    patience: int = 0
    embed_dim: int = 128
    encoder_dim: int = 128
    path_dim: int = 128
    decoder_dim: int = 320
    attention_dim: int = 128
    use_copy: bool = True
    max_len: int = 8

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")
        if not 0.0 <= self.momentum < 1.0:
            raise ValidationError("momentum must be in [0, 1)")
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be > 0")
        if self.epochs < 0:
            raise ValidationError("epochs must be >= 0")

    def model_config(self, vocab_size, label_vocab_size):
        return ModelConfig(vocab_size, label_vocab_size, self.embed_dim, self.encoder_dim,
                           self.path_dim, self.decoder_dim, self.attention_dim, self.use_copy,
                           self.max_len)

    def lr_at(self, epoch):
        return self.learning_rate * self.lr_decay ** epoch


def _coerce(name, kind, text):
    try:
        if kind is bool:
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        return kind(text)
    except ValueError:
        raise ValidationError(f"config key {name!r}: cannot parse {text!r}") from None


def parse_config(text, base=None):
    """Parse ``key = value`` lines (``#`` comments allowed) into a TrainConfig."""
    # annotations are strings under postponed evaluation; map them back to types
    types = {f.name: {"int": int, "float": float, "bool": bool}[f.type]
             for f in fields(TrainConfig)}
    values = asdict(base) if base is not None else {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected 'key = value'")
        key, val = (x.strip() for x in line.split("=", 1))
        if key not in types:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, types[key], val)
    return TrainConfig(**values)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_config(config):
    return "".join(f"{k} = {v}\n" for k, v in asdict(config).items())


# ---------------------------------------------------------------- optimizer


class VelocityStore:
    def __init__(self, params):
        self.v = {name: np.zeros(p.shape) for name, p in params.items()}

    def __getitem__(self, name):
        return self.v[name]

    def arrays(self):
        return self.v

    def load_arrays(self, arrays):
        if set(arrays) != set(self.v):
            raise CheckpointError("velocity set does not match parameters")
        for k, arr in arrays.items():
            if arr.shape != self.v[k].shape:
                raise CheckpointError(f"velocity shape mismatch for {k}")
            self.v[k] = np.array(arr)


def momentum_sgd_step(params, grads, velocity, lr, momentum):
    """Polyak momentum: ``v <- mu*v - lr*g``, ``theta <- theta + v``."""
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros(p.shape)
        if not np.all(np.isfinite(g)):
            raise NamegenError(f"non-finite gradient for parameter {name!r}")
        v = velocity[name]
        if v.shape != p.shape or g.shape != p.shape:
            raise NamegenError(f"shape mismatch for parameter {name!r}")
        v *= momentum
        v -= lr * g
        p.data += v


def clip_gradients(grads, max_norm):
    if not max_norm or max_norm <= 0:
        return 1.0
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm:
        factor = max_norm / (total + 1e-12)
        for g in grads.values():
            g *= factor
        return factor
    return 1.0


# ---------------------------------------------------------------- loops


def _check_dataset(dataset, model):
    if len(dataset) == 0:
        raise DataError("training dataset is empty")
    if model.vocab_checksum is not None and dataset.vocab_checksum != model.vocab_checksum:
        raise DataError(
            f"vocabulary checksum mismatch: data {dataset.vocab_checksum}, "
            f"model {model.vocab_checksum}")


def epoch_order(n, seed, epoch):
    return np.random.default_rng([int(seed), int(epoch)]).permutation(n)


def train_epoch(dataset, model, velocity, config, epoch=0):
    """One pass over the shuffled data; returns the sum of per-batch mean losses."""
    _check_dataset(dataset, model)
    order = epoch_order(len(dataset), config.seed, epoch)
    lr = config.lr_at(epoch)
    params = model.store
    total = 0.0
    for start in range(0, len(order), config.batch_size):
        chunk = [dataset.examples[i] for i in order[start:start + config.batch_size]]
        batch = make_batch(chunk, model.config.vocab_size, model.config.use_copy)
        params.zero_grad()
        loss = loss_on_batch(model, batch)
        T.backpropagate(loss)
        grads = {name: p.grad for name, p in params.items() if p.grad is not None}
        clip_gradients(grads, config.grad_clip_norm)
        momentum_sgd_step(params, grads, velocity, lr, config.momentum)
        total += float(loss.data)
    params.zero_grad()
    return total


@dataclass
class TrainState:
    model: NameModel
    velocity: VelocityStore
    config: TrainConfig
    epoch: int = 0           # number of completed epochs
    losses: list = None

    def __post_init__(self):
        if self.losses is None:
            self.losses = []


def new_state(config, vocab, vocab_checksum=None):
    model = NameModel(config.model_config(len(vocab), vocab.num_labels), seed=config.seed)
    model.vocab_checksum = vocab_checksum if vocab_checksum is not None else vocab.checksum
    return TrainState(model, VelocityStore(model.store), config)


def fit(state, dataset, epochs=None, checkpoint_path=None, on_epoch=None):
    """Run until ``epochs`` total epochs are complete (default: the config's)."""
    target = state.config.epochs if epochs is None else epochs
    best, stale = math.inf, 0
    while state.epoch < target:
        loss = train_epoch(dataset, state.model, state.velocity, state.config, state.epoch)
        state.epoch += 1
        state.losses.append(loss)
        log.info("epoch %d loss %.6f", state.epoch, loss)
        if on_epoch is not None:
            on_epoch(state)
        interval = state.config.checkpoint_interval
        if checkpoint_path and interval and state.epoch % interval == 0:
            save_checkpoint(f"{checkpoint_path}.epoch{state.epoch:04d}", state)
        if state.config.patience:
            if loss < best - 1e-9:
                best, stale = loss, 0
            else:
                stale += 1
                if stale >= state.config.patience:
                    log.info("no improvement for %d epochs, stopping", stale)
                    break
    if checkpoint_path:
        save_checkpoint(checkpoint_path, state)
    return state


# ---------------------------------------------------------------- checkpoints


def save_checkpoint(path, state):
    """Parameters and velocities in one tensor file, training metadata in a JSON sidecar."""
    arrays = dict(state.model.store.arrays())
    arrays.update({VELOCITY_PREFIX + k: v for k, v in state.velocity.arrays().items()})
    meta = {
        "model_config": asdict(state.model.config),
        "vocab_checksum": state.model.vocab_checksum,
        "train_config": asdict(state.config),
        "epoch": state.epoch,
        "losses": state.losses,
    }
    save_tensors(path, arrays, state.model.seed, meta)
    tmp = f"{path}.json.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(dict(meta, seed=state.model.seed), fh, indent=2, sort_keys=True)
    os.replace(tmp, f"{path}.json")


def load_checkpoint(path):
    arrays, seed, meta = load_tensors(path)
    try:
        config = TrainConfig(**meta["train_config"])
        epoch = int(meta["epoch"])
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"{path}: missing training metadata ({exc})") from None
    params = {k: v for k, v in arrays.items() if not k.startswith(VELOCITY_PREFIX)}
    vel = {k[len(VELOCITY_PREFIX):]: v for k, v in arrays.items()
           if k.startswith(VELOCITY_PREFIX)}
    model = model_from_arrays(params, seed, meta)
    velocity = VelocityStore(model.store)
    velocity.load_arrays(vel)
    return TrainState(model, velocity, config, epoch, list(meta.get("losses", [])))
