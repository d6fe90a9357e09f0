"""Path encoder and attention decoder with a hierarchical copy mechanism.

Shapes use B (examples), N (paths in the batch), P (paths per example,
padded), J (leaf-subword slots per path), X (vocabulary size plus the
out-of-vocabulary input subwords of the batch).

Every step computes
    a_t     attention over paths from the decoder state s_t
    p_voc   softmax over the vocabulary from [sum_r a_r q_r; s_t]
    p_copy  sum over paths of a_r times a per-path softmax over its leaf
            subwords, scored against a context vector h_ctx
    p_gen   sigmoid gate mixing the two distributions
where the context of h_ctx and p_gen uses attention-weighted path summaries
for a_t and the cumulative attention g_t (fixed shapes regardless of path count).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import tensor as T
from .errors import CheckpointError, NamegenError, ValidationError
from .nn import LSTMParams, ParamStore, load_tensors, lstm_cell, save_tensors
from .paths import MAX_SUBWORDS
from .tensor import Tensor
from .vocab import EOS, MFS, PAD, SOS, UNK, restore_mfs

LOSS_FLOOR = 1e-12


@dataclass
class ModelConfig:
    vocab_size: int
    label_vocab_size: int
    embed_dim: int = 128
    encoder_dim: int = 128      # size of [h_fwd; h_bwd]; each direction gets half
    path_dim: int = 128
    decoder_dim: int = 320
    attention_dim: int = 128
    use_copy: bool = True
    max_len: int = 8

    def __post_init__(self):
        if self.encoder_dim % 2:
            raise ValidationError("encoder_dim must be even (two LSTM directions)")
        if self.vocab_size < 5:
            raise ValidationError("vocab_size must include the five special tokens")


@dataclass
class StepOutput:
    p_voc: np.ndarray
    p_copy: np.ndarray | None
    p_gen: np.ndarray | None
    p: np.ndarray
    a: np.ndarray
    g: np.ndarray
    b: np.ndarray | None = None


class NameModel:
    def __init__(self, config, seed=0):
        self.config = c = config
        self.store = s = ParamStore(seed)
        E, H, Q, S, A = c.embed_dim, c.encoder_dim // 2, c.path_dim, c.decoder_dim, c.attention_dim
        self.subword_embedding = s.create("subword_embedding", (c.vocab_size, E))
        self.label_embedding = s.create("label_embedding", (c.label_vocab_size, E))
        self.enc_fwd = LSTMParams.create(s, "encoder_fwd", E, H)
        self.enc_bwd = LSTMParams.create(s, "encoder_bwd", E, H)
        self.W_in = s.create("W_in", (2 * H + 2 * E, Q))
        self.W_init = s.create("W_init", (Q, S))
        self.dec = LSTMParams.create(s, "decoder", E, S)
        self.W_a = s.create("W_a", (S + Q, A))
        self.d_a = s.create("d_a", (A,))
        self.W_l = s.create("W_l", (Q + S, c.vocab_size))
        if c.use_copy:
            self.W_h = s.create("W_h", (Q, E))
            self.W_s = s.create("W_s", (S, E))
            self.W_x = s.create("W_x", (E, E))
            self.W_c = s.create("W_c", (Q, E))
            self.w_h = s.create("w_h", (Q,))
            self.w_s = s.create("w_s", (S,))
            self.w_x = s.create("w_x", (E,))
            self.w_c = s.create("w_c", (Q,))
        self.p_gen_override = None
        self.vocab_checksum = None

    @property
    def seed(self):
        return self.store.seed


# ---------------------------------------------------------------- batching


@dataclass
class Batch:
    size: int
    label_fwd: np.ndarray
    label_bwd: np.ndarray
    label_mask: np.ndarray
    left_ids: np.ndarray
    left_mask: np.ndarray
    right_ids: np.ndarray
    right_mask: np.ndarray
    path_index: np.ndarray
    path_mask: np.ndarray
    pos_ids: np.ndarray
    pos_mask: np.ndarray
    pos_ext: np.ndarray
    ext_size: int
    oov: list
    dec_in: np.ndarray | None = None
    targets: np.ndarray | None = None
    target_mask: np.ndarray | None = None
    examples: list = field(default_factory=list)


def _pad(rows, width, fill=0):
    out = np.full((len(rows), width), fill, dtype=np.int64)
    mask = np.zeros((len(rows), width))
    for i, r in enumerate(rows):
        out[i, :len(r)] = r
        mask[i, :len(r)] = 1.0
    return out, mask


def make_batch(examples, vocab_size, use_copy=True, with_targets=True):
    """Pack PreparedExamples into padded arrays and build the extended vocabulary."""
    if not examples:
        raise NamegenError("empty batch")
    B = len(examples)
    flat_left, flat_right, flat_labels = [], [], []
    counts = []
    for ex in examples:
        if ex.num_paths == 0:
            raise NamegenError(f"{ex.provenance}: example has no paths")
        if any(not ids for ids in ex.label_ids):
            raise NamegenError(f"{ex.provenance}: path with no node labels")
        counts.append(ex.num_paths)
        flat_left += ex.left_ids
        flat_right += ex.right_ids
        flat_labels += ex.label_ids
    Lmax = max(len(x) for x in flat_labels)
    label_fwd, label_mask = _pad(flat_labels, Lmax)
    label_bwd, _ = _pad([x[::-1] for x in flat_labels], Lmax)
    width = max(MAX_SUBWORDS, max(len(x) for x in flat_left + flat_right))
    left_ids, left_mask = _pad(flat_left, width)
    right_ids, right_mask = _pad(flat_right, width)

    P = max(counts)
    J = max(len(l) + len(r) for ex in examples for l, r in zip(ex.left, ex.right))
    path_index = np.zeros((B, P), dtype=np.int64)
    path_mask = np.zeros((B, P), dtype=bool)
    pos_ids = np.zeros((B, P, J), dtype=np.int64)
    pos_mask = np.zeros((B, P, J), dtype=bool)
    pos_ext = np.zeros((B, P, J), dtype=np.int64)
    pos_mask[:, :, 0] = True  # keeps softmax defined on padded paths (their a_r is 0)
    oov = []
    offset = 0
    for b, ex in enumerate(examples):
        ext = {}
        for r in range(ex.num_paths):
            path_index[b, r] = offset + r
            path_mask[b, r] = True
            surf = tuple(ex.left[r]) + tuple(ex.right[r])
            ids = list(ex.left_ids[r]) + list(ex.right_ids[r])
            pos_mask[b, r, :] = False
            for j, (w, i) in enumerate(zip(surf, ids)):
                pos_ids[b, r, j] = i
                pos_mask[b, r, j] = True
                if i == UNK:
                    if w not in ext:
                        ext[w] = vocab_size + len(ext)
                    pos_ext[b, r, j] = ext[w]
                else:
                    pos_ext[b, r, j] = i
        offset += ex.num_paths
        oov.append(list(ext))
    ext_size = vocab_size + max(len(o) for o in oov)

    batch = Batch(B, label_fwd, label_bwd, label_mask, left_ids, left_mask, right_ids,
                  right_mask, path_index, path_mask, pos_ids, pos_mask, pos_ext, ext_size, oov,
                  examples=list(examples))
    if with_targets:
        Tmax = max(len(ex.gold) for ex in examples) + 1
        dec_in = np.full((B, Tmax), PAD, dtype=np.int64)
        targets = np.full((B, Tmax), PAD, dtype=np.int64)
        tmask = np.zeros((B, Tmax))
        for b, ex in enumerate(examples):
            ext = {w: vocab_size + k for k, w in enumerate(oov[b])}
            tgt = []
            for w, i in zip(ex.gold, ex.gold_ids):
                if i == UNK and use_copy and w in ext:
                    tgt.append(ext[w])
                else:
                    tgt.append(i)
            tgt.append(EOS)
            n = len(tgt)
            targets[b, :n] = tgt
            tmask[b, :n] = 1.0
            dec_in[b, 0] = SOS
            dec_in[b, 1:n] = [t if t < vocab_size else UNK for t in tgt[:-1]]
        batch.dec_in, batch.targets, batch.target_mask = dec_in, targets, tmask
    return batch


# ---------------------------------------------------------------- encoder


def encode_leaf(model, subword_ids):
    """beta(leaf): sum of the leaf's subword embeddings."""
    ids = np.asarray(subword_ids, dtype=np.int64)
    if ids.size == 0:
        raise NamegenError("encode_leaf: leaf has no subwords")
    return T.sum_(T.embedding(model.subword_embedding, ids), axis=-2)


def _masked_leaf_sum(model, ids, mask):
    emb = T.embedding(model.subword_embedding, ids)
    return T.sum_(emb * mask[..., None], axis=-2)


def _run_lstm(model, params, label_ids, label_mask):
    n = label_ids.shape[0]
    H = params.hidden_size
    h = Tensor(np.zeros((n, H)))
    c = Tensor(np.zeros((n, H)))
    for t in range(label_ids.shape[1]):
        x = T.embedding(model.label_embedding, label_ids[:, t])
        h_new, c_new = lstm_cell(x, h, c, params)
        m = label_mask[:, t:t + 1]
        if m.all():
            h, c = h_new, c_new
        else:
            h = h + (h_new - h) * m
            c = c + (c_new - c) * m
    return h


def encode_paths(model, batch):
    """q for every path in the batch: tanh(W_in [gamma; beta(left); beta(right)]), shape (N, Q)."""
    h_fwd = _run_lstm(model, model.enc_fwd, batch.label_fwd, batch.label_mask)
    h_bwd = _run_lstm(model, model.enc_bwd, batch.label_bwd, batch.label_mask)
    beta_l = _masked_leaf_sum(model, batch.left_ids, batch.left_mask)
    beta_r = _masked_leaf_sum(model, batch.right_ids, batch.right_mask)
    return T.tanh(T.concat([h_fwd, h_bwd, beta_l, beta_r], axis=-1) @ model.W_in)


def encode_path(model, left_ids, label_ids, right_ids):
    """q for a single path given its id lists."""
    left_ids, lm = _pad([left_ids], max(1, len(left_ids)))
    right_ids, rm = _pad([right_ids], max(1, len(right_ids)))
    labels, labm = _pad([label_ids], len(label_ids))
    if not label_ids:
        raise NamegenError("encode_path: path has no node labels")
    bwd, _ = _pad([list(label_ids)[::-1]], len(label_ids))
    h_fwd = _run_lstm(model, model.enc_fwd, labels, labm)
    h_bwd = _run_lstm(model, model.enc_bwd, bwd, labm)
    beta_l = _masked_leaf_sum(model, left_ids, lm)
    beta_r = _masked_leaf_sum(model, right_ids, rm)
    q = T.tanh(T.concat([h_fwd, h_bwd, beta_l, beta_r], axis=-1) @ model.W_in)
    return T.reshape(q, (model.config.path_dim,))


# ---------------------------------------------------------------- decoder pieces


def weighted_sum(weights, q):
    """sum_r weights[..., r] * q[..., r, :]."""
    weights = T.as_tensor(weights)
    lead = weights.shape[:-1]
    P = weights.shape[-1]
    out = T.matmul(T.reshape(weights, lead + (1, P)), q)
    return T.reshape(out, lead + (q.shape[-1],))


def init_decoder(model, q, path_mask=None):
    """s_0 = W_init @ mean_r q_r. ``q`` is (..., P, Q)."""
    q = T.as_tensor(q)
    if q.shape[-2] == 0:
        raise NamegenError("init_decoder: no paths")
    if path_mask is None:
        mean_q = T.mean(q, axis=-2)
    else:
        m = np.asarray(path_mask, dtype=np.float64)
        w = m / m.sum(axis=-1, keepdims=True)
        mean_q = weighted_sum(Tensor(w), q)
    return mean_q @ model.W_init


def attention_step(model, s_t, q, path_mask=None, q_proj=None):
    """a_t[r] = softmax_r d_a . tanh(W_a [s_t; q_r])."""
    S = model.config.decoder_dim
    if q_proj is None:
        q_proj = T.as_tensor(q) @ model.W_a[S:]
    s_proj = T.as_tensor(s_t) @ model.W_a[:S]
    lead = s_proj.shape[:-1]
    u = T.tanh(q_proj + T.reshape(s_proj, lead + (1, s_proj.shape[-1])))
    scores = u @ model.d_a
    return T.softmax(scores, axis=-1, mask=path_mask)


def vocab_distribution(model, s_t, a_t, q):
    """p_voc = softmax(W_l [sum_r a_r q_r; s_t])."""
    ctx = weighted_sum(a_t, q)
    return T.softmax(T.concat([ctx, T.as_tensor(s_t)], axis=-1) @ model.W_l, axis=-1)


def _summaries(a_t, g_t, q):
    return weighted_sum(a_t, q), weighted_sum(g_t, q)


def copy_context(model, s_t, a_t, g_t, prev_embed, q):
    ctx_a, ctx_g = _summaries(a_t, g_t, q)
    return (ctx_a @ model.W_h + T.as_tensor(s_t) @ model.W_s
            + T.as_tensor(prev_embed) @ model.W_x + ctx_g @ model.W_c)


def copy_distribution(model, s_t, a_t, g_t, prev_embed, q, pos_emb, pos_mask, pos_ext, ext_size):
    """p_copy(w) = sum_r sum_{j: w_rj = w} a_r b_rj, with b_r a softmax over path r's subwords.

    ``pos_emb`` is (..., P, J, E) embeddings of each path's leaf subwords,
    ``pos_ext`` their extended-vocabulary ids. Returns ``(p_copy, b)``.
    """
    h_ctx = copy_context(model, s_t, a_t, g_t, prev_embed, q)
    lead = pos_emb.shape[:-3]
    P, J, E = pos_emb.shape[-3:]
    flat = T.reshape(pos_emb, lead + (P * J, E))
    scores = T.reshape(T.matmul(flat, T.reshape(h_ctx, lead + (E, 1))), lead + (P, J))
    b = T.softmax(scores, axis=-1, mask=pos_mask)
    a = T.as_tensor(a_t)
    vals = T.reshape(T.reshape(a, lead + (P, 1)) * b, lead + (P * J,))
    ext = np.broadcast_to(pos_ext, lead + (P, J)).reshape(lead + (P * J,))
    return T.scatter_add(vals, ext, ext_size), b


def gen_gate(model, s_t, a_t, g_t, prev_embed, q):
    """p_gen = sigmoid(w_h . sum a q + w_s . s_t + w_x . e_prev + w_c . sum g q)."""
    ctx_a, ctx_g = _summaries(a_t, g_t, q)
    z = (ctx_a @ model.w_h + T.as_tensor(s_t) @ model.w_s
         + T.as_tensor(prev_embed) @ model.w_x + ctx_g @ model.w_c)
    return T.sigmoid(z)


def mix_step(p_voc, p_copy, p_gen):
    """p = p_gen * p_voc + (1 - p_gen) * p_copy over the extended vocabulary."""
    p_voc, p_copy, p_gen = T.as_tensor(p_voc), T.as_tensor(p_copy), T.as_tensor(p_gen)
    extra = p_copy.shape[-1] - p_voc.shape[-1]
    if extra < 0:
        raise NamegenError("mix_step: copy distribution smaller than vocabulary")
    if extra:
        p_voc = T.concat([p_voc, Tensor(np.zeros(p_voc.shape[:-1] + (extra,)))], axis=-1)
    gate = T.reshape(p_gen, p_gen.shape + (1,))
    return gate * p_voc + (1.0 - gate) * p_copy


# ---------------------------------------------------------------- full passes


@dataclass
class Encoded:
    q: Tensor            # (B, P, Q)
    path_mask: np.ndarray
    q_proj: Tensor       # (B, P, A)
    pos_emb: Tensor      # (B, P, J, E)
    pos_mask: np.ndarray
    pos_ext: np.ndarray
    ext_size: int

    def select(self, rows):
        """Rows of every batch-indexed field (used to fan out beam hypotheses)."""
        return Encoded(self.q[rows], self.path_mask[rows], self.q_proj[rows],
                       self.pos_emb[rows], self.pos_mask[rows], self.pos_ext[rows],
                       self.ext_size)


def encode_batch(model, batch):
    q_flat = encode_paths(model, batch)
    q = T.embedding(q_flat, batch.path_index)
    S = model.config.decoder_dim
    q_proj = q @ model.W_a[S:]
    pos_emb = T.embedding(model.subword_embedding, batch.pos_ids)
    return Encoded(q, batch.path_mask, q_proj, pos_emb, batch.pos_mask, batch.pos_ext,
                   batch.ext_size)


def decoder_step(model, enc, s, c, g, prev_ids):
    """Advance one step; returns ``(s, c, g_next, p, parts)``."""
    prev_ids = np.where(prev_ids < model.config.vocab_size, prev_ids, UNK)
    e = T.embedding(model.subword_embedding, prev_ids)
    s, c = lstm_cell(e, s, c, model.dec)
    a = attention_step(model, s, enc.q, enc.path_mask, q_proj=enc.q_proj)
    p_voc = vocab_distribution(model, s, a, enc.q)
    parts = {"a": a, "g": g, "p_voc": p_voc}
    if model.config.use_copy:
        p_copy, b = copy_distribution(model, s, a, g, e, enc.q, enc.pos_emb, enc.pos_mask,
                                      enc.pos_ext, enc.ext_size)
        if model.p_gen_override is None:
            p_gen = gen_gate(model, s, a, g, e, enc.q)
        else:
            p_gen = Tensor(np.full(s.shape[:-1], float(model.p_gen_override)))
        p = mix_step(p_voc, p_copy, p_gen)
        parts.update(p_copy=p_copy, p_gen=p_gen, b=b)
    else:
        p = p_voc
    return s, c, g + a, p, parts


def initial_state(model, enc):
    s = init_decoder(model, enc.q, enc.path_mask)
    c = Tensor(np.zeros(s.shape))
    g = Tensor(np.zeros(enc.path_mask.shape))
    return s, c, g


def _to_step_output(parts, p):
    def arr(key):
        v = parts.get(key)
        return None if v is None else np.array(v.data)
    return StepOutput(p_voc=arr("p_voc"), p_copy=arr("p_copy"), p_gen=arr("p_gen"),
                      p=np.array(p.data), a=arr("a"), g=arr("g"), b=arr("b"))


def loss_on_batch(model, batch, collect=False):
    """Teacher-forced loss: mean over examples of mean -log p(gold) over gold steps incl. EOS."""
    if batch.targets is None:
        raise NamegenError("batch built without targets")
    enc = encode_batch(model, batch)
    s, c, g = initial_state(model, enc)
    total = None
    steps = []
    lengths = batch.target_mask.sum(axis=1)
    for t in range(batch.targets.shape[1]):
        s, c, g_next, p, parts = decoder_step(model, enc, s, c, g, batch.dec_in[:, t])
        if collect:
            steps.append(_to_step_output(parts, p))
        g = g_next
        picked = T.clamp_min(T.pick(p, batch.targets[:, t]), LOSS_FLOOR)
        w = batch.target_mask[:, t] / lengths
        term = T.sum_(T.log(picked) * w)
        total = term if total is None else total + term
    loss = T.scale(total, -1.0 / batch.size)
    return (loss, steps) if collect else loss


def example_loss(model, examples):
    return loss_on_batch(model, make_batch(examples, model.config.vocab_size,
                                           model.config.use_copy))


# ---------------------------------------------------------------- decoding


def _surface(ext_id, vocab, oov):
    V = len(vocab)
    return vocab.id_to_subword[ext_id] if ext_id < V else oov[ext_id - V]


def _banned(examples):
    """(B, 3) ids that must never be emitted: PAD, SOS, and MFS when nothing can restore it.

    Examples that do have an MFS original repeat PAD in the third slot.
    """
    return np.array([[PAD, SOS, MFS if ex.mfs_original is None else PAD] for ex in examples])


def _mask_outputs(p, banned):
    p = np.array(p)
    np.put_along_axis(p, banned, 0.0, axis=-1)
    return p


def greedy_decode(model, examples, vocab, max_len=None, restore=True):
    """Greedy decoding of several examples in parallel; returns lists of surface subwords."""
    max_len = model.config.max_len if max_len is None else max_len
    if max_len < 1:
        raise NamegenError("max_len must be >= 1")
    _check_vocab(model, vocab)
    batch = make_batch(examples, len(vocab), model.config.use_copy, with_targets=False)
    outputs = [[] for _ in examples]
    banned = _banned(examples)
    done = np.zeros(len(examples), dtype=bool)
    with T.no_grad():
        enc = encode_batch(model, batch)
        s, c, g = initial_state(model, enc)
        prev = np.full(len(examples), SOS, dtype=np.int64)
        for _ in range(max_len):
            s, c, g, p, _parts = decoder_step(model, enc, s, c, g, prev)
            choice = np.argmax(_mask_outputs(p.data, banned), axis=-1)
            for b, w in enumerate(choice):
                if done[b]:
                    continue
                if w == EOS:
                    done[b] = True
                else:
                    outputs[b].append(int(w))
            if done.all():
                break
            prev = choice
    result = [[_surface(w, vocab, batch.oov[b]) for w in out] for b, out in enumerate(outputs)]
    if restore:
        result = [restore_mfs(r, ex.mfs_original) for r, ex in zip(result, examples)]
    return result


def beam_decode(model, example, vocab, beam_size=4, max_len=None, restore=True):
    """Beam search ranked by summed log-probability; finished hypotheses end with EOS."""
    max_len = model.config.max_len if max_len is None else max_len
    if max_len < 1:
        raise NamegenError("max_len must be >= 1")
    if beam_size < 1:
        raise NamegenError("beam_size must be >= 1")
    _check_vocab(model, vocab)
    batch = make_batch([example], len(vocab), model.config.use_copy, with_targets=False)
    banned = _banned([example])
    with T.no_grad():
        enc0 = encode_batch(model, batch)
        s, c, g = initial_state(model, enc0)
        hyps = [(0.0, [])]
        finished = []
        rows = np.zeros(1, dtype=np.int64)
        for _ in range(max_len):
            enc = enc0.select(rows)
            prev = np.array([h[1][-1] if h[1] else SOS for h in hyps], dtype=np.int64)
            s, c, g, p, _parts = decoder_step(model, enc, s, c, g, prev)
            probs = _mask_outputs(p.data, np.repeat(banned, len(hyps), axis=0))
            with np.errstate(divide="ignore"):
                logp = np.log(probs)
            scores = np.array([h[0] for h in hyps])[:, None] + logp
            order = np.argsort(-scores, axis=None, kind="stable")[:beam_size]
            new_hyps, keep = [], []
            for flat in order:
                h_i, w = divmod(int(flat), scores.shape[1])
                sc = float(scores[h_i, w])
                if w == EOS:
                    finished.append((sc, hyps[h_i][1]))
                else:
                    new_hyps.append((sc, hyps[h_i][1] + [w]))
                    keep.append(h_i)
            if not new_hyps:
                break
            if finished and max(f[0] for f in finished) >= new_hyps[0][0]:
                break
            keep = np.array(keep, dtype=np.int64)
            s, c, g = s[keep], c[keep], g[keep]
            rows = np.zeros(len(keep), dtype=np.int64)
            hyps = new_hyps
        else:
            finished.extend(hyps)
        if not finished:
            finished = hyps
    best = max(finished, key=lambda h: h[0])[1]
    out = [_surface(w, vocab, batch.oov[0]) for w in best]
    return restore_mfs(out, example.mfs_original) if restore else out


def decode(model, example, vocab, mode="greedy", beam_size=4, max_len=None, restore=True):
    if mode == "greedy":
        return greedy_decode(model, [example], vocab, max_len, restore)[0]
    if mode == "beam":
        return beam_decode(model, example, vocab, beam_size, max_len, restore)
    raise NamegenError(f"unknown decode mode {mode!r}")


def _check_vocab(model, vocab):
    if len(vocab) != model.config.vocab_size:
        raise NamegenError(
            f"vocabulary size {len(vocab)} does not match model ({model.config.vocab_size})")


# ---------------------------------------------------------------- checkpoints


def save_model(path, model, extra=None):
    """Tensor file at ``path`` plus a JSON sidecar ``path + '.json'`` of hyperparameters."""
    meta = {"model_config": asdict(model.config), "vocab_checksum": model.vocab_checksum}
    save_tensors(path, model.store.arrays(), model.seed, meta)
    sidecar = dict(meta, seed=model.seed, **(extra or {}))
    with open(f"{path}.json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)


def model_from_arrays(arrays, seed, meta):
    try:
        config = ModelConfig(**meta["model_config"])
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"checkpoint lacks a valid model config: {exc}") from None
    model = NameModel(config, seed)
    model.store.load_arrays({k: v for k, v in arrays.items() if k in model.store})
    model.vocab_checksum = meta.get("vocab_checksum")
    return model


def load_model(path):
    arrays, seed, meta = load_tensors(path)
    return model_from_arrays(arrays, seed, meta)

