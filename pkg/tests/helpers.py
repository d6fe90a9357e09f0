"""Shared builders for model-level tests."""

import numpy as np

from namegen.model import ModelConfig, NameModel
from namegen.vocab import MFS, MFS_TOKEN, SPECIALS, UNK, PreparedExample, Vocabulary

TINY = dict(embed_dim=6, encoder_dim=4, path_dim=5, decoder_dim=7, attention_dim=3)


def tiny_vocab(n_words=12, n_labels=4):
    words = [(f"w{i}", n_words - i) for i in range(n_words)]
    labels = [(f"L{i}", 1) for i in range(n_labels)]
    return Vocabulary(words, labels)


def tiny_model(vocab, seed=0, use_copy=True, **dims):
    cfg = ModelConfig(len(vocab), vocab.num_labels, use_copy=use_copy, **{**TINY, **dims})
    model = NameModel(cfg, seed)
    model.vocab_checksum = vocab.checksum
    return model


def random_example(rng, vocab, n_paths=None, oov_rate=0.3, gold_len=None, with_mfs=False,
                   name="ex"):
    """Random but valid PreparedExample; OOV surfaces are encoded as UNK."""
    n_real = len(vocab) - len(SPECIALS)
    oov_pool = [f"oov{k}" for k in range(4)]

    def subword():
        if rng.random() < oov_rate:
            return oov_pool[rng.integers(len(oov_pool))]
        return vocab.id_to_subword[len(SPECIALS) + rng.integers(n_real)]

    def leaf():
        return tuple(subword() for _ in range(rng.integers(1, 4)))

    n_paths = n_paths or int(rng.integers(1, 6))
    left = [leaf() for _ in range(n_paths)]
    right = [leaf() for _ in range(n_paths)]
    labels = [tuple(vocab.id_to_label[2 + rng.integers(vocab.num_labels - 2)]
                    for _ in range(rng.integers(1, 5))) for _ in range(n_paths)]
    gold = [subword() for _ in range(gold_len or int(rng.integers(1, 4)))]
    mfs_original = None
    if with_mfs:
        target = left[0][0]
        mfs_original = target
        left = [tuple(MFS_TOKEN if w == target else w for w in p) for p in left]
        right = [tuple(MFS_TOKEN if w == target else w for w in p) for p in right]
        gold = [MFS_TOKEN if w == target else w for w in gold]

    def enc(ws):
        return [MFS if w == MFS_TOKEN else vocab.subword_to_id.get(w, UNK) for w in ws]

    return PreparedExample(
        gold=gold, gold_ids=enc(gold), left=left, right=right,
        left_ids=[enc(p) for p in left], right_ids=[enc(p) for p in right],
        label_ids=[[vocab.label_id(x) for x in lab] for lab in labels], labels=labels,
        mfs_original=mfs_original, provenance=name)


def input_surfaces(example):
    return {w for p in example.left + example.right for w in p}


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def softmax(x, mask=None):
    if mask is not None:
        x = np.where(mask, x, -np.inf)
    e = np.exp(x - x.max())
    return e / e.sum()


def reference_forward(model, ex, dec_inputs):
    """Independent single-example numpy forward; returns per-step dicts with p over the
    extended vocabulary keyed by surface string."""
    P = {k: v.data for k, v in model.store.items()}
    cfg = model.config
    Vn, S = cfg.vocab_size, cfg.decoder_dim
    H = cfg.encoder_dim // 2
    E = P["subword_embedding"]

    def lstm(x, h, c, W, b):
        z = np.concatenate([x, h]) @ W + b
        hs = h.shape[0]
        i, f = sigmoid(z[:hs]), sigmoid(z[hs:2 * hs])
        g, o = np.tanh(z[2 * hs:3 * hs]), sigmoid(z[3 * hs:])
        c = f * c + i * g
        return o * np.tanh(c), c

    def run(labels, prefix):
        h, c = np.zeros(H), np.zeros(H)
        for lab in labels:
            h, c = lstm(P["label_embedding"][lab], h, c, P[f"{prefix}.W"], P[f"{prefix}.b"])
        return h

    q = []
    for lids, labs, rids in zip(ex.left_ids, ex.label_ids, ex.right_ids):
        gamma = np.concatenate([run(labs, "encoder_fwd"), run(labs[::-1], "encoder_bwd")])
        beta_l, beta_r = E[lids].sum(0), E[rids].sum(0)
        q.append(np.tanh(np.concatenate([gamma, beta_l, beta_r]) @ P["W_in"]))
    q = np.array(q)

    oov = []
    for l, r, li, ri in zip(ex.left, ex.right, ex.left_ids, ex.right_ids):
        for w, i in zip(l + r, list(li) + list(ri)):
            if i == UNK and w not in oov:
                oov.append(w)

    s, c = q.mean(0) @ P["W_init"], np.zeros(S)
    g = np.zeros(len(q))
    steps = []
    for prev in dec_inputs:
        e = E[prev]
        s, c = lstm(e, s, c, P["decoder.W"], P["decoder.b"])
        scores = np.array([np.tanh(np.concatenate([s, qr]) @ P["W_a"]) @ P["d_a"] for qr in q])
        a = softmax(scores)
        ctx = a @ q
        p_voc = softmax(np.concatenate([ctx, s]) @ P["W_l"])
        out = {"a": a, "p_voc": p_voc}
        if cfg.use_copy:
            ctx_g = g @ q
            h_ctx = ctx @ P["W_h"] + s @ P["W_s"] + e @ P["W_x"] + ctx_g @ P["W_c"]
            p_gen = sigmoid(ctx @ P["w_h"] + s @ P["w_s"] + e @ P["w_x"] + ctx_g @ P["w_c"])
            if model.p_gen_override is not None:
                p_gen = model.p_gen_override
            p = {}
            for w in range(Vn):
                p[("v", w)] = p_gen * p_voc[w]
            for r, (l, rr, li, ri) in enumerate(zip(ex.left, ex.right, ex.left_ids, ex.right_ids)):
                ids = list(li) + list(ri)
                b = softmax(E[ids] @ h_ctx)
                for j, (w, i) in enumerate(zip(l + rr, ids)):
                    key = ("v", i) if i != UNK else ("o", w)
                    p[key] = p.get(key, 0.0) + (1 - p_gen) * a[r] * b[j]
            out.update(p=p, p_gen=p_gen, oov=oov)
        else:
            out.update(p={("v", w): p_voc[w] for w in range(Vn)}, oov=[])
        steps.append(out)
        g = g + a
    return steps
