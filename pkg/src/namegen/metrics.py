"""Subword F1, clipped F1**, exact match, frequency buckets and paired bootstrap.

Two overlap counts are used throughout:

* unclipped (F1): precision counts predicted tokens that occur anywhere in
  the gold name, recall counts gold tokens that occur anywhere in the
  prediction, so repeating a correct subword never lowers precision;
* clipped (F1**): both sides use ``sum_w min(count_pred(w), count_gold(w))``.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DataError, ValidationError

N_BUCKETS = 20


@dataclass
class Prediction:
    predicted: list
    gold: list
    id: str = ""

    def __post_init__(self):
        if not self.gold:
            raise ValidationError(f"prediction {self.id!r} has an empty gold name")


def _harmonic(p, r):
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def unclipped_counts(pred, gold):
    """(pred tokens found in gold, gold tokens found in pred)."""
    gs, ps = set(gold), set(pred)
    return sum(w in gs for w in pred), sum(w in ps for w in gold)


def clipped_overlap(pred, gold):
    cp, cg = Counter(pred), Counter(gold)
    return sum(min(c, cg[w]) for w, c in cp.items())


def precision_recall(pred, gold, clipped):
    if not pred:
        return 0.0, 0.0
    if clipped:
        ov = clipped_overlap(pred, gold)
        return ov / len(pred), ov / len(gold)
    tp_p, tp_r = unclipped_counts(pred, gold)
    return tp_p / len(pred), tp_r / len(gold)


def subword_f1(pred, gold):
    return _harmonic(*precision_recall(pred, gold, clipped=False))


def modified_f1(pred, gold):
    return _harmonic(*precision_recall(pred, gold, clipped=True))


def exact_accuracy(predictions):
    if not predictions:
        raise DataError("exact_accuracy needs at least one prediction")
    return sum(list(p.predicted) == list(p.gold) for p in predictions) / len(predictions)


# ---------------------------------------------------------------- corpus report


@dataclass
class EvalReport:
    f1: float | None
    f1_star_star: float | None
    accuracy: float | None
    precision: float | None = None
    recall: float | None = None
    precision_clipped: float | None = None
    recall_clipped: float | None = None
    macro_f1: float | None = None
    macro_f1_star_star: float | None = None
    n_examples: int = 0
    counts: dict = field(default_factory=dict)

    def to_json(self):
        return asdict(self)


def _sufficient_stats(predictions, keep=None):
    """Per-example arrays: unclipped tp (pred side), tp (gold side), clipped overlap, lengths."""
    rows = []
    for p in predictions:
        pred = [w for w in p.predicted if keep is None or keep(w)]
        gold = [w for w in p.gold if keep is None or keep(w)]
        tp_p, tp_r = unclipped_counts(pred, gold)
        rows.append((tp_p, tp_r, clipped_overlap(pred, gold), len(pred), len(gold),
                     float(list(p.predicted) == list(p.gold))))
    return np.array(rows, dtype=np.float64).reshape(-1, 6)


def _ratio(num, den):
    return np.where(den > 0, num / np.where(den > 0, den, 1), 0.0)


def evaluate(predictions, keep=None, accuracy_rows=None):
    """Micro-averaged headline metrics plus macro per-example F1 / F1**.

    ``keep`` restricts token counting to subwords it accepts; ``accuracy_rows``
    (boolean mask) restricts which examples enter the accuracy.
    """
    if not predictions:
        raise DataError("no predictions to evaluate")
    stats = _sufficient_stats(predictions, keep)
    tp_p, tp_r, ov, n_pred, n_gold = stats[:, :5].sum(axis=0)
    if n_gold == 0:
        return EvalReport(None, None, None, n_examples=len(predictions))
    prec = float(_ratio(tp_p, n_pred))
    rec = float(tp_r / n_gold)
    pc = float(_ratio(ov, n_pred))
    rc = float(ov / n_gold)
    rows = np.ones(len(predictions), dtype=bool) if accuracy_rows is None else accuracy_rows
    acc = float(stats[rows, 5].mean()) if rows.any() else None
    have_gold = stats[:, 4] > 0
    per_p = _ratio(stats[:, 0], stats[:, 3])
    per_r = _ratio(stats[:, 1], stats[:, 4])
    per_pc = _ratio(stats[:, 2], stats[:, 3])
    per_rc = _ratio(stats[:, 2], stats[:, 4])
    macro = np.array([_harmonic(a, b) for a, b in zip(per_p, per_r)])[have_gold]
    macro_c = np.array([_harmonic(a, b) for a, b in zip(per_pc, per_rc)])[have_gold]
    return EvalReport(
        f1=_harmonic(prec, rec), f1_star_star=_harmonic(pc, rc), accuracy=acc,
        precision=prec, recall=rec, precision_clipped=pc, recall_clipped=rc,
        macro_f1=float(macro.mean()), macro_f1_star_star=float(macro_c.mean()),
        n_examples=len(predictions),
        counts={"tp_pred": int(tp_p), "tp_gold": int(tp_r), "clipped_overlap": int(ov),
                "pred_tokens": int(n_pred), "gold_tokens": int(n_gold)},
    )


# ---------------------------------------------------------------- frequency analysis


@dataclass
class Bucket:
    subwords: list
    max_frequency: int
    min_frequency: int
    f_star_star: float


@dataclass
class BucketReport:
    buckets: list
    underfilled: bool = False

    def to_json(self):
        return {"underfilled": self.underfilled,
                "buckets": [{"max_frequency": b.max_frequency, "min_frequency": b.min_frequency,
                             "size": len(b.subwords), "f_star_star": b.f_star_star}
                            for b in self.buckets]}


def bucketed_scores(predictions, train_frequency, n_buckets=N_BUCKETS):
    """F** per frequency class of the gold subwords (most frequent class first).

    Distinct gold subwords are sorted by training frequency (descending, ties
    lexicographic) and cut into ``n_buckets`` near-equal classes, the
    remainder going to the earliest classes. Each class's F** counts only
    tokens belonging to that class.
    """
    vocab = sorted({w for p in predictions for w in p.gold},
                   key=lambda w: (-train_frequency.get(w, 0), w))
    n = len(vocab)
    k = min(n_buckets, n)
    base, extra = divmod(n, k) if k else (0, 0)
    buckets, start = [], 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        members = vocab[start:start + size]
        start += size
        cls = set(members)
        rep = evaluate(predictions, keep=cls.__contains__)
        freqs = [train_frequency.get(w, 0) for w in members]
        buckets.append(Bucket(members, max(freqs), min(freqs), rep.f1_star_star or 0.0))
    return BucketReport(buckets, underfilled=n < n_buckets)


def low_frequency_slice(predictions, train_frequency, threshold_pct):
    """Metrics counting only subwords whose training relative frequency is below the threshold.

    Accuracy covers only examples whose gold contains at least one such subword.
    Returns None when no gold subword qualifies.
    """
    total = sum(train_frequency.values())

    def rare(w):
        return total == 0 or 100.0 * train_frequency.get(w, 0) / total < threshold_pct

    rows = np.array([any(rare(w) for w in p.gold) for p in predictions])
    if not rows.any():
        return None
    return evaluate(predictions, keep=rare, accuracy_rows=rows)


# ---------------------------------------------------------------- significance


METRICS = ("f1", "f1**", "accuracy")


def _metric_from_stats(stats, metric):
    """Vectorised corpus metric; ``stats`` is (..., n_examples, 6)."""
    s = stats.sum(axis=-2)
    tp_p, tp_r, ov, n_pred, n_gold, exact = (s[..., i] for i in range(6))
    if metric == "accuracy":
        return exact / stats.shape[-2]
    if metric == "f1":
        p, r = _ratio(tp_p, n_pred), _ratio(tp_r, n_gold)
    elif metric == "f1**":
        p, r = _ratio(ov, n_pred), _ratio(ov, n_gold)
    else:
        raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}")
    return np.where(p + r > 0, 2 * p * r / np.where(p + r > 0, p + r, 1), 0.0)


def corpus_metric(predictions, metric):
    return float(_metric_from_stats(_sufficient_stats(predictions), metric))


def paired_bootstrap(system_a, system_b, metric="f1**", n_resamples=10_000, seed=0):
    """One-sided p-value for "system_b is at least as good as system_a".

    Each resample draws test examples with replacement (same indices for both
    systems) and scores both. Resamples where b beats a count 1, ties count
    1/2, so identical systems give exactly 0.5. ``metric`` is one of
    ``f1``, ``f1**``, ``accuracy`` or a callable over a list of Predictions.
    """
    if len(system_a) != len(system_b) or not system_a:
        raise DataError("paired_bootstrap needs two non-empty systems of equal size")
    for pa, pb in zip(system_a, system_b):
        if pa.id != pb.id or list(pa.gold) != list(pb.gold):
            raise DataError(f"systems evaluated on different examples ({pa.id!r} vs {pb.id!r})")
    if n_resamples < 1:
        raise ValueError("n_resamples must be >= 1")
    rng = np.random.default_rng(seed)
    n = len(system_a)
    worse = 0.0
    if callable(metric):
        for _ in range(n_resamples):
            idx = rng.integers(0, n, size=n)
            ma = metric([system_a[i] for i in idx])
            mb = metric([system_b[i] for i in idx])
            worse += 1.0 if ma < mb else 0.5 if ma == mb else 0.0
        return worse / n_resamples
    sa, sb = _sufficient_stats(system_a), _sufficient_stats(system_b)
    chunk = max(1, min(500, 2_000_000 // n))
    done = 0
    while done < n_resamples:
        m = min(chunk, n_resamples - done)
        idx = rng.integers(0, n, size=(m, n))
        ma = _metric_from_stats(sa[idx], metric)
        mb = _metric_from_stats(sb[idx], metric)
        worse += float(np.sum(ma < mb) + 0.5 * np.sum(ma == mb))
        done += m
    return worse / n_resamples


# ---------------------------------------------------------------- files


def read_predictions(path):
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append(Prediction(list(rec["pred"]), list(rec["gold"]), str(rec.get("id", ""))))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad prediction record ({exc})") from None
    if not out:
        raise DataError(f"{path}: no predictions")
    return out


def write_predictions(path, predictions):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in predictions:
            fh.write(json.dumps({"pred": p.predicted, "gold": p.gold, "id": p.id},
                                ensure_ascii=False) + "\n")


def summary_table(rows):
    """Plain-text table with F1 / F1** / Acc columns; ``rows`` is [(name, EvalReport)]."""
    def pct(x):
        return "   -  " if x is None else f"{100 * x:6.2f}"

    width = max([len("Model")] + [len(name) for name, _ in rows])
    lines = [f"{'Model':<{width}}  {'F1':>6}  {'F1**':>6}  {'Acc':>6}"]
    for name, rep in rows:
        lines.append(f"{name:<{width}}  {pct(rep.f1)}  {pct(rep.f1_star_star)}  "
                     f"{pct(rep.accuracy)}")
    return "\n".join(lines)
