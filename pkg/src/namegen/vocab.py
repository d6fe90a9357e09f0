"""Vocabularies, the MFS placeholder, id encoding and corpus statistics."""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field, replace

from .errors import DataError, InvariantError, ValidationError
from .paths import PathBag, PathRecord, escape, unescape

PAD, UNK, SOS, EOS, MFS = 0, 1, 2, 3, 4
SPECIALS = ("<PAD>", "<UNK>", "<SOS>", "<EOS>", "<MFS>")
MFS_TOKEN = SPECIALS[MFS]
LABEL_SPECIALS = ("<PAD>", "<UNK>")
FORMAT_VERSION = 1


class Vocabulary:
    """Subword and node-label id maps. Special subword ids are fixed at 0..4."""

    def __init__(self, subword_counts, label_counts, min_count=1, max_size=None):
        self.min_count = int(min_count)
        self.max_size = max_size
        self.id_to_subword = list(SPECIALS)
        self.counts = [0] * len(SPECIALS)
        for w, c in subword_counts:
            self.id_to_subword.append(w)
            self.counts.append(int(c))
        self.subword_to_id = {w: i for i, w in enumerate(self.id_to_subword)}
        if len(self.subword_to_id) != len(self.id_to_subword):
            raise ValidationError("vocabulary contains duplicate subwords")
        self.id_to_label = list(LABEL_SPECIALS)
        self.label_counts = [0] * len(LABEL_SPECIALS)
        for lab, c in label_counts:
            self.id_to_label.append(lab)
            self.label_counts.append(int(c))
        self.label_to_id = {lab: i for i, lab in enumerate(self.id_to_label)}

    def __len__(self):
        return len(self.id_to_subword)

    @property
    def num_labels(self):
        return len(self.id_to_label)

    def id(self, subword):
        return self.subword_to_id.get(subword, UNK)

    def encode(self, subwords):
        return [self.id(w) for w in subwords]

    def decode(self, ids):
        return [self.id_to_subword[i] for i in ids]

    def label_id(self, label):
        return self.label_to_id.get(label, UNK)

    def frequency_table(self):
        return {w: c for w, c in zip(self.id_to_subword, self.counts) if w not in SPECIALS}

    def to_text(self):
        lines = [f"# namegen-vocab v{FORMAT_VERSION} min_count={self.min_count} "
                 f"max_size={self.max_size}"]
        lines += [f"{escape(w)}\t{i}\t{c}"
                  for i, (w, c) in enumerate(zip(self.id_to_subword, self.counts))]
        lines.append("[labels]")
        lines += [f"{escape(lab)}\t{i}\t{c}"
                  for i, (lab, c) in enumerate(zip(self.id_to_label, self.label_counts))]
        return "\n".join(lines) + "\n"

    @property
    def checksum(self):
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()[:16]

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text):
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# namegen-vocab"):
            raise DataError("not a vocabulary file")
        header = dict(kv.split("=", 1) for kv in lines[0].split()[3:])
        subs, labels = [], []
        section = subs
        for lineno, line in enumerate(lines[1:], 2):
            if line == "[labels]":
                section = labels
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"vocabulary line {lineno}: expected 3 TAB-separated fields")
            w, i, c = unescape(parts[0]), int(parts[1]), int(parts[2])
            if i != len(section):
                raise DataError(f"vocabulary line {lineno}: ids must be consecutive")
            section.append((w, c))
        if [w for w, _ in subs[:len(SPECIALS)]] != list(SPECIALS):
            raise DataError("vocabulary does not start with the special tokens")
        max_size = None if header.get("max_size", "None") == "None" else int(header["max_size"])
        return cls(subs[len(SPECIALS):], labels[len(LABEL_SPECIALS):],
                   int(header.get("min_count", 1)), max_size)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def _input_subwords(bag):
    for p in bag.paths:
        yield from p.left_subwords
        yield from p.right_subwords


def build_vocab(corpus, min_count=1, max_size=None):
    """Rank subwords by descending count (ties lexicographic); names and inputs share one table.

    Counts are taken over every leaf occurrence in every path plus every gold
    subword. ``max_size`` includes the five special tokens.
    """
    if not corpus:
        raise DataError("cannot build a vocabulary from an empty corpus")
    counts, label_counts = Counter(), Counter()
    for rec in corpus:
        counts.update(rec.gold)
        counts.update(_input_subwords(rec.bag))
        for p in rec.bag.paths:
            label_counts.update(p.node_labels)
    for s in SPECIALS:
        counts.pop(s, None)
    ranked = sorted(((w, c) for w, c in counts.items() if c >= min_count),
                    key=lambda wc: (-wc[1], wc[0]))
    if max_size is not None:
        ranked = ranked[:max(0, max_size - len(SPECIALS))]
    labels = sorted(label_counts.items(), key=lambda lc: (-lc[1], lc[0]))
    return Vocabulary(ranked, labels, min_count, max_size)


# ---------------------------------------------------------------- MFS placeholder


def most_frequent_subword(bag):
    """Most frequent input leaf subword; ties go to the earliest occurrence."""
    counts = Counter()
    first = {}
    for k, w in enumerate(_input_subwords(bag)):
        counts[w] += 1
        first.setdefault(w, k)
    if not counts:
        return None
    return min(counts, key=lambda w: (-counts[w], first[w]))


def apply_mfs_replacement(record):
    """Replace the example's most frequent input subword with MFS in inputs and gold."""
    target = most_frequent_subword(record.bag)
    if target is None:
        raise DataError(f"{record.provenance}: example has no input subwords")

    def sub(ws):
        return tuple(MFS_TOKEN if w == target else w for w in ws)

    paths = [replace(p, left_subwords=sub(p.left_subwords), right_subwords=sub(p.right_subwords))
             for p in record.bag.paths]
    bag = PathBag(paths, record.bag.total_before_sampling, record.bag.function_ref)
    return PathRecord(list(sub(record.gold)), bag, record.provenance, mfs_original=target)


def restore_mfs(output_subwords, mfs_original):
    if MFS_TOKEN not in output_subwords:
        return list(output_subwords)
    if mfs_original is None:
        raise InvariantError("output contains MFS but the example has no recorded original")
    return [mfs_original if w == MFS_TOKEN else w for w in output_subwords]


# ---------------------------------------------------------------- encoding


@dataclass
class PreparedExample:
    """One id-encoded example. Surface strings are kept for copying OOV subwords."""

    gold: list
    gold_ids: list
    left: list            # per path: tuple of surface subwords
    right: list
    left_ids: list        # per path: list of subword ids
    right_ids: list
    label_ids: list       # per path: list of node-label ids
    mfs_original: str | None = None
    provenance: str = ""
    labels: list = field(default_factory=list)

    def __post_init__(self):
        has_mfs = MFS in self.gold_ids or any(
            MFS in ids for ids in self.left_ids + self.right_ids)
        if has_mfs and self.mfs_original is None:
            raise InvariantError(f"{self.provenance}: MFS id present without mfs_original")

    @property
    def num_paths(self):
        return len(self.left)

    def original_gold(self):
        return restore_mfs(self.gold, self.mfs_original)

    def to_json(self):
        return {
            "id": self.provenance,
            "gold": self.gold, "gold_ids": self.gold_ids,
            "mfs_original": self.mfs_original,
            "paths": [[list(l), list(lab), list(r)]
                      for l, lab, r in zip(self.left, self.labels, self.right)],
            "path_ids": [[li, ni, ri]
                         for li, ni, ri in zip(self.left_ids, self.label_ids, self.right_ids)],
        }

    @classmethod
    def from_json(cls, rec):
        try:
            paths, pids = rec["paths"], rec["path_ids"]
            return cls(
                gold=rec["gold"], gold_ids=rec["gold_ids"],
                left=[tuple(p[0]) for p in paths], right=[tuple(p[2]) for p in paths],
                left_ids=[p[0] for p in pids], right_ids=[p[2] for p in pids],
                label_ids=[p[1] for p in pids], labels=[tuple(p[1]) for p in paths],
                mfs_original=rec.get("mfs_original"), provenance=rec.get("id", ""))
        except (KeyError, IndexError, TypeError) as exc:
            raise ValidationError(f"malformed prepared example: {exc}") from None


def encode_example(record, vocab):
    paths = record.bag.paths
    if not paths:
        raise DataError(f"{record.provenance}: example has no paths")
    return PreparedExample(
        gold=list(record.gold),
        gold_ids=vocab.encode(record.gold),
        left=[p.left_subwords for p in paths],
        right=[p.right_subwords for p in paths],
        left_ids=[vocab.encode(p.left_subwords) for p in paths],
        right_ids=[vocab.encode(p.right_subwords) for p in paths],
        label_ids=[[vocab.label_id(lab) for lab in p.node_labels] for p in paths],
        labels=[p.node_labels for p in paths],
        mfs_original=record.mfs_original,
        provenance=record.provenance,
    )


def prepare_corpus(records, vocab=None, use_mfs=True, min_count=1, max_size=None):
    """MFS-replace (optionally), build a vocabulary if none is given, and encode.

    The vocabulary is counted on the replaced records, i.e. on what the model
    actually sees.
    """
    if use_mfs:
        records = [apply_mfs_replacement(r) for r in records]
    if vocab is None:
        vocab = build_vocab(records, min_count, max_size)
    return vocab, [encode_example(r, vocab) for r in records]


@dataclass
class PreparedDataset:
    examples: list
    vocab_checksum: str
    use_mfs: bool = True

    def __len__(self):
        return len(self.examples)

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps({"format": "namegen-prepared", "version": FORMAT_VERSION,
                                 "vocab_checksum": self.vocab_checksum,
                                 "use_mfs": self.use_mfs}) + "\n")
            for ex in self.examples:
                fh.write(json.dumps(ex.to_json(), ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh if ln.strip()]
        if not lines:
            raise DataError(f"{path}: empty prepared dataset")
        try:
            header = json.loads(lines[0])
            examples = [PreparedExample.from_json(json.loads(ln)) for ln in lines[1:]]
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: malformed JSON: {exc.msg}") from None
        if header.get("format") != "namegen-prepared":
            raise DataError(f"{path}: not a prepared dataset")
        return cls(examples, header["vocab_checksum"], header.get("use_mfs", True))


# ---------------------------------------------------------------- statistics


@dataclass
class DatasetStats:
    pct_names_containing_snippet_mfs: float
    pct_names_sharing_any_subword: float
    subword_frequencies: dict
    n_examples: int

    def to_json(self):
        return {
            "n_examples": self.n_examples,
            "pct_names_containing_snippet_mfs": self.pct_names_containing_snippet_mfs,
            "pct_names_sharing_any_subword": self.pct_names_sharing_any_subword,
        }


def corpus_stats(corpus):
    """Share of names containing their snippet's MFS subword / sharing any input subword."""
    if not corpus:
        raise DataError("corpus_stats needs a non-empty corpus")
    with_mfs = sharing = 0
    freq = Counter()
    for rec in corpus:
        inputs = set(_input_subwords(rec.bag))
        gold = set(rec.gold)
        if most_frequent_subword(rec.bag) in gold:
            with_mfs += 1
        if inputs & gold:
            sharing += 1
        freq.update(rec.gold)
        freq.update(_input_subwords(rec.bag))
    n = len(corpus)
    return DatasetStats(100.0 * with_mfs / n, 100.0 * sharing / n, dict(freq), n)

