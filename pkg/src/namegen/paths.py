"""Leaf-to-leaf path contexts: subword splitting, extraction, sampling, file format.

Path file format, one function per line::

    gold|gold<TAB>left+left,Label|Label|Label,right+right<SPACE>...

Subwords and labels are escaped so the separators stay unambiguous: each of
``% TAB LF CR SPACE , | +`` inside a field is written as ``%XX`` (uppercase
hex of the byte), and decoded with standard percent-decoding.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from urllib.parse import unquote

from .errors import DataError

log = logging.getLogger(__name__)

MAX_SUBWORDS = 6
MAX_PATH_SUBWORDS = 9
PATH_CAP = 200


def split_subwords(token):
    """Split where an uppercase letter directly follows a lowercase letter, then lowercase."""
    pieces = []
    start = 0
    for i in range(1, len(token)):
        if token[i].isupper() and token[i - 1].islower():
            pieces.append(token[start:i])
            start = i
    pieces.append(token[start:])
    return [p.lower() for p in pieces]


def truncate_subwords(subwords, limit=MAX_SUBWORDS):
    return list(subwords[:limit])


def leaf_subwords(token):
    return truncate_subwords(split_subwords(token))


@dataclass(frozen=True)
class AstPath:
    left_subwords: tuple
    node_labels: tuple
    right_subwords: tuple
    left_leaf_id: int | None = None
    right_leaf_id: int | None = None

    def subwords(self):
        return self.left_subwords + self.right_subwords


@dataclass
class PathBag:
    paths: list
    total_before_sampling: int
    function_ref: str = ""


def _ancestors(node_id, parent):
    chain = []
    while node_id is not None:
        chain.append(node_id)
        node_id = parent[node_id]
    return chain


def extract_paths(ast, max_path_subwords=MAX_PATH_SUBWORDS):
    """All shortest leaf-to-leaf paths in canonical (left id < right id) order.

    A path is kept when its combined left+right subword count is strictly
    below ``max_path_subwords``; pass None to disable the filter.
    """
    parent = {ast.id: None}
    by_id = {}
    for n in ast.walk():
        by_id[n.id] = n
        for c in n.children:
            parent[c.id] = n.id
    leaves = sorted((n for n in by_id.values() if n.is_leaf), key=lambda n: n.id)
    if len(leaves) < 2:
        log.info("AST with %d leaf/leaves yields no paths", len(leaves))
        return []
    chains = {lf.id: _ancestors(parent[lf.id], parent) for lf in leaves}
    subs = {lf.id: tuple(leaf_subwords(lf.token)) for lf in leaves}
    out = []
    for i, a in enumerate(leaves):
        up_a = chains[a.id]
        depth_a = {nid: k for k, nid in enumerate(up_a)}
        for b in leaves[i + 1:]:
            if (max_path_subwords is not None
                    and len(subs[a.id]) + len(subs[b.id]) >= max_path_subwords):
                continue
            up_b = chains[b.id]
            for k_b, nid in enumerate(up_b):
                if nid in depth_a:
                    k_a = depth_a[nid]
                    break
            ids = up_a[:k_a + 1] + up_b[:k_b][::-1]
            labels = tuple(by_id[n].label for n in ids)
            out.append(AstPath(subs[a.id], labels, subs[b.id], a.id, b.id))
    return out


def sample_paths(paths, cap=PATH_CAP, seed=0, function_ref=""):
    """Keep everything up to ``cap``; otherwise a seeded uniform subset in original order."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    n = len(paths)
    if n <= cap:
        return PathBag(list(paths), n, function_ref)
    keep = sorted(random.Random(seed).sample(range(n), cap))
    return PathBag([paths[i] for i in keep], n, function_ref)


# ---------------------------------------------------------------- file format

_ESCAPES = {c: f"%{ord(c):02X}" for c in "% \t\n\r,|+"}


def escape(field_text):
    return "".join(_ESCAPES.get(c, c) for c in field_text)


def unescape(field_text):
    return unquote(field_text)


def format_context(path):
    return ",".join((
        "+".join(escape(s) for s in path.left_subwords),
        "|".join(escape(s) for s in path.node_labels),
        "+".join(escape(s) for s in path.right_subwords),
    ))


def format_line(gold_subwords, bag):
    gold = "|".join(escape(s) for s in gold_subwords)
    return gold + "\t" + " ".join(format_context(p) for p in bag.paths)


def parse_context(text):
    parts = text.split(",")
    if len(parts) != 3 or not all(parts):
        raise DataError(f"malformed path context {text!r}")
    left, labels, right = (tuple(unescape(x) for x in p.split(sep))
                           for p, sep in zip(parts, ("+", "|", "+")))
    return AstPath(left, labels, right)


@dataclass
class PathRecord:
    gold: list
    bag: PathBag
    provenance: str = ""
    mfs_original: str | None = field(default=None)


def parse_line(line, provenance=""):
    line = line.rstrip("\n")
    if "\t" not in line:
        raise DataError(f"{provenance}: missing TAB between name and contexts")
    gold_text, ctx_text = line.split("\t", 1)
    gold = [unescape(s) for s in gold_text.split("|") if s]
    if not gold:
        raise DataError(f"{provenance}: empty gold name")
    paths = [parse_context(c) for c in ctx_text.split(" ") if c]
    if not paths:
        raise DataError(f"{provenance}: no path contexts")
    return PathRecord(gold, PathBag(paths, len(paths), provenance), provenance)


def read_path_file(path):
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                records.append(parse_line(line, f"{path}:{lineno}"))
    return records


def write_path_file(path, records):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(format_line(rec.gold, rec.bag) + "\n")


def function_to_record(fn, index, seed=0, cap=PATH_CAP, max_path_subwords=MAX_PATH_SUBWORDS):
    """Extract and sample paths for one SourceFunction; None if no path survives."""
    paths = extract_paths(fn.body_ast, max_path_subwords)
    if not paths:
        return None
    bag = sample_paths(paths, cap, seed ^ index, fn.origin)
    return PathRecord(split_subwords(fn.name), bag, fn.origin)
