"""Deterministic synthetic mini-Java methods for smoke tests and overfit checks."""

from __future__ import annotations

import random

NOUNS = [
    "name", "value", "size", "count", "index", "target", "key", "item", "user", "node",
    "parent", "child", "buffer", "offset", "length", "width", "height", "color", "message",
    "status", "timeout", "config", "path", "file", "token", "score", "label", "weight",
    "price", "order", "account", "balance", "limit", "level", "owner", "title",
]
NUMERIC = {"size", "count", "index", "offset", "length", "width", "height", "timeout",
           "score", "weight", "price", "balance", "limit", "level"}
# words that occur in a single method only; they end up out of vocabulary
RARE = ["busybox", "toybox", "morpheme"]


def _cap(w):
    return w[0].upper() + w[1:]


def _type(noun):
    return "int" if noun in NUMERIC else "String"


TEMPLATES = {
    "get": lambda f, F, t: f"{t} get{F}() {{ return this.{f}; }}",
    "set": lambda f, F, t: f"void set{F}({t} value) {{ this.{f} = value; }}",
    "has": lambda f, F, t: f"boolean has{F}() {{ return this.{f} != null; }}",
    "reset": lambda f, F, t: f"void reset{F}() {{ this.{f} = 0; }}",
    "increment": lambda f, F, t: f"void increment{F}() {{ this.{f} = this.{f} + 1; }}",
    "print": lambda f, F, t: f"void print{F}() {{ System.out.println(this.{f}); }}",
    "count": lambda f, F, t: (
        f"int count{F}s(Iterator {f}s) {{ int total = 0; "
        f"while ({f}s.hasNext()) {{ total = total + 1; {f}s.next(); }} return total; }}"),
    "contains": lambda f, F, t: (
        f"boolean contains{F}(Element element, String {f}) {{ "
        f"return element.get{F}s().contains({f}); }}"),
}


def rare_method(word):
    W = _cap(word)
    return (f"boolean is{W}Available(Path root) {{ String {word} = root.find(\"bin\"); "
            f"if ({word} != null) {{ return {word}.exists(); }} return false; }}")


def generate_methods(n=50, seed=0, n_rare=2):
    """``n`` distinct method sources; the first ``n_rare`` use words from RARE."""
    rng = random.Random(seed)
    combos = [(k, noun) for k in TEMPLATES for noun in NOUNS]
    rng.shuffle(combos)
    out = [rare_method(w) for w in RARE[:n_rare]]
    for kind, noun in combos:
        if len(out) >= n:
            break
        out.append(TEMPLATES[kind](noun, _cap(noun), _type(noun)))
    return out


def generate_source(n=50, seed=0, n_rare=2):
    return "class Synthetic {\n" + "\n".join("  " + m for m in generate_methods(n, seed, n_rare)) \
        + "\n}\n"
