"""AST node type, validation and the JSONL interchange format."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .errors import DataError, ValidationError

log = logging.getLogger(__name__)


@dataclass(eq=False)
class AstNode:
    """Non-terminal when ``label`` is set, leaf when ``token`` is set.

    ``id`` is the preorder index assigned by :func:`finalize`.
    """

    label: str | None = None
    token: str | None = None
    children: list[AstNode] = field(default_factory=list)
    id: int = -1

    @classmethod
    def leaf(cls, token):
        return cls(token=token)

    @classmethod
    def node(cls, label, *children):
        return cls(label=label, children=list(children))

    @property
    def is_leaf(self):
        return self.token is not None

    def walk(self):
        """Preorder traversal."""
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))

    def leaves(self):
        return [n for n in self.walk() if n.is_leaf]

    def to_json(self):
        if self.is_leaf:
            return {"token": self.token}
        return {"label": self.label, "children": [c.to_json() for c in self.children]}

    def structure(self):
        """Nested tuples, handy for structural equality."""
        if self.is_leaf:
            return ("leaf", self.token)
        return (self.label, tuple(c.structure() for c in self.children))

    def __repr__(self):
        if self.is_leaf:
            return f"Leaf({self.token!r})"
        return f"{self.label}({', '.join(map(repr, self.children))})"


@dataclass
class SourceFunction:
    name: str
    body_ast: AstNode
    origin: str = ""


def strip_name(root, name):
    """Remove leaves equal to ``name`` and prune non-terminals left childless.

    Returns the pruned tree, or None if nothing remains.
    """
    if root.is_leaf:
        return None if root.token == name else root
    kept = [c for c in (strip_name(c, name) for c in root.children) if c is not None]
    if not kept:
        return None
    root.children = kept
    return root


def finalize(root):
    """Validate structural invariants and assign preorder ids."""
    seen = set()
    for i, n in enumerate(root.walk()):
        if id(n) in seen:
            raise ValidationError("AST node reachable twice (shared subtree or cycle)")
        seen.add(id(n))
        if (n.label is None) == (n.token is None):
            raise ValidationError("AST node must have exactly one of label/token")
        if n.is_leaf:
            if n.children:
                raise ValidationError(f"leaf {n.token!r} has children")
            if not isinstance(n.token, str) or not n.token:
                raise ValidationError("leaf token must be a non-empty string")
        else:
            if not isinstance(n.label, str) or not n.label:
                raise ValidationError("non-terminal label must be a non-empty string")
            if not n.children:
                raise ValidationError(f"non-terminal {n.label!r} has no children")
        n.id = i
    return root


def make_function(name, body, origin=""):
    """Strip the function's own name from its body and validate.

    Returns None when the body has no leaves left.
    """
    if not name:
        raise ValidationError("function name must be non-empty")
    body = strip_name(body, name)
    if body is None:
        log.warning("%s: function %r has an empty body AST, skipped", origin, name)
        return None
    return SourceFunction(name, finalize(body), origin)


def node_from_json(obj):
    if not isinstance(obj, dict):
        raise ValidationError(f"AST node must be an object, got {type(obj).__name__}")
    has_label, has_token = "label" in obj, "token" in obj
    if has_label and has_token:
        raise ValidationError("AST node has both 'label' and 'token'")
    if not (has_label or has_token):
        raise ValidationError("AST node has neither 'label' nor 'token'")
    children = obj.get("children", [])
    if not isinstance(children, list):
        raise ValidationError("'children' must be a list")
    if has_token:
        if children:
            raise ValidationError(f"leaf {obj['token']!r} has children")
        if not isinstance(obj["token"], str):
            raise ValidationError("leaf token must be a string")
        return AstNode(token=obj["token"])
    return AstNode(label=obj["label"], children=[node_from_json(c) for c in children])


def load_ast_json(stream, origin="<stream>"):
    """Read JSONL records ``{"name": ..., "ast": {...}}`` into SourceFunctions."""
    out = []
    for lineno, line in enumerate(stream, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{origin}:{lineno}: malformed JSON: {exc.msg}") from None
        try:
            if not isinstance(rec, dict) or not isinstance(rec.get("name"), str):
                raise ValidationError("record needs a string 'name'")
            if "ast" not in rec:
                raise ValidationError("record needs an 'ast'")
            body = node_from_json(rec["ast"])
            fn = make_function(rec["name"], body, rec.get("origin") or f"{origin}:{lineno}")
        except ValidationError as exc:
            raise ValidationError(f"{origin}:{lineno}: {exc}") from None
        if fn is not None:
            out.append(fn)
    return out


def dump_ast_json(functions, stream):
    for fn in functions:
        rec = {"name": fn.name, "ast": fn.body_ast.to_json(), "origin": fn.origin}
        stream.write(json.dumps(rec, ensure_ascii=False) + "\n")
