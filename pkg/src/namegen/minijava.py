"""Recursive-descent parser for a small Java-like language.

Grammar (informal)::

    program    := (class | method)*
    class      := modifier* 'class' IDENT '{' method* '}'
    method     := modifier* type IDENT '(' [param (',' param)*] ')' block
    param      := type IDENT
    type       := IDENT ('[' ']')*
    block      := '{' stmt* '}'
    stmt       := block | 'return' [expr] ';'
                | 'if' '(' expr ')' stmt ['else' stmt]
                | 'while' '(' expr ')' stmt
                | type IDENT ['=' expr] ';'
                | expr ['=' expr] ';'
    expr       := binary expression over || && == != < > <= >= + - * / %
    postfix    := primary ('.' IDENT ['(' args ')'])*
    primary    := IDENT ['(' args ')'] | INT | STRING | true | false | null
                | this | '(' expr ')'

AST mapping. Non-terminal labels come from a fixed set: MethodDeclaration,
Parameter, Block, ReturnStmt, IfStmt, WhileStmt, Assign, Call, FieldAccess,
BinaryOp, NameExpr, Literal. Binary operators are folded into the label
(``BinaryOp:+``). Types appear as leaves only inside Parameter; the return
type and local variable types are dropped. A local declaration with an
initializer becomes ``Assign(NameExpr(var), init)``; without one it becomes
``NameExpr(var)``. Expression statements sit directly under their Block.
Leaves hold identifiers and literals verbatim (string literals keep quotes).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError
from .syntax import AstNode, make_function

LABELS = (
    "MethodDeclaration", "Parameter", "Block", "ReturnStmt", "IfStmt", "WhileStmt",
    "Assign", "Call", "FieldAccess", "BinaryOp", "NameExpr", "Literal",
)
KEYWORDS = {"class", "return", "if", "else", "while", "true", "false", "null", "this"}
MODIFIERS = {"public", "private", "protected", "static", "final"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<int>\d+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<op>\|\||&&|==|!=|<=|>=|[<>+\-*/%=(){}\[\];,.])
""", re.VERBOSE | re.DOTALL)

_PRECEDENCE = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", ">", "<=", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


@dataclass
class Token:
    kind: str  # ident, keyword, int, string, op, eof
    text: str
    line: int
    col: int


def tokenize(source, origin="<input>"):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1,
                             origin)
        kind, text = m.lastgroup, m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and text in KEYWORDS | MODIFIERS:
                kind = "keyword"
            tokens.append(Token(kind, text, line, pos - line_start + 1))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class Parser:
    def __init__(self, source, origin="<input>"):
        self.origin = origin
        self.tokens = tokenize(source, origin)
        self.pos = 0

    # -- token helpers

    @property
    def tok(self):
        return self.tokens[self.pos]

    def peek(self, offset=1):
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text, kind=None):
        t = self.tok
        return t.text == text and (kind is None or t.kind == kind) and t.kind != "string"

    def fail(self, what, tok=None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"expected {what}, found {found}", tok.line, tok.col, self.origin)

    def expect(self, text):
        if not self.at(text):
            self.fail(repr(text))
        t = self.tok
        self.pos += 1
        return t

    def ident(self):
        if self.tok.kind != "ident":
            self.fail("identifier")
        t = self.tok
        self.pos += 1
        return t

    # -- declarations

    def parse_program(self):
        functions = []
        while self.tok.kind != "eof":
            save = self.pos
            while self.tok.text in MODIFIERS and self.tok.kind == "keyword":
                self.pos += 1
            if self.at("class", "keyword"):
                self.pos += 1
                self.ident()
                self.expect("{")
                while not self.at("}"):
                    if self.tok.kind == "eof":
                        self.fail("'}'")
                    functions.append(self.parse_method())
                self.expect("}")
            else:
                self.pos = save
                functions.append(self.parse_method())
        return functions

    def parse_type(self):
        text = self.ident().text
        while self.at("[") and self.peek().text == "]":
            self.pos += 2
            text += "[]"
        return text

    def parse_method(self):
        while self.tok.kind == "keyword" and self.tok.text in MODIFIERS:
            self.pos += 1
        start = self.tok
        self.parse_type()
        name = self.ident().text
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                ptype = self.parse_type()
                pname = self.ident().text
                params.append(AstNode.node("Parameter", AstNode.leaf(ptype), AstNode.leaf(pname)))
                if not self.at(","):
                    break
                self.pos += 1
        self.expect(")")
        body = self.parse_block()
        children = params + ([body] if body is not None else [])
        return name, AstNode(label="MethodDeclaration", children=children), start.line

    def parse_block(self):
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("'}'")
            s = self.parse_statement()
            if s is not None:
                stmts.append(s)
        self.expect("}")
        return AstNode(label="Block", children=stmts) if stmts else None

    # -- statements

    def _looks_like_decl(self):
        if self.tok.kind != "ident":
            return False
        k = 1
        while self.peek(k).text == "[" and self.peek(k + 1).text == "]":
            k += 2
        return self.peek(k).kind == "ident"

    def parse_statement(self):
        t = self.tok
        if self.at("{"):
            return self.parse_block()
        if self.at("return", "keyword"):
            self.pos += 1
            if self.at(";"):
                self.pos += 1
                return None
            value = self.parse_expr()
            self.expect(";")
            return AstNode.node("ReturnStmt", value)
        if self.at("if", "keyword"):
            self.pos += 1
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            parts = [cond, self.parse_statement()]
            if self.at("else", "keyword"):
                self.pos += 1
                parts.append(self.parse_statement())
            return AstNode(label="IfStmt", children=[p for p in parts if p is not None])
        if self.at("while", "keyword"):
            self.pos += 1
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            body = self.parse_statement()
            return AstNode(label="WhileStmt", children=[p for p in (cond, body) if p is not None])
        if t.kind == "keyword" and t.text not in ("true", "false", "null", "this"):
            self.fail("statement")
        if self._looks_like_decl():
            self.parse_type()
            var = AstNode.node("NameExpr", AstNode.leaf(self.ident().text))
            if self.at("="):
                self.pos += 1
                value = self.parse_expr()
                self.expect(";")
                return AstNode.node("Assign", var, value)
            self.expect(";")
            return var
        expr = self.parse_expr()
        if self.at("="):
            self.pos += 1
            value = self.parse_expr()
            self.expect(";")
            return AstNode.node("Assign", expr, value)
        self.expect(";")
        return expr

    # -- expressions

    def parse_expr(self, level=0):
        if level == len(_PRECEDENCE):
            return self.parse_postfix()
        left = self.parse_expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in _PRECEDENCE[level]:
            op = self.tok.text
            self.pos += 1
            right = self.parse_expr(level + 1)
            left = AstNode.node(f"BinaryOp:{op}", left, right)
        return left

    def parse_args(self):
        self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                args.append(self.parse_expr())
                if not self.at(","):
                    break
                self.pos += 1
        self.expect(")")
        return args

    def parse_postfix(self):
        node = self.parse_primary()
        while self.at("."):
            self.pos += 1
            member = AstNode.leaf(self.ident().text)
            if self.at("("):
                node = AstNode.node("Call", node, member, *self.parse_args())
            else:
                node = AstNode.node("FieldAccess", node, member)
        return node

    def parse_primary(self):
        t = self.tok
        if t.kind == "ident":
            self.pos += 1
            if self.at("("):
                return AstNode.node("Call", AstNode.leaf(t.text), *self.parse_args())
            return AstNode.node("NameExpr", AstNode.leaf(t.text))
        if t.kind in ("int", "string") or (t.kind == "keyword" and t.text in ("true", "false", "null")):
            self.pos += 1
            return AstNode.node("Literal", AstNode.leaf(t.text))
        if t.kind == "keyword" and t.text == "this":
            self.pos += 1
            return AstNode.node("NameExpr", AstNode.leaf("this"))
        if self.at("("):
            self.pos += 1
            e = self.parse_expr()
            self.expect(")")
            return e
        self.fail("expression")


def parse_mini_java(source, origin="<input>"):
    """Parse ``source`` into one SourceFunction per method declaration.

    Methods whose body contains no leaves (after removing the method's own
    name) are skipped with a warning.
    """
    parser = Parser(source, origin)
    out = []
    for name, tree, line in parser.parse_program():
        fn = make_function(name, tree, f"{origin}:{line}")
        if fn is not None:
            out.append(fn)
    return out
