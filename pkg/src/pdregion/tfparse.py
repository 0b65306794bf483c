"""Transfer-function expressions and JSON system files.

Grammar (precedence high to low: ``^`` > unary minus > ``* /`` > ``+ -``)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' INTEGER)?
    atom   := NUMBER | 's' | '(' expr ')'

Products and sums are expanded exactly into coefficient lists; the result is
canonicalised once, at the end, so equal expressions built in a different
order produce identical coefficients.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

from pdregion.errors import ParseError, ShapeError
from pdregion.ratpoly import Polynomial, RationalFunction, RationalMatrix

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


@dataclass(frozen=True)
class Token:
    kind: str  # num, s, op, lpar, rpar, end
    text: str
    pos: int  # character index


# AST nodes are plain tuples: ("num", value), ("s",), ("neg", x), ("bin", op, a, b), ("pow", x, n)
Node = tuple


@dataclass(frozen=True)
class TfExpression:
    source: str
    ast: Node


def _byte_offset(src: str, pos: int) -> int:
    return len(src[:pos].encode("utf-8"))


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    i = 0
    while i < len(src):
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        m = _NUMBER.match(src, i)
        if m:
            toks.append(Token("num", m.group(), i))
            i = m.end()
            continue
        if src.startswith("**", i):
            toks.append(Token("op", "^", i))
            i += 2
            continue
        if ch in "+-*/^":
            toks.append(Token("op", ch, i))
            i += 1
            continue
        if ch == "(":
            toks.append(Token("lpar", ch, i))
            i += 1
            continue
        if ch == ")":
            toks.append(Token("rpar", ch, i))
            i += 1
            continue
        m = _IDENT.match(src, i)
        if m:
            if m.group() != "s":
                raise ParseError(f"unknown symbol {m.group()!r} (only 's' is allowed)", _byte_offset(src, i))
            toks.append(Token("s", "s", i))
            i = m.end()
            continue
        raise ParseError(f"unexpected character {ch!r}", _byte_offset(src, i))
    toks.append(Token("end", "", len(src)))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = tokenize(src)
        self.i = 0

    def peek(self) -> Token:
        return self.toks[self.i]

    def take(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(msg, _byte_offset(self.src, tok.pos))

    def parse(self) -> Node:
        if self.peek().kind == "end":
            raise self.error("empty expression")
        node = self.expr()
        if self.peek().kind != "end":
            raise self.error(f"unexpected token {self.peek().text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            node = ("bin", op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            node = ("bin", op, node, self.unary())
        return node

    def unary(self) -> Node:
        t = self.peek()
        if t.kind == "op" and t.text in "+-":
            self.take()
            inner = self.unary()
            return ("neg", inner) if t.text == "-" else inner
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            t = self.peek()
            if t.kind == "num" and re.fullmatch(r"\d+", t.text):
                self.take()
                return ("pow", base, int(t.text))
            if t.kind in ("s", "lpar") or (t.kind == "op" and t.text == "-"):
                raise self.error("non-rational construct: exponent must be a nonnegative integer literal", t)
            raise self.error("exponent must be a nonnegative integer literal", t)
        return base

    def atom(self) -> Node:
        t = self.take()
        if t.kind == "num":
            return ("num", float(t.text))
        if t.kind == "s":
            return ("s",)
        if t.kind == "lpar":
            node = self.expr()
            if self.peek().kind != "rpar":
                raise self.error("expected ')'")
            self.take()
            return node
        raise self.error(f"unexpected token {t.text or 'end of input'!r}", t)


def parse_ast(src: str) -> TfExpression:
    return TfExpression(src, _Parser(src).parse())


# unnormalised (num, den) pairs during evaluation
def _ev(node: Node, src: str) -> tuple[Polynomial, Polynomial]:
    kind = node[0]
    one = Polynomial([1.0])
    if kind == "num":
        return Polynomial([node[1]]), one
    if kind == "s":
        return Polynomial([0.0, 1.0]), one
    if kind == "neg":
        n, d = _ev(node[1], src)
        return -n, d
    if kind == "pow":
        bn, bd = _ev(node[1], src)
        n, d = one, one
        for _ in range(node[2]):
            n, d = n * bn, d * bd
        return n, d
    op, a, b = node[1], node[2], node[3]
    an, ad = _ev(a, src)
    bn, bd = _ev(b, src)
    if op == "*":
        return an * bn, ad * bd
    if op == "/":
        if bn.is_zero():
            raise ParseError("division by a zero polynomial")
        return an * bd, ad * bn
    if ad == bd:
        return (an + bn if op == "+" else an - bn), ad
    cross = bn * ad
    return (an * bd + cross if op == "+" else an * bd - cross), ad * bd


def parse_expression(src: str) -> RationalFunction:
    """Parse an expression in ``s`` into a canonical rational function."""
    expr = parse_ast(src)
    n, d = _ev(expr.ast, src)
    if d.is_zero():
        raise ParseError("zero denominator polynomial")
    return RationalFunction(n, d).canonical()


# ---------------------------------------------------------------------------
# system files

Entry = Union[str, dict]


@dataclass
class SystemFile:
    name: str
    kind: str
    entries: list[list[Entry]]
    parameters: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> SystemFile:
        if not isinstance(data, dict):
            raise ParseError("system file must be a JSON object")
        kind = data.get("kind", "siso")
        if kind not in ("siso", "mimo"):
            raise ParseError(f"kind must be 'siso' or 'mimo', got {kind!r}")
        entries = data.get("entries")
        if entries is None and "entry" in data:
            entries = [[data["entry"]]]
        if entries is None and "num" in data and "den" in data:
            entries = [[{"num": data["num"], "den": data["den"]}]]
        if entries is None:
            raise ParseError("system file has no 'entries'")
        if isinstance(entries, (str, dict)):
            entries = [[entries]]
        return cls(name=str(data.get("name", "G")), kind=kind, entries=entries,
                   parameters=dict(data.get("parameters") or {}))

    @classmethod
    def load(cls, path) -> SystemFile:
        text = Path(path).read_text(encoding="utf-8")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.pos) from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "entries": self.entries, "parameters": self.parameters}


def substitute(src: str, params: dict[str, Any], depth: int = 0) -> str:
    """Textually replace parameter names by their (parenthesised) values.

    Values may themselves be expressions mentioning other parameters.
    """
    if depth > 32:
        raise ParseError("parameter substitution does not terminate (cyclic definition?)")

    def repl(m: re.Match) -> str:
        name = m.group()
        if name == "s":
            return name
        if name not in params:
            raise ParseError(f"unknown parameter {name!r}", len(src[: m.start()].encode("utf-8")))
        val = params[name]
        if isinstance(val, bool) or not isinstance(val, (int, float, str)):
            raise ParseError(f"parameter {name!r} must be a number or an expression")
        if isinstance(val, str):
            return "(" + substitute(val, params, depth + 1) + ")"
        return "(" + repr(float(val)) + ")"

    # identifiers not preceded by a digit/dot (keeps exponents like 1e-3 intact)
    return re.sub(r"(?<![\w.])[A-Za-z_][A-Za-z_0-9]*", repl, src)


def _parse_entry(entry: Entry, params: dict, where: str) -> RationalFunction:
    try:
        if isinstance(entry, dict):
            if "expr" in entry:
                return parse_expression(substitute(str(entry["expr"]), params))
            if "num" not in entry or "den" not in entry:
                raise ParseError("coefficient entry needs 'num' and 'den'")
            num, den = entry["num"], entry["den"]
            for c in list(num) + list(den):
                if isinstance(c, bool) or not isinstance(c, (int, float)) or c != c or c in (float("inf"), float("-inf")):
                    raise ParseError(f"coefficient {c!r} is not a finite real")
            if Polynomial(den).is_zero():
                raise ParseError("zero denominator polynomial")
            return RationalFunction(Polynomial(num), Polynomial(den)).canonical()
        if isinstance(entry, (int, float)) and not isinstance(entry, bool):
            return RationalFunction.constant(float(entry))
        if not isinstance(entry, str):
            raise ParseError(f"unsupported entry type {type(entry).__name__}")
        return parse_expression(substitute(entry, params))
    except ParseError as exc:
        raise ParseError(str(exc), exc.offset, where) from exc


def parse_system(file: SystemFile | dict) -> RationalMatrix:
    if isinstance(file, dict):
        file = SystemFile.from_dict(file)
    rows = file.entries
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ShapeError("entries must be a non-empty matrix (list of rows)")
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ShapeError(f"entries must form a square matrix, got row lengths {[len(r) for r in rows]}")
    if file.kind == "siso" and n != 1:
        raise ShapeError(f"siso system must be 1x1, got {n}x{n}")
    out = [[_parse_entry(e, file.parameters, f"entry ({i}, {j})") for j, e in enumerate(row)]
           for i, row in enumerate(rows)]
    return RationalMatrix(out)


def load_system(path) -> tuple[str, RationalMatrix]:
    f = SystemFile.load(path)
    return f.name, parse_system(f)
