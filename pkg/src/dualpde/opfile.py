"""Plain-text operator files.

    # comment
    dim 3
    unknowns eta1 eta2 eta3
    weights 1 1 1            (optional pairing weights of the unknowns)
    eqweights 1              (optional pairing weights of the equations)
    eq z: d3(eta2) - d2(eta3) - x3*d1(eta3) + eta1

Expressions use + - * / ^ and parentheses.  ``d<digits>(u)`` is the
derivative of unknown u, one digit per derivation (d123 = d1 d2 d3).
Variables are x1..xn; numbers are integers or decimals.  Every equation must
be linear and homogeneous in the unknowns.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import List, Optional

from .algebra import RatFunc, coerce, variable
from .errors import DomainError, ParseError
from .operators import OpMatrix, format_row, parse_index

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"\d+(\.\d*)?|\.\d+")
_DERIV = re.compile(r"d\d+$")
_VAR = re.compile(r"x(\d+)$")
_NONRATIONAL = {"sqrt", "pi", "e", "exp", "log", "ln", "sin", "cos", "tan", "I", "i", "inf"}


class _Tok:
    __slots__ = ("kind", "text", "col")

    def __init__(self, kind, text, col):
        self.kind, self.text, self.col = kind, text, col

    def __repr__(self):
        return f"{self.kind}:{self.text}@{self.col}"


def _tokenize(s: str, line: int, col0: int) -> List[_Tok]:
    out = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch.isspace():
            i += 1
            continue
        col = col0 + i
        if ch in "+-*/^()":
            out.append(_Tok(ch, ch, col))
            i += 1
            continue
        m = _NUMBER.match(s, i)
        if m:
            out.append(_Tok("num", m.group(), col))
            i = m.end()
            if i < len(s) and (s[i].isalpha() or s[i] == "_"):
                raise ParseError(f"unexpected character {s[i]!r} after number", line, col0 + i)
            continue
        m = _IDENT.match(s, i)
        if m:
            out.append(_Tok("id", m.group(), col))
            i = m.end()
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    out.append(_Tok("end", "", col0 + len(s)))
    return out


class _Lin:
    """A linear combination of jets (an operator row)."""

    __slots__ = ("row",)

    def __init__(self, row):
        self.row = row


class _Parser:
    def __init__(self, toks, line, n, unknowns):
        self.toks = toks
        self.pos = 0
        self.line = line
        self.n = n
        self.unknowns = unknowns

    def peek(self):
        return self.toks[self.pos]

    def take(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def err(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, self.line, tok.col)

    # grammar ---------------------------------------------------------------

    def parse(self):
        v = self.expr()
        if self.peek().kind != "end":
            raise self.err(f"unexpected {self.peek().text!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek().kind in "+-":
            op = self.take()
            w = self.term()
            v = self._add(v, w, op.kind == "-", op)
        return v

    def term(self):
        v = self.unary()
        while self.peek().kind in ("*", "/"):
            op = self.take()
            w = self.unary()
            v = self._mul(v, w, op)
        return v

    def unary(self):
        t = self.peek()
        if t.kind in "+-" and t.kind != "end":
            self.take()
            v = self.unary()
            if t.kind == "-":
                return self._neg(v)
            return v
        return self.power()

    def power(self):
        base_tok = self.peek()
        v = self.atom()
        if self.peek().kind == "^":
            op = self.take()
            sign = 1
            if self.peek().kind in "+-" and self.peek().kind != "end":
                sign = -1 if self.take().kind == "-" else 1
            e = self.peek()
            if e.kind != "num" or "." in e.text:
                if e.kind == "(":
                    raise self.err("non-rational coefficient: exponents must be integers", e)
                raise self.err("expected an integer exponent", e)
            self.take()
            if isinstance(v, _Lin):
                raise ParseError("nonlinear: power of an unknown", self.line, base_tok.col)
            k = sign * int(e.text)
            try:
                v = coerce(v ** k) if k >= 0 or isinstance(v, RatFunc) else coerce(Fraction(v) ** k)
            except (ZeroDivisionError, DomainError):
                raise ParseError("division by zero", self.line, op.col) from None
        return v

    def atom(self):
        t = self.take()
        if t.kind == "num":
            return Fraction(t.text)
        if t.kind == "(":
            v = self.expr()
            if self.peek().kind != ")":
                if self.peek().kind == "end":
                    raise ParseError("unclosed parenthesis", self.line, t.col)
                raise self.err(f"expected ')' but found {self.peek().text!r}")
            self.take()
            return v
        if t.kind == "id":
            name = t.text
            if name in self.unknowns:
                return _Lin({(self.unknowns[name], (0,) * self.n): Fraction(1)})
            if _DERIV.match(name):
                return self.derivative(t)
            m = _VAR.match(name)
            if m:
                i = int(m.group(1))
                if not 1 <= i <= self.n:
                    raise ParseError(f"undeclared symbol {name!r} (dim is {self.n})", self.line, t.col)
                return variable(i, self.n)
            if name in _NONRATIONAL:
                raise ParseError(f"non-rational coefficient {name!r}", self.line, t.col)
            raise ParseError(f"undeclared symbol {name!r}", self.line, t.col)
        if t.kind == "end":
            raise ParseError("unexpected end of expression", self.line, t.col)
        raise ParseError(f"unexpected {t.text!r}", self.line, t.col)

    def derivative(self, head):
        try:
            mu = parse_index(head.text[1:], self.n)
        except DomainError as exc:
            raise ParseError(str(exc), self.line, head.col) from None
        lp = self.peek()
        if lp.kind != "(":
            raise self.err(f"derivative {head.text} must be applied to an unknown")
        self.take()
        u = self.peek()
        if u.kind != "id" or u.text not in self.unknowns:
            if u.kind == "end":
                raise ParseError("unclosed parenthesis", self.line, lp.col)
            if u.kind == "id" and not (_VAR.match(u.text) or _DERIV.match(u.text)):
                raise ParseError(f"undeclared symbol {u.text!r}", self.line, u.col)
            raise self.err("derivatives apply to unknowns only", u)
        self.take()
        if self.peek().kind != ")":
            if self.peek().kind == "end":
                raise ParseError("unclosed parenthesis", self.line, lp.col)
            raise self.err(f"expected ')' but found {self.peek().text!r}")
        self.take()
        return _Lin({(self.unknowns[u.text], mu): Fraction(1)})

    # semantics -----------------------------------------------------------------

    def _neg(self, v):
        if isinstance(v, _Lin):
            return _Lin({k: -c for k, c in v.row.items()})
        return coerce(-v)

    def _add(self, v, w, sub, tok):
        if sub:
            w = self._neg(w)
        if isinstance(v, _Lin) and isinstance(w, _Lin):
            out = dict(v.row)
            for k, c in w.row.items():
                s = out.get(k, 0) + c
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
            return _Lin(out)
        if isinstance(v, _Lin) or isinstance(w, _Lin):
            s = w if isinstance(v, _Lin) else v
            if not s:
                return v if isinstance(v, _Lin) else w
            raise ParseError("inhomogeneous: a term without unknowns", self.line, tok.col)
        return coerce(v + w)

    def _mul(self, v, w, tok):
        if tok.kind == "*":
            if isinstance(v, _Lin) and isinstance(w, _Lin):
                raise ParseError("nonlinear: product of unknowns", self.line, tok.col)
            if isinstance(w, _Lin):
                v, w = w, v
            if isinstance(v, _Lin):
                if not w:
                    return _Lin({})
                return _Lin({k: coerce(c * w) for k, c in v.row.items()})
            return coerce(v * w)
        if isinstance(w, _Lin):
            raise ParseError("nonlinear: division by an unknown", self.line, tok.col)
        if not w:
            raise ParseError("division by zero", self.line, tok.col)
        if isinstance(v, _Lin):
            return _Lin({k: coerce(c / w) for k, c in v.row.items()})
        return coerce(v / w)


def parse_expression(text: str, n: int, unknowns: List[str], line: int = 1, col0: int = 1):
    """Parse one right-hand side into an operator row."""
    p = _Parser(_tokenize(text, line, col0), line, n, {u: k for k, u in enumerate(unknowns)})
    v = p.parse()
    if isinstance(v, _Lin):
        return v.row
    if v:
        raise ParseError("inhomogeneous: expression contains no unknown", line, col0)
    return {}


def _parse_weights(words, count, line, col, what):
    if len(words) != count:
        raise ParseError(f"{what} needs {count} values, got {len(words)}", line, col)
    out = []
    for w in words:
        try:
            v = Fraction(w)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad weight {w!r}", line, col) from None
        if not v:
            raise ParseError("weights must be nonzero", line, col)
        out.append(v)
    return out


def parse_operator_file(text: str) -> OpMatrix:
    n: Optional[int] = None
    unknowns: Optional[List[str]] = None
    weights = None
    eqweights_line = None
    rows, labels = [], []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip())
        word = stripped.split()[0]
        rest = stripped[len(word):].split()
        col = indent + 1
        if word == "dim":
            if n is not None:
                raise ParseError("dim given twice", ln, col)
            if len(rest) != 1 or not rest[0].isdigit() or not 1 <= int(rest[0]) <= 9:
                raise ParseError("dim must be an integer between 1 and 9", ln, col)
            n = int(rest[0])
        elif word == "unknowns":
            if unknowns is not None:
                raise ParseError("unknowns given twice", ln, col)
            for u in rest:
                if not _IDENT.fullmatch(u) or _DERIV.match(u) or _VAR.match(u) or u in _NONRATIONAL:
                    raise ParseError(f"invalid unknown name {u!r}", ln, col + stripped.index(u))
            if len(set(rest)) != len(rest):
                raise ParseError("duplicate unknown names", ln, col)
            unknowns = rest
        elif word == "weights":
            if unknowns is None:
                raise ParseError("weights before unknowns", ln, col)
            weights = _parse_weights(rest, len(unknowns), ln, col, "weights")
        elif word == "eqweights":
            eqweights_line = (rest, ln, col)
        elif word == "eq":
            if n is None or unknowns is None:
                raise ParseError("eq before dim/unknowns header", ln, col)
            body = stripped[2:]
            if ":" not in body:
                raise ParseError("expected 'eq <name>: <expr>'", ln, col + len(stripped))
            name, expr = body.split(":", 1)
            name = name.strip()
            if not _IDENT.fullmatch(name):
                raise ParseError(f"invalid equation name {name!r}", ln, col + 3)
            if name in labels:
                raise ParseError(f"duplicate equation name {name!r}", ln, col + 3)
            expr_col = indent + len(stripped) - len(expr) + 1
            rows.append(parse_expression(expr, n, unknowns, ln, expr_col))
            labels.append(name)
        else:
            raise ParseError(f"unknown directive {word!r}", ln, col)
    if n is None:
        raise ParseError("missing 'dim' line", 1, 1)
    if unknowns is None:
        raise ParseError("missing 'unknowns' line", 1, 1)
    eqw = None
    if eqweights_line is not None:
        words, ln, col = eqweights_line
        eqw = _parse_weights(words, len(rows), ln, col, "eqweights")
    return OpMatrix(rows, len(unknowns), n, unknowns, labels or None, weights, eqw)


def format_operator_file(A: OpMatrix) -> str:
    """Inverse of :func:`parse_operator_file`."""
    lines = [f"dim {A.n}", "unknowns " + " ".join(A.source_labels)]
    if any(w != 1 for w in A.source_weights):
        lines.append("weights " + " ".join(str(w) for w in A.source_weights))
    if any(w != 1 for w in A.target_weights):
        lines.append("eqweights " + " ".join(str(w) for w in A.target_weights))
    for i in range(A.p):
        lines.append(f"eq {A.target_labels[i]}: {format_row(A.rows[i], A.source_labels, A.n)}")
    return "\n".join(lines) + "\n"
