"""One-variable arithmetic expressions for densities and coefficients.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | 'x' | FUNC '(' expr (',' expr)* ')' | '(' expr ')'

Functions: exp, log, sin, cos, sqrt, abs (one argument) and pow (two).
Evaluation works on floats or numpy arrays and raises
:class:`EvaluationError` on domain violations instead of returning NaN.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Expression",
    "ExpressionSyntaxError",
    "EvaluationError",
    "parse",
    "evaluate",
    "to_string",
]

FUNCTIONS = {"exp": 1, "log": 1, "sin": 1, "cos": 1, "sqrt": 1, "abs": 1, "pow": 2}


class ExpressionSyntaxError(ValueError):
    """Raised for malformed text; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class EvaluationError(ArithmeticError):
    def __init__(self, message: str, subexpression: "Expression", x: float):
        super().__init__(f"{message} in '{to_string(subexpression)}' at x={x!r}")
        self.subexpression = subexpression
        self.x = x


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expression = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(f"unexpected character {text[bad]!r}", _byte_offset(text, bad))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.take()
        if val != value or kind == "end":
            raise ExpressionSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", off)

    def expr(self) -> Expression:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expression:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val == "x":
                return Var()
            if val not in FUNCTIONS:
                raise ExpressionSyntaxError(f"unknown identifier {val!r}", off)
            self.expect("(")
            args = [self.expr()]
            while self.peek()[1] == ",":
                self.take()
                args.append(self.expr())
            self.expect(")")
            if len(args) != FUNCTIONS[val]:
                raise ExpressionSyntaxError(
                    f"{val} takes {FUNCTIONS[val]} argument(s), got {len(args)}", off
                )
            return Call(val, tuple(args))
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionSyntaxError(f"unexpected {val or 'end of input'!r}", off)


def parse(text: str) -> Expression:
    """Parse ``text`` into an expression tree."""
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    parser = _Parser(text)
    node = parser.expr()
    kind, val, off = parser.peek()
    if kind != "end":
        raise ExpressionSyntaxError(f"unexpected {val!r}", off)
    return node


def to_string(e: Expression) -> str:
    """Fully parenthesised text that parses back to the same tree."""
    if isinstance(e, Num):
        if e.value < 0 or (e.value == 0 and np.signbit(e.value)):
            return f"(-{-e.value!r})"
        return repr(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Neg):
        return f"(-{to_string(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_string(e.left)} {e.op} {to_string(e.right)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(to_string(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


def _first_bad(x, mask):
    m, xs = np.broadcast_arrays(np.asarray(mask), np.asarray(x, dtype=float))
    return float(xs[m][0]) if m.ndim else float(xs)


def _power(base, expo, node, x):
    bad = (base == 0) & (expo < 0)
    if np.any(bad):
        raise EvaluationError("zero raised to a negative power", node, _first_bad(x, bad))
    out = np.power(base, expo)
    bad = np.isnan(out) & ~np.isnan(base) & ~np.isnan(expo)
    if np.any(bad):
        raise EvaluationError("negative base with non-integer exponent", node, _first_bad(x, bad))
    return out


def _eval(e: Expression, x):
    if isinstance(e, Num):
        return np.float64(e.value)
    if isinstance(e, Var):
        return x
    if isinstance(e, Neg):
        return -_eval(e.operand, x)
    if isinstance(e, BinOp):
        a = _eval(e.left, x)
        b = _eval(e.right, x)
        if e.op == "+":
            out = a + b
        elif e.op == "-":
            out = a - b
        elif e.op == "*":
            out = a * b
        elif e.op == "/":
            bad = np.broadcast_to(b == 0, np.broadcast(a, b).shape)
            if np.any(bad):
                raise EvaluationError("division by zero", e, _first_bad(x, bad))
            out = a / b
        else:
            return _power(a, b, e, x)
        bad = np.isnan(out) & ~(np.isnan(a) | np.isnan(b))
        if np.any(bad):
            raise EvaluationError("undefined result", e, _first_bad(x, bad))
        return out
    if isinstance(e, Call):
        args = [_eval(a, x) for a in e.args]
        if e.name == "pow":
            return _power(args[0], args[1], e, x)
        (a,) = args
        if e.name == "log":
            bad = a <= 0
            if np.any(bad):
                raise EvaluationError("log of a nonpositive value", e, _first_bad(x, bad))
            return np.log(a)
        if e.name == "sqrt":
            bad = a < 0
            if np.any(bad):
                raise EvaluationError("sqrt of a negative value", e, _first_bad(x, bad))
            return np.sqrt(a)
        fn = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "abs": np.abs}[e.name]
        out = fn(a)
        bad = np.isnan(out) & ~np.isnan(a)
        if np.any(bad):
            raise EvaluationError("undefined result", e, _first_bad(x, bad))
        return out
    raise TypeError(f"not an expression: {e!r}")


def evaluate(e: Expression, x):
    """Evaluate at a float (returns float) or an array (returns array)."""
    scalar = np.ndim(x) == 0
    xa = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        out = _eval(e, xa)
    out = np.broadcast_to(out, xa.shape)
    return float(out) if scalar else np.array(out, dtype=float)
