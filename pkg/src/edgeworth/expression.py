"""Recursive-descent parser for user-defined statistics H(z1, ..., zk).

Grammar (standard precedence, ``^`` binds tightest and takes an integer)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | power
    power := atom ('^' integer)?
    atom  := number | variable | func '(' expr ')' | '(' expr ')'

Variables are ``z1``, ``z2``, ... (1-based); functions are ``sqrt``,
``log`` and ``exp``.  Parsed trees evaluate vectorized over the last axis of
a numpy array.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ExpressionSyntaxError, UnknownVariableError

__all__ = ["Expression", "parse"]

_FUNCS = {"sqrt": np.sqrt, "log": np.log, "exp": np.exp}
_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


@dataclass(frozen=True)
class Num:
    value: float

    def eval(self, z):
        return np.full(z.shape[:-1], self.value)


@dataclass(frozen=True)
class Var:
    index: int  # 0-based

    def eval(self, z):
        return z[..., self.index]


@dataclass(frozen=True)
class Neg:
    arg: object

    def eval(self, z):
        return -self.arg.eval(z)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object

    def eval(self, z):
        a, b = self.left.eval(z), self.right.eval(z)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int

    def eval(self, z):
        return self.base.eval(z) ** float(self.exponent)


@dataclass(frozen=True)
class Call:
    name: str
    arg: object

    def eval(self, z):
        return _FUNCS[self.name](self.arg.eval(z))


def _variables(node):
    if isinstance(node, Var):
        return {node.index}
    out = set()
    for child in ("arg", "left", "right", "base"):
        sub = getattr(node, child, None)
        if sub is not None:
            out |= _variables(sub)
    return out


@dataclass(frozen=True)
class Expression:
    """A parsed formula; call it on an array whose last axis is z1..zk."""

    root: object
    text: str

    @property
    def variables(self) -> frozenset:
        return frozenset(_variables(self.root))

    @property
    def min_k(self) -> int:
        v = self.variables
        return max(v) + 1 if v else 0

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        with np.errstate(all="ignore"):
            return self.root.eval(z)


class _Parser:
    def __init__(self, text, k):
        self.text = text
        self.k = k
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
            if m.lastgroup != "ws":
                self.tokens.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", pos)

    def fail(self, tok, what):
        kind, text, pos = tok
        found = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"expected {what}, found {found}", pos)

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.fail(tok, "an operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("-", "+"):
            self.take()
            arg = self.unary()
            return Neg(arg) if tok[1] == "-" else arg
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            return Pow(base, self.integer())
        return base

    def integer(self):
        sign = 1
        paren = False
        if self.peek()[1] == "(":
            self.take()
            paren = True
        if self.peek()[1] in ("-", "+") and self.peek()[0] == "op":
            sign = -1 if self.take()[1] == "-" else 1
        tok = self.take()
        if tok[0] != "num" or not tok[1].isdigit():
            self.fail(tok, "an integer exponent")
        if paren:
            self.expect(")")
        return sign * int(tok[1])

    def atom(self):
        tok = self.take()
        kind, text, pos = tok
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            m = re.fullmatch(r"z(\d+)", text)
            if m is None:
                raise UnknownVariableError(f"unknown name {text!r}", pos)
            index = int(m.group(1))
            if index < 1 or (self.k is not None and index > self.k):
                limit = "" if self.k is None else f" (valid: z1..z{self.k})"
                raise UnknownVariableError(f"unknown variable {text!r}{limit}", pos)
            return Var(index - 1)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.fail(tok, "a number, variable, function or '('")


def parse(text: str, k: int = None) -> Expression:
    """Parse ``text`` into an :class:`Expression`.

    Parameters
    ----------
    text : str
        Formula over ``z1..zk``.
    k : int, optional
        Coordinate count; variables beyond ``zk`` are rejected when given.

    Raises
    ------
    ExpressionSyntaxError
        Malformed input; ``offset`` gives the character position.
    UnknownVariableError
        A name that is neither ``z<i>`` (``1 <= i <= k``) nor a function.
    """
    if not isinstance(text, str):
        raise ExpressionSyntaxError("expression must be a string", 0)
    return Expression(_Parser(text, k).parse(), text)
