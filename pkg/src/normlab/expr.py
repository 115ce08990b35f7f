"""Arithmetic expressions over the kernel variables ``s``, ``r`` and ``c``.

Grammar (precedence climbing, lowest binding first)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := atom ('^' unary)?          # right associative, binds tighter than unary minus
    atom    := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Evaluation is vectorized: variables may be numpy arrays of any broadcastable
shape.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ParseError

VARIABLES = ("s", "r", "c")


def _step(u):
    return np.where(u >= 0, 1.0, 0.0)


def _nary(op):
    def apply(*args):
        out = args[0]
        for a in args[1:]:
            out = op(out, a)
        return out

    return apply


# name -> (callable, min arity, max arity or None for variadic)
FUNCTIONS: dict[str, tuple[Callable, int, int | None]] = {
    "min": (_nary(np.minimum), 2, None),
    "max": (_nary(np.maximum), 2, None),
    "abs": (np.abs, 1, 1),
    "exp": (np.exp, 1, 1),
    "log": (np.log, 1, 1),
    "sqrt": (np.sqrt, 1, 1),
    "step": (_step, 1, 1),
}

NONSMOOTH = frozenset({"min", "max", "abs", "step"})


class Node:
    def evaluate(self, env):
        raise NotImplementedError

    def names(self) -> set[str]:
        return set()


@dataclass(frozen=True)
class Num(Node):
    value: float

    def evaluate(self, env):
        return self.value

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var(Node):
    name: str

    def evaluate(self, env):
        return env[self.name]

    def names(self):
        return {self.name}

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg(Node):
    operand: Node

    def evaluate(self, env):
        return -self.operand.evaluate(env)

    def names(self):
        return self.operand.names()

    def __str__(self):
        return f"(-{self.operand})"


_BINARY = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.true_divide,
    "^": np.power,
}


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def evaluate(self, env):
        lhs = self.left.evaluate(env)
        rhs = self.right.evaluate(env)
        if self.op == "^":
            # float power so that negative integer exponents on ints are legal
            return np.power(np.asarray(lhs, dtype=float), rhs)
        return _BINARY[self.op](lhs, rhs)

    def names(self):
        return self.left.names() | self.right.names()

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call(Node):
    func: str
    args: tuple[Node, ...]

    def evaluate(self, env):
        fn = FUNCTIONS[self.func][0]
        return fn(*(a.evaluate(env) for a in self.args))

    def names(self):
        out = {self.func}
        for a in self.args:
            out |= a.names()
        return out

    def __str__(self):
        return f"{self.func}({', '.join(str(a) for a in self.args)})"


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if value == "**":
                value = "^"
            tokens.append((kind, value, pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, v, pos = self.tok
        if v != value or kind == "end":
            found = "end of input" if kind == "end" else repr(v)
            raise ParseError(f"expected {value!r}, found {found}", pos)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, v, pos = self.tok
        if kind != "end":
            raise ParseError(f"unexpected token {v!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok[0] == "op" and self.tok[1] in ("+", "-"):
            op = self.advance()[1]
            operand = self.unary()
            return Neg(operand) if op == "-" else operand
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, value, pos = self.tok
        if kind == "num":
            self.advance()
            return Num(float(value))
        if kind == "name":
            self.advance()
            if self.tok[1] == "(" and self.tok[0] == "op":
                return self.call(value, pos)
            if value in FUNCTIONS:
                raise ParseError(f"function {value!r} used without arguments", pos)
            if value not in VARIABLES:
                raise ParseError(f"unknown identifier {value!r}", pos)
            return Var(value)
        if kind == "op" and value == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(value)
        raise ParseError(f"unexpected {found}", pos)

    def call(self, name: str, pos: int) -> Node:
        if name not in FUNCTIONS:
            raise ParseError(f"unknown function {name!r}", pos)
        self.expect("(")
        args = [self.expr()]
        while self.tok[0] == "op" and self.tok[1] == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        _, lo, hi = FUNCTIONS[name]
        if len(args) < lo or (hi is not None and len(args) > hi):
            want = f"{lo}" if lo == hi else (f"at least {lo}" if hi is None else f"{lo}..{hi}")
            raise ParseError(f"{name}() takes {want} argument(s), got {len(args)}", pos)
        return Call(name, tuple(args))


class Profile:
    """A parsed radial-angular profile ``kappa(s, r, c)``.

    ``str(profile)`` prints a fully parenthesized canonical form that parses
    back to the same tree.
    """

    def __init__(self, tree: Node, source: str):
        self.tree = tree
        self.source = source
        names = tree.names()
        self.variables = frozenset(names & set(VARIABLES))
        self.nonsmooth = bool(names & NONSMOOTH)

    def __call__(self, s, r, c):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return self.tree.evaluate({"s": s, "r": r, "c": c})

    def __str__(self):
        return str(self.tree)

    def __repr__(self):
        return f"Profile({self.source!r})"


def parse_profile(text: str) -> Profile:
    """Parse ``text`` into an evaluable :class:`Profile`.

    Raises ParseError (with a character position) on syntax errors, unknown
    identifiers and function arity mismatches.
    """
    if not isinstance(text, str):
        raise ParseError(f"profile must be a string, got {type(text).__name__}")
    return Profile(_Parser(text).parse(), text)
