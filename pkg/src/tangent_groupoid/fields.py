"""Test functions on coordinate space: a tiny expression language.

Expressions are immutable trees built from constants, coordinates ``x0..x{n-1}``,
n-ary sums and products, non-negative integer powers, negation and the
functions ``sin``, ``cos`` and ``exp``.  There is no division, so evaluation is
total on finite inputs.

Grammar (``^`` binds tighter than unary minus, which binds tighter than ``*``)::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := '-' unary | power
    power  := atom ('^' int)?
    atom   := number | ident | func '(' expr ')' | '(' expr ')'
    func   := 'sin' | 'cos' | 'exp'
    ident  := 'x' digits

``a - b`` parses to ``Sum(a, Neg(b))``; chains of ``+``/``-`` and of ``*`` are
collected into a single n-ary node.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence, Union

import numpy as np

__all__ = [
    "Expr", "Const", "Coord", "Sum", "Product", "Pow", "Neg", "Sin", "Cos", "Exp",
    "ParseError", "ScalarField", "parse_expr", "to_text", "evaluate",
    "derivative", "substitute", "max_coord", "const", "parse_field",
    "eval_field", "differentiate", "directional_derivative",
]


class Expr:
    """Base class of expression nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, repr=False)
class Const(Expr):
    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"Const needs a finite non-negative value, got {self.value!r}; use Neg")
        object.__setattr__(self, "value", v + 0.0)  # normalise -0.0

    def __repr__(self):
        return f"Const({self.value!r})"


@dataclass(frozen=True, repr=False)
class Coord(Expr):
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("coordinate index must be non-negative")

    def __repr__(self):
        return f"Coord({self.index})"


@dataclass(frozen=True, repr=False)
class Sum(Expr):
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(self.terms) < 2:
            raise ValueError("Sum needs at least two terms")

    def __repr__(self):
        return f"Sum({', '.join(map(repr, self.terms))})"


@dataclass(frozen=True, repr=False)
class Product(Expr):
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) < 2:
            raise ValueError("Product needs at least two factors")

    def __repr__(self):
        return f"Product({', '.join(map(repr, self.factors))})"


@dataclass(frozen=True, repr=False)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or self.exponent < 0:
            raise ValueError("only non-negative integer powers are supported")

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exponent})"


@dataclass(frozen=True, repr=False)
class Neg(Expr):
    arg: Expr

    def __repr__(self):
        return f"Neg({self.arg!r})"


@dataclass(frozen=True, repr=False)
class Sin(Expr):
    arg: Expr

    def __repr__(self):
        return f"Sin({self.arg!r})"


@dataclass(frozen=True, repr=False)
class Cos(Expr):
    arg: Expr

    def __repr__(self):
        return f"Cos({self.arg!r})"


@dataclass(frozen=True, repr=False)
class Exp(Expr):
    arg: Expr

    def __repr__(self):
        return f"Exp({self.arg!r})"


_FUNCS = {"sin": Sin, "cos": Cos, "exp": Exp}
_FUNC_NAMES = {Sin: "sin", Cos: "cos", Exp: "exp"}


# --------------------------------------------------------------------------
# parsing

class ParseError(ValueError):
    """Syntax error (or out-of-range coordinate) at a byte offset of the input."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, n: int):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n = n

    @property
    def tok(self):
        return self.tokens[self.i]

    def _error(self, expected: str):
        kind, value, off = self.tok
        got = "end of input" if kind == "eof" else repr(value)
        raise ParseError(f"expected {expected}, got {got}", off)

    def _accept(self, op: str) -> bool:
        if self.tok[0] == "op" and self.tok[1] == op:
            self.i += 1
            return True
        return False

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok[0] != "eof":
            self._error("operator or end of input")
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while True:
            if self._accept("+"):
                terms.append(self.term())
            elif self._accept("-"):
                terms.append(Neg(self.term()))
            else:
                break
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> Expr:
        factors = [self.unary()]
        while self._accept("*"):
            factors.append(self.unary())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def unary(self) -> Expr:
        if self._accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self._accept("^"):
            kind, value, _ = self.tok
            if kind != "num" or not value.isdigit():
                self._error("non-negative integer exponent")
            self.i += 1
            return Pow(base, int(value))
        return base

    def atom(self) -> Expr:
        kind, value, off = self.tok
        if kind == "num":
            self.i += 1
            return Const(float(value))
        if kind == "name":
            if value in _FUNCS:
                self.i += 1
                if not self._accept("("):
                    self._error("'('")
                inner = self.expr()
                if not self._accept(")"):
                    self._error("')'")
                return _FUNCS[value](inner)
            if re.fullmatch(r"x\d+", value):
                index = int(value[1:])
                if index >= self.n:
                    raise ParseError(f"coordinate {value} out of range for dimension {self.n}", off)
                self.i += 1
                return Coord(index)
            raise ParseError(f"unknown identifier {value!r}", off)
        if self._accept("("):
            inner = self.expr()
            if not self._accept(")"):
                self._error("')'")
            return inner
        self._error("number, coordinate, function or '('")


def parse_expr(text: str, n: int) -> Expr:
    """Parse ``text`` into an expression over coordinates ``x0..x{n-1}``."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text, n).parse()


# --------------------------------------------------------------------------
# printing

_PREC = {Sum: 1, Product: 2, Neg: 3, Pow: 4}


def _prec(e: Expr) -> int:
    return _PREC.get(type(e), 5)


def _wrap(e: Expr, above: int) -> str:
    s = to_text(e)
    return f"({s})" if _prec(e) <= above else s


def to_text(e: Expr) -> str:
    """Print ``e`` so that ``parse_expr(to_text(e), n) == e``."""
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Coord):
        return f"x{e.index}"
    if isinstance(e, Sum):
        parts = [_wrap(e.terms[0], 1)]
        for t in e.terms[1:]:
            if isinstance(t, Neg):
                parts.append(" - " + _wrap(t.arg, 1))
            else:
                parts.append(" + " + _wrap(t, 1))
        return "".join(parts)
    if isinstance(e, Product):
        return "*".join(_wrap(f, 2) for f in e.factors)
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, 2)
    if isinstance(e, Pow):
        return f"{_wrap(e.base, 4)}^{e.exponent}"
    if type(e) in _FUNC_NAMES:
        return f"{_FUNC_NAMES[type(e)]}({to_text(e.arg)})"
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------------
# evaluation

def evaluate(e: Expr, x):
    """Evaluate ``e`` at the point ``x``.

    Coordinates may be floats or numpy arrays (broadcast together).
    """
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Coord):
        return x[e.index]
    if isinstance(e, Sum):
        acc = evaluate(e.terms[0], x)
        for t in e.terms[1:]:
            acc = acc + evaluate(t, x)
        return acc
    if isinstance(e, Product):
        acc = evaluate(e.factors[0], x)
        for f in e.factors[1:]:
            acc = acc * evaluate(f, x)
        return acc
    if isinstance(e, Pow):
        return evaluate(e.base, x) ** e.exponent
    if isinstance(e, Neg):
        return -evaluate(e.arg, x)
    if isinstance(e, Sin):
        return np.sin(evaluate(e.arg, x))
    if isinstance(e, Cos):
        return np.cos(evaluate(e.arg, x))
    if isinstance(e, Exp):
        return np.exp(evaluate(e.arg, x))
    raise TypeError(f"not an expression: {e!r}")


def max_coord(e: Expr) -> int:
    """Largest coordinate index used in ``e`` (-1 if none)."""
    if isinstance(e, Coord):
        return e.index
    if isinstance(e, Const):
        return -1
    return max((max_coord(c) for c in _children(e)), default=-1)


def _children(e: Expr):
    if isinstance(e, Sum):
        return e.terms
    if isinstance(e, Product):
        return e.factors
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, (Neg, Sin, Cos, Exp)):
        return (e.arg,)
    return ()


# --------------------------------------------------------------------------
# construction helpers with light simplification

ZERO = Const(0.0)
ONE = Const(1.0)


def const(v: float) -> Expr:
    """Constant node; negative values become ``Neg(Const(|v|))``."""
    v = float(v)
    return Neg(Const(-v)) if v < 0 else Const(v)


def _is_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0.0


def _is_one(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 1.0


def neg(e: Expr) -> Expr:
    if _is_zero(e):
        return e
    if isinstance(e, Neg):
        return e.arg
    return Neg(e)


def add(*terms: Expr) -> Expr:
    flat = []
    for t in terms:
        if isinstance(t, Sum):
            flat.extend(t.terms)
        elif not _is_zero(t):
            flat.append(t)
    if not flat:
        return ZERO
    return flat[0] if len(flat) == 1 else Sum(tuple(flat))


def mul(*factors: Expr) -> Expr:
    sign = 1
    coef = 1.0
    rest = []
    stack = list(factors)
    while stack:
        f = stack.pop(0)
        while isinstance(f, Neg):
            sign = -sign
            f = f.arg
        if isinstance(f, Const):
            coef *= f.value
        elif isinstance(f, Product):
            stack[:0] = list(f.factors)
        else:
            rest.append(f)
    if coef == 0.0:
        return ZERO
    if coef != 1.0 or not rest:
        rest.insert(0, Const(coef))
    body = rest[0] if len(rest) == 1 else Product(tuple(rest))
    return neg(body) if sign < 0 else body


def power(base: Expr, n: int) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return base
    return Pow(base, n)


# --------------------------------------------------------------------------
# symbolic calculus

def derivative(e: Expr, i: int) -> Expr:
    """Exact partial derivative of ``e`` with respect to coordinate ``i``."""
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Coord):
        return ONE if e.index == i else ZERO
    if isinstance(e, Sum):
        return add(*(derivative(t, i) for t in e.terms))
    if isinstance(e, Product):
        parts = []
        for k, f in enumerate(e.factors):
            df = derivative(f, i)
            if _is_zero(df):
                continue
            others = e.factors[:k] + e.factors[k + 1:]
            parts.append(mul(*others, df))
        return add(*parts)
    if isinstance(e, Pow):
        db = derivative(e.base, i)
        if e.exponent == 0 or _is_zero(db):
            return ZERO
        return mul(Const(float(e.exponent)), power(e.base, e.exponent - 1), db)
    if isinstance(e, Neg):
        return neg(derivative(e.arg, i))
    du = derivative(e.arg, i)
    if _is_zero(du):
        return ZERO
    if isinstance(e, Sin):
        return mul(Cos(e.arg), du)
    if isinstance(e, Cos):
        return neg(mul(Sin(e.arg), du))
    if isinstance(e, Exp):
        return mul(e, du)
    raise TypeError(f"not an expression: {e!r}")


def substitute(e: Expr, mapping: Mapping[int, Expr]) -> Expr:
    """Replace coordinates by expressions (structure otherwise preserved)."""
    if isinstance(e, Coord):
        return mapping.get(e.index, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Sum):
        return Sum(tuple(substitute(t, mapping) for t in e.terms))
    if isinstance(e, Product):
        return Product(tuple(substitute(f, mapping) for f in e.factors))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, mapping), e.exponent)
    return type(e)(substitute(e.arg, mapping))


# --------------------------------------------------------------------------
# scalar fields

Number = Union[int, float]


@dataclass(frozen=True)
class ScalarField:
    """A differentiable function on an ``dim``-dimensional coordinate patch."""

    dim: int
    body: Expr

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if max_coord(self.body) >= self.dim:
            raise ValueError(f"expression uses x{max_coord(self.body)} but dimension is {self.dim}")

    @classmethod
    def parse(cls, text: str, dim: int) -> "ScalarField":
        return cls(dim, parse_expr(text, dim))

    @classmethod
    def constant(cls, value: float, dim: int = 1) -> "ScalarField":
        return cls(dim, const(value))

    @classmethod
    def coordinate(cls, i: int, dim: int) -> "ScalarField":
        return cls(dim, Coord(i))

    def __call__(self, x) -> float:
        if isinstance(x, (int, float, np.number)):
            x = (x,)
        if len(x) != self.dim:
            raise ValueError(f"point has dimension {len(x)}, field has {self.dim}")
        v = evaluate(self.body, x)
        return float(v) if np.ndim(v) == 0 else v

    def partial(self, i: int) -> "ScalarField":
        return differentiate(self, i)

    def gradient(self, x) -> np.ndarray:
        return np.array([self.partial(i)(x) for i in range(self.dim)])

    def _lift(self, other) -> "ScalarField":
        if isinstance(other, ScalarField):
            if other.dim != self.dim:
                raise ValueError("fields of different dimension")
            return other
        return ScalarField(self.dim, const(other))

    def __add__(self, other):
        return ScalarField(self.dim, Sum((self.body, self._lift(other).body)))

    __radd__ = __add__

    def __sub__(self, other):
        return ScalarField(self.dim, Sum((self.body, Neg(self._lift(other).body))))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        return ScalarField(self.dim, Product((self.body, self._lift(other).body)))

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.dim, Neg(self.body))

    def __pow__(self, n: int):
        return ScalarField(self.dim, Pow(self.body, n))

    def __str__(self):
        return to_text(self.body)


def parse_field(text: str, dim: int) -> ScalarField:
    return ScalarField.parse(text, dim)


def eval_field(f: ScalarField, x: Sequence[float]) -> float:
    return f(x)


@lru_cache(maxsize=4096)
def differentiate(f: ScalarField, i: int) -> ScalarField:
    """Symbolic partial derivative of ``f`` along coordinate ``i``."""
    if not 0 <= i < f.dim:
        raise ValueError(f"coordinate index {i} out of range for dimension {f.dim}")
    return ScalarField(f.dim, derivative(f.body, i))


def directional_derivative(f: ScalarField, x: Sequence[float], X: Sequence[float]) -> float:
    """``sum_i X_i * (d_i f)(x)`` from the symbolic partials."""
    if len(x) != f.dim or len(X) != f.dim:
        raise ValueError("point, vector and field dimensions differ")
    total = 0.0
    for i in range(f.dim):
        total = total + X[i] * differentiate(f, i)(x)
    return float(total)
