"""Deformed one-dimensional calculus: shift (lambda) and Jackson (q) derivatives."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .fields import Coord, Exp, Product, ScalarField, Sum, const, differentiate

__all__ = [
    "ZeroDeformation", "ZeroPoint", "DegenerateQ", "LambdaShift", "Jackson",
    "lambda_derivative", "jackson_derivative", "q_number",
    "braided_leibniz_defect_deformed", "CFamily", "c_family_basis",
    "annihilator_member",
]


class ZeroDeformation(ValueError):
    """lambda = 0: use the ordinary derivative instead."""


class ZeroPoint(ValueError):
    """The Jackson derivative is undefined at x = 0."""


class DegenerateQ(ValueError):
    """q = 1 collapses the Jackson quotient."""


@dataclass(frozen=True)
class LambdaShift:
    lam: float

    def __post_init__(self):
        if self.lam == 0 or not math.isfinite(self.lam):
            raise ZeroDeformation("lambda must be finite and nonzero")

    def shifted(self, x: float) -> float:
        return x + self.lam

    def derivative(self, f: ScalarField, x: float) -> float:
        return lambda_derivative(f, x, self.lam)


@dataclass(frozen=True)
class Jackson:
    q: float

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError("q must be positive")
        if self.q == 1:
            raise DegenerateQ("q = 1")

    def shifted(self, x: float) -> float:
        return self.q * x

    def derivative(self, f: ScalarField, x: float) -> float:
        return jackson_derivative(f, x, self.q)


def _check_1d(f: ScalarField) -> None:
    if f.dim != 1:
        raise ValueError("deformed derivatives act on one-variable fields")


def lambda_derivative(f: ScalarField, x: float, lam: float) -> float:
    """``(f(x + lam) - f(x)) / lam``."""
    _check_1d(f)
    if lam == 0:
        raise ZeroDeformation("lambda = 0")
    return (f((x + lam,)) - f((x,))) / lam


def jackson_derivative(f: ScalarField, x: float, q: float) -> float:
    """``(f(q x) - f(x)) / ((q - 1) x)``."""
    _check_1d(f)
    if x == 0:
        raise ZeroPoint("x = 0")
    if q == 1:
        raise DegenerateQ("q = 1")
    return (f((q * x,)) - f((x,))) / ((q - 1) * x)


def q_number(n: int, q: float) -> float:
    """``[n]_q = (q^n - 1) / (q - 1) = 1 + q + ... + q^(n-1)``."""
    return math.fsum(q ** k for k in range(n))


def braided_leibniz_defect_deformed(d, f: ScalarField, g: ScalarField, x: float) -> float:
    """``D(fg)(x) - f(shift x) Dg(x) - g(x) Df(x)``; zero identically."""
    return d.derivative(f * g, x) - f((d.shifted(x),)) * d.derivative(g, x) - g((x,)) * d.derivative(f, x)


@dataclass(frozen=True)
class CFamily:
    """Generator ``c(p)`` whose derivatives span a deformed tangent space."""

    generator: ScalarField

    def __post_init__(self):
        _check_1d(self.generator)

    @classmethod
    def exponential(cls, lam: float) -> "CFamily":
        """``c(p) = lam^-2 exp(lam p)``."""
        if lam == 0:
            raise ZeroDeformation("lambda = 0")
        body = Product((const(lam ** -2), Exp(Product((const(lam), Coord(0))))))
        return cls(ScalarField(1, body))

    @classmethod
    def classical(cls) -> "CFamily":
        """``c(p) = p^2 / 2``."""
        return cls(ScalarField.parse("0.5*x0^2", 1))

    def derivative(self, n: int) -> ScalarField:
        return _nth_derivative(self.generator, n)


@lru_cache(maxsize=256)
def _nth_derivative(f: ScalarField, n: int) -> ScalarField:
    return f if n == 0 else differentiate(_nth_derivative(f, n - 1), 0)


def c_family_basis(c: CFamily, n: int) -> ScalarField:
    """``p_n(p) = c^(n)(p) - c^(n)(0)``."""
    if n < 1:
        raise ValueError("order must be at least 1")
    dn = c.derivative(n)
    return ScalarField(1, Sum((dn.body, const(-dn((0.0,))))))


def annihilator_member(f: ScalarField, lam: float, tol: float = 1e-12) -> bool:
    """``f(0) = 0`` and the shift derivative of ``f`` at 0 vanishes."""
    return abs(f((0.0,))) <= tol and abs(lambda_derivative(f, 0.0, lam)) <= tol
