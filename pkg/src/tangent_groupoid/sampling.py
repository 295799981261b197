"""Random test objects for property sweeps."""
from __future__ import annotations

import itertools

from .fields import Coord, Product, ScalarField, Sum, const, power
from .groupoid import Secant, Tangent


def _monomials(dim: int, degree: int):
    for exps in itertools.product(range(degree + 1), repeat=dim):
        if sum(exps) <= degree:
            yield exps


def random_polynomial(rng, dim: int = 1, degree: int = 4) -> ScalarField:
    """Dense polynomial of total degree <= ``degree`` with coefficients in [-1, 1]."""
    terms = []
    for exps in _monomials(dim, degree):
        c = rng.uniform(-1.0, 1.0)
        factors = [const(c)] + [power(Coord(i), e) for i, e in enumerate(exps) if e]
        terms.append(factors[0] if len(factors) == 1 else Product(tuple(factors)))
    body = terms[0] if len(terms) == 1 else Sum(tuple(terms))
    return ScalarField(dim, body)


def random_point(rng, dim: int, lo: float = -2.0, hi: float = 2.0) -> tuple:
    return tuple(rng.uniform(lo, hi) for _ in range(dim))


def random_secant(rng, dim: int = 1, eps_lo: float = 0.05, eps_hi: float = 0.95) -> Secant:
    return Secant(random_point(rng, dim), random_point(rng, dim), rng.uniform(eps_lo, eps_hi))


def random_tangent(rng, dim: int = 1) -> Tangent:
    return Tangent(random_point(rng, dim), random_point(rng, dim))


def random_element(rng, dim: int = 1):
    return random_tangent(rng, dim) if rng.random() < 0.25 else random_secant(rng, dim)
