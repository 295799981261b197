"""Charts with exponential maps: flat R^n and the circle of circumference L."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .fields import Expr, evaluate, max_coord, parse_expr

__all__ = ["Chart", "Curve", "as_point", "exp_map"]


def as_point(p) -> tuple:
    """Normalise a scalar or sequence to a tuple of floats."""
    if isinstance(p, (int, float)):
        return (float(p),)
    return tuple(float(v) for v in p)


@dataclass(frozen=True)
class Chart:
    """A coordinate chart.

    ``kind`` is ``"flat"`` (R^n, exp is translation) or ``"circle"`` (one
    angle-like coordinate stored in ``[0, L)``; differences go along the
    shortest arc).  ``center`` is the base point used by rescalings.
    """

    kind: str
    dim: int
    circumference: float = math.inf
    center: tuple = field(default=None)

    def __post_init__(self):
        if self.kind not in ("flat", "circle"):
            raise ValueError(f"unknown chart kind {self.kind!r}")
        if self.kind == "circle":
            if self.dim != 1:
                raise ValueError("circle charts are one-dimensional")
            if not (self.circumference > 0 and math.isfinite(self.circumference)):
                raise ValueError("circle circumference must be positive and finite")
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        c = (0.0,) * self.dim if self.center is None else as_point(self.center)
        if len(c) != self.dim:
            raise ValueError("center has the wrong dimension")
        object.__setattr__(self, "center", self.wrap(c))

    @classmethod
    def flat(cls, n: int, center=None) -> "Chart":
        return cls("flat", n, center=center)

    @classmethod
    def circle(cls, L: float = 2 * math.pi, center=0.0) -> "Chart":
        return cls("circle", 1, float(L), center=center)

    def centered_at(self, center) -> "Chart":
        return Chart(self.kind, self.dim, self.circumference, center)

    def _check(self, p: tuple) -> tuple:
        if len(p) != self.dim:
            raise ValueError(f"expected a point of dimension {self.dim}, got {len(p)}")
        return p

    def wrap(self, p) -> tuple:
        p = as_point(p)
        if self.kind == "circle":
            v = p[0] % self.circumference
            if v >= self.circumference:  # -tiny % L rounds up to L
                v = 0.0
            return (v,)
        return p

    def exp(self, x, V) -> tuple:
        """Exponential map: move from ``x`` along the vector ``V``."""
        x, V = self._check(as_point(x)), self._check(as_point(V))
        return self.wrap(tuple(a + b for a, b in zip(x, V)))

    def log(self, x, y) -> tuple:
        """Vector ``V`` with ``exp(x, V) = y`` (shortest arc on the circle)."""
        x, y = self._check(as_point(x)), self._check(as_point(y))
        if self.kind == "circle":
            L = self.circumference
            d = (y[0] - x[0] + L / 2) % L - L / 2
            return (d,)
        return tuple(b - a for a, b in zip(x, y))

    def distance(self, x, y) -> float:
        return math.hypot(*self.log(x, y)) if self.dim > 1 else abs(self.log(x, y)[0])

    def midpoint(self, x, y) -> tuple:
        x = as_point(x)
        return self.exp(x, tuple(v / 2 for v in self.log(x, y)))


def exp_map(chart: Chart, x, V) -> tuple:
    return chart.exp(x, V)


@dataclass(frozen=True)
class Curve:
    """A parametrised curve ``t -> (c_0(t), ..., c_{n-1}(t))``.

    Each component is an expression in the single parameter, written ``x0``.
    """

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a curve needs at least one component")
        for c in comps:
            if not isinstance(c, Expr) or max_coord(c) > 0:
                raise ValueError("curve components must be expressions in x0 only")
        object.__setattr__(self, "components", comps)

    @classmethod
    def parse(cls, texts: Sequence[str]) -> "Curve":
        if isinstance(texts, str):
            texts = [texts]
        return cls(tuple(parse_expr(t, 1) for t in texts))

    @property
    def dim(self) -> int:
        return len(self.components)

    def __call__(self, t: float) -> tuple:
        return tuple(float(evaluate(c, (t,))) for c in self.components)
