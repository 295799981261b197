"""Elements of the tangent groupoid and their pairing with test functions.

A tangent element ``[x, X]`` pairs with ``f`` as the directional derivative
of ``f`` at ``x`` along ``X``; a secant element ``[x, y, eps]`` pairs as the
difference quotient ``(f(x) - f(y)) / eps``.  Range and source are
``r([x, y, eps]) = (y, eps)`` and ``s([x, y, eps]) = (x, eps)``; both are
``(x, 0)`` for tangent elements.  Two elements compose when the source of the
first equals the range of the second, and the pairing is additive under
composition.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .charts import Chart, Curve, as_point
from .fields import ScalarField, directional_derivative

__all__ = [
    "Tangent", "Secant", "BaseUnit", "SecantSequence", "Divergent", "DivergenceReason",
    "GroupoidError", "NotComposable", "MixedEpsilon", "DegenerateSecant",
    "range_of", "source_of", "unit", "compose", "inverse", "pair",
    "braided_leibniz_defect", "coordinate_quotient_defect", "curve_member",
    "sequence_limit", "format_element", "parse_element", "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-9


class GroupoidError(ValueError):
    pass


class NotComposable(GroupoidError):
    """Source of the left factor does not match range of the right factor."""


class MixedEpsilon(GroupoidError):
    """The two factors live at different deformation parameters."""


class DegenerateSecant(GroupoidError):
    """A secant with coincident endpoints where distinct ones are required."""


@dataclass(frozen=True)
class Tangent:
    x: tuple
    X: tuple

    def __post_init__(self):
        x, X = as_point(self.x), as_point(self.X)
        if len(x) != len(X):
            raise ValueError("point and vector dimensions differ")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "X", X)

    @property
    def eps(self) -> float:
        return 0.0

    @property
    def dim(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class Secant:
    x: tuple
    y: tuple
    eps: float

    def __post_init__(self):
        x, y = as_point(self.x), as_point(self.y)
        if len(x) != len(y):
            raise ValueError("endpoint dimensions differ")
        eps = float(self.eps)
        if not 0.0 < eps < 1.0:
            raise ValueError(f"secant eps must lie in (0, 1), got {eps!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "eps", eps)

    @property
    def dim(self) -> int:
        return len(self.x)


Element = Union[Tangent, Secant]


@dataclass(frozen=True)
class BaseUnit:
    point: tuple
    eps: float

    def __post_init__(self):
        object.__setattr__(self, "point", as_point(self.point))
        if not 0.0 <= self.eps < 1.0:
            raise ValueError("eps must lie in [0, 1)")


def range_of(g: Element) -> BaseUnit:
    if isinstance(g, Tangent):
        return BaseUnit(g.x, 0.0)
    return BaseUnit(g.y, g.eps)


def source_of(g: Element) -> BaseUnit:
    if isinstance(g, Tangent):
        return BaseUnit(g.x, 0.0)
    return BaseUnit(g.x, g.eps)


def unit(x, eps: float = 0.0) -> Element:
    """Identity element over ``(x, eps)``."""
    if isinstance(x, BaseUnit):
        x, eps = x.point, x.eps
    x = as_point(x)
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps!r}")
    if eps == 0.0:
        return Tangent(x, (0.0,) * len(x))
    return Secant(x, x, eps)


def _distance(a: tuple, b: tuple, chart: Chart | None) -> float:
    if chart is not None:
        return chart.distance(a, b)
    return math.dist(a, b)


def compose(g1: Element, g2: Element, tol: float = DEFAULT_TOL, chart: Chart | None = None) -> Element:
    """Groupoid product ``g1 . g2`` (apply ``g2`` first).

    ``[x, y, eps] . [w, x, eps] = [w, y, eps]`` and ``[x, X] . [x, Y] = [x, X + Y]``.
    """
    s, r = source_of(g1), range_of(g2)
    if abs(s.eps - r.eps) > tol:
        raise MixedEpsilon(f"source eps {s.eps} differs from range eps {r.eps}")
    if len(s.point) != len(r.point):
        raise NotComposable("dimension mismatch")
    if _distance(s.point, r.point, chart) > tol:
        raise NotComposable(f"source {s.point} does not match range {r.point}")
    if isinstance(g1, Tangent) and isinstance(g2, Tangent):
        return Tangent(g1.x, tuple(a + b for a, b in zip(g1.X, g2.X)))
    if isinstance(g1, Secant) and isinstance(g2, Secant):
        return Secant(g2.x, g1.y, g1.eps)
    raise MixedEpsilon("cannot compose a tangent with a secant element")


def inverse(g: Element) -> Element:
    if isinstance(g, Tangent):
        return Tangent(g.x, tuple(-v for v in g.X))
    return Secant(g.y, g.x, g.eps)


def pair(g: Element, f: ScalarField) -> float:
    """Evaluate the distribution ``g`` on the test function ``f``."""
    if g.dim != f.dim:
        raise ValueError(f"element has dimension {g.dim}, field has {f.dim}")
    if isinstance(g, Tangent):
        return directional_derivative(f, g.x, g.X)
    return (f(g.x) - f(g.y)) / g.eps


def braided_leibniz_defect(g: Element, f: ScalarField, h: ScalarField) -> float:
    """``<g|fh> - f(x)<g|h> - h(y)<g|f>``; vanishes identically.

    For tangent elements ``y = x`` and this is the ordinary Leibniz rule.
    """
    x = g.x
    y = g.x if isinstance(g, Tangent) else g.y
    return pair(g, f * h) - f(x) * pair(g, h) - h(y) * pair(g, f)


def coordinate_quotient_defect(g: Secant, f: ScalarField) -> float:
    """One-dimensional check ``<g|f> = (f(x)-f(y))/(x-y) * <g|x0>``."""
    if not isinstance(g, Secant) or g.dim != 1 or f.dim != 1:
        raise ValueError("coordinate quotient form needs a one-dimensional secant")
    (x,), (y,) = g.x, g.y
    if x == y:
        raise DegenerateSecant("x == y")
    coord = ScalarField.coordinate(0, 1)
    return pair(g, f) - (f(g.x) - f(g.y)) / (x - y) * pair(g, coord)


def _richardson(values: np.ndarray, ratio: float = 2.0, levels: int = 2) -> list[np.ndarray]:
    """Richardson table for a sequence sampled at h, h/ratio, h/ratio^2, ...

    Row ``j`` has the leading ``h^j`` error term removed.
    """
    table = [np.asarray(values, dtype=float)]
    for j in range(1, levels + 1):
        prev = table[-1]
        w = ratio ** j
        table.append((w * prev[1:] - prev[:-1]) / (w - 1))
    return table


def _spread(rows: np.ndarray) -> float:
    rows = np.atleast_2d(np.asarray(rows, dtype=float).T).T
    return float(np.max(np.max(rows, axis=0) - np.min(rows, axis=0)))


def curve_member(c: Curve, g: Element, chart: Chart | None = None, tol: float = 1e-6) -> bool:
    """Whether the curve ``c`` belongs to the class of ``g``.

    Secant: ``c(0) = x`` and ``c(eps) = y``.  Tangent: ``c(0) = x`` and the
    chart difference quotient at ``t = 2^-k``, ``k = 4..12``, extrapolates to
    ``X``.
    """
    if chart is None:
        chart = Chart.flat(g.dim)
    if c.dim != g.dim:
        return False
    if chart.distance(c(0.0), g.x) > tol:
        return False
    if isinstance(g, Secant):
        return chart.distance(c(g.eps), g.y) <= tol
    x0 = c(0.0)
    ts = [2.0 ** -k for k in range(4, 13)]
    quotients = np.array([[v / t for v in chart.log(x0, c(t))] for t in ts])
    best = _richardson(quotients)[-1]
    if _spread(best[-3:]) > tol:
        return False
    return float(np.max(np.abs(best[-1] - np.asarray(g.X)))) <= tol


class DivergenceReason(enum.Enum):
    BASE_POINTS_DIVERGE = "BasePointsDiverge"
    QUOTIENT_DIVERGES = "QuotientDiverges"
    QUOTIENT_OSCILLATES = "QuotientOscillates"
    RESCALED_DIVERGES = "RescaledDiverges"


@dataclass(frozen=True)
class Divergent:
    reason: DivergenceReason
    detail: str = ""

    def __bool__(self):
        return False


@dataclass(frozen=True)
class SecantSequence:
    """Secant elements with strictly decreasing eps."""

    terms: tuple

    def __post_init__(self):
        terms = tuple(self.terms)
        if not all(isinstance(t, Secant) for t in terms):
            raise TypeError("a secant sequence holds Secant elements")
        eps = [t.eps for t in terms]
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps must be strictly decreasing")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_functions(cls, x_of: Callable, y_of: Callable, eps: Sequence[float]) -> "SecantSequence":
        return cls(tuple(Secant(as_point(x_of(e)), as_point(y_of(e)), e) for e in eps))

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __getitem__(self, i):
        return self.terms[i]


def _linear_extrapolate(chart: Chart, p_prev, p_last, e_prev: float, e_last: float) -> tuple:
    # value at eps = 0 of the line through (e_prev, p_prev), (e_last, p_last)
    step = chart.log(p_last, p_prev)
    w = e_last / (e_prev - e_last)
    return chart.exp(p_last, tuple(-w * v for v in step))


def _base_converges(chart: Chart, pts: Sequence[tuple], tol: float) -> bool:
    ref = pts[-1]
    offsets = np.array([chart.log(ref, p) for p in pts])
    last = _spread(offsets[-3:])
    if last <= tol:
        return True
    return last <= 0.5 * _spread(offsets[:3])


def sequence_limit(s: SecantSequence, chart: Chart | None = None, tol: float = 1e-8):
    """Tangent limit of a secant sequence, or a :class:`Divergent` marker.

    Converges when the base points contract to a common point and the chart
    quotient ``(x_n - y_n) / eps_n`` settles: the linearly extrapolated
    quotients (error term ``O(eps_n)`` removed) of the last three terms agree
    within ``tol``.
    """
    terms = list(s)
    if len(terms) < 4:
        raise ValueError("sequence_limit needs at least four terms")
    if chart is None:
        chart = Chart.flat(terms[0].dim)
    xs = [t.x for t in terms]
    ys = [t.y for t in terms]
    eps = np.array([t.eps for t in terms])
    if not (_base_converges(chart, xs, tol) and _base_converges(chart, ys, tol)):
        return Divergent(DivergenceReason.BASE_POINTS_DIVERGE)
    gaps = [chart.distance(x, y) for x, y in zip(xs, ys)]
    if gaps[-1] > tol and gaps[-1] > 0.5 * max(gaps[:3]):
        return Divergent(DivergenceReason.BASE_POINTS_DIVERGE, "x_n and y_n do not meet")
    q = np.array([[v / e for v in chart.log(y, x)] for x, y, e in zip(xs, ys, eps)])
    ext = (eps[:-1, None] * q[1:] - eps[1:, None] * q[:-1]) / (eps[:-1] - eps[1:])[:, None]
    if not np.all(np.isfinite(ext)):
        return Divergent(DivergenceReason.QUOTIENT_DIVERGES, "non-finite quotient")
    if _spread(ext[-3:]) > tol:
        mags = np.linalg.norm(q[-3:], axis=1)
        if mags[0] < mags[1] < mags[2]:
            return Divergent(DivergenceReason.QUOTIENT_DIVERGES, f"|quotient| = {mags[-1]:.6g}")
        return Divergent(DivergenceReason.QUOTIENT_OSCILLATES, f"spread {_spread(ext[-3:]):.3g}")
    base = _linear_extrapolate(chart, xs[-2], xs[-1], eps[-2], eps[-1])
    return Tangent(base, tuple(float(v) for v in ext[-1]))


# --------------------------------------------------------------------------
# line format

def _fmt(p: tuple) -> str:
    return ",".join(repr(float(v)) for v in p)


def format_element(g: Element) -> str:
    """``T x | X`` or ``S x | y | eps`` with shortest round-trip decimals."""
    if isinstance(g, Tangent):
        return f"T {_fmt(g.x)} | {_fmt(g.X)}"
    return f"S {_fmt(g.x)} | {_fmt(g.y)} | {float(g.eps)!r}"


def _parse_vec(text: str) -> tuple:
    return tuple(float(v) for v in text.split(","))


def parse_element(line: str) -> Element:
    line = line.strip()
    if not line or line[0] not in "TS" or (len(line) > 1 and not line[1].isspace()):
        raise ValueError(f"element line must start with 'T ' or 'S ': {line!r}")
    fields = [p.strip() for p in line[1:].split("|")]
    try:
        if line[0] == "T":
            if len(fields) != 2:
                raise ValueError("tangent line needs 'T x | X'")
            return Tangent(_parse_vec(fields[0]), _parse_vec(fields[1]))
        if len(fields) != 3:
            raise ValueError("secant line needs 'S x | y | eps'")
        return Secant(_parse_vec(fields[0]), _parse_vec(fields[1]), float(fields[2]))
    except ValueError as exc:
        raise ValueError(f"bad element line {line!r}: {exc}") from None
