"""Dilation flows on secant elements and the toy renormalization group.

A flow ``tau_lam`` multiplies eps by ``lam`` and stretches the two endpoints
of a secant element, either about one endpoint (``ENDPOINT``) or about their
midpoint (``MIDPOINT``).  Rescaling a bare sequence ``[x_n, y_n, eps_n]`` by
``tau_{eps0/eps_n}`` moves every term to the physical scale ``eps0``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .charts import Chart
from .fields import Const, Coord, Product, ScalarField, Sum, const, substitute
from .groupoid import Divergent, DivergenceReason, Secant, SecantSequence, Tangent, pair

__all__ = [
    "FlowKind", "DilationFlow", "EpsilonOverflow", "RGTrace", "RGStep",
    "dilate", "semigroup_defect", "rescale_field", "duality_defect",
    "renormalized_limit", "canonical_representative", "order_study",
    "renormalization_order", "rg_flow_trace", "distance_to_fixed_set",
    "fit_slope", "DEFAULT_EPS0",
]

DEFAULT_EPS0 = 0.1


class EpsilonOverflow(ValueError):
    """Dilated eps would leave the interval (0, 1)."""


class FlowKind(enum.Enum):
    ENDPOINT = "endpoint"
    MIDPOINT = "midpoint"


@dataclass(frozen=True)
class DilationFlow:
    """A one-parameter dilation family on a chart.

    For ``ENDPOINT`` flows ``anchor`` picks the endpoint held fixed:
    ``"source"`` keeps ``x`` (``[x, exp_x V, eps] -> [x, exp_x lam V, lam eps]``),
    ``"range"`` keeps ``y``.  ``MIDPOINT`` flows ignore it.
    """

    kind: FlowKind
    chart: Chart
    anchor: str = "source"

    def __post_init__(self):
        object.__setattr__(self, "kind", FlowKind(self.kind))
        if self.anchor not in ("source", "range"):
            raise ValueError("anchor must be 'source' or 'range'")

    @classmethod
    def endpoint(cls, chart: Chart | int = 1, anchor: str = "source") -> "DilationFlow":
        return cls(FlowKind.ENDPOINT, _chart(chart), anchor)

    @classmethod
    def midpoint(cls, chart: Chart | int = 1) -> "DilationFlow":
        return cls(FlowKind.MIDPOINT, _chart(chart))


def _chart(c) -> Chart:
    return Chart.flat(c) if isinstance(c, int) else c


def _scale_about(chart: Chart, z: tuple, p: tuple, lam: float) -> tuple:
    return chart.exp(z, tuple(lam * v for v in chart.log(z, p)))


def dilate(flow: DilationFlow, lam: float, g: Secant) -> Secant:
    """Apply ``tau_lam`` to a secant element; eps becomes ``lam * eps``."""
    if not lam > 0:
        raise ValueError("dilation parameter must be positive")
    eps = lam * g.eps
    if eps >= 1.0:
        raise EpsilonOverflow(f"lam * eps = {eps!r} >= 1")
    chart = flow.chart
    if flow.kind is FlowKind.ENDPOINT:
        if flow.anchor == "source":
            return Secant(g.x, _scale_about(chart, g.x, g.y, lam), eps)
        return Secant(_scale_about(chart, g.y, g.x, lam), g.y, eps)
    z = chart.midpoint(g.x, g.y)
    return Secant(_scale_about(chart, z, g.x, lam), _scale_about(chart, z, g.y, lam), eps)


def _element_gap(chart: Chart, a: Secant, b: Secant) -> float:
    return max(chart.distance(a.x, b.x), chart.distance(a.y, b.y), abs(a.eps - b.eps))


def semigroup_defect(flow: DilationFlow, lam: float, mu: float, g: Secant) -> float:
    """Point distance between ``tau_{lam mu} g`` and ``tau_lam(tau_mu g)``."""
    direct = dilate(flow, lam * mu, g)
    stepwise = dilate(flow, lam, dilate(flow, mu, g))
    return max(flow.chart.distance(direct.x, stepwise.x), flow.chart.distance(direct.y, stepwise.y))


def rescale_field(chart: Chart, lam: float, a: ScalarField) -> ScalarField:
    """Dual rescaling ``(tau*_lam a)(x) = lam * a(c + (x - c) / lam)``, ``c`` the chart center."""
    if chart.kind != "flat":
        raise ValueError("field rescaling needs a flat chart")
    if not lam > 0:
        raise ValueError("rescaling parameter must be positive")
    if chart.dim != a.dim:
        raise ValueError("chart and field dimensions differ")
    inv = Const(1.0 / lam)
    mapping = {}
    for i, c in enumerate(chart.center):
        if c == 0.0:
            mapping[i] = Product((inv, Coord(i)))
        else:
            mapping[i] = Sum((const(c), Product((inv, Sum((Coord(i), const(-c)))))))
    return ScalarField(a.dim, Product((Const(float(lam)), substitute(a.body, mapping))))


def duality_defect(flow: DilationFlow, chart: Chart, lam: float, v: Secant, a: ScalarField) -> float:
    """``|<tau_lam v | tau*_lam a> - <v | a>|`` for a source-anchored endpoint flow."""
    if flow.kind is not FlowKind.ENDPOINT or flow.anchor != "source":
        raise ValueError("duality is defined for the source-anchored endpoint flow")
    if chart.distance(chart.center, v.x) > 0.0:
        raise ValueError("the rescaling chart must be centered at the base point of v")
    return abs(pair(dilate(flow, lam, v), rescale_field(chart, lam, a)) - pair(v, a))


def renormalized_limit(flow: DilationFlow, s: SecantSequence, eps0: float = DEFAULT_EPS0,
                       tol: float = 1e-8):
    """Limit in SM of the rescaled sequence ``tau_{eps0/eps_n} s_n``.

    Returns the last rescaled term when the last three agree within ``tol``,
    otherwise :class:`Divergent`.
    """
    if not 0.0 < eps0 < 1.0:
        raise EpsilonOverflow(f"reference scale {eps0!r} outside (0, 1)")
    terms = list(s)
    if len(terms) < 3:
        raise ValueError("need at least three terms")
    rescaled = [dilate(flow, eps0 / t.eps, t) for t in terms]
    tail = rescaled[-3:]
    spread = max(_element_gap(flow.chart, a, b) for a in tail for b in tail)
    if not math.isfinite(spread) or spread > tol:
        return Divergent(DivergenceReason.RESCALED_DIVERGES, f"spread {spread:.3g}")
    return rescaled[-1]


def canonical_representative(flow: DilationFlow, t: Tangent, eps0: float = DEFAULT_EPS0) -> Secant:
    """Secant element at scale ``eps0`` standing for the tangent vector ``t``.

    Endpoint: ``[exp_x(eps0 V), x, eps0]`` (forward difference).
    Midpoint: ``[exp_x(eps0 V / 2), exp_x(-eps0 V / 2), eps0]`` (central difference).
    """
    if not 0.0 < eps0 < 1.0:
        raise ValueError("eps0 must lie in (0, 1)")
    chart = flow.chart
    if flow.kind is FlowKind.ENDPOINT:
        return Secant(chart.exp(t.x, tuple(eps0 * v for v in t.X)), t.x, eps0)
    half = tuple(eps0 * v / 2 for v in t.X)
    return Secant(chart.exp(t.x, half), chart.exp(t.x, tuple(-h for h in half)), eps0)


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``ys`` against ``xs``."""
    return float(np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)[0])


_FLOOR = 1e-14


def order_study(flow: DilationFlow, f: ScalarField, t: Tangent,
                schedule: Sequence[float]) -> list[tuple[float, float]]:
    """``(eps0, |<t|f> - <rep(eps0)|f>|)`` for each scale in the schedule."""
    exact = pair(t, f)
    return [(e, abs(exact - pair(canonical_representative(flow, t, e), f))) for e in schedule]


def renormalization_order(flow: DilationFlow, f: ScalarField, t: Tangent,
                          schedule: Sequence[float]) -> float:
    """Empirical order of ``<t|f> - <rep(eps0)|f>`` in ``eps0`` (log-log slope).

    Returns ``math.inf`` when every error is below 1e-14 (exact pairing).
    """
    schedule = list(schedule)
    if len(schedule) < 4:
        raise ValueError("need at least four scales")
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("scales must be strictly decreasing")
    rows = [(e, err) for e, err in order_study(flow, f, t, schedule) if err >= _FLOOR]
    if len(rows) < 2:
        return math.inf
    return fit_slope([math.log(e) for e, _ in rows], [math.log(err) for _, err in rows])


def distance_to_fixed_set(chart: Chart, g: Secant) -> float:
    """``dist(x, y) + eps``: zero exactly on the degenerate units ``[x, x, 0]``."""
    return chart.distance(g.x, g.y) + g.eps


@dataclass(frozen=True)
class RGStep:
    lam: float
    element: Secant
    distance: float


@dataclass(frozen=True)
class RGTrace:
    steps: tuple

    def __post_init__(self):
        lams = [s.lam for s in self.steps]
        inc = all(b > a for a, b in zip(lams, lams[1:]))
        dec = all(b < a for a, b in zip(lams, lams[1:]))
        if not (inc or dec):
            raise ValueError("lambda values must be strictly monotone")

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @property
    def distances(self) -> list[float]:
        return [s.distance for s in self.steps]

    def rows(self) -> list[tuple]:
        out = []
        for s in self.steps:
            g = s.element
            x = g.x[0] if len(g.x) == 1 else g.x
            y = g.y[0] if len(g.y) == 1 else g.y
            out.append((s.lam, x, y, g.eps, s.distance))
        return out


def rg_flow_trace(flow: DilationFlow, g0: Secant, schedule: Sequence[float]) -> RGTrace:
    """Orbit ``tau_lam g0`` along a monotone schedule, with distances to the fixed set."""
    steps = []
    for lam in schedule:
        g = dilate(flow, lam, g0)
        steps.append(RGStep(float(lam), g, distance_to_fixed_set(flow.chart, g)))
    return RGTrace(tuple(steps))
