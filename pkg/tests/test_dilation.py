import math

import pytest

from tangent_groupoid.charts import Chart
from tangent_groupoid.dilation import (
    DilationFlow, EpsilonOverflow, canonical_representative, dilate,
    distance_to_fixed_set, duality_defect, order_study, renormalization_order,
    renormalized_limit, rescale_field, rg_flow_trace, semigroup_defect,
)
from tangent_groupoid.fields import ScalarField
from tangent_groupoid.groupoid import Divergent, Secant, SecantSequence, Tangent, pair, unit
from tangent_groupoid.rng import Lcg64
from tangent_groupoid.sampling import random_polynomial

END = DilationFlow.endpoint(1)
MID = DilationFlow.midpoint(1)


def F(text, n=1):
    return ScalarField.parse(text, n)


def _close(g, h, tol=1e-15):
    return (all(abs(a - b) <= tol for a, b in zip(g.x + g.y, h.x + h.y))
            and abs(g.eps - h.eps) <= tol)


# ------------------------------------------------------------ dilate

def test_dilate_examples():
    assert _close(dilate(END, 2.0, Secant(0.0, 0.1, 0.05)), Secant(0.0, 0.2, 0.1))
    assert _close(dilate(MID, 0.5, Secant(-0.1, 0.1, 0.2)), Secant(-0.05, 0.05, 0.1))
    with pytest.raises(EpsilonOverflow):
        dilate(END, 3.0, Secant(1.0, 2.0, 0.4))


def test_range_anchor_keeps_y():
    flow = DilationFlow.endpoint(1, "range")
    assert _close(dilate(flow, 2.0, Secant(0.1, 0.0, 0.05)), Secant(0.2, 0.0, 0.1))


def test_dilate_on_circle_scales_the_arc():
    flow = DilationFlow.endpoint(Chart.circle(1.0))
    g = dilate(flow, 2.0, Secant(0.95, 0.05, 0.1))
    assert g.y[0] == pytest.approx(0.15)


def test_semigroup_examples():
    rng = Lcg64(3)
    for _ in range(20):
        g = Secant(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.01, 0.1))
        assert semigroup_defect(END, 2.0, 3.0, g) <= 1e-12
        assert semigroup_defect(END, 1.0, 1.0, g) == 0.0
        lam, mu = rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)
        assert semigroup_defect(MID, lam, mu, g) <= 1e-12


def test_epsilon_equivariance_exact():
    g = Secant(0.3, -0.2, 0.3)
    for flow in (END, MID):
        for lam in (0.1, 0.5, 1.7, 3.0):
            assert dilate(flow, lam, g).eps == lam * 0.3


# ------------------------------------------------------------ rescaling duality

def test_rescale_field_examples():
    flat = Chart.flat(1)
    r = rescale_field(flat, 2.0, F("x0^2"))
    for x in (-1.0, 0.5, 3.0):
        assert r((x,)) == pytest.approx(x * x / 2, abs=1e-15)
        assert rescale_field(flat, 3.0, F("x0"))((x,)) == pytest.approx(x, abs=1e-15)
        assert rescale_field(flat, 3.0, F("2.5"))((x,)) == 7.5


def test_rescale_field_about_center():
    chart = Chart.flat(1, center=1.0)
    r = rescale_field(chart, 2.0, F("x0^2"))
    # 2 * (1 + (x - 1)/2)^2
    assert r((3.0,)) == pytest.approx(8.0)


def test_duality_examples():
    flat = Chart.flat(1)
    v = Secant(0.0, 1.0, 0.5)
    assert pair(v, F("x0^2")) == -2.0
    assert pair(dilate(END, 2.0, Secant(0.0, 1.0, 0.4)), rescale_field(flat, 2.0, F("x0^2"))) == pytest.approx(-2.5)
    assert duality_defect(END, flat, 1.0, v, F("x0^2")) == 0.0
    with pytest.raises(EpsilonOverflow):
        duality_defect(END, flat, 2.0, v, F("x0^2"))
    assert duality_defect(END, flat, 0.5, v, F("x0^2")) <= 1e-15


def test_duality_random():
    rng = Lcg64(17)
    for _ in range(100):
        a = random_polynomial(rng, 1, 4)
        x = rng.uniform(-1, 1)
        v = Secant(x, rng.uniform(-1, 1), rng.uniform(0.05, 0.2))
        chart = Chart.flat(1, center=x)
        for lam in (0.5, 2.0, 4.0):
            assert duality_defect(END, chart, lam, v, a) <= 1e-10


def test_duality_needs_centered_chart():
    with pytest.raises(ValueError):
        duality_defect(END, Chart.flat(1), 2.0, Secant(0.5, 1.0, 0.1), F("x0"))
    with pytest.raises(ValueError):
        duality_defect(MID, Chart.flat(1), 2.0, Secant(0.0, 1.0, 0.1), F("x0"))


# ------------------------------------------------------------ renormalized limits

RANGE = DilationFlow.endpoint(1, "range")


def _bare(xf, n=24):
    eps = [2.0 ** -k for k in range(1, n + 1)]
    return SecantSequence.from_functions(xf, lambda e: 0.0, eps)


def test_renormalized_limit_examples():
    lim = renormalized_limit(RANGE, _bare(lambda e: 1.5 * e), 0.1)
    assert _close(lim, Secant(0.15, 0.0, 0.1), 1e-15)
    lim = renormalized_limit(RANGE, _bare(lambda e: e + e * e, 40), 0.1)
    # rescaled x = 0.1 * (1 + eps_n), eps_n = 2^-40
    assert _close(lim, Secant(0.1, 0.0, 0.1), 1e-12)
    div = renormalized_limit(RANGE, _bare(math.sqrt), 0.1)
    assert isinstance(div, Divergent) and not div


def test_renormalized_limit_matches_explicit_rescaling():
    s = _bare(lambda e: e + e * e, 30)
    for t in list(s)[-3:]:
        explicit = 0.1 * (t.x[0] / t.eps)
        assert dilate(RANGE, 0.1 / t.eps, t).x[0] == pytest.approx(explicit, rel=1e-15)


def test_renormalized_limit_consistency():
    for flow in (RANGE, MID):
        t = Tangent(0.3, 1.7)
        eps = [0.5 * 2.0 ** -k for k in range(12)]
        s = SecantSequence(tuple(canonical_representative(flow, t, e) for e in eps))
        lim = renormalized_limit(flow, s, 0.1)
        assert _close(lim, canonical_representative(flow, t, 0.1), 1e-12)


# ------------------------------------------------------------ canonical representatives

def test_canonical_representative_examples():
    t = Tangent(0.0, 1.0)
    assert _close(canonical_representative(END, t, 0.1), Secant(0.1, 0.0, 0.1))
    assert _close(canonical_representative(MID, t, 0.1), Secant(0.05, -0.05, 0.1))
    for flow in (END, MID):
        assert pair(canonical_representative(flow, t, 0.1), F("x0")) == pytest.approx(1.0, abs=1e-15)


def _brute_errors(central):
    # direct difference quotients of exp at 0, exact derivative 1
    out = []
    for e in (0.1, 0.05, 0.025, 0.0125):
        q = (math.exp(e / 2) - math.exp(-e / 2)) / e if central else (math.exp(e) - 1) / e
        out.append((e, abs(q - 1.0)))
    return out


def test_order_study_matches_brute_force():
    sched = [0.1, 0.05, 0.025, 0.0125]
    t = Tangent(0.0, 1.0)
    for flow, central in ((END, False), (MID, True)):
        for (e, err), (_, ref) in zip(order_study(flow, F("exp(x0)"), t, sched), _brute_errors(central)):
            assert err == pytest.approx(ref, rel=1e-9)


def test_renormalization_order_examples():
    sched = [0.1, 0.05, 0.025, 0.0125]
    t = Tangent(0.0, 1.0)
    assert renormalization_order(END, F("exp(x0)"), t, sched) == pytest.approx(1.0, abs=0.1)
    assert renormalization_order(MID, F("exp(x0)"), t, sched) == pytest.approx(2.0, abs=0.1)
    assert renormalization_order(END, F("x0"), t, sched) == math.inf


def test_renormalization_order_validates_schedule():
    with pytest.raises(ValueError):
        renormalization_order(END, F("exp(x0)"), Tangent(0.0, 1.0), [0.1, 0.05, 0.025])
    with pytest.raises(ValueError):
        renormalization_order(END, F("exp(x0)"), Tangent(0.0, 1.0), [0.1, 0.2, 0.05, 0.01])


# ------------------------------------------------------------ fixed points

def test_rg_trace_endpoint_halves():
    trace = rg_flow_trace(END, Secant(0.0, 1.0, 0.5), [2.0 ** -k for k in range(8)])
    d = trace.distances
    for a, b in zip(d, d[1:]):
        assert b / a == pytest.approx(0.5, rel=1e-12)


def test_rg_trace_midpoint_symmetric():
    trace = rg_flow_trace(MID, Secant(-1.0, 1.0, 0.5), [2.0 ** -k for k in range(10)])
    for step in trace:
        assert step.element.x[0] == -step.element.y[0]
    assert trace.distances[-1] < 0.01


def test_rg_trace_increasing_moves_away():
    trace = rg_flow_trace(END, Secant(0.0, 0.1, 0.05), [1.0, 2.0, 4.0, 8.0])
    d = trace.distances
    assert all(b > a for a, b in zip(d, d[1:]))
    assert trace.rows()[0] == (1.0, 0.0, 0.1, 0.05, pytest.approx(0.15))


def test_rg_trace_rejects_non_monotone():
    with pytest.raises(ValueError):
        rg_flow_trace(END, Secant(0.0, 1.0, 0.5), [1.0, 0.5, 0.75])


def test_units_stay_degenerate():
    for flow in (END, MID, RANGE):
        for lam in (0.01, 0.5, 1.5):
            g = dilate(flow, lam, unit(0.37, 0.4))
            assert g.x == g.y == (0.37,)
            assert distance_to_fixed_set(flow.chart, g) == lam * 0.4
    assert distance_to_fixed_set(Chart.flat(1), Secant(0.2, 0.2, 1e-300)) == 1e-300
