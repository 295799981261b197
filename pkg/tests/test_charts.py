import math

import pytest
from hypothesis import given, strategies as st

from tangent_groupoid.charts import Chart, Curve, exp_map

coords = st.floats(-50, 50, allow_nan=False)


def test_flat_exp():
    assert exp_map(Chart.flat(2), (1.0, 2.0), (0.5, -1.0)) == (1.5, 1.0)


def test_circle_exp_wraps():
    c = Chart.circle(2 * math.pi)
    (v,) = exp_map(c, 3 * math.pi / 2, math.pi)
    assert v == pytest.approx(math.pi / 2, abs=1e-15)
    (w,) = exp_map(Chart.circle(1.0), 0.9, 0.2)
    assert w == pytest.approx(0.1, abs=1e-15)


def test_circle_log_takes_shortest_arc():
    c = Chart.circle(1.0)
    assert c.log(0.95, 0.05)[0] == pytest.approx(0.1)
    assert c.log(0.05, 0.95)[0] == pytest.approx(-0.1)
    assert c.midpoint(0.9, 0.1)[0] == pytest.approx(0.0, abs=1e-15) or c.midpoint(0.9, 0.1)[0] == pytest.approx(1.0)


def test_circle_points_stored_wrapped():
    c = Chart.circle(1.0, center=2.25)
    assert c.center == (0.25,)
    assert c.wrap(-1e-20) == (0.0,)


@given(st.tuples(coords, coords))
def test_exp_of_zero_is_identity_flat(x):
    assert Chart.flat(2).exp(x, (0.0, 0.0)) == x


@given(st.floats(0, 6.28, exclude_max=True))
def test_exp_of_zero_is_identity_circle(x):
    assert Chart.circle(6.28).exp(x, 0.0) == (x,)


@given(st.tuples(coords, coords), st.tuples(coords, coords), st.tuples(coords, coords))
def test_flat_exp_additive(x, v, w):
    c = Chart.flat(2)
    lhs = c.exp(c.exp(x, v), w)
    rhs = c.exp(x, (v[0] + w[0], v[1] + w[1]))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_curve_evaluation():
    c = Curve.parse(["x0", "2*x0^2"])
    assert c(3.0) == (3.0, 18.0)
    with pytest.raises(ValueError):
        Curve.parse(["x1"])
