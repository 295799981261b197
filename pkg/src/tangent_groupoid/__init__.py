"""Executable tangent groupoid: secant/tangent distributions, dilation flows,
the groupoid convolution algebra and deformed derivatives."""
from .charts import Chart, Curve, exp_map
from .fields import ParseError, ScalarField, differentiate, directional_derivative, eval_field, parse_expr, to_text
from .groupoid import (
    BaseUnit, DegenerateSecant, Divergent, DivergenceReason, MixedEpsilon, NotComposable,
    Secant, SecantSequence, Tangent, braided_leibniz_defect, compose, coordinate_quotient_defect,
    curve_member, format_element, inverse, pair, parse_element, range_of, sequence_limit,
    source_of, unit,
)

__version__ = "0.1.0"
