"""Experiment configurations and the batch runner behind the CLI.

A configuration is a flat ``key = value`` text file (``#`` starts a comment);
command-line ``key=value`` pairs override it.  Every experiment reads its
sweep from the ``schedule`` key: a comma-separated list of numbers or
``geom:START:RATIO:COUNT``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Mapping

from . import algebra, dilation, groupoid, qcalc
from .charts import Chart, Curve
from .fields import ScalarField, differentiate
from .report import emit_csv
from .rng import Lcg64
from .sampling import random_element, random_polynomial

KINDS = (
    "pairing", "leibniz", "convergence", "rg-order", "duality",
    "rg-trace", "quantize-defect", "moyal", "qcalc",
)

# one-line description of the identity each experiment exercises; written as
# the first line of every CSV
IDENTITIES = {
    "pairing": "secant pairing (f(x)-f(y))/eps; tangent pairing = directional derivative",
    "leibniz": "braided Leibniz rule <g|fh> = f(x)<g|h> + h(y)<g|f>",
    "convergence": "secant-to-tangent pasting: x_n, y_n -> x and (x_n-y_n)/eps_n -> X",
    "rg-order": "renormalized pairing <[x,X]|a> = <[x,X]_eps0|a> + o(eps0)",
    "duality": "rescaling duality <tau_lam v | tau*_lam a> = <v|a>",
    "rg-trace": "dilation orbit toward the fixed set {[x,x,0]}",
    "quantize-defect": "classical limit Q(h1)*Q(h2) - Q(h1 h2) = O(eps)",
    "moyal": "correspondence [Q(h1),Q(h2)]/(i eps) - Q({h1,h2}) -> 0",
    "qcalc": "shift derivative (f(x+lam)-f(x))/lam or Jackson derivative -> f'",
}

_DEFAULT_SCHEDULES = {
    "convergence": "geom:0.5:0.5:20",
    "rg-order": "geom:0.1:0.5:5",
    "duality": "0.25,0.5,2,4",
    "rg-trace": "geom:1:0.5:10",
    "quantize-defect": "0.2,0.1,0.05",
    "moyal": "0.2,0.1,0.05",
    "qcalc": "geom:0.1:0.5:5",
}


class ConfigError(ValueError):
    """Invalid experiment configuration; message starts with the field name."""


class ExperimentError(RuntimeError):
    """A module error raised while running an experiment."""


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    f: str = ""
    h: str = ""
    h1: str = ""
    h2: str = ""
    element: str = ""
    dim: int = 0
    chart: str = "flat"
    flow: str = "endpoint"
    anchor: str = "source"
    point: str = "0"
    vector: str = "1"
    eps0: float = dilation.DEFAULT_EPS0
    schedule: str | None = None
    seq_x: str = ""
    seq_y: str = ""
    mode: str = "lambda"
    N: int = 128
    L: float = 2 * math.pi
    norm: str = ""
    tol: float = 1e-8
    cases: int = 500
    degree: int = 4
    seed: int = 0
    out: str = ""

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError(f"kind: unknown experiment {self.kind!r}")
        if not self.tol > 0:
            raise ConfigError("tol: must be positive")
        if self.kind in _DEFAULT_SCHEDULES:
            self.values()
        if self.cases < 1:
            raise ConfigError("cases: must be positive")
        if self.N < 8 or self.N & (self.N - 1):
            raise ConfigError("N: must be a power of two >= 8")
        if self.flow not in ("endpoint", "midpoint"):
            raise ConfigError(f"flow: expected endpoint or midpoint, got {self.flow!r}")
        if self.seed < 0 or self.seed >= 1 << 64:
            raise ConfigError("seed: must fit in an unsigned 64-bit integer")
        return self

    def values(self) -> list[float]:
        """The parsed, validated ``schedule``."""
        text = self.schedule
        if self.kind == "rg-order" and text is None:
            text = f"geom:{self.eps0!r}:0.5:5"
        elif text is None:
            text = _DEFAULT_SCHEDULES[self.kind]
        vals = parse_schedule(text or "")
        if not vals:
            raise ConfigError("schedule: empty")
        inc = all(b > a for a, b in zip(vals, vals[1:]))
        dec = all(b < a for a, b in zip(vals, vals[1:]))
        if not (inc or dec):
            raise ConfigError("schedule: must be strictly monotone")
        return vals


def parse_schedule(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    if text.startswith("geom:"):
        try:
            start, ratio, count = text[5:].split(":")
            start, ratio, count = float(start), float(ratio), int(count)
        except ValueError:
            raise ConfigError(f"schedule: bad geometric schedule {text!r}") from None
        return [start * ratio ** k for k in range(count)]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"schedule: bad number list {text!r}") from None


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, value: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind}, got {value!r}") from None
    return value


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def build_config(settings: Mapping[str, str]) -> ExperimentConfig:
    unknown = sorted(set(settings) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    if "kind" not in settings:
        raise ConfigError("kind: missing")
    kwargs = {k: _coerce(k, str(v)) for k, v in settings.items()}
    return ExperimentConfig(**kwargs).validate()


def load_config(path, overrides: Mapping[str, str] | None = None) -> ExperimentConfig:
    settings = parse_config_text(Path(path).read_text(encoding="utf-8"))
    settings.update(overrides or {})
    return build_config(settings)


@dataclass
class ReportSummary:
    kind: str
    rows: int
    headline_name: str
    headline: object
    path: str | None = None
    table: list = field(default_factory=list, repr=False)
    header: tuple = ()

    def describe(self) -> str:
        value = self.headline
        if isinstance(value, float):
            value = f"{value:.12g}"
        where = f" -> {self.path}" if self.path else ""
        return f"{self.kind}: {self.headline_name} = {value} ({self.rows} rows){where}"


# --------------------------------------------------------------------------
# helpers

def _vec(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"bad vector {text!r}") from None


def _chart(cfg: ExperimentConfig, dim: int) -> Chart:
    spec = cfg.chart.strip()
    if spec == "flat":
        return Chart.flat(dim)
    if spec.startswith("circle"):
        L = float(spec.split(":", 1)[1]) if ":" in spec else 2 * math.pi
        return Chart.circle(L)
    raise ConfigError(f"chart: expected flat or circle[:L], got {spec!r}")


def _flow(cfg: ExperimentConfig, chart: Chart) -> dilation.DilationFlow:
    if cfg.flow == "endpoint":
        return dilation.DilationFlow.endpoint(chart, cfg.anchor)
    return dilation.DilationFlow.midpoint(chart)


def _field(text: str, dim: int, key: str) -> ScalarField:
    if not text:
        raise ConfigError(f"{key}: missing")
    return ScalarField.parse(text, dim)


def _element(cfg: ExperimentConfig):
    if not cfg.element:
        raise ConfigError("element: missing")
    return groupoid.parse_element(cfg.element)


# --------------------------------------------------------------------------
# experiments; each returns (header, rows, headline_name, headline)

def _run_pairing(cfg):
    g = _element(cfg)
    f = _field(cfg.f, g.dim, "f")
    value = groupoid.pair(g, f)
    return ("element", "f", "value"), [(groupoid.format_element(g), str(f), value)], "value", value


def _run_leibniz(cfg):
    rows = []
    if cfg.element:
        g = _element(cfg)
        f, h = _field(cfg.f, g.dim, "f"), _field(cfg.h, g.dim, "h")
        rows.append((0, groupoid.format_element(g), groupoid.braided_leibniz_defect(g, f, h)))
    else:
        rng = Lcg64(cfg.seed)
        dim = cfg.dim or 1
        for case in range(cfg.cases):
            g = random_element(rng, dim)
            f = random_polynomial(rng, dim, cfg.degree)
            h = random_polynomial(rng, dim, cfg.degree)
            rows.append((case, groupoid.format_element(g), groupoid.braided_leibniz_defect(g, f, h)))
    worst = max(abs(r[2]) for r in rows)
    return ("case", "element", "defect"), rows, "max_abs_defect", worst


def _run_convergence(cfg):
    if not cfg.seq_x or not cfg.seq_y:
        raise ConfigError("seq_x: both seq_x and seq_y are required")
    cx = Curve.parse(cfg.seq_x.split(";"))
    cy = Curve.parse(cfg.seq_y.split(";"))
    chart = _chart(cfg, cx.dim)
    schedule = cfg.values()
    seq = groupoid.SecantSequence.from_functions(cx, cy, schedule)
    rows = []
    for t in seq:
        q = [v / t.eps for v in chart.log(t.y, t.x)]
        rows.append((t.eps, _join(t.x), _join(t.y), _join(q)))
    result = groupoid.sequence_limit(seq, chart, cfg.tol)
    if isinstance(result, groupoid.Divergent):
        headline = result.reason.value
    else:
        headline = groupoid.format_element(result)
    return ("eps", "x", "y", "quotient"), rows, "limit", headline


def _join(v) -> str:
    return ",".join(repr(float(a)) for a in v)


def _run_rg_order(cfg):
    f = _field(cfg.f, 1 if not cfg.dim else cfg.dim, "f")
    chart = _chart(cfg, f.dim)
    flow = _flow(cfg, chart)
    t = groupoid.Tangent(_vec(cfg.point), _vec(cfg.vector))
    schedule = cfg.values()
    study = dilation.order_study(flow, f, t, schedule)
    slope = dilation.renormalization_order(flow, f, t, schedule)
    rows = []
    for e, err in study:
        log_err = math.log(err) if err > 0 else -math.inf
        rows.append((e, err, math.log(e), log_err, ""))
    rows.append(("", "", "", "", slope))
    return ("eps0", "abs_error", "log_eps0", "log_error", "fitted_slope"), rows, "order", slope


def _run_duality(cfg):
    v = _element(cfg)
    if not isinstance(v, groupoid.Secant):
        raise ConfigError("element: duality needs a secant element")
    a = _field(cfg.f, v.dim, "f")
    chart = Chart.flat(v.dim, center=v.x)
    flow = dilation.DilationFlow.endpoint(chart)
    rows = [(lam, dilation.duality_defect(flow, chart, lam, v, a)) for lam in cfg.values()]
    return ("lambda", "defect"), rows, "max_defect", max(r[1] for r in rows)


def _run_rg_trace(cfg):
    g0 = _element(cfg)
    if not isinstance(g0, groupoid.Secant):
        raise ConfigError("element: rg-trace needs a secant element")
    flow = _flow(cfg, _chart(cfg, g0.dim))
    trace = dilation.rg_flow_trace(flow, g0, cfg.values())
    rows = [(lam, _join(g.x), _join(g.y), g.eps, d)
            for lam, g, d in ((s.lam, s.element, s.distance) for s in trace)]
    return ("lambda", "x", "y", "eps", "dist_to_fixed_set"), rows, "final_distance", trace.distances[-1]


def _defect_rows(values):
    rows = []
    prev = None
    for eps, d in values:
        ratio = prev / d if prev is not None and d > 0 else ""
        rows.append((eps, d, ratio))
        prev = d
    return rows


def _observables(cfg):
    if not cfg.h1 or not cfg.h2:
        raise ConfigError("h1: both h1 and h2 are required")
    return algebra.Observable.parse(cfg.h1), algebra.Observable.parse(cfg.h2)


def _run_quantize_defect(cfg):
    h1, h2 = _observables(cfg)
    grid = algebra.GridSpec(cfg.N, cfg.L)
    norm = cfg.norm or "rowsum"
    values = [(e, algebra.classical_limit_defect(h1, h2, e, grid, norm)) for e in cfg.values()]
    rows = _defect_rows(values)
    return ("eps", "defect", "ratio"), rows, "last_ratio", rows[-1][2]


def _run_moyal(cfg):
    h1, h2 = _observables(cfg)
    grid = algebra.GridSpec(cfg.N, cfg.L)
    norm = cfg.norm or "resolved"
    values = [(e, algebra.moyal_defect(h1, h2, e, grid, norm)) for e in cfg.values()]
    rows = _defect_rows(values)
    return ("eps", "defect", "ratio"), rows, "max_defect", max(d for _, d in values)


def _run_qcalc(cfg):
    f = _field(cfg.f, 1, "f")
    (x,) = _vec(cfg.point)
    exact = differentiate(f, 0)((x,))
    rows = []
    for s in cfg.values():
        if cfg.mode == "lambda":
            value = qcalc.lambda_derivative(f, x, s)
            err = abs(value - exact)
        elif cfg.mode == "jackson":
            value = qcalc.jackson_derivative(f, x, s)
            err = abs(value - exact)
        else:
            raise ConfigError(f"mode: expected lambda or jackson, got {cfg.mode!r}")
        rows.append((s, value, exact, err))
    if cfg.mode == "jackson":
        scale = [abs(s - 1) for s, *_ in rows]
    else:
        scale = [abs(s) for s, *_ in rows]
    pts = [(math.log(a), math.log(r[3])) for a, r in zip(scale, rows) if r[3] >= 1e-14 and a > 0]
    slope = dilation.fit_slope(*zip(*pts)) if len(pts) >= 2 else math.inf
    return ("parameter", "value", "exact", "abs_error"), rows, "order", slope


_RUNNERS = {
    "pairing": _run_pairing,
    "leibniz": _run_leibniz,
    "convergence": _run_convergence,
    "rg-order": _run_rg_order,
    "duality": _run_duality,
    "rg-trace": _run_rg_trace,
    "quantize-defect": _run_quantize_defect,
    "moyal": _run_moyal,
    "qcalc": _run_qcalc,
}


def run_experiment(cfg: ExperimentConfig) -> ReportSummary:
    """Run the configured pipeline and write its CSV (when ``cfg.out`` is set)."""
    cfg.validate()
    try:
        header, rows, name, headline = _RUNNERS[cfg.kind](cfg)
    except (ConfigError, ExperimentError):
        raise
    except ValueError as exc:
        raise ExperimentError(f"{cfg.kind}: {type(exc).__name__}: {exc}") from exc
    path = None
    if cfg.out:
        comment = f"tangent-groupoid {cfg.kind}: {IDENTITIES[cfg.kind]}"
        emit_csv(rows, cfg.out, header, comment)
        path = cfg.out
    return ReportSummary(cfg.kind, len(rows), name, headline, path, rows, tuple(header))
