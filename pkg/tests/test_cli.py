import math
import subprocess
import sys

import pytest

from _cases import CLI_CASES
from tangent_groupoid.cli import main
from tangent_groupoid.experiments import (
    ConfigError, ExperimentConfig, ExperimentError, build_config, parse_schedule,
    run_experiment,
)
from tangent_groupoid.report import emit_csv, render_csv


def _run(kind, args, out):
    return main([kind, f"--out={out}", "--quiet", *args])


@pytest.mark.parametrize("kind", sorted(CLI_CASES))
def test_every_kind_runs(kind, tmp_path, capsys):
    out = tmp_path / f"{kind}.csv"
    assert _run(kind, CLI_CASES[kind], out) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith(f"# tangent-groupoid {kind}: ")
    assert len(lines) >= 3
    assert capsys.readouterr().out.startswith(f"{kind}: ")


def test_rg_order_midpoint_summary():
    cfg = build_config({"kind": "rg-order", "flow": "midpoint", "f": "exp(x0)"})
    assert cfg.values() == [0.1 * 0.5 ** k for k in range(5)]
    assert run_experiment(cfg).headline == pytest.approx(2.0, abs=0.1)
    cfg = build_config({"kind": "rg-order", "flow": "endpoint", "f": "exp(x0)"})
    assert run_experiment(cfg).headline == pytest.approx(1.0, abs=0.1)


def test_pairing_headline(capsys):
    assert main(["pairing", "element=S 1 | 0 | 0.5", "f=x0"]) == 0
    out = capsys.readouterr().out
    assert "pairing: value = 2 (1 rows)" in out


def test_convergence_headline():
    s = run_experiment(build_config({"kind": "convergence", "seq_x": "2*x0", "seq_y": "0"}))
    assert s.headline == "T 0.0 | 2.0"
    s = run_experiment(build_config({"kind": "convergence", "seq_x": "x0", "seq_y": "x0^2"}))
    assert s.headline == "T 0.0 | 1.0"


def test_empty_schedule_is_rejected(capsys):
    with pytest.raises(ConfigError, match="schedule: empty"):
        build_config({"kind": "quantize-defect", "h1": "sin(x0)", "h2": "x1", "schedule": ""})
    assert main(["quantize-defect", "h1=sin(x0)", "h2=x1", "schedule="]) == 2
    assert "schedule: empty" in capsys.readouterr().err


@pytest.mark.parametrize("settings, field", [
    ({"kind": "nope"}, "kind"),
    ({"kind": "pairing", "bogus": "1"}, "bogus"),
    ({"kind": "moyal", "N": "100"}, "N"),
    ({"kind": "moyal", "N": "x"}, "N"),
    ({"kind": "rg-trace", "schedule": "1,0.5,0.75"}, "schedule"),
    ({"kind": "rg-trace", "schedule": "geom:1:0.5"}, "schedule"),
    ({"kind": "pairing", "tol": "0"}, "tol"),
    ({"kind": "rg-order", "flow": "spiral"}, "flow"),
])
def test_validation_names_the_field(settings, field):
    with pytest.raises(ConfigError) as err:
        build_config(settings)
    assert str(err.value).startswith(field)


def test_module_errors_are_wrapped():
    with pytest.raises(ExperimentError):
        run_experiment(build_config({"kind": "rg-trace", "element": "S 0 | 1 | 0.5", "schedule": "1,2,3"}))
    assert main(["pairing", "element=S 1 | 0 | 0.5"]) == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# pairing run\nelement = S 1 | 0 | 0.5\nf = x0^2\n")
    out = tmp_path / "p.csv"
    assert main(["pairing", "--config", str(cfg), "--out", str(out), "f=x0"]) == 0
    assert out.read_text().splitlines()[-1] == "S 1.0 | 0.0 | 0.5,x0,2.0"


def test_parse_schedule():
    assert parse_schedule("0.2, 0.1,0.05") == [0.2, 0.1, 0.05]
    assert parse_schedule("geom:1:0.5:3") == [1.0, 0.5, 0.25]
    assert parse_schedule("") == []


def test_emit_csv(tmp_path):
    p = tmp_path / "e.csv"
    assert emit_csv([], p, ("eps", "err")) == 0
    assert p.read_text() == "eps,err\n"
    assert emit_csv([(0.1, 0.05)], p, ("eps", "err")) == 1
    assert p.read_text() == "eps,err\n0.1,0.05\n"
    with pytest.raises(ValueError):
        render_csv(("a", "b"), [(1,)])
    assert render_csv(("a",), [(math.inf,), (math.nan,), (True,)]) == "a\ninf\nnan\ntrue\n"


def test_reruns_are_byte_identical(tmp_path):
    for kind, args in CLI_CASES.items():
        a, b = tmp_path / f"{kind}-a.csv", tmp_path / f"{kind}-b.csv"
        assert _run(kind, args + ["seed=7"] if kind == "leibniz" else args, a) == 0
        assert _run(kind, args + ["seed=7"] if kind == "leibniz" else args, b) == 0
        assert a.read_bytes() == b.read_bytes()


def test_seed_changes_leibniz_sweep(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["leibniz", "--seed", "1", "--out", str(a), "--quiet", "cases=5"])
    main(["leibniz", "--seed", "2", "--out", str(b), "--quiet", "cases=5"])
    assert a.read_bytes() != b.read_bytes()


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "tangent_groupoid", "pairing", "element=T 0 | 1.5", "f=2.5*x0"],
                         capture_output=True, text=True, check=True).stdout
    assert "value = 3.75" in out


def test_default_config_is_valid():
    ExperimentConfig("rg-trace").validate()
