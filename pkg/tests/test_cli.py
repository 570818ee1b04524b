import csv
import io
from pathlib import Path

import numpy as np
import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from ogc.cli import main
from ogc.results import fmt, read_table
from ogc.scenario import ParseError, ScenarioError, SchemaError, SeriesLengthError, load_scenario, parse_document

ROOT = Path(__file__).resolve().parents[1]
EXAMPLE = ROOT / "scenarios" / "example.yaml"

MINIMAL = """\
run: {horizon: 3, alpha: 0.1, epsilon: 0.0}
grid:
  voltage_matrix: [[0.05, 0.0]]
  voltage_offset: [1.0]
  substation_weights: [1.0, 0.0]
  substation_offset: 0.0
  tracking: 0.2
devices:
  - {kind: pv, s_rated: 1.0, available_power: 0.5}
"""


def write(tmp_path, text, name="s.yaml"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_minimal_file_round_trip(tmp_path):
    scn = load_scenario(write(tmp_path, MINIMAL))
    assert scn.horizon == 3 and scn.step_size == 0.1 and len(scn.devices) == 1


def test_v_min_above_v_max(tmp_path):
    text = MINIMAL.replace("grid:\n", "grid:\n  v_min: 1.1\n  v_max: 0.9\n")
    with pytest.raises(SchemaError) as info:
        load_scenario(write(tmp_path, text))
    assert "v_min" in str(info.value)


def test_short_series(tmp_path):
    text = MINIMAL.replace("tracking: 0.2", "tracking: [0.1, 0.2]")
    with pytest.raises(SeriesLengthError) as info:
        load_scenario(write(tmp_path, text))
    assert "2" in str(info.value) and "4" in str(info.value)


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(SchemaError) as info:
        load_scenario(write(tmp_path, MINIMAL.replace("epsilon: 0.0", "epsilon: 0.0, bogus: 1")))
    assert "bogus" in str(info.value)


def test_parse_error_has_location():
    with pytest.raises(ParseError) as info:
        parse_document("run: [1, 2\n  x: :\n")
    assert info.value.line is not None


def test_exponent_floats_parse():
    assert parse_document("a: 1e-6")["a"] == 1e-6


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=200))
def test_loader_never_crashes(text):
    """Arbitrary text either loads or raises a ScenarioError."""
    try:
        doc = parse_document(text)
    except ScenarioError:
        return
    from ogc.scenario import scenario_from_document
    try:
        scenario_from_document(doc)
    except ScenarioError:
        pass


@settings(max_examples=100, deadline=None)
@given(st.dictionaries(st.sampled_from(["horizon", "alpha", "epsilon", "seed", "junk"]),
                       st.one_of(st.integers(-3, 5), st.floats(allow_nan=True), st.text(max_size=3), st.none())))
def test_mutated_run_section(run):
    doc = yaml.safe_load(MINIMAL)
    doc["run"] = run
    from ogc.scenario import scenario_from_document
    try:
        scenario_from_document(doc)
    except ScenarioError:
        pass


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert float(fmt(x)) == x


def test_validate_ok(capsys):
    assert main(["validate", str(EXAMPLE)]) == 0
    assert capsys.readouterr().out.startswith("OK")


def test_exit_codes(tmp_path, capsys):
    assert main([]) == 1
    assert main(["run"]) == 1
    bad = write(tmp_path, MINIMAL.replace("horizon: 3", "horizon: -3"))
    assert main(["validate", str(bad)]) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert err[-1].startswith("error: SchemaError:")
    infeasible = write(tmp_path, MINIMAL.replace("grid:\n", "grid:\n  v_min: 2.0\n  v_max: 3.0\n"), "inf.yaml")
    assert main(["run", str(infeasible), "--out", str(tmp_path / "o")]) == 3
    assert capsys.readouterr().err.startswith("error: InfeasibleStep:")
    assert main(["report", str(tmp_path / "missing")]) == 2
    assert main(["run", str(write(tmp_path, MINIMAL, "m.yaml")), "--alpha", "-1"]) == 1


def test_three_step_run_and_report(tmp_path, capsys):
    src = write(tmp_path, MINIMAL)
    out = tmp_path / "run"
    assert main(["run", str(src), "--out", str(out)]) == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert len(lines) == 4
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    assert capsys.readouterr().out == (out / "summary.csv").read_text()
    # tamper: report now disagrees
    (out / "summary.csv").write_text("quantity,value\nhorizon,99\n")
    assert main(["report", str(out)]) == 3


def strip_elapsed(text):
    return "\n".join(l for l in text.splitlines() if not l.startswith("elapsed_seconds"))


def test_run_twice_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}"
        assert main(["run", str(EXAMPLE), "--epsilon", "0", "--seed", "4", "--out", str(out)]) == 0
        outs.append(out)
    for name in ("trajectory.csv", "summary.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    assert strip_elapsed((outs[0] / "meta.txt").read_text()) == strip_elapsed((outs[1] / "meta.txt").read_text())
    meta = (outs[0] / "meta.txt").read_text()
    assert "overrides: seed=4,epsilon=0.0" in meta


def test_summary_consistent_with_trajectory(tmp_path):
    out = tmp_path / "r"
    assert main(["run", str(EXAMPLE), "--out", str(out)]) == 0
    t = read_table(out / "trajectory.csv")
    summary = dict(csv.reader(io.StringIO((out / "summary.csv").read_text())))
    assert float(summary["avg_regret"]) == pytest.approx(np.sum(t["regret"]) / len(t["regret"]), rel=1e-12)
    assert int(summary["horizon"]) == len(t["regret"])


def test_seed_sweep(tmp_path):
    out = tmp_path / "mc"
    assert main(["run", str(EXAMPLE), "--seeds", "0..2", "--out", str(out)]) == 0
    rows = list(csv.reader(io.StringIO((out / "montecarlo.csv").read_text())))
    assert len(rows) == 4
    agg = dict(csv.reader(io.StringIO((out / "aggregate.csv").read_text())))
    assert int(agg["seeds"]) == 3
    assert main(["run", str(EXAMPLE), "--seeds", "3..1"]) == 1
