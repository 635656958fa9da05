import csv
import io
import json
import math
from pathlib import Path

import pytest

from markedmzi import cli

DOCS = Path(__file__).resolve().parents[1] / "docs" / "csv_schema.md"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_table_phi30_particle(capsys):
    code, out, _ = run(capsys, "table", "--phi-deg", "30", "--mode", "particle", "--pairs", "0")
    assert code == 0
    rows = rows_of(out)
    cells = {(r["signal"], r["idler"]): float(r["analytic"]) for r in rows}
    expected = {("D1", "D3"): 0.25, ("D1", "D4"): 0.0, ("D1", "D5"): 0.25,
                ("D2", "D3"): 0.0, ("D2", "D4"): 0.25, ("D2", "D5"): 0.25}
    for cell, p in expected.items():
        assert cells[cell] == pytest.approx(p, abs=1e-12)
    assert all(float(r["abs_diff"]) <= 1e-12 for r in rows)
    assert all(r["mc_mean"] == "" for r in rows)


def test_table_dark_port(capsys):
    _, out, _ = run(capsys, "table", "--phi-deg", "45", "--mode", "wave", "--alpha-deg", "0", "--pairs", "0")
    for r in rows_of(out):
        if r["signal"] == "D2":
            assert float(r["analytic"]) <= 1e-12
            assert float(r["circuit"]) <= 1e-12


def test_table_with_sampling(capsys):
    _, out, _ = run(capsys, "table", "--phi-deg", "30", "--mode", "particle", "--pairs", "100000", "--trials", "50")
    for r in rows_of(out):
        mean, sd, p = float(r["mc_mean"]), float(r["mc_std"]), float(r["analytic"])
        assert abs(mean - p) <= 4 * sd + 1e-15


@pytest.mark.parametrize("measurement", ["mem", "erasure"])
def test_table_other_measurements(capsys, measurement):
    code, out, _ = run(capsys, "table", "--phi-deg", "15", "--measurement", measurement, "--pairs", "0")
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 4
    assert max(float(r["abs_diff"]) for r in rows) <= 1e-12


def test_invalid_scenario_exit_code(capsys):
    code, out, err = run(capsys, "table", "--phi-deg", "10")
    assert code == 2
    assert out == ""
    assert len(err.strip().splitlines()) == 1
    assert "phi_deg" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["table", "--mode", "sideways"])
    assert exc.value.code == 2


def test_bad_config_line(capsys, tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("phi_deg = 30\nfoo = 1\n")
    code, _, err = run(capsys, "table", "--config", str(cfg))
    assert code == 2 and ":2:" in err


def test_flag_overrides_config(capsys, tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("phi_deg = 40\nmode = particle\npairs = 0\n")
    _, out, _ = run(capsys, "table", "--config", str(cfg), "--phi-deg", "35")
    rows = rows_of(out)
    assert {r["phi_deg"] for r in rows} == {"35"}
    assert {r["mode"] for r in rows} == {"particle"}


def test_sweep_phi_figure_columns(capsys):
    _, out, _ = run(capsys, "sweep-phi", "--mode", "wave", "--alpha-deg", "0", "--pairs", "0")
    rows = rows_of(out)
    assert len(rows) == 16
    for r in rows:
        assert r["status"] == "ok"
        assert float(r["p_D5_total"]) == pytest.approx(float(r["V"]), abs=1e-12)
        assert float(r["V_scan"]) == pytest.approx(float(r["V"]), abs=1e-9)
        assert float(r["D2_plus_V2"]) == pytest.approx(1.0, abs=1e-12)
        assert float(r["p_D2_D5"]) == 0.0
        assert float(r["K"]) == pytest.approx(1 - float(r["V"]), abs=1e-12)


def test_sweep_phi_mem_full_range(capsys):
    _, out, _ = run(capsys, "sweep-phi", "--measurement", "mem", "--steps", "10", "--pairs", "0")
    rows = rows_of(out)
    assert float(rows[0]["phi_deg"]) == 0.0
    assert rows[0]["K"] == ""
    for r in rows:
        assert float(r["D2_plus_V2"]) == pytest.approx(1.0, abs=1e-12)


def test_sweep_phi_domain_reject_and_row(capsys):
    code, out, err = run(capsys, "sweep-phi", "--start-deg", "10", "--stop-deg", "45", "--pairs", "0")
    assert code == 2 and out == "" and "22.5" in err
    code, out, _ = run(capsys, "sweep-phi", "--start-deg", "10", "--stop-deg", "45", "--steps", "8",
                       "--pairs", "0", "--on-domain-error", "row")
    assert code == 0
    statuses = [r["status"] for r in rows_of(out)]
    assert statuses[0].startswith("domain_error") and statuses[-1] == "ok"


def test_sweep_spec_validation(capsys):
    code, _, err = run(capsys, "sweep-phi", "--steps", "1")
    assert code == 2 and "steps" in err
    code, _, _ = run(capsys, "sweep-phi", "--start-deg", "40", "--stop-deg", "30")
    assert code == 2


def test_sweep_rows_are_rederivable(capsys):
    _, out, _ = run(capsys, "sweep-phi", "--steps", "3", "--pairs", "20000", "--trials", "10", "--seed", "4")
    row = rows_of(out)[1]
    _, out2, _ = run(
        capsys, "table", "--phi-deg", row["phi_deg"], "--alpha-deg", row["alpha_deg"], "--mode", row["mode"],
        "--measurement", row["measurement"], "--pairs", row["pairs"], "--trials", row["trials"],
        "--seed", row["seed"],
    )
    for r in rows_of(out2):
        key = f"{r['signal']}_{r['idler']}"
        assert r["mc_mean"] == row[f"mc_{key}"]
        assert r["mc_std"] == row[f"sd_{key}"]
        assert r["analytic"] == row[f"p_{key}"]


def test_fringe_at_45(capsys):
    _, out, _ = run(capsys, "fringe", "--phi-deg", "45", "--steps", "13", "--pairs", "0")
    for r in rows_of(out):
        alpha = math.radians(float(r["alpha_deg"]))
        assert float(r["prob_D1"]) == pytest.approx(math.cos(alpha / 2) ** 2, abs=1e-12)


def test_fringe_at_30(capsys):
    _, out, _ = run(capsys, "fringe", "--phi-deg", "30", "--pairs", "0")
    rows = rows_of(out)
    assert len(rows) == 101
    assert float(rows[0]["visibility"]) == pytest.approx(0.5, abs=1e-9)
    for r in rows:
        assert float(r["cond_D1_D3"]) == pytest.approx(0.5, abs=1e-12)
        assert float(r["cond_D1_D4"]) == pytest.approx(0.5, abs=1e-12)
    assert float(rows[0]["visibility_D5"]) == pytest.approx(1.0, abs=1e-12)
    assert float(rows[0]["visibility_D3"]) == pytest.approx(0.0, abs=1e-12)


def test_fringe_sampled_column(capsys):
    _, out, _ = run(capsys, "fringe", "--phi-deg", "30", "--steps", "5", "--pairs", "100000", "--trials", "20")
    for r in rows_of(out):
        assert abs(float(r["mc_prob_D1"]) - float(r["prob_D1"])) <= 4 * float(r["sd_prob_D1"])


def test_fringe_rejects_particle_mode(capsys):
    code, _, err = run(capsys, "fringe", "--mode", "particle")
    assert code == 2 and "wave" in err


def test_json_wraps_same_rows(capsys):
    args = ["table", "--phi-deg", "33", "--pairs", "1000", "--trials", "5"]
    _, out_csv, _ = run(capsys, *args)
    _, out_json, _ = run(capsys, *args, "--json")
    doc = json.loads(out_json)
    assert doc["command"] == "table"
    assert doc["columns"] == cli.table_columns()
    assert doc["meta"]["max_abs_diff"] <= 1e-12
    for crow, jrow in zip(rows_of(out_csv), doc["rows"]):
        assert crow["signal"] == jrow["signal"]
        assert float(crow["mc_mean"]) == jrow["mc_mean"]
        assert float(crow["analytic"]) == jrow["analytic"]


def test_output_byte_identical(capsys, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        code = cli.main(["sweep-phi", "--steps", "4", "--pairs", "100000", "--trials", "20", "--out", str(p)])
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    text = paths[0].read_text()
    assert "\r" not in text
    assert capsys.readouterr().out == ""


def test_number_format():
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert cli.fmt(-0.0) == "0"
    assert cli.fmt(None) == ""
    assert cli.fmt(3) == "3"


def test_schema_doc_matches_code():
    doc = DOCS.read_text()
    blocks = [cli.table_columns()]
    for m in ("usd", "mem", "erasure"):
        blocks += [cli.sweep_phi_columns(m), cli.fringe_columns(m)]
    for cols in blocks:
        assert ",".join(cols) in doc


def test_selfcheck_passes(capsys):
    code, out, _ = run(capsys, "selfcheck")
    assert code == 0
    assert "FAIL" not in out


def test_selfcheck_negative_control(capsys):
    code, out, _ = run(capsys, "selfcheck", "--corrupt-npbs")
    assert code == 3
    assert "FAIL  oracle equivalence" in out
