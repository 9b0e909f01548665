import csv
import io
import json
import math
import re
import subprocess
import sys
from pathlib import Path

import pytest

from ratiolist.cli import main
from ratiolist.cli.config import ConfigError, build_config, load_config_file, parse_channel, parse_ratio
from ratiolist.cli.records import RunRecord, fmt_float, to_json

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(autouse=True)
def _repo_root(monkeypatch):
    # fixture configs name their files relative to the repository root
    monkeypatch.chdir(ROOT)


def run_records(tmp_path, *argv, name="out.jsonl"):
    out = tmp_path / name
    assert main([*argv, "--format", "records", "--out", str(out)]) == 0
    text = out.read_text()
    return text, [json.loads(line) for line in text.splitlines()]


# capacity

H2_011 = -0.11 * math.log2(0.11) - 0.89 * math.log2(0.89)


@pytest.mark.parametrize("spec,want", [("bsc:0.11", 1 - H2_011), ("bec:0.3", 0.7), ("noiseless:2", 1.0)])
def test_capacity_examples(tmp_path, spec, want):
    _, [rec] = run_records(tmp_path, "capacity", "--channel", spec)
    r = rec["results"]
    assert abs(r["capacity_bits"] - want) <= 1e-6
    assert r["capacity_nats"] == pytest.approx(r["capacity_bits"] * math.log(2))
    assert r["converged"] is True


def test_capacity_from_channel_file(tmp_path):
    _, [rec] = run_records(tmp_path, "capacity", "--channel", "fixtures/z_channel.chan")
    assert round(rec["results"]["capacity_bits"], 4) == 0.5582


def test_capacity_text_output(capsys):
    assert main(["capacity", "--channel", "bsc:0.11"]) == 0
    out = capsys.readouterr().out
    assert "capacity_bits: 0.50008404183547" in out and "wall-clock:" in out


# exact

def test_exact_fixture_identity_residual_zero(tmp_path):
    _, [rec] = run_records(tmp_path, "exact", "--config", "fixtures/fixture1.cfg")
    r = rec["results"]
    assert r["identity_residual"] == 0.0 and r["integral_ratio"] is True
    assert r["list_size"] == 2 and r["code"]["M"] == 8
    assert round(r["counting_error"], 4) == 0.4496


def test_exact_ratio_one_and_noiseless_fixtures(tmp_path):
    _, [rec] = run_records(tmp_path, "exact", "--config", "fixtures/ratio_one.cfg")
    assert rec["results"]["counting_error"] == 0.0 and rec["results"]["phi_error"] == 0.0
    _, [rec] = run_records(tmp_path, "exact", "--config", "fixtures/noiseless.cfg")
    assert rec["results"]["counting_error"] == 0.0 and rec["results"]["phi_error"] == 0.0


def test_exact_with_table_metric(tmp_path):
    code = tmp_path / "t.code"
    code.write_text("3 4\n0 1 2\n2 2 0\n0 1 2\n1 0 1\n")
    _, [rec] = run_records(tmp_path, "exact", "--channel", "useless:3x3", "--metric",
                           "table:fixtures/ternary_table.metric", "--code", str(code), "--ratio", "list:2")
    assert rec["results"]["identity_residual"] <= 1e-12


# simulate, sweep

SIM = ["--channel", "bsc:0.11", "--n", "8", "--rate-bits", "0.5", "--theta-bits", "0.25",
       "--trials", "3000", "--seed", "5"]


def test_simulate_record_contents(tmp_path):
    _, [rec] = run_records(tmp_path, "simulate", *SIM, "--spectrum")
    r = rec["results"]
    assert r["code"]["M"] == 16 and r["list_size"] == 4
    assert r["errors"]["trials"] == 3000 and r["errors"]["mode"] == "monte_carlo"
    assert 0 <= r["phi_spectrum_bits"]["q0.01"] <= 0.5 + 1e-12
    assert rec["config"]["seed"] == 5 and "out" not in rec["config"]
    assert rec["rng"] and rec["version"]


def test_simulate_noiseless_top1(tmp_path):
    _, [rec] = run_records(tmp_path, "simulate", "--channel", "noiseless:2", "--code",
                           "fixtures/noiseless.code", "--list-size", "1", "--trials", "2000")
    assert rec["results"]["errors"]["eps_first_kind"] == 0.0


def test_records_output_is_byte_identical_and_replayable(tmp_path):
    a, _ = run_records(tmp_path, "simulate", *SIM, name="a.jsonl")
    b, _ = run_records(tmp_path, "simulate", *SIM, name="b.jsonl")
    assert a == b
    c, _ = run_records(tmp_path, "simulate", "--config", str(tmp_path / "a.jsonl"), name="c.jsonl")
    assert c == a
    d, _ = run_records(tmp_path, "simulate", *SIM[:-1], "6", name="d.jsonl")
    assert d != a


def test_replay_rejects_other_command(tmp_path):
    run_records(tmp_path, "simulate", *SIM, name="a.jsonl")
    assert main(["bounds", "--config", str(tmp_path / "a.jsonl")]) == 2


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nchannel = bsc:0.11\nn = 8\nrate-bits = 0.5\ntrials = 100\nseed = 1\n")
    _, [rec] = run_records(tmp_path, "simulate", "--config", str(cfg), "--trials", "200")
    assert rec["config"]["trials"] == 200 and rec["config"]["seed"] == 1
    assert rec["results"]["errors"]["trials"] == 200


def test_single_point_sweep_equals_simulate(tmp_path):
    _, [sim] = run_records(tmp_path, "simulate", *SIM, name="s.jsonl")
    _, [pt] = run_records(tmp_path, "sweep", "--channel", "bsc:0.11", "--n-grid", "8",
                          "--rate-grid-bits", "0.5", "--theta-grid-bits", "0.25",
                          "--trials", "3000", "--seed", "5", name="w.jsonl")
    assert pt["results"] == sim["results"]
    assert pt["point"] == {"index": 0, "n": 8, "rate_bits": 0.5, "theta_bits": 0.25}


def test_sweep_csv_header_and_rows(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--channel", "bsc:0.11", "--n-grid", "4,8", "--rate-grid-bits", "0.5",
                 "--theta-grid-bits", "0.25,0.6", "--trials", "500", "--format", "csv", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    skipped = list(csv.DictReader(io.StringIO(Path(str(out) + ".skipped.csv").read_text())))
    assert len(rows) + len(skipped) == 4
    assert [int(r["index"]) for r in rows] == sorted(int(r["index"]) for r in rows)
    assert all(r["reason"] for r in skipped)
    assert out.read_text().splitlines()[0].startswith("index,n,rate_bits,theta_bits,M,list_size")


def test_empty_sweep_has_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    assert main(["sweep", "--channel", "bsc:0.11", "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 and lines[0].split(",")[0] == "index"


def test_sweep_skips_oversized_points(tmp_path):
    _, recs = run_records(tmp_path, "sweep", "--channel", "bsc:0.11", "--n-grid", "40",
                          "--rate-grid-bits", "0.9", "--theta-grid-bits", "0", "--max-M", "1000")
    assert recs[0]["status"] == "skipped" and "max_M" in recs[0]["reason"]


# bounds, idbound

def test_bounds_noiseless_fano_floor_zero(tmp_path):
    _, [rec] = run_records(tmp_path, "bounds", "--config", "fixtures/noiseless.cfg", "--theta-bits", "0")
    r = rec["results"]
    assert r["fano_lower_bound"] == pytest.approx(0.0, abs=1e-12)
    assert r["converse"]["lhs_nats"] <= r["converse"]["rhs_nats"]


def test_bounds_useless_channel_rc_is_one(tmp_path):
    _, [rec] = run_records(tmp_path, "bounds", "--channel", "useless:2x2", "--n", "6",
                           "--rate-bits", "0.5", "--theta-bits", "0.1")
    assert rec["results"]["rc_upper_bound"] == 1.0
    assert rec["results"]["capacity_bits"] == pytest.approx(0.0, abs=1e-9)


def test_bounds_identification_and_rate_check(tmp_path):
    _, [rec] = run_records(tmp_path, "bounds", "--channel", "bsc:0.11", "--n", "6", "--rate-bits", "0.5",
                           "--eps", "0.1", "--delta", "0.2", "--capacity-bits", "0.5")
    assert round(rec["results"]["identification_bound"], 5) == 0.16667
    assert main(["bounds", "--channel", "bsc:0.11", "--n", "6", "--rate-bits", "0.3",
                 "--theta-bits", "0.3"]) == 2


def test_idbound_examples(tmp_path):
    _, [rec] = run_records(tmp_path, "idbound", "--capacity-bits", "0.5", "--eps", "0.1", "--delta", "0.2",
                           "--n", "10")
    assert round(rec["results"]["identification_bound"], 5) == 0.16667
    assert rec["results"]["log2_max_messages"] == 50.0
    _, [rec] = run_records(tmp_path, "idbound", "--channel", "bec:0.3", "--eps", "0.0", "--delta", "0.1")
    assert rec["results"]["capacity_source"] == "blahut_arimoto"


# validation and formats

@pytest.mark.parametrize("argv", [
    ["capacity", "--channel", "bsc:1.5"],
    ["capacity", "--channel", "nope.chan"],
    ["exact", "--channel", "bsc:0.1", "--code", "missing.code"],
    ["simulate", "--channel", "bsc:0.1", "--n", "4"],
    ["simulate", "--channel", "bsc:0.1", "--n", "4", "--M", "4", "--trials", "0"],
    ["simulate", "--channel", "bsc:0.1", "--n", "4", "--M", "4", "--metric", "table:missing"],
    ["idbound", "--capacity-bits", "1", "--eps", "0.3", "--delta", "0.2"],
    ["sweep", "--channel", "bsc:0.1", "--n-grid", "0"],
])
def test_invalid_configs_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_config_parsing_helpers(tmp_path):
    with pytest.raises(ConfigError):
        parse_channel("bec:2")
    assert parse_ratio("exponent", 0.5).param == pytest.approx(0.5 * math.log(2))
    p = tmp_path / "bad.cfg"
    p.write_text("no equals sign\n")
    with pytest.raises(ConfigError):
        load_config_file(p)
    p.write_text("colour = red\n")
    with pytest.raises(ConfigError):
        load_config_file(p)
    cfg = build_config("simulate", {"channel": "bsc:0.1", "n": 4, "M": 4}, {"tau": -math.inf})
    assert cfg.tau == -math.inf


def test_floats_use_17_significant_digits():
    assert fmt_float(0.1) == "0.10000000000000001"
    assert fmt_float(math.inf) == '"inf"' and fmt_float(-math.inf) == '"-inf"'
    line = to_json({"b": 1 / 3, "a": [True, None, 2]})
    assert line == '{"a":[true,null,2],"b":0.33333333333333331}'
    assert json.loads(line)["b"] == 1 / 3
    rec = RunRecord("capacity", {}, {"x": 2.0}, wall_clock=12.5)
    assert "wall" not in rec.to_line()


def test_csv_floats_round_trip(tmp_path):
    out = tmp_path / "cap.csv"
    assert main(["capacity", "--channel", "bsc:0.11", "--format", "csv", "--out", str(out)]) == 0
    row = next(csv.DictReader(io.StringIO(out.read_text())))
    digits = re.sub(r"[^0-9]", "", row["results.capacity_bits"].split("e")[0]).lstrip("0")
    assert len(digits) <= 17 and float(row["results.capacity_bits"]) == pytest.approx(0.50008404183547)


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "ratiolist", "idbound", "--capacity-bits", "0.5",
                          "--eps", "0.1", "--delta", "0.2"], capture_output=True, text=True, cwd=ROOT)
    assert res.returncode == 0 and "identification_bound: 0.166666666666666" in res.stdout
