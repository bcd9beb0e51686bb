import csv
import json
import math

import pytest

from mstasep import ParticleState, RateTable, transition_matrix
from mstasep.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_VERIFY_FAIL,
    ConfigError,
    JobConfig,
    canonical_config,
    cmd_prob,
    cmd_simulate,
    cmd_verify,
    main,
    parse_config,
    resolve_targets,
)


def minimal_config(**overrides):
    data = {
        "rates": [1.0, 2.0],
        "initial": {"positions": [0, 1], "species": [2, 1]},
        "time": 0.5,
        "targets": [{"positions": [0, 1], "species": [1, 2]}],
    }
    data.update(overrides)
    return json.dumps(data)


def test_parse_minimal_config():
    cfg = parse_config(minimal_config())
    assert cfg.rates == RateTable((1.0, 2.0))
    assert cfg.initial == ParticleState((0, 1), (2, 1))
    assert cfg.time == 0.5
    assert cfg.targets == (ParticleState((0, 1), (1, 2)),)
    assert cfg.spectral.nodes_per_dim == 32


def test_canonical_round_trip_is_byte_identical():
    cfg = parse_config(minimal_config(spectral={"nodes_per_dim": 64}, output={"format": "json"}))
    text = canonical_config(cfg)
    assert canonical_config(parse_config(text)) == text


def test_window_targets_round_trip():
    cfg = parse_config(minimal_config(targets="window"))
    text = canonical_config(cfg)
    assert parse_config(text).targets == "window"
    states = resolve_targets(cfg)
    assert cfg.initial in states and len(states) > 10


@pytest.mark.parametrize(
    "patch",
    [
        {"typo": 1},
        {"initial": {"positions": [0, 1], "species": [2, 1], "extra": 0}},
        {"spectral": {"nodes": 16}},
        {"output": {"format": "csv", "where": "x"}},
        {"targets": [{"positions": [0, 1]}]},
        {"targets": 7},
        {"time": -1.0},
        {"rates": [1.0, -2.0]},
        {"initial": {"positions": [1, 1], "species": [1, 2]}},
        {"initial": {"positions": [0, 1], "species": [1, 5]}},
    ],
)
def test_bad_configs_rejected(patch):
    with pytest.raises(ConfigError):
        parse_config(minimal_config(**patch))


def test_invalid_json_rejected():
    with pytest.raises(ConfigError):
        parse_config("{not json")


def test_cmd_prob_writes_expected_csv(tmp_path):
    cfg_path = tmp_path / "job.json"
    cfg_path.write_text(minimal_config())
    out_path = tmp_path / "out.csv"
    code = main(["prob", "--config", str(cfg_path), "--out", str(out_path)])
    assert code == EXIT_OK
    rows = list(csv.DictReader(out_path.open()))
    assert len(rows) == 1
    row = rows[0]
    assert row["positions"] == "0;1" and row["species"] == "1,2"
    exact = 2.0 * math.exp(-1.0) * (1.0 - math.exp(-0.5))
    assert float(row["value"]) == pytest.approx(exact, abs=1e-10)
    assert int(row["nodes_used"]) >= 32
    # 17 significant digits: the printed value reparses to the exact double
    res = transition_matrix(
        ParticleState((0, 1), (2, 1)), [ParticleState((0, 1), (1, 2))], 0.5, RateTable((1.0, 2.0))
    )[0]
    assert float(row["value"]) == res.value


def test_cmd_prob_time_zero_window_single_unit_row(tmp_path):
    cfg = parse_config(minimal_config(time=0.0, targets="window"))
    out_path = tmp_path / "t0.csv"
    assert cmd_prob(cfg, out=str(out_path)) == EXIT_OK
    rows = list(csv.DictReader(out_path.open()))
    assert len(rows) > 1
    big = [r for r in rows if abs(float(r["value"])) > 1e-8]
    assert len(big) == 1
    assert big[0]["positions"] == "0;1" and big[0]["species"] == "2,1"
    assert float(big[0]["value"]) == pytest.approx(1.0, abs=1e-8)


def test_cmd_prob_single_particle_poisson(tmp_path):
    data = {
        "rates": [1.5],
        "initial": {"positions": [0], "species": [1]},
        "time": 2.0,
        "targets": "window",
    }
    cfg = parse_config(json.dumps(data))
    out_path = tmp_path / "poisson.csv"
    assert cmd_prob(cfg, out=str(out_path)) == EXIT_OK
    for row in csv.DictReader(out_path.open()):
        k = int(row["positions"])
        expected = math.exp(-3.0) * 3.0**k / math.factorial(k)
        assert float(row["value"]) == pytest.approx(expected, abs=1e-10)


def test_cmd_prob_json_output(tmp_path):
    cfg = parse_config(minimal_config(output={"format": "json"}))
    out_path = tmp_path / "out.json"
    assert cmd_prob(cfg, out=str(out_path)) == EXIT_OK
    rows = json.loads(out_path.read_text())
    assert isinstance(rows, list) and rows[0]["species"] == "1,2"
    assert 0 < rows[0]["value"] < 1


def test_cmd_simulate_deterministic_and_counts(tmp_path):
    cfg = parse_config(minimal_config(targets="window", time=1.0))
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cmd_simulate(cfg, n_samples=400, seed=9, out=str(out_a)) == EXIT_OK
    assert cmd_simulate(cfg, n_samples=400, seed=9, out=str(out_b)) == EXIT_OK
    assert out_a.read_text() == out_b.read_text()
    rows = list(csv.DictReader(out_a.open()))
    assert sum(int(r["count"]) for r in rows) == 400
    for r in rows:
        assert float(r["value"]) == pytest.approx(int(r["count"]) / 400.0)


def test_cmd_simulate_single_sample_at_time_zero(tmp_path):
    cfg = parse_config(minimal_config(time=0.0, targets="window"))
    out_path = tmp_path / "one.csv"
    assert cmd_simulate(cfg, n_samples=1, seed=0, out=str(out_path)) == EXIT_OK
    rows = list(csv.DictReader(out_path.open()))
    assert len(rows) == 1
    assert rows[0]["positions"] == "0;1" and rows[0]["species"] == "2,1"
    assert rows[0]["count"] == "1" and float(rows[0]["value"]) == 1.0


def test_cmd_simulate_never_emits_forbidden_word(tmp_path):
    data = {
        "rates": [1.0, 2.0],
        "initial": {"positions": [0, 1], "species": [1, 2]},
        "time": 1.5,
        "targets": "window",
    }
    cfg = parse_config(json.dumps(data))
    out_path = tmp_path / "sim.csv"
    assert cmd_simulate(cfg, n_samples=500, seed=3, out=str(out_path)) == EXIT_OK
    for row in csv.DictReader(out_path.open()):
        assert row["species"] == "1,2"


def test_verify_suites_pass_quickly():
    assert cmd_verify("yang-baxter", size=3, seed=0, trials=5) == EXIT_OK
    assert cmd_verify("welldef", size=3, seed=0, trials=5) == EXIT_OK
    assert cmd_verify("boundary", size=2, seed=0, trials=5) == EXIT_OK
    assert cmd_verify("stochastic", size=2, seed=0, trials=1) == EXIT_OK
    assert cmd_verify("oracle", size=2, seed=0, trials=1) == EXIT_OK


def test_verify_failure_exit_code(monkeypatch):
    import mstasep.cli as cli_mod

    monkeypatch.setitem(cli_mod.SUITE_TOLERANCES, "yang-baxter", 1e-30)
    assert cmd_verify("yang-baxter", size=3, seed=0, trials=2) == EXIT_VERIFY_FAIL


def test_verify_unknown_suite():
    with pytest.raises(ConfigError):
        cmd_verify("nonsense")


def test_main_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(minimal_config(typo=1))
    assert main(["prob", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["prob", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    assert main(["simulate", "--config", str(bad), "--samples", "5"]) == EXIT_CONFIG


def test_cmd_prob_not_converged_exit_code(tmp_path):
    cfg = parse_config(
        minimal_config(spectral={"nodes_per_dim": 4, "max_nodes": 8, "adapt_tol": 1e-18})
    )
    out_path = tmp_path / "never.csv"
    assert cmd_prob(cfg, out=str(out_path)) == 3
    assert not out_path.exists()


def test_main_verify_and_prob_paths(tmp_path):
    assert main(["verify", "welldef", "--trials", "2"]) == EXIT_OK
    cfg_path = tmp_path / "job.json"
    cfg_path.write_text(minimal_config())
    out_path = tmp_path / "rows.csv"
    assert main(["prob", "--config", str(cfg_path), "--out", str(out_path), "--threads", "2"]) == EXIT_OK
    assert out_path.exists()


def test_canonical_config_defaults_materialized():
    cfg = parse_config(minimal_config())
    data = json.loads(canonical_config(cfg))
    assert data["spectral"] == {
        "adapt_tol": 1e-08,
        "max_nodes": 256,
        "nodes_per_dim": 32,
        "radius": None,
    }
    assert "output" not in data


def test_job_config_is_frozen():
    cfg = parse_config(minimal_config())
    assert isinstance(cfg, JobConfig)
    with pytest.raises(AttributeError):
        cfg.time = 1.0
