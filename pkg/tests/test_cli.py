import json

import pytest

from knowflow import cli
from knowflow.errors import ConvergenceError
from knowflow.forecast import rescale
from knowflow.ingest import load_aggregates
from knowflow.predictors import PredictorConfig, predict_all
from knowflow.scoring import build_snapshots


@pytest.fixture(scope="module")
def agg_path(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert cli.main(["synth", "--seed", "42", "--out", str(out)]) == 0
    return out / "aggregates.json"


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_score_csv_to_stdout(agg_path, capsys):
    code, out, _ = run(["score", "--aggregates", agg_path, "--period", "T8"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "domain_a,domain_b,cs,class"
    assert len(lines) == 407
    assert "CT,MRI,13.400000,Strong" in lines


def test_score_stats_and_dot(agg_path, capsys, tmp_path):
    code, out, _ = run(["score", "--aggregates", agg_path, "--format", "stats"], capsys)
    assert code == 0 and out.startswith("statistic,T1,")
    code, _, _ = run(["score", "--aggregates", agg_path, "--period", "T1", "--format", "dot", "--out", tmp_path / "g.dot"], capsys)
    assert code == 0 and (tmp_path / "g.dot").read_text().startswith('graph "T1" {')


def test_predict_rescaled(agg_path, capsys):
    code, out, _ = run(["predict", "--aggregates", agg_path, "--period", "T7", "--predictor", "katz:0.001",
                        "--target", "T8"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "# predictor=Katz beta=0.001 train=T7 target=T8"


def test_predict_raw_scores(agg_path, capsys):
    code, out, _ = run(["predict", "--aggregates", agg_path, "--period", "T1", "--predictor", "cn"], capsys)
    assert code == 0 and out.splitlines()[1] == "domain_a,domain_b,score"


def test_dynamics_outputs(agg_path, capsys, tmp_path):
    code, _, _ = run(["dynamics", "--aggregates", agg_path, "--out", tmp_path, "--delta", "0.3"], capsys)
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["dynamics.csv", "new_strong_table.csv", "patterns.csv", "provenance.json"]
    prov = json.loads((tmp_path / "provenance.json").read_text())
    assert prov["settings"]["delta"] == {"value": 0.3, "source": "flag"}


def test_report_matches_library(agg_path, capsys):
    code, out, _ = run(["report", "--aggregates", agg_path, "--pair", "CT,MRI", "--grid", "katz:0.001,pa",
                        "--format", "json"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert [r["period"] for r in payload["rows"]] == [f"T{k}" for k in range(1, 9)]
    assert payload["rows"][0]["predicted"] == {}
    snaps = build_snapshots(load_aggregates(agg_path))
    cfg = PredictorConfig.parse("katz:0.001")
    t = snaps[0].domain_table
    expected = rescale(predict_all(snaps[6], cfg), snaps[6]).weights[t.index("CT"), t.index("MRI")]
    assert payload["rows"][7]["predicted"]["Katz(beta=0.001)"] == pytest.approx(expected, abs=1e-6)
    assert payload["rows"][7]["actual_cs"] == 13.4


def test_report_csv(agg_path, capsys):
    code, out, _ = run(["report", "--aggregates", agg_path, "--pair", "CT,MRI", "--grid", "cn"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "period,actual_cs,CommonNeighbors"
    assert len(out.splitlines()) == 9


def test_config_file_and_precedence(agg_path, capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"grid": "katz:0.001,cn", "aggregates": str(agg_path), "threads": 2}))
    out = tmp_path / "ev"
    code, _, _ = run(["evaluate", "--config", cfg, "--out", out], capsys)
    assert code == 0
    prov = json.loads((out / "provenance.json").read_text())
    assert prov["settings"]["grid"] == {"value": "katz:0.001,cn", "source": "config"}
    assert "threads" not in prov["settings"] and "out" not in prov["settings"]
    assert len((out / "metrics.csv").read_text().splitlines()) == 1 + 2 * 7
    code, _, _ = run(["evaluate", "--config", cfg, "--grid", "pa", "--out", out], capsys)
    prov = json.loads((out / "provenance.json").read_text())
    assert prov["settings"]["grid"]["source"] == "flag"


def test_env_threads(agg_path, capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("KNOWFLOW_THREADS", "0")
    code, _, err = run(["evaluate", "--aggregates", agg_path, "--grid", "cn", "--out", tmp_path], capsys)
    assert code == 2 and err == "knowflow: config: threads must be >= 1\n"
    monkeypatch.setenv("KNOWFLOW_THREADS", "3")
    code, _, _ = run(["evaluate", "--aggregates", agg_path, "--grid", "cn", "--out", tmp_path], capsys)
    assert code == 0


def test_outputs_use_unix_newlines(agg_path, capsys, tmp_path):
    run(["evaluate", "--aggregates", agg_path, "--grid", "cn", "--out", tmp_path], capsys)
    for p in tmp_path.iterdir():
        assert b"\r" not in p.read_bytes()


@pytest.mark.parametrize(
    "argv,code,prefix",
    [
        (["score", "--aggregates", "missing.json"], 2, "knowflow: config: input file missing.json not found"),
        (["evaluate", "--bogus"], 2, "knowflow: config: unrecognized arguments"),
        ([], 2, "knowflow: config: missing subcommand"),
        (["report", "--aggregates", "{agg}", "--pair", "CT"], 2, "knowflow: config: --pair needs two"),
        (["score", "--aggregates", "{agg}", "--period", "T9"], 2, "knowflow: unknown-period:"),
        (["predict", "--aggregates", "{agg}", "--period", "T1", "--predictor", "katz:7"], 2, "knowflow: config:"),
    ],
)
def test_errors_are_one_line(agg_path, capsys, argv, code, prefix):
    argv = [str(agg_path) if a == "{agg}" else a for a in argv]
    got, _, err = run(argv, capsys)
    assert got == code
    assert err.startswith(prefix)
    assert err.count("\n") == 1


def test_schema_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"domains": []}')
    code, _, err = run(["score", "--aggregates", bad], capsys)
    assert code == 2 and err.startswith("knowflow: schema:")


def test_convergence_exit_code(agg_path, capsys, tmp_path, monkeypatch):
    def boom(*a, **k):
        raise ConvergenceError("SimRank did not converge", residual=1.0, iterations=1)

    monkeypatch.setattr(cli, "backcast_sweep", boom)
    code, _, err = run(["evaluate", "--aggregates", agg_path, "--out", tmp_path], capsys)
    assert code == 3 and err == "knowflow: convergence: SimRank did not converge\n"


def test_synth_raw_then_ingest(tmp_path, capsys):
    assert cli.main(["synth", "--mode", "exact-null", "--patents", "3", "--citations", "900",
                     "--out", str(tmp_path), "--raw"]) == 0
    raw = tmp_path / "raw"
    out = tmp_path / "again.json"
    code, _, _ = run(["ingest", "--citations", raw / "citations.csv", "--patents", raw / "patents.csv",
                      "--domains", raw / "domains.csv", "--windows", raw / "windows.json", "--out", out], capsys)
    assert code == 0
    assert load_aggregates(out) == load_aggregates(tmp_path / "aggregates.json")
