"""Command-line front end: commands, output formats, usage errors and exit codes."""
import json
from pathlib import Path

import pytest

from app.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, estimate_p_opt, main, render_pretty
from app.edge_list import read_edge_list, write_edge_list
from app.partitioner import PartitionError, PartitionPlan
from app.run_config import RunConfig, validate_run_config
from config.config import Config
from conftest import complete_graph


@pytest.fixture(autouse=True)
def _log_to_tmp(tmp_path, monkeypatch):
    monkeypatch.setenv("TRIGRAPH_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("TRIGRAPH_MODE", "interleaved")


@pytest.fixture
def g5_file(tmp_path, g5):
    path = tmp_path / "g5.txt"
    path.write_text(write_edge_list(g5), encoding="utf-8")
    return str(path)


@pytest.fixture
def k4_file(tmp_path):
    path = tmp_path / "k4.txt"
    path.write_text(write_edge_list(complete_graph(4)), encoding="utf-8")
    return str(path)


def _run_json(capsys, argv):
    assert main(argv) == EXIT_OK
    return json.loads(capsys.readouterr().out)


def test_count_g5(capsys, g5_file):
    out = _run_json(capsys, ["count", "--input", g5_file, "--engine", "aop", "--ranks", "2", "--balance", "DPD"])
    assert out["total"] == 2
    assert out["engine"] == "aop"
    assert out["p"] == 2
    assert len(out["perRank"]) == 2


@pytest.mark.parametrize("engine", ["seq", "aop", "anop-direct", "anop-surrogate"])
def test_count_every_engine(capsys, g5_file, engine):
    assert _run_json(capsys, ["count", "--input", g5_file, "--engine", engine])["total"] == 2


def test_count_generated_graph_matches_sequential(capsys):
    gen = ["--gen", "gnp", "--n", "2000", "--d", "20", "--seed", "7"]
    seq = _run_json(capsys, ["count", *gen, "--engine", "seq"])
    sur = _run_json(capsys, ["count", *gen, "--engine", "anop-surrogate", "--ranks", "4"])
    assert sur["total"] == seq["total"] > 0


def test_count_is_byte_identical_across_invocations(capsys):
    argv = ["count", "--gen", "pa", "--n", "500", "--d", "6", "--seed", "3", "--engine", "anop-direct"]
    assert main(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out == first


def test_count_writes_out_and_plan(capsys, tmp_path, g5_file):
    out_path = tmp_path / "res" / "count.json"
    plan_path = tmp_path / "plan.json"
    argv = ["count", "--input", g5_file, "--ranks", "2", "--out", str(out_path), "--plan-out", str(plan_path)]
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out == ""
    result = json.loads(out_path.read_text(encoding="utf-8"))
    assert result["total"] == 2
    plan = PartitionPlan.from_json(plan_path.read_text(encoding="utf-8"))
    assert list(plan.boundaries) == result["plan"]


def test_count_pretty(capsys, g5_file):
    assert main(["count", "--input", g5_file, "--ranks", "2", "--pretty"]) == EXIT_OK
    text = capsys.readouterr().out
    assert "total: 2" in text
    assert "dataSent" in text


def test_list_g5(capsys, g5_file):
    assert main(["list", "--input", g5_file, "--sorted"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines() == ["0 1 2", "1 2 3"]


def test_list_k4_to_file(capsys, tmp_path, k4_file):
    out = tmp_path / "tri.txt"
    assert main(["list", "--input", k4_file, "--engine", "anop-surrogate", "--out", str(out)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["total"] == 4
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 4
    for line in lines:
        a, b, c = map(int, line.split())
        assert a < b < c


def test_list_triangle_free_is_empty(capsys, tmp_path):
    path = tmp_path / "path.txt"
    path.write_text("0 1\n1 2\n2 3\n", encoding="utf-8")
    assert main(["list", "--input", str(path)]) == EXIT_OK
    assert capsys.readouterr().out == ""


def test_cc_g5(capsys, g5_file):
    assert main(["cc", "--input", g5_file, "--engine", "anop-direct", "--ranks", "3"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "0 1 1.0"
    assert lines[4] == "4 0 0.0"
    assert len(lines) == 5


def test_cc_k4_to_file_with_summary(capsys, tmp_path, k4_file):
    out = tmp_path / "cc.txt"
    assert main(["cc", "--input", k4_file, "--out", str(out)]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["meanCC"] == 1.0
    assert summary["total"] == 4
    assert [line.split()[2] for line in out.read_text(encoding="utf-8").splitlines()] == ["1.0"] * 4


def test_stats(capsys, g5_file, k4_file):
    out = _run_json(capsys, ["stats", "--input", g5_file])
    assert (out["n"], out["m"], out["T"], out["k"]) == (5, 6, 2, 1)
    assert out["NTC"] == pytest.approx(0.4)
    assert out["degree"]["max"] == 3.0
    assert _run_json(capsys, ["stats", "--input", k4_file])["NTC"] == pytest.approx(1.0)


def test_approx_q_one_is_exact(capsys, g5_file):
    out = _run_json(capsys, ["approx", "--input", g5_file, "--q", "1", "--runs", "3"])
    assert out["estimates"] == [2.0, 2.0, 2.0]
    assert out["avgErrorPct"] == out["maxErrorPct"] == 0.0


def test_approx_reports_error_columns(capsys):
    argv = ["approx", "--gen", "gnp", "--n", "400", "--d", "30", "--q", "0.5", "--runs", "25", "--engine", "aop"]
    out = _run_json(capsys, argv)
    assert out["runs"] == 25
    assert out["mode"] == "per-partition"
    assert out["avgErrorPct"] <= out["maxErrorPct"]
    assert out["exact"] > 0


def test_bench(capsys, g5_file):
    out = _run_json(capsys, ["bench", "--input", g5_file])
    assert {a["total"] for a in out["algorithms"]} == {2}
    assert all("seconds" not in a for a in out["algorithms"])


def test_bench_is_byte_identical_without_timings(capsys, g5_file):
    assert main(["bench", "--input", g5_file]) == EXIT_OK
    first = capsys.readouterr().out
    assert main(["bench", "--input", g5_file]) == EXIT_OK
    assert capsys.readouterr().out == first


def test_bench_timings_flag_adds_seconds(capsys, g5_file):
    out = _run_json(capsys, ["bench", "--input", g5_file, "--timings"])
    assert all(a["seconds"] >= 0 for a in out["algorithms"])
    assert all("seconds" in o for o in out["orderings"])


def test_balance(capsys, g5_file):
    out = _run_json(capsys, ["balance", "--input", g5_file, "--ranks", "2", "--engine", "anop-surrogate"])
    assert len(out["kinds"]) == 7
    assert out["storage"]["nonOverlapTotal"] == 6


def test_popt(capsys):
    argv = ["popt", "--n", "25000000", "--d", "50", "--base-n", "1000000", "--base-d", "50", "--base-p", "120"]
    assert _run_json(capsys, argv)["pOpt"] == 600


def test_estimate_p_opt():
    assert estimate_p_opt(1e6, 50, (1e6, 50, 120)) == 120
    assert estimate_p_opt(1e6, 100, (1e6, 50, 120)) == 240
    # Halves round up.
    assert estimate_p_opt(1e6, 25, (1e6, 50, 5)) == 3
    assert estimate_p_opt(1e6, 50, (1e6, 100, 1)) == 1
    with pytest.raises(PartitionError):
        estimate_p_opt(0, 50, (1e6, 50, 120))
    with pytest.raises(PartitionError):
        estimate_p_opt(1e6, 50, (1e6, -1, 120))


@pytest.mark.parametrize(
    "argv, code",
    [
        (["approx", "--gen", "gnp", "--n", "10", "--d", "2", "--q", "0"], "INVALID_Q"),
        (["count", "--gen", "gnp", "--n", "10", "--d", "2", "--q", "0.5"], "Q_ONLY_WITH_APPROX"),
        (["count", "--gen", "gnp", "--n", "10", "--d", "2", "--runs", "3"], "RUNS_ONLY_WITH_APPROX"),
        (["count"], "MISSING_INPUT"),
        (["count", "--input", "x.txt", "--gen", "gnp", "--n", "5", "--d", "1"], "INPUT_CONFLICT"),
        (["count", "--gen", "pa", "--n", "10", "--d", "3"], "GEN_PARAMS"),
        (["count", "--gen", "gnp", "--n", "10", "--d", "2", "--engine", "mpi"], "INVALID_ENGINE"),
        (["count", "--gen", "gnp", "--n", "10", "--d", "2", "--balance", "XYZ"], "INVALID_BALANCE"),
        (["count", "--gen", "gnp", "--n", "10", "--d", "2", "--ordering", "alpha"], "INVALID_ORDERING"),
        (["count", "--gen", "gnp", "--n", "10", "--d", "2", "--ranks", "0"], "INVALID_RANKS"),
        (["count", "--gen", "gnp", "--n", "10", "--d", "2", "--sorted"], "SORTED_ONLY_WITH_LIST"),
        (["list", "--gen", "gnp", "--n", "10", "--d", "2", "--plan-out", "p.json"], "PLAN_OUT_ONLY_WITH_COUNT"),
        (["popt", "--n", "10", "--d", "2"], "POPT_PARAMS"),
        (["count", "--gen", "gnp", "--n", "10", "--d", "2", "--timings"], "TIMINGS_ONLY_WITH_BENCH"),
    ],
)
def test_usage_errors_exit_two(capsys, argv, code):
    assert main(argv) == EXIT_USAGE
    assert code in capsys.readouterr().err


def test_argparse_errors_exit_two(capsys):
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["count", "--ranks", "many"]) == EXIT_USAGE


def test_validate_run_config_accepts_defaults():
    assert validate_run_config(RunConfig(command="count", gen="gnp", n=10, d=2)) == (True, "")
    assert validate_run_config(RunConfig(command="count", input_path="g.txt", balance="dpd")) == (True, "")


def test_missing_input_file_is_runtime_failure(capsys, tmp_path):
    assert main(["count", "--input", str(tmp_path / "nope.txt")]) == EXIT_FAILURE
    assert "trigraph:" in capsys.readouterr().err


def test_malformed_input_is_runtime_failure(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 1\n1 two\n", encoding="utf-8")
    assert main(["count", "--input", str(path)]) == EXIT_FAILURE
    assert "line 2" in capsys.readouterr().err


def test_undecodable_input_is_runtime_failure(capsys, tmp_path):
    path = tmp_path / "latin.txt"
    path.write_bytes(b"0 1\n1 \xff\n")
    assert main(["count", "--input", str(path)]) == EXIT_FAILURE
    err = capsys.readouterr().err
    assert "trigraph:" in err
    assert "line 2" in err


def test_invalid_generator_parameters_are_runtime_failure(capsys):
    assert main(["count", "--gen", "gnp", "--n", "10", "--d", "20"]) == EXIT_FAILURE


def test_invalid_runtime_mode_is_config_failure(capsys, monkeypatch, g5_file):
    monkeypatch.setenv("TRIGRAPH_MODE", "mpi")
    assert main(["count", "--input", g5_file]) == EXIT_FAILURE
    assert "configuration error" in capsys.readouterr().err


def test_concurrent_mode_from_environment(capsys, monkeypatch, g5_file):
    monkeypatch.setenv("TRIGRAPH_MODE", "concurrent")
    argv = ["count", "--input", g5_file, "--engine", "anop-surrogate", "--ranks", "3"]
    assert _run_json(capsys, argv)["total"] == 2


def test_render_pretty_tables():
    text = render_pretty({"total": 2, "perRank": [{"T": 1}, {"T": 1}]})
    assert text.splitlines()[0] == "total: 2"
    assert "perRank:" in text


def test_enron_ntc(capsys):
    path = Config.ENRON_PATH
    if not path or not Path(path).is_file():
        pytest.skip("Email-Enron edge list not supplied")
    out = _run_json(capsys, ["stats", "--input", path])
    assert out["T"] == 727_044
    assert out["NTC"] == pytest.approx(19.815, abs=1e-3)
    assert read_edge_list(path).n == out["n"]
