import json
import statistics

import numpy as np
import pytest

from setopt import bench, cli, problem, solver


def cfg():
    return solver.SolverConfig()


# --- artifacts -------------------------------------------------------------

def test_trace_csv_roundtrip(tmp_path):
    trace = solver.run(problem.builtin("ex1"), [2.3], cfg())
    path = str(tmp_path / "trace.csv")
    bench.write_trace_csv(trace, path)
    rows = bench.read_trace_csv(path)
    assert len(rows) == trace.iterations
    for row, rec in zip(rows, trace.records):
        assert row["k"] == rec.k
        assert row["x1"] == rec.x[0]          # exact: repr round-trip
        assert row["u_norm"] == rec.u_norm
        assert row["phi"] == rec.phi
        assert row["varsigma"] == rec.varsigma
        assert row["gap"] == rec.gap


def test_solve_summary(tmp_path):
    trace = solver.run(problem.builtin("ex5"), [4.0], cfg())
    path = str(tmp_path / "summary.json")
    bench.write_solve_summary(trace, cfg(), path)
    data = json.loads(open(path).read())
    assert data["status"] == "Converged"
    assert data["problem"] == "ex5"
    assert data["config"]["beta"] == 0.5


def test_plot_data(tmp_path):
    run_cfg = solver.SolverConfig(trace_images=True)
    trace = solver.run(problem.builtin("ex1"), [2.3], run_cfg)
    img = str(tmp_path / "img.csv")
    dec = str(tmp_path / "dec.csv")
    bench.write_plot_data(trace, img, dec)
    lines = open(img).read().splitlines()
    assert lines[0] == "k,i,y1,y2"
    assert len(lines) == 1 + 50 * trace.iterations    # p=50 rows per iteration
    assert len(open(dec).read().splitlines()) == 1 + trace.iterations


# --- start sampling and statistics -----------------------------------------

def test_sample_start_deterministic_and_in_box():
    ps = problem.builtin("ex4")
    a = bench.sample_start(ps, 7, 3)
    b = bench.sample_start(ps, 7, 3)
    assert np.array_equal(a, b)
    assert np.all(a >= ps.sample_box[:, 0]) and np.all(a <= ps.sample_box[:, 1])
    assert not np.array_equal(a, bench.sample_start(ps, 7, 4))
    assert not np.array_equal(a, bench.sample_start(ps, 8, 3))


def test_iteration_stats_fields():
    s = bench.iteration_stats([3, 5, 5, 9, 2])
    assert s["min"] == 2 and s["max"] == 9
    assert s["mean"] == pytest.approx(4.8)
    assert s["median"] == 5
    assert s["mode"] == 5
    assert s["sd"] == pytest.approx(statistics.pstdev([3, 5, 5, 9, 2]))
    assert s["min"] <= s["median"] <= s["max"]
    assert s["min"] <= s["mean"] <= s["max"]


def test_mode_tie_breaks_smallest():
    assert bench.iteration_stats([4, 4, 7, 7, 1])["mode"] == 4


def test_degenerate_single_start():
    s = bench.iteration_stats([6])
    assert s["min"] == s["max"] == s["mean"] == s["median"] == s["mode"] == 6
    assert s["sd"] == 0.0


def test_bench_stats_rederivable_from_raw(tmp_path):
    ps = problem.builtin("ex3")
    result = bench.run_bench(ps, 8, ["qnm"], 7, cfg())
    raw = str(tmp_path / "raw.csv")
    bench.write_raw_csv(result, "qnm", raw)
    lines = open(raw).read().splitlines()
    iters = [int(row.split(",")[-2]) for row in lines[1:]]
    payload = bench.stats_payload(result, cfg())
    assert payload["methods"]["qnm"]["iterations"] == bench.iteration_stats(iters)


def test_bench_jobs_independent():
    ps = problem.builtin("ex3")
    c = cfg()
    p1 = bench.stats_payload(bench.run_bench(ps, 10, ["qnm", "sd"], 7, c, jobs=1), c)
    p8 = bench.stats_payload(bench.run_bench(ps, 10, ["qnm", "sd"], 7, c, jobs=8), c)
    assert json.dumps(p1, sort_keys=True) == json.dumps(p8, sort_keys=True)


def test_qnm_beats_sd_on_ex3():
    ps = problem.builtin("ex3")
    result = bench.run_bench(ps, 20, ["qnm", "sd"], 7, cfg())
    payload = bench.stats_payload(result, cfg())
    assert (payload["methods"]["qnm"]["iterations"]["median"]
            <= payload["methods"]["sd"]["iterations"]["median"])


def test_format_table():
    ps = problem.builtin("ex5")
    result = bench.run_bench(ps, 5, ["qnm"], 1, cfg())
    table = bench.format_table(result)
    assert "Median" in table and "qnm" in table and "statuses" in table


# --- CLI -------------------------------------------------------------------

def test_cli_solve_ok(tmp_path, capsys):
    code = cli.main(["solve", "--problem", "ex1", "--x0", "2.3",
                     "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "ex1_qnm_trace.csv").exists()
    header = open(tmp_path / "ex1_qnm_trace.csv").readline().strip()
    assert header == "k,x1,u_norm,phi,t,q,varsigma,gap,skips,millis"


def test_cli_solve_bad_beta(tmp_path, capsys):
    code = cli.main(["solve", "--problem", "ex1", "--x0", "2.3",
                     "--beta", "1.5", "--out", str(tmp_path)])
    assert code == 64
    assert "(0,1)" in capsys.readouterr().err


def test_cli_solve_unknown_problem(capsys):
    assert cli.main(["solve", "--problem", "nosuch", "--x0", "1"]) == 64


def test_cli_solve_bad_x0(tmp_path, capsys):
    assert cli.main(["solve", "--problem", "ex3", "--x0", "1.0",
                     "--out", str(tmp_path)]) == 64


def test_cli_bench_deterministic(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    for d in (d1, d2):
        code = cli.main(["bench", "--problem", "ex5", "--starts", "6",
                         "--seed", "7", "--jobs", "2", "--out", str(d)])
        assert code == 0
    assert (d1 / "ex5_bench_stats.json").read_bytes() == \
        (d2 / "ex5_bench_stats.json").read_bytes()


def test_cli_plotdata_refuses_m4(tmp_path, capsys):
    prob = tmp_path / "wide.prob"
    prob.write_text("[meta]\nname=wide n=1 m=4 p=2\n[box]\n-1 1\n"
                    "[functions]\nx1^2\nx1+i\n2*x1\nx1-i\n")
    code = cli.main(["plot-data", "--problem", str(prob), "--x0", "0.5",
                     "--out", str(tmp_path)])
    assert code == 64
    assert "m <= 3" in capsys.readouterr().err


def test_cli_plotdata_ok(tmp_path):
    code = cli.main(["plot-data", "--problem", "ex1", "--x0", "2.3",
                     "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "ex1_qnm_images.csv").exists()


def test_cli_check_passes(capsys):
    path = problem.builtin_file("ex1")
    assert cli.main(["check", "--problem", path, "--samples", "5"]) == 0
    out = capsys.readouterr().out
    assert "jacobian audit" in out


def test_cli_check_bad_cone(tmp_path, capsys):
    prob = tmp_path / "bad.prob"
    prob.write_text("[meta] name=bad n=1 m=2 p=1\n[cone] rows=2\n1 0\n-1 0\n"
                    "e=1 1\n[box]\n-1 1\n[functions]\nx1\nx1^2\n")
    assert cli.main(["check", "--problem", str(prob)]) == 1
    assert "RankDeficient" in capsys.readouterr().out


def test_cli_check_domain_error(tmp_path, capsys):
    prob = tmp_path / "dom.prob"
    prob.write_text("[meta]\nname=dom n=1 m=1 p=1\n[box]\n-1 1\n"
                    "[functions]\nlog(x1)\n")
    assert cli.main(["check", "--problem", str(prob), "--samples", "20"]) == 1
    assert "DomainError" in capsys.readouterr().out


def test_cli_usage_error_exit_code():
    with pytest.raises(SystemExit) as ei:
        cli.main(["solve"])   # missing required flags
    assert ei.value.code == 64


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("SETOPT_OUT_DIR", str(tmp_path / "envout"))
    assert cli.main(["solve", "--problem", "ex5", "--x0", "4.0"]) == 0
    assert (tmp_path / "envout" / "ex5_qnm_trace.csv").exists()
