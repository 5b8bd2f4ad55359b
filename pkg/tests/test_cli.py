import csv
import io
import math
import subprocess
import sys

import pytest

from tripercolation.cli import (
    COMPARE_COLUMNS,
    SIMULATE_COLUMNS,
    THEORY_COLUMNS,
    InitSpec,
    UsageError,
    main,
    parse_floats,
    replica_seed,
)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_simulate_triangle(capsys):
    code, out, _ = run(capsys, "simulate", "--n", "3", "--init", "empty", "--t-max", "100", "--observe", "100")
    assert code == 0
    (row,) = rows(out)
    assert list(row) == SIMULATE_COLUMNS
    assert float(row["largest_fraction"]) == 3 / (0.5 * 3 ** 1.5)
    assert row["edge_count"] == "3" and row["non_tree_components"] == "0"


def test_simulate_deterministic(capsys):
    argv = ["simulate", "--n", "200", "--observe", "0.5,1.0", "--replicas", "4", "--seed", "7"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    assert len(rows(first)) == 8
    assert [r["replica"] for r in rows(first)] == ["0", "0", "1", "1", "2", "2", "3", "3"]


def test_simulate_independent_of_threads(capsys):
    argv = ["simulate", "--n", "150", "--observe", "0.8", "--replicas", "3", "--seed", "2"]
    _, serial, _ = run(capsys, *argv, "--threads", "1")
    _, parallel, _ = run(capsys, *argv, "--threads", "2")
    assert serial == parallel


def test_clock_flag(capsys):
    base = ["simulate", "--n", "400", "--observe", "2.0", "--seed", "3"]
    _, linear, _ = run(capsys, *base)
    _, expo, _ = run(capsys, *base, "--clock", "exponential")
    assert linear != expo
    code = None
    try:
        main(base + ["--clock", "weird"])
    except SystemExit as exc:
        code = exc.code
    assert code == 1


def test_simulate_full_precision(capsys):
    _, out, _ = run(capsys, "simulate", "--n", "100", "--observe", "1.0", "--seed", "1")
    (row,) = rows(out)
    assert float(row["m1_star"]) == int(row["edge_count"]) / 500


def test_simulate_er_and_file_inits(capsys, tmp_path):
    _, out, _ = run(capsys, "simulate", "--n", "100", "--init", "er:0.3", "--observe", "0")
    assert rows(out)[0]["edge_count"] == "150"
    _, out, _ = run(capsys, "simulate", "--n", "100", "--init", "trianglefree:0.3", "--observe", "0")
    assert float(rows(out)[0]["m2_finite"]) == float(rows(out)[0]["m1_finite"])
    p = tmp_path / "g.txt"
    p.write_text("4\n0 1\n1 2\n0 2\n")
    _, out, _ = run(capsys, "simulate", "--n", "4", "--init", f"file:{p}", "--observe", "0")
    assert rows(out)[0]["edge_count"] == "3"


def test_out_flag(capsys, tmp_path):
    target = tmp_path / "o.csv"
    code, out, _ = run(capsys, "--out", str(target), "theory", "--t", "1.0")
    assert code == 0 and out == ""
    assert rows(target.read_text())[0]["t"] == "1"


def test_theory_empty(capsys):
    code, out, _ = run(capsys, "theory", "--init", "empty", "--t", "1.0")
    (row,) = rows(out)
    assert code == 0 and list(row) == THEORY_COLUMNS
    assert float(row["T_g"]) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert float(row["v_inf"]) == pytest.approx(0.549236348, abs=1e-8)


def test_theory_moments(capsys):
    _, out, _ = run(capsys, "theory", "--moments", "0.3,0.3")
    assert float(rows(out)[0]["T_g"]) == pytest.approx(0.43036, abs=5e-6)


def test_theory_er_subcritical(capsys):
    _, out, _ = run(capsys, "theory", "--init", "er:0.3", "--t", "0.2")
    assert float(rows(out)[0]["v_inf"]) == 0.0


def test_theory_range(capsys):
    _, out, _ = run(capsys, "theory", "--t", "0:1:0.25")
    assert [float(r["t"]) for r in rows(out)] == [0, 0.25, 0.5, 0.75, 1.0]


def test_theory_domain_error(capsys):
    code, out, err = run(capsys, "theory", "--init", "er:0.8", "--t", "1")
    assert code == 2 and out == "" and "1/sqrt(2)" in err


def test_theory_from_file_with_even_component_is_domain_error(capsys, tmp_path):
    p = tmp_path / "k4.txt"
    p.write_text("4\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n")
    code, _, _ = run(capsys, "theory", "--init", f"file:{p}", "--t", "0.1")
    assert code == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--n", "10"],
        ["simulate", "--n", "10", "--observe", "0.5,0.2"],
        ["simulate", "--n", "10", "--observe", "1", "--t-max", "0.5"],
        ["simulate", "--n", "10", "--observe", "1", "--init", "bogus"],
        ["simulate", "--n", "2", "--observe", "1"],
        ["simulate", "--n", "10", "--observe", "1", "--replicas", "0"],
        ["theory"],
        ["theory", "--moments", "0.3"],
        ["sweep", "--param", "t", "--range", "1:0:0.1"],
        ["sweep", "--param", "n", "--range", "100,200", "--mode", "theory"],
        ["nonsense"],
    ],
)
def test_usage_errors(capsys, argv):
    code = None
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1


def test_ingestion_error_is_usage_error(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("3\n0 0\n")
    code, _, err = run(capsys, "simulate", "--n", "3", "--init", f"file:{p}", "--observe", "0")
    assert code == 1 and "line 2" in err


def test_compare_subcritical_passes(capsys):
    code, out, err = run(
        capsys, "compare", "--n", "400", "--observe", "0.3,0.5", "--replicas", "3", "--tolerance", "0.07"
    )
    assert code == 0
    table = rows(out)
    assert list(table[0]) == COMPARE_COLUMNS
    assert all(float(r["v_inf"]) == 0 and r["within_tolerance"] == "1" for r in table)
    assert "2/2 observation times within tolerance" in err


def test_compare_flags_deviation(capsys):
    code, out, err = run(
        capsys, "compare", "--n", "60", "--observe", "1.5", "--replicas", "2", "--tolerance", "1e-9"
    )
    assert code == 3
    assert rows(out)[0]["within_tolerance"] == "0"


def test_sweep_m1_theory_decreasing(capsys):
    _, out, _ = run(capsys, "sweep", "--param", "m1", "--range", "0.1:0.6:0.1", "--init", "er:0.1")
    t_g = [float(r["T_g"]) for r in rows(out)]
    assert len(t_g) == 6 and all(b < a for a, b in zip(t_g, t_g[1:]))


def test_sweep_t_theory(capsys):
    _, out, _ = run(capsys, "sweep", "--param", "t", "--range", "0:1.4:0.1")
    table = rows(out)
    v = [float(r["v_inf"]) for r in table]
    t = [float(r["t"]) for r in table]
    assert all(vi == 0 for ti, vi in zip(t, v) if ti < 0.7071)
    post = [vi for ti, vi in zip(t, v) if ti > 0.7072]
    assert post[0] > 0 and all(b > a for a, b in zip(post, post[1:]))


def test_sweep_n_simulate(capsys):
    code, out, _ = run(
        capsys, "sweep", "--param", "n", "--range", "50,100", "--observe", "0.5", "--replicas", "2"
    )
    assert code == 0
    assert [r["n"] for r in rows(out)] == ["50", "50", "100", "100"]


def test_sweep_t_simulate(capsys):
    code, out, _ = run(capsys, "sweep", "--param", "t", "--range", "0.2,0.4", "--mode", "simulate", "--n", "80")
    assert code == 0 and [r["t"] for r in rows(out)] == ["0.20000000000000001", "0.40000000000000002"]


def test_helpers():
    assert parse_floats("0.1:0.3:0.1") == [0.1, 0.2, 0.3]
    assert parse_floats("1,2.5") == [1.0, 2.5]
    with pytest.raises(UsageError):
        parse_floats("a,b")
    assert InitSpec.parse("er:0.25") == InitSpec("er", 0.25)
    with pytest.raises(UsageError):
        InitSpec.parse("file:")
    assert replica_seed(7, 0) == replica_seed(7, 0) != replica_seed(7, 1)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tripercolation", "theory", "--moments", "0,0"],
        capture_output=True, text=True, check=True,
    )
    assert "0.70710678118654" in proc.stdout
