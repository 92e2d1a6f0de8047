import csv
import io
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from cartan_norm.cli import (
    NORM_HEADER, build_parser, format_csv, main, parse_config, parse_k_grid, write_csv,
)
from cartan_norm.errors import InvalidInput

GR_FLAGS = ["--family", "gen-randers", "--c1", "1", "--c2", "0.2", "--c3", "1"]


def run_cli(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def read_rows(text):
    return list(csv.reader(io.StringIO(text)))


# -- configuration ---------------------------------------------------------------


def test_k_grid_point_count():
    config = parse_config(["norm", *GR_FLAGS, "--k", "0:0.99:0.01"])
    ks = config.k_values
    assert len(ks) == 100
    assert ks[0] == 0.0 and ks[-1] == 0.99
    assert all(b > a for a, b in zip(ks, ks[1:]))


def test_single_k_value():
    assert parse_config(["norm", *GR_FLAGS, "--k", "0.5"]).k_values == [0.5]


@pytest.mark.parametrize("text", ["0:2:0.1", "0.5:0.2:0.1", "0:1:0", "0:1:-0.1", "a:b:c", "0:1", "nan"])
def test_bad_k_grid(text):
    with pytest.raises(InvalidInput):
        parse_k_grid(text)


def test_out_of_range_k_exits_2(capsys):
    code, out, err = run_cli(["norm", *GR_FLAGS, "--k", "0:2:0.1"], capsys)
    assert code == 2 and out == ""
    assert "usage:" in err and "leaves [0, 1]" in err


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["norm", "--bogus", "1"])
    assert info.value.code == 2
    assert "unrecognized arguments" in capsys.readouterr().err


def test_theta_samples_floor(capsys):
    code, _, err = run_cli(["norm", *GR_FLAGS, "--k", "0.5", "--theta-samples", "32"], capsys)
    assert code == 2 and "theta-samples" in err


def test_spec_file(tmp_path):
    spec = tmp_path / "metric.txt"
    spec.write_text("# generalized Randers\nfamily = gen-randers\nc1 = 1\nc2 = 0.2\nc3 = 1\nk = 0.5\n")
    config = parse_config(["verify", "--spec", str(spec)])
    assert config.params == {"family": "gen-randers", "c1": 1.0, "c2": 0.2, "c3": 1.0, "k": 0.5}
    assert config.k_values == [0.5]


def test_flags_override_spec_file(tmp_path):
    spec = tmp_path / "metric.txt"
    spec.write_text("family = gen-randers\nc1 = 1\nc2 = 0.2\nc3 = 1\n")
    assert parse_config(["norm", "--spec", str(spec), "--c2", "0.3"]).params["c2"] == 0.3


@pytest.mark.parametrize("text", ["colour = red\n", "c1 1\n", "c1 = one\n"])
def test_bad_spec_file_exits_2(tmp_path, capsys, text):
    spec = tmp_path / "metric.txt"
    spec.write_text(text)
    code, _, err = run_cli(["verify", "--spec", str(spec)], capsys)
    assert code == 2 and "line 1" in err


def test_missing_spec_file_exits_2(tmp_path, capsys):
    code, _, _ = run_cli(["verify", "--spec", str(tmp_path / "absent.txt")], capsys)
    assert code == 2


def test_parser_lists_commands():
    assert set(build_parser()._actions[1].choices) == {"norm", "verify", "hypotheses", "pq", "ode", "bscan", "oracle"}


# -- commands ---------------------------------------------------------------------


def test_hypotheses_output(capsys):
    code, out, _ = run_cli(["hypotheses", "--family", "gen-randers", "--c1", "1", "--c2", "1", "--c3", "1"], capsys)
    assert code == 0
    assert out == "theorem1: FAIL (c1^2 > |c2(3c1+c3)|: 1 !> 4)\n"


def test_hypotheses_both_theorems(capsys):
    code, out, _ = run_cli(["hypotheses", "--c1", "1", "--c2", "0.2", "--c3", "1"], capsys)
    lines = out.splitlines()
    assert code == 0 and len(lines) == 2
    assert lines[0].startswith("theorem1: PASS") and lines[1].startswith("theorem2:")


def test_riemannian_norm_csv(capsys):
    code, out, _ = run_cli(["norm", "--family", "gen-randers", "--c1", "1", "--c2", "0", "--c3", "1", "--k", "0:0.9:0.3"], capsys)
    rows = read_rows(out)
    assert code == 0
    assert tuple(rows[0]) == NORM_HEADER
    assert len(rows) == 5
    assert all(abs(float(r[6])) < 1e-12 and r[7] == "jet" for r in rows[1:])


def test_norm_scan_line_count(tmp_path, capsys):
    path = tmp_path / "scan.csv"
    code, out, _ = run_cli(["norm", *GR_FLAGS, "--k", "0:0.99:0.01", "--theta-samples", "64", "--out", str(path)], capsys)
    text = path.read_text()
    assert code == 0 and out == ""
    assert len(text.splitlines()) == 101
    assert text.endswith("\n") and "\r" not in text


def test_closed_form_method(capsys):
    _, jet, _ = run_cli(["norm", *GR_FLAGS, "--k", "0.5"], capsys)
    _, cf, _ = run_cli(["norm", *GR_FLAGS, "--k", "0.5", "--method", "closed_form"], capsys)
    a, b = float(read_rows(jet)[1][6]), float(read_rows(cf)[1][6])
    assert abs(a - b) < 1e-8 and read_rows(cf)[1][7] == "closed_form"


def test_randers_row_round_trip(capsys):
    from cartan_norm.families import MetricModel, QuadraticBeta
    from cartan_norm.frame import cartan_norm_2d

    code, out, _ = run_cli(["norm", "--family", "quadratic-beta", "--c1", "1", "--c2", "1", "--c3", "0", "--k", "0.5"], capsys)
    rows = read_rows(out)
    assert code == 0 and len(rows) == 2
    assert float(rows[1][6]) == cartan_norm_2d(MetricModel(QuadraticBeta(1, 1, 0), 0.5)).norm


def test_empty_rows_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_csv([], str(path))
    assert path.read_text() == ",".join(NORM_HEADER) + "\n"


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_fields_round_trip(x):
    text = format_csv([("f", x)], ("family", "value"))
    assert float(read_rows(text)[1][1]) == x


def test_byte_identical_outputs(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["oracle", *GR_FLAGS, "--k", "0.5", "--y-samples", "64", "--u-samples", "8", "--seed", "4", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_pq_command(capsys):
    code, out, _ = run_cli(["pq", "--family", "quadratic-beta", "--c1", "1", "--c2", "1", "--c3", "0", "--k", "0.5", "--s-points", "5"], capsys)
    rows = read_rows(out)
    assert code == 0 and len(rows) == 6
    assert all(abs(float(r[9]) - 1.0) < 1e-9 for r in rows[1:])


def test_ode_command(capsys):
    code, out, _ = run_cli(["ode", "--family", "sqrt-b", "--d1", "0.3", "--d2", "1", "--d3", "1.2", "--k", "0.5"], capsys)
    rows = read_rows(out)
    assert code == 0 and len(rows) == 10
    assert all(abs(float(r[6])) <= 1e-8 * float(r[7]) for r in rows[1:])


def test_bscan_failure_exits_1(capsys):
    code, out, err = run_cli(["bscan", "--family", "sqrt-b", "--d1", "0.3", "--d2", "1", "--d3", "1.2", "--k", "0.2:0.8:0.2"], capsys)
    assert code == 1
    assert len(read_rows(out)) == 5
    assert "deviation" in err


def test_verify_model_passes(capsys):
    code, out, _ = run_cli(["verify", *GR_FLAGS], capsys)
    assert code == 0
    assert out.splitlines()[-1].endswith("0 failed")


def test_verify_suite_names_first_failure(capsys):
    code, out, _ = run_cli(["verify"], capsys)
    assert code == 1
    assert "first failure:" in out and "b-independence" in out.splitlines()[-1]


def test_io_failure_exits_1(tmp_path, capsys):
    code, _, err = run_cli(["norm", *GR_FLAGS, "--k", "0.5", "--out", str(tmp_path / "missing" / "x.csv")], capsys)
    assert code == 1 and "I/O error" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cartan_norm", "hypotheses", "--family", "gen-randers", "--c1", "1", "--c2", "1", "--c3", "1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout == "theorem1: FAIL (c1^2 > |c2(3c1+c3)|: 1 !> 4)\n"
