"""Command-line interface: solve/verify/delta, exit codes, file formats."""

import json
import shutil
from pathlib import Path

import numpy as np

from cstar_approx.cli import main

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _parse_lines(out):
    values = {}
    for line in out.splitlines():
        if " = " in line:
            key, _, raw = line.partition(" = ")
            values[key.strip()] = raw.strip()
    return values


def test_solve_diagonal_sample_matches_closed_form(capsys, tmp_path):
    report_path = tmp_path / "report.json"
    code, out, _ = _run(
        capsys, "solve",
        "--input", str(PROBLEMS / "two_block_diagonal.json"),
        "--output", str(report_path),
    )
    assert code == 0
    report = json.loads(report_path.read_text())
    problem = json.loads((PROBLEMS / "two_block_diagonal.json").read_text())
    blocks = [
        np.array([complex(re, im) for re, im in blk]).reshape(2, 2)
        for blk in problem["x"]
    ]
    expected = max(max(abs(b[0, 1]), abs(b[1, 0])) for b in blocks)
    assert abs(report["distance"] - expected) <= 1e-6
    assert report["converged"] is True
    assert report["gap"] <= 1e-6


def test_solve_malformed_signature_exits_1(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    problem = json.loads((PROBLEMS / "two_block_diagonal.json").read_text())
    problem["signature"] = [2, 0]
    bad.write_text(json.dumps(problem))
    code, _, err = _run(
        capsys, "solve", "--input", str(bad), "--output", str(tmp_path / "r.json")
    )
    assert code == 1
    assert "signature" in err


def test_solve_unknown_field_exits_1(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    problem = json.loads((PROBLEMS / "two_block_diagonal.json").read_text())
    problem["extra_knob"] = 1
    bad.write_text(json.dumps(problem))
    code, _, err = _run(
        capsys, "solve", "--input", str(bad), "--output", str(tmp_path / "r.json")
    )
    assert code == 1
    assert "extra_knob" in err


def test_solve_banded_tail_interval(capsys, tmp_path):
    report_path = tmp_path / "report.json"
    code, out, _ = _run(
        capsys, "solve",
        "--input", str(PROBLEMS / "banded_shift.json"),
        "--output", str(report_path),
    )
    assert code == 0
    report = json.loads(report_path.read_text())
    lo, hi = report["interval"]["lo"], report["interval"]["hi"]
    assert lo <= 2.0 <= hi
    assert hi - lo <= 2e-3
    assert isinstance(report["truncation_n"], int)


def test_verify_round_trip(capsys, tmp_path):
    report_path = tmp_path / "report.json"
    code, *_ = _run(
        capsys, "solve",
        "--input", str(PROBLEMS / "two_block_diagonal.json"),
        "--output", str(report_path),
    )
    assert code == 0
    code, out, _ = _run(
        capsys, "verify",
        "--input", str(PROBLEMS / "two_block_diagonal.json"),
        "--report", str(report_path),
    )
    assert code == 0
    values = _parse_lines(out)
    assert "lower_bound" in values and "gap" in values


def test_verify_is_self_contained(capsys, tmp_path):
    # only the two files are needed: copy them into a bare directory
    workdir = tmp_path / "bare"
    workdir.mkdir()
    problem_path = workdir / "problem.json"
    shutil.copy(PROBLEMS / "two_block_diagonal.json", problem_path)
    report_path = workdir / "report.json"
    code, *_ = _run(
        capsys, "solve", "--input", str(problem_path), "--output", str(report_path)
    )
    assert code == 0
    code, *_ = _run(
        capsys, "verify", "--input", str(problem_path), "--report", str(report_path)
    )
    assert code == 0


def test_verify_rejects_zeroed_witness(capsys, tmp_path):
    report_path = tmp_path / "report.json"
    _run(
        capsys, "solve",
        "--input", str(PROBLEMS / "two_block_diagonal.json"),
        "--output", str(report_path),
    )
    report = json.loads(report_path.read_text())
    report["certificate"]["witness"] = [
        [[0.0, 0.0] for _ in blk] for blk in report["certificate"]["witness"]
    ]
    report_path.write_text(json.dumps(report))
    code, _, err = _run(
        capsys, "verify",
        "--input", str(PROBLEMS / "two_block_diagonal.json"),
        "--report", str(report_path),
    )
    assert code == 3


def test_verify_rejects_edited_distance(capsys, tmp_path):
    report_path = tmp_path / "report.json"
    _run(
        capsys, "solve",
        "--input", str(PROBLEMS / "two_block_diagonal.json"),
        "--output", str(report_path),
    )
    report = json.loads(report_path.read_text())
    report["distance"] += 0.1
    report_path.write_text(json.dumps(report))
    code, _, err = _run(
        capsys, "verify",
        "--input", str(PROBLEMS / "two_block_diagonal.json"),
        "--report", str(report_path),
    )
    assert code == 3


def test_verify_rejects_digest_mismatch(capsys, tmp_path):
    report_path = tmp_path / "report.json"
    _run(
        capsys, "solve",
        "--input", str(PROBLEMS / "two_block_diagonal.json"),
        "--output", str(report_path),
    )
    other = tmp_path / "other.json"
    problem = json.loads((PROBLEMS / "two_block_diagonal.json").read_text())
    problem["options"]["seed"] = 99
    other.write_text(json.dumps(problem))
    code, _, err = _run(
        capsys, "verify", "--input", str(other), "--report", str(report_path)
    )
    assert code == 3
    assert "digest" in err


def test_delta_isometry_tail(capsys):
    code, out, _ = _run(
        capsys, "delta", "--input", str(PROBLEMS / "isometry_tail.json")
    )
    assert code == 0
    values = _parse_lines(out)
    assert float(values["delta"]) == 1.0
    assert abs(float(values["distance"]) - 2.0) <= 1e-6
    assert values["comparison"] == "strict"


def test_delta_compact_tail(capsys, tmp_path):
    problem = {
        "schema_version": "1",
        "norm": "operator",
        "tail": {
            "x": {
                "head_dim": 2,
                "head": [[3.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
                "weights": {"rule": "geometric", "first": [1.0, 0.0], "ratio": 0.5},
            }
        },
    }
    path = tmp_path / "compact.json"
    path.write_text(json.dumps(problem))
    code, out, _ = _run(capsys, "delta", "--input", str(path))
    assert code == 0
    assert float(_parse_lines(out)["delta"]) == 0.0


def test_delta_slow_decay_weights(capsys, tmp_path):
    # explicit prefix 2 + 1/(n+1), constant tail 2: limsup is exactly 2
    values = [[2.0 + 1.0 / (n + 1), 0.0] for n in range(12)]
    problem = {
        "schema_version": "1",
        "norm": "operator",
        "tail": {
            "x": {
                "head_dim": 2,
                "head": [[0.0, 0.0]] * 4,
                "weights": {
                    "rule": "explicit",
                    "values": values,
                    "tail_value": [2.0, 0.0],
                },
            }
        },
    }
    path = tmp_path / "slow.json"
    path.write_text(json.dumps(problem))
    code, out, _ = _run(capsys, "delta", "--input", str(path))
    assert code == 0
    assert float(_parse_lines(out)["delta"]) == 2.0


def test_delta_rejects_finite_problem(capsys):
    code, _, err = _run(
        capsys, "delta", "--input", str(PROBLEMS / "two_block_diagonal.json")
    )
    assert code == 4


def test_reports_are_deterministic(capsys, tmp_path):
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    for out in (out1, out2):
        code, *_ = _run(
            capsys, "solve",
            "--input", str(PROBLEMS / "two_block_diagonal.json"),
            "--output", str(out), "--seed", "7",
        )
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_solve_operator_tail_requires_truncation(capsys, tmp_path):
    problem = json.loads((PROBLEMS / "isometry_tail.json").read_text())
    del problem["tail"]["truncation_n"]
    path = tmp_path / "no_n.json"
    path.write_text(json.dumps(problem))
    code, _, err = _run(
        capsys, "solve", "--input", str(path), "--output", str(tmp_path / "r.json")
    )
    assert code == 1
    assert "truncation_n" in err


def test_missing_input_exits_1(capsys, tmp_path):
    code, _, err = _run(
        capsys, "solve",
        "--input", str(tmp_path / "nope.json"),
        "--output", str(tmp_path / "r.json"),
    )
    assert code == 1


def test_solve_unreachable_tolerance_exits_2(capsys, tmp_path):
    problem = json.loads((PROBLEMS / "two_block_diagonal.json").read_text())
    problem["options"] = {"tol": 1e-13, "max_iter": 2, "restarts": 0}
    path = tmp_path / "tight.json"
    path.write_text(json.dumps(problem))
    report_path = tmp_path / "report.json"
    code, *_ = _run(
        capsys, "solve", "--input", str(path), "--output", str(report_path)
    )
    assert code == 2
    report = json.loads(report_path.read_text())
    assert report["converged"] is False


def test_verify_rejects_malformed_certificate(capsys, tmp_path):
    report_path = tmp_path / "report.json"
    _run(
        capsys, "solve",
        "--input", str(PROBLEMS / "two_block_diagonal.json"),
        "--output", str(report_path),
    )
    report = json.loads(report_path.read_text())
    del report["certificate"]["dual_norm"]
    report_path.write_text(json.dumps(report))
    code, _, err = _run(
        capsys, "verify",
        "--input", str(PROBLEMS / "two_block_diagonal.json"),
        "--report", str(report_path),
    )
    assert code == 1
    assert "dual_norm" in err


def test_solve_rejects_bad_option_types(capsys, tmp_path):
    problem = json.loads((PROBLEMS / "two_block_diagonal.json").read_text())
    problem["options"] = {"seed": "zero"}
    path = tmp_path / "badopt.json"
    path.write_text(json.dumps(problem))
    code, _, err = _run(
        capsys, "solve", "--input", str(path), "--output", str(tmp_path / "r.json")
    )
    assert code == 1
    assert "options.seed" in err


def test_solve_rejects_negative_tol_flag(capsys, tmp_path):
    code, _, err = _run(
        capsys, "solve",
        "--input", str(PROBLEMS / "two_block_diagonal.json"),
        "--output", str(tmp_path / "r.json"),
        "--tol", "-1.0",
    )
    assert code == 1
    assert "options" in err
