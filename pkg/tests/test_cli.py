"""End-to-end tests of the command-line interface: exit codes, report
formats, usage errors, the fault-injection hook, and worker determinism."""

import json

import pytest

from e16verma import cli, contact
from e16verma.contact import ContactElement, contact_bracket
from e16verma.exactnum import Q
from e16verma.gmodule import builtin, module_to_text


def run_cli(capsys, argv):
    rc = cli.main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def json_records(out):
    recs = [json.loads(line) for line in out.strip().splitlines()]
    assert all(r["schema"] == "e16verma/1" for r in recs)
    return recs


# ---------------------------------------------------------------------------
# reproduce-proof
# ---------------------------------------------------------------------------

def test_reproduce_proof_passes_and_lists_steps(capsys):
    rc, out, _ = run_cli(capsys, ["reproduce-proof"])
    assert rc == 0
    for name in ("alfa", "beta", "gamma", "delta", "tecres", "tecres2",
                 "tecres3", "row-vj1", "row-vj2", "row-vjl1",
                 "b2-linear-independence"):
        assert f"step {name}: ok" in out
    assert "RESULT: PASS" in out
    assert "defaults: kmax=5, max-degree=4, t-scan=-10..10" in out


def test_reproduce_proof_s0_flag_changes_nothing(capsys):
    rc1, out1, _ = run_cli(capsys, ["reproduce-proof", "--with-s0",
                                    "--format", "json-lines"])
    rc2, out2, _ = run_cli(capsys, ["reproduce-proof", "--no-with-s0",
                                    "--format", "json-lines"])
    assert rc1 == rc2 == 0
    body1 = [r for r in json_records(out1) if r["record"] != "header"]
    body2 = [r for r in json_records(out2) if r["record"] != "header"]
    assert body1 == body2


# ---------------------------------------------------------------------------
# check-algebra
# ---------------------------------------------------------------------------

def test_check_algebra_passes(capsys):
    rc, out, _ = run_cli(capsys, ["check-algebra", "--max-degree", "2"])
    assert rc == 0
    assert "check jacobi: ok" in out
    assert "check closure: ok" in out
    assert "check root-system: ok" in out
    assert "triples_checked=" in out
    assert "pairs_closed=" in out
    assert "RESULT: PASS" in out


def test_check_algebra_fault_injection_detected_and_restored(capsys):
    rc, out, _ = run_cli(
        capsys, ["check-algebra", "--max-degree", "2", "--inject-fault"]
    )
    assert rc == 1
    assert "check jacobi: FAIL" in out
    # a named basis triple involving the corrupted bracket is reported
    assert "xi[12]" in out and "xi[1]" in out
    assert "RESULT: FAIL" in out
    # the hook restored the clean bracket
    assert contact.contact_bracket is contact_bracket
    x12 = ContactElement.monomial(0, (1, 2))
    x1 = ContactElement.monomial(0, (1,))
    assert contact_bracket(x12, x1) == ContactElement.monomial(0, (2,))


# ---------------------------------------------------------------------------
# verify-bound
# ---------------------------------------------------------------------------

def test_verify_bound_trivial_tabulates_dimensions(capsys):
    rc, out, _ = run_cli(
        capsys,
        ["verify-bound", "--module", "trivial", "--t-scan", "0,2,7/3",
         "--kmax", "1"],
    )
    assert rc == 0
    assert "t=0  total=7  d0:1  d1:6" in out
    assert "t=2  total=11  d0:1  d3:10" in out
    assert "t=7/3  total=1  d0:1" in out
    assert "RESULT: PASS" in out


def test_verify_bound_json_lines_covers_every_degree(capsys):
    rc, out, _ = run_cli(
        capsys,
        ["verify-bound", "--module", "trivial", "--t-scan", "0,2",
         "--kmax", "1", "--format", "json-lines"],
    )
    assert rc == 0
    recs = json_records(out)
    kernels = [r for r in recs if r["record"] == "kernel"]
    # degrees 0..(2*kmax+6) for each scanned eigenvalue
    assert {(r["t_scalar"], r["degree"]) for r in kernels} == {
        (c, d) for c in ("0", "2") for d in range(9)
    }
    summary = [r for r in recs if r["record"] == "summary"]
    assert summary == [{"record": "summary", "ok": True, "exit": 0,
                        "schema": "e16verma/1"}]


def test_verify_bound_with_s0_shrinks_kernels(capsys):
    rc, out, _ = run_cli(
        capsys,
        ["verify-bound", "--module", "trivial", "--t-scan", "0", "--kmax", "1",
         "--with-s0"],
    )
    assert rc == 0
    assert "t=0  total=2  d0:1  d1:1" in out


def test_verify_bound_module_file(tmp_path, capsys):
    path = tmp_path / "vec.json"
    path.write_text(module_to_text(builtin("vector", Q(0))))
    rc, out, _ = run_cli(
        capsys,
        ["verify-bound", "--module", str(path), "--t-scan", "5", "--kmax", "1"],
    )
    assert rc == 0
    assert "t=5  total=7  d0:6  d1:1" in out


def test_verify_bound_invalid_commutators_rejected_before_assembly(
    tmp_path, capsys
):
    doc = json.loads(module_to_text(builtin("vector", Q(0))))
    doc["entries"][0]["value"] = "17"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    rc, _, err = run_cli(
        capsys, ["verify-bound", "--module", str(path), "--t-scan", "5"]
    )
    assert rc == 2
    assert "validation failed before assembly" in err
    assert "xi[" in err  # names the first failing commutator


def test_module_parse_error_reports_line(tmp_path, capsys):
    path = tmp_path / "parse.json"
    path.write_text('{"dim": 6,\n "t_scalar": "0",\n entries: []}\n')
    rc, _, err = run_cli(
        capsys, ["verify-bound", "--module", str(path), "--t-scan", "5"]
    )
    assert rc == 2
    assert "line 3" in err


def test_unknown_module_name_is_usage_error(capsys):
    rc, _, err = run_cli(
        capsys, ["verify-bound", "--module", "nosuch", "--t-scan", "0"]
    )
    assert rc == 2
    assert "neither a builtin" in err


# ---------------------------------------------------------------------------
# find-singular
# ---------------------------------------------------------------------------

def test_find_singular_trivial_reports_degree_zero_vector(capsys):
    rc, out, _ = run_cli(
        capsys, ["find-singular", "--module", "trivial", "--t-scan", "0",
                 "--kmax", "1"],
    )
    assert rc == 0
    assert "vector t=0 degree=0 weight=(0, 0, 0)" in out
    assert "T-coords: eta[123456] (x) [(1) e0]" in out
    assert "m-coords: eta[] (x) [(1) e0]" in out


def test_find_singular_empty_scan_is_usage_error(capsys):
    rc, _, err = run_cli(
        capsys, ["find-singular", "--module", "trivial", "--t-scan", ""]
    )
    assert rc == 2
    assert "t-scan is empty" in err


def test_bad_scalar_in_scan_is_usage_error(capsys):
    rc, _, err = run_cli(
        capsys, ["find-singular", "--module", "trivial", "--t-scan", "2,x+"]
    )
    assert rc == 2
    assert "bad scalar" in err


def test_descending_range_is_usage_error(capsys):
    rc, _, err = run_cli(
        capsys, ["find-singular", "--module", "trivial", "--t-scan", "3..1"]
    )
    assert rc == 2
    assert "descending range" in err


def test_find_singular_worker_pool_is_deterministic(capsys, monkeypatch):
    argv = ["find-singular", "--module", "trivial", "--t-scan", "0,2",
            "--kmax", "1", "--format", "json-lines"]
    monkeypatch.delenv("E16VERMA_WORKERS", raising=False)
    rc1, out1, _ = run_cli(capsys, argv)
    monkeypatch.setenv("E16VERMA_WORKERS", "2")
    rc2, out2, _ = run_cli(capsys, argv)
    assert rc1 == rc2 == 0
    body1 = [r for r in json_records(out1) if r["record"] != "header"]
    body2 = [r for r in json_records(out2) if r["record"] != "header"]
    assert body1 == body2 and any(r["record"] == "vector" for r in body1)


# ---------------------------------------------------------------------------
# shared report plumbing
# ---------------------------------------------------------------------------

def test_out_flag_writes_identical_report(tmp_path, capsys):
    argv = ["verify-bound", "--module", "trivial", "--t-scan", "0",
            "--kmax", "1"]
    rc1, out1, _ = run_cli(capsys, argv)
    path = tmp_path / "report.txt"
    rc2, out2, _ = run_cli(capsys, argv + ["--out", str(path)])
    assert rc1 == rc2 == 0
    assert "result: PASS" in out2
    assert path.read_text() == out1


def test_reports_are_deterministic(capsys):
    argv = ["verify-bound", "--module", "vector", "--t-scan=-1,5",
            "--kmax", "1", "--format", "json-lines"]
    rc1, out1, _ = run_cli(capsys, argv)
    rc2, out2, _ = run_cli(capsys, argv)
    assert rc1 == rc2 == 0
    assert out1 == out2


def test_missing_subcommand_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2
