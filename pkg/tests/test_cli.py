"""Command-line harness: exit codes, file outputs, and console formats."""

import dataclasses
import json

import pytest

from conftest import single_pair_reference
from evrelo.cli import main
from evrelo.feasibility import validate_solution
from evrelo.generator import small_instances
from evrelo.io import load_instance, load_solution, save_instance, save_solution
from evrelo.insertion import run_ch


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "reference.json"
    save_instance(single_pair_reference(), path)
    return path


@pytest.fixture
def bench_dir(tmp_path):
    directory = tmp_path / "bench"
    directory.mkdir()
    for i, inst in enumerate(small_instances(2, seed=2)):
        save_instance(inst, directory / f"small_{i + 1:03d}.json")
    return directory


def test_help_and_missing_subcommand():
    assert main(["--help"]) == 0
    assert main([]) == 1


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def test_generate_writes_instance_files(tmp_path, capsys):
    out = tmp_path / "amat"
    assert main(["generate", "--set", "amat", "--count", "3", "--seed", "1",
                 "--out", str(out)]) == 0
    files = sorted(p.name for p in out.glob("*.json"))
    assert files == ["amat_001.json", "amat_002.json", "amat_003.json"]
    for name in files:
        assert load_instance(out / name).requests  # parses and is non-trivial
    stdout = capsys.readouterr().out
    assert "3 instances" in stdout


def test_generate_csv_listing(tmp_path, capsys):
    out = tmp_path / "vamat"
    assert main(["generate", "--set", "vamat", "--count", "2", "--seed", "0",
                 "--out", str(out), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "file,requests"
    assert len(lines) == 3


def test_generate_reruns_are_byte_identical(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["generate", "--set", "amat", "--count", "2", "--seed", "7",
                 "--out", str(first)]) == 0
    assert main(["generate", "--set", "amat", "--count", "2", "--seed", "7",
                 "--out", str(second)]) == 0
    for name in ("amat_001.json", "amat_002.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_generate_rejects_unknown_set(tmp_path):
    assert main(["generate", "--set", "mystery", "--out", str(tmp_path / "x")]) == 1


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def test_solve_writes_solution_beside_instance(instance_file, capsys):
    assert main(["solve", str(instance_file), "--algorithm", "ch",
                 "--objective", "requests"]) == 0
    out = instance_file.with_suffix(".ch.requests.solution.json")
    assert out.exists()
    solution = load_solution(out)
    inst = load_instance(instance_file)
    assert validate_solution(solution, inst).ok
    assert solution.served == frozenset({1, 2})
    stdout = capsys.readouterr().out
    assert "valid yes" in stdout
    assert "optimal n/a" in stdout


def test_solve_exact_reports_optimality(instance_file, tmp_path, capsys):
    out = tmp_path / "exact.json"
    assert main(["solve", str(instance_file), "--algorithm", "exact",
                 "--out", str(out)]) == 0
    assert load_solution(out).optimal is True
    assert "optimal yes" in capsys.readouterr().out


def test_solve_csv_format(instance_file, capsys):
    assert main(["solve", str(instance_file), "--algorithm", "nnh",
                 "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("algorithm,objective,profit,served")
    assert lines[1].startswith("nnh,profit,")


def test_solve_same_seed_is_byte_identical(instance_file, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for target in (a, b):
        assert main(["solve", str(instance_file), "--algorithm", "rh",
                     "--iterations", "50", "--seed", "9",
                     "--out", str(target)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_solve_missing_instance_is_input_error(tmp_path):
    assert main(["solve", str(tmp_path / "absent.json")]) == 1


def test_solve_rejects_unknown_algorithm(instance_file):
    assert main(["solve", str(instance_file), "--algorithm", "simplex"]) == 1


def test_solve_oversized_for_exact_is_input_error(instance_file):
    assert main(["solve", str(instance_file), "--algorithm", "exact",
                 "--max-requests", "1"]) == 1


def test_solver_invariant_failure_is_exit_two(instance_file, monkeypatch, capsys):
    def corrupt_runner(name, instance, objective="profit", **kwargs):
        good = run_ch(instance, objective="requests")
        return dataclasses.replace(good, profit=good.profit + 5.0), 0.0

    monkeypatch.setattr("evrelo.cli.run_algorithm", corrupt_runner)
    assert main(["solve", str(instance_file), "--algorithm", "ch"]) == 2
    err = capsys.readouterr().err
    assert "internal error" in err
    assert "validator" in err


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def test_validate_instance_and_solution(instance_file, tmp_path, capsys):
    inst = load_instance(instance_file)
    sol_path = tmp_path / "good.solution.json"
    save_solution(run_ch(inst, objective="requests"), sol_path)
    assert main(["validate", str(instance_file), "--solution", str(sol_path)]) == 0
    stdout = capsys.readouterr().out
    assert "OK" in stdout


def test_validate_flags_tampered_solution(instance_file, tmp_path, capsys):
    inst = load_instance(instance_file)
    sol_path = tmp_path / "bad.solution.json"
    save_solution(run_ch(inst, objective="requests"), sol_path)
    doc = json.loads(sol_path.read_text(encoding="utf-8"))
    doc["routes"][0]["visits"][0]["arrival"] += 5.0
    sol_path.write_text(json.dumps(doc), encoding="utf-8")
    assert main(["validate", str(instance_file), "--solution", str(sol_path)]) == 1
    assert "violation" in capsys.readouterr().err


def test_validate_flags_broken_instance_document(tmp_path, capsys):
    path = tmp_path / "corrupt.json"
    path.write_text("{not json", encoding="utf-8")
    assert main(["validate", str(path)]) == 1
    assert "error" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def test_compare_writes_csv_table(bench_dir, capsys):
    assert main(["compare", str(bench_dir), "--algorithms", "nnh,ch",
                 "--objective", "requests", "--iterations", "5"]) == 0
    table = (bench_dir / "comparison.csv").read_text(encoding="utf-8").splitlines()
    assert table[0].startswith("instance,reference_objective,nnh_objective")
    assert table[-1].startswith("AVERAGE,")
    assert "compared nnh, ch against exact" in capsys.readouterr().out


def test_compare_csv_format_echoes_table(bench_dir, capsys):
    assert main(["compare", str(bench_dir), "--algorithms", "nnh",
                 "--objective", "requests", "--iterations", "5",
                 "--format", "csv"]) == 0
    stdout = capsys.readouterr().out
    assert stdout.splitlines()[0].startswith("instance,reference_objective")


def test_compare_rejects_unknown_algorithm(bench_dir):
    assert main(["compare", str(bench_dir), "--algorithms", "nnh,magic"]) == 1


def test_compare_empty_directory_is_input_error(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["compare", str(empty)]) == 1
    assert "no instance files" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# sensitivity
# ---------------------------------------------------------------------------

@pytest.fixture
def vamat_dir(tmp_path):
    directory = tmp_path / "vamat"
    assert main(["generate", "--set", "vamat", "--count", "2", "--seed", "3",
                 "--out", str(directory)]) == 0
    return directory


def test_sensitivity_frc_sweep(vamat_dir, capsys):
    assert main(["sensitivity", str(vamat_dir), "--sweep", "frc",
                 "--frc-values", "0,15", "--algorithm", "ch"]) == 0
    table = (vamat_dir / "sensitivity_frc.csv").read_text(encoding="utf-8").splitlines()
    assert table[0] == "parameter,value,instance,algorithm,profit,served,served_pct,workers,cpu_s"
    assert sum(1 for line in table if ",AVERAGE," in line) == 2
    assert "frc sweep with ch" in capsys.readouterr().out


def test_sensitivity_size_sweep(bench_dir):
    assert main(["sensitivity", str(bench_dir), "--sweep", "size",
                 "--algorithm", "nnh", "--objective", "requests"]) == 0
    table = (bench_dir / "sensitivity_size.csv").read_text(encoding="utf-8").splitlines()
    data = [line.split(",") for line in table[1:] if ",AVERAGE," not in line]
    assert len(data) == 2
    for row in data:
        assert row[0] == "size"
        assert int(row[1]) == len(load_instance(bench_dir / row[2]).requests)
    assert any(",AVERAGE," in line for line in table)


def test_sensitivity_rejects_bad_frc_values(vamat_dir):
    assert main(["sensitivity", str(vamat_dir), "--sweep", "frc",
                 "--frc-values", "a,b"]) == 1
