import json
import subprocess
import sys

import pytest

from conchk import BOTTOM, build_history, execution, read, write
from conchk.checker import validate_witness
from conchk.histfile import format_history, parse_history


def run_cli(*args, stdin=None):
    return subprocess.run(
        [sys.executable, "-m", "conchk.cli", *args],
        capture_output=True,
        text=True,
        input=stdin,
    )


@pytest.fixture
def h1_file(tmp_path, write_then_read):
    path = tmp_path / "h1.hist"
    path.write_text(format_history(write_then_read))
    return str(path)


@pytest.fixture
def h2_file(tmp_path, stale_bottom_read):
    path = tmp_path / "h2.hist"
    path.write_text(format_history(stale_bottom_read))
    return str(path)


class TestCheckCommand:
    def test_satisfied_exit_zero_with_witness_edges(self, h1_file):
        r = run_cli("check", "--model", "linearizability", "--input", h1_file)
        assert r.returncode == 0, r.stderr
        assert "witness ar: [0, 1]" in r.stdout
        assert "witness vis" in r.stdout

    def test_violated_and_satisfied_split(self, h2_file):
        assert run_cli("check", "--model", "sequential", "--input", h2_file).returncode == 0
        assert run_cli("check", "--model", "linearizability", "--input", h2_file).returncode == 1

    def test_unknown_budget_exit_two(self, tmp_path):
        ops = [write(i, f"p{i}", "x", i + 1, 10 * i, 10 * i + 25) for i in range(6)]
        ops.append(read(6, "pz", "x", BOTTOM, 100, 101))
        path = tmp_path / "big.hist"
        path.write_text(format_history(build_history(ops)))
        r = run_cli("check", "--model", "linearizability", "--input", str(path),
                    "--budget", "3")
        assert r.returncode == 2

    def test_predicates_flag(self, h2_file):
        r = run_cli("check", "--predicates", "MonotonicReads,RVal", "--input", h2_file)
        assert r.returncode == 0

    def test_usage_errors_exit_64(self, h1_file):
        assert run_cli("check", "--input", h1_file).returncode == 64
        assert run_cli("check", "--model", "nonsense", "--input", h1_file).returncode == 64
        assert run_cli("check", "--model", "linearizability", "--predicates", "PRAM",
                       "--input", h1_file).returncode == 64

    def test_file_errors_exit_65(self, tmp_path):
        bad = tmp_path / "bad.hist"
        bad.write_text("proc=pa type=wr obj=x stime=0\n")  # missing ival
        r = run_cli("check", "--model", "pram", "--input", str(bad))
        assert r.returncode == 65
        assert "bad.hist:1" in r.stderr
        missing = run_cli("check", "--model", "pram", "--input", str(tmp_path / "nope"))
        assert missing.returncode == 65

    def test_stdin_input(self, write_then_read):
        r = run_cli("check", "--model", "linearizability", "--input", "-",
                    stdin=format_history(write_then_read))
        assert r.returncode == 0

    def test_witness_file_revalidates(self, tmp_path, h1_file, write_then_read):
        out = tmp_path / "wit.json"
        r = run_cli("check", "--model", "linearizability", "--input", h1_file,
                    "--witness", str(out), "--format", "machine")
        assert r.returncode == 0
        payload = json.loads(out.read_text())
        a = execution(
            write_then_read,
            [tuple(p) for p in payload["witness"]["vis"]],
            payload["witness"]["ar"],
        )
        assert validate_witness(a, payload["model"])

    def test_delta_parameter(self, tmp_path):
        # future read: allowed at delta 0 without real-time, so timed variant passes
        h = build_history(
            [
                write(0, "pa", "x", 1, 0, 1),
                read(1, "pb", "x", 2, 2, 3),
                write(2, "pc", "x", 2, 4, 5),
            ]
        )
        path = tmp_path / "future.hist"
        path.write_text(format_history(h))
        assert run_cli("check", "--model", "timed-linearizability", "--delta", "0",
                       "--input", str(path)).returncode == 0
        assert run_cli("check", "--model", "linearizability",
                       "--input", str(path)).returncode == 1


class TestModelsCommand:
    def test_lists_compositions(self):
        r = run_cli("models")
        assert r.returncode == 0
        assert "linearizability = SingleOrder ∧ RealTime ∧ RVal" in r.stdout
        assert "weak-fork-linearizability" in r.stdout

    def test_machine_format_round_trips(self):
        r = run_cli("models", "--format", "machine")
        payload = json.loads(r.stdout)
        assert payload["sequential"]["predicates"] == ["SingleOrder", "PRAM", "RVal"]


class TestSimulateCommand:
    def test_emits_parseable_history_with_replay_header(self):
        r = run_cli("simulate", "--mode", "linearizable", "--seed", "3")
        assert r.returncode == 0
        assert r.stdout.startswith("# conchk simulate")
        assert "seed=3" in r.stdout.splitlines()[0]
        h = parse_history(r.stdout)
        assert len(h) > 0

    def test_deterministic_output(self):
        args = ("simulate", "--mode", "causal", "--seed", "11", "--ops", "8")
        assert run_cli(*args).stdout == run_cli(*args).stdout


class TestSeparateCommand:
    def test_finds_and_prints_history(self):
        r = run_cli("separate", "--weak", "sequential", "--strong", "linearizability",
                    "--seed", "0")
        assert r.returncode == 0
        h = parse_history(r.stdout)
        assert 1 <= len(h) <= 5

    def test_not_found_exit_one(self):
        r = run_cli("separate", "--weak", "pram", "--strong", "pram",
                    "--budget", "40", "--seed", "0")
        assert r.returncode == 1


class TestShrinkCommand:
    def test_shrinks_to_core(self, tmp_path, stale_bottom_read):
        padded = build_history(
            list(stale_bottom_read.ops) + [write(2, "pc", "y", 7, 40, 50)]
        )
        path = tmp_path / "padded.hist"
        path.write_text(format_history(padded))
        r = run_cli("shrink", "--model", "linearizability", "--input", str(path))
        assert r.returncode == 0
        shrunk = parse_history(r.stdout)
        assert len(shrunk) == 2

    def test_satisfied_input_rejected(self, h1_file):
        r = run_cli("shrink", "--model", "pram", "--input", h1_file)
        assert r.returncode == 1


class TestAuditCommand:
    def test_small_audit_with_artifacts(self, tmp_path):
        report_file = tmp_path / "report.json"
        dot_file = tmp_path / "graph.dot"
        r = run_cli("audit", "--samples", "60", "--history-samples", "60",
                    "--seed", "0", "--report", str(report_file),
                    "--dot", str(dot_file),
                    "--edge", "sequential,linearizability",
                    "--edge", "pram,sequential")
        assert r.returncode == 0, r.stderr
        payload = json.loads(report_file.read_text())
        assert {e["weak"] for e in payload["edges"]} == {"sequential", "pram"}
        assert "digraph" in dot_file.read_text()

    def test_machine_output_deterministic(self):
        args = ("audit", "--samples", "40", "--history-samples", "40",
                "--seed", "7", "--edge", "sequential,linearizability",
                "--format", "machine")
        assert run_cli(*args).stdout == run_cli(*args).stdout
