"""Command line behavior: outputs, exit codes, determinism."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from chainshadow.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestAnalyze:
    def test_north_south_two_classes(self, capsys):
        code, out, _ = run_cli(
            capsys, "analyze", "--gen", "north-south:8", "--delta", "1/10"
        )
        assert code == 0
        report = json.loads(out)
        assert report["cr_size"] == 2
        flags = {(c["initial"], c["terminal"]) for c in report["classes"]}
        assert flags == {(True, False), (False, True)}

    def test_rotation_single_class(self, capsys):
        code, out, _ = run_cli(capsys, "analyze", "--gen", "rotation:4:1", "--delta", "0")
        assert code == 0
        report = json.loads(out)
        assert len(report["classes"]) == 1
        assert report["classes"][0]["points"] == [0, 1, 2, 3]

    def test_invalid_file_exits_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(
            json.dumps(
                {"n": 3, "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]], "map": [0, 1, 2]}
            )
        )
        code, _, err = run_cli(capsys, "analyze", "--file", str(bad), "--delta", "1")
        assert code == 2
        assert "triangle" in err

    def test_missing_source_is_usage_error(self, capsys):
        assert main(["analyze", "--delta", "1"]) == 2

    def test_dot_format(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "analyze", "--gen", "north-south:6", "--delta", "1/24", "--format", "dot",
        )
        assert code == 0
        assert out.startswith("digraph") and "C0 -> C1;" in out

    def test_unknown_generator_exit_2(self, capsys):
        code, _, err = run_cli(capsys, "analyze", "--gen", "far-or-not", "--delta", "1")
        assert code == 2 and "unknown generator" in err

    def test_explicit_file_round_trip(self, capsys, tmp_path):
        from chainshadow import rotation

        spec = tmp_path / "rot.json"
        spec.write_text(json.dumps(rotation(4, 1).to_spec()))
        code, out, _ = run_cli(capsys, "analyze", "--file", str(spec), "--delta", "0")
        assert code == 0 and json.loads(out)["cr_size"] == 4

    def test_generator_file_form(self, capsys, tmp_path):
        spec = tmp_path / "gen.json"
        spec.write_text(json.dumps({"generator": "rotation", "params": {"n": 4, "k": 1}}))
        code, out, _ = run_cli(capsys, "analyze", "--file", str(spec), "--delta", "0")
        assert code == 0 and json.loads(out)["cr_size"] == 4


class TestShadow:
    def test_slimit_failure_exit_1(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "shadow", "--gen", "parallel-cycles", "--property", "slimit",
            "--delta", "1", "--eps", "1",
        )
        assert code == 1
        verdict = json.loads(out)
        assert verdict["pass"] is False
        assert verdict["witness"]["points"] == [0, 4]
        assert verdict["witness"]["tail_start"] == 1

    def test_cantor_slimit_passes(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "shadow", "--gen", "cantor-identity:2", "--property", "slimit",
            "--delta", "1/20", "--eps", "1/20",
        )
        assert code == 0 and json.loads(out)["pass"] is True

    def test_global_sink_big_eps(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "shadow", "--gen", "north-south:6", "--delta", "1/2", "--eps", "1/2",
        )
        assert code == 0 and json.loads(out)["pass"] is True

    def test_table_format(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "shadow", "--gen", "parallel-cycles", "--property", "slimit",
            "--delta", "1", "--eps", "1", "--format", "table",
        )
        assert code == 1
        assert "pass: no" in out and "witness" in out

    def test_worker_counts_byte_identical(self, capsys):
        outputs = []
        for workers in ("1", "3"):
            _, out, _ = run_cli(
                capsys,
                "shadow", "--gen", "doubling:6", "--property", "slimit",
                "--delta", "1/6", "--eps", "1/6", "--workers", workers,
            )
            outputs.append(out)
        assert outputs[0] == outputs[1]

    def test_negative_rational_rejected(self, capsys):
        assert main(
            ["shadow", "--gen", "parallel-cycles", "--delta", "-1", "--eps", "1"]
        ) == 2


class TestLadder:
    def test_cantor_counts(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "ladder", "--gen", "cantor-identity:2", "--deltas", "1,1/4,1/20",
        )
        assert code == 0
        report = json.loads(out)
        assert [level["class_count"] for level in report["levels"]] == [1, 2, 4]
        assert report["functional_threshold"] == "2/9"
        assert report["stabilized_at_level"] == 2

    def test_not_decreasing_exit_2(self, capsys):
        code, _, err = run_cli(
            capsys, "ladder", "--gen", "cantor-identity:2", "--deltas", "1/4,1"
        )
        assert code == 2 and "decrease" in err

    def test_single_delta(self, capsys):
        code, out, _ = run_cli(
            capsys, "ladder", "--gen", "rotation:4:1", "--deltas", "1"
        )
        assert code == 0 and len(json.loads(out)["levels"]) == 1


class TestVerify:
    def test_parallel_cycles_exit_0(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--gen", "parallel-cycles")
        assert code == 0
        report = json.loads(out)
        assert report["nonvacuous_failures"] == 0
        statuses = {r["status"] for e in report["entries"] for r in e["results"]}
        assert "vacuous" in statuses  # the slimit-failing entries report vacuity

    def test_explicit_grid(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "verify", "--gen", "cantor-identity:2", "--deltas", "1/4,1/20",
            "--eps", "1/20",
        )
        assert code == 0
        report = json.loads(out)
        assert [e["delta_fine"] for e in report["entries"]] == ["1/4", "1/20"]
        assert all(e["delta_coarse"] == "1/4" for e in report["entries"])

    def test_corpus_only_member_is_not_a_generator(self, capsys):
        code, _, err = run_cli(
            capsys, "verify", "--gen", "far-two-cycles", "--format", "table"
        )
        assert code == 2 and "unknown generator" in err

    def test_verify_table_output(self, capsys):
        code, out, _ = run_cli(
            capsys, "verify", "--gen", "rotation:4:1", "--format", "table"
        )
        assert code == 0 and "nonvacuous failures: 0" in out

    def test_mutated_checker_breaks_the_gate(self, capsys, monkeypatch):
        import chainshadow.verify as verify_mod
        from chainshadow import PseudoOrbit, ShadowVerdict

        real = verify_mod.check_shadowing_property

        def sabotaged(system, delta, eps, domain=None, **kwargs):
            verdict = real(system, delta, eps, domain=domain, **kwargs)
            if domain is None:
                return verdict
            return ShadowVerdict(
                "shadowing", verdict.delta, verdict.eps, False,
                PseudoOrbit.plain((min(domain),), verdict.delta),
                verdict.states_explored,
            )

        monkeypatch.setattr(verify_mod, "check_shadowing_property", sabotaged)
        code, out, _ = run_cli(capsys, "verify", "--gen", "rotation:4:1")
        assert code == 1
        assert json.loads(out)["nonvacuous_failures"] > 0


class TestPlumbing:
    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "report.json"
        code, out, _ = run_cli(
            capsys,
            "analyze", "--gen", "rotation:4:1", "--delta", "0", "--out", str(target),
        )
        assert code == 0 and out == ""
        assert json.loads(target.read_text())["cr_size"] == 4

    def test_quantization_warning(self, capsys):
        _, _, err = run_cli(
            capsys, "analyze", "--gen", "doubling:8", "--delta", "1/100"
        )
        assert "quantization" in err

    def test_state_cap_exit_3(self, capsys):
        code, _, err = run_cli(
            capsys,
            "shadow", "--gen", "parallel-cycles", "--delta", "1", "--eps", "1",
            "--state-cap", "2",
        )
        assert code == 3 and "inconclusive" in err

    def test_console_script_subprocess(self):
        proc = subprocess.run(
            [sys.executable, "-m", "chainshadow.cli", "analyze",
             "--gen", "parallel-cycles", "--delta", "1/2"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["cr_size"] == 4

    def test_help_exits_zero(self):
        assert main(["--help"]) == 0
