import json
import math
import subprocess
import sys

import pytest

EXE = [sys.executable, "-m", "autopark.cli"]


def run_cli(*args, **kw):
    return subprocess.run(EXE + list(args), capture_output=True, text=True, **kw)


class TestExitCodes:
    def test_successful_run_exits_zero(self, tmp_path):
        proc = run_cli("run", "vertical", "--auto-grant", "--trace", str(tmp_path / "t"))
        assert proc.returncode == 0, proc.stderr
        out = json.loads(proc.stdout)
        assert out["outcome"] == "parked"

    def test_timeout_exits_three(self):
        proc = run_cli("run", "default", "--max-ticks", "50")
        assert proc.returncode == 3
        assert json.loads(proc.stdout)["outcome"] == "timeout"

    def test_collision_exits_two(self, tmp_path, scenario_raw):
        scenario_raw["lot"]["entrance"] = [0.25, 0.24, -math.pi / 2]
        scenario_raw["emergency"]["stop_distance"] = 0.001
        scenario_raw["events"] = []
        path = tmp_path / "crash.json"
        path.write_text(json.dumps(scenario_raw))
        proc = run_cli("run", str(path), "--auto-grant")
        assert proc.returncode == 2

    def test_scenario_error_exits_65(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        proc = run_cli("run", str(bad))
        assert proc.returncode == 65
        assert "scenario error" in proc.stderr

    def test_usage_error_exits_64(self):
        proc = run_cli("frobnicate")
        assert proc.returncode == 64

    def test_missing_subcommand_exits_64(self):
        proc = run_cli()
        assert proc.returncode == 64


class TestSubcommands:
    def test_validate_echoes_manifest(self):
        proc = run_cli("validate", "default")
        assert proc.returncode == 0
        manifest = json.loads(proc.stdout)
        assert manifest["lot"]["size"] == [3.0, 2.5]
        assert manifest["sensors"]["noise_sigma"] == 0.0

    def test_scenarios_lists_bundled(self):
        proc = run_cli("scenarios")
        names = proc.stdout.split()
        assert {"default", "parallel", "vertical", "congestion"} <= set(names)

    def test_replay_identical(self, tmp_path):
        trace_dir = tmp_path / "t"
        assert run_cli("run", "vertical", "--auto-grant",
                       "--trace", str(trace_dir)).returncode == 0
        proc = run_cli("replay", str(trace_dir))
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert json.loads(proc.stdout)["replay"] == "identical"

    def test_replay_detects_tampering(self, tmp_path):
        trace_dir = tmp_path / "t"
        run_cli("run", "vertical", "--auto-grant", "--trace", str(trace_dir))
        trace = (trace_dir / "trace.jsonl").read_text().splitlines()
        rec = json.loads(trace[100])
        rec["vehicle"]["x"] += 0.5
        trace[100] = json.dumps(rec, separators=(",", ":"))
        (trace_dir / "trace.jsonl").write_text("\n".join(trace) + "\n")
        proc = run_cli("replay", str(trace_dir))
        assert proc.returncode == 1
        assert json.loads(proc.stdout)["replay"] == "diverged"

    def test_run_with_inject_file(self, tmp_path):
        inject = tmp_path / "inject.json"
        inject.write_text(json.dumps(
            [{"tick": 300, "type": "shake"},
             {"tick": 320, "type": "operator", "command": "manual"}]
        ))
        proc = run_cli("run", "vertical", "--auto-grant", "--inject", str(inject))
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["outcome"] == "manual-exit"
