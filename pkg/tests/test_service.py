import json
import threading
import time
import urllib.request
from http.server import ThreadingHTTPServer

import pytest

import autopark
from autopark.service import ServiceRuntime, _make_handler
from autopark.sim import Simulation


class ServiceFixture:
    """In-process service on an ephemeral port, sped up far beyond real time."""

    def __init__(self, scenario_name="default", speed=200.0, auto_grant=None,
                 extra=None):
        scenario = autopark.load_scenario(scenario_name)
        self.runtime = ServiceRuntime(scenario, auto_grant=auto_grant, speed=speed)
        if extra:
            for ev in extra:
                self.runtime.sim.events.append(
                    {"tick": ev["tick"], "type": ev["type"],
                     "data": {k: v for k, v in ev.items() if k not in ("tick", "type")}}
                )
            self.runtime.sim.events.sort(key=lambda e: e["tick"])
        self.server = ThreadingHTTPServer(
            ("127.0.0.1", 0), _make_handler(self.runtime, lambda: None)
        )
        self.server.daemon_threads = True
        self.port = self.server.server_address[1]
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    def __enter__(self):
        self.runtime.start()
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.runtime.stop()
        self.server.shutdown()

    def get(self, path):
        with urllib.request.urlopen(f"http://127.0.0.1:{self.port}{path}", timeout=10) as r:
            return json.loads(r.read())

    def post(self, path, payload):
        req = urllib.request.Request(
            f"http://127.0.0.1:{self.port}{path}",
            data=json.dumps(payload).encode(),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(req, timeout=30) as r:
                return r.status, json.loads(r.read())
        except urllib.error.HTTPError as e:
            return e.code, json.loads(e.read())

    def wait(self, predicate, timeout=30.0, interval=0.01):
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            snap = self.get("/snapshot")
            if predicate(snap):
                return snap
            time.sleep(interval)
        raise AssertionError("condition not reached before timeout")


class TestServiceEndpoints:
    def test_health_and_snapshot(self):
        with ServiceFixture() as svc:
            health = svc.get("/health")
            assert health["ok"] is True
            snap = svc.get("/snapshot")
            assert snap["lot"]["size"] == [3.0, 2.5]
            assert len(snap["lot"]["slots"]) == 8

    def test_malformed_command_rejected_loop_unaffected(self):
        with ServiceFixture() as svc:
            status, body = svc.post("/command", {"type": "warp-drive"})
            assert status == 409
            assert body["accepted"] is False
            assert "unknown command type" in body["reason"]
            t0 = svc.get("/health")["tick"]
            time.sleep(0.2)
            assert svc.get("/health")["tick"] > t0

    def test_grant_command_applies_next_tick(self):
        with ServiceFixture(auto_grant=False) as svc:
            svc.wait(lambda s: s["pending_approval"])
            status, body = svc.post("/command", {"type": "operator", "command": "grant"})
            assert status == 200 and body["accepted"] is True
            svc.wait(lambda s: s["mode"] == "searching")
            # snapshot polling undersamples at test speed; take the exact
            # transition tick from the trace: grant framed next tick, one
            # tick channel latency, applied on the following control phase
            recs = [json.loads(line) for line in svc.runtime.sim.trace_records]
            first_searching = next(r["tick"] for r in recs if r["mode"] == "searching")
            assert first_searching - body["tick"] <= 2 + 1 + 2

    def test_inapplicable_operator_command_rejected(self):
        with ServiceFixture(auto_grant=True) as svc:
            svc.wait(lambda s: s["mode"] == "searching")
            status, body = svc.post("/command", {"type": "operator", "command": "resume"})
            assert status == 409
            assert body["accepted"] is False


class TestStreamAndEquivalence:
    def test_stream_emits_monotone_snapshots(self):
        with ServiceFixture(speed=100.0) as svc:
            url = f"http://127.0.0.1:{svc.port}/stream"
            with urllib.request.urlopen(url, timeout=10) as resp:
                ticks = []
                while len(ticks) < 20:
                    line = resp.readline()
                    if line.startswith(b"data: "):
                        ticks.append(json.loads(line[6:])["tick"])
            assert ticks == sorted(ticks)
            assert len(set(ticks)) >= 19  # one snapshot per tick, no stalls

    def test_served_run_equals_headless_with_same_command_schedule(self):
        with ServiceFixture(scenario_name="vertical", auto_grant=False, speed=400.0) as svc:
            svc.wait(lambda s: s["pending_approval"])
            status, body = svc.post("/command", {"type": "operator", "command": "grant"})
            assert body["accepted"]
            grant_tick = body["tick"]
            svc.runtime.finished.wait(timeout=120)
            served_trace = list(svc.runtime.sim.trace_records)
            outcome = json.loads(svc.runtime.result_json)["outcome"]
        assert outcome == "parked"
        headless = Simulation(
            autopark.load_scenario("vertical"),
            extra_events=[{"tick": grant_tick, "type": "operator", "command": "grant"}],
        )
        headless.run()
        assert headless.trace_records == served_trace

    def test_disconnecting_stream_never_stalls_loop(self):
        with ServiceFixture(speed=200.0) as svc:
            url = f"http://127.0.0.1:{svc.port}/stream"
            resp = urllib.request.urlopen(url, timeout=10)
            resp.read(100)
            resp.close()  # abrupt disconnect
            t0 = svc.get("/health")["tick"]
            time.sleep(0.3)
            assert svc.get("/health")["tick"] > t0
