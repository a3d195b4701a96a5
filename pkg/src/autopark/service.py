"""Tick-paced service mode: telemetry stream and command intake over HTTP.

The simulation loop runs on one thread and owns all mutable state; HTTP
handlers communicate with it only through queues and immutable JSON strings.
Telemetry is one server-sent event per tick on /stream; commands POSTed to
/command are queued, applied on the next tick, and answered with the
accept/reject decision from that tick.  A slow or vanished console can never
stall the loop: per-subscriber queues drop oldest snapshots when full.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .scenario import Scenario
from .sim import InjectedCommand, Simulation

log = logging.getLogger(__name__)

COMMAND_TYPES = ("operator", "leave-request", "shake", "obstacle-add", "obstacle-remove")


class ServiceRuntime:
    """Owns the simulation thread and the state the HTTP layer may read."""

    def __init__(
        self,
        scenario: Scenario,
        seed: int | None = None,
        trace_dir: str | Path | None = None,
        auto_grant: bool | None = None,
        speed: float = 1.0,
    ) -> None:
        self.sim = Simulation(scenario, seed=seed, trace_dir=trace_dir, auto_grant=auto_grant)
        self.speed = max(speed, 1e-6)
        self.latest_snapshot = json.dumps(self.sim.snapshot())
        self.result_json: str | None = None
        self.subscribers: list[queue.Queue] = []
        self.commands: queue.Queue = queue.Queue()
        self.stop_flag = threading.Event()
        self.finished = threading.Event()
        self._lock = threading.Lock()
        self.thread = threading.Thread(target=self._loop, name="sim-loop", daemon=True)

    def start(self) -> None:
        self.thread.start()

    def _loop(self) -> None:
        sim = self.sim
        tick_wall = sim.dt / self.speed
        started = time.monotonic()
        waiting: list[tuple[InjectedCommand, threading.Event, dict]] = []
        while not self.stop_flag.is_set():
            if sim.done() or sim.tick >= sim.scenario.max_ticks:
                break
            # commands submitted up to now land in this tick's event phase
            while True:
                try:
                    cmd, done_evt, holder = self.commands.get_nowait()
                except queue.Empty:
                    break
                cmd.tick = sim.tick
                sim.inject(cmd)
                waiting.append((cmd, done_evt, holder))
            sim.tick_once()
            for cmd, done_evt, holder in waiting:
                if cmd.applied:
                    holder["accepted"] = bool(cmd.accepted)
                    holder["reason"] = cmd.reason
                    holder["tick"] = cmd.tick
                    done_evt.set()
            waiting = [w for w in waiting if not w[1].is_set()]
            snap = json.dumps(sim.snapshot())
            with self._lock:
                self.latest_snapshot = snap
                for q in list(self.subscribers):
                    try:
                        q.put_nowait(snap)
                    except queue.Full:
                        try:
                            q.get_nowait()  # drop oldest for a slow consumer
                            q.put_nowait(snap)
                        except queue.Empty:
                            pass
            target = started + sim.tick * tick_wall
            delay = target - time.monotonic()
            if delay > 0:
                time.sleep(delay)
        if sim.outcome is None and sim.tick >= sim.scenario.max_ticks:
            sim.outcome = "timeout"
        result = sim.finalize()
        self.result_json = json.dumps(
            {
                "outcome": result.outcome,
                "ticks": result.ticks,
                "registry": result.registry,
                "notifications": result.notifications,
            }
        )
        for cmd, done_evt, holder in waiting:
            holder["accepted"] = False
            holder["reason"] = "run finished before the command applied"
            done_evt.set()
        self.finished.set()

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=256)
        with self._lock:
            self.subscribers.append(q)
            q.put_nowait(self.latest_snapshot)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self.subscribers:
                self.subscribers.remove(q)

    def submit(self, payload: dict, timeout: float = 30.0) -> dict:
        ctype = payload.get("type")
        if ctype not in COMMAND_TYPES:
            return {"accepted": False, "reason": f"unknown command type {ctype!r}"}
        data = {k: v for k, v in payload.items() if k != "type"}
        if ctype == "operator" and data.get("command") not in (
            "grant", "deny", "resume", "manual",
        ):
            return {"accepted": False, "reason": "operator command must be grant/deny/resume/manual"}
        cmd = InjectedCommand(tick=0, type=ctype, data=data)
        done_evt = threading.Event()
        holder: dict = {}
        if self.finished.is_set():
            return {"accepted": False, "reason": "run already finished"}
        self.commands.put((cmd, done_evt, holder))
        if not done_evt.wait(timeout):
            return {"accepted": False, "reason": "timed out waiting for the loop"}
        return holder

    def stop(self) -> None:
        self.stop_flag.set()


def _make_handler(runtime: ServiceRuntime, shutdown_cb) -> type:
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # route through logging, not stderr
            log.debug("http: " + fmt, *args)

        def _send_json(self, obj, status=200) -> None:
            body = (obj if isinstance(obj, str) else json.dumps(obj)).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_GET(self):
            if self.path == "/health":
                self._send_json({"ok": True, "tick": runtime.sim.tick})
            elif self.path == "/scenario":
                self._send_json(runtime.sim.scenario.manifest())
            elif self.path == "/snapshot":
                self._send_json(runtime.latest_snapshot)
            elif self.path == "/result":
                if runtime.result_json is None:
                    self._send_json({"error": "run still in progress"}, status=404)
                else:
                    self._send_json(runtime.result_json)
            elif self.path == "/trace":
                body = ("\n".join(runtime.sim.trace_records) + "\n").encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/x-ndjson")
                self.send_header("Access-Control-Allow-Origin", "*")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
            elif self.path == "/stream":
                self._stream()
            else:
                self._send_json({"error": "not found"}, status=404)

        def _stream(self) -> None:
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            q = runtime.subscribe()
            try:
                while not runtime.stop_flag.is_set():
                    try:
                        snap = q.get(timeout=1.0)
                    except queue.Empty:
                        if runtime.finished.is_set():
                            break
                        self.wfile.write(b": keepalive\n\n")
                        self.wfile.flush()
                        continue
                    self.wfile.write(b"data: " + snap.encode() + b"\n\n")
                    self.wfile.flush()
            except (BrokenPipeError, ConnectionResetError):
                pass
            finally:
                runtime.unsubscribe(q)

        def do_POST(self):
            if self.path == "/command":
                length = int(self.headers.get("Content-Length", "0"))
                try:
                    payload = json.loads(self.rfile.read(length) or b"{}")
                except json.JSONDecodeError as exc:
                    self._send_json({"accepted": False, "reason": f"bad JSON: {exc.msg}"}, 400)
                    return
                outcome = runtime.submit(payload)
                self._send_json(outcome, 200 if outcome.get("accepted") else 409)
            elif self.path == "/shutdown":
                self._send_json({"ok": True})
                shutdown_cb()
            else:
                self._send_json({"error": "not found"}, status=404)

    return Handler


def serve(
    scenario: Scenario,
    listen: str,
    seed: int | None = None,
    trace_dir: str | Path | None = None,
    auto_grant: bool | None = None,
    speed: float = 1.0,
    ready_cb=None,
) -> str:
    """Run the scenario paced in real time behind an HTTP endpoint.

    Blocks until the run finishes and a /shutdown arrives (or the run is
    stopped); returns the outcome string.
    """
    host, _, port_s = listen.rpartition(":")
    host = host or "127.0.0.1"
    runtime = ServiceRuntime(
        scenario, seed=seed, trace_dir=trace_dir, auto_grant=auto_grant, speed=speed
    )
    server = ThreadingHTTPServer((host, int(port_s)), _make_handler(runtime, lambda: None))
    server.daemon_threads = True

    stop_server = threading.Event()

    def shutdown() -> None:
        runtime.stop()
        stop_server.set()

    server.RequestHandlerClass = _make_handler(runtime, shutdown)
    runtime.start()
    if ready_cb is not None:
        ready_cb(server.server_address)
    log.info("serving on %s:%s", *server.server_address)
    serve_thread = threading.Thread(target=server.serve_forever, daemon=True)
    serve_thread.start()
    try:
        while not stop_server.is_set():
            if runtime.finished.wait(timeout=0.2):
                # run complete; stay up for trace/result queries until shutdown
                stop_server.wait()
                break
    except KeyboardInterrupt:
        pass
    runtime.stop()
    server.shutdown()
    runtime.finished.wait(timeout=5.0)
    return json.loads(runtime.result_json or '{"outcome": "timeout"}')["outcome"]
