"""Command line front end: run, serve, validate, replay.

Exit codes: 0 run reached a success outcome (parked / exited / manual-exit),
2 collision, 3 timeout, 64 usage error, 65 scenario file error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .scenario import ScenarioError, bundled_names, load_scenario
from .sim import OUTCOME_COLLISION, OUTCOME_TIMEOUT, Simulation, run_scenario
from .service import serve

EX_OK = 0
EX_COLLISION = 2
EX_TIMEOUT = 3
EX_USAGE = 64
EX_SCENARIO = 65


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse default exit code is 2; we reserve that
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EX_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="autopark",
        description="Deterministic fuzzy-controlled self-parking simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario headless, as fast as possible")
    run_p.add_argument("scenario", help="scenario file path or bundled name")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--max-ticks", type=int, default=None)
    run_p.add_argument("--trace", type=Path, default=None, help="trace output directory")
    run_p.add_argument("--auto-grant", action="store_true", default=None,
                       help="grant the parking request without an operator")
    run_p.add_argument("--inject", type=Path, default=None,
                       help="JSON file with extra scripted events to merge in")

    serve_p = sub.add_parser("serve", help="run tick-paced with telemetry/command endpoints")
    serve_p.add_argument("scenario")
    serve_p.add_argument("--listen", default="127.0.0.1:8700", metavar="ADDR:PORT")
    serve_p.add_argument("--seed", type=int, default=None)
    serve_p.add_argument("--trace", type=Path, default=None)
    serve_p.add_argument("--auto-grant", action="store_true", default=None)
    serve_p.add_argument("--speed", type=float, default=1.0,
                         help="pacing multiplier; 1.0 is real time")

    val_p = sub.add_parser("validate", help="check a scenario file and echo the manifest")
    val_p.add_argument("scenario")

    rep_p = sub.add_parser("replay", help="re-run from a trace directory and compare")
    rep_p.add_argument("trace_dir", type=Path)

    sub.add_parser("scenarios", help="list bundled scenario names")
    return parser


def _outcome_exit(outcome: str) -> int:
    if outcome == OUTCOME_COLLISION:
        return EX_COLLISION
    if outcome == OUTCOME_TIMEOUT:
        return EX_TIMEOUT
    return EX_OK


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    extra = None
    if args.inject is not None:
        extra = json.loads(args.inject.read_text())
        if not isinstance(extra, list):
            print("inject file must hold a JSON list of events", file=sys.stderr)
            return EX_USAGE
    result = run_scenario(
        scenario,
        seed=args.seed,
        max_ticks=args.max_ticks,
        trace_dir=args.trace,
        auto_grant=args.auto_grant,
        extra_events=extra,
    )
    print(json.dumps({
        "outcome": result.outcome,
        "ticks": result.ticks,
        "notifications": result.notifications,
        "trace": str(result.trace_dir) if result.trace_dir else None,
    }))
    return _outcome_exit(result.outcome)


def _cmd_serve(args) -> int:
    scenario = load_scenario(args.scenario)
    outcome = serve(
        scenario,
        listen=args.listen,
        seed=args.seed,
        trace_dir=args.trace,
        auto_grant=args.auto_grant,
        speed=args.speed,
    )
    print(json.dumps({"outcome": outcome}))
    return _outcome_exit(outcome)


def _cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    print(json.dumps(scenario.manifest(), indent=2, sort_keys=True))
    return EX_OK


def _cmd_replay(args) -> int:
    manifest_path = args.trace_dir / "manifest.json"
    trace_path = args.trace_dir / "trace.jsonl"
    result_path = args.trace_dir / "result.json"
    for p in (manifest_path, trace_path):
        if not p.exists():
            print(f"missing {p}", file=sys.stderr)
            return EX_SCENARIO
    from .scenario import Scenario

    scenario = Scenario(json.loads(manifest_path.read_text()))
    extra = None
    if result_path.exists():
        injected = json.loads(result_path.read_text()).get("injected", [])
        extra = [
            {"tick": c["tick"], "type": c["type"], "data": c["data"]}
            for c in injected
        ]
    sim = Simulation(scenario, extra_events=extra)
    sim.run()
    sim.finalize()
    original = trace_path.read_text().splitlines()
    replayed = sim.trace_records
    if original == replayed:
        print(json.dumps({"replay": "identical", "ticks": len(replayed)}))
        return EX_OK
    first_diff = next(
        (i for i, (a, b) in enumerate(zip(original, replayed)) if a != b),
        min(len(original), len(replayed)),
    )
    print(json.dumps({"replay": "diverged", "first_divergent_tick": first_diff}))
    return 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "replay":
            return _cmd_replay(args)
        if args.command == "scenarios":
            print("\n".join(bundled_names()))
            return EX_OK
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EX_SCENARIO
    return EX_USAGE


if __name__ == "__main__":
    sys.exit(main())
