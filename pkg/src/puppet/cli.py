"""Command-line entry points.

Exit codes: 0 ok, 1 validation error, 2 runtime fault, 3 replay mismatch.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from puppet.errors import ContractViolation, ModelError, PuppetError, ReplayMismatch, ScenarioError
from puppet.harness.record import RecordError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_REPLAY_MISMATCH = 3

DEFAULT_PORT = 10405
DEFAULT_UI_PORT = 10406


def _env_default(name: str, fallback):
    value = os.environ.get(name)
    if value is None:
        return fallback
    try:
        return type(fallback)(value)
    except (TypeError, ValueError):
        return fallback


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="puppet",
        description="Leader-follower arm teleoperation sandbox",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario under the lockstep clock")
    p_run.add_argument("scenario", help="scenario JSON file")
    p_run.add_argument("--record", metavar="OUT.jsonl", help="write the demo record here")
    p_run.add_argument("--metrics", metavar="OUT.json", help="write metrics JSON here")
    p_run.add_argument("--events", metavar="OUT.jsonl", help="write the gate event log here")
    p_run.add_argument("--report", metavar="DIR", help="render figures + CSV summary into DIR")

    p_replay = sub.add_parser("replay", help="verify a demo record by re-simulation")
    p_replay.add_argument("demo", help="demo JSONL file")
    p_replay.add_argument("--metrics", metavar="OUT.json")

    p_report = sub.add_parser("report", help="render figures and CSV for a demo record")
    p_report.add_argument("demo", help="demo JSONL file")
    p_report.add_argument("--out", metavar="DIR", default="report", help="output directory")

    p_serve = sub.add_parser("serve", help="interactive mode with console gateway")
    p_serve.add_argument("--model", default="panda_7dof", help="model file or builtin name")
    p_serve.add_argument("--host", default=_env_default("PUPPET_HOST", "127.0.0.1"))
    p_serve.add_argument("--port", type=int, default=_env_default("PUPPET_PORT", DEFAULT_PORT))
    p_serve.add_argument(
        "--ui-port", type=int, default=_env_default("PUPPET_UI_PORT", DEFAULT_UI_PORT)
    )
    p_serve.add_argument("--ui-dir", default=None, help="static console files to serve")

    p_validate = sub.add_parser("validate", help="validate a model or scenario file")
    p_validate.add_argument("file", help="JSON file to validate")

    return parser


def _cmd_run(args) -> int:
    from puppet.harness.metrics import compute_metrics
    from puppet.harness.record import read_demo
    from puppet.harness.report import write_report
    from puppet.harness.scenario import load_scenario
    from puppet.harness.session import run_scenario

    scenario = load_scenario(args.scenario)
    result = run_scenario(scenario)
    record = read_demo(result.demo_text)
    metrics = compute_metrics(record)
    if args.record:
        Path(args.record).write_text(result.demo_text)
        print(f"demo record: {args.record} ({len(record.rows)} rows)")
    if args.events:
        result.events.write(args.events)
        print(f"event log: {args.events} ({len(result.events.rows)} events)")
    if args.metrics:
        Path(args.metrics).write_text(json.dumps(metrics.to_dict(), indent=2) + "\n")
        print(f"metrics: {args.metrics}")
    if args.report:
        files = write_report(record, args.report, metrics)
        print(f"report: {', '.join(sorted(files.values()))}")
    print(json.dumps(metrics.to_dict(), indent=2))
    return EXIT_OK


def _cmd_replay(args) -> int:
    from puppet.harness.metrics import replay

    try:
        metrics = replay(args.demo)
    except ReplayMismatch as exc:
        print(f"replay mismatch: {exc}", file=sys.stderr)
        return EXIT_REPLAY_MISMATCH
    if args.metrics:
        Path(args.metrics).write_text(json.dumps(metrics.to_dict(), indent=2) + "\n")
    print("replay verified: follower trajectory is bit-identical")
    print(json.dumps(metrics.to_dict(), indent=2))
    return EXIT_OK


def _cmd_report(args) -> int:
    from puppet.harness.record import read_demo
    from puppet.harness.report import write_report

    record = read_demo(args.demo)
    files = write_report(record, args.out)
    for name, path in sorted(files.items()):
        print(f"{name}: {path}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from puppet.serve import serve

    serve(
        model_file=args.model,
        host=args.host,
        port=args.port,
        ui_port=args.ui_port,
        ui_dir=args.ui_dir,
    )
    return EXIT_OK


def _cmd_validate(args) -> int:
    from puppet.harness.scenario import load_scenario
    from puppet.kinematics.model import load_model

    text = Path(args.file).read_text()
    doc = json.loads(text)
    if isinstance(doc, dict) and "joints" in doc:
        model = load_model(args.file)
        print(f"ok: model {model.name!r}, {model.dof} joints")
    else:
        scenario = load_scenario(args.file)
        print(f"ok: scenario {scenario.name!r}, duration {scenario.duration}s")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "replay": _cmd_replay,
        "report": _cmd_report,
        "serve": _cmd_serve,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except (ModelError, ScenarioError, RecordError, ContractViolation) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except json.JSONDecodeError as exc:
        print(f"validation error: invalid JSON ({exc})", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ReplayMismatch as exc:
        print(f"replay mismatch: {exc}", file=sys.stderr)
        return EXIT_REPLAY_MISMATCH
    except PuppetError as exc:
        print(f"runtime fault: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
