"""Command-line entry points.

Subcommands: validate-consent, gamma, run-scenario, replay, serve, report.
Exit codes: 0 success/pass, 1 check failed, 2 usage or input error. Every
subcommand takes --json for machine-readable output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .consent import consent_to_obj, parse_consent_document
from .errors import (
    ChecksumMismatch,
    CorveError,
    InvalidInterval,
    MalformedDocument,
    SchemaViolation,
    StorageFailure,
    UnknownProfile,
)
from .eventstore import read_log, replay, state_to_json_obj, write_log
from .policy import compute_gamma, decide, normalize_components
from .resources import load_profile, read_scenario_text
from .simulator import (
    EXPECTATIONS,
    assert_outcome,
    load_scenario,
    make_oracle,
    run,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

# decision outcomes use the spoken forms on the terminal
OUTCOME_LABELS = {
    "proceed": "proceed",
    "notify_and_acknowledge": "notify-and-acknowledge",
    "re_consent": "re-consent",
    "halt": "halt",
}


def parse_duration(text: str) -> float:
    """Duration literal to seconds: bare number, or s/m/h suffix."""
    text = text.strip()
    scale = 1.0
    if text and text[-1] in "smh":
        scale = {"s": 1.0, "m": 60.0, "h": 3600.0}[text[-1]]
        text = text[:-1]
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"not a duration: {text!r} (use seconds or a s/m/h suffix)"
        ) from None
    return value * scale


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_validate_consent(args: argparse.Namespace) -> int:
    try:
        raw = Path(args.document).read_text(encoding="utf-8")
    except OSError as exc:
        return _fail(f"cannot read {args.document}: {exc}", EXIT_USAGE)
    try:
        tup = parse_consent_document(raw)
    except (MalformedDocument, SchemaViolation, InvalidInterval) as exc:
        if args.json:
            print(json.dumps({"valid": False, "error": type(exc).__name__, "message": str(exc)}))
        else:
            print(f"invalid: {exc}")
        return EXIT_CHECK_FAILED
    if args.json:
        print(json.dumps({"valid": True, "consent": consent_to_obj(tup)}))
    else:
        window = f"[{tup.valid_from}, {tup.valid_until}]"
        print(f"valid consent from {tup.human_id}")
        print(f"  action types: {', '.join(sorted(tup.action_types))}")
        print(f"  spatial scope: {', '.join(sorted(tup.spatial_scope))}")
        print(f"  validity: {window}  delegable: {tup.delegable}  ambiguity: {tup.ambiguity}")
        if tup.exclusions:
            rules = ", ".join(
                e.action_class + (f"@{e.zone}" if e.zone else "") for e in tup.exclusions
            )
            print(f"  exclusions: {rules}")
    return EXIT_OK


def cmd_gamma(args: argparse.Namespace) -> int:
    try:
        profile = load_profile(args.profile)
    except (UnknownProfile, CorveError, OSError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    try:
        components = normalize_components(
            ir=args.ir,
            delta_t=args.dt,
            depth=args.depth,
            ambiguity=args.ambiguity,
            profile=profile,
        )
    except (CorveError, ValueError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    assessment = compute_gamma(components, profile)
    decision = decide(
        assessment,
        consent_active=True,
        agent_in_chain=True,
        action_in_scope=True,
    )
    assessment = assessment.with_decision(decision)
    if args.json:
        print(json.dumps(assessment.to_json_obj()))
        return EXIT_OK
    c = assessment.components
    flags = []
    if c.dt_clamped:
        flags.append("dt clamped")
    if c.d_clamped:
        flags.append("depth clamped")
    note = f"  ({'; '.join(flags)})" if flags else ""
    print(f"profile:   {profile.name}")
    print(f"ir:        {c.ir:.6f}  ({assessment.tier.label})")
    print(f"dt_hat:    {c.dt_hat:.6f}")
    print(f"d_hat:     {c.d_hat:.6f}")
    print(f"ambiguity: {c.ambiguity:.6f}")
    print(f"gamma:     {assessment.gamma_value:.6f}  threshold {profile.threshold:.6f}{note}")
    label = OUTCOME_LABELS[decision.outcome.value]
    reason = f" ({decision.reason.value})" if decision.reason else ""
    print(f"decision:  {label}{reason}")
    return EXIT_OK


def cmd_run_scenario(args: argparse.Namespace) -> int:
    try:
        spec = load_scenario(read_scenario_text(args.scenario))
    except (CorveError, OSError, ValueError) as exc:
        return _fail(f"cannot load scenario: {exc}", EXIT_USAGE)
    if args.oracle == "interactive":
        return _fail(
            "interactive oracle needs a human; use `corve serve` for that", EXIT_USAGE
        )
    try:
        oracle = make_oracle(args.oracle)
    except (CorveError, OSError) as exc:
        return _fail(f"cannot build oracle: {exc}", EXIT_USAGE)

    events = run(spec, oracle)
    out = Path(args.out) if args.out else Path(f"{spec.name}.ccdlog")
    if args.force and out.exists():
        out.unlink()
    try:
        digest = write_log(events, out)
    except StorageFailure as exc:
        return _fail(f"{exc} (pass --force to overwrite)", EXIT_USAGE)

    result = {
        "scenario": spec.name,
        "events": len(events),
        "log": str(out),
        "checksum": digest,
    }
    code = EXIT_OK
    if args.expect:
        report = assert_outcome(events, args.expect)
        result["expectation"] = report.to_json_obj()
        code = EXIT_OK if report.passed else EXIT_CHECK_FAILED
    if args.json:
        print(json.dumps(result))
    else:
        print(f"{spec.name}: {len(events)} events -> {out}")
        if args.expect:
            verdict = "pass" if code == EXIT_OK else "FAIL"
            print(f"expect {args.expect}: {verdict}")
            if code != EXIT_OK:
                for detail in result["expectation"]["details"]:
                    print(f"  - {detail}")
    return code


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        events = read_log(args.log)
    except ChecksumMismatch as exc:
        return _fail(str(exc), EXIT_CHECK_FAILED)
    except (StorageFailure, OSError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    try:
        state = replay(events)
    except CorveError as exc:
        return _fail(f"log does not replay: {exc}", EXIT_CHECK_FAILED)
    obj = state_to_json_obj(state)
    if args.json:
        print(json.dumps(obj))
        return EXIT_OK
    print(f"{args.log}: {len(events)} events, checksum ok")
    for cid, info in obj["consents"].items():
        print(f"consent {cid}: {info['status']}")
    for cid, graph in obj["graphs"].items():
        hops = " -> ".join(
            [graph["human_id"]]
            + [a["agent"] for a in sorted(graph["agents"], key=lambda a: a["depth"])]
        )
        print(f"chain {cid}: {hops}")
    for entry in obj["decisions"]:
        d = entry["decision"]
        label = OUTCOME_LABELS[d["outcome"]]
        reason = f" ({d['reason']})" if d["reason"] else ""
        print(f"decision {entry['action_id']}: {label}{reason}")
    if obj["executed"]:
        print(f"executed: {', '.join(obj['executed'])}")
    for aid, cause in obj["blocked"].items():
        print(f"blocked {aid}: {cause}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    try:
        events = read_log(args.log)
    except ChecksumMismatch as exc:
        return _fail(str(exc), EXIT_CHECK_FAILED)
    except (StorageFailure, OSError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    try:
        state = replay(events)
    except CorveError as exc:
        return _fail(f"log does not replay: {exc}", EXIT_CHECK_FAILED)

    obj = state_to_json_obj(state)
    creep_trajectories: dict[str, list[dict]] = {}
    for cid, graph in obj["graphs"].items():
        by_agent = {a["agent"]: a["scope_creep"] for a in graph["agents"]}
        trajectory = [
            {
                "time": graph["granted_at"],
                "agent": graph["root_agent"],
                "scope_creep": by_agent[graph["root_agent"]],
            }
        ]
        for edge in graph["edges"]:
            trajectory.append(
                {
                    "time": edge["timestamp"],
                    "agent": edge["to_agent"],
                    "scope_creep": by_agent[edge["to_agent"]],
                }
            )
        creep_trajectories[cid] = trajectory

    max_gamma: dict[str, float] = {}
    for event in events:
        if event.kind != "AssessmentMade":
            continue
        agent = event.payload["agent"]
        g = event.payload["assessment"]["gamma"]
        if agent not in max_gamma or g > max_gamma[agent]:
            max_gamma[agent] = g

    result = {
        "log": args.log,
        "events": len(events),
        "decisions": obj["decisions"],
        "scope_creep": creep_trajectories,
        "max_gamma": dict(sorted(max_gamma.items())),
        "executed": obj["executed"],
        "blocked": obj["blocked"],
    }
    if args.json:
        print(json.dumps(result))
        return EXIT_OK
    print(f"{args.log}: {len(events)} events")
    print("decisions:")
    for entry in obj["decisions"]:
        d = entry["decision"]
        label = OUTCOME_LABELS[d["outcome"]]
        reason = f" ({d['reason']})" if d["reason"] else ""
        print(f"  {entry['action_id']}: {label}{reason}")
    print("scope creep:")
    for cid, trajectory in creep_trajectories.items():
        steps = "  ".join(
            f"t={p['time']:g} {p['agent']}={p['scope_creep']:.3f}" for p in trajectory
        )
        print(f"  {cid}: {steps}")
    print("max gamma per agent:")
    for agent, g in sorted(max_gamma.items()):
        print(f"  {agent}: {g:.6f}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve  # heavy import kept off the fast paths

    try:
        return serve(
            scenario=args.scenario,
            profile=args.profile,
            bind=args.bind,
            decision_budget_ms=args.decision_budget_ms,
            request_timeout=args.request_timeout,
        )
    except (CorveError, OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corve",
        description="Runtime consent verification for delegated robot actions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-consent", help="check a consent document file")
    p.add_argument("document", help="path to a consent JSON document")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_validate_consent)

    p = sub.add_parser("gamma", help="compute a severity score from components")
    p.add_argument("--ir", type=float, required=True, help="irreversibility score in [0,1]")
    p.add_argument(
        "--dt",
        type=parse_duration,
        required=True,
        help="time since original consent (seconds, or s/m/h suffix)",
    )
    p.add_argument("--depth", type=int, required=True, help="delegation depth")
    p.add_argument(
        "--ambiguity", type=float, required=True, help="instruction ambiguity in [0,1]"
    )
    p.add_argument(
        "--profile", default="healthcare", help="policy profile name or JSON path"
    )
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("run-scenario", help="run a scripted scenario headless")
    p.add_argument("scenario", help="bundled scenario name or JSON path")
    p.add_argument(
        "--oracle",
        default="always-grant",
        help="always-grant, always-deny, or a JSON answers file",
    )
    p.add_argument(
        "--expect",
        choices=EXPECTATIONS,
        help="fail (exit 1) unless the run shows this outcome",
    )
    p.add_argument("--out", help="log path (default <scenario>.ccdlog)")
    p.add_argument("--force", action="store_true", help="overwrite an existing log")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_run_scenario)

    p = sub.add_parser("replay", help="rebuild state from an event log")
    p.add_argument("log", help="path to a .ccdlog segment")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("report", help="summarize decisions and drift from a log")
    p.add_argument("log", help="path to a .ccdlog segment")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="serve a scenario over HTTP for live operation")
    p.add_argument("--scenario", required=True, help="bundled scenario name or JSON path")
    p.add_argument("--profile", help="override the scenario's policy profile")
    p.add_argument("--bind", default="127.0.0.1:8733", help="host:port to listen on")
    p.add_argument(
        "--decision-budget-ms",
        type=float,
        default=50.0,
        help="per-decision wall-clock budget tracked in /state",
    )
    p.add_argument(
        "--request-timeout",
        type=parse_duration,
        default="600s",
        help="wall-clock deadline for pending requests (s/m/h suffix)",
    )
    p.add_argument("--json", action="store_true", help="log serve banner as JSON")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
