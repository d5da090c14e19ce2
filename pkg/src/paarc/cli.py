"""``paarc`` command line: run scenarios, check policies, evaluate requests, query audits.

Exit status: 0 success, 1 scenario/policy error, 2 I/O error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .audit import AuditLog
from .enforcement import PolicyStore, ServiceRequest, pdp_decide
from .policy import PolicyError, parse_policy_set
from .sim import InvariantViolation, ScenarioError, Simulation, dump_report, load_scenario

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_INVARIANT = 0, 1, 2, 3


class InputError(Exception):
    pass


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _read_json(path: str):
    text = _read(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None


def _load_policies(path: str):
    try:
        return parse_policy_set(_read(path))
    except PolicyError as exc:
        raise InputError(f"{path}:{exc}") from None


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario, args.policies, mode=args.mode)
    sim = Simulation(scenario)
    report = sim.run()
    Path(args.out).write_text(dump_report(report), encoding="utf-8")
    summary = {"mode": report["mode"], "final_tick": report["final_tick"],
               "audit_record_count": report["audit_record_count"], **report["tallies"]}
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(f"mode {summary['mode']}  ticks {summary['final_tick']}  "
              f"audit records {summary['audit_record_count']}")
        for key in ("accepted", "rejected", "legitimate_accepted", "illegitimate_accepted",
                    "illegitimate_rejected", "bookings_served", "bookings_unserved"):
            print(f"  {key:<24}{summary[key]:>6}")
    return EXIT_OK


def cmd_policy_check(args) -> int:
    policies = _load_policies(args.path)
    if args.json:
        print(json.dumps({"ok": True, "policies": [p.id for p in policies]}))
    else:
        print(f"{len(policies)} policies OK")
    return EXIT_OK


def cmd_eval(args) -> int:
    doc = _read_json(args.request)
    try:
        req = ServiceRequest.from_json(doc)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"{args.request}: bad decision request: {exc}") from None
    store = PolicyStore(_load_policies(args.policies))
    decision = pdp_decide(req, store.snapshot)
    print(json.dumps(decision.to_json(), sort_keys=True))
    return EXIT_OK


def cmd_audit(args) -> int:
    doc = _read_json(args.report)
    try:
        log = AuditLog.from_json(doc["audit"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.report}: no usable audit log: {exc}") from None
    records = log.trace_request(args.request_id) if args.request_id else list(log)
    filtered = log.query(domain=args.domain, actor=args.actor, action=args.action,
                         effect=args.effect)
    keep = {r.seq for r in filtered}
    records = [r for r in records if r.seq in keep]
    for r in records:
        if args.json:
            print(json.dumps(r.to_json(), sort_keys=True))
        else:
            print(f"{r.seq:>5} t={r.tick:<5} {r.domain.value:<11} {r.actor:<12} {r.action:<20} "
                  f"{r.request_id or '-':<10} {r.decision_effect or '-':<13} {r.detail}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paarc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write its report")
    run.add_argument("--scenario", required=True)
    run.add_argument("--policies")
    run.add_argument("--out", required=True)
    run.add_argument("--mode", choices=["A", "B"], help="override the scenario's mode")
    run.add_argument("--json", action="store_true")
    run.set_defaults(func=cmd_run)

    policy = sub.add_parser("policy", help="policy file tools")
    policy_sub = policy.add_subparsers(dest="policy_command", required=True)
    check = policy_sub.add_parser("check", help="parse and validate a .pol file")
    check.add_argument("path")
    check.add_argument("--json", action="store_true")
    check.set_defaults(func=cmd_policy_check)

    ev = sub.add_parser("eval", help="decide one request without a simulation")
    ev.add_argument("--request", required=True)
    ev.add_argument("--policies", required=True)
    ev.set_defaults(func=cmd_eval)

    audit = sub.add_parser("audit", help="query the audit log of a report")
    audit.add_argument("--report", required=True)
    audit.add_argument("--request-id")
    audit.add_argument("--effect")
    audit.add_argument("--domain", choices=["device", "network", "application"])
    audit.add_argument("--actor")
    audit.add_argument("--action")
    audit.add_argument("--json", action="store_true")
    audit.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, PolicyError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
