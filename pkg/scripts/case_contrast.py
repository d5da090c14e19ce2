"""Run the bundled attack scenario unprotected (mode A) and protected (mode B).

    python3 scripts/case_contrast.py [--scenario PATH] [--json]
"""

import argparse
import json

from paarc import data_path
from paarc.sim import Simulation, load_scenario

ROWS = ("accepted", "rejected", "legitimate_accepted", "legitimate_rejected",
        "illegitimate_accepted", "illegitimate_rejected", "bookings_served")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default=str(data_path("attack_scenario.json")))
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    tallies = {}
    rejections = {}
    for mode in ("A", "B"):
        report = Simulation(load_scenario(args.scenario, mode=mode)).run()
        tallies[mode] = report["tallies"]
        rejections[mode] = [
            (e["actor"], e["kind"], e["reason"]) for e in report["events"]
            if e.get("outcome") == "rejected"
        ]

    if args.json:
        print(json.dumps({"tallies": tallies, "rejections": rejections}, indent=2, sort_keys=True))
        return

    print(f"{'':<24}{'mode A':>8}{'mode B':>8}")
    for row in ROWS:
        print(f"{row:<24}{tallies['A'][row]:>8}{tallies['B'][row]:>8}")
    print()
    for actor, kind, reason in rejections["B"]:
        print(f"mode B rejected {kind} from {actor}: {reason}")


if __name__ == "__main__":
    main()
