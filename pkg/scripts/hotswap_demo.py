"""Swap policies while worker threads keep asking for decisions.

Prints how many decisions each store version served and whether every
decision matches a re-evaluation against the snapshot it reports.

    python3 scripts/hotswap_demo.py [--updates 100] [--decisions 4000] [--workers 4]
"""

import argparse
import random
import threading
import time
from collections import Counter

from paarc import data_path
from paarc.enforcement import (
    PolicyEnforcementPoint,
    PolicyStore,
    ServiceRequest,
    pap_update,
    pdp_decide,
)
from paarc.registry import ServiceRecord, ServiceRegistry
from paarc.sim import load_policies

LOCKDOWN = 'policy "lockdown" { rule deny otherwise obligate "notify-operator" }'


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--updates", type=int, default=100)
    ap.add_argument("--decisions", type=int, default=4000)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    store = PolicyStore(load_policies(data_path("campus.pol")))
    history = {store.version: store.snapshot}
    store.subscribe(lambda snap: history.__setitem__(snap.version, snap))
    pep = PolicyEnforcementPoint(ServiceRegistry([ServiceRecord("fleet", "cu")]), store)
    results = []
    per_worker = args.decisions // args.workers

    def writer():
        for i in range(args.updates):
            if store.snapshot.get("lockdown") is None:
                pap_update(store, "put", LOCKDOWN)
            else:
                pap_update(store, "remove", "lockdown")
            time.sleep(0.001)

    def worker(w):
        rng = random.Random(args.seed * 1000 + w)
        for i in range(per_worker):
            req = ServiceRequest(f"w{w}-{i}", "av-01", "fleet", "telemetry.submit", b"",
                                 {"subject.cert.status": "valid",
                                  "subject.enrolled": rng.random() < 0.9})
            results.append((req, pep.enforce(req, lambda m: b"ok")))

    threads = [threading.Thread(target=writer)]
    threads += [threading.Thread(target=worker, args=(w,)) for w in range(args.workers)]
    start = time.perf_counter()
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    elapsed = time.perf_counter() - start

    served = Counter(r.snapshot_version for _, r in results)
    effects = Counter(r.decision.effect.value for _, r in results)
    mismatched = sum(pdp_decide(q, history[r.snapshot_version]) != r.decision for q, r in results)
    print(f"{len(results)} decisions, {args.updates} updates in {elapsed:.2f}s")
    print(f"versions served: {len(served)} (final {store.version})")
    print("effects:", dict(sorted(effects.items())))
    print(f"decisions not reproducible from their snapshot: {mismatched}")


if __name__ == "__main__":
    main()
