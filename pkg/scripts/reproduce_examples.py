#!/usr/bin/env python3
"""Re-run the corpus experiments and print one table per experiment.

    python3 scripts/reproduce_examples.py            # everything
    python3 scripts/reproduce_examples.py --only runs --json out.json
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from termilab import certcheck, engine, transform
from termilab.corpus import get_entry, list_entries, rule_for
from termilab.parser import parse_query

S100 = "s(" * 100 + "0" + ")" * 100

# (entry, query, rule, cert supplying modes/level map, stop at first budget leaf)
SEPARATIONS = [
    ("even", f"even(X), lte(X,{S100})", "ld", None, True),
    ("even", f"even(X), lte(X,{S100})", "input-consuming", None, False),
    ("permute", "permute(X,[1])", "input-consuming", "simply-acceptable-oi", True),
    ("permute", "permute(X,[1])", "local-delay-safe", "delay-recurrent", False),
    ("prodcons", "system(s(s(s(0))))", "ld", None, True),
    ("prodcons", "system(s(s(s(0))))", "fair-fifo", None, False),
    ("oddeven", "even(X), odd(X)", "ld", None, True),
    ("oddeven", "even(X), odd(X)", "fair-fifo", None, True),
    ("zpqr", "z", "local-delay-safe", "delay-recurrent", False),
]

BIJECTIONS = [
    ("append", "append([1],[2],Zs)", "recurrent"),
    ("oddeven", "even(X), odd(X)", "bounded"),
    ("all", "all(0,s(s(0)),As)", "bounded"),
]


def certificates(depth: int | None) -> list[dict]:
    rows = []
    for e in list_entries():
        p = e.program()
        for name in e.certificate_files:
            t0 = time.perf_counter()
            rep = certcheck.check_certificate(p, e.certificate(name), depth=depth)
            rows.append({"entry": e.name, "certificate": name, "verified": rep.verified, "k": rep.k,
                         "obligations": rep.obligations, "seconds": round(time.perf_counter() - t0, 2),
                         "detail": rep.text()})
    return rows


def runs(depth_budget: int) -> list[dict]:
    rows = []
    for name, query, rule, cert, stop in SEPARATIONS:
        e = get_entry(name)
        p = e.program()
        r = rule_for(e, p, {"rule": rule, "cert": cert})
        rep = engine.run(p, parse_query(query), r, depth_budget=depth_budget, stop_on_budget=stop)
        shown = query if len(query) < 40 else query[:37] + "..."
        rows.append({"entry": name, "query": shown, "rule": rule, "verdict": rep.verdict,
                     "answers": len(rep.answers), "nodes": rep.nodes})
    return rows


def bijections() -> list[dict]:
    rows = []
    for name, query, cert in BIJECTIONS:
        e = get_entry(name)
        p, q = e.program(), parse_query(query)
        k = certcheck.check_certificate(p, e.certificate(cert), q).k
        rep = transform.verify_bijection(p, q, k)
        rows.append({"entry": name, "query": query, "k": k, "ok": rep.ok, "source": rep.source,
                     "answers": sorted(rep.transformed)})
    return rows


def show(title: str, rows: list[dict], cols: list[str]) -> None:
    print(f"\n## {title}\n")
    widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) for c in cols}
    print("  ".join(c.ljust(widths[c]) for c in cols))
    for r in rows:
        print("  ".join(str(r[c]).ljust(widths[c]) for c in cols))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--only", choices=("certificates", "runs", "bijections"))
    ap.add_argument("--depth", type=int, help="override every certificate's enumeration depth")
    ap.add_argument("--budget", type=int, default=engine.DEFAULT_DEPTH, help="SLD depth budget")
    ap.add_argument("--json", help="also write all rows to this file")
    args = ap.parse_args(argv)

    out = {}
    if args.only in (None, "certificates"):
        out["certificates"] = certificates(args.depth)
        show("Certificates", out["certificates"], ["entry", "certificate", "verified", "k", "obligations", "seconds"])
    if args.only in (None, "runs"):
        out["runs"] = runs(args.budget)
        show("Selection rules", out["runs"], ["entry", "query", "rule", "verdict", "answers", "nodes"])
    if args.only in (None, "bijections"):
        out["bijections"] = bijections()
        show("Ter bijections", out["bijections"], ["entry", "query", "k", "ok", "source", "answers"])
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(out, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
