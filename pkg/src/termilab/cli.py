"""Command-line front end.

Exit codes: 0 success or verified, 1 analysis-negative (violation,
counterexample, failed manifest check), 2 usage or parse error.

Program and certificate arguments accept either a path or a corpus name:
``even`` resolves to the entry's ``program.pl`` and, for certificates,
``simply-acceptable`` resolves to ``<entry>/simply-acceptable.cert``.
"""
from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from termilab import certcheck, corpus, engine, modes, transform
from termilab.certificate import Certificate, parse_certificate
from termilab.core import Program
from termilab.measure import MissingLevel, MissingMode, UnknownGuard, UnknownNorm
from termilab.parser import ParseError, format_program, format_query, parse_mode_spec, parse_program, parse_query

OK, NEGATIVE, USAGE = 0, 1, 2

_MODE_LINE = re.compile(r"^\s*(?:%%\s*)?mode\s+(.*?)\s*\.?\s*$")


class UsageError(Exception):
    pass


# -- input resolution ------------------------------------------------------------

def resolve_program(arg: str) -> Path:
    p = Path(arg)
    if p.is_file():
        return p
    if p.is_dir() and (p / "program.pl").is_file():
        return p / "program.pl"
    cand = corpus.corpus_dir() / arg / "program.pl"
    if cand.is_file():
        return cand
    raise UsageError(f"no such program: {arg}")


def resolve_certificate(arg: str, program_path: Path) -> Path:
    p = Path(arg)
    if p.is_file():
        return p
    for cand in (program_path.parent / arg, program_path.parent / f"{arg}.cert"):
        if cand.is_file():
            return cand
    raise UsageError(f"no such certificate: {arg}")


def read_program(arg: str) -> tuple[Program, Path]:
    path = resolve_program(arg)
    return parse_program(path.read_text(encoding="utf-8")), path


def read_certificate(arg: str, program_path: Path) -> Certificate:
    return parse_certificate(resolve_certificate(arg, program_path).read_text(encoding="utf-8"))


def parse_mode_table(text: str) -> dict:
    """Mode table file: one ``mode p(i,o)`` per line, optionally prefixed by ``%%``."""
    table = {}
    for n, line in enumerate(text.split("\n"), 1):
        if not line.strip() or (line.lstrip().startswith("%") and not line.lstrip().startswith("%%")):
            continue
        m = _MODE_LINE.match(line)
        if not m:
            raise UsageError(f"line {n}: expected a mode declaration")
        key, spec = parse_mode_spec(m.group(1), n)
        table[key] = spec
    return table


def mode_table(args, program: Program, cert: Certificate | None = None) -> dict | None:
    if getattr(args, "mode_table", None):
        return parse_mode_table(Path(args.mode_table).read_text(encoding="utf-8"))
    if cert is not None and cert.modes:
        return cert.modes
    return program.modes


# -- output ---------------------------------------------------------------------

def emit_records(records: list[tuple[str, object]]) -> None:
    for k, v in records:
        print(f"{k} {'-' if v is None else v}")


def check_records(rep: certcheck.CheckReport) -> list[tuple[str, object]]:
    out: list[tuple[str, object]] = [("class", rep.cls), ("verdict", "VERIFIED" if rep.verified else "COUNTEREXAMPLE"),
                                     ("depth", rep.depth), ("obligations", rep.obligations), ("k", rep.k)]
    if not rep.verified:
        out += [("clause", "query" if rep.clause_index is None else rep.clause_index + 1),
                ("instance", certcheck._show(rep.instance)), ("obligation", rep.obligation)]
    out += [("note", n) for n in rep.notes]
    return out


def run_records(rep: engine.RunReport) -> list[tuple[str, object]]:
    out: list[tuple[str, object]] = [("rule", rep.rule), ("verdict", rep.verdict), ("answers", len(rep.answers))]
    out += [(o, rep.counts.get(o, 0)) for o in engine.OUTCOMES]
    out += [("max_depth", rep.max_depth), ("nodes", rep.nodes)]
    out += [("answer", a) for a in engine.answer_strings(rep.answers)]
    return out


# -- commands ---------------------------------------------------------------------

def cmd_check_modes(args) -> int:
    program, _ = read_program(args.program)
    table = mode_table(args, program)
    if not table:
        raise UsageError("no mode table: add %% mode directives or pass --mode-table")
    if args.which == "simply":
        v = modes.check_simply_moded(program, table)
    elif args.which == "well":
        v = modes.check_well_moded(program, table)
    else:
        v = modes.check_permutation(program, table, args.which.split("-", 1)[1])
    if v:
        print(f"ok {args.which}")
        for ci, perm in sorted(v.permutations.items()):
            if perm != tuple(range(len(perm))):
                print(f"clause {ci + 1} order {','.join(str(i + 1) for i in perm)}")
        return OK
    where = "-" if v.clause_index is None else v.clause_index + 1
    atom = "-" if v.atom is None else format_query((v.atom,))
    print(f"violation {args.which} clause={where} atom={atom} position={v.position or '-'} reason={v.reason}")
    return NEGATIVE


def cmd_prove(args) -> int:
    program, path = read_program(args.program)
    cert = read_certificate(args.certificate, path)
    query = parse_query(args.query) if args.query else None
    rep = certcheck.check_certificate(program, cert, query, args.depth)
    if args.emit == "records":
        emit_records(check_records(rep))
    else:
        print(rep.text())
        for n in rep.notes:
            print(f"note {n}")
    status = OK if rep else NEGATIVE
    if args.hierarchy and rep:
        for cls, sub in certcheck.check_hierarchy(program, cert, query, args.depth).items():
            print(f"implied {cls} {sub.text()}")
            status = status if sub else NEGATIVE
    return status


def cmd_run(args) -> int:
    program, path = read_program(args.program)
    cert = read_certificate(args.cert, path) if args.cert else None
    table = mode_table(args, program, cert)
    try:
        rule = engine.make_rule(args.rule, table, cert.levelmap if cert else None,
                                cert.interpretation if cert else None)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rep = engine.run(program, parse_query(args.query), rule, depth_budget=args.depth, node_budget=args.nodes,
                     loop_check=args.loop_check, trace=args.trace, stop_on_budget=args.stop_on_budget)
    if args.emit == "records":
        emit_records(run_records(rep))
    else:
        for a in engine.answer_strings(rep.answers):
            print(f"answer {a}")
        print(rep.summary())
    if args.trace:
        for line in rep.trace:
            print(f"trace {line}")
    return OK


def cmd_transform(args) -> int:
    program, path = read_program(args.program)
    query = parse_query(args.query)
    if args.from_cert:
        cert = read_certificate(args.from_cert, path)
        rep = certcheck.check_certificate(program, cert, query)
        if not rep or rep.k is None:
            print(rep.text() if not rep else "certificate yields no query bound")
            return NEGATIVE
        n = max(rep.k - 1, 0)
        print(f"bound k={rep.k} depth argument {n}")
    else:
        n = args.k
    tp = transform.ter_program(program)
    # derived modes are only written back when the source declared some
    out_prog = tp.program if program.modes else Program(tp.program.clauses)
    prog_text = format_program(out_prog, anonymous=True)
    query_text = format_query(transform.ter_query(query, n)) + ".\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ter_program.pl").write_text(prog_text, encoding="utf-8")
        (out / "ter_query.pl").write_text(query_text, encoding="utf-8")
        print(f"wrote {out / 'ter_program.pl'} {out / 'ter_query.pl'}")
    else:
        sys.stdout.write(prog_text)
        sys.stdout.write("% query\n" + query_text)
    return OK


def cmd_classify(args) -> int:
    program, path = read_program(args.program)
    cert = read_certificate(args.level, path) if args.level else None
    table = mode_table(args, program)
    reports = engine.classify_empirically(program, parse_query(args.query), table,
                                          cert.levelmap if cert else None, cert.interpretation if cert else None,
                                          args.depth, args.nodes, args.stop_on_budget)
    if args.emit == "records":
        for rep in reports.values():
            emit_records(run_records(rep))
    else:
        print(f"{'rule':18s} {'verdict':10s} {'answers':>7s} {'success':>7s} {'failure':>7s} "
              f"{'deadlock':>8s} {'budget':>7s}")
        for name, rep in reports.items():
            c = rep.counts
            print(f"{name:18s} {rep.verdict:10s} {len(rep.answers):7d} {c.get('success', 0):7d} "
                  f"{c.get('failure', 0):7d} {c.get('deadlock', 0):8d} {c.get('budget', 0):7d}")
    for stem, cpath in sorted((p.stem, p) for p in path.parent.glob("*.cert")):
        try:
            crep = certcheck.check_certificate(program, parse_certificate(cpath.read_text(encoding="utf-8")))
            print(f"certificate {stem} {crep.text()}")
        except (ValueError, LookupError) as exc:
            print(f"certificate {stem} error {exc}")
    return OK


def cmd_corpus_list(args) -> int:
    for e in corpus.list_entries():
        certs = ",".join(e.certificate_files) or "-"
        print(f"{e.name:10s} certs={certs} {e.manifest.get('description', '')}")
    return OK


def cmd_corpus_verify(args) -> int:
    entries = corpus.list_entries()
    if args.names:
        known = {e.name for e in entries}
        missing = [n for n in args.names if n not in known]
        if missing:
            raise UsageError(f"unknown corpus entries: {', '.join(missing)}")
        entries = [e for e in entries if e.name in args.names]
    failed = 0
    for e in entries:
        for chk in corpus.verify_entry(e):
            print(chk.line())
            failed += not chk.ok
    print(f"corpus-verify failures={failed}")
    return NEGATIVE if failed else OK


# -- argument parsing --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="termilab", description="Termination laboratory for definite logic programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    def emit(p):
        p.add_argument("--emit", choices=("text", "records"), default="text", help="output format")

    def budgets(p):
        p.add_argument("--depth", type=int, default=engine.DEFAULT_DEPTH, help="depth budget per branch")
        p.add_argument("--nodes", type=int, default=engine.DEFAULT_NODES, help="node budget per tree")
        p.add_argument("--stop-on-budget", action="store_true", help="stop at the first branch over budget")

    p = sub.add_parser("check-modes", help="check simply/well moded (or up to body permutation)")
    p.add_argument("program")
    p.add_argument("--mode-table", help="file of mode declarations (default: %% mode directives)")
    p.add_argument("--which", choices=("simply", "well", "perm-simply", "perm-well"), default="simply")
    p.set_defaults(fn=cmd_check_modes)

    p = sub.add_parser("prove", help="check a termination certificate")
    p.add_argument("program")
    p.add_argument("certificate")
    p.add_argument("--query", help="query to bound (default: the certificate's query record)")
    p.add_argument("--depth", type=int, help="enumeration depth (default: the certificate's)")
    p.add_argument("--hierarchy", action="store_true", help="also check the implied weaker classes")
    emit(p)
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("run", help="build the SLD tree of a query under a selection rule")
    p.add_argument("program")
    p.add_argument("query")
    p.add_argument("--rule", default="ld", help=f"one of {', '.join(engine.RULE_NAMES)}")
    p.add_argument("--mode-table", help="modes for the input-consuming rule")
    p.add_argument("--cert", help="certificate supplying modes or the level map for delay-safe rules")
    p.add_argument("--loop-check", action="store_true")
    p.add_argument("--trace", action="store_true")
    budgets(p)
    emit(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("transform", help="write Ter(P) and Ter(Q,k)")
    p.add_argument("program")
    p.add_argument("query")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--k", type=int, help="depth argument of the transformed query")
    g.add_argument("--from-cert", help="certificate whose query bound k gives the depth argument k-1")
    p.add_argument("--out", help="output directory (default: print to stdout)")
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("classify", help="run the selection-rule portfolio and any corpus certificates")
    p.add_argument("program")
    p.add_argument("query")
    p.add_argument("--mode-table", help="modes enabling the input-consuming rule")
    p.add_argument("--level", help="certificate whose level map enables the delay-safe rule")
    budgets(p)
    emit(p)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("corpus-list", help="list corpus entries")
    p.set_defaults(fn=cmd_corpus_list)

    p = sub.add_parser("corpus-verify", help="replay corpus manifests")
    p.add_argument("names", nargs="*")
    p.set_defaults(fn=cmd_corpus_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "k", None) is not None and args.k < 0:
        print("error: --k must be a natural number", file=sys.stderr)
        return USAGE
    try:
        return args.fn(args)
    except modes.NotSimplyModed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NEGATIVE
    except (UsageError, ParseError, ValueError, OSError, MissingMode, MissingLevel,
            UnknownNorm, UnknownGuard) as exc:
        # malformed certificates, unknown tags and bad level maps all land here
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
