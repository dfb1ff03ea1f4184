"""Corpus entries: a program, its certificates, and a manifest of expected results.

Each entry is a directory holding ``program.pl``, any number of ``*.cert``
files and ``manifest.json``. The manifest lists certificate verdicts, engine
runs, Ter bijection checks and oracle comparisons; :func:`verify_entry`
replays every one of them against the tool. ``TERMILAB_CORPUS`` points the
loader at another directory.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from termilab import certcheck, engine, oracle, transform
from termilab.certificate import Certificate, parse_certificate
from termilab.core import Program
from termilab.parser import parse_program, parse_query

ENV_VAR = "TERMILAB_CORPUS"


def corpus_dir() -> Path:
    override = os.environ.get(ENV_VAR)
    if override:
        return Path(override)
    return Path(str(resources.files("termilab") / "corpus"))


@dataclass
class CorpusEntry:
    name: str
    path: Path
    manifest: dict = field(default_factory=dict)

    @property
    def program_file(self) -> Path:
        return self.path / self.manifest.get("program", "program.pl")

    @property
    def certificate_files(self) -> dict[str, Path]:
        return {p.stem: p for p in sorted(self.path.glob("*.cert"))}

    def program(self) -> Program:
        return parse_program(self.program_file.read_text(encoding="utf-8"))

    def certificate(self, name: str) -> Certificate:
        files = self.certificate_files
        if name not in files:
            raise KeyError(f"{self.name} has no certificate {name!r}")
        return parse_certificate(files[name].read_text(encoding="utf-8"))


def load_entry(path: Path) -> CorpusEntry:
    path = Path(path)
    mf = path / "manifest.json"
    manifest = json.loads(mf.read_text(encoding="utf-8")) if mf.exists() else {}
    return CorpusEntry(manifest.get("name", path.name), path, manifest)


def list_entries(root: Path | None = None) -> list[CorpusEntry]:
    root = Path(root) if root is not None else corpus_dir()
    if not root.is_dir():
        return []
    return [load_entry(p) for p in sorted(root.iterdir()) if (p / "program.pl").exists()]


def get_entry(name: str, root: Path | None = None) -> CorpusEntry:
    for e in list_entries(root):
        if e.name == name:
            return e
    raise KeyError(f"no corpus entry named {name!r}")


# -- manifest replay ----------------------------------------------------------------

def _clip(s: str, n: int = 240) -> str:
    return s if len(s) <= n else s[:n] + "..."


@dataclass
class ManifestCheck:
    entry: str
    item: str
    ok: bool
    expected: str
    actual: str

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        out = f"{status} {self.entry} {self.item}"
        if not self.ok:
            out += f" expected={_clip(self.expected)} actual={_clip(self.actual)}"
        return out


def rule_for(entry: CorpusEntry, program: Program, spec: dict):
    """Selection rule of a manifest run; modes and level map come from ``cert`` if named."""
    modes, lm, interp = program.modes, None, None
    if spec.get("cert"):
        cert = entry.certificate(spec["cert"])
        modes = cert.modes or modes
        lm, interp = cert.levelmap, cert.interpretation
    return engine.make_rule(spec["rule"], modes, lm, interp)


def _verify_certificate(entry: CorpusEntry, program: Program, name: str, want: dict) -> ManifestCheck:
    rep = certcheck.check_certificate(program, entry.certificate(name))
    got = {"verdict": "VERIFIED" if rep.verified else "COUNTEREXAMPLE"}
    if "k" in want:
        got["k"] = rep.k
    if "clause" in want:
        got["clause"] = None if rep.verified else ("query" if rep.clause_index is None else rep.clause_index + 1)
    if "obligation" in want:
        got["obligation"] = None if rep.verified else rep.obligation
    exp = {k: want[k] for k in got}
    return ManifestCheck(entry.name, f"cert {name}", got == exp, json.dumps(exp), json.dumps(got))


def _verify_run(entry: CorpusEntry, program: Program, spec: dict) -> ManifestCheck:
    rule = rule_for(entry, program, spec)
    rep = engine.run(program, parse_query(spec["query"]), rule,
                     depth_budget=spec.get("depth", engine.DEFAULT_DEPTH),
                     node_budget=spec.get("nodes", engine.DEFAULT_NODES),
                     stop_on_budget=spec.get("stop_on_budget", False))
    got = {"verdict": rep.verdict}
    if "answers" in spec:
        got["answers"] = engine.answer_strings(rep.answers)
    exp = {k: spec[k] for k in got}
    return ManifestCheck(entry.name, f"run {rule.name} {spec['query']}", got == exp,
                         json.dumps(exp), json.dumps(got))


def _verify_transform(entry: CorpusEntry, program: Program, spec: dict) -> ManifestCheck:
    rep = transform.verify_bijection(program, parse_query(spec["query"]), spec["k"])
    got = {"ok": rep.ok, "answers": sorted(rep.transformed)}
    exp = {"ok": spec.get("ok", True), "answers": sorted(spec["answers"])}
    return ManifestCheck(entry.name, f"ter k={spec['k']} {spec['query']}", got == exp,
                         json.dumps(exp), json.dumps(got))


def _verify_oracle(entry: CorpusEntry, program: Program, spec: dict, models: dict) -> ManifestCheck:
    q = parse_query(spec["query"])
    subs, finite = engine.enumerate_refutations(program, q, engine.LD())
    sld = oracle.sld_answer_multiset(q, subs)
    cap = spec.get("cap", 4)
    if cap not in models:
        models[cap] = oracle.least_model(program, cap)
    ref = oracle.answers(program, q, cap, models[cap])
    ok = finite and sld == ref
    return ManifestCheck(entry.name, f"oracle {spec['query']}", ok,
                         json.dumps(dict(sorted(ref.items()))), json.dumps(dict(sorted(sld.items()))))


def verify_entry(entry: CorpusEntry) -> list[ManifestCheck]:
    program = entry.program()
    m = entry.manifest
    out = [_verify_certificate(entry, program, n, w) for n, w in m.get("certificates", {}).items()]
    out += [_verify_run(entry, program, s) for s in m.get("runs", [])]
    out += [_verify_transform(entry, program, s) for s in m.get("transforms", [])]
    models: dict = {}
    out += [_verify_oracle(entry, program, s, models) for s in m.get("oracle", [])]
    return out
