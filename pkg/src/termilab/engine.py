"""SLD resolution with a portfolio of selection rules and bounded tree search.

Every atom in a query carries the step at which it was introduced (its
stamp); root atoms have stamp 0 and resolvent atoms get the child's depth.
Rules that may decline to select (input-consuming, local delay-safe) yield
deadlock leaves, which count as terminated derivations.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from termilab import core
from termilab.core import Clause, FreshNames, NoUnifier, Program, Struct, Substitution, Var
from termilab.measure import DEFAULT_REGISTRY, LevelMap, symbolic_level, UNBOUNDED
from termilab.modes import ModeTable
from termilab.parser import format_atom, format_substitution

DEFAULT_DEPTH = 200
DEFAULT_NODES = 100_000

SUCCESS, FAILURE, DEADLOCK, BUDGET, LOOP = "success", "failure", "deadlock", "budget", "loop"
OUTCOMES = (SUCCESS, FAILURE, DEADLOCK, BUDGET, LOOP)


# -- selection rules ------------------------------------------------------------

@dataclass(frozen=True)
class LD:
    name = "ld"


@dataclass(frozen=True)
class RD:
    name = "rd"


@dataclass(frozen=True)
class FairFIFO:
    name = "fair-fifo"


@dataclass(frozen=True)
class Local:
    name = "local"


@dataclass(frozen=True)
class InputConsuming:
    modes: ModeTable
    name = "input-consuming"


@dataclass(frozen=True)
class LocalDelaySafe:
    levelmap: LevelMap
    interpretation: object = None
    name = "local-delay-safe"


@dataclass(frozen=True)
class Goal:
    atom: Struct
    stamp: int


@dataclass
class Candidate:
    index: int          # 0-based program clause index
    clause: Clause      # renamed apart
    mgu: Substitution | None  # precomputed (input-consuming rule), else None


@dataclass
class Selection:
    index: int
    candidates: list


class NoSelection:
    def __repr__(self):
        return "NoSelection"


NO_SELECTION = NoSelection()


@dataclass
class Node:
    goals: tuple
    binds: tuple        # current terms of the initial query variables
    depth: int
    fresh: FreshNames
    parent: "Node | None" = None
    selected: Struct | None = None  # atom selected from the parent
    clause_index: int | None = None
    mgu: Substitution | None = None
    outcome: str | None = None

    @property
    def atoms(self) -> tuple:
        return tuple(g.atom for g in self.goals)


def _avoid(node: Node) -> set:
    acc: dict = {}
    for g in node.goals:
        core.term_vars(g.atom, acc)
    for t in node.binds:
        core.term_vars(t, acc)
    return set(acc)


def _input_consuming_mgu(a: Struct, head: Struct, modes: ModeTable) -> Substitution | None:
    """An mgu of ``a`` and ``head`` leaving the inputs of ``a`` untouched, if one exists."""
    try:
        sigma = core.mgu(a, head)
    except NoUnifier:
        return None
    svars = set(core.vars_of(modes.inputs(a)))
    hit = [x for x in svars if x in sigma]
    if not hit:
        return sigma
    # an input variable bound to a variable: flip the orientation when it is a renaming
    targets = [sigma[x] for x in hit]
    if not all(isinstance(t, Var) and t not in svars for t in targets) or len(set(targets)) != len(targets):
        return None
    rho = Substitution({t: x for x, t in zip(hit, targets)})
    flipped = sigma.compose(rho)
    if flipped.domain & svars:
        return None
    return flipped


def select(rule, node: Node, program: Program):
    """Selection (atom index and offered clauses), NO_SELECTION, or None for an empty query."""
    goals = node.goals
    if not goals:
        return None
    if isinstance(rule, (LD, RD, FairFIFO, Local)):
        if isinstance(rule, LD):
            k = 0
        elif isinstance(rule, RD):
            k = len(goals) - 1
        elif isinstance(rule, FairFIFO):
            k = min(range(len(goals)), key=lambda j: (goals[j].stamp, j))
        else:
            top = max(g.stamp for g in goals)
            k = next(j for j, g in enumerate(goals) if g.stamp == top)
        return _standard(program, node, k)
    if isinstance(rule, LocalDelaySafe):
        top = max(g.stamp for g in goals)
        for j, g in enumerate(goals):
            if g.stamp == top and symbolic_level(rule.levelmap, g.atom, rule.interpretation) is not UNBOUNDED:
                return _standard(program, node, j)
        return NO_SELECTION
    if isinstance(rule, InputConsuming):
        avoid = _avoid(node)
        probes = []
        for j, g in enumerate(goals):
            fresh_state = node.fresh.copy()
            renamed = []
            for i, c in program.defining(g.atom.key):
                renamed.append((i, core.rename_apart(c, avoid, fresh_state)))
            probes.append((j, renamed, fresh_state))
            cands = []
            for i, c in renamed:
                s = _input_consuming_mgu(g.atom, c.head, rule.modes)
                if s is not None:
                    cands.append(Candidate(i, c, s))
            if cands:
                node.fresh = fresh_state
                return Selection(j, cands)
        for j, renamed, fresh_state in probes:
            atom = goals[j].atom
            if not any(core.unifiable(atom, c.head) for _, c in renamed):
                node.fresh = fresh_state
                return Selection(j, [Candidate(i, c, None) for i, c in renamed])
        return NO_SELECTION
    raise TypeError(f"unknown selection rule {rule!r}")


def _standard(program: Program, node: Node, k: int) -> Selection:
    avoid = _avoid(node)
    fresh = node.fresh.copy()
    cands = [Candidate(i, core.rename_apart(c, avoid, fresh), None)
             for i, c in program.defining(node.goals[k].atom.key)]
    node.fresh = fresh
    return Selection(k, cands)


def derive_step(node: Node, selection: Selection, cand: Candidate) -> Node | None:
    """Resolve the selected atom with one offered clause; None on unification failure."""
    goal = node.goals[selection.index]
    sigma = cand.mgu
    if sigma is None:
        try:
            sigma = core.mgu(goal.atom, cand.clause.head)
        except NoUnifier:
            return None
    depth = node.depth + 1
    new_goals = []
    for j, g in enumerate(node.goals):
        if j == selection.index:
            new_goals.extend(Goal(core.apply(sigma, b), depth) for b in cand.clause.body)
        else:
            new_goals.append(Goal(core.apply(sigma, g.atom), g.stamp))
    return Node(tuple(new_goals), core.apply(sigma, node.binds), depth, node.fresh.copy(), node,
                goal.atom, cand.index, sigma)


# -- trees and reports ----------------------------------------------------------

@dataclass
class RunReport:
    rule: str
    counts: Counter = field(default_factory=Counter)
    max_depth: int = 0
    nodes: int = 0
    answers: list = field(default_factory=list)
    verdict: str = "Finite"
    trace: list = field(default_factory=list)
    checks: Counter = field(default_factory=Counter)

    @property
    def finite(self) -> bool:
        return self.verdict == "Finite"

    def summary(self) -> str:
        parts = [f"rule={self.rule}", f"verdict={self.verdict}", f"answers={len(self.answers)}"]
        parts += [f"{o}={self.counts.get(o, 0)}" for o in OUTCOMES]
        parts += [f"max_depth={self.max_depth}", f"nodes={self.nodes}"]
        return " ".join(parts)


@dataclass
class SLDTree:
    root: Node
    leaves: list


def _is_loop(node: Node, atom: Struct) -> bool:
    n = node
    while n.parent is not None:
        if n.selected is not None and n.selected.key == atom.key and core.variant_of(n.selected, atom):
            return True
        n = n.parent
    return False


def trace_line(node: Node, stamp: int, atom: Struct, clause_index: int, sigma: Substitution) -> str:
    return f"{node.depth} | {stamp} | {format_atom(atom)} | {clause_index + 1} | {format_substitution(sigma)}"


def build_tree(program: Program, query: Sequence[Struct], rule, depth_budget: int = DEFAULT_DEPTH,
               node_budget: int = DEFAULT_NODES, loop_check: bool = False, trace: bool = False,
               audit: bool = True, stop_on_budget: bool = False) -> tuple[SLDTree, RunReport]:
    """Depth-first construction of the (bounded) SLD tree via ``rule``."""
    if depth_budget < 1 or node_budget < 1:
        raise ValueError("budgets must be at least 1")
    qvars = list(core.vars_of(query))
    root = Node(tuple(Goal(a, 0) for a in query), tuple(qvars), 0, FreshNames())
    report = RunReport(getattr(rule, "name", str(rule)))
    leaves: list[Node] = []
    stack = [root]
    created = 1
    seen_answers: list = []
    while stack:
        node = stack.pop()
        report.max_depth = max(report.max_depth, node.depth)
        if not node.goals:
            node.outcome = SUCCESS
            ans = Substitution({v: t for v, t in zip(qvars, node.binds)})
            report.answers.append(ans)
            seen_answers.append(ans)
        elif node.depth >= depth_budget or created >= node_budget:
            node.outcome = BUDGET
        else:
            sel = select(rule, node, program)
            if sel is NO_SELECTION:
                node.outcome = DEADLOCK
            else:
                goal = node.goals[sel.index]
                if audit:
                    _audit(rule, node, sel, report)
                if loop_check and _is_loop(node, goal.atom):
                    node.outcome = LOOP
                else:
                    children = []
                    for cand in sel.candidates:
                        child = derive_step(node, sel, cand)
                        if child is None:
                            continue
                        if audit and isinstance(rule, InputConsuming):
                            _audit_ic_step(rule.modes, goal.atom, child.mgu, report)
                        if trace:
                            report.trace.append(trace_line(node, goal.stamp, goal.atom, cand.index, child.mgu))
                        children.append(child)
                    if not children:
                        node.outcome = FAILURE
                    created += len(children)
                    stack.extend(reversed(children))
        if node.outcome is not None:
            leaves.append(node)
            report.counts[node.outcome] += 1
            if node.outcome == BUDGET and stop_on_budget:
                break
    report.nodes = created
    if report.counts[BUDGET] or stack:
        report.verdict = "BudgetHit"
    return SLDTree(root, leaves), report


def _audit(rule, node: Node, sel: Selection, report: RunReport) -> None:
    if isinstance(rule, LocalDelaySafe):
        top = max(g.stamp for g in node.goals)
        g = node.goals[sel.index]
        assert g.stamp == top, "delay-safe rule selected a non-local atom"
        assert symbolic_level(rule.levelmap, g.atom, rule.interpretation) is not UNBOUNDED, \
            "delay-safe rule selected an unbounded atom"
        report.checks["lds_selection"] += 1


def _audit_ic_step(modes: ModeTable, atom: Struct, sigma: Substitution, report: RunReport) -> None:
    svars = set(core.vars_of(modes.inputs(atom)))
    assert not (sigma.domain & svars), f"input-consuming step binds an input of {format_atom(atom)}"
    report.checks["ic_steps"] += 1


def run(program: Program, query, rule, **kw) -> RunReport:
    return build_tree(program, query, rule, **kw)[1]


def enumerate_refutations(program: Program, query, rule, depth_budget: int = DEFAULT_DEPTH,
                          node_budget: int = DEFAULT_NODES) -> tuple[list, bool]:
    """Computed answers in traversal order and whether the enumeration is complete."""
    rep = run(program, query, rule, depth_budget=depth_budget, node_budget=node_budget)
    return rep.answers, rep.finite


def classify_empirically(program: Program, query, modes=None, levelmap: LevelMap | None = None,
                         interpretation=None, depth_budget: int = DEFAULT_DEPTH,
                         node_budget: int = DEFAULT_NODES, stop_on_budget: bool = False) -> dict[str, RunReport]:
    rules = [LD(), RD(), FairFIFO()]
    if modes:
        rules.append(InputConsuming(ModeTable.of(modes)))
    if levelmap is not None:
        rules.append(LocalDelaySafe(levelmap, interpretation))
    return {r.name: run(program, query, r, depth_budget=depth_budget, node_budget=node_budget,
                        stop_on_budget=stop_on_budget) for r in rules}


RULE_NAMES = ("ld", "rd", "fair-fifo", "local", "input-consuming", "local-delay-safe")


def make_rule(name: str, modes=None, levelmap: LevelMap | None = None, interpretation=None):
    name = name.lower().replace("_", "-")
    if name == "ld":
        return LD()
    if name == "rd":
        return RD()
    if name in ("fair-fifo", "fair", "fifo"):
        return FairFIFO()
    if name == "local":
        return Local()
    if name in ("input-consuming", "ic"):
        if not modes:
            raise ValueError("input-consuming rule needs modes")
        return InputConsuming(ModeTable.of(modes))
    if name in ("local-delay-safe", "lds", "delay-safe"):
        if levelmap is None:
            raise ValueError("local delay-safe rule needs a level map")
        return LocalDelaySafe(levelmap, interpretation)
    raise ValueError(f"unknown selection rule {name!r}")


def answer_strings(answers: Sequence[Substitution]) -> list[str]:
    return [format_substitution(a) for a in answers]


def iter_nodes(tree: SLDTree) -> Iterator[Node]:
    yield from tree.leaves
