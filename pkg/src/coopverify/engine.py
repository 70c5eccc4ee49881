"""Bounded explicit-state evaluation of the five cooperation judgments.

A single synchronous-product explorer drives everything: program
configurations (data state, location) are extended with one state-frontier
per observing automaton, plus the set of final states each automaton has
entered so far (acceptance latches once entered, since acceptance is stable
under path extension).  Each judgment is a thin visitor over this product:

* ``check_fulfills`` - no program path may be accepted by the property;
* ``check_correctness_witness`` - the witness must cover every path and the
  property must accept none;
* ``check_violation_witness`` - some path must be accepted by witness and
  property together, with the witness frontier used to steer exploration;
* ``check_condition_correct`` - no path may be accepted by condition and
  property together;
* ``check_test_covers`` - some complete path must be covered by the
  test-case automaton while reaching a test goal.

Verdicts are relative to the analysis configuration (finite input domain,
step bound); ``holds`` is only reported when no truncation could have hidden
a counterexample.  :func:`brute_force_oracle` re-decides path sets by naive
full enumeration and is the independent check the product engine is tested
against.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

from .automata import (
    ArtifactAutomaton,
    AutomatonKind,
    initial_frontier,
    naive_match_path,
    step_frontier,
)
from .errors import InvalidArtifact, OracleBudgetExceeded
from .kinds import build_test_case_automaton, validate_kind
from .lang import (
    EMPTY_STATE,
    ConcretePath,
    ControlFlowAutomaton,
    PathStep,
    enumerate_paths,
    successors,
)
from .predicates import Interval

DEFAULT_DOMAIN = Interval(-8, 8)
DEFAULT_MAX_STEPS = 500


@dataclass(frozen=True)
class AnalysisConfig:
    """Finite bounds that make path exploration terminate."""

    input_domain: Interval = DEFAULT_DOMAIN
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")

    def to_json_dict(self) -> dict:
        return {
            "input_domain": [self.input_domain.lo, self.input_domain.hi],
            "max_steps": self.max_steps,
        }

    def __str__(self) -> str:
        return f"inputs {self.input_domain}, at most {self.max_steps} steps"


DEFAULT_CONFIG = AnalysisConfig()


class Verdict(Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Judgment:
    """Outcome of one judgment, always relative to its config.

    ``exhausted`` records that the verdict is definitive for the configured
    bounds: either exploration finished without truncation, or positive
    evidence was found whose validity no unexplored path can retract.
    ``unknown`` is only ever caused by truncation and carries no evidence.
    """

    verdict: Verdict
    evidence: Optional[ConcretePath]
    exhausted: bool
    config: AnalysisConfig

    def to_json_dict(self) -> dict:
        evidence = None
        if self.evidence is not None:
            evidence = [
                {
                    "location": step.location,
                    "op": None if step.incoming is None else step.incoming.op.text,
                    "state": dict(sorted(step.state.items())),
                }
                for step in self.evidence.steps
            ]
        return {
            "verdict": self.verdict.value,
            "exhausted": self.exhausted,
            "config": self.config.to_json_dict(),
            "evidence": evidence,
        }

    def text(self) -> str:
        lines = [
            f"verdict: {self.verdict.value}",
            f"exhausted: {'yes' if self.exhausted else 'no'}",
            f"config: {self.config}",
        ]
        if self.evidence is not None:
            lines.append("evidence:")
            lines.extend(f"  {line}" for line in str(self.evidence).splitlines())
        return "\n".join(lines)


class VisitAction(Enum):
    CONTINUE = "continue"
    PRUNE = "prune"
    STOP = "stop"


@dataclass(frozen=True)
class ProductVisit:
    """One explored product configuration, handed to judgment visitors.

    ``frontiers[i]`` is the i-th automaton's reachable-state set on this
    prefix; ``final_entries[i]`` the final states it has entered anywhere
    along the prefix (nonempty means the automaton accepts).  ``is_maximal``
    marks program paths that cannot be extended; ``truncated`` marks prefixes
    abandoned at the step bound although extendable.
    """

    path: ConcretePath
    frontiers: tuple
    final_entries: tuple
    is_maximal: bool
    truncated: bool

    def accepted(self, index: int) -> bool:
        return bool(self.final_entries[index])


Visitor = Callable[[ProductVisit], VisitAction]


def run_product(program: ControlFlowAutomaton, automata: Sequence[ArtifactAutomaton],
                config: AnalysisConfig, visit: Visitor) -> bool:
    """Depth-first bounded exploration of program x automata.

    Visits every reachable product configuration once per path prefix, in
    deterministic order (per program location: edge order, input values
    ascending).  The visitor steers: PRUNE abandons the prefix's extensions,
    STOP abandons the whole exploration.  Returns whether any visited prefix
    was truncated by the step bound.
    """
    pairs = [initial_frontier(a, EMPTY_STATE) for a in automata]
    root = (
        ConcretePath.initial(program),
        tuple(fr for fr, _ in pairs),
        tuple(en for _, en in pairs),
    )
    saw_truncation = False
    stack = [root]
    while stack:
        path, frontiers, entries = stack.pop()
        last = path.steps[-1]
        succ = successors(program, last.state, last.location, config.input_domain)
        truncated = bool(succ) and path.length >= config.max_steps
        if truncated:
            saw_truncation = True
        action = visit(ProductVisit(path, frontiers, entries, not succ, truncated))
        if action is VisitAction.STOP:
            return saw_truncation
        if action is VisitAction.PRUNE or truncated:
            continue
        for edge, post in reversed(succ):
            stepped = [step_frontier(a, fr, edge, post)
                       for a, fr in zip(automata, frontiers)]
            stack.append((
                path.extended(PathStep(post, edge.target, edge)),
                tuple(fr for fr, _ in stepped),
                tuple(en | new if new else en
                      for (_, new), en in zip(stepped, entries)),
            ))
    return saw_truncation


def require_valid_kind(aut: ArtifactAutomaton, kind: AutomatonKind,
                   program: ControlFlowAutomaton, config: AnalysisConfig) -> None:
    if aut.kind is not kind:
        raise InvalidArtifact(
            f"expected a {kind.value} automaton, got {aut.kind.value} ({aut.name})")
    domain = config.input_domain if kind is AutomatonKind.PROPERTY else None
    report = validate_kind(aut, program, domain)
    if not report.ok:
        raise InvalidArtifact(f"automaton {aut.name} violates its kind constraints:\n{report}",
                              report)


def check_fulfills(program: ControlFlowAutomaton, prop: ArtifactAutomaton,
                   config: AnalysisConfig = DEFAULT_CONFIG) -> Judgment:
    """No program path may be accepted by the property automaton."""
    require_valid_kind(prop, AutomatonKind.PROPERTY, program, config)
    if not prop.finals:
        return Judgment(Verdict.HOLDS, None, True, config)
    found: list = []

    def visit(v: ProductVisit) -> VisitAction:
        if v.accepted(0):
            found.append(v.path)
            return VisitAction.STOP
        return VisitAction.CONTINUE

    truncated = run_product(program, (prop,), config, visit)
    if found:
        return Judgment(Verdict.VIOLATED, found[0], not truncated, config)
    if truncated:
        return Judgment(Verdict.UNKNOWN, None, False, config)
    return Judgment(Verdict.HOLDS, None, True, config)


def check_correctness_witness(program: ControlFlowAutomaton, prop: ArtifactAutomaton,
                              witness: ArtifactAutomaton,
                              config: AnalysisConfig = DEFAULT_CONFIG) -> Judgment:
    """The witness must cover every program path, none of which may violate
    the property.  Evidence on violation is the uncovered or violating
    prefix."""
    require_valid_kind(prop, AutomatonKind.PROPERTY, program, config)
    require_valid_kind(witness, AutomatonKind.CORRECTNESS_WITNESS, program, config)
    found: list = []

    def visit(v: ProductVisit) -> VisitAction:
        if not v.frontiers[1] or v.accepted(0):
            found.append(v.path)
            return VisitAction.STOP
        return VisitAction.CONTINUE

    truncated = run_product(program, (prop, witness), config, visit)
    if found:
        return Judgment(Verdict.VIOLATED, found[0], not truncated, config)
    if truncated:
        return Judgment(Verdict.UNKNOWN, None, False, config)
    return Judgment(Verdict.HOLDS, None, True, config)


def check_violation_witness(program: ControlFlowAutomaton, prop: ArtifactAutomaton,
                            witness: ArtifactAutomaton,
                            config: AnalysisConfig = DEFAULT_CONFIG) -> Judgment:
    """Some program path must be accepted by witness and property together.

    The witness steers exploration: prefixes it can no longer follow (empty
    frontier, not yet accepted) are pruned.  A found path is definitive, so
    it is reported as exhausted even if other prefixes were truncated;
    ``violated`` (no such path) requires full exploration and carries no
    evidence path, there being no single path that demonstrates absence.
    """
    require_valid_kind(prop, AutomatonKind.PROPERTY, program, config)
    require_valid_kind(witness, AutomatonKind.VIOLATION_WITNESS, program, config)
    if not prop.finals or not witness.finals:
        return Judgment(Verdict.VIOLATED, None, True, config)
    found: list = []

    def visit(v: ProductVisit) -> VisitAction:
        if v.accepted(0) and v.accepted(1):
            found.append(v.path)
            return VisitAction.STOP
        if not v.frontiers[1] and not v.accepted(1):
            return VisitAction.PRUNE
        return VisitAction.CONTINUE

    truncated = run_product(program, (prop, witness), config, visit)
    if found:
        return Judgment(Verdict.HOLDS, found[0], True, config)
    if truncated:
        return Judgment(Verdict.UNKNOWN, None, False, config)
    return Judgment(Verdict.VIOLATED, None, True, config)


def check_condition_correct(program: ControlFlowAutomaton, prop: ArtifactAutomaton,
                            condition: ArtifactAutomaton,
                            config: AnalysisConfig = DEFAULT_CONFIG) -> Judgment:
    """No program path may be accepted by condition and property together,
    i.e. the part the condition declares covered is actually violation-free."""
    require_valid_kind(prop, AutomatonKind.PROPERTY, program, config)
    require_valid_kind(condition, AutomatonKind.CONDITION, program, config)
    if not prop.finals or not condition.finals:
        return Judgment(Verdict.HOLDS, None, True, config)
    found: list = []

    def visit(v: ProductVisit) -> VisitAction:
        if v.accepted(0) and v.accepted(1):
            found.append(v.path)
            return VisitAction.STOP
        return VisitAction.CONTINUE

    truncated = run_product(program, (prop, condition), config, visit)
    if found:
        return Judgment(Verdict.VIOLATED, found[0], not truncated, config)
    if truncated:
        return Judgment(Verdict.UNKNOWN, None, False, config)
    return Judgment(Verdict.HOLDS, None, True, config)


def check_test_covers(program: ControlFlowAutomaton, test: Sequence[int],
                      goals: ArtifactAutomaton,
                      config: AnalysisConfig = DEFAULT_CONFIG) -> tuple:
    """Whether executing the test inputs reaches a test goal.

    Some complete program path must be covered by the test-case automaton
    built from ``test`` while the goal automaton accepts it.  Returns the
    judgment together with every goal reached on covered paths (a goal being
    a final state plus the transition entering it).
    """
    require_valid_kind(goals, AutomatonKind.TEST_GOAL, program, config)
    test_case = build_test_case_automaton(test)
    if not goals.finals:
        return Judgment(Verdict.VIOLATED, None, True, config), frozenset()
    found: list = []
    covered: set = set()

    def visit(v: ProductVisit) -> VisitAction:
        if not v.frontiers[1]:
            return VisitAction.PRUNE
        if v.is_maximal and v.final_entries[0]:
            if not found:
                found.append(v.path)
            covered.update(v.final_entries[0])
        return VisitAction.CONTINUE

    truncated = run_product(program, (goals, test_case), config, visit)
    if found:
        return Judgment(Verdict.HOLDS, found[0], True, config), frozenset(covered)
    if truncated:
        return Judgment(Verdict.UNKNOWN, None, False, config), frozenset()
    return Judgment(Verdict.VIOLATED, None, True, config), frozenset()


ORACLE_BUDGET = 1_000_000


def brute_force_oracle(program: ControlFlowAutomaton,
                       automata: Sequence[ArtifactAutomaton],
                       modes: Sequence[str],
                       config: AnalysisConfig = DEFAULT_CONFIG) -> frozenset:
    """All complete program paths satisfying the per-automaton requirement.

    Enumerates every path outright, then decides each automaton's
    requirement (``accept`` or ``cover``) with the naive run-enumerating
    matcher.  Deliberately shares no machinery with :func:`run_product`;
    used by the test suite to validate the judgments above.
    """
    if len(automata) != len(modes):
        raise ValueError("one mode per automaton required")
    for mode in modes:
        if mode not in ("accept", "cover"):
            raise ValueError(f"unknown mode {mode!r}")
    result = enumerate_paths(program, config.input_domain, config.max_steps)
    if result.truncated:
        raise OracleBudgetExceeded("path enumeration was truncated by the step bound")
    total_steps = sum(path.length for path in result.paths)
    if total_steps > ORACLE_BUDGET:
        raise OracleBudgetExceeded(
            f"{total_steps} path-steps exceed the oracle budget of {ORACLE_BUDGET}")
    selected = []
    for path in result.paths:
        keep = True
        for aut, mode in zip(automata, modes):
            verdict = naive_match_path(aut, path)
            if not (verdict.accepted if mode == "accept" else verdict.covered):
                keep = False
                break
        if keep:
            selected.append(path)
    return frozenset(selected)
