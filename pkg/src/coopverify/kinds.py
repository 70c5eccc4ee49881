"""Structural validation of the six artifact-automaton kinds.

Each kind narrows the general automaton shape: properties must never block
the program, witnesses restrict invariants or assumptions, conditions must
not leave their final (covered) states, and test cases are fixed chains
produced from input sequences.  :func:`validate_kind` checks the constraints
of the declared kind and reports findings instead of raising; callers that
need hard failures wrap the report (see :mod:`coopverify.engine`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .automata import (
    INPUT_TEMPLATE_TEXT,
    ArtifactAutomaton,
    AutomatonKind,
    EdgePattern,
    Transition,
    make_automaton,
)
from .lang import CFAEdge, ControlFlowAutomaton
from .predicates import (
    CHI,
    TRUE,
    Comparison,
    Const,
    Interval,
    Not,
    Var,
    disjoin,
    is_tautology_bounded,
    mentions_template,
    pred_text,
    substitute_template,
    variables_of,
)

PROVED = "proved"
BOUNDED_PROVED = "bounded-proved"
REFUTED = "refuted"
NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class NonBlocking:
    """Outcome of the may-the-automaton-block-the-program analysis.

    For every non-final state and every program edge, the disjunction of the
    assumptions of the transitions able to consume that edge must hold on
    every data state.  A syntactic complementary pair proves a cell outright;
    everything else is checked by bounded enumeration, so the best overall
    answer is then ``bounded-proved``.
    """

    status: str
    state: Optional[str] = None
    edge: Optional[CFAEdge] = None
    counter_state: Optional[dict] = None

    def __str__(self) -> str:
        if self.status != REFUTED:
            return self.status
        bind = ", ".join(f"{k}={v}" for k, v in sorted(self.counter_state.items()))
        return (f"refuted: state {self.state} blocks edge "
                f"({self.edge.match_src}, {self.edge.op.text}, {self.edge.match_tgt}) "
                f"on {{{bind}}}")


@dataclass(frozen=True)
class KindViolation:
    constraint: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"[{self.constraint}] {self.subject}: {self.message}"


@dataclass(frozen=True)
class KindReport:
    kind: AutomatonKind
    violations: tuple
    non_blocking: NonBlocking

    @property
    def ok(self) -> bool:
        return not self.violations and self.non_blocking.status != REFUTED

    def __str__(self) -> str:
        lines = [f"kind {self.kind.value}: {'ok' if self.ok else 'not ok'}"]
        lines.extend(f"  {v}" for v in self.violations)
        if self.non_blocking.status != NOT_APPLICABLE:
            lines.append(f"  non-blocking: {self.non_blocking}")
        return "\n".join(lines)


_CHI_WORD = re.compile(r"\bchi\b")


def _template_violations(aut: ArtifactAutomaton) -> list:
    """The placeholder may only appear in assumptions guarded by an
    input-template pattern; invariants and other op texts must not use it."""
    out = []
    for state, inv in sorted(aut.invariants.items()):
        if mentions_template(inv):
            out.append(KindViolation(
                "template-use", state,
                "state invariant uses the input placeholder"))
    for t in aut.transitions:
        if t.otherwise:
            continue
        if mentions_template(t.assumption) and not t.pattern.is_input_template:
            out.append(KindViolation(
                "template-use", str(t),
                "assumption uses the input placeholder without an input-template pattern"))
        if (t.pattern.op_text is not None and _CHI_WORD.search(t.pattern.op_text)
                and not t.pattern.is_input_template):
            out.append(KindViolation(
                "template-use", str(t),
                "pattern text uses the reserved word chi but is not the input template"))
    return out


def _trivial_invariant_violations(aut: ArtifactAutomaton) -> list:
    return [
        KindViolation("trivial-invariants", state,
                      f"state invariant must be trivial, found {pred_text(inv)}")
        for state, inv in sorted(aut.invariants.items())
    ]


def _non_blocking(aut: ArtifactAutomaton, program: ControlFlowAutomaton,
                  domain: Interval) -> NonBlocking:
    all_syntactic = True
    for q in aut.states:
        if q in aut.finals:
            continue
        has_otherwise = aut.otherwise_at(q) is not None
        for edge in program.edges:
            guards = [t.assumption for t in aut.explicit_from(q)
                      if t.pattern.matches(edge)]
            disjuncts = list(guards)
            if has_otherwise:
                disjuncts.append(Not(disjoin(guards)) if guards else TRUE)
            total = substitute_template(disjoin(disjuncts), Var("chi"))
            result = is_tautology_bounded(total, variables_of(total), domain)
            if result.status == "falsifiable":
                return NonBlocking(REFUTED, q, edge, result.counterexample)
            if not result.syntactic:
                all_syntactic = False
    return NonBlocking(PROVED if all_syntactic else BOUNDED_PROVED)


def _condition_violations(aut: ArtifactAutomaton) -> list:
    out = _trivial_invariant_violations(aut)
    for t in aut.transitions:
        if t.source in aut.finals:
            out.append(KindViolation(
                "no-exit-from-final", str(t),
                "conditions must not leave a final state"))
    return out


def _correctness_witness_violations(aut: ArtifactAutomaton) -> list:
    out = []
    for t in aut.transitions:
        if not t.otherwise and t.assumption != TRUE:
            out.append(KindViolation(
                "assumptions-true", str(t),
                f"correctness witnesses carry facts in invariants, not assumptions; "
                f"found assumption {pred_text(t.assumption)}"))
    for q in sorted(aut.finals):
        out.append(KindViolation(
            "no-finals", q, "correctness witnesses must have no final states"))
    return out


_WILDCARD_TEMPLATE = EdgePattern(None, INPUT_TEMPLATE_TEXT, None)


def _chain_assumption_value(assumption) -> Optional[int]:
    """The ``z`` of a ``chi == z`` chain assumption, or None if ill-shaped."""
    if (isinstance(assumption, Comparison) and assumption.op == "=="
            and assumption.left is CHI and isinstance(assumption.right, Const)):
        return assumption.right.value
    return None


def _test_case_violations(aut: ArtifactAutomaton) -> list:
    out = []
    for q in sorted(aut.finals):
        out.append(KindViolation("test-shape", q,
                                 "test cases must have no final states"))
    for q in aut.states:
        ow = aut.otherwise_at(q)
        if ow is None:
            out.append(KindViolation("test-shape", q,
                                     "every state needs an otherwise self-loop"))
        elif ow.target != q:
            out.append(KindViolation("test-shape", str(ow),
                                     "otherwise transition must be a self-loop"))
    seen = {aut.initial}
    q = aut.initial
    while True:
        explicit = aut.explicit_from(q)
        if not explicit:
            break
        if len(explicit) > 1:
            out.append(KindViolation("test-shape", q,
                                     "chain states take at most one explicit transition"))
            break
        t = explicit[0]
        if t.pattern.is_input_template:
            if t.pattern.source is not None or t.pattern.target is not None:
                out.append(KindViolation(
                    "test-shape", str(t),
                    "chain patterns must leave edge endpoints unconstrained"))
        else:
            out.append(KindViolation("test-shape", str(t),
                                     "chain transitions must use the input-template pattern"))
        if _chain_assumption_value(t.assumption) is None:
            out.append(KindViolation(
                "test-shape", str(t),
                "chain assumptions must pin the input placeholder to one value"))
        if t.target in seen:
            out.append(KindViolation("test-shape", str(t),
                                     "the chain revisits a state"))
            break
        seen.add(t.target)
        q = t.target
    for unreachable in [s for s in aut.states if s not in seen]:
        out.append(KindViolation("test-shape", unreachable,
                                 "state is not on the chain"))
    return out


def validate_kind(aut: ArtifactAutomaton, program: ControlFlowAutomaton,
                  domain: Optional[Interval] = None) -> KindReport:
    """Check the structural constraints of ``aut``'s declared kind.

    ``program`` resolves edge patterns for the non-blocking analysis of
    property automata, which also needs a bounded value ``domain``.  All
    findings land in the report; nothing raises.
    """
    violations = _template_violations(aut)
    non_blocking = NonBlocking(NOT_APPLICABLE)
    kind = aut.kind
    if kind is AutomatonKind.PROPERTY:
        violations += _trivial_invariant_violations(aut)
        if domain is None:
            raise ValueError("validating a property automaton requires a value domain")
        non_blocking = _non_blocking(aut, program, domain)
    elif kind in (AutomatonKind.TEST_GOAL, AutomatonKind.VIOLATION_WITNESS):
        violations += _trivial_invariant_violations(aut)
    elif kind is AutomatonKind.CORRECTNESS_WITNESS:
        violations += _correctness_witness_violations(aut)
    elif kind is AutomatonKind.CONDITION:
        violations += _condition_violations(aut)
    elif kind is AutomatonKind.TEST_CASE:
        violations += _test_case_violations(aut)
    return KindReport(kind, tuple(violations), non_blocking)


def build_test_case_automaton(values: Sequence[int], name: str = "test_case") -> ArtifactAutomaton:
    """The chain automaton replaying one input sequence.

    One state per consumed input; each chain transition reads the next input
    edge (whatever variable it feeds) and pins the read value; everything
    else loops in place via otherwise.  Runs die on an input edge with the
    wrong value or past the end of the sequence, so a path is covered exactly
    when its inputs equal ``values``.
    """
    states = [f"q{i}" for i in range(len(values) + 1)]
    transitions = [
        Transition(states[i], states[i + 1], _WILDCARD_TEMPLATE,
                   Comparison("==", CHI, Const(value)))
        for i, value in enumerate(values)
    ]
    transitions += [Transition(q, q, None, TRUE, otherwise=True) for q in states]
    return make_automaton(name, AutomatonKind.TEST_CASE, states, states[0],
                          (), transitions)


def describes_single_path(aut: ArtifactAutomaton) -> bool:
    """Whether the automaton is a straight chain with fully concrete patterns
    and a single final end state (the usual shape of a counterexample)."""
    if any(t.otherwise for t in aut.transitions):
        return False
    seen = {aut.initial}
    q = aut.initial
    while True:
        explicit = aut.explicit_from(q)
        if not explicit:
            break
        if len(explicit) > 1 or explicit[0].target in seen:
            return False
        pattern = explicit[0].pattern
        if pattern.source is None or pattern.target is None or pattern.op_text is None:
            return False
        seen.add(explicit[0].target)
        q = explicit[0].target
    return seen == set(aut.states) and aut.finals == frozenset({q})
