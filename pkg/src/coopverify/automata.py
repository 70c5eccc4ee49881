"""Artifact automata: observers that run alongside program paths.

An artifact automaton reads a concrete program path edge by edge.  Each
transition carries an edge pattern (which program edges it consumes) plus an
assumption predicate evaluated on the data state *after* the edge; states
carry invariants that must hold whenever a run sits in them (including the
initial state on the empty prefix).  A state may additionally have one
``otherwise`` transition that fires exactly when no explicit transition at
that state both matches the edge and has a satisfied assumption.

The same automaton shape serves six purposes (property, test goal, violation
witness, correctness witness, condition, test case), distinguished by a
declared kind with structural constraints checked in :mod:`coopverify.kinds`.

Matching is existential over nondeterministic runs.  A run may stop after
any number of consumed edges:

* the automaton *accepts* a path if some run ends in a final state after
  consuming any prefix (hence acceptance is stable under path extension);
* it *covers* the path if some run consumes every edge.

:func:`match_path` decides both with an on-the-fly determinization (a
frontier of reachable automaton states per prefix); :func:`all_runs` is the
naive run enumeration kept as the reference implementation the optimized
matcher is tested against.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

from .errors import DuplicateOtherwise, ParseError, UnknownKind
from .lang import CFAEdge, ConcretePath, InputOp
from .predicates import (
    TRUE,
    BoolConst,
    Predicate,
    evaluate,
    normalize_text,
    parse_predicate,
    pred_text,
)


class AutomatonKind(Enum):
    PROPERTY = "property"
    TEST_GOAL = "test-goal"
    VIOLATION_WITNESS = "violation-witness"
    CORRECTNESS_WITNESS = "correctness-witness"
    CONDITION = "condition"
    TEST_CASE = "test-case"


INPUT_TEMPLATE_TEXT = "chi = input()"


@dataclass(frozen=True)
class EdgePattern:
    """Which program edges a transition consumes.

    ``None`` components are wildcards.  Operation text is compared
    whitespace-insensitively against the edge's canonical text; the special
    text ``chi = input()`` matches any input edge and binds the template
    placeholder to the variable being read.
    """

    source: Optional[int]
    op_text: Optional[str]
    target: Optional[int]

    @property
    def is_input_template(self) -> bool:
        return self.op_text is not None and normalize_text(self.op_text) == "chi=input()"

    def matches(self, edge: CFAEdge) -> bool:
        if self.source is not None and self.source != edge.match_src:
            return False
        if self.target is not None and self.target != edge.match_tgt:
            return False
        if self.op_text is None:
            return True
        if self.is_input_template:
            return isinstance(edge.op, InputOp)
        return normalize_text(self.op_text) == normalize_text(edge.op.text)

    def __str__(self) -> str:
        src = "*" if self.source is None else str(self.source)
        tgt = "*" if self.target is None else str(self.target)
        op = "*" if self.op_text is None else f'"{self.op_text}"'
        return f"({src}, {op}, {tgt})"


ANY_EDGE = EdgePattern(None, None, None)


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    pattern: Optional[EdgePattern]  # None exactly for otherwise transitions
    assumption: Predicate = TRUE
    otherwise: bool = False

    def __str__(self) -> str:
        if self.otherwise:
            return f"{self.source} -> {self.target} otherwise"
        text = f"{self.source} -> {self.target} on {self.pattern}"
        if self.assumption != TRUE:
            text += f" assume {pred_text(self.assumption)}"
        return text


@dataclass(frozen=True)
class ArtifactAutomaton:
    name: str
    kind: AutomatonKind
    states: tuple
    initial: str
    finals: frozenset
    invariants: dict  # only non-trivial entries
    transitions: tuple
    _by_source: dict = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self) -> None:
        declared = set(self.states)
        if self.initial not in declared:
            raise ValueError(f"initial state {self.initial!r} is not declared")
        if not self.finals <= declared:
            raise ValueError("final states must be declared states")
        for state in self.invariants:
            if state not in declared:
                raise ValueError(f"invariant on undeclared state {state!r}")
        by_source: dict = {}
        otherwise_seen = set()
        for t in self.transitions:
            if t.source not in declared or t.target not in declared:
                raise ValueError(f"transition {t} uses an undeclared state")
            if t.otherwise:
                if t.source in otherwise_seen:
                    raise DuplicateOtherwise(f"state {t.source!r} has two otherwise transitions")
                otherwise_seen.add(t.source)
            by_source.setdefault(t.source, []).append(t)
        object.__setattr__(self, "_by_source", by_source)

    def invariant(self, state: str) -> Predicate:
        return self.invariants.get(state, TRUE)

    def transitions_from(self, state: str) -> list:
        return self._by_source.get(state, [])

    def explicit_from(self, state: str) -> list:
        return [t for t in self.transitions_from(state) if not t.otherwise]

    def otherwise_at(self, state: str) -> Optional[Transition]:
        for t in self.transitions_from(state):
            if t.otherwise:
                return t
        return None


def make_automaton(
    name: str,
    kind: AutomatonKind,
    states: Sequence[str],
    initial: str,
    finals: Iterable[str],
    transitions: Sequence[Transition],
    invariants: Optional[dict] = None,
) -> ArtifactAutomaton:
    trimmed = {
        state: pred
        for state, pred in (invariants or {}).items()
        if not (isinstance(pred, BoolConst) and pred.value)
    }
    return ArtifactAutomaton(
        name, kind, tuple(states), initial, frozenset(finals), trimmed, tuple(transitions)
    )


# ---------------------------------------------------------------------------
# Transition enabledness

def _chi_binding(transition: Transition, edge: CFAEdge) -> Optional[str]:
    if transition.pattern is not None and transition.pattern.is_input_template:
        return edge.op.target  # the variable receiving the input value
    return None


def _explicit_fires(transition: Transition, edge: CFAEdge, state_after) -> bool:
    if not transition.pattern.matches(edge):
        return False
    return evaluate(transition.assumption, state_after, chi=_chi_binding(transition, edge))


def otherwise_expansion(aut: ArtifactAutomaton, state: str, program_edge: CFAEdge,
                        state_after) -> bool:
    """Enabledness of the otherwise transition at ``state``.

    True iff no explicit transition leaving ``state`` both matches the edge
    and has its assumption satisfied on the post-state.  For test-case
    automata, input edges are never consumed by otherwise: they must be
    matched explicitly or the run dies.
    """
    if aut.kind is AutomatonKind.TEST_CASE and isinstance(program_edge.op, InputOp):
        return False
    for t in aut.explicit_from(state):
        if _explicit_fires(t, program_edge, state_after):
            return False
    return True


def _enabled_from(aut: ArtifactAutomaton, state: str, edge: CFAEdge, state_after) -> list:
    """Transitions a run in ``state`` may take on (edge, post-state)."""
    enabled = [t for t in aut.explicit_from(state) if _explicit_fires(t, edge, state_after)]
    ow = aut.otherwise_at(state)
    if ow is not None and otherwise_expansion(aut, state, edge, state_after):
        enabled.append(ow)
    return enabled


@dataclass(frozen=True)
class FinalEntry:
    """Record of a run reaching a final state; identifies one coverage goal."""

    transition: Optional[Transition]  # None when the initial state is final
    state: str


def initial_frontier(aut: ArtifactAutomaton, initial_state) -> tuple:
    """Frontier for the empty prefix: the initial automaton state, provided
    its invariant holds on the (empty) initial data state."""
    if not evaluate(aut.invariant(aut.initial), initial_state):
        return frozenset(), frozenset()
    entries = frozenset(
        {FinalEntry(None, aut.initial)} if aut.initial in aut.finals else ()
    )
    return frozenset((aut.initial,)), entries


def step_frontier(aut: ArtifactAutomaton, frontier: frozenset, edge: CFAEdge,
                  state_after) -> tuple:
    """Advance a set of simultaneously-reachable states over one path step.

    Returns the successor frontier and the final states entered on this step
    (paired with the transition used, for goal identification).
    """
    succ = set()
    entries = set()
    for q in sorted(frontier):
        for t in _enabled_from(aut, q, edge, state_after):
            if not evaluate(aut.invariant(t.target), state_after, chi=_chi_binding(t, edge)):
                continue
            succ.add(t.target)
            if t.target in aut.finals:
                entries.add(FinalEntry(t, t.target))
    return frozenset(succ), frozenset(entries)


# ---------------------------------------------------------------------------
# Matching

@dataclass(frozen=True)
class MatchVerdict:
    """Outcome of running an automaton over one concrete path.

    ``k`` is the longest prefix length some run consumes (None when even the
    empty prefix fails the initial invariant).  ``accepted`` means some run
    ends in a final state after any prefix; ``covered`` means some run
    consumes the whole path.  ``run`` is a witnessing run as
    ``((None, q0), (t1, q1), ...)``: an accepting one when accepted,
    otherwise a longest one.
    """

    k: Optional[int]
    accepted: bool
    covered: bool
    run: Optional[tuple]

    @property
    def matched(self) -> bool:
        return self.k is not None


def match_path(aut: ArtifactAutomaton, path: ConcretePath) -> MatchVerdict:
    """Decide acceptance and coverage by frontier determinization."""
    first_state = path.steps[0].state
    frontier, _ = initial_frontier(aut, first_state)
    if not frontier:
        return MatchVerdict(None, False, False, None)

    # parents[i][q] = (previous state, transition) for run reconstruction
    parents: list = [{aut.initial: None}]
    accept_at: Optional[tuple] = None  # (step index, state)
    if aut.initial in aut.finals:
        accept_at = (0, aut.initial)
    k = 0
    for i, step in enumerate(path.steps[1:], start=1):
        level: dict = {}
        for q in sorted(frontier):
            for t in _enabled_from(aut, q, step.incoming, step.state):
                if not evaluate(aut.invariant(t.target), step.state,
                                chi=_chi_binding(t, step.incoming)):
                    continue
                if t.target not in level:
                    level[t.target] = (q, t)
        if not level:
            frontier = frozenset()
            break
        parents.append(level)
        frontier = frozenset(level)
        k = i
        if accept_at is None:
            hit = sorted(frontier & aut.finals)
            if hit:
                accept_at = (i, hit[0])

    n = path.length
    covered = k == n and bool(frontier)
    accepted = accept_at is not None

    def reconstruct(step_index: int, state: str) -> tuple:
        run = []
        q: Optional[str] = state
        for i in range(step_index, 0, -1):
            prev, t = parents[i][q]
            run.append((t, q))
            q = prev
        run.append((None, aut.initial))
        return tuple(reversed(run))

    if accepted:
        run = reconstruct(*accept_at)
    else:
        run = reconstruct(k, sorted(parents[k])[0])
    return MatchVerdict(k, accepted, covered, run)


def all_runs(aut: ArtifactAutomaton, path: ConcretePath) -> list:
    """Every run of the automaton on the path, by brute-force enumeration.

    Reference implementation used to validate :func:`match_path`; exponential
    in the automaton's nondeterminism, fine for desk-sized inputs.  Runs are
    tuples ``((None, q0), (t1, q1), ...)``; every prefix-consuming run is
    itself included (runs may stop at any point).
    """
    if not evaluate(aut.invariant(aut.initial), path.steps[0].state):
        return []
    runs: list = []

    def extend(i: int, state: str, sofar: list) -> None:
        runs.append(tuple(sofar))
        if i >= len(path.steps) - 1:
            return
        step = path.steps[i + 1]
        for t in _enabled_from(aut, state, step.incoming, step.state):
            if not evaluate(aut.invariant(t.target), step.state,
                            chi=_chi_binding(t, step.incoming)):
                continue
            sofar.append((t, t.target))
            extend(i + 1, t.target, sofar)
            sofar.pop()

    extend(0, aut.initial, [(None, aut.initial)])
    return runs


def naive_match_path(aut: ArtifactAutomaton, path: ConcretePath) -> MatchVerdict:
    """Same verdict as :func:`match_path`, derived from run enumeration."""
    runs = all_runs(aut, path)
    if not runs:
        return MatchVerdict(None, False, False, None)
    n = path.length
    k = max(len(run) - 1 for run in runs)
    accepting = [run for run in runs if run[-1][1] in aut.finals]
    covering = [run for run in runs if len(run) - 1 == n]
    if accepting:
        run = min(accepting, key=lambda r: (len(r), r[-1][1]))
    else:
        run = min((r for r in runs if len(r) - 1 == k), key=lambda r: r[-1][1])
    return MatchVerdict(k, bool(accepting), bool(covering), run)


def accepts(aut: ArtifactAutomaton, path: ConcretePath) -> bool:
    return match_path(aut, path).accepted


def covers(aut: ArtifactAutomaton, path: ConcretePath) -> bool:
    return match_path(aut, path).covered


# ---------------------------------------------------------------------------
# Text format

_TRANS_RE = re.compile(
    r"^trans\s+(\S+)\s*->\s*(\S+)\s+on\s+\(\s*(\*|-?\d+)\s*,\s*(\*|\"[^\"]*\")\s*,"
    r"\s*(\*|-?\d+)\s*\)\s*(?:assume\s+(.+))?$"
)
_OTHERWISE_RE = re.compile(r"^trans\s+(\S+)\s*->\s*(\S+)\s+otherwise\s*$")
_HEADER_RE = re.compile(r"^automaton\s+(\S+)\s+kind=(\S+)\s*$")


def parse_automaton(source: str) -> ArtifactAutomaton:
    """Parse the line-oriented automaton format.

    ::

        automaton <name> kind=<kind>
        state <id> [init] [final] [inv: <pred>]
        trans <from> -> <to> on (<src>|*, "<op-text>"|*, <tgt>|*) [assume <pred>]
        trans <q> -> <q> otherwise
    """
    name = None
    kind = None
    states: list = []
    finals: list = []
    invariants: dict = {}
    transitions: list = []
    initial = None
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if name is None:
            m = _HEADER_RE.match(line)
            if not m:
                raise ParseError("expected 'automaton <name> kind=<kind>' header", lineno)
            name = m.group(1)
            try:
                kind = AutomatonKind(m.group(2))
            except ValueError:
                known = ", ".join(k.value for k in AutomatonKind)
                raise UnknownKind(
                    f"unknown automaton kind {m.group(2)!r} (known: {known})", lineno
                ) from None
            continue
        if line.startswith("state "):
            rest = line[len("state "):]
            inv_text = None
            if " inv:" in rest:
                rest, _, inv_text = rest.partition(" inv:")
            words = rest.split()
            if not words:
                raise ParseError("state line needs a state id", lineno)
            state_id = words[0]
            if state_id in states:
                raise ParseError(f"state {state_id!r} declared twice", lineno)
            states.append(state_id)
            for flag in words[1:]:
                if flag == "init":
                    if initial is not None:
                        raise ParseError("two states marked init", lineno)
                    initial = state_id
                elif flag == "final":
                    finals.append(state_id)
                else:
                    raise ParseError(f"unknown state flag {flag!r}", lineno)
            if inv_text is not None:
                try:
                    invariants[state_id] = parse_predicate(inv_text.strip())
                except ParseError as err:
                    raise ParseError(f"bad invariant: {err}", lineno) from None
            continue
        m = _OTHERWISE_RE.match(line)
        if m:
            if m.group(1) != m.group(2):
                raise ParseError("otherwise transitions must be self-loops", lineno)
            transitions.append(Transition(m.group(1), m.group(2), None, TRUE, otherwise=True))
            continue
        m = _TRANS_RE.match(line)
        if m:
            src_text, op_field, tgt_text = m.group(3), m.group(4), m.group(5)
            pattern = EdgePattern(
                None if src_text == "*" else int(src_text),
                None if op_field == "*" else op_field[1:-1],
                None if tgt_text == "*" else int(tgt_text),
            )
            assumption = TRUE
            if m.group(6) is not None:
                try:
                    assumption = parse_predicate(m.group(6).strip())
                except ParseError as err:
                    raise ParseError(f"bad assumption: {err}", lineno) from None
            transitions.append(Transition(m.group(1), m.group(2), pattern, assumption))
            continue
        raise ParseError(f"unrecognized line {line!r}", lineno)
    if name is None:
        raise ParseError("empty automaton source")
    if initial is None:
        raise ParseError("no state marked init")
    try:
        return make_automaton(name, kind, states, initial, finals, transitions, invariants)
    except (ValueError, DuplicateOtherwise) as err:
        if isinstance(err, DuplicateOtherwise):
            raise
        raise ParseError(str(err)) from None


def serialize_automaton(aut: ArtifactAutomaton) -> str:
    lines = [f"automaton {aut.name} kind={aut.kind.value}"]
    for state in aut.states:
        parts = [f"state {state}"]
        if state == aut.initial:
            parts.append("init")
        if state in aut.finals:
            parts.append("final")
        line = " ".join(parts)
        if state in aut.invariants:
            line += f" inv: {pred_text(aut.invariants[state])}"
        lines.append(line)
    for t in aut.transitions:
        if t.otherwise:
            lines.append(f"trans {t.source} -> {t.target} otherwise")
        else:
            line = f"trans {t.source} -> {t.target} on {t.pattern}"
            if t.assumption != TRUE:
                line += f" assume {pred_text(t.assumption)}"
            lines.append(line)
    return "\n".join(lines) + "\n"
