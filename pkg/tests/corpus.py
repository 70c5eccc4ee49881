"""Shared corpus for the test suite.

The canonical worked example lives in ``samples/``: the looping program
``p.imp``, its broken twin ``p_prime.imp`` (second loop increment removed),
and the five automata written against them.  Tests load those files through
the helpers here, so the shipped samples are exercised by the whole suite.
A few extra automata that only tests need are defined inline.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from coopverify import (
    AnalysisConfig,
    ArtifactAutomaton,
    ControlFlowAutomaton,
    Interval,
    enumerate_paths,
    parse_automaton,
    parse_program,
)
from coopverify.actors import project_residual_path, reduce_with_origin
from coopverify.automata import naive_match_path

SAMPLES = Path(__file__).resolve().parents[1] / "samples"

CFG4 = AnalysisConfig(Interval(-4, 4), 200)
CFG2 = AnalysisConfig(Interval(-2, 2), 200)
CFG8 = AnalysisConfig(Interval(-8, 8), 500)


def sample_path(name: str) -> Path:
    return SAMPLES / name


def sample_text(name: str) -> str:
    return sample_path(name).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def program_p() -> ControlFlowAutomaton:
    return parse_program(sample_text("p.imp"))


@lru_cache(maxsize=None)
def program_p_prime() -> ControlFlowAutomaton:
    return parse_program(sample_text("p_prime.imp"))


@lru_cache(maxsize=None)
def automaton(name: str) -> ArtifactAutomaton:
    return parse_automaton(sample_text(name))


def prop() -> ArtifactAutomaton:
    return automaton("prop.aut")


def goals() -> ArtifactAutomaton:
    return automaton("goals.aut")


def cond() -> ArtifactAutomaton:
    return automaton("cond.aut")


def witness_correct() -> ArtifactAutomaton:
    return automaton("witness_correct.aut")


def witness_violation() -> ArtifactAutomaton:
    return automaton("witness_violation.aut")


# ---------------------------------------------------------------------------
# Inline automata used by several test modules

UNIVERSAL_WITNESS = """\
automaton anything_goes kind=correctness-witness
state s init
trans s -> s otherwise
"""

# Accepts every path after its first edge.
UNIVERSAL_CONDITION = """\
automaton all_covered kind=condition
state q0 init
state q1 final
trans q0 -> q1 on (*, *, *)
"""

# Accepts even the empty path: the initial state is final.
INSTANT_CONDITION = """\
automaton instantly_covered kind=condition
state q0 init final
"""

# Final state can never be reached: the pattern matches no edge of p.
UNREACHABLE_CONDITION = """\
automaton never_covered kind=condition
state q0 init
state q1 final
trans q0 -> q1 on (99, "z = 0", 100)
trans q0 -> q0 otherwise
"""

# Like the sample violation witness but demanding a nonpositive input,
# which no violating run of p_prime satisfies.
HOPELESS_WITNESS = """\
automaton wrong_direction kind=violation-witness
state w0 init
state w1
state w2
state w3
state w4
state w5
state w6 final
trans w0 -> w1 on (0, "int x = input()", 1) assume x <= 0
trans w1 -> w2 on (1, "int a = 0", 2)
trans w2 -> w3 on (2, "int b = 0", 3)
trans w3 -> w4 on (3, "a < x", 4)
trans w4 -> w5 on (4, "a++", 3)
trans w5 -> w6 on (3, "!(a < x)", 6)
"""

# Two mutually exclusive goals: entering the loop needs a positive input,
# leaving it untouched needs a nonpositive one.
TWO_GOALS = """\
automaton entry_or_skip kind=test-goal
state q0 init
state qa final
state qb final
trans q0 -> qa on (3, "a < x", 4)
trans q0 -> qb on (3, "!(a < x)", 6) assume a == 0
trans q0 -> q0 otherwise
"""

# The pattern names locations p does not have, so nothing is ever accepted.
UNREACHABLE_GOALS = """\
automaton never_reached kind=test-goal
state q0 init
state qf final
trans q0 -> qf on (9, "a < x", 10)
trans q0 -> q0 otherwise
"""

# A property with an empty language.
GOALLESS_PROPERTY = """\
automaton nothing_bad kind=property
state q0 init
trans q0 -> q0 otherwise
"""


# ---------------------------------------------------------------------------
# Reducer comparison helpers: the residual program's behavior, mapped back to
# original operations, must be exactly the program behavior the condition
# does not accept.  Both sides are compared as prefix-closed sets so partial
# residual paths (stuck mid-split) and partial program paths line up.

def state_items(state):
    return tuple(sorted(state.items()))


def prefix_closure(sequences):
    """All nonempty prefixes of the given (edge, state) sequences."""
    out = set()
    for seq in sequences:
        hashable = tuple((edge, state_items(state)) for edge, state in seq)
        for i in range(1, len(hashable) + 1):
            out.add(hashable[:i])
    return out


def residual_prefixes(program, cond, config):
    reduction = reduce_with_origin(program, cond)
    result = enumerate_paths(reduction.residual, config.input_domain, config.max_steps)
    assert not result.truncated
    return prefix_closure(
        project_residual_path(reduction, path) for path in result.paths
    )


def uncovered_prefixes(program, cond, config):
    result = enumerate_paths(program, config.input_domain, config.max_steps)
    assert not result.truncated
    keep = []
    for path in result.paths:
        if naive_match_path(cond, path).accepted:
            continue
        keep.append([(step.incoming, step.state) for step in path.steps[1:]])
    return prefix_closure(keep)
