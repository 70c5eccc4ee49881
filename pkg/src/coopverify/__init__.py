"""Cooperative verification toolkit over a miniature imperative language.

Programs are control-flow automata; specifications, witnesses, conditions,
and test cases are all artifact automata observing program paths.  The
package provides the matching semantics, the judgments tying the artifact
kinds to program semantics, and composable verification actors with a CLI.
"""

from .errors import (
    CoopVerifyError,
    DuplicateOtherwise,
    InvalidArtifact,
    NoViolatingPath,
    OracleBudgetExceeded,
    ParseError,
    PipelineStepError,
    TypeMismatch,
    UnboundTemplate,
    UndefinedVariable,
    UnknownKind,
    UseBeforeDef,
)
from .predicates import Interval, parse_expression, parse_predicate, pred_text
from .lang import (
    ConcreteDataState,
    ConcretePath,
    ControlFlowAutomaton,
    enumerate_paths,
    parse_cfa,
    parse_program,
    serialize_cfa,
)
from .automata import (
    ArtifactAutomaton,
    AutomatonKind,
    EdgePattern,
    MatchVerdict,
    Transition,
    accepts,
    covers,
    match_path,
    parse_automaton,
    serialize_automaton,
)
from .kinds import KindReport, build_test_case_automaton, validate_kind
from .engine import (
    AnalysisConfig,
    Judgment,
    Verdict,
    brute_force_oracle,
    check_condition_correct,
    check_correctness_witness,
    check_fulfills,
    check_test_covers,
    check_violation_witness,
)
from .actors import (
    ExecutionReport,
    Result,
    TestRecord,
    TestSuite,
    VerdictBundle,
    conditional_verify,
    exec_test,
    extract_test,
    generate_tests,
    reduce,
    validate_result,
    verify,
)
from .pipeline import Recipe, Role, parse_recipe, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "ArtifactAutomaton",
    "AutomatonKind",
    "ConcreteDataState",
    "ConcretePath",
    "ControlFlowAutomaton",
    "CoopVerifyError",
    "DuplicateOtherwise",
    "EdgePattern",
    "ExecutionReport",
    "Interval",
    "InvalidArtifact",
    "Judgment",
    "KindReport",
    "MatchVerdict",
    "NoViolatingPath",
    "OracleBudgetExceeded",
    "ParseError",
    "PipelineStepError",
    "Recipe",
    "Result",
    "Role",
    "TestRecord",
    "TestSuite",
    "Transition",
    "TypeMismatch",
    "UnboundTemplate",
    "UndefinedVariable",
    "UnknownKind",
    "UseBeforeDef",
    "Verdict",
    "VerdictBundle",
    "accepts",
    "brute_force_oracle",
    "build_test_case_automaton",
    "check_condition_correct",
    "check_correctness_witness",
    "check_fulfills",
    "check_test_covers",
    "check_violation_witness",
    "conditional_verify",
    "covers",
    "enumerate_paths",
    "exec_test",
    "extract_test",
    "generate_tests",
    "match_path",
    "parse_automaton",
    "parse_cfa",
    "parse_expression",
    "parse_predicate",
    "parse_program",
    "parse_recipe",
    "pred_text",
    "reduce",
    "run_pipeline",
    "serialize_automaton",
    "serialize_cfa",
    "validate_kind",
    "validate_result",
    "verify",
]
