"""Generalized chase over database instances and conjunctive queries."""

from .chase import (
    DEFAULT_MAX_STEPS,
    ChaseOutcome,
    StepLog,
    Status,
    apply_egd_step,
    apply_tgd_step,
    chase,
    replay,
)
from .core import (
    Atom,
    ChaseError,
    Dependency,
    DependencyKind,
    FreshRegistry,
    GeneralizedInstance,
    ObjectKind,
    Query,
    RelationSchema,
    RuleSet,
    RuleViolation,
    SchemaMismatch,
    Substitution,
    Term,
    TermKind,
    ValidationError,
    apply_substitution,
    compose,
    fresh_term,
    freeze_query,
    unfreeze_query,
)
from .fileio import ChaseProblem, parse_problem, render_result, write_log
from .homomorphism import Trigger, find_triggers, instance_hom_exists, is_active_trigger
from .termination import Criterion, check_termination, validate_constraints

__version__ = "0.1.0"
