"""The standard chase over generalized instances."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .core import (
    Atom,
    Dependency,
    FreshRegistry,
    GeneralizedInstance,
    ObjectKind,
    Query,
    RuleSet,
    Substitution,
    Term,
    TermKind,
    ValidationError,
    InactiveTrigger,
    apply_substitution,
    compose,
    dependency_problems,
    unfreeze_query,
)
from .homomorphism import Trigger, find_triggers, is_active_trigger

logger = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 1000


class Status(enum.Enum):
    FIXPOINT = "Fixpoint"
    FAILED_BOTTOM = "FailedBottom"
    EMPTY_QUERY = "EmptyQuery"
    STEP_LIMIT = "StepLimit"


class Action(enum.Enum):
    ADDED_ATOMS = "AddedAtoms"
    SUBSTITUTED = "Substituted"
    CONFLICT = "Conflict"


@dataclass(frozen=True)
class LogEntry:
    step: int
    dependency: str
    binding: str
    action: Action
    # AddedAtoms: the instantiated head atoms; Substituted / Conflict: the
    # (replaced, survivor) or (left, right) term pair.
    payload: tuple

    def render_payload(self) -> str:
        if self.action is Action.ADDED_ATOMS:
            return ", ".join(a.render() for a in self.payload)
        left, right = self.payload
        if self.action is Action.SUBSTITUTED:
            return f"{left} -> {right}"
        return f"{left} != {right}"

    def render(self) -> str:
        return (
            f"step {self.step}: {self.dependency} via {self.binding} "
            f"=> {self.action.value}: {self.render_payload()}"
        )


@dataclass
class StepLog:
    entries: list[LogEntry] = field(default_factory=list)

    def append(self, dependency: str, binding: str, action: Action, payload: tuple) -> LogEntry:
        entry = LogEntry(len(self.entries) + 1, dependency, binding, action, payload)
        self.entries.append(entry)
        return entry

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass
class ChaseOutcome:
    status: Status
    # the last instance reached; for StepLimit this is the state after the
    # final step, for failures the state before the conflicting step
    result: GeneralizedInstance
    accumulated: Substitution
    log: StepLog
    query: Optional[Query] = None
    # relations read by s-t tgds and written by no dependency
    source_relations: frozenset = frozenset()

    @property
    def steps(self) -> int:
        return len(self.log)

    @property
    def target(self) -> GeneralizedInstance:
        """The result without source relations (the whole result if there are none)."""
        atoms = frozenset(a for a in self.result.atoms if a.relation not in self.source_relations)
        return GeneralizedInstance(atoms, self.result.kind)


@dataclass(frozen=True)
class Bottom:
    left: Term
    right: Term


@dataclass(frozen=True)
class EmptyResult:
    left: Term
    right: Term


EgdResult = Union[tuple[GeneralizedInstance, Substitution], Bottom, EmptyResult]

_SURVIVAL_RANK = {
    TermKind.CONSTANT: 0,
    TermKind.UNIVERSAL: 1,
    TermKind.EXISTENTIAL: 2,
    TermKind.NULL: 3,
}


def survivor_key(t: Term) -> tuple:
    """Smaller key survives when an egd equates two terms."""
    return (_SURVIVAL_RANK[t.kind], str(t.label), t.index or 0)


def substitution_rules(kind: ObjectKind) -> RuleSet:
    # instance egds rewrite nulls (rule 2); query egds rewrite variables,
    # which only the head rule set permits between distinct variables
    return RuleSet.INSTANCE if kind is ObjectKind.INSTANCE else RuleSet.HEAD


def substitute_instance(i: GeneralizedInstance, s: Substitution) -> GeneralizedInstance:
    return GeneralizedInstance(frozenset(apply_substitution(s, a) for a in i.atoms), i.kind)


def apply_tgd_step(
    i: GeneralizedInstance,
    d: Dependency,
    t: Trigger,
    reg: FreshRegistry,
) -> tuple[GeneralizedInstance, tuple[Atom, ...]]:
    """Fire an active tgd trigger; returns the new instance and the head atoms."""
    if not d.is_tgd:
        raise TypeError(f"{d.id} is not a tgd")
    if not is_active_trigger(t, d, i):
        raise InactiveTrigger(f"trigger {t.binding} for {d.id} is not active")
    fresh_kind = TermKind.NULL if i.kind is ObjectKind.INSTANCE else TermKind.EXISTENTIAL
    mapping = dict(t.binding.mapping)
    for var in sorted(d.existential_vars(), key=_first_occurrence(d)):
        mapping[var] = reg.fresh(fresh_kind, var.label)
    extension = Substitution(mapping, RuleSet.HEAD)
    added = tuple(apply_substitution(extension, a) for a in d.head)
    return i.with_atoms(added), added


def _first_occurrence(d: Dependency):
    order = {}
    for atom in d.head:
        for t in atom.terms:
            order.setdefault(t, len(order))
    return order.__getitem__


def apply_egd_step(i: GeneralizedInstance, d: Dependency, t: Trigger) -> EgdResult:
    if d.is_tgd:
        raise TypeError(f"{d.id} is not an egd")
    u, v = (t.binding(x) for x in d.equality)
    if u == v:
        raise InactiveTrigger(f"trigger {t.binding} for {d.id} is not active")
    if u.is_constant and v.is_constant:
        if i.kind is ObjectKind.INSTANCE:
            return Bottom(u, v)
        return EmptyResult(u, v)
    survivor, replaced = sorted((u, v), key=survivor_key)
    s = Substitution({replaced: survivor}, substitution_rules(i.kind))
    return substitute_instance(i, s), s


def _next_active(sigma: Sequence[Dependency], i: GeneralizedInstance):
    for d in sigma:
        for t in find_triggers(d, i):
            if is_active_trigger(t, d, i):
                return d, t
    return None


def source_relations(sigma: Sequence[Dependency]) -> frozenset:
    read = {a.relation for d in sigma if d.source_target for a in d.body}
    written = {a.relation for d in sigma for a in d.head}
    return frozenset(read - written)


def validate_dependencies(sigma: Sequence[Dependency]) -> None:
    seen = set()
    for d in sigma:
        if d.id in seen:
            raise ValidationError(f"duplicate dependency id {d.id}")
        seen.add(d.id)
        problems = dependency_problems(d)
        if problems:
            raise ValidationError(f"{d.id}: {problems[0]}")


def chase(
    sigma: Sequence[Dependency],
    i0: GeneralizedInstance,
    max_steps: int = DEFAULT_MAX_STEPS,
    head: Optional[Atom] = None,
) -> ChaseOutcome:
    """Run the chase until no trigger is active, an egd fails, or ``max_steps``.

    Dependencies are scanned in the given order and triggers in their
    canonical order; the first active trigger fires, one step per round.
    For query objects pass the frozen ``head`` to get the rewritten query.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be positive")
    validate_dependencies(sigma)
    sources = source_relations(sigma)
    registry = FreshRegistry.for_object(i0, head)
    acc = Substitution.identity(substitution_rules(i0.kind))
    log = StepLog()
    current = i0
    while True:
        found = _next_active(sigma, current)
        if found is None:
            query = None
            if head is not None and current.kind is ObjectKind.QUERY:
                query = unfreeze_query(current, head, acc)
            logger.debug("fixpoint after %d steps", len(log))
            return ChaseOutcome(Status.FIXPOINT, current, acc, log, query, sources)
        if len(log) >= max_steps:
            logger.debug("step limit %d reached", max_steps)
            return ChaseOutcome(Status.STEP_LIMIT, current, acc, log, None, sources)
        d, t = found
        binding = t.binding.render()
        if d.is_tgd:
            current, added = apply_tgd_step(current, d, t, registry)
            log.append(d.id, binding, Action.ADDED_ATOMS, added)
            continue
        outcome = apply_egd_step(current, d, t)
        if isinstance(outcome, (Bottom, EmptyResult)):
            log.append(d.id, binding, Action.CONFLICT, (outcome.left, outcome.right))
            status = Status.FAILED_BOTTOM if isinstance(outcome, Bottom) else Status.EMPTY_QUERY
            return ChaseOutcome(status, current, acc, log, None, sources)
        current, s = outcome
        acc = compose(s, acc)
        (pair,) = s.mapping.items()
        log.append(d.id, binding, Action.SUBSTITUTED, pair)


def replay(
    log: StepLog,
    i0: GeneralizedInstance,
    head: Optional[Atom] = None,
    sources: frozenset = frozenset(),
) -> ChaseOutcome:
    """Rebuild an outcome from ``i0`` and the logged steps alone.

    The replay cannot tell a step limit from a fixpoint; it reports
    Fixpoint unless the log ends in a conflict.
    """
    acc = Substitution.identity(substitution_rules(i0.kind))
    current = i0
    for entry in log:
        if entry.action is Action.ADDED_ATOMS:
            current = current.with_atoms(entry.payload)
        elif entry.action is Action.SUBSTITUTED:
            s = Substitution(dict([entry.payload]), substitution_rules(i0.kind))
            current = substitute_instance(current, s)
            acc = compose(s, acc)
        else:
            status = Status.FAILED_BOTTOM if i0.kind is ObjectKind.INSTANCE else Status.EMPTY_QUERY
            return ChaseOutcome(status, current, acc, log, None, sources)
    query = None
    if head is not None and current.kind is ObjectKind.QUERY:
        query = unfreeze_query(current, head, acc)
    return ChaseOutcome(Status.FIXPOINT, current, acc, log, query, sources)
