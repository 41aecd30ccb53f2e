"""Terms, atoms, dependencies and generalized instances.

A generalized instance is a set of atoms that stands either for a database
instance (constants and labeled nulls) or for the frozen body of a
conjunctive query (constants, universal and existential variables).
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

ANSWER_RELATION = "ans"


class ChaseError(Exception):
    """Base class for all errors raised by this package.

    ``line`` and ``column`` are 1-based and only set for errors that point
    at a location in a problem file.
    """

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class RuleViolation(ChaseError):
    pass


class SchemaMismatch(ChaseError):
    pass


class ValidationError(ChaseError):
    pass


class InactiveTrigger(ChaseError):
    pass


class TermKind(enum.Enum):
    CONSTANT = "constant"
    NULL = "null"
    UNIVERSAL = "universal"
    EXISTENTIAL = "existential"


_PREFIX = {TermKind.UNIVERSAL: "#V_", TermKind.EXISTENTIAL: "#E_", TermKind.NULL: "#N_"}


@dataclass(frozen=True)
class Term:
    """A constant, labeled null, universal variable or existential variable.

    Constants keep their literal in ``label`` (``str`` or ``int``; the two
    never compare equal) and have no index.
    """

    kind: TermKind
    label: Union[str, int]
    index: Optional[int] = None

    def __post_init__(self):
        if self.kind is TermKind.CONSTANT:
            if self.index is not None:
                raise ValueError("constants carry no index")
            if isinstance(self.label, bool) or not isinstance(self.label, (str, int)):
                raise ValueError(f"constant literal must be str or int, got {self.label!r}")
        else:
            if not isinstance(self.label, str) or not self.label:
                raise ValueError(f"{self.kind.value} needs a non-empty text label")
            if not isinstance(self.index, int) or self.index < 1:
                raise ValueError(f"{self.kind.value} needs a positive index")

    @classmethod
    def const(cls, value: Union[str, int]) -> Term:
        return cls(TermKind.CONSTANT, value)

    @classmethod
    def null(cls, label: str, index: int) -> Term:
        return cls(TermKind.NULL, label, index)

    @classmethod
    def var(cls, label: str, index: int) -> Term:
        return cls(TermKind.UNIVERSAL, label, index)

    @classmethod
    def evar(cls, label: str, index: int) -> Term:
        return cls(TermKind.EXISTENTIAL, label, index)

    @property
    def is_constant(self) -> bool:
        return self.kind is TermKind.CONSTANT

    @property
    def is_variable(self) -> bool:
        return self.kind in (TermKind.UNIVERSAL, TermKind.EXISTENTIAL)

    def render(self) -> str:
        if self.kind is TermKind.CONSTANT:
            if isinstance(self.label, int):
                return str(self.label)
            return "'" + self.label.replace("'", "''") + "'"
        return f"{_PREFIX[self.kind]}{self.label}_{self.index}"

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class RelationSchema:
    name: str
    attributes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if not self.attributes:
            raise ValueError(f"relation {self.name} needs at least one attribute")
        if len(set(self.attributes)) != len(self.attributes):
            raise ValueError(f"relation {self.name} has duplicate attribute names")

    @property
    def arity(self) -> int:
        return len(self.attributes)

    def render(self) -> str:
        return f"{self.name}({','.join(self.attributes)})"


@dataclass(frozen=True)
class Atom:
    relation: str
    terms: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def arity(self) -> int:
        return len(self.terms)

    @functools.cached_property
    def _key(self) -> tuple:
        return (self.relation, tuple(t.render() for t in self.terms))

    def sort_key(self) -> tuple:
        return self._key

    def render(self) -> str:
        return f"{self.relation}({','.join(t.render() for t in self.terms)})"

    def __str__(self) -> str:
        return self.render()


def check_atom(atom: Atom, schema: Mapping[str, RelationSchema]) -> None:
    """Raise SchemaMismatch unless ``atom`` fits a relation of ``schema``."""
    rel = schema.get(atom.relation)
    if rel is None:
        raise SchemaMismatch(f"unknown relation {atom.relation!r} in {atom}")
    if rel.arity != atom.arity:
        raise SchemaMismatch(
            f"{atom} has {atom.arity} terms but {rel.name} has arity {rel.arity}"
        )


def schema_map(relations: Iterable[RelationSchema]) -> dict[str, RelationSchema]:
    out: dict[str, RelationSchema] = {}
    for rel in relations:
        if rel.name in out:
            raise SchemaMismatch(f"relation {rel.name!r} declared twice")
        out[rel.name] = rel
    return out


class ObjectKind(enum.Enum):
    INSTANCE = "instance"
    QUERY = "query"


_ALLOWED_KINDS = {
    ObjectKind.INSTANCE: {TermKind.CONSTANT, TermKind.NULL},
    ObjectKind.QUERY: {TermKind.CONSTANT, TermKind.UNIVERSAL, TermKind.EXISTENTIAL},
}


@dataclass(frozen=True)
class GeneralizedInstance:
    atoms: frozenset[Atom]
    kind: ObjectKind = ObjectKind.INSTANCE

    def __post_init__(self):
        object.__setattr__(self, "atoms", frozenset(self.atoms))
        allowed = _ALLOWED_KINDS[self.kind]
        for atom in self.atoms:
            for t in atom.terms:
                if t.kind not in allowed:
                    raise ValidationError(
                        f"{t} may not appear in a {self.kind.value} object ({atom})"
                    )

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.sorted_atoms())

    def __len__(self) -> int:
        return len(self.atoms)

    def __contains__(self, atom: object) -> bool:
        return atom in self.atoms

    def sorted_atoms(self) -> list[Atom]:
        return sorted(self.atoms, key=Atom.sort_key)

    def terms(self) -> set[Term]:
        return {t for a in self.atoms for t in a.terms}

    def with_atoms(self, atoms: Iterable[Atom]) -> GeneralizedInstance:
        return GeneralizedInstance(self.atoms | frozenset(atoms), self.kind)

    def by_relation(self) -> dict[str, list[Atom]]:
        index: dict[str, list[Atom]] = {}
        for atom in self.sorted_atoms():
            index.setdefault(atom.relation, []).append(atom)
        return index


class DependencyKind(enum.Enum):
    TGD = "tgd"
    EGD = "egd"


@dataclass(frozen=True)
class Dependency:
    """A tgd (``body -> head atoms``) or egd (``body -> left = right``).

    Structural problems are reported by :func:`dependency_problems` rather
    than at construction, so that malformed input can be diagnosed.
    """

    id: str
    kind: DependencyKind
    body: tuple[Atom, ...]
    head: tuple[Atom, ...] = ()
    equality: Optional[tuple[Term, Term]] = None
    source_target: bool = False

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        object.__setattr__(self, "head", tuple(self.head))
        if self.kind is DependencyKind.EGD:
            if self.equality is None or self.head:
                raise ValueError("an egd has an equality and no head atoms")
            object.__setattr__(self, "equality", tuple(self.equality))
        elif self.equality is not None or not self.head:
            raise ValueError("a tgd has head atoms and no equality")

    @classmethod
    def tgd(cls, id: str, body: Sequence[Atom], head: Sequence[Atom], source_target: bool = False) -> Dependency:
        return cls(id, DependencyKind.TGD, tuple(body), tuple(head), None, source_target)

    @classmethod
    def egd(cls, id: str, body: Sequence[Atom], left: Term, right: Term) -> Dependency:
        return cls(id, DependencyKind.EGD, tuple(body), (), (left, right))

    @property
    def is_tgd(self) -> bool:
        return self.kind is DependencyKind.TGD

    def body_terms(self) -> set[Term]:
        return {t for a in self.body for t in a.terms}

    def head_terms(self) -> set[Term]:
        if self.is_tgd:
            return {t for a in self.head for t in a.terms}
        return set(self.equality)

    def existential_vars(self) -> set[Term]:
        return {t for t in self.head_terms() if t.kind is TermKind.EXISTENTIAL}

    def render(self) -> str:
        prefix = "st " if self.source_target else ""
        body = ", ".join(a.render() for a in self.body)
        if self.is_tgd:
            head = ", ".join(a.render() for a in self.head)
        else:
            head = f"{self.equality[0]} = {self.equality[1]}"
        return f"{prefix}{body} -> {head}"

    def __str__(self) -> str:
        return self.render()


def dependency_problems(dep: Dependency, schema: Optional[Mapping[str, RelationSchema]] = None) -> list[str]:
    """Every way in which ``dep`` violates the dependency invariants."""
    problems = []
    atoms = dep.body + dep.head
    if schema is not None:
        for atom in atoms:
            try:
                check_atom(atom, schema)
            except SchemaMismatch as exc:
                problems.append(exc.message)
    for atom in atoms:
        for t in atom.terms:
            if t.kind is TermKind.NULL:
                problems.append(f"labeled null {t} in {atom}")
    for atom in dep.body:
        for t in atom.terms:
            if t.kind is TermKind.EXISTENTIAL:
                problems.append(f"existential variable {t} in body atom {atom}")
    body_terms = dep.body_terms()
    if dep.is_tgd:
        uncovered = sorted(
            {t for a in dep.head for t in a.terms if t.kind is TermKind.UNIVERSAL} - body_terms,
            key=Term.render,
        )
        for t in uncovered:
            problems.append(f"head variable {t} does not occur in the body")
        if dep.source_target:
            shared = {a.relation for a in dep.body} & {a.relation for a in dep.head}
            for rel in sorted(shared):
                problems.append(f"s-t tgd uses relation {rel} in both body and head")
    else:
        if dep.source_target:
            problems.append("the s-t flag only applies to tgds")
        for t in dep.equality:
            if t.kind is TermKind.NULL:
                problems.append(f"labeled null {t} in equality")
            elif t.is_variable and t not in body_terms:
                problems.append(f"equated term {t} does not occur in the body")
    return problems


@dataclass(frozen=True)
class Query:
    """A conjunctive query ``body -> (head terms)``.

    The head is an atom over :data:`ANSWER_RELATION`.
    """

    body: tuple[Atom, ...]
    head: Atom

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        body_terms = {t for a in self.body for t in a.terms}
        for t in self.head.terms:
            if t.kind is TermKind.EXISTENTIAL:
                raise ValidationError(f"existential variable {t} in query head")
            if t.kind is TermKind.NULL:
                raise ValidationError(f"labeled null {t} in query head")
            if t.kind is TermKind.UNIVERSAL and t not in body_terms:
                raise ValidationError(f"head variable {t} does not occur in the query body")
        for atom in self.body:
            for t in atom.terms:
                if t.kind is TermKind.NULL:
                    raise ValidationError(f"labeled null {t} in query body")

    def render(self) -> str:
        body = ", ".join(a.render() for a in self.body)
        return f"{body} -> ({','.join(t.render() for t in self.head.terms)})"

    def __str__(self) -> str:
        return self.render()


def head_atom(terms: Iterable[Term]) -> Atom:
    return Atom(ANSWER_RELATION, tuple(terms))


# -- substitutions -----------------------------------------------------------


class RuleSet(enum.Enum):
    """Which term replacements a substitution may perform.

    BODY: dependency body into an object. HEAD: dependency head into an
    object (adds existential variables). INSTANCE: object into object.
    """

    BODY = "body"
    HEAD = "head"
    INSTANCE = "instance"


_ANY = frozenset(TermKind)

_TARGETS = {
    (TermKind.NULL, RuleSet.INSTANCE): {TermKind.CONSTANT, TermKind.NULL},
    (TermKind.EXISTENTIAL, RuleSet.HEAD): _ANY,
    (TermKind.EXISTENTIAL, RuleSet.INSTANCE): {TermKind.CONSTANT, TermKind.EXISTENTIAL, TermKind.UNIVERSAL},
    (TermKind.UNIVERSAL, RuleSet.BODY): _ANY,
    (TermKind.UNIVERSAL, RuleSet.HEAD): _ANY,
    (TermKind.UNIVERSAL, RuleSet.INSTANCE): {TermKind.CONSTANT},
}


def replacement_allowed(source: Term, target: Term, rules: RuleSet) -> bool:
    if source == target:
        return True
    if source.is_constant:
        return False
    return target.kind in _TARGETS.get((source.kind, rules), ())


@dataclass(frozen=True)
class Substitution:
    """Finite term mapping; terms outside the domain map to themselves."""

    mapping: Mapping[Term, Term] = field(default_factory=dict)
    rules: RuleSet = RuleSet.BODY

    def __post_init__(self):
        object.__setattr__(self, "mapping", {s: t for s, t in self.mapping.items() if s != t})

    @classmethod
    def identity(cls, rules: RuleSet = RuleSet.BODY) -> Substitution:
        return cls({}, rules)

    def __call__(self, term: Term) -> Term:
        return self.mapping.get(term, term)

    def __len__(self) -> int:
        return len(self.mapping)

    def __contains__(self, term: object) -> bool:
        return term in self.mapping

    def items(self) -> list[tuple[Term, Term]]:
        return sorted(self.mapping.items(), key=lambda kv: kv[0].render())

    def check(self) -> None:
        for source, target in self.mapping.items():
            if not replacement_allowed(source, target, self.rules):
                raise RuleViolation(
                    f"{self.rules.value} rules forbid replacing {source} by {target}"
                )

    def render(self) -> str:
        return "{" + ", ".join(f"{s} -> {t}" for s, t in self.items()) + "}"

    def __str__(self) -> str:
        return self.render()


def apply_substitution(s: Substitution, atom: Atom) -> Atom:
    terms = []
    for t in atom.terms:
        image = s(t)
        if not replacement_allowed(t, image, s.rules):
            raise RuleViolation(f"{s.rules.value} rules forbid replacing {t} by {image}")
        terms.append(image)
    return Atom(atom.relation, tuple(terms))


def compose(outer: Substitution, inner: Substitution) -> Substitution:
    """The substitution ``t -> outer(inner(t))``."""
    if not outer.mapping:
        rules = inner.rules
    elif not inner.mapping or inner.rules is outer.rules:
        rules = outer.rules
    else:
        raise RuleViolation(
            f"cannot compose {outer.rules.value} and {inner.rules.value} substitutions"
        )
    mapping = {t: outer(image) for t, image in inner.mapping.items()}
    for t, image in outer.mapping.items():
        mapping.setdefault(t, image)
    result = Substitution(mapping, rules)
    result.check()
    return result


# -- fresh terms ----------------------------------------------------------------


class FreshRegistry:
    """Hands out nulls and existential variables unused in the current problem."""

    def __init__(self, terms: Iterable[Term] = ()):
        self._used: dict[tuple[TermKind, str], set[int]] = {}
        for t in terms:
            self.register(t)

    @classmethod
    def for_object(cls, instance: GeneralizedInstance, head: Optional[Atom] = None) -> FreshRegistry:
        terms = set(instance.terms())
        if head is not None:
            terms.update(head.terms)
        return cls(terms)

    def register(self, term: Term) -> None:
        if not term.is_constant:
            self._used.setdefault((term.kind, term.label), set()).add(term.index)

    def fresh(self, kind: TermKind, label: str) -> Term:
        if kind not in (TermKind.NULL, TermKind.EXISTENTIAL):
            raise ValueError(f"cannot create fresh {kind.value} terms")
        used = self._used.setdefault((kind, label), set())
        index = 1
        while index in used:
            index += 1
        used.add(index)
        return Term(kind, label, index)


def fresh_term(kind: TermKind, label: str, registry: FreshRegistry) -> Term:
    return registry.fresh(kind, label)


# -- queries as frozen instances -------------------------------------------------


def freeze_query(
    q: Query, schema: Optional[Mapping[str, RelationSchema]] = None
) -> tuple[GeneralizedInstance, Atom]:
    if schema is not None:
        for atom in q.body:
            check_atom(atom, schema)
    return GeneralizedInstance(frozenset(q.body), ObjectKind.QUERY), q.head


def unfreeze_query(i: GeneralizedInstance, head: Atom, acc: Substitution) -> Query:
    if i.kind is not ObjectKind.QUERY:
        raise ValidationError("only query objects can be turned back into queries")
    new_head = apply_substitution(acc, head)
    try:
        return Query(tuple(i.sorted_atoms()), new_head)
    except ValidationError as exc:
        raise RuleViolation(exc.message) from exc
