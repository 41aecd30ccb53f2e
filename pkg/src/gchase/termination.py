"""Constraint validation and sufficient conditions for chase termination.

All graph criteria share one test: a dependency set passes when no cycle of
its position graph runs through a special edge (an edge into a position
that receives fresh nulls).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Optional, Sequence

import networkx as nx

from .core import (
    Dependency,
    RelationSchema,
    Term,
    TermKind,
    dependency_problems,
)


class Criterion(enum.Enum):
    RICH = "rich"
    WEAK = "weak"
    SAFE = "safe"
    REWRITING = "rewriting"
    REWRITING_EGD = "rewriting-egd"


ALL_CRITERIA = tuple(Criterion)

CONSTRAINTS_OK = "Constraints are defined correctly."

_VERDICTS = {
    Criterion.RICH: (
        "tgds are richly acyclic -> Standard Chase will definitely terminate.",
        "tgds are not richly acyclic -> Standard Chase may not terminate.",
    ),
    Criterion.WEAK: (
        "tgds are weakly acyclic -> Standard Chase will definitely terminate.",
        "tgds are not weakly acyclic -> Standard Chase may not terminate.",
    ),
    Criterion.SAFE: (
        "tgds are safe -> Standard Chase will definitely terminate.",
        "tgds are not safe -> Standard Chase may not terminate.",
    ),
    Criterion.REWRITING: (
        "Constraint rewriting shows that tgds are acyclic -> Chase will definitely terminate.",
        "Constraint rewriting shows that tgds are not acyclic -> Chase may not terminate.",
    ),
    Criterion.REWRITING_EGD: (
        "Constraint rewriting shows that tgds/egds are acyclic -> Chase will definitely terminate.",
        "Constraint rewriting shows that tgds/egds are not acyclic -> Chase may not terminate.",
    ),
}


def verdict(criterion: Criterion, ok: bool) -> str:
    return _VERDICTS[criterion][0 if ok else 1]


@dataclass(frozen=True)
class Diagnostic:
    dependency: str
    message: str

    def render(self) -> str:
        return f"{self.dependency}: {self.message}"


def validate_constraints(
    sigma: Sequence[Dependency], schema: Optional[Iterable[RelationSchema]] = None
) -> list[Diagnostic]:
    relations: Optional[Mapping[str, RelationSchema]] = None
    if schema is not None:
        relations = {r.name: r for r in schema}
    out = []
    seen = set()
    for d in sigma:
        if d.id in seen:
            out.append(Diagnostic(d.id, "duplicate dependency id"))
        seen.add(d.id)
        out.extend(Diagnostic(d.id, msg) for msg in dependency_problems(d, relations))
    return out


# -- position graphs -------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Position:
    relation: str
    index: int

    def __str__(self) -> str:
        return f"{self.relation}[{self.index}]"


@dataclass
class PositionGraph:
    nodes: set = field(default_factory=set)
    regular: set = field(default_factory=set)
    special: set = field(default_factory=set)

    def add(self, source, target, special: bool) -> None:
        self.nodes.update((source, target))
        (self.special if special else self.regular).add((source, target))

    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.regular)
        g.add_edges_from(self.special)
        return g


def _positions(atoms) -> dict[Term, list[Position]]:
    where: dict[Term, list[Position]] = {}
    for atom in atoms:
        for k, t in enumerate(atom.terms, start=1):
            where.setdefault(t, []).append(Position(atom.relation, k))
    return where


def _tgd_edges(d: Dependency, rich: bool):
    """Yield ``(variable, source, target, special)`` for one tgd."""
    body = _positions(d.body)
    head = _positions(d.head)
    exist = sorted(
        {q for t, qs in head.items() if t.kind is TermKind.EXISTENTIAL for q in qs}
    )
    for x, sources in body.items():
        if x.kind is not TermKind.UNIVERSAL:
            continue
        exported = x in head
        if not exported and not rich:
            continue
        for p in sources:
            for q in head.get(x, ()):
                yield x, p, q, False
            for q in exist:
                yield x, p, q, True


def _all_positions(sigma: Sequence[Dependency]) -> set[Position]:
    out = set()
    for d in sigma:
        for atom in d.body + d.head:
            out.update(Position(atom.relation, k) for k in range(1, atom.arity + 1))
    return out


def _tgds(sigma: Sequence[Dependency]) -> list[Dependency]:
    return [d for d in sigma if d.is_tgd]


def build_position_graph(sigma: Sequence[Dependency], variant: Criterion = Criterion.WEAK) -> PositionGraph:
    if variant not in (Criterion.WEAK, Criterion.RICH):
        raise ValueError(f"no plain position graph for {variant.value}")
    tgds = _tgds(sigma)
    g = PositionGraph(nodes=_all_positions(tgds))
    for d in tgds:
        for _, p, q, special in _tgd_edges(d, variant is Criterion.RICH):
            g.add(p, q, special)
    return g


def affected_positions(sigma: Sequence[Dependency]) -> set[Position]:
    tgds = _tgds(sigma)
    affected = set()
    for d in tgds:
        for t, qs in _positions(d.head).items():
            if t.kind is TermKind.EXISTENTIAL:
                affected.update(qs)
    changed = True
    while changed:
        changed = False
        for d in tgds:
            body = _positions(d.body)
            for x, qs in _positions(d.head).items():
                if x.kind is not TermKind.UNIVERSAL or x not in body:
                    continue
                if all(p in affected for p in body[x]):
                    new = set(qs) - affected
                    if new:
                        affected |= new
                        changed = True
    return affected


def safety_graph(sigma: Sequence[Dependency]) -> PositionGraph:
    tgds = _tgds(sigma)
    affected = affected_positions(tgds)
    g = PositionGraph(nodes=_all_positions(tgds))
    for d in tgds:
        body = _positions(d.body)
        for x, p, q, special in _tgd_edges(d, rich=False):
            if all(b in affected for b in body[x]):
                g.add(p, q, special)
    return g


def special_cycle(g: PositionGraph) -> Optional[list]:
    """A cycle through a special edge, as a closed node list, or None."""
    dg = g.digraph()
    component = {}
    for k, scc in enumerate(nx.strongly_connected_components(dg)):
        for node in scc:
            component[node] = k
    for u, v in sorted(g.special, key=str):
        if component[u] == component[v]:
            back = nx.shortest_path(dg, v, u)
            return [u] + back
    return None


def has_special_cycle(g: PositionGraph) -> bool:
    return special_cycle(g) is not None


# -- adornment rewriting -------------------------------------------------------------

BOUND, FREE = "b", "f"


@dataclass(frozen=True)
class AdornedPosition:
    relation: str
    adornment: str
    index: int

    def __str__(self) -> str:
        return f"{self.relation}^{self.adornment}[{self.index}]"


@dataclass(frozen=True)
class AdornedTgd:
    tgd: Dependency
    body: tuple[str, ...]
    head: tuple[str, ...]


def _variable_adornment(atoms, adornments) -> dict[Term, str]:
    """A body variable is bound when any of its occurrences is bound."""
    out: dict[Term, str] = {}
    for atom, ad in zip(atoms, adornments):
        for t, a in zip(atom.terms, ad):
            if t.is_constant:
                continue
            if a == BOUND:
                out[t] = BOUND
            else:
                out.setdefault(t, FREE)
    return out


def _head_adornment(atom, var_ad: Mapping[Term, str]) -> str:
    chars = []
    for t in atom.terms:
        if t.is_constant:
            chars.append(BOUND)
        elif t.kind is TermKind.EXISTENTIAL:
            chars.append(FREE)
        else:
            chars.append(var_ad.get(t, FREE))
    return "".join(chars)


def _egd_variants(d: Dependency, adornments) -> list[tuple[str, str]]:
    """New adorned predicates reachable when the egd equates a bound and a free term.

    The survivor of such an equation may be either term, so the equated
    positions can end up bound or free; both outcomes are added.
    """
    var_ad = _variable_adornment(d.body, adornments)

    def ad(t: Term) -> str:
        return BOUND if t.is_constant else var_ad.get(t, FREE)

    left, right = d.equality
    if ad(left) == ad(right):
        return []
    out = []
    for atom, a in zip(d.body, adornments):
        for target in (BOUND, FREE):
            chars = list(a)
            for k, t in enumerate(atom.terms):
                if t in (left, right) and not t.is_constant:
                    chars[k] = target
            out.append((atom.relation, "".join(chars)))
    return out


def adorn(sigma: Sequence[Dependency], with_egds: bool = False) -> list[AdornedTgd]:
    """Rewrite the tgds of ``sigma`` into adorned copies.

    Every relation starts fully bound (input values). A tgd is copied for
    each combination of known body adornments; its head atoms are adorned
    free at existential positions and at positions of free variables.
    """
    tgds = _tgds(sigma)
    egds = [d for d in sigma if not d.is_tgd] if with_egds else []
    known: dict[str, set[str]] = {}
    for d in sigma:
        for atom in d.body + d.head:
            known.setdefault(atom.relation, set()).add(BOUND * atom.arity)
    adorned: dict[tuple, AdornedTgd] = {}
    changed = True
    while changed:
        changed = False
        new: list[tuple[str, str]] = []
        for d in tgds:
            choices = [sorted(known.get(a.relation, ())) for a in d.body]
            for combo in itertools.product(*choices):
                if (d.id, combo) in adorned:
                    continue
                var_ad = _variable_adornment(d.body, combo)
                head = tuple(_head_adornment(a, var_ad) for a in d.head)
                adorned[(d.id, combo)] = AdornedTgd(d, combo, head)
                new.extend(zip((a.relation for a in d.head), head))
        for d in egds:
            choices = [sorted(known.get(a.relation, ())) for a in d.body]
            for combo in itertools.product(*choices):
                new.extend(_egd_variants(d, combo))
        for rel, ad in new:
            if ad not in known.setdefault(rel, set()):
                known[rel].add(ad)
                changed = True
    return sorted(adorned.values(), key=lambda a: (a.tgd.id, a.body))


def adorned_graph(sigma: Sequence[Dependency], with_egds: bool = False) -> PositionGraph:
    """Position graph of the adorned tgds.

    Only free variables contribute edges: a bound variable is confined to
    values of the input and cannot carry nulls around a cycle.
    """
    g = PositionGraph()
    for at in adorn(sigma, with_egds):
        d = at.tgd
        var_ad = _variable_adornment(d.body, at.body)
        for atom, ad in zip(d.body, at.body):
            g.nodes.update(AdornedPosition(atom.relation, ad, k) for k in range(1, atom.arity + 1))
        for atom, ad in zip(d.head, at.head):
            g.nodes.update(AdornedPosition(atom.relation, ad, k) for k in range(1, atom.arity + 1))
        body = {}
        for atom, ad in zip(d.body, at.body):
            for k, t in enumerate(atom.terms, start=1):
                body.setdefault(t, []).append(AdornedPosition(atom.relation, ad, k))
        head = {}
        for atom, ad in zip(d.head, at.head):
            for k, t in enumerate(atom.terms, start=1):
                head.setdefault(t, []).append(AdornedPosition(atom.relation, ad, k))
        exist = [q for t, qs in head.items() if t.kind is TermKind.EXISTENTIAL for q in qs]
        for x, sources in body.items():
            if x.kind is not TermKind.UNIVERSAL or x not in head or var_ad.get(x) != FREE:
                continue
            for p in sources:
                for q in head[x]:
                    g.add(p, q, False)
                for q in exist:
                    g.add(p, q, True)
    return g


def check_termination(sigma: Sequence[Dependency], criterion: Criterion) -> tuple[bool, str]:
    if not _tgds(sigma):
        return True, verdict(criterion, True) + " (vacuously acyclic)"
    if criterion in (Criterion.WEAK, Criterion.RICH):
        g = build_position_graph(sigma, criterion)
    elif criterion is Criterion.SAFE:
        g = safety_graph(sigma)
    else:
        g = adorned_graph(sigma, with_egds=criterion is Criterion.REWRITING_EGD)
    ok = not has_special_cycle(g)
    return ok, verdict(criterion, ok)


def run_checks(
    sigma: Sequence[Dependency], criteria: Iterable[Criterion] = ALL_CRITERIA
) -> list[tuple[Criterion, bool, str]]:
    wanted = set(criteria)
    return [(c, *check_termination(sigma, c)) for c in ALL_CRITERIA if c in wanted]
