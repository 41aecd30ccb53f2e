"""Trigger search, activeness tests and instance homomorphisms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .core import (
    Atom,
    Dependency,
    GeneralizedInstance,
    RuleSet,
    Substitution,
    Term,
    replacement_allowed,
)


@dataclass(frozen=True)
class Trigger:
    dependency: str
    binding: Substitution
    matched: tuple[Atom, ...]

    def sort_key(self) -> tuple:
        # the matched atoms determine the binding, so there are no ties
        return tuple(a.sort_key() for a in self.matched)


def _match_atoms(
    pattern: Sequence[Atom],
    index: dict[str, list[Atom]],
    binding: dict[Term, Term],
    rules: RuleSet,
) -> Iterator[tuple[dict[Term, Term], tuple[Atom, ...]]]:
    """Backtracking search mapping every pattern atom onto some indexed atom.

    Constants in the pattern match only themselves; every other pattern term
    takes a single image, which must be permitted by ``rules``.
    """
    if not pattern:
        yield dict(binding), ()
        return
    first, rest = pattern[0], pattern[1:]
    for candidate in index.get(first.relation, ()):
        if candidate.arity != first.arity:
            continue
        added = []
        ok = True
        for t, image in zip(first.terms, candidate.terms):
            if t.is_constant:
                if t != image:
                    ok = False
                    break
                continue
            bound = binding.get(t)
            if bound is None:
                if not replacement_allowed(t, image, rules):
                    ok = False
                    break
                binding[t] = image
                added.append(t)
            elif bound != image:
                ok = False
                break
        if ok:
            for found, matched in _match_atoms(rest, index, binding, rules):
                yield found, (candidate,) + matched
        for t in added:
            del binding[t]


def find_triggers(d: Dependency, i: GeneralizedInstance) -> list[Trigger]:
    index = i.by_relation()
    seen = set()
    triggers = []
    for binding, matched in _match_atoms(d.body, index, {}, RuleSet.BODY):
        key = frozenset(binding.items())
        if key in seen:
            continue
        seen.add(key)
        triggers.append(Trigger(d.id, Substitution(binding, RuleSet.BODY), matched))
    triggers.sort(key=Trigger.sort_key)
    return triggers


def head_extension(t: Trigger, d: Dependency, i: GeneralizedInstance) -> Optional[Substitution]:
    """An extension of the trigger mapping the tgd head into ``i``, if one exists."""
    fixed = {v: t.binding(v) for v in d.body_terms() if not v.is_constant}
    for found, _ in _match_atoms(d.head, i.by_relation(), fixed, RuleSet.HEAD):
        return Substitution(found, RuleSet.HEAD)
    return None


def is_active_trigger(t: Trigger, d: Dependency, i: GeneralizedInstance) -> bool:
    if d.is_tgd:
        return head_extension(t, d, i) is None
    left, right = d.equality
    return t.binding(left) != t.binding(right)


def find_instance_hom(a: GeneralizedInstance, b: GeneralizedInstance) -> Optional[Substitution]:
    # constants in ``a`` behave like pattern constants; everything else is a
    # variable of the search constrained by the instance rules.
    pattern = a.sorted_atoms()
    for found, _ in _match_atoms(pattern, b.by_relation(), {}, RuleSet.INSTANCE):
        return Substitution(found, RuleSet.INSTANCE)
    return None


def instance_hom_exists(a: GeneralizedInstance, b: GeneralizedInstance) -> bool:
    return find_instance_hom(a, b) is not None
