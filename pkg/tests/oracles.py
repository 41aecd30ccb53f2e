"""Brute-force reference implementations used to check the real search code.

Nothing here imports the homomorphism or chase modules; every answer is
obtained by enumerating all atom assignments.
"""

import itertools

from gchase.core import TermKind


def _unify(pattern_atoms, image_atoms, binding, may_bind):
    binding = dict(binding)
    for p, a in zip(pattern_atoms, image_atoms):
        if p.relation != a.relation or len(p.terms) != len(a.terms):
            return None
        for t, v in zip(p.terms, a.terms):
            if t.kind is TermKind.CONSTANT:
                if t != v:
                    return None
            elif t in binding:
                if binding[t] != v:
                    return None
            elif may_bind(t, v):
                binding[t] = v
            else:
                return None
    return binding


def _any(t, v):
    return True


def all_body_matches(dep, atoms):
    """Every consistent body binding, found by trying all |I|^|body| assignments."""
    atoms = list(atoms)
    found = set()
    for images in itertools.product(atoms, repeat=len(dep.body)):
        b = _unify(dep.body, images, {}, _any)
        if b is not None:
            found.add(frozenset(b.items()))
    return found


def head_satisfied(dep, binding, atoms):
    atoms = list(atoms)
    for images in itertools.product(atoms, repeat=len(dep.head)):
        if _unify(dep.head, images, binding, _any) is not None:
            return True
    return False


def active_triggers(sigma, atoms):
    """(dependency id, binding) for every trigger that would still fire."""
    out = []
    for d in sigma:
        for b in all_body_matches(d, atoms):
            binding = dict(b)
            if d.is_tgd:
                if not head_satisfied(d, binding, atoms):
                    out.append((d.id, b))
            else:
                left, right = (binding.get(t, t) for t in d.equality)
                if left != right:
                    out.append((d.id, b))
    return out


def _instance_rule(t, v):
    if t.kind is TermKind.NULL:
        return v.kind in (TermKind.CONSTANT, TermKind.NULL)
    if t.kind is TermKind.EXISTENTIAL:
        return v.kind is not TermKind.NULL
    if t.kind is TermKind.UNIVERSAL:
        return v == t or v.kind is TermKind.CONSTANT
    return False


def instance_hom(a_atoms, b_atoms):
    a_atoms, b_atoms = list(a_atoms), list(b_atoms)
    for images in itertools.product(b_atoms, repeat=len(a_atoms)):
        if _unify(a_atoms, images, {}, _instance_rule) is not None:
            return True
    return not a_atoms


def compose_pointwise(outer, inner, terms):
    return {t: outer(inner(t)) for t in terms}


def natural_join_max(participants, students):
    """participant(module,id,semester) joined with student(id,name,course), name = 'Max'."""
    rows = set()
    for module, pid, semester in participants:
        for sid, name, course in students:
            if pid == sid and name == "Max":
                rows.add((module, pid, semester, name, course))
    return rows
