import pytest
from hypothesis import given
from hypothesis import strategies as st

from gchase.core import (
    Atom,
    Dependency,
    FreshRegistry,
    GeneralizedInstance,
    ObjectKind,
    Query,
    RuleSet,
    RelationSchema,
    RuleViolation,
    SchemaMismatch,
    Substitution,
    Term,
    TermKind,
    ValidationError,
    apply_substitution,
    compose,
    dependency_problems,
    freeze_query,
    fresh_term,
    head_atom,
    replacement_allowed,
    schema_map,
    unfreeze_query,
)
from gchase.fileio import parse_atom, parse_term

from oracles import compose_pointwise

V, E, N, C = Term.var, Term.evar, Term.null, Term.const

labels = st.from_regex(r"[A-Za-z][A-Za-z0-9_]{0,6}", fullmatch=True)
indices = st.integers(min_value=1, max_value=50)
terms = st.one_of(
    st.integers(-1000, 1000).map(C),
    st.text(st.characters(blacklist_categories=("Cs",)), max_size=8).map(C),
    st.builds(V, labels, indices),
    st.builds(E, labels, indices),
    st.builds(N, labels, indices),
)

small_nulls = st.builds(N, st.sampled_from("abc"), st.integers(1, 3))
null_maps = st.dictionaries(small_nulls, st.one_of(small_nulls, st.integers(0, 3).map(C)), max_size=4)


class TestTerm:
    def test_rendering(self):
        assert C(3).render() == "3"
        assert C("Max").render() == "'Max'"
        assert V("module", 1).render() == "#V_module_1"
        assert E("score", 1).render() == "#E_score_1"
        assert N("semester", 2).render() == "#N_semester_2"

    def test_quote_escaping(self):
        assert C("it's").render() == "'it''s'"
        assert parse_term("'it''s'") == C("it's")

    def test_integer_and_text_constants_differ(self):
        assert C(3) != C("3")

    @pytest.mark.parametrize("kind", [TermKind.NULL, TermKind.UNIVERSAL, TermKind.EXISTENTIAL])
    def test_non_constants_need_label_and_index(self, kind):
        with pytest.raises(ValueError):
            Term(kind, "a")
        with pytest.raises(ValueError):
            Term(kind, "a", 0)

    def test_constant_rejects_index(self):
        with pytest.raises(ValueError):
            Term(TermKind.CONSTANT, 3, 1)

    @given(terms)
    def test_render_parse_round_trip(self, t):
        assert parse_term(t.render()) == t

    def test_label_with_underscores(self):
        assert parse_term("#V_course_name_12") == V("course_name", 12)


class TestGeneralizedInstance:
    def test_instance_rejects_variables(self):
        with pytest.raises(ValidationError):
            GeneralizedInstance(frozenset({Atom("R", (V("a", 1),))}))

    def test_query_rejects_nulls(self):
        with pytest.raises(ValidationError):
            GeneralizedInstance(frozenset({Atom("R", (N("a", 1),))}), ObjectKind.QUERY)

    def test_set_semantics(self):
        a = Atom("R", (C(1),))
        assert len(GeneralizedInstance(frozenset([a, Atom("R", (C(1),))]))) == 1

    def test_schema_arity(self):
        schema = schema_map([RelationSchema("student", ("id", "name", "course"))])
        q = Query((Atom("student", (C(3), C("Max"))),), head_atom(()))
        with pytest.raises(SchemaMismatch):
            freeze_query(q, schema)


class TestApplySubstitution:
    def test_identity(self):
        a = parse_atom("student(3,'Max','Math')")
        assert apply_substitution(Substitution.identity(), a) == a

    def test_specialise_query_tuple(self):
        s = Substitution({V("id", 1): C(3), V("course", 1): C("Math")}, RuleSet.BODY)
        got = apply_substitution(s, parse_atom("student(#V_id_1,'Max',#V_course_1)"))
        assert got == parse_atom("student(3,'Max','Math')")

    def test_head_rules_cannot_rewrite_nulls(self):
        s = Substitution({N("a", 1): C(2)}, RuleSet.HEAD)
        with pytest.raises(RuleViolation):
            apply_substitution(s, parse_atom("R(#N_a_1)"))

    def test_constants_are_fixed(self):
        s = Substitution({C(1): C(2)}, RuleSet.INSTANCE)
        with pytest.raises(RuleViolation):
            apply_substitution(s, parse_atom("R(1)"))

    @given(terms, terms, st.sampled_from(list(RuleSet)))
    def test_instance_rules(self, source, target, rules):
        s = Substitution({source: target}, rules)
        try:
            out = apply_substitution(s, Atom("R", (source,)))
        except RuleViolation:
            return
        image = out.terms[0]
        if source.is_constant:
            assert image == source
        if rules is RuleSet.INSTANCE and source.kind is TermKind.UNIVERSAL:
            assert image == source or image.is_constant


# Allowed replacements, enumerated rule by rule (constant, null, universal,
# existential targets) for each source kind and rule set.
RULE_TABLE = {
    (TermKind.NULL, RuleSet.BODY): set(),
    (TermKind.NULL, RuleSet.HEAD): set(),
    (TermKind.NULL, RuleSet.INSTANCE): {"C", "N"},
    (TermKind.EXISTENTIAL, RuleSet.BODY): set(),
    (TermKind.EXISTENTIAL, RuleSet.HEAD): {"C", "N", "V", "E"},
    (TermKind.EXISTENTIAL, RuleSet.INSTANCE): {"C", "V", "E"},
    (TermKind.UNIVERSAL, RuleSet.BODY): {"C", "N", "V", "E"},
    (TermKind.UNIVERSAL, RuleSet.HEAD): {"C", "N", "V", "E"},
    (TermKind.UNIVERSAL, RuleSet.INSTANCE): {"C"},
}


@pytest.mark.parametrize("source_kind,rules", sorted(RULE_TABLE, key=lambda k: (k[0].value, k[1].value)))
def test_rule_table(source_kind, rules):
    source = Term(source_kind, "s", 1)
    targets = {"C": C(9), "N": N("t", 1), "V": V("t", 1), "E": E("t", 1)}
    allowed = {name for name, t in targets.items() if replacement_allowed(source, t, rules)}
    assert allowed == RULE_TABLE[(source_kind, rules)]
    assert replacement_allowed(source, source, rules)


class TestCompose:
    def test_identity_left(self):
        s = Substitution({E("c", 1): V("c", 1)}, RuleSet.HEAD)
        assert compose(Substitution.identity(), s) == s

    def test_existential_then_constant(self):
        inner = Substitution({E("c", 1): V("c", 1)}, RuleSet.HEAD)
        outer = Substitution({V("c", 1): C("Math")}, RuleSet.HEAD)
        got = compose(outer, inner)
        assert got.mapping == {E("c", 1): C("Math"), V("c", 1): C("Math")}

    def test_null_chain(self):
        inner = Substitution({N("a", 1): N("b", 1)}, RuleSet.INSTANCE)
        outer = Substitution({N("b", 1): C(5)}, RuleSet.INSTANCE)
        assert compose(outer, inner)(N("a", 1)) == C(5)

    def test_incompatible_rule_sets(self):
        with pytest.raises(RuleViolation):
            compose(
                Substitution({N("a", 1): C(1)}, RuleSet.INSTANCE),
                Substitution({V("a", 1): C(1)}, RuleSet.BODY),
            )

    def test_composite_must_obey_rules(self):
        inner = Substitution({E("a", 1): V("b", 1)}, RuleSet.INSTANCE)
        outer = Substitution({V("b", 1): V("c", 1)}, RuleSet.INSTANCE)
        with pytest.raises(RuleViolation):
            compose(outer, inner)

    @given(null_maps, null_maps)
    def test_pointwise(self, outer_map, inner_map):
        outer = Substitution(outer_map, RuleSet.INSTANCE)
        inner = Substitution(inner_map, RuleSet.INSTANCE)
        domain = set(outer_map) | set(inner_map) | {N("z", 9)}
        got = compose(outer, inner)
        assert {t: got(t) for t in domain} == compose_pointwise(outer, inner, domain)


class TestFreeze:
    def test_frozen_instance_keeps_variables(self):
        q = Query((parse_atom("student(#E_id_1,#V_name_1,'Math')"),), head_atom([V("name", 1)]))
        inst, head = freeze_query(q)
        assert inst.kind is ObjectKind.QUERY
        assert inst.atoms == {parse_atom("student(#E_id_1,#V_name_1,'Math')")}
        assert head.terms == (V("name", 1),)

    def test_ground_query(self):
        q = Query((parse_atom("R(1,'a')"),), head_atom([C(1)]))
        inst, _ = freeze_query(q)
        assert inst.atoms == {parse_atom("R(1,'a')")}

    def test_two_atoms_share_variable(self):
        q = Query(
            (
                parse_atom("student(#V_id_1,#V_name_1,#E_course_1)"),
                parse_atom("student(#E_id_1,#V_name_1,#V_course_1)"),
            ),
            head_atom([V("id", 1), V("name", 1), V("course", 1)]),
        )
        inst, _ = freeze_query(q)
        assert len(inst) == 2
        assert all(V("name", 1) in a.terms for a in inst.atoms)

    def test_round_trip(self):
        body = (parse_atom("S(#V_b_1,#E_c_1)"), parse_atom("R(#V_a_1,#V_b_1)"))
        q = Query(body, head_atom([V("a", 1)]))
        inst, head = freeze_query(q)
        back = unfreeze_query(inst, head, Substitution.identity(RuleSet.HEAD))
        assert set(back.body) == set(body)
        assert back.head == q.head
        assert [a.relation for a in back.body] == ["R", "S"]

    def test_unfreeze_direct(self):
        atom = parse_atom("student(#V_id_1,#V_name_1,'Math')")
        inst = GeneralizedInstance(frozenset([atom]), ObjectKind.QUERY)
        q = unfreeze_query(inst, head_atom([V("name", 1)]), Substitution.identity(RuleSet.HEAD))
        assert q.body == (atom,) and q.head == head_atom([V("name", 1)])

    def test_unfreeze_head_untouched_by_unrelated_rewrite(self):
        atom = parse_atom("student(#V_id_1,#V_name_1,#V_c_1)")
        inst = GeneralizedInstance(frozenset([atom]), ObjectKind.QUERY)
        acc = Substitution({E("c", 1): V("c", 1)}, RuleSet.HEAD)
        q = unfreeze_query(inst, head_atom([V("name", 1)]), acc)
        assert q.head == head_atom([V("name", 1)])

    def test_unfreeze_rejects_existential_in_head(self):
        atom = parse_atom("R(#V_a_1,#E_b_1)")
        inst = GeneralizedInstance(frozenset([atom]), ObjectKind.QUERY)
        acc = Substitution({V("a", 1): E("b", 1)}, RuleSet.HEAD)
        with pytest.raises(RuleViolation):
            unfreeze_query(inst, head_atom([V("a", 1)]), acc)

    def test_query_head_rules(self):
        with pytest.raises(ValidationError):
            Query((parse_atom("R(#V_a_1,#E_b_1)"),), head_atom([E("b", 1)]))
        with pytest.raises(ValidationError):
            Query((parse_atom("R(#V_a_1,#E_b_1)"),), head_atom([V("z", 1)]))


class TestFresh:
    def test_continues_user_numbering(self):
        reg = FreshRegistry([N("semester", 1)])
        assert fresh_term(TermKind.NULL, "semester", reg) == N("semester", 2)

    def test_first_index_is_one(self):
        assert fresh_term(TermKind.NULL, "score", FreshRegistry()) == N("score", 1)

    def test_consecutive_calls_differ(self):
        reg = FreshRegistry()
        a = fresh_term(TermKind.EXISTENTIAL, "x", reg)
        b = fresh_term(TermKind.EXISTENTIAL, "x", reg)
        assert a != b

    def test_fills_smallest_gap(self):
        reg = FreshRegistry([N("a", 1), N("a", 3)])
        assert reg.fresh(TermKind.NULL, "a") == N("a", 2)
        assert reg.fresh(TermKind.NULL, "a") == N("a", 4)

    @given(st.lists(small_nulls, max_size=10), st.integers(1, 10))
    def test_never_reuses(self, existing, calls):
        reg = FreshRegistry(existing)
        issued = [reg.fresh(TermKind.NULL, "a") for _ in range(calls)]
        assert len(set(issued)) == calls
        assert not set(issued) & set(existing)


class TestDependencyProblems:
    def test_well_formed_tgd(self):
        d = Dependency.tgd("d", [parse_atom("R(#V_x_1)")], [parse_atom("S(#V_x_1,#E_y_1)")])
        assert dependency_problems(d) == []

    def test_existential_in_body(self):
        d = Dependency.tgd("d", [parse_atom("R(#E_x_1)")], [parse_atom("S(1,2)")])
        assert len(dependency_problems(d)) == 1

    def test_st_overlap(self):
        d = Dependency.tgd("d", [parse_atom("R(#V_x_1)")], [parse_atom("R(#V_x_1)")], source_target=True)
        assert "both body and head" in dependency_problems(d)[0]

    def test_egd_constant_side_is_fine(self):
        d = Dependency.egd("d", [parse_atom("R(#V_x_1)")], V("x", 1), C("a"))
        assert dependency_problems(d) == []
