"""
Tests for clause elaboration, the nu-goal translation and incompleteness
diagnostics.
"""
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from corpus import COMPLETE_PROGRAMS, CORPUS_PROGRAMS
from elaborator import (Diagnostic, elaborate, escaping_names, is_nu_goal, normalize, nu_goal_translate,
                        rewrite_step, to_elaborated, warn_incomplete)
from formulas import (TOP, And, Atom, Eq, ElaboratedClause, Exists, Forall, Fresh, Implies, New,
                      conjuncts, free_variables, show_clause, show_formula)
from terms import Abs, App, Name, fresh_var

A = Name("a", "id")
X, Y = fresh_var("X"), fresh_var("Y")
P = Atom("p", (X,))
Q = Atom("q", (A,))
G = Atom("g", (X,))


def only_rule(formula):
    """The rule names of every redex in a single clause formula."""
    rules = []
    rewrite_step([formula], lambda names: rules.extend(names) or 0)
    return rules


class TestRewriting:
    @pytest.mark.parametrize("formula, rule", [
        (Implies(G, TOP), "imp-top"),
        (Implies(G, Implies(Q, P)), "imp-imp"),
        (Implies(G, And(P, Q)), "imp-and"),
        (Implies(G, Forall(Y, Atom("r", (Y,)))), "imp-forall"),
        (Implies(G, New(A, Q)), "imp-new"),
        (Forall(X, TOP), "forall-top"),
        (Forall(X, And(P, G)), "forall-and"),
        (Forall(X, New(A, P)), "forall-new"),
        (New(A, TOP), "new-top"),
        (New(A, And(Q, P)), "new-and"),
    ])
    def test_root_rules(self, formula, rule):
        assert rule in only_rule(formula)

    def test_program_rules(self):
        assert only_rule(And(P, Q))[0] == "split"
        assert only_rule(TOP) == ["drop-top"]

    def test_normal_form_has_no_redex(self):
        assert rewrite_step([New(A, Forall(X, Implies(G, P)))]) is None

    def test_forall_over_new(self):
        [result] = normalize([Forall(X, New(A, P))])
        assert result == New(A, Forall(X, Implies(Fresh(A, X), P)))

    def test_implication_chain(self):
        [clause] = elaborate([Implies(G, Implies(Q, P))])
        assert clause.body == And(G, Q)
        assert clause.head == P

    def test_hoisting_renames_captured_variables(self):
        [clause] = elaborate([Implies(G, Forall(X, P))])
        [var] = clause.variables
        assert var.id != X.id
        assert clause.head == Atom("p", (var,))
        assert clause.body == G

    def test_conjunction_splits(self):
        clauses = elaborate([Implies(G, And(P, Q))])
        assert [c.head for c in clauses] == [P, Q]
        assert all(c.body == G for c in clauses)

    def test_trivial_clauses_vanish(self):
        assert elaborate([TOP, Implies(G, TOP), New(A, TOP)]) == []


# ---------------------------------------------------------------------------
# Termination and confluence on random clause formulas

heads = st.sampled_from([P, Q, Atom("r", ()), TOP])
goals = st.sampled_from([G, Fresh(A, X), Eq(X, Y), TOP, Atom("h", (A, Y))])
clause_formulas = st.recursive(
    heads,
    lambda d: st.one_of(
        st.builds(And, d, d),
        st.builds(Implies, goals, d),
        st.builds(lambda body: Forall(X, body), d),
        st.builds(lambda body: Forall(Y, body), d),
        st.builds(lambda body: New(A, body), d)),
    max_leaves=6)


def canonical(clause):
    """
    A clause up to renaming of its bound names and variables, with its body
    as a multiset of conjuncts.
    """
    labels = {n.id: f"n{i}" for i, n in enumerate(clause.names)}
    labels.update({v.id: f"v{i}" for i, v in enumerate(clause.variables)})
    body = sorted(show_formula(g, labels) for g in conjuncts(clause.body))
    return len(clause.names), len(clause.variables), show_formula(clause.head, labels), tuple(body)


@given(st.lists(clause_formulas, max_size=3))
def test_normalize_terminates_in_normal_form(formulas):
    normal = normalize(formulas)
    assert rewrite_step(normal) is None
    for d in normal:
        to_elaborated(d)


@given(st.lists(clause_formulas, max_size=3), st.integers(min_value=0))
def test_elaboration_is_confluent(formulas, seed):
    rng = random.Random(seed)
    first = sorted(canonical(c) for c in elaborate(formulas))
    last = sorted(canonical(c) for c in elaborate(formulas, lambda rules: len(rules) - 1))
    shuffled = sorted(canonical(c) for c in elaborate(formulas, lambda rules: rng.randrange(len(rules))))
    assert first == last == shuffled


@given(st.lists(clause_formulas, max_size=3))
def test_elaboration_is_idempotent(formulas):
    once = elaborate(formulas)
    twice = elaborate([c.to_formula() for c in once])
    assert [(c.names, c.variables, c.body, c.head) for c in twice] == \
           [(c.names, c.variables, c.body, c.head) for c in once]


def test_corpus_elaboration_is_idempotent(load_corpus):
    for files in CORPUS_PROGRAMS.values():
        once = load_corpus(*files).elaborated
        twice = elaborate([c.to_formula() for c in once])
        assert [show_clause(c) for c in twice] == [show_clause(c) for c in once]


# ---------------------------------------------------------------------------
# nu-goal clauses

class TestNuGoal:
    def test_classification(self):
        assert is_nu_goal(ElaboratedClause((), (X,), G, P))
        assert is_nu_goal(ElaboratedClause((), (X,), New(A, Fresh(A, X)), P))
        assert not is_nu_goal(ElaboratedClause((A,), (), TOP, Q))
        assert not is_nu_goal(New(A, Q))
        assert is_nu_goal(Implies(New(A, Fresh(A, X)), P))

    def test_translate_fact(self):
        clause = ElaboratedClause((A,), (), TOP, Atom("p", (A,)))
        result = nu_goal_translate(clause)
        [z] = result.variables
        assert result.names == ()
        assert result.head == Atom("p", (z,))
        assert result.body == New(A, Eq(A, z))
        assert is_nu_goal(result)

    def test_translate_quantified_clause(self):
        # new a. forall X. q(a\X, X)
        x = fresh_var("X")
        clause = ElaboratedClause((A,), (x,), TOP, Atom("q", (Abs(A, x), x)))
        result = nu_goal_translate(clause)
        z1, z2 = result.variables
        assert result.body == New(A, Exists(x, And(Eq(Abs(A, x), z1), Eq(x, z2))))
        assert not free_variables(result.to_formula())

    def test_translation_keeps_the_body(self):
        clause = ElaboratedClause((A,), (X,), Fresh(A, X), Atom("p", (App("f", (X,)),)))
        result = nu_goal_translate(clause)
        [z] = result.variables
        assert result.body == New(A, Exists(X, And(Eq(App("f", (X,)), z), Fresh(A, X))))

    def test_corpus_translations_are_nu_goal(self, load_corpus):
        program = load_corpus("pi.apl", "dyadic.apl", "cbv.apl")
        for clause in program.elaborated:
            assert is_nu_goal(nu_goal_translate(clause, program.signature))


class TestDiagnostics:
    def test_escaping_name(self):
        assert escaping_names(ElaboratedClause((A,), (), TOP, Q)) == [A]

    def test_guarded_variable(self):
        clause = ElaboratedClause((A,), (X,), Fresh(A, X), Atom("p", (X,)))
        assert escaping_names(clause) == []

    def test_unguarded_variable(self):
        clause = ElaboratedClause((A,), (X,), G, Atom("p", (X,)))
        assert escaping_names(clause) == [A]

    def test_bound_in_head(self):
        clause = ElaboratedClause((A,), (X,), TOP, Atom("p", (Abs(A, X),)))
        assert escaping_names(clause) == []

    def test_translation_uses_display_labels(self):
        z = fresh_var("Z")
        clause = ElaboratedClause((A,), (), TOP, Q)
        translation = ElaboratedClause((), (z,), TOP, Atom("q", (z,)))
        text = str(Diagnostic(clause, (A,), translation))
        assert "nu-goal:   forall Z_1. q(Z_1)." in text

    def test_incomplete_program(self, load_corpus):
        program = load_corpus("incomplete.apl")
        diagnostics = warn_incomplete(program.elaborated, program.signature)
        assert [d.clause.head.pred for d in diagnostics] == ["p", "spec"]
        assert str(diagnostics[0]).split(": ", 1)[1].startswith("warning: clause is not nu-goal")
        assert str(diagnostics[0]).startswith(program.elaborated[0].location[0])

    @pytest.mark.parametrize("files", list(CORPUS_PROGRAMS.values()) + [["desk.apl"]])
    def test_complete_programs(self, load_corpus, files):
        assert set(files) <= set(COMPLETE_PROGRAMS)
        program = load_corpus(*files)
        assert warn_incomplete(program.elaborated, program.signature) == []
