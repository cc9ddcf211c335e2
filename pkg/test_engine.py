"""
Tests for proof search: transitions, backchaining, answers and limits.
"""
import re

import pytest

from engine import Answer, Engine, Limits, MachineState, backchain, derivable, freshen_clause, solve
from formulas import TOP, And, Atom, ElaboratedClause, Eq, Exists, Fresh, New, Or
from frontend import load_text, parse_query
from terms import Abs, App, Const, Name, alpha_eq, fresh_var, is_ground
from utils import DepthLimitExceeded

GRAPH = """
node : type.
n1, n2, n3 : node.
edge, path :: (node, node) -> o.
edge(n1, n2).
edge(n2, n3).
path(X, Y) :- edge(X, Y).
path(X, Z) :- edge(X, Y), path(Y, Z).
"""

LOOP = """
loop :: o.
loop :- loop.
"""

LINK = """
nm : name_type.
t : type.
n : nm -> t.
b : <nm>t -> t.
link :: (A, A) -> o.
link(X, Y) :- X = Z.
"""


def answers(program, text, **limits):
    return list(solve(parse_query(text, program), program, Limits(**limits)))


def name_in(query, stem):
    return next(n for n in query.names if n.stem == stem)


class TestTransitions:
    def setup_method(self):
        self.engine = Engine(load_text(GRAPH))

    def step(self, goal):
        return self.engine.step(MachineState((), (goal, TOP)))

    def test_conjunction_pushes_both_goals(self):
        [state] = self.step(And(TOP, Atom("q")))
        assert state.goals == (TOP, Atom("q"), TOP)
        assert state.via[0] == "and"

    def test_disjunction_branches_left_first(self):
        left, right = self.step(Or(Atom("p"), Atom("q")))
        assert (left.via[0], right.via[0]) == ("or-left", "or-right")
        assert left.goals[0] == Atom("p")

    def test_exists_introduces_a_variable(self):
        x = fresh_var("X")
        [state] = self.step(Exists(x, Eq(x, Const("n1"))))
        [introduced] = state.sigma
        assert introduced.id != x.id
        assert state.goals[0] == Eq(introduced, Const("n1"))

    def test_new_introduces_a_guarded_name(self):
        a = Name("a", "nm")
        x = fresh_var("X")
        [state] = self.step(New(a, Fresh(a, x)))
        [fresh] = state.sigma
        assert fresh != a
        assert state.goals[0] == Fresh(fresh, x)
        assert fresh in state.store.guards

    def test_inconsistent_constraint_is_a_failure_leaf(self):
        assert self.step(Eq(Const("n1"), Const("n2"))) == []

    def test_backchaining_candidates(self):
        successors = self.step(Atom("path", (Const("n1"), Const("n3"))))
        assert [s.via[0] for s in successors] == ["backchain", "backchain"]

    def test_depth_counts_transitions(self):
        [state] = self.step(TOP)
        assert state.depth == 1


class TestBackchaining:
    def test_freshen_renames_everything(self):
        a = Name("a", "nm")
        x = fresh_var("X")
        clause = ElaboratedClause((a,), (x,), Fresh(a, x), Atom("p", (x,)))
        fresh = freshen_clause(clause)
        [b], [y] = fresh.names, fresh.variables
        assert b != a and y.id != x.id
        assert fresh.body == Fresh(b, y)
        assert fresh.head == Atom("p", (y,))

    def test_ground_clause_is_shared(self):
        clause = ElaboratedClause((), (), TOP, Atom("q"))
        assert freshen_clause(clause) is clause

    def test_residual_goal(self):
        a = Name("a", "nm")
        x = fresh_var("X")
        clause = ElaboratedClause((a,), (x,), Fresh(a, x), Atom("p", (x,)))
        goal = backchain(Atom("p", (Const("c"),)), clause)
        assert goal == New(a, Exists(x, And(Eq(App("p", (x,)), App("p", (Const("c"),))), Fresh(a, x))),
                           outer=True)

    def test_predicate_mismatch(self):
        clause = ElaboratedClause((), (), TOP, Atom("q"))
        assert backchain(Atom("p"), clause) is None


class TestSearch:
    def test_answers_in_clause_order(self):
        found = answers(load_text(GRAPH), "path(n1, Y)")
        assert [str(a) for a in found] == ["Y = n2", "Y = n3"]

    def test_ground_success_prints_yes(self):
        [answer] = answers(load_text(GRAPH), "true")
        assert str(answer) == "yes"
        assert answer.lines() == []

    def test_failure(self):
        assert answers(load_text(GRAPH), "path(n3, Y)") == []

    def test_name_variable_through_a_polymorphic_clause(self):
        program = load_text(LINK)
        assert len(answers(program, "exists B. n(B) = n(B), B # b(x\\n(x))")) == 1
        [answer] = answers(program, "exists B. n(B) = n(B), link(B, W), B # b(x\\n(x))")
        assert answer.unbound == ("W",)
        assert str(answer) == "yes"

    def test_unbound_variables_are_not_printed(self):
        [answer] = answers(load_text(LINK), "link(n(a), W)")
        assert answer.lines() == []

    def test_solution_limit(self):
        assert len(answers(load_text(GRAPH), "path(X, Y)", solutions=2)) == 2

    def test_depth_limit(self):
        with pytest.raises(DepthLimitExceeded):
            answers(load_text(LOOP), "loop", depth=50)

    def test_answers_before_the_cut_are_delivered(self):
        program = load_text(GRAPH + LOOP)
        query = parse_query("path(n1, n2) ; loop", program)
        results = Engine(program, Limits(depth=50)).solve(query)
        assert isinstance(next(results), Answer)
        with pytest.raises(DepthLimitExceeded):
            next(results)

    def test_derivable(self):
        program = load_text(GRAPH)
        assert derivable(Atom("path", (Const("n1"), Const("n3"))), program)
        assert not derivable(Atom("path", (Const("n3"), Const("n1"))), program)

    def test_trace(self):
        lines = []
        program = load_text(GRAPH)
        list(solve(parse_query("edge(n1, X)", program), program, trace_callback=lines.append))
        assert lines
        for line in lines:
            rule, goal, size = line.split(" | ")
            assert rule in {"true", "and", "or-left", "or-right", "exists", "new", "constraint", "backchain"}
            assert size.isdigit()
        assert lines[0].startswith("backchain | edge(n1,X)")


class TestCorpusQueries:
    def test_principal_type(self, load_corpus):
        [answer] = answers(load_corpus("lambda.apl"), "tc([], lam(x\\lam(y\\var(x))), T)")
        [line] = answer.lines()
        match = re.fullmatch(r"T = arrTy\((\w+),arrTy\((\w+),\1\)\)", line)
        assert match and match.group(1) != match.group(2)

    def test_capture_avoiding_substitution(self, load_corpus):
        program = load_corpus("lambda.apl")
        query = parse_query("substp(lam(x\\var(y)), var(x), y, X)", program)
        [answer] = list(solve(query, program))
        [(_, result)] = answer.bindings
        x = name_in(query, "x")
        z = Name("z", "id")
        assert alpha_eq(result, App("lam", (Abs(z, App("var", (x,))),)))
        assert not alpha_eq(result, App("lam", (Abs(x, App("var", (x,))),)))

    def test_alpha_inequivalence(self, load_corpus):
        program = load_corpus("lambda.apl")
        assert answers(program, "aneq(lam(x\\var(x)), lam(y\\var(y)))") == []
        assert answers(program, "aneq(lam(x\\var(x)), lam(y\\var(z)))")

    def test_scope_extrusion(self, load_corpus):
        program = load_corpus("pi.apl")
        [answer] = answers(program, "step(res(x\\par(res(y\\out(x, y, ina)), in(x, z\\out(z, x, ina)))), A, P)")
        bindings = dict(answer.bindings)
        assert bindings["A"] == Const("tau_a")
        assert is_ground(bindings["P"])
        outer, inner = Name("u", "chan"), Name("v", "chan")
        sent = App("par", (Const("ina"), App("out", (inner, outer, Const("ina")))))
        expected = App("res", (Abs(outer, App("res", (Abs(inner, sent),))),))
        assert alpha_eq(bindings["P"], expected)

    def test_restricted_channel_cannot_be_observed(self, load_corpus):
        assert answers(load_corpus("pi.apl"), "step(res(x\\out(x, y, ina)), A, P)") == []

    def test_incomplete_clause(self, load_corpus):
        program = load_corpus("incomplete.apl")
        assert answers(program, "new b. p(b)") == []
        assert answers(program, "p(X)")
