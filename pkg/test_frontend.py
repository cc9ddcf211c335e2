"""
Tests for function flattening, clause closing and program/query loading.
"""
import logging

import pytest

from corpus import corpus_path
from formulas import Atom, Forall, Implies, New, free_names, free_variables
from frontend import (close_clause, flatten_functions, load_batch, load_program, load_text,
                      parse_query)
from syntax import parse_program, show_item
from terms import Name, Var
from typecheck import check_program
from utils import LoadError

FUNCTIONS = """
t : type.
c : t.
s : t -> t.
f :: t -> t.
p, q :: t -> o.
append :: (list A, list A) -> list A.
"""

NAMES = """
nm : name_type.
t : type.
c : t.
p :: (t, nm) -> o.
q :: t -> o.
aneq :: (nm, nm) -> o.
"""


def flattened(text):
    items = parse_program(FUNCTIONS + text)
    check_program(items)
    return [show_item(i) for i in flatten_functions(items)][-1]


class TestFlattening:
    def test_function_fact(self):
        assert flattened("append([], M) = M.") == "appendp([],M,M)."

    def test_call_in_the_result(self):
        assert (flattened("append([X|L], M) = [X|append(L, M)].")
                == "appendp([X|L],M,[X|R]) :- appendp(L,M,R).")

    def test_guarded_function_clause(self):
        assert flattened("f(s(X)) = X :- q(X).") == "fp(s(X),X) :- q(X)."

    def test_call_in_a_body_atom(self):
        assert flattened("p(X) :- q(f(X)).") == "p(X) :- exists R. fp(X,R), q(R)."

    def test_equation_with_a_call(self):
        assert flattened("p(X) :- X = f(c).") == "p(X) :- fp(c,X)."

    def test_clause_without_calls_is_unchanged(self):
        assert flattened("p(X) :- q(X).") == "p(X) :- q(X)."

    def test_lambda_substitution(self, load_corpus):
        program = load_corpus("lambda.apl")
        flat = [show_item(i) for i in flatten_functions(program.items) if hasattr(i, "head")]
        assert "substp(var(Y),E,X,var(Y)) :- X # Y." in flat


class TestClosing:
    def test_names_then_variables(self):
        program = load_text(NAMES + "p(X, a) :- q(X).")
        formula = program.clauses[0].formula
        assert isinstance(formula, New) and formula.name.stem == "a"
        assert isinstance(formula.body, Forall) and formula.body.var.stem == "X"
        assert isinstance(formula.body.body, Implies)
        assert free_names(formula) == [] and free_variables(formula) == []

    def test_names_in_order_of_occurrence(self):
        formula = load_text(NAMES + "aneq(x, y) :- x # y.").clauses[0].formula
        assert formula.name.stem == "x"
        assert formula.body.name.stem == "y"

    def test_ground_fact_is_unchanged(self):
        formula = load_text(NAMES + "q(c).").clauses[0].formula
        assert isinstance(formula, Atom)

    def test_close_clause_directly(self):
        a = Name("a", "nm")
        x = Var(1, "X")
        closed = close_clause(Atom("p", (x, a)))
        assert closed == New(a, Forall(x, Atom("p", (x, a))))


class TestLoading:
    def test_multiple_files_share_a_signature(self):
        program = load_program([("decls.apl", "t : type.\nc : t.\np :: t -> o."), ("facts.apl", "p(c).")])
        assert len(program.clauses) == 1
        assert program.clauses[0].location[0] == "facts.apl"
        assert [c.head.pred for c in program.clauses_for("p")] == ["p"]

    def test_missing_file(self, tmp_path):
        with pytest.raises(LoadError, match="cannot read program"):
            load_program([str(tmp_path / "missing.apl")])

    def test_embedded_queries(self):
        program = load_text(NAMES + "q(c).\n?- q(c). %expect yes")
        [query] = program.queries
        assert query.text == "?- q(c)."
        assert query.expect == "yes"

    def test_batch(self):
        queries = load_batch(text="?- true. %expect yes\n?- p(c).\n")
        assert [(q.text, q.expect) for q in queries] == [("?- true.", "yes"), ("?- p(c).", None)]

    def test_batch_rejects_clauses(self):
        with pytest.raises(LoadError, match="only contain queries"):
            load_batch(text="p(c).")

    def test_nu_goal_warnings_are_logged(self, caplog):
        with caplog.at_level(logging.WARNING):
            load_program([corpus_path("incomplete.apl")], check_nu_goal=True)
        warnings = [r.getMessage() for r in caplog.records if r.levelno == logging.WARNING]
        assert len(warnings) == 2
        assert all("not nu-goal" in w for w in warnings)


class TestQueries:
    def test_variables_in_order(self):
        program = load_text(NAMES)
        query = parse_query("p(Y, a), q(X)", program)
        assert [name for name, _ in query.variables] == ["Y", "X"]
        assert [n.stem for n in query.names] == ["a"]

    def test_free_names_are_fresh_per_query(self):
        program = load_text(NAMES)
        first = parse_query("p(c, a)", program).names[0]
        second = parse_query("p(c, a)", program).names[0]
        assert first != second

    def test_function_call_in_query(self, load_corpus):
        query = parse_query("X = subst(var(y), var(x), y)", load_corpus("lambda.apl"))
        assert query.goal.pred == "substp"
        assert [name for name, _ in query.variables] == ["X"]

    def test_type_error(self):
        with pytest.raises(LoadError):
            parse_query("q(a)", load_text(NAMES))
