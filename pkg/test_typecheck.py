"""
Tests for signatures and type inference.
"""
import pytest

from frontend import load_text
from sorts import TCon, TVar, list_of, pair_of, show_sort
from syntax import parse_program
from typecheck import build_signature, check_program
from utils import TypeCheckError

LISTS = """
t : type.
c : t.
head :: (A, list A) -> o.
"""


def check(text, filename="test.apl"):
    return check_program(parse_program(text, filename), filename)


class TestSorts:
    def test_show(self):
        assert show_sort(list_of(pair_of(TCon("id"), TCon("ty")))) == "list (id,ty)"
        assert show_sort(TCon("abs", (TCon("chan"), TCon("proc")))) == "<chan>proc"
        assert show_sort(list_of(list_of(TVar("A")))) == "list (list A)"


class TestSignature:
    def test_declarations(self):
        sig, errors = build_signature(parse_program("id : name_type.\nexp : type.\nvar : id -> exp."))
        assert errors == []
        assert sig.is_name_sort(TCon("id"))
        assert sig.constructors["var"] == ([TCon("id")], TCon("exp"))

    def test_abbreviation_is_expanded(self):
        sig = check("id : name_type.\nty : type.\ntype ctx = list (id, ty).\nok :: ctx -> o.")
        assert sig.defined["ok"] == ([list_of(pair_of(TCon("id"), TCon("ty")))], TCon("o"))

    def test_functions_get_flattened_predicates(self):
        sig = check("t : type.\nf :: t -> t.")
        assert sig.is_function("f")
        assert sig.is_predicate("fp")
        assert sig.defined["fp"] == ([TCon("t"), TCon("t")], TCon("o"))

    def test_may_contain(self, load_corpus):
        sig = load_corpus("lambda.apl").signature
        assert sig.may_contain(TCon("exp"), "id")
        assert not sig.may_contain(TCon("ty"), "id")
        assert sig.may_contain(TCon("ty"), "tid")
        assert sig.may_contain(TVar("A"), "id")


class TestClauses:
    def test_polymorphic_clause(self):
        check(LISTS + "head(X, [X|L]).")

    def test_specialized_clause_is_rejected(self):
        with pytest.raises(TypeCheckError, match="not parametric"):
            check("head :: (A, list A) -> o.\nhead(1, [1|L]).")

    def test_constructor_must_preserve_types(self):
        with pytest.raises(TypeCheckError, match="not type-preserving"):
            check("hlist : type.\nhcons : (A, hlist) -> hlist.")

    def test_duplicate_declaration(self):
        with pytest.raises(TypeCheckError, match="duplicate declaration of t"):
            check("t : type.\nt : type.")

    def test_unknown_predicate(self):
        with pytest.raises(TypeCheckError, match="unknown predicate q"):
            check(LISTS + "head(X, L) :- q(X).")

    def test_type_mismatch(self):
        with pytest.raises(TypeCheckError, match="type mismatch"):
            check("t : type.\nu : type.\nc : t.\np :: u -> o.\np(c).")

    def test_names_need_a_name_type(self):
        with pytest.raises(TypeCheckError, match="not a name type"):
            check("t : type.\np :: t -> o.\np(x).")

    def test_swapped_names_take_the_only_name_type(self):
        program = load_text("nm : name_type.\nt : type.\nq :: (t, t) -> o.\nq(X, (a~b)X).")
        [clause] = program.elaborated
        assert {n.name_type for n in clause.names} == {"nm"}

    def test_swapped_names_with_several_name_types(self):
        with pytest.raises(TypeCheckError, match="cannot determine the name type of a"):
            check("nm : name_type.\nid : name_type.\nt : type.\nq :: (t, t) -> o.\nq(X, (a~b)X).")

    def test_abstraction_over_a_data_type(self):
        with pytest.raises(TypeCheckError, match="not a name type"):
            check("t : type.\nb : <t>t -> t.")

    def test_all_errors_are_reported_with_locations(self):
        with pytest.raises(TypeCheckError) as info:
            check(LISTS + "head(X, L) :- q(X).\nhead(X, L) :- r(X).")
        assert len(info.value.errors) == 2
        assert str(info.value).splitlines()[0].startswith("test.apl:5:")

    def test_query_type_errors(self):
        with pytest.raises(TypeCheckError, match="unknown predicate"):
            load_text(LISTS + "?- nothing(c).")


class TestCorpus:
    def test_lambda_signature(self, load_corpus):
        sig = load_corpus("lambda.apl").signature
        assert sig.is_predicate("substp")
        assert sig.defined["mem"] == ([TVar("A"), list_of(TVar("A"))], TCon("o"))
