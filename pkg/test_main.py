"""
Tests for the command-line driver: expectations, batch runs, the REPL and
exit codes.
"""
import pytest

from config import EXIT_LOAD_ERROR, EXIT_MISMATCH, EXIT_OK, SessionConfig
from corpus import corpus_path
from frontend import load_text
from main import (build_parser, check_expectation, main, parse_expectation, run_query, run_repl,
                  session_config)
from utils import NomlogError

GRAPH = """
node : type.
n1, n2, n3 : node.
edge, path :: (node, node) -> o.
edge(n1, n2).
edge(n2, n3).
path(X, Y) :- edge(X, Y).
path(X, Z) :- edge(X, Y), path(Y, Z).
"""


def scripted(*lines):
    """A `read` function replaying lines, then signalling end of input."""
    remaining = iter(lines)

    def read(prompt):
        try:
            return next(remaining)
        except StopIteration:
            raise EOFError
    return read


@pytest.fixture
def graph_file(tmp_path):
    path = tmp_path / "graph.apl"
    path.write_text(GRAPH)
    return str(path)


class TestExpectations:
    def test_parse(self):
        assert parse_expectation("yes") == ("yes", None)
        assert parse_expectation("count=3") == ("count", 3)
        with pytest.raises(NomlogError):
            parse_expectation("maybe")

    def test_matches(self):
        assert check_expectation("yes", 2, "Yes.") is None
        assert check_expectation("no", 0, "No.") is None
        assert check_expectation("count=2", 2, "Yes.") is None

    def test_mismatches(self):
        assert check_expectation("yes", 0, "No.") == "MISMATCH: expected yes, got no"
        assert check_expectation("count=1", 2, "Yes.") == "MISMATCH: expected count=1, got count=2"
        assert "expected no, got depth limit exceeded" in check_expectation(
            "no", 0, "Depth limit exceeded.")


class TestRunQuery:
    def test_answers_and_status(self):
        lines = []
        assert run_query(load_text(GRAPH), "?- path(n1, Y).", SessionConfig(), lines.append)
        assert lines == ["?- path(n1, Y).", "Y = n2", ";", "Y = n3", "Yes."]

    def test_count_mismatch(self):
        lines = []
        ok = run_query(load_text(GRAPH), "?- path(n1, Y).", SessionConfig(), lines.append, "count=1")
        assert not ok
        assert lines[-1] == "MISMATCH: expected count=1, got count=2"

    def test_shown_answers_are_limited(self):
        lines = []
        config = SessionConfig(max_solutions=1)
        assert run_query(load_text(GRAPH), "?- path(X, Y).", config, lines.append, "count=3")
        assert lines.count(";") == 0

    def test_trace(self):
        lines = []
        run_query(load_text(GRAPH), "?- edge(n1, X).", SessionConfig(trace=True), lines.append)
        assert any(" | " in line for line in lines)


class TestRepl:
    def test_next_answer_on_semicolon(self):
        lines = []
        read = scripted("path(n1, Y).", ";", ";")
        assert run_repl(load_text(GRAPH), SessionConfig(), read, lines.append) == EXIT_OK
        assert lines == ["Y = n2", "Y = n3", "No.", ""]

    def test_accepting_an_answer(self):
        lines = []
        run_repl(load_text(GRAPH), SessionConfig(), scripted("path(n1, Y).", ""), lines.append)
        assert lines == ["Y = n2", "Yes.", ""]

    def test_ground_query(self):
        lines = []
        run_repl(load_text(GRAPH), SessionConfig(), scripted("edge(n1, n2)."), lines.append)
        assert lines == ["Yes.", ""]

    def test_multi_line_query(self):
        lines = []
        run_repl(load_text(GRAPH), SessionConfig(), scripted("edge(n1,", "n3)."), lines.append)
        assert lines == ["No.", ""]

    def test_parse_error_keeps_the_session(self):
        lines = []
        run_repl(load_text(GRAPH), SessionConfig(), scripted("edge(.", "edge(n1, n2)."), lines.append)
        assert lines[0].startswith("Error reading query:")
        assert lines[1:] == ["Yes.", ""]


class TestMain:
    def test_embedded_and_batch_queries(self, tmp_path, graph_file):
        batch = tmp_path / "graph.batch"
        batch.write_text("?- path(n1, n3). %expect yes\n?- path(n3, X). %expect no\n")
        assert main([graph_file, "--batch", str(batch)], out=lambda line: None) == EXIT_OK

    def test_mismatch_exit_code(self, tmp_path, graph_file):
        batch = tmp_path / "graph.batch"
        batch.write_text("?- path(n1, X). %expect count=1\n")
        lines = []
        assert main([graph_file, "--batch", str(batch)], out=lines.append) == EXIT_MISMATCH
        assert "MISMATCH: expected count=1, got count=2" in lines

    def test_load_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.apl"
        bad.write_text("p(.")
        lines = []
        assert main([str(bad)], out=lines.append) == EXIT_LOAD_ERROR
        assert lines[0].startswith("Error loading program:")

    def test_invalid_configuration(self, graph_file):
        assert main([graph_file, "--depth", "0"], out=lambda line: None) == EXIT_LOAD_ERROR

    def test_oracle_excludes_batch(self, tmp_path, graph_file):
        batch = tmp_path / "graph.batch"
        batch.write_text("?- true.\n")
        argv = [graph_file, "--oracle", "1", "2", "--batch", str(batch)]
        assert main(argv, out=lambda line: None) == EXIT_LOAD_ERROR

    def test_oracle(self, graph_file):
        lines = []
        assert main([graph_file, "--oracle", "1", "2"], out=lines.append) == EXIT_OK
        assert lines[-1].splitlines()[0] == "edge(n1,n2)"
        assert "path(n1,n3)" in lines[-1].splitlines()

    def test_interactive_session(self, graph_file):
        lines = []
        assert main([graph_file], read=scripted("edge(X, n3)."), out=lines.append) == EXIT_OK
        assert lines == ["X = n2", ""]

    def test_nu_goal_check(self):
        lines = []
        main([corpus_path("incomplete.apl"), "--check-nu-goal"], read=scripted(), out=lines.append)
        assert any("warning: clause is not nu-goal" in line for line in lines)

    def test_show_elaborated(self, graph_file):
        lines = []
        main([graph_file, "--show-elaborated"], read=scripted(), out=lines.append)
        assert "edge(n1,n2)." in lines
        assert "forall X,Y. path(X,Y) :- edge(X,Y)." in lines


class TestSessionConfig:
    def test_flags_override_the_file(self, tmp_path, graph_file):
        config_file = tmp_path / "session.yaml"
        config_file.write_text(f"depth_limit: 50\ntrace: true\nprogram_files: [{graph_file}]\n")
        args = build_parser().parse_args(["--config", str(config_file), "--depth", "70"])
        config = session_config(args)
        assert config.depth_limit == 70
        assert config.trace
        assert config.program_files == [graph_file]

    def test_oracle_flag(self):
        config = session_config(build_parser().parse_args(["--oracle", "2", "3"]))
        assert config.oracle == (2, 3)
        assert not config.interactive
