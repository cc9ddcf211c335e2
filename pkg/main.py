#!/usr/bin/env python3
"""
Entry point for the nomlog interpreter: loads programs and runs queries
interactively, from a batch file, or through the bottom-up oracle.

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
import argparse
import logging
import re
import sys

import elaborator
from config import (DEFAULT_BATCH_SOLUTIONS, EXIT_LOAD_ERROR, EXIT_MISMATCH, EXIT_OK, LOG_FORMAT,
                    MORE_PROMPT, PROMPT, ConfigError, SessionConfig, __version__,
                    load_session_config)
from engine import Engine, Limits
from formulas import show_clause
from frontend import load_batch, load_program, parse_query
from oracle import GroundUniverse, fixpoint, format_atoms
from utils import DepthLimitExceeded, LoadError, NomlogError, handle_error

logger = logging.getLogger(__name__)

STATUS_YES = "Yes."
STATUS_NO = "No."
STATUS_DEPTH = "Depth limit exceeded."


def build_parser():
    """Command-line interface definition."""
    parser = argparse.ArgumentParser(
        prog="nomlog",
        description="Interpreter for nominal logic programs with names, abstraction and freshness.")
    parser.add_argument("programs", metavar="FILE", nargs="*", help="program files (.apl) to load, in order")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", metavar="FILE", help="YAML session configuration; flags override it")
    parser.add_argument("--depth", metavar="N", type=int, help="transitions allowed on one search branch")
    parser.add_argument("--trace", action="store_true", default=None, help="print every transition")
    parser.add_argument("--check-nu-goal", action="store_true", default=None,
                        help="report clauses for which resolution may be incomplete")
    parser.add_argument("--show-elaborated", action="store_true", default=None,
                        help="print the elaborated clauses before running")
    parser.add_argument("--oracle", metavar=("D", "K"), type=int, nargs=2,
                        help="print the least fixpoint over terms of depth D and K names per name-type")
    parser.add_argument("--max-solutions", metavar="N", type=int, help="answers shown per query")
    parser.add_argument("--batch", metavar="FILE", help="run the queries of FILE and check their %%expect lines")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log INFO (-v) or DEBUG (-vv)")
    return parser


def configure_logging(verbosity):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT)


def session_config(args):
    """
    Merge the YAML configuration (if any) with command-line flags.

    Returns:
        SessionConfig: The validated settings
    """
    config = load_session_config(args.config) if args.config else SessionConfig()
    config.program_files = list(config.program_files) + list(args.programs)
    overrides = {
        "depth_limit": args.depth,
        "trace": args.trace,
        "check_nu_goal": args.check_nu_goal,
        "show_elaborated": args.show_elaborated,
        "oracle": tuple(args.oracle) if args.oracle else None,
        "max_solutions": args.max_solutions,
        "batch_file": args.batch,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    return config.validate()


# ---------------------------------------------------------------------------
# Expectations

def parse_expectation(expect):
    """`yes`, `no` or `count=N` as ("yes"|"no"|"count", N or None)."""
    if expect in ("yes", "no"):
        return expect, None
    match = re.fullmatch(r"count=(\d+)", expect or "")
    if not match:
        raise NomlogError(f"unknown expectation {expect!r}")
    return "count", int(match.group(1))


def check_expectation(expect, count, status):
    """
    Compare a query outcome with its `%expect` annotation.

    Args:
        expect (str): `yes`, `no` or `count=N`
        count (int): Answers found
        status (str): Final status line of the query

    Returns:
        str or None: A mismatch description, None when the outcome matches
    """
    kind, expected = parse_expectation(expect)
    if kind == "yes" and count >= 1:
        return None
    if kind == "no" and count == 0 and status == STATUS_NO:
        return None
    if kind == "count" and count == expected and status != STATUS_DEPTH:
        return None
    if status == STATUS_DEPTH:
        got = "depth limit exceeded"
    elif kind == "count":
        got = f"count={count}"
    else:
        got = "yes" if count else "no"
    return f"MISMATCH: expected {expect}, got {got}"


# ---------------------------------------------------------------------------
# Running queries

def _engine(program, config, out, solutions=None):
    trace = out if config.trace else None
    return Engine(program, Limits(config.depth_limit, solutions), trace_callback=trace)


def run_query(program, text, config, out=print, expect=None):
    """
    Run one query non-interactively and print its answers and status.

    Args:
        program (Program): The loaded program
        text (str): Query text
        config (SessionConfig): Session settings
        out (callable): Receives each output line
        expect (str, optional): `%expect` annotation to check

    Returns:
        bool: False on an expectation mismatch
    """
    shown = config.max_solutions or DEFAULT_BATCH_SOLUTIONS
    wanted = shown
    if expect is not None:
        kind, expected = parse_expectation(expect)
        if kind == "count":
            wanted = max(shown, expected + 1)
    out(text)
    query = parse_query(text, program)
    count = 0
    status = STATUS_NO
    try:
        for answer in _engine(program, config, out, wanted).solve(query):
            count += 1
            if count <= shown:
                if count > 1:
                    out(";")
                out(str(answer))
        if count:
            status = STATUS_YES
    except DepthLimitExceeded as e:
        logger.info(f"{text}: {e}")
        status = STATUS_DEPTH
    out(status)
    if expect is None:
        return True
    mismatch = check_expectation(expect, count, status)
    if mismatch:
        out(mismatch)
        return False
    return True


def run_batch(program, queries, config, out=print):
    """
    Run annotated queries in order.

    Returns:
        int: EXIT_OK when every query met its expectation, EXIT_MISMATCH otherwise
    """
    failures = 0
    for query in queries:
        try:
            ok = run_query(program, query.text, config, out, query.expect)
        except NomlogError as e:
            out(handle_error("running query", e))
            ok = False
        if not ok:
            failures += 1
    logger.info(f"Batch finished: {len(queries) - failures} of {len(queries)} queries as expected")
    return EXIT_OK if failures == 0 else EXIT_MISMATCH


def run_oracle(program, config, out=print):
    """Saturate the program bottom-up and print the atom set."""
    depth, pool_size = config.oracle
    universe = GroundUniverse.for_program(program, depth=depth, pool_size=pool_size)
    try:
        atoms = fixpoint(program, universe)
    except NomlogError as e:
        out(handle_error("computing the fixpoint", e))
        return EXIT_LOAD_ERROR
    text = format_atoms(atoms)
    if text:
        out(text)
    return EXIT_OK


def _read_query(read):
    """Read lines until the query text ends with a period."""
    text = read(PROMPT)
    while text.strip() and not text.rstrip().endswith("."):
        text += " " + read(MORE_PROMPT)
    return text.strip()


def run_repl(program, config, read=input, out=print):
    """
    Read queries until end of input. After an answer with bindings, `;`
    asks for the next one and anything else accepts it.

    Returns:
        int: EXIT_OK
    """
    while True:
        try:
            text = _read_query(read)
        except EOFError:
            out("")
            return EXIT_OK
        if not text:
            continue
        try:
            query = parse_query(text, program)
        except LoadError as e:
            out(handle_error("reading query", e))
            continue
        try:
            _interact(program, query, config, read, out)
        except EOFError:
            out("")
            return EXIT_OK
        except NomlogError as e:
            out(handle_error("solving query", e))


def _interact(program, query, config, read, out):
    count = 0
    try:
        for answer in _engine(program, config, out, config.max_solutions).solve(query):
            count += 1
            if not answer.lines():
                out(STATUS_YES)
                return
            out(str(answer))
            if read("").strip() != ";":
                out(STATUS_YES)
                return
        out(STATUS_NO)
    except DepthLimitExceeded:
        out(STATUS_DEPTH)


# ---------------------------------------------------------------------------

def report_program(program, config, out=print):
    """Print elaborated clauses and incompleteness diagnostics as requested."""
    if config.show_elaborated:
        for clause in program.elaborated:
            out(show_clause(clause))
    if config.check_nu_goal:
        for diagnostic in elaborator.warn_incomplete(program.elaborated, program.signature):
            out(str(diagnostic))


def main(argv=None, read=input, out=print):
    """Main entry point for the interpreter."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        config = session_config(args)
    except ConfigError as e:
        out(handle_error("reading configuration", e))
        return EXIT_LOAD_ERROR
    try:
        program = load_program(config.program_files)
        queries = load_batch(config.batch_file) if config.batch_file else []
    except LoadError as e:
        out(handle_error("loading program", e))
        return EXIT_LOAD_ERROR
    report_program(program, config, out)
    if config.oracle is not None:
        return run_oracle(program, config, out)
    if config.batch_file is not None:
        return run_batch(program, queries + list(program.queries), config, out)
    if program.queries:
        run_batch(program, program.queries, config, out)
    return run_repl(program, config, read, out)


if __name__ == "__main__":
    sys.exit(main())
