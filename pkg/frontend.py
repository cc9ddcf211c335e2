"""
Program loading: function flattening, conversion of typed surface syntax
to core formulas, implicit quantification of clauses and query parsing.

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import elaborator
from formulas import (And, Atom, Eq, Exists, Forall, Formula, Fresh, Implies, New, Or,
                      TOP, conj, free_names, free_variables)
from syntax import (Clause, FunClause, Query, SAbs, SAnd, SApp, SAtom, SChar, SCons, SEq,
                    SExists, SFresh, SIdent, SInt, SNew, SNil, SOr, SSwap, STrue, STuple,
                    SUnit, SVar, parse_goal, parse_program as parse_items, show_goal)
from terms import (Abs, App, Char, Cons, Const, Int, NIL, Name, UNIT, Var,
                   make_tuple, next_id, swap)
from typecheck import FLATTEN_SUFFIX, Signature, check_program, check_query
from utils import FlatteningError, LoadError

logger = logging.getLogger(__name__)


@dataclass
class ProgramClause:
    """A closed core clause and where it came from."""
    formula: Formula
    location: Optional[Tuple[str, int, int]] = None


@dataclass
class ProgramQuery:
    """A `?- G.` item found in a program file, with its `%expect` annotation."""
    text: str
    expect: Optional[str] = None
    location: Optional[Tuple[str, int, int]] = None


@dataclass
class Program:
    """
    A loaded program: signature, closed clauses in source order, the
    elaborated clauses used by the engine and the embedded queries.
    """
    signature: Signature = field(default_factory=Signature)
    clauses: List[ProgramClause] = field(default_factory=list)
    elaborated: list = field(default_factory=list)
    queries: List[ProgramQuery] = field(default_factory=list)
    items: list = field(default_factory=list)

    def clauses_for(self, pred):
        return [c for c in self.elaborated if c.head.pred == pred]


@dataclass
class CoreQuery:
    """
    A checked query goal. `variables` are the query's free variables in order
    of first appearance; free names are treated as constants.
    """
    goal: Formula
    variables: List[Tuple[str, Var]]
    names: List[Name]
    text: str = ""


# ---------------------------------------------------------------------------
# Flattening

def _is_call(t):
    return isinstance(t, (SApp, SIdent)) and t.role == "fun"


def _var_names(node, found):
    if isinstance(node, SVar):
        found.add(node.name)
    elif isinstance(node, (SExists,)):
        found.update(node.variables)
    if hasattr(node, "__dataclass_fields__"):
        for name in node.__dataclass_fields__:
            if name in ("loc", "ty", "role", "sorts"):
                continue
            value = getattr(node, name)
            for child in (value if isinstance(value, list) else [value]):
                if hasattr(child, "__dataclass_fields__"):
                    _var_names(child, found)
    return found


class _Flattener:
    """Replace defined-function calls in one clause by fresh result variables."""

    def __init__(self, taken):
        self.taken = set(taken)

    def result_var(self, sort):
        name, index = "R", 0
        while name in self.taken:
            index += 1
            name = f"R{index}"
        self.taken.add(name)
        return name, sort

    def _use(self, name, sort, loc=None):
        node = SVar(name, loc=loc)
        node.ty = sort
        return node

    def extract(self, t, calls):
        """Lift calls out of a term, innermost-leftmost. Returns the new term."""
        if isinstance(t, SIdent) and t.role == "fun":
            name, sort = self.result_var(t.ty)
            calls.append((SAtom(t.name + FLATTEN_SUFFIX, [self._use(name, sort, t.loc)], loc=t.loc), name, sort))
            return self._use(name, sort, t.loc)
        if isinstance(t, SApp):
            args = [self.extract(a, calls) for a in t.args]
            if t.role == "fun":
                name, sort = self.result_var(t.ty)
                calls.append((SAtom(t.functor + FLATTEN_SUFFIX, args + [self._use(name, sort, t.loc)], loc=t.loc),
                              name, sort))
                return self._use(name, sort, t.loc)
            node = SApp(t.functor, args, loc=t.loc)
            node.ty, node.role = t.ty, t.role
            return node
        if isinstance(t, SAbs):
            node = SAbs(t.binder, self.extract(t.body, calls), loc=t.loc)
        elif isinstance(t, SSwap):
            node = SSwap(t.left, t.right, self.extract(t.term, calls), loc=t.loc)
        elif isinstance(t, SCons):
            node = SCons(self.extract(t.head, calls), self.extract(t.tail, calls), loc=t.loc)
        elif isinstance(t, STuple):
            node = STuple([self.extract(i, calls) for i in t.items], loc=t.loc)
        else:
            return t
        node.ty = t.ty
        return node

    def _wrap(self, calls, goal):
        if not calls:
            return goal
        body = _sconj([atom for atom, _, _ in calls] + [goal])
        node = SExists([name for _, name, _ in calls], body, loc=goal.loc)
        node.sorts = [sort for _, _, sort in calls]
        return node

    def _call_args(self, call, calls):
        return [self.extract(a, calls) for a in getattr(call, "args", [])]

    @staticmethod
    def _flat_pred(call):
        return (call.functor if isinstance(call, SApp) else call.name) + FLATTEN_SUFFIX

    def goal(self, g):
        if isinstance(g, SAtom):
            calls = []
            atom = SAtom(g.pred, [self.extract(a, calls) for a in g.args], loc=g.loc)
            return self._wrap(calls, atom)
        if isinstance(g, SEq):
            calls = []
            # X = f(t) becomes fp(t, X)
            if _is_call(g.left):
                args = self._call_args(g.left, calls)
                other = self.extract(g.right, calls)
                return self._wrap(calls, SAtom(self._flat_pred(g.left), args + [other], loc=g.loc))
            if _is_call(g.right):
                other = self.extract(g.left, calls)
                args = self._call_args(g.right, calls)
                return self._wrap(calls, SAtom(self._flat_pred(g.right), args + [other], loc=g.loc))
            eq = SEq(self.extract(g.left, calls), self.extract(g.right, calls), loc=g.loc)
            return self._wrap(calls, eq)
        if isinstance(g, SFresh):
            calls = []
            fresh = SFresh(g.name, self.extract(g.term, calls), loc=g.loc)
            return self._wrap(calls, fresh)
        if isinstance(g, (SAnd, SOr)):
            return type(g)(self.goal(g.left), self.goal(g.right), loc=g.loc)
        if isinstance(g, SNew):
            node = SNew(g.names, self.goal(g.body), loc=g.loc)
            node.sorts = g.sorts
            return node
        if isinstance(g, SExists):
            node = SExists(g.variables, self.goal(g.body), loc=g.loc)
            node.sorts = g.sorts
            return node
        return g


def _sconj(goals):
    goals = [g for g in goals if g is not None and not isinstance(g, STrue)]
    if not goals:
        return STrue()
    result = goals[-1]
    for g in reversed(goals[:-1]):
        result = SAnd(g, result, loc=g.loc)
    return result


def flatten_clause(item):
    """
    Flatten one typed clause or function clause into a predicate clause.

    Calls inside a body goal run just before that goal, with their result
    variables existentially bound there. Calls in the head and in a function
    clause's right-hand side run after the whole body.

    Args:
        item (Clause or FunClause): A type-checked clause

    Returns:
        Clause: A clause without function calls
    """
    flattener = _Flattener(_var_names(item, set()))
    body = flattener.goal(item.body) if item.body is not None else None
    calls = []
    if isinstance(item, FunClause):
        args = [flattener.extract(a, calls) for a in item.lhs.args]
        result = flattener.extract(item.rhs, calls)
        head = SAtom(item.lhs.functor + FLATTEN_SUFFIX, args + [result], loc=item.lhs.loc)
    else:
        head = SAtom(item.head.pred, [flattener.extract(a, calls) for a in item.head.args], loc=item.head.loc)
    tail = [atom for atom, _, _ in calls]
    new_body = _sconj([body] + tail)
    return Clause(head, None if isinstance(new_body, STrue) and body is None else new_body, loc=item.loc)


def flatten_functions(items):
    """
    Flatten every clause of a type-checked program.

    Returns:
        list: The items with clauses flattened; declarations and queries kept
    """
    result = []
    for item in items:
        if isinstance(item, (Clause, FunClause)):
            result.append(flatten_clause(item))
        else:
            result.append(item)
    return result


# ---------------------------------------------------------------------------
# Conversion to core formulas

class _Env:
    def __init__(self, parent=None):
        self.parent = parent
        self.root = parent.root if parent else self
        self.variables = {}
        self.names = {}

    def lookup(self, table, key):
        env = self
        while env is not None:
            mapping = getattr(env, table)
            if key in mapping:
                return mapping[key]
            env = env.parent
        return None


class _CoreBuilder:
    def __init__(self, signature):
        self.sig = signature

    def variable(self, name, sort):
        return Var(next_id(), name, sort, self.sig.name_type_of(sort) if sort is not None else None)

    def name(self, stem, sort):
        if not self.sig.is_name_sort(sort):
            raise FlatteningError(f"{stem} has no name type")
        return Name(stem, sort.name)

    def term(self, t, env):
        if isinstance(t, SVar):
            if t.name == "_":
                return self.variable("_", t.ty)
            var = env.lookup("variables", t.name)
            if var is None:
                var = env.root.variables[t.name] = self.variable(t.name, t.ty)
            return var
        if isinstance(t, SIdent):
            if t.role == "const":
                return Const(t.name)
            if t.role == "fun":
                raise FlatteningError(f"function {t.name} survived flattening")
            name = env.lookup("names", t.name)
            if name is None:
                name = env.root.names[t.name] = self.name(t.name, t.ty)
            return name
        if isinstance(t, SApp):
            if t.role != "con":
                raise FlatteningError(f"function {t.functor} survived flattening")
            return App(t.functor, tuple(self.term(a, env) for a in t.args))
        if isinstance(t, SAbs):
            return Abs(self.term(t.binder, env), self.term(t.body, env))
        if isinstance(t, SSwap):
            return swap(self.term(t.left, env), self.term(t.right, env), self.term(t.term, env))
        if isinstance(t, SInt):
            return Int(t.value)
        if isinstance(t, SChar):
            return Char(t.value)
        if isinstance(t, SNil):
            return NIL
        if isinstance(t, SCons):
            return Cons(self.term(t.head, env), self.term(t.tail, env))
        if isinstance(t, STuple):
            return make_tuple([self.term(i, env) for i in t.items])
        if isinstance(t, SUnit):
            return UNIT
        raise FlatteningError(f"unexpected term {t!r}")

    def goal(self, g, env):
        if g is None or isinstance(g, STrue):
            return TOP
        if isinstance(g, SAtom):
            return Atom(g.pred, tuple(self.term(a, env) for a in g.args))
        if isinstance(g, SEq):
            return Eq(self.term(g.left, env), self.term(g.right, env))
        if isinstance(g, SFresh):
            return Fresh(self.term(g.name, env), self.term(g.term, env))
        if isinstance(g, SAnd):
            return And(self.goal(g.left, env), self.goal(g.right, env))
        if isinstance(g, SOr):
            return Or(self.goal(g.left, env), self.goal(g.right, env))
        if isinstance(g, SNew):
            inner = _Env(env)
            bound = []
            for stem, sort in zip(g.names, g.sorts):
                inner.names[stem] = self.name(stem, sort)
                bound.append(inner.names[stem])
            result = self.goal(g.body, inner)
            for name in reversed(bound):
                result = New(name, result)
            return result
        if isinstance(g, SExists):
            inner = _Env(env)
            bound = []
            for stem, sort in zip(g.variables, g.sorts):
                inner.variables[stem] = self.variable(stem, sort)
                bound.append(inner.variables[stem])
            result = self.goal(g.body, inner)
            for var in reversed(bound):
                result = Exists(var, result)
            return result
        raise FlatteningError(f"unexpected goal {g!r}")

    def clause(self, item):
        env = _Env()
        head = self.goal(item.head, env)
        body = self.goal(item.body, env)
        return head if body is TOP else Implies(body, head)


def close_clause(clause):
    """
    Quantify a clause's free names (Ͷ, outermost) and free variables (∀),
    each in order of first occurrence, head first.

    Args:
        clause (Formula): An atom or an implication G ⇒ A

    Returns:
        Formula: Ͷā.∀X̄.clause; a clause without free names or
            variables is returned unchanged
    """
    ordered = conj([clause.clause, clause.goal]) if isinstance(clause, Implies) else clause
    result = clause
    for var in reversed(free_variables(ordered)):
        result = Forall(var, result)
    for name in reversed(free_names(ordered)):
        result = New(name, result)
    return result


# ---------------------------------------------------------------------------
# Loading

def parse_program(text, filename="<input>", program=None):
    """
    Parse, check, flatten and close the clauses of a program text.

    Args:
        text (str): Program text
        filename (str): Name used in error locations
        program (Program, optional): A program to extend (multi-file loads)

    Returns:
        Program: Signature, closed clauses and embedded queries; elaboration
            is left to `load_program`

    Raises:
        ParseError, TypeCheckError: On invalid input
    """
    program = program or Program()
    items = parse_items(text, filename)
    signature = check_program(items, filename, program.signature)
    builder = _CoreBuilder(signature)
    for item in flatten_functions(items):
        location = (filename,) + tuple(item.loc) if getattr(item, "loc", None) else (filename, 0, 0)
        if isinstance(item, Clause):
            program.clauses.append(ProgramClause(close_clause(builder.clause(item)), location))
        elif isinstance(item, Query):
            program.queries.append(ProgramQuery(f"?- {show_goal(item.goal)}.", item.expect, location))
    program.signature = signature
    program.items.extend(items)
    logger.info(f"Loaded {filename}: {len(items)} items, {len(program.clauses)} clauses in total")
    return program


def load_program(sources, check_nu_goal=False):
    """
    Load program files (or in-memory texts) and elaborate their clauses.

    Args:
        sources (list): File paths, or (filename, text) pairs
        check_nu_goal (bool): Log incompleteness diagnostics at WARNING

    Returns:
        Program: The loaded, elaborated program
    """
    program = Program()
    for source in sources:
        if isinstance(source, tuple):
            filename, text = source
        else:
            filename = source
            try:
                with open(source, "r", encoding="utf-8") as f:
                    text = f.read()
            except OSError as e:
                raise LoadError(f"cannot read program: {e.strerror}", source) from e
        parse_program(text, filename, program)
    program.elaborated = elaborator.elaborate(program.clauses)
    logger.info(f"Elaborated {len(program.clauses)} clauses into {len(program.elaborated)}")
    if check_nu_goal:
        for diagnostic in elaborator.warn_incomplete(program.elaborated, program.signature):
            logger.warning(str(diagnostic))
    return program


def load_text(text, filename="<input>"):
    """Load a single program text; convenience for tests and the REPL."""
    return load_program([(filename, text)])


def load_batch(path=None, text=None):
    """
    Read the queries of a batch file.

    Args:
        path (str, optional): Batch file to read
        text (str, optional): Batch text, used instead of reading `path`

    Returns:
        list: ProgramQuery objects in file order

    Raises:
        LoadError: If the file cannot be read or holds anything but queries
    """
    filename = path or "<batch>"
    if text is None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise LoadError(f"cannot read batch file: {e.strerror}", path) from e
    queries = []
    for item in parse_items(text, filename):
        location = (filename,) + tuple(item.loc) if getattr(item, "loc", None) else (filename, 0, 0)
        if not isinstance(item, Query):
            raise LoadError("batch files may only contain queries", *location)
        queries.append(ProgramQuery(f"?- {show_goal(item.goal)}.", item.expect, location))
    logger.info(f"Loaded {len(queries)} queries from {filename}")
    return queries


def _query_variable_order(goal, bound=frozenset(), found=None):
    if found is None:
        found = []
    if isinstance(goal, SVar):
        if goal.name != "_" and goal.name not in bound and goal.name not in found:
            found.append(goal.name)
        return found
    if isinstance(goal, SExists):
        return _query_variable_order(goal.body, bound | set(goal.variables), found)
    if hasattr(goal, "__dataclass_fields__"):
        for key in goal.__dataclass_fields__:
            if key in ("loc", "ty", "role", "sorts"):
                continue
            value = getattr(goal, key)
            for child in (value if isinstance(value, list) else [value]):
                if hasattr(child, "__dataclass_fields__"):
                    _query_variable_order(child, bound, found)
    return found


def parse_query(text, program, filename="<query>"):
    """
    Parse and check a query against a loaded program.

    Args:
        text (str): Goal text, with or without `?-` and the final `.`
        program (Program): The loaded program
        filename (str): Name used in error locations

    Returns:
        CoreQuery: The core goal plus its variables in order of first appearance
    """
    goal = parse_goal(text, filename)
    check_query(goal, program.signature, filename)
    order = _query_variable_order(goal)
    flat = _Flattener(_var_names(goal, set())).goal(goal)
    builder = _CoreBuilder(program.signature)
    env = _Env()
    core = builder.goal(flat, env)
    variables = [(name, env.variables[name]) for name in order if name in env.variables]
    return CoreQuery(core, variables, list(env.names.values()), text.strip())
