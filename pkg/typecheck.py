"""
Signature building and kind/type checking of parsed programs and queries.

Clauses are checked by unification-based inference. Type variables of the
clause's own head symbol are rigid, which rejects non-parametric clauses.

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Set, Tuple

from syntax import (Clause, ConDecl, DefDecl, FunClause, KindDecl, NameTypeDecl, Query,
                    SAbs, SAnd, SApp, SAtom, SChar, SCons, SEq, SExists, SFresh,
                    SIdent, SInt, SNew, SNil, SOr, SSwap, STrue, STuple, SUnit, SVar,
                    TypeAbbrev)
from sorts import (BUILTIN_TYPES, CHAR_SORT, INT_SORT, PROP, PROP_SORT, UNIT_SORT,
                   TCon, TVar, abs_of, list_of, pair_of, show_sort, substitute, type_vars)
from utils import LoadError, TypeCheckError

logger = logging.getLogger(__name__)

# Suffix of the predicate a defined function is flattened into
FLATTEN_SUFFIX = "p"


@dataclass
class Signature:
    """
    Declared type constructors, name-types, constructors, defined symbols
    and type abbreviations. Symbol types are stored fully expanded.
    """
    type_constructors: Dict[str, int] = field(default_factory=dict)
    name_types: Set[str] = field(default_factory=set)
    constructors: Dict[str, Tuple[List, object]] = field(default_factory=dict)
    defined: Dict[str, Tuple[List, object]] = field(default_factory=dict)
    abbreviations: Dict[str, Tuple[List[str], object]] = field(default_factory=dict)

    def is_name_sort(self, sort):
        return isinstance(sort, TCon) and not sort.args and sort.name in self.name_types

    def name_type_of(self, sort):
        return sort.name if self.is_name_sort(sort) else None

    def is_predicate(self, symbol):
        return symbol in self.defined and self.defined[symbol][1] == PROP_SORT

    def is_function(self, symbol):
        return symbol in self.defined and self.defined[symbol][1] != PROP_SORT

    def functions(self):
        return [f for f in self.defined if self.is_function(f)]

    def predicates(self):
        return [p for p in self.defined if self.is_predicate(p)]

    def may_contain(self, sort, name_type, seen=None):
        """
        Whether values of `sort` can mention names of `name_type`. Unknown
        and polymorphic sorts are assumed to.
        """
        if sort is None or isinstance(sort, TVar):
            return True
        if sort.name == name_type:
            return True
        if sort.name in self.name_types or not (sort.args or sort.name in self.type_constructors):
            return False
        if sort.name in BUILTIN_TYPES:
            return any(self.may_contain(a, name_type, seen) for a in sort.args)
        seen = set() if seen is None else seen
        if sort in seen:
            return False
        seen.add(sort)
        for args, result in self.constructors.values():
            if not isinstance(result, TCon) or result.name != sort.name:
                continue
            mapping = {p.name: a for p, a in zip(result.args, sort.args) if isinstance(p, TVar)}
            if any(self.may_contain(substitute(arg, mapping), name_type, seen) for arg in args):
                return True
        return False

    def declared(self, symbol):
        return (symbol in self.type_constructors or symbol in self.name_types
                or symbol in self.constructors or symbol in self.defined
                or symbol in self.abbreviations)


class ClauseTypeError(Exception):
    """First type error of a clause or query, with the node location."""

    def __init__(self, message, loc=None):
        super().__init__(message)
        self.message = message
        self.loc = loc


class _Mismatch(Exception):
    pass


def _error(filename, loc, message):
    line, column = loc if loc else (None, None)
    return LoadError(message, filename, line, column)


def _constructor_names(sort):
    if isinstance(sort, TVar):
        return set()
    found = {sort.name}
    for a in sort.args:
        found |= _constructor_names(a)
    return found


class _Declarations:
    """Build a Signature from declarations, collecting errors."""

    def __init__(self, filename, signature=None):
        self.filename = filename
        self.sig = signature or Signature()
        self.errors = []

    def fail(self, loc, message):
        self.errors.append(_error(self.filename, loc, message))

    def claim(self, name, loc):
        if name in BUILTIN_TYPES or self.sig.declared(name):
            self.fail(loc, f"duplicate declaration of {name}")
            return False
        return True

    def expand(self, sort, loc, params=None):
        """Expand abbreviations and check kinds. Returns None on error."""
        if isinstance(sort, TVar):
            if params is not None and sort.name not in params:
                self.fail(loc, f"unbound type variable {sort.name}")
                return None
            return sort
        args = []
        for arg in sort.args:
            expanded = self.expand(arg, loc, params)
            if expanded is None:
                return None
            args.append(expanded)
        name = sort.name
        if name in self.sig.abbreviations:
            formal, body = self.sig.abbreviations[name]
            if len(formal) != len(args):
                self.fail(loc, f"type {name} expects {len(formal)} arguments")
                return None
            return substitute(body, dict(zip(formal, args)))
        if name == "*":
            return TCon(name, tuple(args))
        if name == "abs":
            if not self.sig.is_name_sort(args[0]):
                self.fail(loc, f"abstraction over {show_sort(args[0])}, which is not a name type")
                return None
            return TCon(name, tuple(args))
        if name in self.sig.name_types:
            arity = 0
        elif name in self.sig.type_constructors:
            arity = self.sig.type_constructors[name]
        elif name in BUILTIN_TYPES:
            arity = BUILTIN_TYPES[name]
        else:
            self.fail(loc, f"unknown type {name}")
            return None
        if arity != len(args):
            self.fail(loc, f"type {name} expects {arity} arguments, got {len(args)}")
            return None
        return TCon(name, tuple(args))

    def add(self, item):
        sig = self.sig
        if isinstance(item, KindDecl):
            for name in item.names:
                if self.claim(name, item.loc):
                    sig.type_constructors[name] = item.arity
        elif isinstance(item, NameTypeDecl):
            for name in item.names:
                if self.claim(name, item.loc):
                    sig.name_types.add(name)
        elif isinstance(item, TypeAbbrev):
            body = self.expand(item.body, item.loc, params=item.params)
            if body is not None and self.claim(item.name, item.loc):
                sig.abbreviations[item.name] = (list(item.params), body)
        elif isinstance(item, ConDecl):
            self.add_constructor(item)
        elif isinstance(item, DefDecl):
            self.add_defined(item)

    def _expand_all(self, item):
        args = [self.expand(a, item.loc) for a in item.arg_types]
        result = self.expand(item.result, item.loc)
        if result is None or any(a is None for a in args):
            return None
        return args, result

    def add_constructor(self, item):
        expanded = self._expand_all(item)
        if expanded is None:
            return
        args, result = expanded
        if not (isinstance(result, TCon) and result.name in self.sig.type_constructors):
            self.fail(item.loc, f"constructor result type {show_sort(result)} is not a declared data type")
            return
        if any(PROP in _constructor_names(a) for a in args):
            self.fail(item.loc, "constructor arguments cannot mention o")
            return
        hidden = set()
        for a in args:
            hidden |= type_vars(a)
        hidden -= type_vars(result)
        if hidden:
            self.fail(item.loc, f"constructor is not type-preserving: {', '.join(sorted(hidden))} "
                                f"does not occur in {show_sort(result)}")
            return
        for name in item.names:
            if self.claim(name, item.loc):
                self.sig.constructors[name] = (args, result)

    def add_defined(self, item):
        expanded = self._expand_all(item)
        if expanded is None:
            return
        args, result = expanded
        if any(PROP in _constructor_names(a) for a in args):
            self.fail(item.loc, "arguments of a defined symbol cannot mention o")
            return
        if result != PROP_SORT and PROP in _constructor_names(result):
            self.fail(item.loc, "function results cannot mention o")
            return
        for name in item.names:
            if self.claim(name, item.loc):
                self.sig.defined[name] = (args, result)


def build_signature(items, filename="<input>", signature=None):
    """
    Collect the declarations of a program into a Signature.

    Args:
        items (list): Parsed program items
        filename (str): Name used in error locations
        signature (Signature, optional): Signature to extend

    Returns:
        tuple: (Signature, list of LoadError)
    """
    builder = _Declarations(filename, signature)
    for item in items:
        builder.add(item)
    return builder.sig, builder.errors


class _Scope:
    """Variables and names in scope. Nested scopes come from exists/new goals."""

    def __init__(self, parent=None):
        self.parent = parent
        self.root = parent.root if parent else self
        self.variables = {}
        self.names = {}
        self.children = []

    def child(self):
        scope = _Scope(self)
        self.children.append(scope)
        return scope

    def lookup(self, table, key):
        scope = self
        while scope is not None:
            mapping = getattr(scope, table)
            if key in mapping:
                return mapping[key]
            scope = scope.parent
        return None

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


class _Inference:
    """Type inference for one clause or query."""

    def __init__(self, signature):
        self.sig = signature
        self.subst = {}
        self.counter = itertools.count(1)
        self.nodes = []
        self.name_positions = []
        self.binders = []

    def fresh(self):
        return TVar(f"_{next(self.counter)}")

    def walk(self, sort):
        while isinstance(sort, TVar) and sort.name in self.subst:
            sort = self.subst[sort.name]
        return sort

    def resolve(self, sort):
        sort = self.walk(sort)
        if isinstance(sort, TCon) and sort.args:
            return TCon(sort.name, tuple(self.resolve(a) for a in sort.args))
        return sort

    def occurs(self, name, sort):
        sort = self.walk(sort)
        if isinstance(sort, TVar):
            return sort.name == name
        return any(self.occurs(name, a) for a in sort.args)

    def unify(self, s, t):
        s, t = self.walk(s), self.walk(t)
        if s == t:
            return
        if isinstance(s, TVar) and not s.rigid:
            if self.occurs(s.name, t):
                raise _Mismatch()
            self.subst[s.name] = t
        elif isinstance(t, TVar) and not t.rigid:
            self.unify(t, s)
        elif isinstance(s, TCon) and isinstance(t, TCon) and s.name == t.name and len(s.args) == len(t.args):
            for a, b in zip(s.args, t.args):
                self.unify(a, b)
        else:
            raise _Mismatch()

    def expect(self, actual, expected, loc, what):
        try:
            self.unify(actual, expected)
        except _Mismatch:
            a, e = self.resolve(actual), self.resolve(expected)
            rigid = [s for s in (e, a) if isinstance(s, TVar) and s.rigid]
            if rigid:
                raise ClauseTypeError(f"clause is not parametric: type variable {rigid[0].name} "
                                      f"cannot be specialized in {what}", loc)
            raise ClauseTypeError(f"type mismatch in {what}: expected {show_sort(e)}, got {show_sort(a)}", loc)

    def instantiate(self, args, result, rigid=False):
        names = set(type_vars(result))
        for a in args:
            names |= type_vars(a)
        mapping = {n: (TVar(n, rigid=True) if rigid else self.fresh()) for n in sorted(names)}
        return [substitute(a, mapping) for a in args], substitute(result, mapping)

    def note(self, node, sort):
        node.ty = sort
        self.nodes.append(node)
        return sort

    # terms ----------------------------------------------------------------
    def term(self, t, scope):
        if isinstance(t, SVar):
            if t.name == "_":
                return self.note(t, self.fresh())
            sort = scope.lookup("variables", t.name)
            if sort is None:
                sort = scope.root.variables[t.name] = self.fresh()
            return self.note(t, sort)
        if isinstance(t, SIdent):
            return self.ident(t, scope)
        if isinstance(t, SApp):
            return self.application(t, scope)
        if isinstance(t, SAbs):
            binder = self.binder(t.binder, scope)
            body = self.term(t.body, scope)
            return self.note(t, abs_of(binder, body))
        if isinstance(t, SSwap):
            a = self.name_ident(t.left, scope)
            b = self.name_ident(t.right, scope)
            self.expect(b, a, t.loc, "swapping")
            return self.note(t, self.term(t.term, scope))
        if isinstance(t, SInt):
            return self.note(t, INT_SORT)
        if isinstance(t, SChar):
            return self.note(t, CHAR_SORT)
        if isinstance(t, SNil):
            return self.note(t, list_of(self.fresh()))
        if isinstance(t, SCons):
            head = self.term(t.head, scope)
            tail = self.term(t.tail, scope)
            self.expect(tail, list_of(head), t.loc, "list tail")
            return self.note(t, tail)
        if isinstance(t, STuple):
            sorts = [self.term(i, scope) for i in t.items]
            result = sorts[-1]
            for s in reversed(sorts[:-1]):
                result = pair_of(s, result)
            return self.note(t, result)
        if isinstance(t, SUnit):
            return self.note(t, UNIT_SORT)
        raise ClauseTypeError(f"unexpected term {t!r}", getattr(t, "loc", None))

    def ident(self, t, scope):
        sig = self.sig
        bound = scope.lookup("names", t.name)
        if bound is not None:
            t.role = "name"
            return self.note(t, bound)
        if t.name in sig.constructors:
            args, result = sig.constructors[t.name]
            if args:
                raise ClauseTypeError(f"constructor {t.name} expects {len(args)} arguments", t.loc)
            t.role = "const"
            return self.note(t, self.instantiate([], result)[1])
        if t.name in sig.defined:
            args, result = sig.defined[t.name]
            if result == PROP_SORT:
                raise ClauseTypeError(f"predicate {t.name} used as a term", t.loc)
            if args:
                raise ClauseTypeError(f"function {t.name} expects {len(args)} arguments", t.loc)
            t.role = "fun"
            return self.note(t, self.instantiate([], result)[1])
        t.role = "name"
        sort = scope.root.names[t.name] = self.fresh()
        return self.note(t, sort)

    def name_ident(self, t, scope):
        sort = self.ident(t, scope)
        if t.role != "name":
            raise ClauseTypeError(f"{t.name} is not a name", t.loc)
        return sort

    def binder(self, b, scope):
        """A name or name-variable in abstraction or freshness position."""
        if isinstance(b, SVar):
            if b.name == "_":
                raise ClauseTypeError("a name position cannot hold an anonymous variable", b.loc)
            sort = self.term(b, scope)
        else:
            sort = self.name_ident(b, scope)
        self.name_positions.append(b)
        return sort

    def application(self, t, scope):
        sig = self.sig
        if t.functor in sig.constructors:
            args, result = sig.constructors[t.functor]
            t.role = "con"
        elif sig.is_function(t.functor):
            args, result = sig.defined[t.functor]
            t.role = "fun"
        elif t.functor in sig.defined:
            raise ClauseTypeError(f"predicate {t.functor} used as a term", t.loc)
        else:
            raise ClauseTypeError(f"unknown constructor or function {t.functor}", t.loc)
        if len(args) != len(t.args):
            raise ClauseTypeError(f"{t.functor} expects {len(args)} arguments, got {len(t.args)}", t.loc)
        args, result = self.instantiate(args, result)
        for actual, expected in zip(t.args, args):
            self.expect(self.term(actual, scope), expected, actual.loc or t.loc, f"argument of {t.functor}")
        return self.note(t, result)

    # goals ----------------------------------------------------------------
    def goal(self, g, scope):
        if isinstance(g, STrue):
            return
        if isinstance(g, SAtom):
            self.atom(g, scope, head=False)
        elif isinstance(g, SEq):
            left = self.term(g.left, scope)
            right = self.term(g.right, scope)
            self.expect(right, left, g.loc, "equation")
        elif isinstance(g, SFresh):
            self.binder(g.name, scope)
            self.term(g.term, scope)
        elif isinstance(g, (SAnd, SOr)):
            self.goal(g.left, scope)
            self.goal(g.right, scope)
        elif isinstance(g, SNew):
            inner = scope.child()
            for name in g.names:
                if name in self.sig.constructors or name in self.sig.defined:
                    raise ClauseTypeError(f"{name} is a declared symbol and cannot be a new name", g.loc)
                inner.names[name] = self.fresh()
            g.sorts = [inner.names[n] for n in g.names]
            self.binders.append(g)
            self.goal(g.body, inner)
        elif isinstance(g, SExists):
            inner = scope.child()
            for var in g.variables:
                inner.variables[var] = self.fresh()
            g.sorts = [inner.variables[v] for v in g.variables]
            self.binders.append(g)
            self.goal(g.body, inner)
        else:
            raise ClauseTypeError(f"unexpected goal {g!r}", getattr(g, "loc", None))

    def atom(self, g, scope, head):
        sig = self.sig
        if not sig.is_predicate(g.pred):
            if g.pred in sig.defined:
                raise ClauseTypeError(f"function {g.pred} used as a predicate", g.loc)
            raise ClauseTypeError(f"unknown predicate {g.pred}", g.loc)
        args, _ = sig.defined[g.pred]
        if len(args) != len(g.args):
            raise ClauseTypeError(f"{g.pred} expects {len(args)} arguments, got {len(g.args)}", g.loc)
        args, _ = self.instantiate(args, PROP_SORT, rigid=head)
        for actual, expected in zip(g.args, args):
            self.expect(self.term(actual, scope), expected, actual.loc or g.loc, f"argument of {g.pred}")

    def function_head(self, lhs, scope):
        sig = self.sig
        if not isinstance(lhs, SApp) or not sig.is_function(lhs.functor):
            functor = getattr(lhs, "functor", getattr(lhs, "name", "?"))
            raise ClauseTypeError(f"{functor} is not a declared function", lhs.loc)
        args, result = sig.defined[lhs.functor]
        if len(args) != len(lhs.args):
            raise ClauseTypeError(f"{lhs.functor} expects {len(args)} arguments, got {len(lhs.args)}", lhs.loc)
        lhs.role = "defining"
        args, result = self.instantiate(args, result, rigid=True)
        for actual, expected in zip(lhs.args, args):
            self.expect(self.term(actual, scope), expected, actual.loc or lhs.loc, f"argument of {lhs.functor}")
        lhs.ty = result
        return result

    # finishing -------------------------------------------------------------
    def default_name_types(self, scope):
        """Names that nothing else types (e.g. only swapped) take the sole declared name type."""
        untyped = [(name, sort) for s in scope.walk() for name, sort in s.names.items()
                   if isinstance(self.walk(sort), TVar) and not self.walk(sort).rigid]
        if not untyped:
            return
        if len(self.sig.name_types) != 1:
            raise ClauseTypeError(f"cannot determine the name type of {untyped[0][0]}; "
                                  f"use it where its name type is known")
        [name_type] = self.sig.name_types
        for _, sort in untyped:
            self.unify(sort, TCon(name_type))

    def finish(self, scope):
        self.default_name_types(scope)
        for binder in self.binders:
            binder.sorts = [self.resolve(s) for s in binder.sorts]
        for node in self.nodes:
            node.ty = self.resolve(node.ty)
            if PROP in _constructor_names(node.ty):
                raise ClauseTypeError("a term cannot have type o", getattr(node, "loc", None))
        for node in self.nodes:
            if isinstance(node, SIdent) and node.role == "name" and not self.sig.is_name_sort(node.ty):
                raise ClauseTypeError(f"{node.name} is used as a name but has type {show_sort(node.ty)}, "
                                      f"which is not a name type", node.loc)
        for s in scope.walk():
            for name, sort in s.names.items():
                sort = self.resolve(sort)
                if not self.sig.is_name_sort(sort):
                    raise ClauseTypeError(f"cannot determine the name type of {name}", None)
        for node in self.name_positions:
            if not self.sig.is_name_sort(node.ty):
                raise ClauseTypeError(f"{node.name} must have a declared name type, "
                                      f"got {show_sort(node.ty)}", node.loc)


def check_clause(item, sig):
    """
    Type-check one clause or function clause, annotating its nodes.

    Raises:
        ClauseTypeError: On the first error found
    """
    inference = _Inference(sig)
    scope = _Scope()
    if isinstance(item, Clause):
        inference.atom(item.head, scope, head=True)
        if item.body is not None:
            inference.goal(item.body, scope)
    else:
        result = inference.function_head(item.lhs, scope)
        if item.body is not None:
            inference.goal(item.body, scope)
        inference.expect(inference.term(item.rhs, scope), result, item.rhs.loc or item.loc,
                         f"result of {item.lhs.functor}")
    inference.finish(scope)


def check_goal(goal, sig):
    """
    Type-check a query goal, annotating its nodes. Free lowercase
    identifiers that are not symbols must be names.

    Raises:
        ClauseTypeError: On the first error found
    """
    inference = _Inference(sig)
    scope = _Scope()
    inference.goal(goal, scope)
    inference.finish(scope)


def flattened_signature(sig):
    """Add the predicate `fp : (σ⃗, σ) -> o` for every function f : σ⃗ -> σ."""
    for f in sig.functions():
        args, result = sig.defined[f]
        sig.defined.setdefault(f + FLATTEN_SUFFIX, (list(args) + [result], PROP_SORT))
    return sig


def check_program(items, filename="<input>", signature=None):
    """
    Build the signature and type-check every clause and query.

    Args:
        items (list): Parsed program items
        filename (str): Name used in error locations
        signature (Signature, optional): Signature to extend

    Returns:
        Signature: The program's signature, flattened predicates included;
            surface nodes are annotated with their types and roles

    Raises:
        TypeCheckError: With every error found
    """
    known = set(signature.defined) if signature is not None else set()
    sig, errors = build_signature(items, filename, signature)
    for f in sig.functions():
        if f in known:
            continue
        flat = f + FLATTEN_SUFFIX
        if sig.declared(flat):
            errors.append(_error(filename, None, f"flattened predicate {flat} for function {f} "
                                                 f"clashes with a declaration"))
    if not errors:
        flattened_signature(sig)
    for item in items:
        if isinstance(item, (Clause, FunClause)):
            goal = None
        elif isinstance(item, Query):
            goal = item.goal
        else:
            continue
        try:
            if goal is None:
                check_clause(item, sig)
            else:
                check_goal(goal, sig)
        except ClauseTypeError as e:
            errors.append(_error(filename, e.loc or item.loc, e.message))
    if errors:
        raise TypeCheckError(errors)
    logger.info(f"Checked {len(items)} items from {filename}: "
                f"{len(sig.constructors)} constructors, {len(sig.defined)} defined symbols")
    return sig


def check_query(goal, sig, filename="<query>"):
    """
    Type-check a query goal against a signature.

    Raises:
        TypeCheckError: With the error found
    """
    try:
        check_goal(goal, sig)
    except ClauseTypeError as e:
        raise TypeCheckError([_error(filename, e.loc, e.message)])
