"""
Constraint solver for name-restricted nominal constraints: unification
modulo alpha-equivalence, freshness solving with suspensions, scope guards
for Ͷ-names and a final exhaustive satisfiability check.

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Tuple, Union

from formulas import And, Atom, Eq, Equiv, Formula, Fresh, Top, free_variables, mentions_var
from terms import (Abs, App, Name, Term, Var, apply_perm, apply_subst,
                   fresh_name, ground_equivariant, is_ground, names_of,
                   occurs, show, subterms, swap, variables_of)
from utils import NameTypeError, NomlogError, NonGroundError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Store:
    """
    An immutable constraint store.

    Attributes:
        subst: Idempotent substitution, variable id to term
        fresh: Freshness suspensions `atom # X`; the atom is a name or a
            name-variable (possibly suspended), X an unbound variable
        delayed: Equations and freshness problems blocked on an unbound
            name-variable in binder position
        guards: Names introduced by goal-level Ͷ; variables older than a
            guard must stay fresh for it
    """
    subst: Dict[int, Term] = field(default_factory=dict)
    fresh: Tuple[Tuple[Term, Var], ...] = ()
    delayed: Tuple[Formula, ...] = ()
    guards: Tuple[Name, ...] = ()

    def size(self):
        return len(self.subst) + len(self.fresh) + len(self.delayed)


EMPTY_STORE = Store()


@dataclass(frozen=True)
class Updated:
    store: Store

    @property
    def consistent(self):
        return True


@dataclass(frozen=True)
class Inconsistent:
    reason: str

    @property
    def consistent(self):
        return False


SolveOutcome = Union[Updated, Inconsistent]


class _Clash(Exception):
    pass


def disagreement(p, q):
    """Names on which two permutations differ."""
    names = []
    for n in p.names() + q.names():
        if n not in names and p.apply_name(n) != q.apply_name(n):
            names.append(n)
    return names


class _Work:
    """Mutable working copy of a store, processing an agenda of problems."""

    def __init__(self, store):
        self.subst = dict(store.subst)
        self.fresh = list(store.fresh)
        self.delayed = list(store.delayed)
        self.guards = store.guards
        self.agenda = deque()

    def freeze(self):
        return Store(self.subst, tuple(self.fresh), tuple(self.delayed), self.guards)

    def walk(self, t):
        if isinstance(t, Var):
            value = self.subst.get(t.id)
            if value is not None:
                return apply_perm(t.perm, value)
        return t

    def run(self):
        while self.agenda:
            kind, x, y = self.agenda.popleft()
            if kind == "eq":
                self.eq(x, y)
            else:
                self.fresh_for(x, y)
        return self

    def push_eq(self, t, u):
        self.agenda.append(("eq", t, u))

    def push_fresh(self, a, t):
        self.agenda.append(("fresh", a, t))

    def eq(self, t, u):
        t, u = self.walk(t), self.walk(u)
        if isinstance(t, Var) and isinstance(u, Var):
            if t.id == u.id:
                for c in disagreement(t.perm, u.perm):
                    self.push_fresh(c, t.bare())
                return
            if t.name_type is not None and u.name_type is None:
                # the untyped side takes the name-variable, which stays name-typed
                t, u = u, t
        if isinstance(t, Var):
            self.bind(t, u)
            return
        if isinstance(u, Var):
            self.bind(u, t)
            return
        if isinstance(t, Name) or isinstance(u, Name):
            if t != u:
                raise _Clash(f"{show(t)} and {show(u)} differ")
            return
        if isinstance(t, Abs) and isinstance(u, Abs):
            a, b = self.walk(t.binder), self.walk(u.binder)
            if a == b:
                self.push_eq(t.body, u.body)
            elif isinstance(a, Name) and isinstance(b, Name):
                self.push_fresh(a, u.body)
                self.push_eq(t.body, swap(a, b, u.body))
            else:
                self.delay(Eq(t, u))
            return
        if type(t) is not type(u):
            raise _Clash(f"{show(t)} and {show(u)} clash")
        if isinstance(t, App):
            if t.functor != u.functor or len(t.args) != len(u.args):
                raise _Clash(f"{show(t)} and {show(u)} clash")
            for x, y in zip(t.args, u.args):
                self.push_eq(x, y)
            return
        children = subterms(t)
        if children:
            for x, y in zip(children, subterms(u)):
                self.push_eq(x, y)
        elif t != u:
            raise _Clash(f"{show(t)} and {show(u)} clash")

    def bind(self, var, term):
        value = apply_subst(self.subst, apply_perm(var.perm.inverse(), term))
        if occurs(var.id, value):
            raise _Clash(f"occurs check: {var.display} in {show(value)}")
        if var.name_type is not None and not isinstance(value, (Name, Var)):
            raise _Clash(f"name variable {var.display} bound to {show(value)}")
        var_id = var.id
        local = {var_id: value}
        self.subst = {k: (apply_subst(local, w) if occurs(var_id, w) else w)
                      for k, w in self.subst.items()}
        self.subst[var_id] = value

        keep = []
        for atom, x in self.fresh:
            if x.id == var_id or (isinstance(atom, Var) and atom.id == var_id):
                self.push_fresh(atom, x)
            else:
                keep.append((atom, x))
        self.fresh = keep

        keep = []
        for problem in self.delayed:
            if mentions_var(problem, var_id):
                self.requeue(problem)
            else:
                keep.append(problem)
        self.delayed = keep

        for guard in self.guards:
            if guard.id > var_id:
                self.push_fresh(guard, value)

    def fresh_for(self, a, t):
        a, t = self.walk(a), self.walk(t)
        if isinstance(t, Var):
            atom = apply_perm(t.perm.inverse(), a)
            if isinstance(atom, Name) and t.name_type is not None and t.name_type != atom.name_type:
                return
            self.suspend(atom, t.bare())
            return
        if isinstance(a, Var):
            if isinstance(t, Name):
                if t.name_type == a.name_type:
                    self.suspend(apply_perm(a.perm.inverse(), t), a.bare())
                return
            if isinstance(t, Abs):
                if self.walk(t.binder) != a:
                    self.delay(Fresh(a, t))
                return
            for sub in subterms(t):
                self.push_fresh(a, sub)
            return
        if isinstance(t, Name):
            if t == a:
                raise _Clash(f"{a.display} is not fresh for itself")
            return
        if isinstance(t, Abs):
            b = self.walk(t.binder)
            if isinstance(b, Name):
                if b != a:
                    self.push_fresh(a, t.body)
            else:
                self.delay(Fresh(a, t))
            return
        for sub in subterms(t):
            self.push_fresh(a, sub)

    def suspend(self, atom, var):
        if isinstance(atom, Var) and atom.id == var.id and not atom.perm:
            raise _Clash(f"{var.display} is not fresh for itself")
        if (atom, var) not in self.fresh:
            self.fresh.append((atom, var))

    def delay(self, problem):
        if problem not in self.delayed:
            self.delayed.append(problem)

    def requeue(self, problem):
        if isinstance(problem, Eq):
            self.push_eq(problem.left, problem.right)
        else:
            self.push_fresh(problem.name, problem.term)


def _run(store, problems):
    work = _Work(store)
    work.agenda.extend(problems)
    try:
        work.run()
    except _Clash as clash:
        logger.debug(f"Inconsistent: {clash}")
        return Inconsistent(str(clash))
    return Updated(work.freeze())


def unify(t, u, store=EMPTY_STORE):
    """
    Solve t ≈ u against a store.

    Args:
        t (Term): Left side
        u (Term): Right side, same type as `t`
        store (Store): The current store

    Returns:
        SolveOutcome: Updated(store) or Inconsistent(reason)
    """
    return _run(store, [("eq", t, u)])


def solve_fresh(a, t, store=EMPTY_STORE):
    """
    Solve a # t, where `a` is a name or a name-variable.

    Returns:
        SolveOutcome: Updated(store) or Inconsistent(reason)
    """
    return _run(store, [("fresh", a, t)])


def _problems(constraint):
    if isinstance(constraint, Top):
        return []
    if isinstance(constraint, Eq):
        return [("eq", constraint.left, constraint.right)]
    if isinstance(constraint, Fresh):
        return [("fresh", constraint.name, constraint.term)]
    if isinstance(constraint, And):
        return _problems(constraint.left) + _problems(constraint.right)
    raise NomlogError(f"not a solvable constraint: {constraint}")


def solve_constraints(constraints, store=EMPTY_STORE):
    """
    Add several constraints (Top, Eq, Fresh, Equiv or conjunctions) at once.

    Equivariance constraints are decided on ground terms only.
    """
    problems = []
    for c in constraints:
        if isinstance(c, Equiv):
            left = apply_subst(store.subst, c.left)
            right = apply_subst(store.subst, c.right)
            if not (is_ground(left) and is_ground(right)):
                raise NonGroundError(f"equivariance needs ground terms: {c}")
            if ground_equivariant(left, right) is None:
                return Inconsistent(f"{show(left)} and {show(right)} are not equivariant")
            continue
        problems.extend(_problems(c))
    return _run(store, problems)


def add_guard(store, name):
    """Record a goal-level Ͷ-name; variables introduced before it must avoid it."""
    return Store(store.subst, store.fresh, store.delayed, store.guards + (name,))


def resolve(store, t):
    """Apply the store's substitution to a term."""
    return apply_subst(store.subst, t)


def _open_name_vars(store):
    """
    Unbound variables ranging over names: name-variables anywhere in the
    residual problems, and any open variable in a freshness atom or binder.
    """
    found = {}

    def note(t, position=False):
        for v in variables_of(apply_subst(store.subst, t)):
            if (position or v.name_type is not None) and v.id not in store.subst:
                found.setdefault(v.id, v)

    def note_binders(t):
        t = apply_subst(store.subst, t)
        if isinstance(t, Abs):
            note(t.binder, True)
        for sub in subterms(t):
            note_binders(sub)

    for atom, x in store.fresh:
        note(atom, True)
        note(x)
    for problem in store.delayed:
        terms = (problem.left, problem.right) if isinstance(problem, Eq) else (problem.term,)
        if isinstance(problem, Fresh):
            note(problem.name, True)
        for t in terms:
            note(t)
            note_binders(t)
    return list(found.values())


def _mentioned_names(store):
    found = list(store.guards)

    def note(t):
        for n in names_of(apply_subst(store.subst, t)):
            if n not in found:
                found.append(n)

    for atom, x in store.fresh:
        note(atom)
        note(x)
    for problem in store.delayed:
        for t in ((problem.left, problem.right) if isinstance(problem, Eq) else (problem.name, problem.term)):
            note(t)
    return found


def check_satisfiable(store):
    """
    Decide whether some ground substitution satisfies a store.

    Freshness suspensions on variables that do not range over names are
    always satisfiable. Name-variables are assigned exhaustively, per
    name-type, from the mentioned names plus one fresh name per variable;
    an untyped variable in a name position tries every known name-type.

    Args:
        store (Store or SolveOutcome): The store to check

    Returns:
        bool: True iff a satisfying ground substitution exists
    """
    if isinstance(store, Inconsistent):
        return False
    if isinstance(store, Updated):
        store = store.store
    name_vars = _open_name_vars(store)
    mentioned = _mentioned_names(store)
    known_types = sorted(({n.name_type for n in mentioned} | {v.name_type for v in name_vars}) - {None})
    name_vars = [v for v in name_vars if v.name_type is not None or known_types]
    if not name_vars:
        return not store.delayed
    choices = []
    for var in name_vars:
        types = [var.name_type] if var.name_type is not None else known_types
        pool = [n for n in mentioned if n.name_type in types]
        for name_type in types:
            same_type = sum(1 for v in name_vars if v.name_type in (name_type, None))
            pool += [fresh_name(name_type, "s") for _ in range(same_type)]
        choices.append(pool)
    for assignment in itertools.product(*choices):
        try:
            outcome = _run(store, [("eq", var, name) for var, name in zip(name_vars, assignment)])
        except NameTypeError:
            continue
        if isinstance(outcome, Updated) and not _open_name_vars(outcome.store) and not outcome.store.delayed:
            return True
    logger.debug(f"No assignment of {len(name_vars)} name variables satisfies the store")
    return False


def residual(store, variables):
    """
    Freshness suspensions and delayed problems relevant to some variables.

    Args:
        store (Store): An answer store
        variables (iterable of Var): Variables still open in the answer

    Returns:
        list: Fresh and Eq formulas, suspensions first
    """
    ids = {v.id for v in variables}
    found = []
    for atom, x in store.fresh:
        atom_ids = {v.id for v in variables_of(atom)}
        if x.id in ids or atom_ids & ids:
            found.append(Fresh(atom, x))
    for problem in store.delayed:
        resolved = Eq(resolve(store, problem.left), resolve(store, problem.right)) \
            if isinstance(problem, Eq) else Fresh(resolve(store, problem.name), resolve(store, problem.term))
        if {v.id for v in free_variables(resolved)} & ids:
            found.append(resolved)
    return found


def entail_ground_equivariance(left, right):
    """
    Decide A ∼ B for ground atoms (or terms).

    Returns:
        bool: True iff some permutation maps `left` onto `right` up to α
    """
    if isinstance(left, Atom):
        left = left.as_term()
    if isinstance(right, Atom):
        right = right.as_term()
    return ground_equivariant(left, right) is not None
