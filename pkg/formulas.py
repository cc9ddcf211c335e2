"""
Constraints, goals and program clauses over nominal terms, plus the
elaborated clause shape ∀Σ[G ⇒ A] consumed by the engine.

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

from terms import (App, Name, Term, Var, apply_perm, apply_subst, display_names, names_of, rename,
                   occurs, show, variables_of, Permutation)


class Formula:
    """Base class of constraints, goals and clauses."""

    def __str__(self):
        return show_formula(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Fresh(Formula):
    """Freshness a # t; `name` is a name or a name-variable."""
    name: Term
    term: Term


@dataclass(frozen=True)
class Equiv(Formula):
    """Equality up to a permutation of names. Ground use only."""
    left: Term
    right: Term


@dataclass(frozen=True)
class Atom(Formula):
    pred: str
    args: Tuple[Term, ...] = ()

    def as_term(self):
        return App(self.pred, self.args)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    goal: Formula
    clause: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class New(Formula):
    """
    Ͷ-quantification. `outer` marks names introduced by backchaining, which
    scope over the whole derivation rather than the current goal.
    """
    name: Name
    body: Formula
    outer: bool = False


TOP = Top()

CONSTRAINTS = (Top, Eq, Fresh, Equiv)


def conj(formulas):
    """Right-nested conjunction; `true` for an empty sequence."""
    formulas = [f for f in formulas if not isinstance(f, Top)]
    if not formulas:
        return TOP
    result = formulas[-1]
    for f in reversed(formulas[:-1]):
        result = And(f, result)
    return result


def conjuncts(formula):
    """Flatten top-level conjunctions, dropping `true`."""
    if isinstance(formula, And):
        return conjuncts(formula.left) + conjuncts(formula.right)
    if isinstance(formula, Top):
        return []
    return [formula]


def is_constraint(formula):
    if isinstance(formula, CONSTRAINTS):
        return True
    if isinstance(formula, And):
        return is_constraint(formula.left) and is_constraint(formula.right)
    if isinstance(formula, (Exists, New)):
        return is_constraint(formula.body)
    return False


def map_terms(formula, fn):
    """Apply `fn` to every term of a formula, leaving binders alone."""
    if isinstance(formula, (Eq, Equiv)):
        return type(formula)(fn(formula.left), fn(formula.right))
    if isinstance(formula, Fresh):
        return Fresh(fn(formula.name), fn(formula.term))
    if isinstance(formula, Atom):
        return Atom(formula.pred, tuple(fn(a) for a in formula.args))
    if isinstance(formula, (And, Or)):
        return type(formula)(map_terms(formula.left, fn), map_terms(formula.right, fn))
    if isinstance(formula, Implies):
        return Implies(map_terms(formula.goal, fn), map_terms(formula.clause, fn))
    if isinstance(formula, (Forall, Exists)):
        return type(formula)(formula.var, map_terms(formula.body, fn))
    if isinstance(formula, New):
        return New(formula.name, map_terms(formula.body, fn), formula.outer)
    return formula


def subst_formula(theta, formula):
    """Apply a substitution to the free variables of a formula."""
    if not theta:
        return formula
    if isinstance(formula, (Forall, Exists)):
        inner = {k: v for k, v in theta.items() if k != formula.var.id}
        return type(formula)(formula.var, subst_formula(inner, formula.body))
    if isinstance(formula, (And, Or)):
        return type(formula)(subst_formula(theta, formula.left), subst_formula(theta, formula.right))
    if isinstance(formula, Implies):
        return Implies(subst_formula(theta, formula.goal), subst_formula(theta, formula.clause))
    if isinstance(formula, New):
        return New(formula.name, subst_formula(theta, formula.body), formula.outer)
    return map_terms(formula, lambda t: apply_subst(theta, t))


def permute_formula(perm, formula):
    """Apply a name permutation to a formula, Ͷ-binders included."""
    if not perm:
        return formula
    if isinstance(formula, New):
        return New(perm.apply_name(formula.name), permute_formula(perm, formula.body), formula.outer)
    if isinstance(formula, (And, Or)):
        return type(formula)(permute_formula(perm, formula.left), permute_formula(perm, formula.right))
    if isinstance(formula, Implies):
        return Implies(permute_formula(perm, formula.goal), permute_formula(perm, formula.clause))
    if isinstance(formula, (Forall, Exists)):
        return type(formula)(formula.var, permute_formula(perm, formula.body))
    return map_terms(formula, lambda t: apply_perm(perm, t))


def swap_formula(a, b, formula):
    return permute_formula(Permutation(((a, b),)), formula)


def rename_formula(a, b, formula):
    """
    α-rename a bound name: replace `a` by the fresh name `b` everywhere,
    Ͷ-binders included, leaving variables unsuspended.
    """
    if isinstance(formula, New):
        binder = b if formula.name == a else formula.name
        return New(binder, rename_formula(a, b, formula.body), formula.outer)
    if isinstance(formula, (And, Or)):
        return type(formula)(rename_formula(a, b, formula.left), rename_formula(a, b, formula.right))
    if isinstance(formula, Implies):
        return Implies(rename_formula(a, b, formula.goal), rename_formula(a, b, formula.clause))
    if isinstance(formula, (Forall, Exists)):
        return type(formula)(formula.var, rename_formula(a, b, formula.body))
    return map_terms(formula, lambda t: rename(a, b, t))


def _terms_of(formula):
    if isinstance(formula, (Eq, Equiv)):
        return [formula.left, formula.right]
    if isinstance(formula, Fresh):
        return [formula.name, formula.term]
    if isinstance(formula, Atom):
        return list(formula.args)
    return []


def _children(formula):
    if isinstance(formula, (And, Or)):
        return [formula.left, formula.right]
    if isinstance(formula, Implies):
        return [formula.goal, formula.clause]
    if isinstance(formula, (Forall, Exists, New)):
        return [formula.body]
    return []


def free_variables(formula):
    """Free variables in order of first appearance."""
    found = {}
    bound = set()

    def visit(f, bound):
        for t in _terms_of(f):
            for v in variables_of(t):
                if v.id not in bound:
                    found.setdefault(v.id, v)
        if isinstance(f, (Forall, Exists)):
            bound = bound | {f.var.id}
        for child in _children(f):
            visit(child, bound)

    visit(formula, bound)
    return list(found.values())


def free_names(formula):
    """
    Names occurring anywhere in a formula except under their own Ͷ-binder,
    in order of first appearance. Abstraction binders count as occurrences.
    """
    found = []

    def visit(f, bound):
        for t in _terms_of(f):
            for n in names_of(t):
                if n not in bound and n not in found:
                    found.append(n)
        if isinstance(f, New):
            bound = bound | {f.name}
        for child in _children(f):
            visit(child, bound)

    visit(formula, frozenset())
    return found


def mentions_var(formula, var_id):
    return any(occurs(var_id, t) for t in _terms_of(formula)) or any(
        mentions_var(c, var_id) for c in _children(formula))


def atoms_of(formula):
    """Atomic goals occurring in a formula."""
    if isinstance(formula, Atom):
        return [formula]
    found = []
    for child in _children(formula):
        found.extend(atoms_of(child))
    return found


@dataclass(frozen=True)
class ElaboratedClause:
    """
    A clause in normal form Ͷā.∀X̄.(body ⇒ head).

    Args:
        names: Ͷ-bound names, outermost first
        variables: ∀-bound variables, outermost first
        body: Goal (TOP for facts)
        head: Atom
        location: (filename, line, column) of the source clause, if known
    """
    names: Tuple[Name, ...]
    variables: Tuple[Var, ...]
    body: Formula
    head: Atom
    location: Optional[Tuple[str, int, int]] = None

    def to_formula(self):
        result = self.head if isinstance(self.body, Top) else Implies(self.body, self.head)
        for var in reversed(self.variables):
            result = Forall(var, result)
        for name in reversed(self.names):
            result = New(name, result)
        return result

    def __str__(self):
        return show_clause(self)


# ---------------------------------------------------------------------------
# Printing

_PRECEDENCE = {Or: 1, And: 2}


def show_formula(formula, display=None):
    """
    Render a formula in concrete syntax: `new a. forall X. (G => A)`,
    `exists X. G`, `G, H`, `G ; H`.
    """
    return _show_formula(formula, display or {}, 0)


def _show_formula(f, display, context):
    term = lambda t: show(t, display)
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Eq):
        return f"{term(f.left)} = {term(f.right)}"
    if isinstance(f, Fresh):
        return f"{term(f.name)} # {term(f.term)}"
    if isinstance(f, Equiv):
        return f"{term(f.left)} ~ {term(f.right)}"
    if isinstance(f, Atom):
        return f.pred if not f.args else term(f.as_term())
    if isinstance(f, (And, Or)):
        level = _PRECEDENCE[type(f)]
        sep = ", " if isinstance(f, And) else " ; "
        text = _show_formula(f.left, display, level + 1) + sep + _show_formula(f.right, display, level)
        return f"({text})" if context > level else text
    if isinstance(f, Implies):
        text = f"{_show_formula(f.goal, display, 3)} => {_show_formula(f.clause, display, 0)}"
        return f"({text})" if context > 0 else text
    if isinstance(f, (Forall, Exists, New)):
        keyword = {Forall: "forall", Exists: "exists", New: "new"}[type(f)]
        bound = [f.var if not isinstance(f, New) else f.name]
        body = f.body
        while type(body) is type(f) and (not isinstance(f, New) or body.outer == f.outer):
            bound.append(body.var if not isinstance(body, New) else body.name)
            body = body.body
        labels = ",".join(term(b) for b in bound)
        text = f"{keyword} {labels}. {_show_formula(body, display, 0)}"
        return f"({text})" if context > 0 else text
    raise TypeError(f"not a formula: {f!r}")


def clause_labels(clause: ElaboratedClause):
    """Display labels for the generated names and variables of a clause."""
    found = list(clause.names) + list(clause.variables)

    def visit(f):
        if isinstance(f, (Forall, Exists)):
            found.append(f.var)
        elif isinstance(f, New):
            found.append(f.name)
        found.extend(_terms_of(f))
        for child in _children(f):
            visit(child)

    visit(clause.head)
    visit(clause.body)
    return display_names(found)


def show_clause(clause: ElaboratedClause, display=None):
    """Render an elaborated clause as `new a. forall X. p(...) :- G.`"""
    display = display or {}
    prefix = ""
    if clause.names:
        prefix += "new " + ",".join(show(n, display) for n in clause.names) + ". "
    if clause.variables:
        prefix += "forall " + ",".join(show(v, display) for v in clause.variables) + ". "
    head = _show_formula(clause.head, display, 0)
    if isinstance(clause.body, Top):
        return f"{prefix}{head}."
    return f"{prefix}{head} :- {_show_formula(clause.body, display, 0)}."
