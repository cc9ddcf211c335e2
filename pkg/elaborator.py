"""
Clause elaboration into the normal form Ͷā.∀X̄.(G ⇒ A), classification of
ν-goal clauses, their ν-goal translation and incompleteness diagnostics
for resolution by equational unification.

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from formulas import (And, Atom, ElaboratedClause, Eq, Exists, Forall, Fresh,
                      Implies, New, TOP, Top, clause_labels, conj, conjuncts, free_names,
                      free_variables, rename_formula, show_clause, subst_formula)
from sorts import CHAR_SORT, INT_SORT, TCon, is_ground as is_ground_sort
from terms import (Abs, Char, Int, Name, Var, apply_subst, fresh_var, occurs, rename_name,
                   rename_var, subterms)
from typecheck import FLATTEN_SUFFIX
from utils import NomlogError, format_location

logger = logging.getLogger(__name__)

# Rewrites allowed before normalize gives up
MAX_REWRITE_STEPS = 100000


# ---------------------------------------------------------------------------
# Rewrite system

def _hoist_forall(goal, var, body):
    if any(v.id == var.id for v in free_variables(goal)):
        fresh = rename_var(var)
        body = subst_formula({var.id: fresh}, body)
        var = fresh
    return Forall(var, Implies(goal, body))


def _hoist_new(goal, name, body, outer):
    if name in free_names(goal):
        fresh = rename_name(name)
        body = rename_formula(name, fresh, body)
        name = fresh
    return New(name, Implies(goal, body), outer)


def _root_rewrites(d):
    """Rewrites applicable at the root of a clause formula."""
    if isinstance(d, Implies):
        goal, body = d.goal, d.clause
        if isinstance(body, Top):
            yield "imp-top", TOP
        elif isinstance(body, Implies):
            yield "imp-imp", Implies(And(goal, body.goal), body.clause)
        elif isinstance(body, And):
            yield "imp-and", And(Implies(goal, body.left), Implies(goal, body.right))
        elif isinstance(body, Forall):
            yield "imp-forall", _hoist_forall(goal, body.var, body.body)
        elif isinstance(body, New):
            yield "imp-new", _hoist_new(goal, body.name, body.body, body.outer)
    elif isinstance(d, Forall):
        if isinstance(d.body, Top):
            yield "forall-top", TOP
        elif isinstance(d.body, And):
            yield "forall-and", And(Forall(d.var, d.body.left), Forall(d.var, d.body.right))
        elif isinstance(d.body, New):
            inner = d.body
            yield "forall-new", New(inner.name, Forall(d.var, Implies(Fresh(inner.name, d.var), inner.body)),
                                    inner.outer)
    elif isinstance(d, New):
        if isinstance(d.body, Top):
            yield "new-top", TOP
        elif isinstance(d.body, And):
            yield "new-and", And(New(d.name, d.body.left, d.outer), New(d.name, d.body.right, d.outer))
    elif isinstance(d, And):
        if isinstance(d.right, Top):
            yield "and-top-right", d.left
        if isinstance(d.left, Top):
            yield "and-top-left", d.right


def _rewrites(d):
    """Every single-step rewrite of `d`, at the root or in clause position below it."""
    yield from _root_rewrites(d)
    if isinstance(d, Implies):
        for rule, result in _rewrites(d.clause):
            yield rule, Implies(d.goal, result)
    elif isinstance(d, Forall):
        for rule, result in _rewrites(d.body):
            yield rule, Forall(d.var, result)
    elif isinstance(d, New):
        for rule, result in _rewrites(d.body):
            yield rule, New(d.name, result, d.outer)
    elif isinstance(d, And):
        for rule, result in _rewrites(d.left):
            yield rule, And(result, d.right)
        for rule, result in _rewrites(d.right):
            yield rule, And(d.left, result)


def _program_rewrites(entries):
    for index, (d, location) in enumerate(entries):
        before, after = entries[:index], entries[index + 1:]
        if isinstance(d, And):
            yield "split", before + [(d.left, location), (d.right, location)] + after
        elif isinstance(d, Top):
            yield "drop-top", before + after
        for rule, result in _rewrites(d):
            yield rule, before + [(result, location)] + after


def _first(rules):
    return 0


def _step(entries, choose):
    candidates = list(_program_rewrites(entries))
    if not candidates:
        return None, None
    rule, result = candidates[choose([r for r, _ in candidates])]
    return rule, result


def rewrite_step(clauses, choose=None):
    """
    Apply one elaboration rewrite to a list of clause formulas.

    Args:
        clauses (list): Clause formulas
        choose (callable, optional): Receives the rule names of all redexes
            in order and returns the index of the one to contract; the
            leftmost-outermost redex by default

    Returns:
        list or None: The rewritten clauses, None when already normal
    """
    _, result = _step([(d, None) for d in clauses], choose or _first)
    return None if result is None else [d for d, _ in result]


def _normalize_entries(entries, choose):
    for count in range(MAX_REWRITE_STEPS):
        rule, result = _step(entries, choose)
        if result is None:
            return entries
        logger.debug(f"Elaboration step {count}: {rule}")
        entries = result
    raise NomlogError(f"elaboration did not terminate within {MAX_REWRITE_STEPS} steps")


def normalize(clauses, choose=None):
    """
    Rewrite clause formulas to normal form.

    Args:
        clauses (list): Closed clause formulas
        choose (callable, optional): Redex selection, as for `rewrite_step`

    Returns:
        list: Formulas of the shape Ͷā.∀X̄.(G ⇒ A) or Ͷā.∀X̄.A
    """
    return [d for d, _ in _normalize_entries([(d, None) for d in clauses], choose or _first)]


def to_elaborated(d, location=None):
    """Read a normal-form formula into an ElaboratedClause."""
    names, variables = [], []
    while isinstance(d, New):
        names.append(d.name)
        d = d.body
    while isinstance(d, Forall):
        variables.append(d.var)
        d = d.body
    if isinstance(d, Implies) and isinstance(d.clause, Atom):
        return ElaboratedClause(tuple(names), tuple(variables), conj(conjuncts(d.goal)), d.clause, location)
    if isinstance(d, Atom):
        return ElaboratedClause(tuple(names), tuple(variables), TOP, d, location)
    raise NomlogError(f"not in elaborated normal form: {d}")


def elaborate(clauses, choose=None):
    """
    Elaborate a program's closed clauses.

    Args:
        clauses (list): ProgramClause objects (with `formula` and `location`)
            or bare formulas
        choose (callable, optional): Redex selection, as for `rewrite_step`

    Returns:
        list: ElaboratedClause objects in program order, each carrying the
            location of the clause it came from
    """
    entries = [(getattr(c, "formula", c), getattr(c, "location", None)) for c in clauses]
    normal = _normalize_entries(entries, choose or _first)
    return [to_elaborated(d, location) for d, location in normal]


# ---------------------------------------------------------------------------
# ν-goal analysis

def _has_clause_new(d):
    if isinstance(d, New):
        return True
    if isinstance(d, Implies):
        return _has_clause_new(d.clause)
    if isinstance(d, Forall):
        return _has_clause_new(d.body)
    if isinstance(d, And):
        return _has_clause_new(d.left) or _has_clause_new(d.right)
    return False


def is_nu_goal(d):
    """
    True iff no Ͷ occurs in clause position. Ͷ inside goals is allowed.

    Args:
        d (ElaboratedClause or Formula): The clause
    """
    if isinstance(d, ElaboratedClause):
        return not d.names
    return not _has_clause_new(d)


def _argument_sort(term, declared):
    if isinstance(term, Var):
        return term.sort
    if isinstance(term, Name):
        return TCon(term.name_type)
    if isinstance(term, Int):
        return INT_SORT
    if isinstance(term, Char):
        return CHAR_SORT
    if declared is not None and is_ground_sort(declared):
        return declared
    return None


def nu_goal_translate(clause, signature=None):
    """
    Translate Ͷā∀X̄[G ⇒ p(t⃗)] into ∀Z⃗[(Ͷā.∃X̄. t⃗ ≈ Z⃗ ∧ G) ⇒ p(Z⃗)].

    Args:
        clause (ElaboratedClause): An elaborated clause
        signature (Signature, optional): Supplies the sorts of the Z⃗

    Returns:
        ElaboratedClause: A ν-goal clause with one fresh variable per head
            argument
    """
    declared = [None] * len(clause.head.args)
    if signature is not None and clause.head.pred in signature.defined:
        declared = list(signature.defined[clause.head.pred][0])
    zs = []
    for arg, sort in zip(clause.head.args, declared):
        sort = _argument_sort(arg, sort)
        name_type = arg.name_type if isinstance(arg, (Name, Var)) else None
        if name_type is None and signature is not None and sort is not None:
            name_type = signature.name_type_of(sort)
        zs.append(fresh_var("Z", sort, name_type))
    goal = conj([Eq(arg, z) for arg, z in zip(clause.head.args, zs)] + conjuncts(clause.body))
    for var in reversed(clause.variables):
        goal = Exists(var, goal)
    for name in reversed(clause.names):
        goal = New(name, goal)
    return ElaboratedClause((), tuple(zs), goal, Atom(clause.head.pred, tuple(zs)), clause.location)


# ---------------------------------------------------------------------------
# Incompleteness diagnostics

@dataclass
class Diagnostic:
    """
    A clause that equational backchaining may fail to use completely.

    Args:
        clause: The elaborated clause
        names: Its Ͷ-names that escape into the head
        translation: The clause's ν-goal translation
    """
    clause: ElaboratedClause
    names: Tuple[Name, ...]
    translation: ElaboratedClause

    @property
    def location(self) -> Optional[Tuple[str, int, int]]:
        return self.clause.location

    def __str__(self):
        filename, line, column = self.location or ("<input>", 0, 0)
        labels = ", ".join(n.display for n in self.names)
        message = (f"warning: clause is not nu-goal and {labels} may escape into its head; "
                   f"equational resolution can miss answers\n"
                   f"  clause:    {show_clause(self.clause, clause_labels(self.clause))}\n"
                   f"  nu-goal:   {show_clause(self.translation, clause_labels(self.translation))}")
        return format_location(filename, line, column, message)


def _head_after_equations(clause):
    """The head with the body's top-level `X = t` equations substituted."""
    bound = {v.id for v in clause.variables}
    theta = {}
    for goal in conjuncts(clause.body):
        if not isinstance(goal, Eq):
            continue
        for var, value in ((goal.left, goal.right), (goal.right, goal.left)):
            if (isinstance(var, Var) and not var.perm and var.id in bound
                    and var.id not in theta and not occurs(var.id, value)):
                theta[var.id] = value
                break
    args = clause.head.args
    for _ in range(len(theta)):
        args = tuple(apply_subst(theta, a) for a in args)
    return args


def _exposure(name, t, found):
    """
    Collect what exposes `name` in `t` outside abstractions over it: the
    name itself (returns True) or variables, appended to `found`.
    """
    if isinstance(t, Name):
        return t == name
    if isinstance(t, Var):
        if name in t.perm.names():
            return True
        found.append(t)
        return False
    if isinstance(t, Abs) and t.binder == name:
        return False
    return any([_exposure(name, sub, found) for sub in subterms(t)])


def _guards(clause, signature=None):
    """
    Pairs (a, X.id) such that the body forces a # X: a top-level `a # t`
    with X exposed in t, or X the result of a flattened function call whose
    arguments are all guarded for a.
    """
    guards = set()
    for goal in conjuncts(clause.body):
        if not isinstance(goal, Fresh) or not isinstance(goal.name, Name):
            continue
        found = []
        _exposure(goal.name, goal.term, found)
        guards |= {(goal.name, v.id) for v in found if not v.perm}
    if signature is None:
        return guards
    flattened = {f + FLATTEN_SUFFIX for f in signature.functions()}
    calls = [g for g in conjuncts(clause.body)
             if isinstance(g, Atom) and g.pred in flattened and g.args
             and isinstance(g.args[-1], Var) and not g.args[-1].perm]
    changed = True
    while changed:
        changed = False
        for name in clause.names:
            for call in calls:
                result = (name, call.args[-1].id)
                if result in guards:
                    continue
                found = []
                if any([_exposure(name, a, found) for a in call.args[:-1]]):
                    continue
                if all(not v.perm and (name, v.id) in guards for v in found):
                    guards.add(result)
                    changed = True
    return guards


def escaping_names(clause, signature=None):
    """
    The Ͷ-names of a clause that may occur free in an instance of its head.

    A name escapes when it occurs free in the head, or when a head variable
    outside every abstraction over the name may hold it and the body has no
    top-level guard `a # X`. Body equations `X = t` are substituted first.

    Args:
        clause (ElaboratedClause): The clause
        signature (Signature, optional): Used to rule out variables whose
            sort cannot contain names of the right type

    Returns:
        list: The escaping names, in binding order
    """
    args = _head_after_equations(clause)
    guards = _guards(clause, signature)
    escaping = []
    for name in clause.names:
        exposed = []
        if any([_exposure(name, a, exposed) for a in args]):
            escaping.append(name)
            continue
        for var in exposed:
            if (name, var.id) in guards:
                continue
            if signature is not None and not signature.may_contain(var.sort, name.name_type):
                continue
            escaping.append(name)
            break
    return escaping


def warn_incomplete(clauses, signature=None):
    """
    Diagnose clauses for which equational backchaining may be incomplete.

    Clauses that are ν-goal never produce a diagnostic. Other clauses are
    reported when one of their Ͷ-names escapes into the head.

    Args:
        clauses (list): Elaborated clauses
        signature (Signature, optional): Program signature

    Returns:
        list: Diagnostic objects in program order
    """
    diagnostics = []
    for clause in clauses:
        if is_nu_goal(clause):
            continue
        names = escaping_names(clause, signature)
        if names:
            diagnostics.append(Diagnostic(clause, tuple(names), nu_goal_translate(clause, signature)))
    logger.info(f"Incompleteness check: {len(diagnostics)} of {len(clauses)} clauses flagged")
    return diagnostics
