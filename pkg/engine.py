"""
Goal-directed proof search: a state-transition machine over
⟨Σ | Γ | ∇⟩ states with backchaining by equational unification, explored
depth-first with chronological backtracking.

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

from config import DEFAULT_DEPTH_LIMIT
from formulas import (And, Atom, ElaboratedClause, Eq, Equiv, Exists, Formula, Fresh, New, Or,
                      Top, conj, conjuncts, rename_formula, show_formula, subst_formula)
from solver import (EMPTY_STORE, Store, add_guard, check_satisfiable, residual, resolve,
                    solve_constraints)
from terms import (Name, Term, Var, display_names, names_of, rename_name, rename_var, show,
                   variables_of)
from utils import DepthLimitExceeded, NomlogError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Limits:
    """
    Search limits.

    Args:
        depth: Transitions allowed on one branch
        solutions: Stop after this many answers; None for all
    """
    depth: int = DEFAULT_DEPTH_LIMIT
    solutions: Optional[int] = None


@dataclass(frozen=True)
class MachineState:
    """
    A state ⟨Σ | Γ | ∇⟩ plus the branch depth and the transition that
    produced it (rule name and consumed goal), for tracing.
    """
    sigma: Tuple[Term, ...]
    goals: Tuple[Formula, ...]
    store: Store = EMPTY_STORE
    depth: int = 0
    via: Optional[Tuple[str, Formula]] = None


@dataclass
class Answer:
    """
    One solution of a query.

    Attributes:
        bindings: (query variable name, resolved term) in query order
        residual: Freshness and delayed constraints on what remains open
        store: The final constraint store
        introduced: Names and variables the derivation introduced, in order
        unbound: Query variables left unbound, not printed
    """
    bindings: List[Tuple[str, Term]]
    residual: List[Formula] = field(default_factory=list)
    store: Store = EMPTY_STORE
    introduced: Tuple[Term, ...] = ()
    unbound: Tuple[str, ...] = ()

    def display(self):
        """Canonical labels for the generated names and variables of this answer."""
        terms = [t for _, t in self.bindings]
        for c in self.residual:
            terms.extend([c.name, c.term] if isinstance(c, Fresh) else [c.left, c.right])
        return display_names(terms)

    def lines(self):
        """Bindings then residual constraints, one per line, in concrete syntax."""
        labels = self.display()
        out = [f"{name} = {show(term, labels)}" for name, term in self.bindings if name not in self.unbound]
        out += [show_formula(c, labels) for c in self.residual]
        return out

    def closed_form(self):
        """The answer as ∃Σ′[∇′], in concrete syntax."""
        labels = self.display()
        mentioned = set()
        for _, term in self.bindings:
            mentioned |= {x.id for x in variables_of(term)} | {n.id for n in names_of(term)}
        for c in self.residual:
            for t in ([c.name, c.term] if isinstance(c, Fresh) else [c.left, c.right]):
                mentioned |= {x.id for x in variables_of(t)} | {n.id for n in names_of(t)}
        prefix = []
        for x in self.introduced:
            if x.id in mentioned:
                keyword = "new" if isinstance(x, Name) else "exists"
                prefix.append(f"{keyword} {show(x, labels)}.")
        body = ", ".join(self.lines()) or "true"
        return " ".join(prefix + [f"[{body}]"])

    def __str__(self):
        return ",\n".join(self.lines()) or "yes"


def freshen_clause(clause: ElaboratedClause):
    """
    Rename every bound name and variable of a clause to brand-new ones.

    Args:
        clause (ElaboratedClause): A closed elaborated clause

    Returns:
        ElaboratedClause: An α-equivalent clause over fresh identifiers
    """
    if not clause.names and not clause.variables:
        return clause
    theta = {}
    variables = []
    for var in clause.variables:
        fresh = rename_var(var)
        theta[var.id] = fresh
        variables.append(fresh)
    body = subst_formula(theta, clause.body)
    head = subst_formula(theta, clause.head)
    names = []
    for name in clause.names:
        fresh = rename_name(name)
        body = rename_formula(name, fresh, body)
        head = rename_formula(name, fresh, head)
        names.append(fresh)
    return ElaboratedClause(tuple(names), tuple(variables), body, head, clause.location)


def backchain(atom: Atom, clause: ElaboratedClause):
    """
    The residual goal of focusing on a clause to prove an atom:
    Ͷā.∃X̄.(head ≈ atom ∧ body).

    Args:
        atom (Atom): The goal
        clause (ElaboratedClause): A freshened clause

    Returns:
        Formula or None: The residual goal; None when the predicates differ
    """
    if clause.head.pred != atom.pred or len(clause.head.args) != len(atom.args):
        return None
    goal = conj([Eq(clause.head.as_term(), atom.as_term())] + conjuncts(clause.body))
    for var in reversed(clause.variables):
        goal = Exists(var, goal)
    for name in reversed(clause.names):
        goal = New(name, goal, outer=True)
    return goal


class Engine:
    """
    Depth-first proof search over a loaded program.

    Args:
        program: A loaded Program (anything with `clauses_for(pred)`)
        limits (Limits, optional): Depth and solution limits
        trace_callback (callable, optional): Receives one line
            `rule | goal | store-size` per transition taken
    """

    def __init__(self, program, limits=None, trace_callback: Optional[Callable[[str], None]] = None):
        self.program = program
        self.limits = limits or Limits()
        self.trace_callback = trace_callback

    def backchain(self, atom, clause):
        return backchain(atom, freshen_clause(clause))

    def step(self, state: MachineState):
        """
        All successors of a state, obtained by reducing its leftmost goal.

        Returns:
            list: Successor states in search order; empty at a failure leaf
        """
        goal, rest = state.goals[0], state.goals[1:]
        depth = state.depth + 1

        def successor(rule, goals, store=state.store, sigma=state.sigma):
            return MachineState(sigma, tuple(goals) + rest, store, depth, (rule, goal))

        if isinstance(goal, Top):
            return [successor("true", ())]
        if isinstance(goal, And):
            return [successor("and", (goal.left, goal.right))]
        if isinstance(goal, Or):
            return [successor("or-left", (goal.left,)), successor("or-right", (goal.right,))]
        if isinstance(goal, Exists):
            fresh = rename_var(goal.var)
            body = subst_formula({goal.var.id: fresh}, goal.body)
            return [successor("exists", (body,), sigma=state.sigma + (fresh,))]
        if isinstance(goal, New):
            fresh = rename_name(goal.name)
            body = rename_formula(goal.name, fresh, goal.body)
            store = state.store if goal.outer else add_guard(state.store, fresh)
            return [successor("new", (body,), store=store, sigma=state.sigma + (fresh,))]
        if isinstance(goal, (Eq, Fresh, Equiv)):
            outcome = solve_constraints([goal], state.store)
            if not outcome.consistent:
                logger.debug(f"Constraint {goal} inconsistent: {outcome.reason}")
                return []
            return [successor("constraint", (), store=outcome.store)]
        if isinstance(goal, Atom):
            successors = []
            for clause in self.program.clauses_for(goal.pred):
                residual_goal = self.backchain(goal, clause)
                if residual_goal is not None:
                    successors.append(successor("backchain", (residual_goal,)))
            logger.debug(f"Backchaining on {goal}: {len(successors)} candidate clauses")
            return successors
        raise NomlogError(f"cannot solve goal {goal}")

    def _trace(self, state):
        if self.trace_callback is not None and state.via is not None:
            rule, goal = state.via
            self.trace_callback(f"{rule} | {show_formula(goal)} | {state.store.size()}")

    def solve(self, query):
        """
        Enumerate the answers of a query lazily, depth-first.

        Args:
            query: A CoreQuery, or a bare goal Formula

        Yields:
            Answer: Each solution whose store is satisfiable

        Raises:
            DepthLimitExceeded: After the last answer, if some branch was cut
        """
        goal = getattr(query, "goal", query)
        variables = list(getattr(query, "variables", []))
        names = list(getattr(query, "names", []))
        sigma = tuple(names) + tuple(v for _, v in variables)
        stack = [MachineState(sigma, (goal,))]
        found = 0
        cut = False
        while stack:
            state = stack.pop()
            self._trace(state)
            if not state.goals:
                if not check_satisfiable(state.store):
                    logger.debug("Terminal store unsatisfiable")
                    continue
                found += 1
                yield self._answer(state, variables, len(sigma))
                if self.limits.solutions is not None and found >= self.limits.solutions:
                    return
                continue
            if state.depth >= self.limits.depth:
                cut = True
                continue
            stack.extend(reversed(self.step(state)))
        if cut:
            raise DepthLimitExceeded(self.limits.depth)

    def _answer(self, state, variables, prefix):
        bindings = [(name, resolve(state.store, var)) for name, var in variables]
        unbound = tuple(name for (name, var), (_, term) in zip(variables, bindings)
                        if isinstance(term, Var) and term.id == var.id and not term.perm)
        open_vars = {}
        for _, term in bindings:
            for v in variables_of(term):
                open_vars.setdefault(v.id, v)
        constraints = residual(state.store, open_vars.values())
        visible = set(state.sigma[:prefix])
        return Answer(bindings, _drop_hidden_names(constraints, bindings, visible), state.store,
                      state.sigma[prefix:], unbound)


def _drop_hidden_names(constraints, bindings, visible):
    """
    Remove suspensions `a # X` on a name the answer never shows. Such a name
    is Ͷ-bound in the answer, so some fresh choice satisfies all of them.
    """
    shown = set()
    for _, term in bindings:
        shown |= {n.id for n in names_of(term)}
    for c in constraints:
        if not (isinstance(c, Fresh) and isinstance(c.name, Name)):
            for t in ([c.name, c.term] if isinstance(c, Fresh) else [c.left, c.right]):
                shown |= {n.id for n in names_of(t)}
    return [c for c in constraints
            if not (isinstance(c, Fresh) and isinstance(c.name, Name)
                    and c.name.id not in shown and c.name not in visible)]


def solve(query, program, limits=None, trace_callback=None):
    """Convenience wrapper around Engine.solve."""
    return Engine(program, limits, trace_callback).solve(query)


def derivable(atom, program, limits=None):
    """
    Whether a ground atom has a derivation.

    Args:
        atom (Atom): A ground atom
        program: A loaded Program
        limits (Limits, optional): Search limits; the solution count is
            forced to one

    Returns:
        bool: True iff the search finds an answer

    Raises:
        DepthLimitExceeded: If no answer was found and a branch was cut
    """
    depth = limits.depth if limits is not None else DEFAULT_DEPTH_LIMIT
    for _ in Engine(program, Limits(depth, 1)).solve(atom):
        return True
    return False
