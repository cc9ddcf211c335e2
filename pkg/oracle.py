"""
Bottom-up semantics over finite ground universes: the one-step deduction
operator, goal satisfaction and least-fixpoint iteration. Used as an
independent oracle for the resolution engine.

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
import itertools
import logging
from typing import Dict, Iterable, List

from config import (DEFAULT_LIST_LENGTH, DEFAULT_MAX_ITERATIONS, DEFAULT_POOL_SIZE,
                    DEFAULT_UNIVERSE_DEPTH)
from formulas import (And, Atom, ElaboratedClause, Eq, Equiv, Exists, Forall, Fresh, Implies,
                      New, Or, Top, conjuncts, free_names, free_variables, rename_formula,
                      subst_formula)
from sorts import ABS, CHAR, INT, LIST, PAIR, UNIT, TCon, TVar, show_sort, substitute
from terms import (Abs, App, Char, Cons, Const, Int, NIL, Name, Pair, Permutation, UNIT as UNIT_TERM,
                   alpha_eq, alpha_key, apply_perm, apply_subst, fresh_for,
                   ground_equivariant, show, subterms)
from utils import NomlogError, NonConvergence, UniverseExhausted

logger = logging.getLogger(__name__)


class GroundUniverse:
    """
    Finite sets of ground terms per sort: every term of constructor depth at
    most `depth` over a pool of `pool_size` names per name-type.

    Args:
        signature (Signature): Declares constructors and name-types
        depth (int): Constructor depth bound
        pool_size (int): Names per name-type
        list_length (int): Longest list enumerated
        type_depths (dict, optional): Tighter depth bounds keyed by the
            head type-constructor name (`exp`, `list`, ...)
        literals (iterable, optional): Int and Char terms forming the
            universe of the built-in types
    """

    def __init__(self, signature, depth=DEFAULT_UNIVERSE_DEPTH, pool_size=DEFAULT_POOL_SIZE,
                 list_length=DEFAULT_LIST_LENGTH, type_depths=None, literals=()):
        self.signature = signature
        self.depth = depth
        self.pool_size = pool_size
        self.list_length = list_length
        self.type_depths = dict(type_depths or {})
        self.literals = list(literals)
        self.pool = self._make_pool()
        self._cache: Dict[tuple, List] = {}

    @classmethod
    def for_program(cls, program, **options):
        """A universe over a loaded program's signature and literals."""
        return cls(program.signature, literals=program_literals(program), **options)

    def _make_pool(self):
        pool = {}
        initials = [nt[0] for nt in self.signature.name_types]
        for name_type in sorted(self.signature.name_types):
            prefix = name_type[0] if initials.count(name_type[0]) == 1 else name_type
            pool[name_type] = [Name(f"{prefix}{i}", name_type) for i in range(1, self.pool_size + 1)]
        return pool

    def names(self, name_type):
        return self.pool.get(name_type, [])

    def fresh_name(self, name_type, avoid):
        """
        A pool name of the given type outside `avoid`.

        Raises:
            UniverseExhausted: If the pool is too small
        """
        for name in self.names(name_type):
            if name not in avoid:
                return name
        raise UniverseExhausted(f"name pool for {name_type} has no name fresh for "
                                f"{', '.join(sorted(n.display for n in avoid))}; increase the pool size")

    def terms(self, sort, depth=None):
        """
        Ground terms of a sort up to a depth, one per α-class, in a
        deterministic order.

        Raises:
            UniverseExhausted: For sorts with type variables
        """
        if sort is None or not isinstance(sort, TCon) or _has_tvars(sort):
            raise UniverseExhausted(f"sort {show_sort(sort) if sort is not None else '?'} "
                                    f"is not representable in a ground universe")
        depth = self.depth if depth is None else depth
        depth = min(depth, self.type_depths.get(sort.name, depth))
        key = (sort, depth)
        if key not in self._cache:
            self._cache[key] = _dedupe(self._enumerate(sort, depth))
        return self._cache[key]

    def _enumerate(self, sort, depth):
        if sort.name in self.signature.name_types:
            return list(self.names(sort.name))
        if sort.name == INT:
            return [t for t in self.literals if isinstance(t, Int)]
        if sort.name == CHAR:
            return [t for t in self.literals if isinstance(t, Char)]
        if sort.name == UNIT:
            return [UNIT_TERM]
        if sort.name == LIST:
            return self._lists(sort.args[0], depth, self.list_length)
        if depth == 0 and sort.name in (PAIR, ABS):
            return []
        if sort.name == PAIR:
            return [Pair(x, y) for x in self.terms(sort.args[0], depth - 1)
                    for y in self.terms(sort.args[1], depth - 1)]
        if sort.name == ABS:
            return [Abs(a, body) for a in self.names(sort.args[0].name)
                    for body in self.terms(sort.args[1], depth - 1)]
        found = []
        for constructor, (args, result) in self.signature.constructors.items():
            if not isinstance(result, TCon) or result.name != sort.name:
                continue
            mapping = {p.name: a for p, a in zip(result.args, sort.args) if isinstance(p, TVar)}
            if not args:
                found.append(Const(constructor))
            elif depth > 0:
                pools = [self.terms(substitute(a, mapping), depth - 1) for a in args]
                found.extend(App(constructor, tuple(combo)) for combo in itertools.product(*pools))
        return found

    def _lists(self, elem, depth, length):
        result = [NIL]
        if depth == 0 or length == 0:
            return result
        for head in self.terms(elem, depth - 1):
            for tail in self._lists(elem, depth - 1, length - 1):
                result.append(Cons(head, tail))
        return result

    def permutations(self):
        """Every permutation of the name pool, one name-type at a time combined."""
        groups = [self.pool[nt] for nt in sorted(self.pool)]
        for images in itertools.product(*(itertools.permutations(g) for g in groups)):
            mapping = {}
            for group, image in zip(groups, images):
                mapping.update(zip(group, image))
            yield Permutation.from_mapping(mapping)


def _has_tvars(sort):
    if isinstance(sort, TVar):
        return True
    return any(_has_tvars(a) for a in sort.args)


def _dedupe(terms):
    seen = set()
    result = []
    for t in terms:
        key = alpha_key(t)
        if key not in seen:
            seen.add(key)
            result.append(t)
    return result


def program_literals(program):
    """Int and Char literals occurring in a program's clauses."""
    found = {}

    def visit(t):
        if isinstance(t, (Int, Char)):
            found.setdefault((type(t).__name__, t.value), t)
        for sub in subterms(t):
            visit(sub)

    def visit_formula(f):
        if isinstance(f, Atom):
            for a in f.args:
                visit(a)
        elif isinstance(f, (Eq, Equiv)):
            visit(f.left)
            visit(f.right)
        elif isinstance(f, Fresh):
            visit(f.term)
        elif isinstance(f, (And, Or)):
            visit_formula(f.left)
            visit_formula(f.right)
        elif isinstance(f, (Exists, Forall, New)):
            visit_formula(f.body)
        elif isinstance(f, Implies):
            visit_formula(f.goal)
            visit_formula(f.clause)

    for clause in program.elaborated:
        visit_formula(clause.head)
        visit_formula(clause.body)
    return list(found.values())


class AtomSet:
    """A set of ground atoms identified up to α-equivalence."""

    def __init__(self, atoms: Iterable[Atom] = ()):
        self._atoms: Dict[tuple, Atom] = {}
        for atom in atoms:
            self.add(atom)

    @staticmethod
    def key(atom):
        return alpha_key(atom.as_term())

    def add(self, atom):
        key = self.key(atom)
        if key in self._atoms:
            return False
        self._atoms[key] = atom
        return True

    def __contains__(self, atom):
        return self.key(atom) in self._atoms

    def __len__(self):
        return len(self._atoms)

    def __iter__(self):
        return iter(self._atoms.values())

    def __eq__(self, other):
        return isinstance(other, AtomSet) and set(self._atoms) == set(other._atoms)

    def copy(self):
        result = AtomSet()
        result._atoms = dict(self._atoms)
        return result

    def union(self, other):
        result = self.copy()
        for atom in other:
            result.add(atom)
        return result

    def issubset(self, other):
        return all(k in other._atoms for k in self._atoms)

    def with_predicate(self, pred):
        return [a for a in self if a.pred == pred]

    def sorted(self):
        """Atoms ordered by predicate name, then printed form."""
        return sorted(self, key=lambda a: (a.pred, show(a.as_term())))

    def permuted(self, perm):
        return AtomSet(Atom(a.pred, tuple(apply_perm(perm, t) for t in a.args)) for a in self)

    def closed(self, universe):
        """Close under every permutation of the universe's name pool."""
        result = self.copy()
        for perm in universe.permutations():
            if perm:
                for atom in self:
                    result.add(Atom(atom.pred, tuple(apply_perm(perm, t) for t in atom.args)))
        return result


# ---------------------------------------------------------------------------
# Satisfaction

def _ground(theta, t):
    return apply_subst(theta, t)


def _support_of(formula, theta):
    grounded = subst_formula(theta, formula)
    return set(free_names(grounded))


def satisfies(atoms, goal, theta, universe):
    """
    Decide whether an atom set satisfies a goal under a ground substitution.

    Args:
        atoms (AtomSet): The interpretation
        goal (Formula): A goal whose free variables θ grounds
        theta (dict): Variable id to ground term
        universe (GroundUniverse): Domain of ∃ and source of fresh names

    Returns:
        bool: Truth of the goal
    """
    if isinstance(goal, Top):
        return True
    if isinstance(goal, Eq):
        return alpha_eq(_ground(theta, goal.left), _ground(theta, goal.right))
    if isinstance(goal, Fresh):
        name = _ground(theta, goal.name)
        if not isinstance(name, Name):
            raise NomlogError(f"freshness needs a name, got {show(name)}")
        return fresh_for(name, _ground(theta, goal.term))
    if isinstance(goal, Equiv):
        return ground_equivariant(_ground(theta, goal.left), _ground(theta, goal.right)) is not None
    if isinstance(goal, Atom):
        return Atom(goal.pred, tuple(_ground(theta, a) for a in goal.args)) in atoms
    if isinstance(goal, And):
        return satisfies(atoms, goal.left, theta, universe) and satisfies(atoms, goal.right, theta, universe)
    if isinstance(goal, Or):
        return satisfies(atoms, goal.left, theta, universe) or satisfies(atoms, goal.right, theta, universe)
    if isinstance(goal, Exists):
        return any(satisfies(atoms, goal.body, {**theta, goal.var.id: t}, universe)
                   for t in universe.terms(goal.var.sort))
    if isinstance(goal, New):
        fresh = universe.fresh_name(goal.name.name_type, _support_of(goal, theta))
        return satisfies(atoms, rename_formula(goal.name, fresh, goal.body), theta, universe)
    raise NomlogError(f"not a goal: {goal}")


# ---------------------------------------------------------------------------
# One-step deduction

def _schedule(variables, goals):
    """Group body conjuncts by the position of their last variable in `variables`."""
    position = {v.id: i for i, v in enumerate(variables)}
    buckets = [[] for _ in range(len(variables) + 1)]
    for goal in goals:
        ids = [position[v.id] for v in free_variables(goal) if v.id in position]
        buckets[max(ids) + 1 if ids else 0].append(goal)
    return buckets


def _clause_step(clause, atoms, universe, out):
    avoid = set()
    body, head = clause.body, clause.head
    for name in clause.names:
        fresh = universe.fresh_name(name.name_type, avoid)
        avoid.add(fresh)
        body = rename_formula(name, fresh, body)
        head = rename_formula(name, fresh, head)
    goals = conjuncts(body)
    # body variables first so that guards prune early
    order = []
    for v in free_variables(body) + free_variables(head):
        if any(v.id == c.id for c in clause.variables) and all(v.id != o.id for o in order):
            order.append(v)
    for v in clause.variables:
        if all(v.id != o.id for o in order):
            order.append(v)
    buckets = _schedule(order, goals)
    domains = [universe.terms(v.sort) for v in order]

    def extend(index, theta):
        if not all(satisfies(atoms, g, theta, universe) for g in buckets[index]):
            return
        if index == len(order):
            out.add(Atom(head.pred, tuple(_ground(theta, a) for a in head.args)))
            return
        var = order[index]
        for value in domains[index]:
            theta[var.id] = value
            extend(index + 1, theta)
        theta.pop(var.id, None)

    extend(0, {})


def _formula_step(d, atoms, theta, universe, out):
    if isinstance(d, Top):
        return
    if isinstance(d, Atom):
        out.add(Atom(d.pred, tuple(_ground(theta, a) for a in d.args)))
    elif isinstance(d, And):
        _formula_step(d.left, atoms, theta, universe, out)
        _formula_step(d.right, atoms, theta, universe, out)
    elif isinstance(d, Implies):
        if satisfies(atoms, d.goal, theta, universe):
            _formula_step(d.clause, atoms, theta, universe, out)
    elif isinstance(d, Forall):
        for value in universe.terms(d.var.sort):
            _formula_step(d.body, atoms, {**theta, d.var.id: value}, universe, out)
    elif isinstance(d, New):
        fresh = universe.fresh_name(d.name.name_type, _support_of(d, theta))
        _formula_step(rename_formula(d.name, fresh, d.body), atoms, theta, universe, out)
    else:
        raise NomlogError(f"not a clause: {d}")


def t_step(clause, atoms, universe):
    """
    Apply one clause's deduction operator to an atom set.

    Args:
        clause (ElaboratedClause or Formula): A closed clause
        atoms (AtomSet): The current interpretation S
        universe (GroundUniverse): Domain of ∀ and source of fresh names

    Returns:
        AtomSet: S together with every head instance whose body S satisfies
    """
    out = atoms.copy()
    if isinstance(clause, ElaboratedClause):
        _clause_step(clause, atoms, universe, out)
    else:
        _formula_step(clause, atoms, {}, universe, out)
    return out


def fixpoint(program, universe, max_iter=DEFAULT_MAX_ITERATIONS, clauses=None):
    """
    Least fixpoint of the program's deduction operator over a universe.

    Each iteration applies every clause to the previous set and closes the
    result under permutations of the name pool.

    Args:
        program: A loaded Program
        universe (GroundUniverse): The ground universe
        max_iter (int): Iterations allowed
        clauses (list, optional): Clauses to use instead of the program's

    Returns:
        AtomSet: The saturated set

    Raises:
        NonConvergence: If no fixed point is reached within max_iter
    """
    clauses = program.elaborated if clauses is None else clauses
    current = AtomSet()
    for iteration in range(1, max_iter + 1):
        nxt = current.copy()
        for clause in clauses:
            nxt = nxt.union(t_step(clause, current, universe))
        nxt = nxt.closed(universe)
        logger.info(f"Oracle iteration {iteration}: {len(nxt)} atoms")
        if len(nxt) == len(current):
            return current
        current = nxt
    raise NonConvergence(f"no fixed point after {max_iter} iterations "
                         f"({len(current)} atoms); shrink the universe or raise the limit")


def herbrand_base(program, universe, predicates=None):
    """
    Candidate ground atoms of some predicates over a universe.

    Args:
        program: A loaded Program
        universe (GroundUniverse): The ground universe
        predicates (list, optional): Predicate names; all user predicates
            by default

    Returns:
        list: Atoms in enumeration order
    """
    signature = program.signature
    predicates = predicates if predicates is not None else signature.predicates()
    base = []
    for pred in predicates:
        arg_sorts, _ = signature.defined[pred]
        pools = [universe.terms(sort) for sort in arg_sorts]
        base.extend(Atom(pred, tuple(args)) for args in itertools.product(*pools))
    return base


def format_atoms(atoms):
    """One atom per line, sorted canonically."""
    return "\n".join(show(a.as_term()) for a in atoms.sorted())
