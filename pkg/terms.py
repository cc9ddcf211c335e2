"""
Nominal terms: names, permutations, suspended variables, abstraction and
the ground decision procedures (swapping, freshness, alpha-equality,
support, ground equivariance).

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
import itertools
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from sorts import Sort
from utils import NameTypeError, NonGroundError

# Names and variables draw identifiers from one counter, so identifier order
# is introduction order. next() on itertools.count is atomic under the GIL.
_ids = itertools.count(1)


def next_id():
    """Return a never-before-issued identifier."""
    return next(_ids)


class Term:
    """Base class of nominal terms."""

    def __str__(self):
        return show(self)


class Name(Term):
    """
    A name (atom) of a declared name-type. Equal iff identifiers are equal.

    Args:
        stem (str): Printable stem
        name_type (str): Identifier of the declared name-type
        generated (bool): True for names issued during search; these print
            with a numeric suffix
        id (int, optional): Explicit identifier, fresh by default
    """
    __slots__ = ("id", "stem", "name_type", "generated")

    def __init__(self, stem, name_type, generated=False, id=None):
        self.id = next_id() if id is None else id
        self.stem = stem
        self.name_type = name_type
        self.generated = generated

    def __eq__(self, other):
        return isinstance(other, Name) and other.id == self.id

    def __hash__(self):
        return hash(("name", self.id))

    def __repr__(self):
        return f"Name({self.display!r}, {self.name_type!r}, id={self.id})"

    @property
    def display(self):
        return f"{self.stem}_{self.id}" if self.generated else self.stem


def fresh_name(name_type, stem="a"):
    """Issue a brand-new name of the given name-type."""
    return Name(stem, name_type, generated=True)


def rename_name(name):
    """Issue a fresh copy of `name` with the same stem and name-type."""
    return Name(name.stem, name.name_type, generated=True)


@dataclass(frozen=True)
class Permutation:
    """
    A finite permutation of names stored as a list of swaps applied
    right-to-left: `swaps[-1]` acts first.
    """
    swaps: Tuple[Tuple[Name, Name], ...] = ()

    def __bool__(self):
        return bool(self.swaps)

    def apply_name(self, a):
        for x, y in reversed(self.swaps):
            if a == x:
                a = y
            elif a == y:
                a = x
        return a

    def inverse(self):
        return Permutation(tuple(reversed(self.swaps)))

    def compose(self, inner):
        """
        Return `self ∘ inner` (apply `inner` first). Adjacent inverse swaps
        at the junction cancel.
        """
        outer = list(self.swaps)
        rest = list(inner.swaps)
        while outer and rest and _same_swap(outer[-1], rest[0]):
            outer.pop()
            rest.pop(0)
        return Permutation(tuple(outer + rest))

    def names(self):
        found = []
        for a, b in self.swaps:
            for n in (a, b):
                if n not in found:
                    found.append(n)
        return found

    def support(self):
        """Names actually moved by the permutation."""
        return {a for a in self.names() if self.apply_name(a) != a}

    @classmethod
    def from_mapping(cls, mapping: Mapping[Name, Name]):
        """
        Build a swap list realizing a finite bijection given as a mapping.

        Args:
            mapping (dict): Name to Name, a bijection on its key set

        Returns:
            Permutation: A permutation agreeing with the mapping
        """
        current = dict(mapping)
        swaps = []
        for a in list(current):
            b = current[a]
            if b == a:
                continue
            # current = (a b) ∘ current', with a fixed by current'
            swaps.append((a, b))
            current = {x: _swap_name(a, b, y) for x, y in current.items()}
        return cls(tuple(swaps))

    def __str__(self):
        return "".join(f"({a.display}~{b.display})" for a, b in self.swaps)


IDENTITY = Permutation()


def _same_swap(s, t):
    return (s[0] == t[0] and s[1] == t[1]) or (s[0] == t[1] and s[1] == t[0])


def _swap_name(a, b, c):
    if c == a:
        return b
    if c == b:
        return a
    return c


@dataclass(frozen=True, eq=False)
class Var(Term):
    """
    A logic variable with a suspended permutation, applied once the variable
    is instantiated. Variables over a name-type carry `name_type`.
    """
    id: int
    stem: str
    sort: Optional[Sort] = None
    name_type: Optional[str] = None
    perm: Permutation = IDENTITY
    generated: bool = False

    def __eq__(self, other):
        return isinstance(other, Var) and other.id == self.id and other.perm == self.perm

    def __hash__(self):
        return hash(("var", self.id, self.perm))

    @property
    def display(self):
        return f"{self.stem}_{self.id}" if self.generated else self.stem

    def bare(self):
        """The same variable without its suspension."""
        return self if not self.perm else replace(self, perm=IDENTITY)

    def with_perm(self, perm):
        return replace(self, perm=perm)


def fresh_var(stem, sort=None, name_type=None):
    """Issue a brand-new variable."""
    return Var(next_id(), stem, sort, name_type, IDENTITY, True)


def rename_var(var):
    """Issue a fresh copy of `var` (same stem and sort, no suspension)."""
    return Var(next_id(), var.stem, var.sort, var.name_type, IDENTITY, True)


@dataclass(frozen=True)
class Abs(Term):
    """Name-abstraction ⟨binder⟩body. The binder may be a name-variable."""
    binder: Term
    body: Term


@dataclass(frozen=True)
class App(Term):
    functor: str
    args: Tuple[Term, ...]


@dataclass(frozen=True)
class Const(Term):
    name: str


@dataclass(frozen=True)
class Int(Term):
    value: int


@dataclass(frozen=True)
class Char(Term):
    value: str


@dataclass(frozen=True)
class Nil(Term):
    pass


@dataclass(frozen=True)
class Cons(Term):
    head: Term
    tail: Term


@dataclass(frozen=True)
class Pair(Term):
    fst: Term
    snd: Term


@dataclass(frozen=True)
class Unit(Term):
    pass


NIL = Nil()
UNIT = Unit()

# Mapping from variable identifier to term
GroundSubstitution = Dict[int, Term]


def make_list(items, tail=NIL):
    for item in reversed(list(items)):
        tail = Cons(item, tail)
    return tail


def make_tuple(items):
    """Right-nested pairs: (a,b,c) is (a,(b,c))."""
    items = list(items)
    result = items[-1]
    for item in reversed(items[:-1]):
        result = Pair(item, result)
    return result


# ---------------------------------------------------------------------------
# Swapping and permutation application

def swap(a, b, t):
    """
    Swap two names throughout a term, binders included.

    Args:
        a (Name): First name
        b (Name): Second name, same name-type as `a`
        t (Term): The term

    Returns:
        Term: (a b)·t
    """
    if a.name_type != b.name_type:
        raise NameTypeError(f"cannot swap {a.display} : {a.name_type} with {b.display} : {b.name_type}")
    return apply_perm(Permutation(((a, b),)), t)


def apply_perm(perm, t):
    """Apply a permutation to a term; on variables the permutation is suspended."""
    if not perm:
        return t
    return _permute(perm, t)


def _permute(perm, t):
    if isinstance(t, Name):
        return perm.apply_name(t)
    if isinstance(t, Var):
        return t.with_perm(perm.compose(t.perm))
    if isinstance(t, Abs):
        return Abs(_permute(perm, t.binder), _permute(perm, t.body))
    if isinstance(t, App):
        return App(t.functor, tuple(_permute(perm, a) for a in t.args))
    if isinstance(t, Cons):
        return Cons(_permute(perm, t.head), _permute(perm, t.tail))
    if isinstance(t, Pair):
        return Pair(_permute(perm, t.fst), _permute(perm, t.snd))
    return t


def rename(a, b, t):
    """
    Replace the name `a` by the name `b` throughout a term, including inside
    suspensions, without suspending anything new on variables. Valid as
    α-renaming when `b` is fresh and the variables of `t` avoid both names.
    """
    perm = Permutation(((a, b),))
    return _rename(perm, t)


def _rename(perm, t):
    if isinstance(t, Name):
        return perm.apply_name(t)
    if isinstance(t, Var):
        if not t.perm:
            return t
        swaps = tuple((perm.apply_name(x), perm.apply_name(y)) for x, y in t.perm.swaps)
        return t.with_perm(Permutation(swaps))
    if isinstance(t, Abs):
        return Abs(_rename(perm, t.binder), _rename(perm, t.body))
    if isinstance(t, App):
        return App(t.functor, tuple(_rename(perm, a) for a in t.args))
    if isinstance(t, Cons):
        return Cons(_rename(perm, t.head), _rename(perm, t.tail))
    if isinstance(t, Pair):
        return Pair(_rename(perm, t.fst), _rename(perm, t.snd))
    return t


def apply_subst(theta: Mapping[int, Term], t):
    """
    Apply a substitution (variable id to term), discharging suspensions.
    Variables outside the domain are left intact. The substitution is applied
    once, not iterated.
    """
    if not theta:
        return t
    return _subst(theta, t)


def _subst(theta, t):
    if isinstance(t, Var):
        value = theta.get(t.id)
        if value is None:
            return t
        return apply_perm(t.perm, value)
    if isinstance(t, Abs):
        return Abs(_subst(theta, t.binder), _subst(theta, t.body))
    if isinstance(t, App):
        return App(t.functor, tuple(_subst(theta, a) for a in t.args))
    if isinstance(t, Cons):
        return Cons(_subst(theta, t.head), _subst(theta, t.tail))
    if isinstance(t, Pair):
        return Pair(_subst(theta, t.fst), _subst(theta, t.snd))
    return t


# ---------------------------------------------------------------------------
# Traversals

def subterms(t):
    """Immediate subterms, binder included for abstractions."""
    if isinstance(t, Abs):
        return (t.binder, t.body)
    if isinstance(t, App):
        return t.args
    if isinstance(t, Cons):
        return (t.head, t.tail)
    if isinstance(t, Pair):
        return (t.fst, t.snd)
    return ()


def variables_of(t, found=None):
    """
    Free variables of a term in order of first appearance, without their
    suspensions.
    """
    if found is None:
        found = {}
    if isinstance(t, Var):
        found.setdefault(t.id, t.bare())
    else:
        for sub in subterms(t):
            variables_of(sub, found)
    return list(found.values())


def occurs(var_id, t):
    if isinstance(t, Var):
        return t.id == var_id
    return any(occurs(var_id, sub) for sub in subterms(t))


def names_of(t, found=None):
    """
    Every name occurring syntactically in a term: leaves, binders and the
    names mentioned by suspensions. Order of first appearance.
    """
    if found is None:
        found = []
    if isinstance(t, Name):
        if t not in found:
            found.append(t)
    elif isinstance(t, Var):
        for n in t.perm.names():
            if n not in found:
                found.append(n)
    else:
        for sub in subterms(t):
            names_of(sub, found)
    return found


def is_ground(t):
    if isinstance(t, Var):
        return False
    return all(is_ground(sub) for sub in subterms(t))


def depth(t):
    """Constructor depth: names, constants, literals, [] and () are 0."""
    children = subterms(t)
    if isinstance(t, Abs):
        children = (t.body,)
    if not children:
        return 0
    return 1 + max(depth(c) for c in children)


def _require_ground(t, operation):
    if not is_ground(t):
        raise NonGroundError(f"{operation} needs a ground term, got {show(t)}")


# ---------------------------------------------------------------------------
# Ground decision procedures

def fresh_for(a, t):
    """
    Decide a # t for a ground term.

    Args:
        a (Name): The name
        t (Term): A ground term

    Returns:
        bool: True iff `a` has no free occurrence in `t`
    """
    _require_ground(t, "freshness")
    return _fresh(a, t)


def _fresh(a, t):
    if isinstance(t, Name):
        return t != a
    if isinstance(t, Abs):
        return t.binder == a or _fresh(a, t.body)
    return all(_fresh(a, sub) for sub in subterms(t))


def alpha_eq(t, u):
    """
    Decide t ≈ u for ground terms, identifying abstractions up to renaming
    of their binders.
    """
    _require_ground(t, "alpha-equality")
    _require_ground(u, "alpha-equality")
    return _alpha(t, u)


def _alpha(t, u):
    if isinstance(t, Name) and isinstance(u, Name):
        if t.name_type != u.name_type:
            raise NameTypeError(f"comparing {t.display} : {t.name_type} with {u.display} : {u.name_type}")
        return t == u
    if isinstance(t, Abs) and isinstance(u, Abs):
        a, b = t.binder, u.binder
        if a.name_type != b.name_type:
            raise NameTypeError(f"comparing abstractions over {a.name_type} and {b.name_type}")
        if a == b:
            return _alpha(t.body, u.body)
        return _fresh(a, u.body) and _alpha(t.body, swap(a, b, u.body))
    if type(t) is not type(u):
        return False
    if isinstance(t, App):
        return (t.functor == u.functor and len(t.args) == len(u.args)
                and all(_alpha(x, y) for x, y in zip(t.args, u.args)))
    if isinstance(t, (Cons, Pair)):
        return all(_alpha(x, y) for x, y in zip(subterms(t), subterms(u)))
    return t == u


def support(t):
    """The finite set of names not fresh for a ground term."""
    _require_ground(t, "support")
    return _support(t)


def _support(t):
    if isinstance(t, Name):
        return {t}
    if isinstance(t, Abs):
        return _support(t.body) - {t.binder}
    found = set()
    for sub in subterms(t):
        found |= _support(sub)
    return found


def alpha_key(t, env=()):
    """
    A hashable key equal for alpha-equivalent ground terms: bound names are
    replaced by their binder distance.
    """
    if isinstance(t, Name):
        for index in range(len(env) - 1, -1, -1):
            if env[index] == t:
                return ("bound", len(env) - 1 - index)
        return ("name", t.id)
    if isinstance(t, Var):
        raise NonGroundError(f"alpha_key needs a ground term, got {show(t)}")
    if isinstance(t, Abs):
        return ("abs", t.binder.name_type, alpha_key(t.body, env + (t.binder,)))
    if isinstance(t, App):
        return ("app", t.functor) + tuple(alpha_key(a, env) for a in t.args)
    if isinstance(t, Cons):
        return ("cons", alpha_key(t.head, env), alpha_key(t.tail, env))
    if isinstance(t, Pair):
        return ("pair", alpha_key(t.fst, env), alpha_key(t.snd, env))
    if isinstance(t, Const):
        return ("const", t.name)
    if isinstance(t, Int):
        return ("int", t.value)
    if isinstance(t, Char):
        return ("char", t.value)
    return (type(t).__name__,)


def ground_equivariant(t, u):
    """
    Search for a permutation π with π·t ≈ u.

    The search ranges over all bijections of supp(t) ∪ supp(u) extended with
    one spare name per name-type.

    Args:
        t (Term): Ground term
        u (Term): Ground term

    Returns:
        Permutation or None: A witness, the identity first when t ≈ u
    """
    _require_ground(t, "equivariance")
    _require_ground(u, "equivariance")
    groups = {}
    for name in sorted(_support(t) | _support(u), key=lambda n: n.id):
        groups.setdefault(name.name_type, []).append(name)
    for name_type, members in groups.items():
        members.append(fresh_name(name_type, "spare"))
    domains = list(groups.values())
    for images in itertools.product(*(itertools.permutations(d) for d in domains)):
        mapping = {}
        for domain, image in zip(domains, images):
            mapping.update(zip(domain, image))
        perm = Permutation.from_mapping(mapping)
        try:
            if _alpha(apply_perm(perm, t), u):
                return perm
        except NameTypeError:
            return None
    return None


# ---------------------------------------------------------------------------
# Printing

def show(t, display: Optional[Mapping[int, str]] = None):
    """
    Render a term in concrete syntax.

    Args:
        t (Term): The term
        display (dict, optional): Identifier to display-string overrides for
            names and variables

    Returns:
        str: Concrete syntax, e.g. `lam(x\\app(var(x),var(y)))`
    """
    return _show(t, display or {})


def _label(x, display):
    return display.get(x.id, x.display)


def _show(t, display):
    if isinstance(t, Name):
        return _label(t, display)
    if isinstance(t, Var):
        prefix = "".join(f"({_label(a, display)}~{_label(b, display)})" for a, b in t.perm.swaps)
        return prefix + _label(t, display)
    if isinstance(t, Abs):
        return f"{_show(t.binder, display)}\\{_show(t.body, display)}"
    if isinstance(t, App):
        return f"{t.functor}({','.join(_show(a, display) for a in t.args)})"
    if isinstance(t, Const):
        return t.name
    if isinstance(t, Int):
        return str(t.value)
    if isinstance(t, Char):
        return "'" + t.value.replace("\\", "\\\\").replace("'", "\\'") + "'"
    if isinstance(t, Nil):
        return "[]"
    if isinstance(t, Cons):
        items = []
        while isinstance(t, Cons):
            items.append(_show(t.head, display))
            t = t.tail
        if isinstance(t, Nil):
            return f"[{','.join(items)}]"
        return f"[{','.join(items)}|{_show(t, display)}]"
    if isinstance(t, Pair):
        return f"({_show(t.fst, display)},{_show(t.snd, display)})"
    if isinstance(t, Unit):
        return "()"
    raise TypeError(f"not a term: {t!r}")


def display_names(terms: Iterable[Term], start=None):
    """
    Canonical display labels for generated names and variables: `stem_k`
    numbered per stem in order of first appearance.

    Args:
        terms (iterable): Terms to scan, in display order
        start (dict, optional): Labels already assigned, extended in place

    Returns:
        dict: Identifier to label
    """
    labels = {} if start is None else start
    counters = {}
    for label in labels.values():
        stem, _, index = label.rpartition("_")
        if stem and index.isdigit():
            counters[stem] = max(counters.get(stem, 0), int(index))

    def visit(t):
        items: List = []
        if isinstance(t, (Name, Var)):
            items.append(t)
        if isinstance(t, Var):
            for a, b in t.perm.swaps:
                items.extend((a, b))
        for x in items:
            if x.generated and x.id not in labels:
                counters[x.stem] = counters.get(x.stem, 0) + 1
                labels[x.id] = f"{x.stem}_{counters[x.stem]}"
        for sub in subterms(t):
            visit(sub)

    for t in terms:
        visit(t)
    return labels
