"""
Example program corpus and informal lambda-calculus helpers: translation of
informal terms, types and contexts to nominal terms, and an independent
de Bruijn oracle for alpha-equivalence and substitution.

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Union

from config import BATCH_EXTENSION, CORPUS_DIR
from terms import App as NApp, Abs, Name, Pair, make_list

logger = logging.getLogger(__name__)

# Batch name -> program files it runs against, in load order
CORPUS_PROGRAMS: Dict[str, List[str]] = {
    "lambda": ["lambda.apl"],
    "refs": ["refs.apl"],
    "deptypes": ["deptypes.apl"],
    "linear": ["linear.apl"],
    "pi": ["pi.apl"],
    "dyadic": ["pi.apl", "dyadic.apl"],
    "cbv": ["pi.apl", "dyadic.apl", "cbv.apl"],
}

# Programs whose clauses are expected to pass the incompleteness check
COMPLETE_PROGRAMS = ["lambda.apl", "refs.apl", "deptypes.apl", "linear.apl", "pi.apl",
                     "dyadic.apl", "cbv.apl", "desk.apl"]


def corpus_path(name):
    """Absolute path of a corpus file."""
    return os.path.join(CORPUS_DIR, name)


def batch_path(name):
    return corpus_path(name + BATCH_EXTENSION)


def program_paths(name):
    """The program files a corpus batch runs against."""
    return [corpus_path(f) for f in CORPUS_PROGRAMS[name]]


# ---------------------------------------------------------------------------
# Informal lambda-calculus

@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class App:
    fun: "Informal"
    arg: "Informal"


@dataclass(frozen=True)
class Lam:
    var: str
    body: "Informal"


Informal = Union[Variable, App, Lam]


@dataclass(frozen=True)
class TyVar:
    name: str


@dataclass(frozen=True)
class Arrow:
    dom: "InformalType"
    cod: "InformalType"


InformalType = Union[TyVar, Arrow]


class NamePool:
    """
    Maps informal identifiers to names of one name-type, the same name
    every time an identifier is looked up.
    """

    def __init__(self, name_type):
        self.name_type = name_type
        self._names = {}

    def __getitem__(self, key):
        if key not in self._names:
            self._names[key] = Name(key, self.name_type)
        return self._names[key]

    def __contains__(self, key):
        return key in self._names


def trans_exp(e, pool):
    """
    Translate an informal term: x to var(x), e1 e2 to app(...) and
    λx.e to lam(x\\e).

    Args:
        e (Informal): The informal term
        pool (NamePool): Names of type `id` for the term's identifiers

    Returns:
        Term: The nominal term
    """
    if isinstance(e, Variable):
        return NApp("var", (pool[e.name],))
    if isinstance(e, App):
        return NApp("app", (trans_exp(e.fun, pool), trans_exp(e.arg, pool)))
    if isinstance(e, Lam):
        return NApp("lam", (Abs(pool[e.var], trans_exp(e.body, pool)),))
    raise TypeError(f"not an informal term: {e!r}")


def trans_ty(t, pool):
    if isinstance(t, TyVar):
        return NApp("varTy", (pool[t.name],))
    if isinstance(t, Arrow):
        return NApp("arrTy", (trans_ty(t.dom, pool), trans_ty(t.cod, pool)))
    raise TypeError(f"not an informal type: {t!r}")


def trans_ctx(ctx, names, types):
    """Translate [(x, τ), ...] to the list of pairs [(x, ⌈τ⌉), ...]."""
    return make_list([Pair(names[x], trans_ty(t, types)) for x, t in ctx])


def free_variables(e):
    if isinstance(e, Variable):
        return {e.name}
    if isinstance(e, App):
        return free_variables(e.fun) | free_variables(e.arg)
    return free_variables(e.body) - {e.var}


def swap_variables(x, y, e):
    """Exchange every occurrence of x and y, binders included."""
    other = {x: y, y: x}
    if isinstance(e, Variable):
        return Variable(other.get(e.name, e.name))
    if isinstance(e, App):
        return App(swap_variables(x, y, e.fun), swap_variables(x, y, e.arg))
    return Lam(other.get(e.var, e.var), swap_variables(x, y, e.body))


def to_de_bruijn(e, bound=()):
    """
    Locally nameless form: bound occurrences become ("bound", index), free
    ones stay ("free", name).
    """
    if isinstance(e, Variable):
        if e.name in bound:
            return ("bound", bound.index(e.name))
        return ("free", e.name)
    if isinstance(e, App):
        return ("app", to_de_bruijn(e.fun, bound), to_de_bruijn(e.arg, bound))
    return ("lam", to_de_bruijn(e.body, (e.var,) + bound))


def from_de_bruijn(d, avoid=frozenset(), bound=()):
    tag = d[0]
    if tag == "free":
        return Variable(d[1])
    if tag == "bound":
        return Variable(bound[d[1]])
    if tag == "app":
        return App(from_de_bruijn(d[1], avoid, bound), from_de_bruijn(d[2], avoid, bound))
    index = 0
    while f"v{index}" in avoid or f"v{index}" in bound:
        index += 1
    name = f"v{index}"
    return Lam(name, from_de_bruijn(d[1], avoid, (name,) + bound))


def alpha_equivalent_informal(e1, e2):
    return to_de_bruijn(e1) == to_de_bruijn(e2)


def _db_subst(d, x, s):
    tag = d[0]
    if tag == "free":
        return s if d[1] == x else d
    if tag == "bound":
        return d
    if tag == "app":
        return ("app", _db_subst(d[1], x, s), _db_subst(d[2], x, s))
    return ("lam", _db_subst(d[1], x, s))


def informal_subst(e, x, s):
    """
    Capture-avoiding e[x := s], computed on de Bruijn forms so that it
    shares no code with the nominal machinery.
    """
    avoid = free_variables(e) | free_variables(s) | {x}
    return from_de_bruijn(_db_subst(to_de_bruijn(e), x, to_de_bruijn(s)), frozenset(avoid))
