"""
Type expressions ("sorts") shared by the type checker, the nominal term
representation and the Herbrand oracle.

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
from dataclasses import dataclass
from typing import Dict, Tuple, Union

# Built-in type constructors
INT = "int"
CHAR = "char"
LIST = "list"
PAIR = "*"
UNIT = "unit"
ABS = "abs"
PROP = "o"

BUILTIN_TYPES = {INT: 0, CHAR: 0, LIST: 1, PAIR: 2, UNIT: 0, ABS: 2, PROP: 0}


@dataclass(frozen=True)
class TCon:
    """A type constructor applied to arguments: `exp`, `list id`, `<id>exp`."""
    name: str
    args: Tuple["Sort", ...] = ()

    def __str__(self):
        return show_sort(self)


@dataclass(frozen=True)
class TVar:
    """A type variable. Rigid variables only unify with themselves."""
    name: str
    rigid: bool = False

    def __str__(self):
        return self.name


Sort = Union[TCon, TVar]


def list_of(elem):
    return TCon(LIST, (elem,))


def pair_of(fst, snd):
    return TCon(PAIR, (fst, snd))


def abs_of(name_type, body):
    return TCon(ABS, (name_type, body))


PROP_SORT = TCon(PROP)
INT_SORT = TCon(INT)
CHAR_SORT = TCon(CHAR)
UNIT_SORT = TCon(UNIT)


def show_sort(sort):
    """
    Render a sort in concrete syntax.

    Args:
        sort (Sort): The sort to print

    Returns:
        str: e.g. `list (id,ty)` or `<chan>proc`
    """
    if isinstance(sort, TVar):
        return sort.name
    if sort.name == PAIR:
        return f"({show_sort(sort.args[0])},{show_sort(sort.args[1])})"
    if sort.name == ABS:
        return f"<{show_sort(sort.args[0])}>{_show_atomic(sort.args[1])}"
    if not sort.args:
        return sort.name
    return " ".join([sort.name] + [_show_atomic(a) for a in sort.args])


def _show_atomic(sort):
    text = show_sort(sort)
    if isinstance(sort, TCon) and sort.args and sort.name not in (PAIR, ABS):
        return f"({text})"
    return text


def type_vars(sort):
    """Return the set of type variable names occurring in a sort."""
    if isinstance(sort, TVar):
        return {sort.name}
    found = set()
    for arg in sort.args:
        found |= type_vars(arg)
    return found


def substitute(sort, mapping: Dict[str, "Sort"]):
    """Replace type variables by name."""
    if isinstance(sort, TVar):
        return mapping.get(sort.name, sort)
    if not sort.args:
        return sort
    return TCon(sort.name, tuple(substitute(a, mapping) for a in sort.args))


def is_ground(sort):
    return not type_vars(sort)
