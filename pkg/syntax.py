"""
Concrete syntax of nomlog programs and queries: the lark grammar, the
surface syntax tree it is transformed into, and a printer back to concrete
syntax.

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
import logging
import re
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken

from sorts import PAIR, Sort, TCon, TVar, abs_of, pair_of, show_sort
from utils import ParseError

logger = logging.getLogger(__name__)

GRAMMAR = r"""
    program: _item*
    goal_text: goal "."

    _item: decl | clause | query

    decl: ident_list ":" kind "."                     -> kind_decl
        | ident_list ":" "name_type" "."             -> name_type_decl
        | ident_list ":" con_type "."                -> con_decl
        | ident_list "::" con_type "."               -> def_decl
        | "type" IDENT type_params "=" type "."      -> abbrev_decl

    ident_list: IDENT ("," IDENT)*
    kind: "type" kind_arrow*
    kind_arrow: "->" "type"
    type_params: UIDENT*
    con_type: type ["->" type]

    ?type: IDENT type_atom+                -> type_app
         | type_atom
    ?type_atom: IDENT                      -> type_con
         | UIDENT                          -> type_var
         | "<" IDENT ">" type_atom         -> abs_type
         | "(" type ("," type)+ ")"        -> tuple_type
         | "(" type ")"                    -> paren_type

    clause: atom "."                       -> fact
          | atom ":-" goal "."             -> rule
          | plain "=" term "."             -> fun_fact
          | plain "=" term ":-" goal "."   -> fun_rule

    query: "?-" goal "."

    ?goal: conj
         | conj ";" goal                   -> or_goal
         | conj_q

    ?conj_q: quant
         | goal_item "," conj_q            -> and_goal

    ?conj: goal_item
         | goal_item "," conj              -> and_goal

    ?quant: "new" IDENT ("," IDENT)* "." goal         -> new_goal
          | "exists" UIDENT ("," UIDENT)* "." goal    -> exists_goal

    ?goal_item: "true"                     -> true_goal
         | atom
         | eq_lhs "=" term                 -> eq_goal
         | binder "#" term                 -> fresh_goal
         | "(" goal ")"

    atom: IDENT "(" term ("," term)* ")"
        | IDENT

    ?eq_lhs: plain
         | binder "\\" abs_term            -> abstraction

    ?term: abs_term "::" term              -> cons_op
         | abs_term

    ?abs_term: binder "\\" abs_term        -> abstraction
         | primary

    ?binder: IDENT                         -> ident
         | UIDENT                          -> var

    ?primary: plain
         | "(" ")"                         -> unit
         | "(" term ")"
         | "(" term ("," term)+ ")"        -> tuple
         | "(" IDENT "~" IDENT ")" primary -> swap_term

    ?plain: IDENT                          -> ident
         | UIDENT                          -> var
         | "_"                             -> anon
         | IDENT "(" term ("," term)* ")"  -> app
         | "[" "]"                         -> nil
         | "[" term ("," term)* ["|" term] "]" -> list_term
         | INT                             -> int_lit
         | CHAR                            -> char_lit

    IDENT: /[a-z][A-Za-z0-9_']*/
    UIDENT: /[A-Z][A-Za-z0-9_']*/
    INT: /-?[0-9]+/
    CHAR: /'([^'\\]|\\.)'/
    COMMENT: /%[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""


def _meta():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# Surface terms. `ty` and `role` are filled in by the type checker.

@dataclass
class SIdent:
    """A lowercase identifier in term position: a name or a constant."""
    name: str
    loc: Optional[Tuple[int, int]] = _meta()
    ty: Optional[Sort] = _meta()
    role: Optional[str] = _meta()


@dataclass
class SVar:
    name: str
    loc: Optional[Tuple[int, int]] = _meta()
    ty: Optional[Sort] = _meta()


@dataclass
class SApp:
    """Constructor application or defined-function call (role "con"/"fun")."""
    functor: str
    args: list
    loc: Optional[Tuple[int, int]] = _meta()
    ty: Optional[Sort] = _meta()
    role: Optional[str] = _meta()


@dataclass
class SAbs:
    binder: object
    body: object
    loc: Optional[Tuple[int, int]] = _meta()
    ty: Optional[Sort] = _meta()


@dataclass
class SSwap:
    left: SIdent
    right: SIdent
    term: object
    loc: Optional[Tuple[int, int]] = _meta()
    ty: Optional[Sort] = _meta()


@dataclass
class SInt:
    value: int
    loc: Optional[Tuple[int, int]] = _meta()
    ty: Optional[Sort] = _meta()


@dataclass
class SChar:
    value: str
    loc: Optional[Tuple[int, int]] = _meta()
    ty: Optional[Sort] = _meta()


@dataclass
class SNil:
    loc: Optional[Tuple[int, int]] = _meta()
    ty: Optional[Sort] = _meta()


@dataclass
class SCons:
    head: object
    tail: object
    loc: Optional[Tuple[int, int]] = _meta()
    ty: Optional[Sort] = _meta()


@dataclass
class STuple:
    items: list
    loc: Optional[Tuple[int, int]] = _meta()
    ty: Optional[Sort] = _meta()


@dataclass
class SUnit:
    loc: Optional[Tuple[int, int]] = _meta()
    ty: Optional[Sort] = _meta()


# ---------------------------------------------------------------------------
# Surface goals

@dataclass
class STrue:
    loc: Optional[Tuple[int, int]] = _meta()


@dataclass
class SAtom:
    pred: str
    args: list
    loc: Optional[Tuple[int, int]] = _meta()


@dataclass
class SEq:
    left: object
    right: object
    loc: Optional[Tuple[int, int]] = _meta()


@dataclass
class SFresh:
    name: object
    term: object
    loc: Optional[Tuple[int, int]] = _meta()


@dataclass
class SAnd:
    left: object
    right: object
    loc: Optional[Tuple[int, int]] = _meta()


@dataclass
class SOr:
    left: object
    right: object
    loc: Optional[Tuple[int, int]] = _meta()


@dataclass
class SNew:
    names: List[str]
    body: object
    loc: Optional[Tuple[int, int]] = _meta()
    sorts: Optional[list] = _meta()


@dataclass
class SExists:
    variables: List[str]
    body: object
    loc: Optional[Tuple[int, int]] = _meta()
    sorts: Optional[list] = _meta()


# ---------------------------------------------------------------------------
# Program items

@dataclass
class KindDecl:
    names: List[str]
    arity: int
    loc: Optional[Tuple[int, int]] = _meta()


@dataclass
class NameTypeDecl:
    names: List[str]
    loc: Optional[Tuple[int, int]] = _meta()


@dataclass
class ConDecl:
    names: List[str]
    arg_types: List[Sort]
    result: Sort
    loc: Optional[Tuple[int, int]] = _meta()


@dataclass
class DefDecl:
    """Predicate (result `o`) or function declaration."""
    names: List[str]
    arg_types: List[Sort]
    result: Sort
    loc: Optional[Tuple[int, int]] = _meta()


@dataclass
class TypeAbbrev:
    name: str
    params: List[str]
    body: Sort
    loc: Optional[Tuple[int, int]] = _meta()


@dataclass
class Clause:
    head: SAtom
    body: Optional[object] = None
    loc: Optional[Tuple[int, int]] = _meta()


@dataclass
class FunClause:
    """`f(t⃗) = u :- G.` before flattening."""
    lhs: SApp
    rhs: object
    body: Optional[object] = None
    loc: Optional[Tuple[int, int]] = _meta()


@dataclass
class Query:
    goal: object
    expect: Optional[str] = None
    loc: Optional[Tuple[int, int]] = _meta()
    end_line: Optional[int] = _meta()


def _loc(meta):
    if getattr(meta, "empty", True):
        return None
    return (meta.line, meta.column)


def _unescape(text):
    body = text[1:-1]
    if body.startswith("\\"):
        return {"n": "\n", "t": "\t"}.get(body[1], body[1])
    return body


class _TupleType(list):
    """A parenthesized tuple type, kept apart until we know if it is a domain."""


def _sort(node):
    if not isinstance(node, _TupleType):
        return node
    result = _sort(node[-1])
    for item in reversed(node[:-1]):
        result = pair_of(_sort(item), result)
    return result


@v_args(meta=True)
class _ToSurface(Transformer):
    """Build surface syntax nodes from the lark parse tree."""

    def program(self, meta, children):
        return list(children)

    def goal_text(self, meta, children):
        return children[0]

    # declarations
    def ident_list(self, meta, children):
        return [str(c) for c in children]

    def kind(self, meta, children):
        return len(children)

    def kind_arrow(self, meta, children):
        return 1

    def type_params(self, meta, children):
        return [str(c) for c in children]

    def con_type(self, meta, children):
        domain, result = children
        if result is None:
            return [], _sort(domain)
        # `(a,b,c) -> t` declares three arguments
        if isinstance(domain, _TupleType):
            return [_sort(d) for d in domain], _sort(result)
        return [domain], _sort(result)

    def kind_decl(self, meta, children):
        names, arity = children
        return KindDecl(names, arity, loc=_loc(meta))

    def name_type_decl(self, meta, children):
        return NameTypeDecl(children[0], loc=_loc(meta))

    def con_decl(self, meta, children):
        names, (args, result) = children
        return ConDecl(names, args, result, loc=_loc(meta))

    def def_decl(self, meta, children):
        names, (args, result) = children
        return DefDecl(names, args, result, loc=_loc(meta))

    def abbrev_decl(self, meta, children):
        name, params, body = children
        return TypeAbbrev(str(name), params, _sort(body), loc=_loc(meta))

    # types
    def type_app(self, meta, children):
        return TCon(str(children[0]), tuple(_sort(c) for c in children[1:]))

    def type_con(self, meta, children):
        return TCon(str(children[0]))

    def type_var(self, meta, children):
        return TVar(str(children[0]))

    def abs_type(self, meta, children):
        return abs_of(TCon(str(children[0])), _sort(children[1]))

    def tuple_type(self, meta, children):
        return _TupleType(children)

    def paren_type(self, meta, children):
        return _sort(children[0])

    # clauses
    def fact(self, meta, children):
        return Clause(children[0], None, loc=_loc(meta))

    def rule(self, meta, children):
        return Clause(children[0], children[1], loc=_loc(meta))

    def fun_fact(self, meta, children):
        return FunClause(children[0], children[1], None, loc=_loc(meta))

    def fun_rule(self, meta, children):
        return FunClause(children[0], children[1], children[2], loc=_loc(meta))

    def query(self, meta, children):
        return Query(children[0], None, loc=_loc(meta), end_line=getattr(meta, "end_line", None))

    # goals
    def or_goal(self, meta, children):
        return SOr(children[0], children[1], loc=_loc(meta))

    def and_goal(self, meta, children):
        return SAnd(children[0], children[1], loc=_loc(meta))

    def new_goal(self, meta, children):
        return SNew([str(c) for c in children[:-1]], children[-1], loc=_loc(meta))

    def exists_goal(self, meta, children):
        return SExists([str(c) for c in children[:-1]], children[-1], loc=_loc(meta))

    def true_goal(self, meta, children):
        return STrue(loc=_loc(meta))

    def atom(self, meta, children):
        return SAtom(str(children[0]), list(children[1:]), loc=_loc(meta))

    def eq_goal(self, meta, children):
        return SEq(children[0], children[1], loc=_loc(meta))

    def fresh_goal(self, meta, children):
        return SFresh(children[0], children[1], loc=_loc(meta))

    # terms
    def ident(self, meta, children):
        return SIdent(str(children[0]), loc=_loc(meta))

    def var(self, meta, children):
        return SVar(str(children[0]), loc=_loc(meta))

    def anon(self, meta, children):
        return SVar("_", loc=_loc(meta))

    def app(self, meta, children):
        return SApp(str(children[0]), list(children[1:]), loc=_loc(meta))

    def abstraction(self, meta, children):
        return SAbs(children[0], children[1], loc=_loc(meta))

    def cons_op(self, meta, children):
        return SCons(children[0], children[1], loc=_loc(meta))

    def nil(self, meta, children):
        return SNil(loc=_loc(meta))

    def list_term(self, meta, children):
        *items, tail = children
        result = tail if tail is not None else SNil(loc=_loc(meta))
        for item in reversed(items):
            result = SCons(item, result, loc=_loc(meta))
        return result

    def unit(self, meta, children):
        return SUnit(loc=_loc(meta))

    def tuple(self, meta, children):
        return STuple(list(children), loc=_loc(meta))

    def swap_term(self, meta, children):
        a, b, term = children
        return SSwap(SIdent(str(a)), SIdent(str(b)), term, loc=_loc(meta))

    def int_lit(self, meta, children):
        return SInt(int(children[0]), loc=_loc(meta))

    def char_lit(self, meta, children):
        return SChar(_unescape(str(children[0])), loc=_loc(meta))


_parser = Lark(GRAMMAR, parser="lalr", start=["program", "goal_text"], propagate_positions=True,
               maybe_placeholders=True)

_EXPECT = re.compile(r"%\s*expect\s+(yes|no|count\s*=\s*\d+)")


def _parse(text, start, filename):
    try:
        tree = _parser.parse(text, start=start)
    except UnexpectedInput as e:
        if isinstance(e, UnexpectedCharacters):
            message = f"syntax error: unexpected character {e.char!r}"
        elif isinstance(e, UnexpectedEOF):
            message = "syntax error: unexpected end of input"
        elif isinstance(e, UnexpectedToken) and e.token.type == "$END":
            message = "syntax error: unexpected end of input"
        elif isinstance(e, UnexpectedToken):
            message = f"syntax error: unexpected {e.token!s}"
        else:
            message = f"syntax error: {e}"
        line = e.line if getattr(e, "line", -1) not in (None, -1) else None
        column = e.column if getattr(e, "column", -1) not in (None, -1) else None
        raise ParseError(message, filename, line, column) from e
    return _ToSurface().transform(tree)


def parse_program(text, filename="<input>"):
    """
    Parse program text into surface items.

    Args:
        text (str): Program text
        filename (str): Name used in error locations

    Returns:
        list: Declarations, clauses and queries in source order
    """
    items = _parse(text, "program", filename)
    lines = text.splitlines()
    for item in items:
        if isinstance(item, Query) and item.end_line is not None and item.end_line <= len(lines):
            match = _EXPECT.search(lines[item.end_line - 1])
            if match:
                item.expect = re.sub(r"\s+", "", match.group(1))
    logger.debug(f"Parsed {len(items)} items from {filename}")
    return items


def parse_goal(text, filename="<query>"):
    """
    Parse a single goal. A leading `?-` and the final `.` are optional.

    Returns:
        object: The surface goal
    """
    text = text.strip()
    if text.startswith("?-"):
        text = text[2:]
    text = text.strip()
    if not text.endswith("."):
        text += "."
    return _parse(text, "goal_text", filename)


# ---------------------------------------------------------------------------
# Printer

def show_term(t):
    """Render a surface term in concrete syntax."""
    if isinstance(t, (SIdent, SVar)):
        return t.name
    if isinstance(t, SApp):
        return f"{t.functor}({','.join(show_term(a) for a in t.args)})"
    if isinstance(t, SAbs):
        return f"{show_term(t.binder)}\\{show_term(t.body)}"
    if isinstance(t, SSwap):
        inner = show_term(t.term)
        if isinstance(t.term, SAbs):
            inner = f"({inner})"
        return f"({t.left.name}~{t.right.name}){inner}"
    if isinstance(t, SInt):
        return str(t.value)
    if isinstance(t, SChar):
        return "'" + t.value.replace("\\", "\\\\").replace("'", "\\'") + "'"
    if isinstance(t, SNil):
        return "[]"
    if isinstance(t, SCons):
        items = []
        while isinstance(t, SCons):
            items.append(show_term(t.head))
            t = t.tail
        if isinstance(t, SNil):
            return f"[{','.join(items)}]"
        return f"[{','.join(items)}|{show_term(t)}]"
    if isinstance(t, STuple):
        return f"({','.join(show_term(i) for i in t.items)})"
    if isinstance(t, SUnit):
        return "()"
    raise TypeError(f"not a surface term: {t!r}")


def show_goal(g, context=0):
    """Render a surface goal; `context` is the binding strength around it."""
    if isinstance(g, STrue):
        return "true"
    if isinstance(g, SAtom):
        return g.pred if not g.args else f"{g.pred}({','.join(show_term(a) for a in g.args)})"
    if isinstance(g, SEq):
        left = show_term(g.left)
        if left.startswith("("):
            # goal-level equations cannot start with a parenthesis
            return f"{show_term(g.right)} = {left}"
        return f"{left} = {show_term(g.right)}"
    if isinstance(g, SFresh):
        return f"{show_term(g.name)} # {show_term(g.term)}"
    if isinstance(g, SAnd):
        text = f"{show_goal(g.left, 3)}, {show_goal(g.right, 2)}"
        return f"({text})" if context > 2 else text
    if isinstance(g, SOr):
        text = f"{show_goal(g.left, 2)} ; {show_goal(g.right, 1)}"
        return f"({text})" if context > 1 else text
    if isinstance(g, (SNew, SExists)):
        keyword = "new" if isinstance(g, SNew) else "exists"
        bound = g.names if isinstance(g, SNew) else g.variables
        text = f"{keyword} {','.join(bound)}. {show_goal(g.body, 0)}"
        return f"({text})" if context > 0 else text
    raise TypeError(f"not a surface goal: {g!r}")


def _show_domain(arg_types, result):
    result_text = show_sort(result)
    if not arg_types:
        return result_text
    if len(arg_types) == 1:
        arg = show_sort(arg_types[0])
        if isinstance(arg_types[0], TCon) and arg_types[0].name == PAIR:
            arg = f"({arg})"
        return f"{arg} -> {result_text}"
    return f"({','.join(show_sort(a) for a in arg_types)}) -> {result_text}"


def show_item(item):
    """Render a program item (declaration, clause or query) in concrete syntax."""
    if isinstance(item, KindDecl):
        return f"{', '.join(item.names)} : {' -> '.join(['type'] * (item.arity + 1))}."
    if isinstance(item, NameTypeDecl):
        return f"{', '.join(item.names)} : name_type."
    if isinstance(item, ConDecl):
        return f"{', '.join(item.names)} : {_show_domain(item.arg_types, item.result)}."
    if isinstance(item, DefDecl):
        return f"{', '.join(item.names)} :: {_show_domain(item.arg_types, item.result)}."
    if isinstance(item, TypeAbbrev):
        params = "".join(f" {p}" for p in item.params)
        return f"type {item.name}{params} = {show_sort(item.body)}."
    if isinstance(item, Clause):
        head = show_goal(item.head)
        return f"{head}." if item.body is None else f"{head} :- {show_goal(item.body)}."
    if isinstance(item, FunClause):
        text = f"{show_term(item.lhs)} = {show_term(item.rhs)}"
        return f"{text}." if item.body is None else f"{text} :- {show_goal(item.body)}."
    if isinstance(item, Query):
        text = f"?- {show_goal(item.goal)}."
        return text if item.expect is None else f"{text} %expect {item.expect}"
    raise TypeError(f"not a program item: {item!r}")


def show_program(items):
    return "\n".join(show_item(i) for i in items) + ("\n" if items else "")
