"""A tiny quantifier-free linear-integer-arithmetic term language.

Constructors fold constants and flatten conjunctions/disjunctions, so
encodings can be written naively without blowing up the emitted text.
Terms are emitted as SMT-LIB 2 and can be evaluated under an assignment,
which lets tests check solver models independently of the solver.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Union


class Term:
    __slots__ = ()


class Var(Term):
    __slots__ = ("name", "sort")

    def __init__(self, name: str, sort: str):
        self.name = name
        self.sort = sort

    def __repr__(self) -> str:
        return self.name


class Const(Term):
    __slots__ = ("value",)

    def __init__(self, value: Union[int, bool]):
        self.value = value

    def __repr__(self) -> str:
        return repr(self.value)


class App(Term):
    __slots__ = ("op", "args")

    def __init__(self, op: str, args: tuple):
        self.op = op
        self.args = args

    def __repr__(self) -> str:
        return to_smt(self)


TRUE = Const(True)
FALSE = Const(False)

TermLike = Union[Term, int, bool]


def lift(x: TermLike) -> Term:
    if isinstance(x, Term):
        return x
    if isinstance(x, (bool, int)):
        return Const(x)
    raise TypeError(f"cannot lift {x!r}")


def IntVar(name: str) -> Var:
    return Var(name, "Int")


def BoolVar(name: str) -> Var:
    return Var(name, "Bool")


def _is(t: Term, value) -> bool:
    return isinstance(t, Const) and t.value is value


def and_(*xs: TermLike | Iterable[TermLike]) -> Term:
    out = []
    for x in _flatten(xs):
        x = lift(x)
        if _is(x, True):
            continue
        if _is(x, False):
            return FALSE
        if isinstance(x, App) and x.op == "and":
            out.extend(x.args)
        else:
            out.append(x)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return App("and", tuple(out))


def or_(*xs: TermLike | Iterable[TermLike]) -> Term:
    out = []
    for x in _flatten(xs):
        x = lift(x)
        if _is(x, False):
            continue
        if _is(x, True):
            return TRUE
        if isinstance(x, App) and x.op == "or":
            out.extend(x.args)
        else:
            out.append(x)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return App("or", tuple(out))


def _flatten(xs) -> Iterable:
    for x in xs:
        if isinstance(x, (list, tuple)) or (not isinstance(x, (Term, int, bool)) and hasattr(x, "__iter__")):
            yield from _flatten(x)
        else:
            yield x


def not_(x: TermLike) -> Term:
    x = lift(x)
    if isinstance(x, Const):
        return Const(not x.value)
    if isinstance(x, App) and x.op == "not":
        return x.args[0]
    return App("not", (x,))


def implies(a: TermLike, b: TermLike) -> Term:
    a, b = lift(a), lift(b)
    if _is(a, False) or _is(b, True):
        return TRUE
    if _is(a, True):
        return b
    if _is(b, False):
        return not_(a)
    return App("=>", (a, b))


def iff(a: TermLike, b: TermLike) -> Term:
    a, b = lift(a), lift(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value == b.value)
    if _is(a, True):
        return b
    if _is(b, True):
        return a
    if _is(a, False):
        return not_(b)
    if _is(b, False):
        return not_(a)
    return App("=", (a, b))


def eq(a: TermLike, b: TermLike) -> Term:
    a, b = lift(a), lift(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value == b.value)
    return App("=", (a, b))


def ne(a: TermLike, b: TermLike) -> Term:
    return not_(eq(a, b))


def _cmp(op: str, a: TermLike, b: TermLike) -> Term:
    a, b = lift(a), lift(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(_CMP[op](a.value, b.value))
    return App(op, (a, b))


_CMP = {
    "<=": lambda x, y: x <= y,
    "<": lambda x, y: x < y,
    ">=": lambda x, y: x >= y,
    ">": lambda x, y: x > y,
}


def le(a: TermLike, b: TermLike) -> Term:
    return _cmp("<=", a, b)


def lt(a: TermLike, b: TermLike) -> Term:
    return _cmp("<", a, b)


def ge(a: TermLike, b: TermLike) -> Term:
    return _cmp(">=", a, b)


def gt(a: TermLike, b: TermLike) -> Term:
    return _cmp(">", a, b)


def add(*xs: TermLike | Iterable[TermLike]) -> Term:
    const = 0
    out = []
    for x in _flatten(xs):
        x = lift(x)
        if isinstance(x, Const):
            const += int(x.value)
        elif isinstance(x, App) and x.op == "+":
            for y in x.args:
                if isinstance(y, Const):
                    const += y.value
                else:
                    out.append(y)
        else:
            out.append(x)
    if const or not out:
        out.append(Const(const))
    if len(out) == 1:
        return out[0]
    return App("+", tuple(out))


def ite(c: TermLike, a: TermLike, b: TermLike) -> Term:
    c, a, b = lift(c), lift(a), lift(b)
    if _is(c, True):
        return a
    if _is(c, False):
        return b
    if isinstance(a, Const) and isinstance(b, Const) and a.value == b.value and type(a.value) is type(b.value):
        return a
    return App("ite", (c, a, b))


def distinct(*xs: TermLike) -> Term:
    xs = tuple(lift(x) for x in xs)
    if len(xs) < 2:
        return TRUE
    return App("distinct", xs)


# -- emission ------------------------------------------------------------------


def to_smt(t: Term) -> str:
    parts: list[str] = []
    _emit(t, parts)
    return "".join(parts)


def _emit(t: Term, out: list[str]) -> None:
    if isinstance(t, Var):
        out.append(t.name)
    elif isinstance(t, Const):
        v = t.value
        if isinstance(v, bool):
            out.append("true" if v else "false")
        elif v < 0:
            out.append(f"(- {-v})")
        else:
            out.append(str(v))
    else:
        out.append("(")
        out.append(t.op)
        for a in t.args:
            out.append(" ")
            _emit(a, out)
        out.append(")")


def declare(v: Var) -> str:
    return f"(declare-const {v.name} {v.sort})"


# -- evaluation ----------------------------------------------------------------


def evaluate(t: Term, env: Mapping[str, Union[int, bool]]):
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Const):
        return t.value
    op, args = t.op, t.args
    if op == "and":
        return all(evaluate(a, env) for a in args)
    if op == "or":
        return any(evaluate(a, env) for a in args)
    if op == "not":
        return not evaluate(args[0], env)
    if op == "=>":
        return (not evaluate(args[0], env)) or evaluate(args[1], env)
    if op == "ite":
        return evaluate(args[1], env) if evaluate(args[0], env) else evaluate(args[2], env)
    vals = [evaluate(a, env) for a in args]
    if op == "=":
        return vals[0] == vals[1]
    if op == "+":
        return sum(vals)
    if op == "distinct":
        return len(set(vals)) == len(vals)
    return _CMP[op](vals[0], vals[1])


def free_vars(terms: Iterable[Term]) -> dict[str, Var]:
    seen: dict[str, Var] = {}
    stack = list(terms)
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            seen.setdefault(t.name, t)
        elif isinstance(t, App):
            stack.extend(t.args)
    return seen
