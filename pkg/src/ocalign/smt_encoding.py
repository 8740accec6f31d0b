"""Encode optimal alignment as a linear-integer optimization problem.

Variable families, for run positions j = 1..n and trace positions i = 1..m:

* ``T_j``      transition fired at step j (1..L), 0 for padding after the run ends
* ``M_j_p_t``  token number t is in place number p after step j (j = 0..n)
* ``O_j_k``    id of the k-th object used at step j, 0 if unused (k = 1..K)
* ``d_i_j``    edit distance between the first i events and the first j steps

Each transition enumerates its simple variables by name, one object slot
each, followed by `list_cap` slots per list variable.  List slots hold a
strictly increasing prefix of non-zero ids, so a list denotes a set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .alignments import AlignmentGraph, build_alignment
from .oracle import interleaving
from .log_model import Event, TraceGraph, linearize
from .opid import AcceptingOPID, Inscription, Kind, OPID, Step, Token, Variable
from .terms import (
    FALSE,
    TRUE,
    BoolVar,
    IntVar,
    Term,
    Var,
    add,
    and_,
    eq,
    evaluate,
    ge,
    iff,
    implies,
    ite,
    le,
    lt,
    ne,
    not_,
    or_,
)


class EncodingError(ValueError):
    pass


class DecodingError(RuntimeError):
    pass


@dataclass(frozen=True)
class EncodingParams:
    n: int
    objects: tuple[str, ...]  # ids are positions + 1
    object_types: Mapping[str, str]
    list_cap: int
    transitions: tuple[str, ...]
    events: tuple[Event, ...]
    spare: tuple[str, ...] = ()  # objects beyond the trace and initial marking, interchangeable
    break_symmetry: bool = True
    sync_style: str = "guard"  # guard | ite
    relaxed: bool = False  # cells only bound the distance from below; sound under minimization

    @classmethod
    def build(
        cls,
        anet: AcceptingOPID,
        trace: TraceGraph,
        n: int,
        object_types: Mapping[str, str],
        extra: Mapping[str, int] | None = None,
        list_cap: int | None = None,
    ) -> "EncodingParams":
        """Trace objects + initial-marking objects + `extra[type]` fresh objects.

        Objects are grouped by type, so every type owns a contiguous id range.
        """
        types = dict(object_types)
        base = set(trace.objects()) | set(anet.initial_objects())
        for o in base:
            if o not in types:
                raise EncodingError(f"object {o!r} has no type")
        pool = [(types[o], 0, 0, o) for o in base]
        taken = set(base) | set(types)
        for typ, count in sorted((extra or {}).items()):
            k = 0
            for _ in range(count):
                k += 1
                name = f"{typ}_new{k}"
                while name in taken:
                    k += 1
                    name = f"{typ}_new{k}"
                taken.add(name)
                types[name] = typ
                pool.append((typ, 1, k, name))
        pool.sort()
        objects = tuple(p[-1] for p in pool)
        if list_cap is None:
            list_cap = default_list_cap(trace, types)
        return cls(
            n=n,
            objects=objects,
            object_types={o: types[o] for o in objects},
            list_cap=list_cap,
            transitions=tuple(sorted(anet.net.transitions)),
            events=tuple(linearize(trace)),
            spare=tuple(p[-1] for p in pool if p[1]),
        )


def default_list_cap(trace: TraceGraph, object_types: Mapping[str, str]) -> int:
    """Largest number of same-typed objects in one event (at least 1)."""
    best = 1
    for e in trace.events:
        counts: dict[str, int] = {}
        for o in e.objects:
            counts[object_types[o]] = counts.get(object_types[o], 0) + 1
        best = max(best, *counts.values())
    return best


@dataclass
class TransitionSlots:
    simple: dict[str, int]  # variable name -> slot (1-based)
    lists: dict[str, list[int]]  # list variable name -> slots
    types: dict[int, str]  # slot -> object type
    fresh: list[int]

    def all_slots(self) -> list[int]:
        return sorted(self.types)


@dataclass
class Layout:
    params: EncodingParams
    net: OPID
    K: int
    slots: dict[str, TransitionSlots]
    place_index: dict[str, int]
    tokens: dict[str, list[Token]]  # place -> color-consistent tokens over O
    token_index: dict[str, dict[Token, int]]
    ids: dict[str, int]
    type_range: dict[str, tuple[int, int]]
    inf: int = 0
    variables: dict[str, Var] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def m(self) -> int:
        return len(self.params.events)

    def _var(self, name: str, sort: str) -> Var:
        v = self.variables.get(name)
        if v is None:
            v = BoolVar(name) if sort == "Bool" else IntVar(name)
            self.variables[name] = v
        return v

    def T(self, j: int) -> Var:
        return self._var(f"T_{j}", "Int")

    def M(self, j: int, p: str, tok: Token) -> Var:
        return self._var(f"M_{j}_{self.place_index[p]}_{self.token_index[p][tok]}", "Bool")

    def O(self, j: int, k: int) -> Var:
        return self._var(f"O_{j}_{k}", "Int")

    def S(self, j: int, oid: int) -> Var:
        return self._var(f"S_{j}_{oid}", "Bool")

    def d(self, i: int, j: int) -> Var:
        return self._var(f"d_{i}_{j}", "Int")

    def tid(self, t: str) -> int:
        return self.params.transitions.index(t) + 1

    def run_variable_names(self) -> list[str]:
        names = [f"T_{j}" for j in range(1, self.n + 1)]
        names += [f"O_{j}_{k}" for j in range(1, self.n + 1) for k in range(1, self.K + 1)]
        return names

    def distance_variable_names(self) -> list[str]:
        return [f"d_{i}_{j}" for i in range(self.m + 1) for j in range(self.n + 1)]


def make_layout(anet: AcceptingOPID, params: EncodingParams) -> Layout:
    net = anet.net
    if sorted(params.transitions) != sorted(net.transitions):
        raise EncodingError("transition order does not match the net")
    ids = {o: i for i, o in enumerate(params.objects, start=1)}
    by_type: dict[str, list[int]] = {}
    for o, i in ids.items():
        by_type.setdefault(params.object_types[o], []).append(i)
    type_range = {}
    for typ, lst in by_type.items():
        if lst != list(range(lst[0], lst[-1] + 1)):
            raise EncodingError(f"ids of type {typ} are not contiguous")
        type_range[typ] = (lst[0], lst[-1])
    slots = {}
    K = 0
    for t in params.transitions:
        simple, lists, types, fresh = {}, {}, {}, []
        k = 0
        for v in net.simple_variables(t):
            k += 1
            simple[v.name] = k
            types[k] = v.type
            if v.kind is Kind.FRESH:
                fresh.append(k)
        for v in net.list_variables(t):
            block = []
            for _ in range(params.list_cap):
                k += 1
                block.append(k)
                types[k] = v.type
            lists[v.name] = block
        slots[t] = TransitionSlots(simple, lists, types, fresh)
        K = max(K, k)
    tokens, token_index = {}, {}
    for p in sorted(net.places):
        color = net.places[p].color
        pools = [[o for o in params.objects if params.object_types[o] == typ] for typ in color]
        toks = [tuple(c) for c in itertools.product(*pools)]
        tokens[p] = toks
        token_index[p] = {tok: i for i, tok in enumerate(toks)}
    place_index = {p: i for i, p in enumerate(sorted(net.places))}
    for o in anet.initial_objects():
        if o not in ids:
            raise EncodingError(f"initial-marking object {o!r} missing from the object universe")
    for e in params.events:
        for o in e.objects:
            if o not in ids:
                raise EncodingError(f"trace object {o!r} missing from the object universe")
    layout = Layout(params, net, K, slots, place_index, tokens, token_index, ids, type_range)
    layout.inf = 1 + sum(len(e.objects) for e in params.events) + params.n * K
    return layout


# -- token expressions ------------------------------------------------------------


def _moves_token(layout: Layout, t: str, ins: Inscription, j: int, tok: Token) -> Term:
    """The firing at step j (assumed to be `t`) consumes/produces `tok` via `ins`."""
    sl = layout.slots[t]
    conj = []
    for v, o in zip(ins.vars, tok):
        oid = layout.ids[o]
        if v.kind is Kind.LIST:
            conj.append(or_(eq(layout.O(j, k), oid) for k in sl.lists[v.name]))
        else:
            conj.append(eq(layout.O(j, sl.simple[v.name]), oid))
    return and_(conj)


def _is_t(layout: Layout, j: int, t: str) -> Term:
    return eq(layout.T(j), layout.tid(t))


# -- constraint families --------------------------------------------------------------


def _phi_init(layout: Layout, anet: AcceptingOPID) -> Term:
    options = []
    for m0 in anet.initial:
        options.append(
            and_(
                layout.M(0, p, tok) if tok in m0[p] else not_(layout.M(0, p, tok))
                for p in layout.tokens
                for tok in layout.tokens[p]
            )
        )
    return or_(options)


def _final_at(layout: Layout, anet: AcceptingOPID, j: int) -> Term:
    conj = []
    for p, toks in layout.tokens.items():
        spec = anet.final_spec(p)
        lits = [layout.M(j, p, tok) for tok in toks]
        if spec.kind == "empty":
            conj.extend(not_(x) for x in lits)
        elif spec.kind == "some":
            conj.append(or_(lits))
        else:
            conj.append(eq(add(ite(x, 1, 0) for x in lits), spec.count))
    return and_(conj)


def _phi_fin(layout: Layout, anet: AcceptingOPID) -> Term:
    # padding is a suffix and freezes the marking, so final at n <=> final at the run's end
    return _final_at(layout, anet, layout.n)


def _phi_ranges(layout: Layout) -> list[Term]:
    out = []
    L = len(layout.params.transitions)
    n_obj = len(layout.params.objects)
    for j in range(1, layout.n + 1):
        out.append(and_(ge(layout.T(j), 0), le(layout.T(j), L)))
        if j < layout.n:
            out.append(implies(eq(layout.T(j), 0), eq(layout.T(j + 1), 0)))
        for k in range(1, layout.K + 1):
            out.append(and_(ge(layout.O(j, k), 0), le(layout.O(j, k), n_obj)))
    return out


def _in_type(layout: Layout, x: Term, typ: str) -> Term:
    if typ not in layout.type_range:
        return FALSE
    lo, hi = layout.type_range[typ]
    return and_(ge(x, lo), le(x, hi))


def _phi_type(layout: Layout) -> list[Term]:
    out = []
    for j in range(1, layout.n + 1):
        out.append(implies(eq(layout.T(j), 0), and_(eq(layout.O(j, k), 0) for k in range(1, layout.K + 1))))
        for t in layout.params.transitions:
            sl = layout.slots[t]
            conj = []
            for name, k in sl.simple.items():
                conj.append(_in_type(layout, layout.O(j, k), sl.types[k]))
            for name, block in sl.lists.items():
                typ = sl.types[block[0]]
                conj.append(_in_type(layout, layout.O(j, block[0]), typ))
                for prev, k in zip(block, block[1:]):
                    o, op = layout.O(j, k), layout.O(j, prev)
                    conj.append(
                        or_(
                            eq(o, 0),
                            and_(ne(op, 0), lt(op, o), _in_type(layout, o, typ)),
                        )
                    )
            used = set(sl.all_slots())
            conj.extend(eq(layout.O(j, k), 0) for k in range(1, layout.K + 1) if k not in used)
            out.append(implies(_is_t(layout, j, t), and_(conj)))
    return out


def _phi_tokens(layout: Layout) -> list[Term]:
    """Enabling plus exact successor marking: M_j = (M_{j-1} minus consumed) plus produced."""
    net = layout.net
    consumers: dict[str, list[tuple[str, Inscription]]] = {}
    producers: dict[str, list[tuple[str, Inscription]]] = {}
    for (p, t), ins in net.in_flow.items():
        consumers.setdefault(p, []).append((t, ins))
    for (t, p), ins in net.out_flow.items():
        producers.setdefault(p, []).append((t, ins))
    out = []
    for j in range(1, layout.n + 1):
        for p, toks in layout.tokens.items():
            for tok in toks:
                consumed = or_(
                    and_(_is_t(layout, j, t), _moves_token(layout, t, ins, j, tok))
                    for t, ins in sorted(consumers.get(p, []), key=lambda x: x[0])
                )
                produced = or_(
                    and_(_is_t(layout, j, t), _moves_token(layout, t, ins, j, tok))
                    for t, ins in sorted(producers.get(p, []), key=lambda x: x[0])
                )
                before, after = layout.M(j - 1, p, tok), layout.M(j, p, tok)
                out.append(implies(consumed, before))
                out.append(iff(after, or_(produced, and_(before, not_(consumed)))))
    return out


def _phi_fresh(layout: Layout) -> list[Term]:
    out = []
    containing: dict[str, list[tuple[str, Token]]] = {}
    for p, toks in layout.tokens.items():
        for tok in toks:
            for o in set(tok):
                containing.setdefault(o, []).append((p, tok))
    for j in range(1, layout.n + 1):
        for t in layout.params.transitions:
            sl = layout.slots[t]
            if not sl.fresh:
                continue
            is_t = _is_t(layout, j, t)
            for a, b in itertools.combinations(sl.fresh, 2):
                if sl.types[a] == sl.types[b]:
                    out.append(implies(is_t, ne(layout.O(j, a), layout.O(j, b))))
            for k in sl.fresh:
                for o in layout.params.objects:
                    if layout.params.object_types[o] != sl.types[k]:
                        continue
                    absent = and_(not_(layout.M(j - 1, p, tok)) for p, tok in containing.get(o, []))
                    out.append(implies(and_(is_t, eq(layout.O(j, k), layout.ids[o])), absent))
    return out


def _phi_symmetry(layout: Layout) -> list[Term]:
    """Spare objects of a type are first used in id order.

    S_j_x holds when spare object x occurs in one of the first j steps.
    Renaming spare objects changes neither acceptance nor cost, so every
    run has a representative satisfying this.
    """
    out = []
    spare = [layout.ids[o] for o in layout.params.spare]
    for j in range(1, layout.n + 1):
        for x in spare:
            prev = layout.S(j - 1, x) if j > 1 else FALSE
            used = or_(eq(layout.O(j, k), x) for k in range(1, layout.K + 1))
            out.append(iff(layout.S(j, x), or_(prev, used)))
        for a, b in zip(layout.params.spare, layout.params.spare[1:]):
            if layout.params.object_types[a] == layout.params.object_types[b]:
                out.append(implies(layout.S(j, layout.ids[b]), layout.S(j, layout.ids[a])))
    return out


def build_encoding(anet: AcceptingOPID, trace: TraceGraph, params: EncodingParams) -> tuple[Layout, list[Term]]:
    """Constraints whose models are exactly the accepted runs of length <= n over O."""
    layout = make_layout(anet, params)
    phi = [_phi_init(layout, anet), _phi_fin(layout, anet)]
    phi += _phi_ranges(layout)
    phi += _phi_type(layout)
    phi += _phi_tokens(layout)
    phi += _phi_fresh(layout)
    if params.break_symmetry:
        phi += _phi_symmetry(layout)
    return layout, [f for f in phi if f is not TRUE]


# -- distance -------------------------------------------------------------------------


def _step_cost_for(layout: Layout, j: int, t: str) -> Term:
    """Number of distinct objects used by `t` at step j."""
    sl = layout.slots[t]
    terms = []
    slots = sl.all_slots()
    for idx, k in enumerate(slots):
        o = layout.O(j, k)
        same_type_before = [k2 for k2 in slots[:idx] if sl.types[k2] == sl.types[k]]
        in_list = any(k in block for block in sl.lists.values())
        fresh_obj = and_(ne(o, 0) if in_list else TRUE, and_(ne(o, layout.O(j, k2)) for k2 in same_type_before))
        terms.append(ite(fresh_obj, 1, 0))
    return add(terms)


def model_penalty(layout: Layout, j: int) -> Term:
    """[P_M]_j: 0 for padding or silent steps, else the number of objects used."""
    expr: Term = add()
    for t in reversed(layout.params.transitions):
        if layout.net.transitions[t].silent:
            continue
        expr = ite(_is_t(layout, j, t), _step_cost_for(layout, j, t), expr)
    return expr


def _sync_objects(layout: Layout, j: int, t: str, e: Event) -> Term:
    sl = layout.slots[t]
    ids = {layout.ids[o] for o in e.objects}
    conj = []
    for k in sl.all_slots():
        o = layout.O(j, k)
        member = or_(eq(o, i) for i in sorted(ids))
        in_list = any(k in block for block in sl.lists.values())
        conj.append(or_(eq(o, 0), member) if in_list else member)
    for obj in sorted(e.objects):
        typ = layout.params.object_types[obj]
        cands = [k for k in sl.all_slots() if sl.types[k] == typ]
        conj.append(or_(eq(layout.O(j, k), layout.ids[obj]) for k in cands))
    return and_(conj)


def sync_condition(layout: Layout, i: int, j: int) -> Term:
    """Step j can be synchronous with event i: same label and same object set."""
    e = layout.params.events[i - 1]
    return or_(
        and_(_is_t(layout, j, t), _sync_objects(layout, j, t, e))
        for t in layout.params.transitions
        if layout.net.transitions[t].label == e.activity
    )


def encode_distance(layout: Layout) -> tuple[list[Term], Var]:
    """Edit-distance recurrence over the linearized trace; returns (constraints, d_{m,n}).

    The model penalty of step j and the synchronous test of cell (i, j) are
    named once (``P_j``, ``Y_i_j``) and referenced from every cell.  The
    default ``"guard"`` style lets the synchronous arm take part only when
    ``Y`` holds; ``"ite"`` writes it as ``d + ite(Y, 0, INF)``, which z3
    optimizes far more slowly.

    With ``relaxed`` each cell is only bounded below by one of its arms,
    which leaves the minimum unchanged; the interleaving is then recomputed
    from the decoded run instead of read off the table.
    """
    m, n = layout.m, layout.n
    events = layout.params.events
    INF = layout.inf
    d = layout.d
    pl = [0] + [len(e.objects) for e in events]
    out: list[Term] = []
    pm: list[Term] = [add()]
    for j in range(1, n + 1):
        p = layout._var(f"P_{j}", "Int")
        out.append(eq(p, model_penalty(layout, j)))
        pm.append(p)
    out.append(eq(d(0, 0), 0))
    for i in range(1, m + 1):
        out.append(eq(d(i, 0), add(d(i - 1, 0), pl[i])))
    for j in range(1, n + 1):
        out.append(eq(d(0, j), add(d(0, j - 1), pm[j])))
    if layout.params.relaxed:
        for i in range(1, m + 1):
            for j in range(1, n + 1):
                options = [ge(d(i, j), add(d(i - 1, j), pl[i])), ge(d(i, j), add(d(i, j - 1), pm[j]))]
                sync = sync_condition(layout, i, j)
                if sync is not FALSE:
                    y = layout._var(f"Y_{i}_{j}", "Bool")
                    out.append(implies(y, sync))
                    options.append(and_(y, ge(d(i, j), d(i - 1, j - 1))))
                out.append(or_(options))
        return out, d(m, n)
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            arms = [add(d(i - 1, j), pl[i]), add(d(i, j - 1), pm[j])]
            options = [eq(d(i, j), a) for a in arms]
            out.extend(le(d(i, j), a) for a in arms)
            sync = sync_condition(layout, i, j)
            if sync is not FALSE:
                y = layout._var(f"Y_{i}_{j}", "Bool")
                out.append(iff(y, sync))
                if layout.params.sync_style == "ite":
                    arm = add(d(i - 1, j - 1), ite(y, 0, INF))
                    out.append(le(d(i, j), arm))
                    options.append(eq(d(i, j), arm))
                else:
                    out.append(implies(y, le(d(i, j), d(i - 1, j - 1))))
                    options.append(and_(y, eq(d(i, j), d(i - 1, j - 1))))
            out.append(or_(options))
    return out, d(m, n)


def pin_run(layout: Layout, run: Sequence[Step]) -> list[Term]:
    """Constraints fixing T and O to `run`, padded to n; the inverse of `decode_run`."""
    if len(run) > layout.n:
        raise EncodingError(f"run of length {len(run)} exceeds the bound {layout.n}")
    out: list[Term] = []
    for j in range(1, layout.n + 1):
        if j > len(run):
            out.append(eq(layout.T(j), 0))
            continue
        step = run[j - 1]
        sl = layout.slots[step.transition]
        out.append(eq(layout.T(j), layout.tid(step.transition)))
        b = step.binding
        try:
            for name, k in sl.simple.items():
                out.append(eq(layout.O(j, k), layout.ids[b[name]]))
            for name, block in sl.lists.items():
                ids = sorted(layout.ids[o] for o in b[name])
                if len(ids) > len(block):
                    raise EncodingError(f"list {name} at step {j} exceeds the list cap")
                out += [eq(layout.O(j, k), ids[i] if i < len(ids) else 0) for i, k in enumerate(block)]
        except KeyError as exc:
            raise EncodingError(f"step {j}: object or variable {exc} outside the encoding") from None
    return out


# -- decoding -------------------------------------------------------------------------


def _value(alpha: Mapping[str, int], name: str) -> int:
    try:
        return alpha[name]
    except KeyError:
        raise DecodingError(f"assignment lacks {name}") from None


def decode_run(alpha: Mapping[str, int], layout: Layout) -> tuple[Step, ...]:
    steps = []
    objects = layout.params.objects
    for j in range(1, layout.n + 1):
        l = _value(alpha, f"T_{j}")
        if l == 0:
            continue
        if not 1 <= l <= len(layout.params.transitions):
            raise DecodingError(f"T_{j} = {l} out of range")
        t = layout.params.transitions[l - 1]
        sl = layout.slots[t]
        b: dict = {}
        for name, k in sl.simple.items():
            oid = _value(alpha, f"O_{j}_{k}")
            if not 1 <= oid <= len(objects):
                raise DecodingError(f"O_{j}_{k} = {oid} out of range")
            b[name] = objects[oid - 1]
        for name, block in sl.lists.items():
            vals = []
            for k in block:
                oid = _value(alpha, f"O_{j}_{k}")
                if oid == 0:
                    break
                vals.append(objects[oid - 1])
            if not vals:
                raise DecodingError(f"empty list for {name} at step {j}")
            b[name] = tuple(vals)
        steps.append(Step.of(t, b))
    return tuple(steps)


def decode_interleaving(alpha: Mapping[str, int], layout: Layout) -> list[tuple[Event | None, int | None]]:
    """Walk the distance table back from (m, n), preferring log, model, then sync arms."""
    events = layout.params.events
    env = dict(alpha)
    step_of_column = {}
    k = 0
    for j in range(1, layout.n + 1):
        if _value(alpha, f"T_{j}") != 0:
            step_of_column[j] = k
            k += 1
    i, j = layout.m, layout.n
    out = []

    def dv(a, b):
        return _value(alpha, f"d_{a}_{b}")

    while i > 0 or j > 0:
        if j == 0:
            out.append((events[i - 1], None))
            i -= 1
            continue
        pm = evaluate(model_penalty(layout, j), env)
        if i == 0:
            if j in step_of_column:
                out.append((None, step_of_column[j]))
            j -= 1
        elif dv(i, j) == len(events[i - 1].objects) + dv(i - 1, j):
            out.append((events[i - 1], None))
            i -= 1
        elif dv(i, j) == pm + dv(i, j - 1):
            if j in step_of_column:
                out.append((None, step_of_column[j]))
            j -= 1
        elif dv(i, j) == dv(i - 1, j - 1) and evaluate(sync_condition(layout, i, j), env):
            out.append((events[i - 1], step_of_column[j]))
            i, j = i - 1, j - 1
        else:
            raise DecodingError(f"no arm of the recurrence matches d_{i}_{j}")
    out.reverse()
    return out


def decode_alignment(
    alpha: Mapping[str, int], layout: Layout, trace: TraceGraph, anet: AcceptingOPID
) -> AlignmentGraph:
    run = decode_run(alpha, layout)
    if layout.params.relaxed:
        pairs = interleaving(layout.params.events, layout.net, run)
    else:
        pairs = decode_interleaving(alpha, layout)
    return build_alignment(pairs, trace, anet, run)


@dataclass
class Problem:
    layout: Layout
    constraints: list[Term]
    objective: Var

    def declarations(self) -> list[Var]:
        from .terms import free_vars

        return sorted(free_vars(self.constraints).values(), key=lambda v: _var_key(v.name))


def _var_key(name: str):
    head, *rest = name.split("_")
    return (head, tuple(int(x) for x in rest))


def build_problem(anet: AcceptingOPID, trace: TraceGraph, params: EncodingParams) -> Problem:
    layout, phi_run = build_encoding(anet, trace, params)
    phi_delta, objective = encode_distance(layout)
    return Problem(layout, phi_run + phi_delta, objective)
