"""Object-centric Petri nets with identifiers: syntax and token-game semantics.

Tokens are tuples of object ids.  A marking maps each place to a *set* of
tokens, so producing a token that is already present is a no-op.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

TAU = "τ"

Token = tuple[str, ...]
BoundValue = Any  # str for normal/fresh variables, tuple[str, ...] for list variables


class NetError(ValueError):
    pass


class BindingError(NetError):
    pass


class NotEnabledError(NetError):
    pass


class RunError(NetError):
    def __init__(self, index: int, message: str):
        super().__init__(f"step {index}: {message}")
        self.index = index


class Kind(enum.Enum):
    NORMAL = "normal"
    LIST = "list"
    FRESH = "fresh"


@dataclass(frozen=True, order=True)
class Variable:
    name: str
    kind: Kind = field(compare=False)
    type: str = field(compare=False)

    def __repr__(self) -> str:
        prefix = {Kind.NORMAL: "", Kind.LIST: "L:", Kind.FRESH: "N:"}[self.kind]
        return f"{prefix}{self.name}:{self.type}"


@dataclass(frozen=True)
class Inscription:
    vars: tuple[Variable, ...]

    @property
    def color(self) -> tuple[str, ...]:
        return tuple(v.type for v in self.vars)

    @property
    def list_positions(self) -> list[int]:
        return [i for i, v in enumerate(self.vars) if v.kind is Kind.LIST]

    @property
    def is_template(self) -> bool:
        return len(self.list_positions) == 1

    @property
    def list_var(self) -> Variable | None:
        pos = self.list_positions
        return self.vars[pos[0]] if pos else None


def inscription(*vars: Variable) -> Inscription:
    return Inscription(tuple(vars))


@dataclass(frozen=True)
class Place:
    id: str
    color: tuple[str, ...]


@dataclass(frozen=True)
class Transition:
    id: str
    label: str = TAU

    @property
    def silent(self) -> bool:
        return self.label == TAU


@dataclass(frozen=True)
class OPID:
    types: frozenset[str]
    places: Mapping[str, Place]
    transitions: Mapping[str, Transition]
    in_flow: Mapping[tuple[str, str], Inscription]  # (place, transition)
    out_flow: Mapping[tuple[str, str], Inscription]  # (transition, place)

    def preset(self, t: str) -> list[str]:
        return [p for (p, t2) in self.in_flow if t2 == t]

    def postset(self, t: str) -> list[str]:
        return [p for (t2, p) in self.out_flow if t2 == t]

    def invars(self, t: str) -> set[Variable]:
        return {v for (p, t2), i in self.in_flow.items() if t2 == t for v in i.vars}

    def outvars(self, t: str) -> set[Variable]:
        return {v for (t2, p), i in self.out_flow.items() if t2 == t for v in i.vars}

    def variables(self, t: str) -> list[Variable]:
        """invars ∪ outvars, sorted by name; the fixed enumeration used everywhere."""
        return sorted(self.invars(t) | self.outvars(t))

    def simple_variables(self, t: str) -> list[Variable]:
        return [v for v in self.variables(t) if v.kind is not Kind.LIST]

    def list_variables(self, t: str) -> list[Variable]:
        return [v for v in self.variables(t) if v.kind is Kind.LIST]

    def fresh_variables(self, t: str) -> list[Variable]:
        return [v for v in self.variables(t) if v.kind is Kind.FRESH]

    def label(self, t: str) -> str:
        return self.transitions[t].label


class Marking(Mapping[str, frozenset]):
    """Immutable place -> token-set mapping; places without tokens are omitted."""

    __slots__ = ("_tokens", "_hash")

    def __init__(self, tokens: Mapping[str, Iterable[Token]] | None = None):
        clean = {}
        for p, toks in (tokens or {}).items():
            toks = frozenset(tuple(tok) for tok in toks)
            if toks:
                clean[p] = toks
        self._tokens = clean
        self._hash = None

    def __getitem__(self, place: str) -> frozenset:
        return self._tokens.get(place, frozenset())

    def __iter__(self):
        return iter(self._tokens)

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, place: object) -> bool:
        return place in self._tokens

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._tokens.items()))
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Marking):
            return self._tokens == other._tokens
        return NotImplemented

    def __repr__(self) -> str:
        body = ", ".join(f"{p}: {sorted(ts)}" for p, ts in sorted(self._tokens.items()))
        return f"Marking({{{body}}})"

    def objects(self) -> frozenset[str]:
        return frozenset(o for toks in self._tokens.values() for tok in toks for o in tok)

    def size(self) -> int:
        return sum(len(ts) for ts in self._tokens.values())

    def replace(self, changes: Mapping[str, frozenset]) -> "Marking":
        tokens = dict(self._tokens)
        tokens.update(changes)
        return Marking(tokens)


@dataclass(frozen=True)
class PlaceSpec:
    """Final-marking predicate for one place: ``empty``, ``some`` or ``exactly`` k tokens."""

    kind: str = "empty"
    count: int = 0

    def __post_init__(self):
        if self.kind not in ("empty", "some", "exactly"):
            raise NetError(f"unknown final-marking predicate {self.kind!r}")
        if self.kind == "exactly" and self.count < 0:
            raise NetError("exactly:k needs k >= 0")

    def holds(self, n: int) -> bool:
        if self.kind == "empty":
            return n == 0
        if self.kind == "some":
            return n >= 1
        return n == self.count

    def __str__(self) -> str:
        return f"exactly:{self.count}" if self.kind == "exactly" else self.kind

    @classmethod
    def parse(cls, text: str) -> "PlaceSpec":
        text = text.strip()
        if text.startswith("exactly:"):
            try:
                return cls("exactly", int(text.split(":", 1)[1]))
            except ValueError:
                raise NetError(f"bad final-marking predicate {text!r}") from None
        return cls(text)


@dataclass(frozen=True)
class AcceptingOPID:
    net: OPID
    initial: tuple[Marking, ...] = (Marking(),)
    final: Mapping[str, PlaceSpec] = field(default_factory=dict)  # unlisted places must be empty

    def final_spec(self, place: str) -> PlaceSpec:
        return self.final.get(place, PlaceSpec("empty"))

    def is_final(self, m: Marking) -> bool:
        return all(self.final_spec(p).holds(len(m[p])) for p in self.net.places)

    def initial_objects(self) -> frozenset[str]:
        return frozenset().union(*(m.objects() for m in self.initial))


@dataclass(frozen=True)
class Step:
    """One firing: a transition id and its binding (stored as sorted items)."""

    transition: str
    items: tuple[tuple[str, BoundValue], ...]

    @classmethod
    def of(cls, transition: str, binding: Mapping[str, BoundValue]) -> "Step":
        items = []
        for k, v in sorted(binding.items()):
            items.append((k, tuple(v) if isinstance(v, (list, tuple)) else v))
        return cls(transition, tuple(items))

    @property
    def binding(self) -> dict[str, BoundValue]:
        return dict(self.items)

    def objects(self) -> frozenset[str]:
        return binding_range(self.binding)

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={list(v) if isinstance(v, tuple) else v}" for k, v in self.items)
        return f"{self.transition}({args})"


Run = tuple[Step, ...]


def binding_range(b: Mapping[str, BoundValue]) -> frozenset[str]:
    objs: set[str] = set()
    for v in b.values():
        if isinstance(v, tuple):
            objs.update(v)
        else:
            objs.add(v)
    return frozenset(objs)


def validate(anet: AcceptingOPID, object_types: Mapping[str, str] | None = None) -> list[str]:
    """Well-formedness violations of an accepting net; empty list when valid."""
    net = anet.net
    problems = []
    for p in net.places.values():
        if not p.color:
            problems.append(f"place {p.id}: empty color")
        for typ in p.color:
            if typ not in net.types:
                problems.append(f"place {p.id}: unknown type {typ!r}")
    declared: dict[str, Variable] = {}
    flows = [((p, t), i, "in") for (p, t), i in net.in_flow.items()]
    flows += [((p, t), i, "out") for (t, p), i in net.out_flow.items()]
    for (p, t), ins, direction in flows:
        where = f"{direction}-flow {p}->{t}" if direction == "in" else f"out-flow {t}->{p}"
        if p not in net.places:
            problems.append(f"{where}: unknown place {p!r}")
            continue
        if t not in net.transitions:
            problems.append(f"{where}: unknown transition {t!r}")
        if not ins.vars:
            problems.append(f"{where}: empty inscription")
        if len(ins.list_positions) > 1:
            problems.append(f"{where}: two list variables in one inscription")
        if ins.color != net.places[p].color:
            problems.append(f"{where}: inscription color {ins.color} differs from place color {net.places[p].color}")
        for v in ins.vars:
            prev = declared.setdefault(v.name, v)
            if (prev.kind, prev.type) != (v.kind, v.type):
                problems.append(f"variable {v.name!r} used with conflicting kind/type")
    for t in net.transitions:
        inv, outv = net.invars(t), net.outvars(t)
        if any(v.kind is Kind.FRESH for v in inv):
            problems.append(f"transition {t}: fresh variable in input flow (invars ∩ Υ ≠ ∅)")
        stray = [v.name for v in outv if v.kind is not Kind.FRESH and v not in inv]
        if stray:
            problems.append(f"transition {t}: output variables {sorted(stray)} not bound by inputs")
    seen_types = dict(object_types or {})
    for k, m in enumerate(anet.initial):
        for p in m:
            if p not in net.places:
                problems.append(f"initial marking {k}: unknown place {p!r}")
                continue
            color = net.places[p].color
            for tok in m[p]:
                if len(tok) != len(color):
                    problems.append(f"initial marking {k}: token {tok} does not fit color of {p}")
                    continue
                for o, typ in zip(tok, color):
                    if seen_types.setdefault(o, typ) != typ:
                        problems.append(f"initial marking {k}: object {o!r} used with two types")
    for p in anet.final:
        if p not in net.places:
            problems.append(f"final spec: unknown place {p!r}")
    return problems


def check_valid(anet: AcceptingOPID) -> AcceptingOPID:
    problems = validate(anet)
    if problems:
        raise NetError("; ".join(problems))
    return anet


def _check_value(v: Variable, value: BoundValue, object_types: Mapping[str, str] | None) -> None:
    if v.kind is Kind.LIST:
        if not isinstance(value, tuple) or not value:
            raise BindingError(f"list variable {v.name} needs a non-empty list, got {value!r}")
        objs = value
    else:
        if isinstance(value, tuple):
            raise BindingError(f"variable {v.name} bound to a list")
        objs = (value,)
    if object_types is not None:
        for o in objs:
            if object_types.get(o) != v.type:
                raise BindingError(f"variable {v.name}: object {o!r} is not of type {v.type}")


def bind_inscription(
    b: Mapping[str, BoundValue], ins: Inscription, object_types: Mapping[str, str] | None = None
) -> set[Token]:
    values = []
    for v in ins.vars:
        if v.name not in b:
            raise BindingError(f"unbound variable {v.name}")
        value = b[v.name]
        if isinstance(value, list):
            value = tuple(value)
        _check_value(v, value, object_types)
        values.append(value)
    pos = ins.list_positions
    if not pos:
        return {tuple(values)}
    i = pos[0]
    return {tuple(values[:i]) + (u,) + tuple(values[i + 1:]) for u in values[i]}


def _check_binding(net: OPID, t: str, b: Mapping[str, BoundValue], object_types) -> None:
    if t not in net.transitions:
        raise NetError(f"unknown transition {t!r}")
    for v in net.variables(t):
        if v.name not in b:
            raise BindingError(f"transition {t}: variable {v.name} unbound")
        value = b[v.name]
        _check_value(v, tuple(value) if isinstance(value, list) else value, object_types)


def is_enabled(
    net: OPID, m: Marking, t: str, b: Mapping[str, BoundValue], object_types: Mapping[str, str] | None = None
) -> bool:
    _check_binding(net, t, b, object_types)
    fresh = [b[v.name] for v in net.fresh_variables(t)]
    if len(set(fresh)) != len(fresh):
        return False
    present = m.objects()
    if any(o in present for o in fresh):
        return False
    return all(bind_inscription(b, ins) <= m[p] for (p, t2), ins in net.in_flow.items() if t2 == t)


def fire(
    net: OPID, m: Marking, t: str, b: Mapping[str, BoundValue], object_types: Mapping[str, str] | None = None
) -> Marking:
    if not is_enabled(net, m, t, b, object_types):
        raise NotEnabledError(f"transition {t} is not enabled with binding {dict(b)}")
    changes: dict[str, frozenset] = {}
    for (p, t2), ins in net.in_flow.items():
        if t2 == t:
            changes[p] = changes.get(p, m[p]) - bind_inscription(b, ins)
    for (t2, p), ins in net.out_flow.items():
        if t2 == t:
            changes[p] = changes.get(p, m[p]) | bind_inscription(b, ins)
    return m.replace(changes)


def execute_run(
    anet: AcceptingOPID,
    run: Sequence[Step],
    start: Marking | None = None,
    object_types: Mapping[str, str] | None = None,
) -> tuple[Marking, list[Step]]:
    """Fire `run` from `start` (default: the first initial marking).

    Returns the reached marking and the visible subsequence.  Raises
    `RunError` carrying the index of the first step that cannot fire.
    """
    m = anet.initial[0] if start is None else start
    for i, step in enumerate(run):
        try:
            m = fire(anet.net, m, step.transition, step.binding, object_types)
        except NetError as exc:
            raise RunError(i, str(exc)) from exc
    visible = [s for s in run if not anet.net.transitions[s.transition].silent]
    return m, visible


def accepts(anet: AcceptingOPID, run: Sequence[Step], object_types: Mapping[str, str] | None = None) -> bool:
    """True iff `run` fires from some initial marking into a final marking."""
    for start in anet.initial:
        try:
            end, _ = execute_run(anet, run, start, object_types)
        except RunError:
            continue
        if anet.is_final(end):
            return True
    return False


# -- plain object-centric nets -------------------------------------------------


@dataclass(frozen=True)
class OCArc:
    source: str
    target: str
    variable: bool = False


@dataclass(frozen=True)
class ObjectCentricNet:
    """Typed places, labeled transitions and (non-)variable arcs."""

    place_types: Mapping[str, str | None]
    transitions: Mapping[str, str]  # id -> label (TAU for silent)
    arcs: tuple[OCArc, ...]
    initial: tuple[Mapping[str, Iterable[str]], ...] = ({},)
    final: Mapping[str, PlaceSpec] = field(default_factory=dict)


def from_object_centric_net(on: ObjectCentricNet) -> AcceptingOPID:
    """Give every place color ⟨σ⟩, variable arcs ⟨V_σ⟩ and other arcs ⟨v_σ⟩."""
    places = {}
    for p, typ in on.place_types.items():
        if not typ:
            raise NetError(f"place {p!r} has no type")
        places[p] = Place(p, (typ,))
    transitions = {t: Transition(t, label) for t, label in on.transitions.items()}

    def ins_for(place: str, variable: bool) -> Inscription:
        typ = places[place].color[0]
        if variable:
            return inscription(Variable(f"V_{typ}", Kind.LIST, typ))
        return inscription(Variable(f"v_{typ}", Kind.NORMAL, typ))

    in_flow, out_flow = {}, {}
    for a in on.arcs:
        if a.source in places and a.target in transitions:
            in_flow[(a.source, a.target)] = ins_for(a.source, a.variable)
        elif a.source in transitions and a.target in places:
            out_flow[(a.source, a.target)] = ins_for(a.target, a.variable)
        else:
            raise NetError(f"arc {a.source}->{a.target} does not connect a place and a transition")
    net = OPID(
        frozenset(typ for typ in on.place_types.values()),
        places,
        transitions,
        in_flow,
        out_flow,
    )
    initial = tuple(Marking({p: [(o,) for o in objs] for p, objs in m.items()}) for m in on.initial)
    return AcceptingOPID(net, initial, dict(on.final))
