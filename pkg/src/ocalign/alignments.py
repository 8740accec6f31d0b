"""Moves, alignment graphs, projections, validity, cost and a-priori bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import networkx as nx

from .log_model import Event, TraceGraph
from .opid import TAU, AcceptingOPID, Kind, Marking, OPID, Step, accepts, bind_inscription

SKIP = "≫"


class AlignmentError(ValueError):
    pass


class BoundsError(ValueError):
    pass


@dataclass(frozen=True)
class ModelPart:
    """Model side of a move: the `index`-th firing of the witness run."""

    index: int
    transition: str
    label: str
    objects: frozenset[str]

    @property
    def silent(self) -> bool:
        return self.label == TAU

    @classmethod
    def of(cls, index: int, step: Step, net: OPID) -> "ModelPart":
        return cls(index, step.transition, net.label(step.transition), step.objects())


@dataclass(frozen=True)
class Move:
    log: Event | None = None
    model: ModelPart | None = None

    def __post_init__(self):
        if self.log is None and self.model is None:
            raise AlignmentError("a move needs a log part or a model part")
        if self.log is not None and self.model is not None:
            if self.log.activity != self.model.label or self.log.objects != self.model.objects:
                raise AlignmentError(f"synchronous move mismatch: {self.log} vs {self.model}")

    @property
    def kind(self) -> str:
        if self.log is None:
            return "model"
        if self.model is None:
            return "log"
        return "sync"

    @property
    def cost(self) -> int:
        if self.log is None:
            return 0 if self.model.silent else len(self.model.objects)
        if self.model is None:
            return len(self.log.objects)
        return 0

    def __repr__(self) -> str:
        left = SKIP if self.log is None else f"{self.log.activity}{{{','.join(sorted(self.log.objects))}}}"
        right = SKIP if self.model is None else f"{self.model.label}{{{','.join(sorted(self.model.objects))}}}"
        return f"({left} | {right})"


@dataclass(frozen=True)
class AlignmentGraph:
    nodes: tuple[Move, ...]
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def successors(self) -> dict[int, list[int]]:
        succ: dict[int, list[int]] = {i: [] for i in range(len(self.nodes))}
        for a, b in sorted(self.edges):
            succ[a].append(b)
        return succ

    def is_acyclic(self) -> bool:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.nodes)))
        g.add_edges_from(self.edges)
        return nx.is_directed_acyclic_graph(g)

    def count(self, kind: str) -> int:
        if kind == "silent":
            return sum(1 for m in self.nodes if m.kind == "model" and m.model.silent)
        if kind == "visible-model":
            return sum(1 for m in self.nodes if m.kind == "model" and not m.model.silent)
        return sum(1 for m in self.nodes if m.kind == kind)


@dataclass(frozen=True)
class Projection:
    nodes: frozenset
    edges: frozenset


def _project(g: AlignmentGraph, side: str) -> Projection:
    part = (lambda m: m.log) if side == "log" else (lambda m: m.model)
    succ = g.successors()
    nodes, edges = set(), set()
    for u, move in enumerate(g.nodes):
        q = part(move)
        if q is None:
            continue
        nodes.add(q)
        stack, seen = list(succ[u]), set()
        while stack:
            w = stack.pop()
            if w in seen:
                continue
            seen.add(w)
            q2 = part(g.nodes[w])
            if q2 is None:
                stack.extend(succ[w])
            else:
                edges.add((q, q2))
    return Projection(frozenset(nodes), frozenset(edges))


def log_projection(g: AlignmentGraph) -> Projection:
    """Log parts, with edges along paths whose inner moves skip the log."""
    return _project(g, "log")


def model_projection(g: AlignmentGraph) -> Projection:
    return _project(g, "model")


def alignment_problems(
    g: AlignmentGraph,
    t: TraceGraph,
    anet: AcceptingOPID,
    run: Sequence[Step],
    object_types: Mapping[str, str] | None = None,
) -> list[str]:
    problems = []
    if not g.is_acyclic():
        problems.append("alignment graph has a cycle")
    lp = log_projection(g)
    if lp.nodes != t.events:
        problems.append("log projection nodes differ from the trace graph")
    lp_edges = {(a.id, b.id) for a, b in lp.edges}
    if lp_edges != set(t.edges):
        extra = sorted(lp_edges - set(t.edges))
        missing = sorted(set(t.edges) - lp_edges)
        problems.append(f"log projection edges differ (extra {extra}, missing {missing})")
    if not accepts(anet, run, object_types):
        problems.append("witness run is not accepted by the net")
    mp = model_projection(g)
    parts = sorted(mp.nodes, key=lambda r: r.index)
    if [r.index for r in parts] != list(range(len(run))):
        problems.append("model parts are not in bijection with the run steps")
    else:
        for r in parts:
            step = run[r.index]
            if r.transition != step.transition or r.label != anet.net.label(step.transition):
                problems.append(f"model part {r.index} does not match the label of its firing")
            if r.objects != step.objects():
                problems.append(f"model part {r.index} objects differ from the binding range")
    for r, r2 in mp.edges:
        if not r.index < r2.index:
            problems.append(f"model projection edge {r.index}->{r2.index} goes against the run order")
    for m in g.nodes:
        if m.kind == "sync" and (m.log.activity != m.model.label or m.log.objects != m.model.objects):
            problems.append(f"synchronous move {m} mismatches")
    return problems


def is_valid_alignment(
    g: AlignmentGraph,
    t: TraceGraph,
    anet: AcceptingOPID,
    run: Sequence[Step],
    object_types: Mapping[str, str] | None = None,
) -> bool:
    return not alignment_problems(g, t, anet, run, object_types)


def alignment_cost(g: AlignmentGraph) -> int:
    return sum(m.cost for m in g.nodes)


# -- construction --------------------------------------------------------------


def causal_edges(anet: AcceptingOPID, run: Sequence[Step], start: Marking | None = None) -> list[tuple[int, int]]:
    """Pairs (h, i): firing i consumes a token last produced by firing h."""
    net = anet.net
    producer: dict[tuple[str, tuple], int] = {}
    edges = set()
    for i, step in enumerate(run):
        b = step.binding
        for (p, t), ins in net.in_flow.items():
            if t == step.transition:
                for tok in bind_inscription(b, ins):
                    h = producer.pop((p, tok), None)
                    if h is not None:
                        edges.add((h, i))
        for (t, p), ins in net.out_flow.items():
            if t == step.transition:
                for tok in bind_inscription(b, ins):
                    producer[(p, tok)] = i
    return sorted(edges)


def build_alignment(
    pairs: Sequence[tuple[Event | None, int | None]],
    t: TraceGraph,
    anet: AcceptingOPID,
    run: Sequence[Step],
) -> AlignmentGraph:
    """Alignment graph from an interleaving of events and run-step indices.

    Edges are the trace-graph edges between moves carrying events, plus
    token-flow edges between firings whenever adding them keeps the log
    projection equal to the trace graph.
    """
    nodes = []
    event_node: dict[str, int] = {}
    step_node: dict[int, int] = {}
    for k, (e, j) in enumerate(pairs):
        model = None if j is None else ModelPart.of(j, run[j], anet.net)
        nodes.append(Move(e, model))
        if e is not None:
            event_node[e.id] = k
        if j is not None:
            step_node[j] = k
    edges = {(event_node[a], event_node[b]) for a, b in t.edges if a in event_node and b in event_node}
    target = set(t.edges)
    for h, i in causal_edges(anet, run):
        u, v = step_node[h], step_node[i]
        if u >= v:
            continue
        trial = AlignmentGraph(tuple(nodes), frozenset(edges | {(u, v)}))
        if {(a.id, b.id) for a, b in log_projection(trial).edges} <= target:
            edges.add((u, v))
    return AlignmentGraph(tuple(nodes), frozenset(edges))


# -- bounds --------------------------------------------------------------------


@dataclass(frozen=True)
class BoundsReport:
    num_events: int
    m: int
    c: int
    k: int
    has_fresh: bool
    move_bound: int
    object_occurrence_bound: int
    fresh_objects_per_type: Mapping[str, int]


def move_bound(num_events: int, c: int, m: int, k: int, has_fresh: bool) -> int:
    if has_fresh:
        return (num_events + 3 * c + 2 * m) * (k + 1)
    return (num_events + c + m) * (k + 1)


def object_occurrence_bound(c: int, m: int) -> int:
    return 2 * c + m


def has_fresh_inscriptions(net: OPID) -> bool:
    return any(v.kind is Kind.FRESH for ins in net.out_flow.values() for v in ins.vars)


def silent_chain_length(net: OPID) -> int:
    """Longest chain of silent transitions without fresh variables.

    Two such transitions are chained when an output place of the first is
    an input place of the second.  Cycles make the bound undefined.
    """
    silent = [t for t, tr in net.transitions.items() if tr.silent and not net.fresh_variables(t)]
    g = nx.DiGraph()
    g.add_nodes_from(silent)
    for a in silent:
        out = set(net.postset(a))
        for b in silent:
            if out & set(net.preset(b)):
                g.add_edge(a, b)
    if not nx.is_directed_acyclic_graph(g):
        raise BoundsError("cycle of silent transitions without fresh variables; pass an explicit bound")
    if not silent:
        return 0
    return nx.dag_longest_path_length(g) + 1


def compute_bounds(t: TraceGraph, anet: AcceptingOPID, ref_run: Sequence[Step], object_types: Mapping[str, str]) -> BoundsReport:
    net = anet.net
    if not accepts(anet, ref_run, object_types):
        raise BoundsError("reference run is not accepted by the net")
    visible = [s for s in ref_run if not net.transitions[s.transition].silent]
    seen_visible = frozenset().union(*(s.objects() for s in visible)) if visible else frozenset()
    for s in ref_run:
        if net.transitions[s.transition].silent and not s.objects() <= seen_visible:
            stray = sorted(s.objects() - seen_visible)
            raise BoundsError(f"objects {stray} occur only in silent firings of the reference run")
    m = sum(len(e.objects) for e in t.events)
    c = sum(len(s.objects()) for s in visible)
    k = silent_chain_length(net)
    fresh = has_fresh_inscriptions(net)
    obound = object_occurrence_bound(c, m)
    share = math.ceil(obound / len(net.types)) if net.types else 0
    log_objects = t.objects()
    budget = {}
    for typ in sorted({v.type for ins in net.out_flow.values() for v in ins.vars if v.kind is Kind.FRESH}):
        have = sum(1 for o in log_objects if object_types.get(o) == typ)
        budget[typ] = max(0, share - have)
    return BoundsReport(
        num_events=len(t.events),
        m=m,
        c=c,
        k=k,
        has_fresh=fresh,
        move_bound=move_bound(len(t.events), c, m, k, fresh),
        object_occurrence_bound=obound,
        fresh_objects_per_type=budget,
    )


def moves_in_order(g: AlignmentGraph) -> Iterable[Move]:
    g2 = nx.DiGraph()
    g2.add_nodes_from(range(len(g.nodes)))
    g2.add_edges_from(g.edges)
    for i in nx.lexicographical_topological_sort(g2):
        yield g.nodes[i]
