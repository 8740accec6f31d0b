"""Object-centric event logs, object graphs and trace graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import networkx as nx


class LogError(ValueError):
    pass


@dataclass(frozen=True)
class ObjectUniverse:
    """Typed object identifiers with dense integer ids (1..|O|, sorted by name)."""

    objects: Mapping[str, str]
    ids: Mapping[str, int] = field(default=None, compare=False)  # type: ignore[assignment]

    def __post_init__(self):
        objects = dict(sorted(self.objects.items()))
        object.__setattr__(self, "objects", objects)
        object.__setattr__(self, "ids", {o: i for i, o in enumerate(objects, start=1)})

    def type_of(self, obj: str) -> str:
        try:
            return self.objects[obj]
        except KeyError:
            raise LogError(f"unknown object {obj!r}") from None

    def of_type(self, typ: str) -> list[str]:
        return [o for o, t in self.objects.items() if t == typ]

    def __contains__(self, obj: object) -> bool:
        return obj in self.objects

    def __len__(self) -> int:
        return len(self.objects)


@dataclass(frozen=True, order=True)
class Event:
    id: str
    activity: str
    objects: frozenset[str]
    timestamp: int

    def __post_init__(self):
        object.__setattr__(self, "objects", frozenset(self.objects))
        if not self.objects:
            raise LogError(f"event {self.id!r} has no objects")

    def __repr__(self) -> str:
        objs = ",".join(sorted(self.objects))
        return f"<{self.id} {self.activity} {{{objs}}} @{self.timestamp}>"


@dataclass(frozen=True)
class EventLog:
    events: tuple[Event, ...]
    universe: ObjectUniverse

    def __init__(self, events: Iterable[Event], universe: ObjectUniverse | Mapping[str, str]):
        if not isinstance(universe, ObjectUniverse):
            universe = ObjectUniverse(universe)
        events = tuple(sorted(events, key=lambda e: e.id))
        ids = [e.id for e in events]
        if len(set(ids)) != len(ids):
            raise LogError("duplicate event ids")
        seen: dict[tuple[str, int], str] = {}
        for e in events:
            for o in e.objects:
                if o not in universe:
                    raise LogError(f"event {e.id!r} references unknown object {o!r}")
                clash = seen.get((o, e.timestamp))
                if clash is not None:
                    raise LogError(
                        f"object {o!r} has two events ({clash!r}, {e.id!r}) at timestamp {e.timestamp}"
                    )
                seen[(o, e.timestamp)] = e.id
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "universe", universe)

    def event(self, event_id: str) -> Event:
        for e in self.events:
            if e.id == event_id:
                return e
        raise LogError(f"unknown event {event_id!r}")


@dataclass(frozen=True)
class ObjectGraph:
    nodes: frozenset[str]
    edges: frozenset[frozenset[str]]

    def components(self) -> list[frozenset[str]]:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(tuple(e) for e in self.edges)
        comps = [frozenset(c) for c in nx.connected_components(g)]
        return sorted(comps, key=lambda c: min(c))


@dataclass(frozen=True)
class TraceGraph:
    events: frozenset[Event]
    edges: frozenset[tuple[str, str]]  # pairs of event ids
    component: frozenset[str]

    @property
    def num_events(self) -> int:
        return len(self.events)

    def event(self, event_id: str) -> Event:
        for e in self.events:
            if e.id == event_id:
                return e
        raise LogError(f"unknown event {event_id!r}")

    def objects(self) -> frozenset[str]:
        return frozenset().union(*(e.objects for e in self.events))

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(e.id for e in self.events)
        g.add_edges_from(self.edges)
        return g


def object_trace(log: EventLog, obj: str) -> list[Event]:
    """Events containing `obj`, by ascending timestamp."""
    if obj not in log.universe:
        raise LogError(f"unknown object {obj!r}")
    return sorted((e for e in log.events if obj in e.objects), key=lambda e: e.timestamp)


def object_graph(log: EventLog) -> ObjectGraph:
    edges = set()
    for e in log.events:
        objs = sorted(e.objects)
        for i, a in enumerate(objs):
            for b in objs[i + 1:]:
                edges.add(frozenset((a, b)))
    return ObjectGraph(frozenset(log.universe.objects), frozenset(edges))


def trace_graph(log: EventLog, component: Iterable[str]) -> TraceGraph:
    component = frozenset(component)
    events = frozenset(e for e in log.events if e.objects & component)
    edges = set()
    for o in component:
        trace = object_trace(log, o)
        edges.update((a.id, b.id) for a, b in zip(trace, trace[1:]))
    return TraceGraph(events, frozenset(edges), component)


def trace_graphs(log: EventLog) -> list[TraceGraph]:
    """One trace graph per connected component that has at least one event."""
    graphs = [trace_graph(log, c) for c in object_graph(log).components()]
    return [g for g in graphs if g.events]


def linearize(t: TraceGraph) -> list[Event]:
    """Timestamp order; equal timestamps fall back to event id."""
    return sorted(t.events, key=lambda e: (e.timestamp, e.id))
