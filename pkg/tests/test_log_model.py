import networkx as nx
import pytest
from hypothesis import given, strategies as st

from ocalign.log_model import (
    Event,
    EventLog,
    LogError,
    ObjectUniverse,
    linearize,
    object_graph,
    object_trace,
    trace_graph,
    trace_graphs,
)


def test_universe_ids_are_dense_and_sorted():
    u = ObjectUniverse({"p2": "product", "o1": "order", "p1": "product"})
    assert dict(u.ids) == {"o1": 1, "p1": 2, "p2": 3}
    assert u.of_type("product") == ["p1", "p2"]
    with pytest.raises(LogError):
        u.type_of("zz")


def test_event_needs_objects():
    with pytest.raises(LogError):
        Event("e", "a", frozenset(), 1)


def test_duplicate_timestamp_for_one_object_is_rejected():
    events = [Event("e0", "a", {"o1"}, 3), Event("e1", "b", {"o1", "p1"}, 3)]
    with pytest.raises(LogError, match="two events"):
        EventLog(events, {"o1": "order", "p1": "product"})


def test_same_timestamp_on_disjoint_objects_is_fine():
    log = EventLog([Event("e0", "a", {"o1"}, 3), Event("e1", "b", {"p1"}, 3)], {"o1": "order", "p1": "product"})
    assert len(log.events) == 2


@pytest.mark.parametrize(
    "events, message",
    [
        ([Event("e0", "a", {"zz"}, 1)], "unknown object"),
        ([Event("e0", "a", {"o1"}, 1), Event("e0", "b", {"o1"}, 2)], "duplicate"),
    ],
)
def test_log_rejects_bad_input(events, message):
    with pytest.raises(LogError, match=message):
        EventLog(events, {"o1": "order"})


def test_object_trace_follows_timestamps(order_log):
    # e1 (payment, t=3) comes after e2 (pick item, t=2)
    assert [e.id for e in object_trace(order_log, "o1")] == ["e0", "e2", "e1", "e6"]


def test_order_log_components(order_log):
    comps = object_graph(order_log).components()
    assert comps == [frozenset({"o1", "o2", "p1", "p2"}), frozenset({"o3", "p3", "p4"})]


def test_running_example_trace_graph_edges(order_traces):
    x1, x2 = order_traces
    assert x1.edges == frozenset(
        {("e0", "e2"), ("e2", "e1"), ("e1", "e6"), ("e2", "e7"),
         ("e3", "e4"), ("e3", "e5"), ("e4", "e5"), ("e5", "e6"), ("e5", "e7")}
    )
    assert x2.edges == frozenset({("e8", "e9")})
    assert [e.id for e in linearize(x1)] == ["e0", "e2", "e1", "e3", "e4", "e5", "e6", "e7"]


def test_linearize_breaks_ties_by_id():
    log = EventLog([Event("e1", "a", {"o1"}, 1), Event("e0", "b", {"p1"}, 1)], {"o1": "x", "p1": "y"})
    t = trace_graph(log, {"o1", "p1"})
    assert [e.id for e in linearize(t)] == ["e0", "e1"]


def test_objects_without_events_give_no_trace_graph():
    log = EventLog([Event("e0", "a", {"o1"}, 1)], {"o1": "x", "o2": "x"})
    assert len(trace_graphs(log)) == 1


@st.composite
def logs(draw):
    n_obj = draw(st.integers(1, 5))
    objects = {f"o{k}": draw(st.sampled_from(["a", "b"])) for k in range(n_obj)}
    n_ev = draw(st.integers(1, 8))
    events, used = [], set()
    for k in range(n_ev):
        objs = draw(st.sets(st.sampled_from(sorted(objects)), min_size=1, max_size=3))
        ts = draw(st.integers(0, 20))
        if any((o, ts) in used for o in objs):
            continue
        used |= {(o, ts) for o in objs}
        events.append(Event(f"e{k}", draw(st.sampled_from("xyz")), objs, ts))
    return EventLog(events, objects)


@given(logs())
def test_trace_graphs_are_acyclic_and_partition_events(log):
    graphs = trace_graphs(log)
    for g in graphs:
        assert nx.is_directed_acyclic_graph(g.to_networkx())
        for a, b in g.edges:
            assert g.event(a).timestamp < g.event(b).timestamp
    ids = [e.id for g in graphs for e in g.events]
    assert sorted(ids) == sorted(e.id for e in log.events)


@given(logs())
def test_linearization_is_a_topological_order(log):
    for g in trace_graphs(log):
        pos = {e.id: i for i, e in enumerate(linearize(g))}
        assert all(pos[a] < pos[b] for a, b in g.edges)
