import pytest
from hypothesis import given, strategies as st

from ocalign import catalog
from ocalign.alignments import (
    AlignmentError,
    AlignmentGraph,
    BoundsError,
    ModelPart,
    Move,
    alignment_cost,
    alignment_problems,
    build_alignment,
    causal_edges,
    compute_bounds,
    is_valid_alignment,
    log_projection,
    move_bound,
    object_occurrence_bound,
    silent_chain_length,
)
from ocalign.log_model import Event, EventLog, trace_graphs
from ocalign.opid import TAU, AcceptingOPID, Kind, OPID, Place, Step, Transition, Variable, inscription
from ocalign.oracle import interleaving

E_PAY = Event("e1", "payment", {"o1"}, 1)
PAY = ModelPart(0, "payment", "payment", frozenset({"o1"}))


@pytest.mark.parametrize(
    "move, kind, cost",
    [
        (Move(log=E_PAY), "log", 1),
        (Move(model=PAY), "model", 1),
        (Move(model=ModelPart(0, "new_order", TAU, frozenset({"o1"}))), "model", 0),
        (Move(log=E_PAY, model=PAY), "sync", 0),
        (Move(log=Event("e", "ship", {"o1", "p1", "p2"}, 1)), "log", 3),
    ],
)
def test_move_kind_and_cost(move, kind, cost):
    assert move.kind == kind and move.cost == cost


@pytest.mark.parametrize(
    "model",
    [ModelPart(0, "ship", "ship", frozenset({"o1"})), ModelPart(0, "payment", "payment", frozenset({"o1", "p1"}))],
)
def test_sync_move_needs_label_and_object_equality(model):
    with pytest.raises(AlignmentError):
        Move(log=E_PAY, model=model)


def test_empty_move_is_rejected():
    with pytest.raises(AlignmentError):
        Move()


def test_log_projection_skips_model_only_moves():
    a, b = Event("a", "x", {"o"}, 1), Event("b", "y", {"o"}, 2)
    g = AlignmentGraph(
        (Move(log=a), Move(model=ModelPart(0, "t", TAU, frozenset({"o"}))), Move(log=b)),
        frozenset({(0, 1), (1, 2)}),
    )
    assert log_projection(g).edges == {(a, b)}


@pytest.mark.parametrize("c, m, objects", [(3, 6, 12), (7, 3, 17), (0, 0, 0)])
def test_object_occurrence_bound(c, m, objects):
    assert object_occurrence_bound(c, m) == objects


@pytest.mark.parametrize(
    "events, c, m, k, fresh, expected",
    [(3, 3, 6, 0, True, 24), (3, 3, 6, 0, False, 12), (3, 7, 3, 0, True, 30), (2, 1, 1, 2, False, 12)],
)
def test_move_bound_formula(events, c, m, k, fresh, expected):
    assert move_bound(events, c, m, k, fresh) == expected


@pytest.mark.parametrize("factory, k", [(catalog.order_net, 0), (catalog.package_net, 3), (catalog.review_net, 1)])
def test_silent_chain_length(factory, k):
    assert silent_chain_length(factory().net) == k


def test_silent_cycle_has_no_bound():
    x = Variable("x", Kind.NORMAL, "t")
    net = OPID(
        frozenset({"t"}),
        {"a": Place("a", ("t",)), "b": Place("b", ("t",))},
        {"f": Transition("f"), "g": Transition("g")},
        {("a", "f"): inscription(x), ("b", "g"): inscription(x)},
        {("f", "b"): inscription(x), ("g", "a"): inscription(x)},
    )
    with pytest.raises(BoundsError):
        silent_chain_length(net)


REF_RUN = (
    Step.of("new_order", {"nu_o": "r_o"}),
    Step.of("new_product", {"nu_p": "r_p"}),
    Step.of("place_order", {"o": "r_o", "P": ("r_p",)}),
    Step.of("payment", {"o": "r_o"}),
    Step.of("pick_item", {"o": "r_o", "p": "r_p"}),
    Step.of("ship", {"o": "r_o", "P": ("r_p",)}),
)


def test_bounds_for_the_product_only_log(order_net):
    log = catalog.product_only_log()
    t = trace_graphs(log)[0]
    b = compute_bounds(t, order_net, REF_RUN, {"p": "product", "r_o": "order", "r_p": "product"})
    assert (b.m, b.c, b.k, b.move_bound, b.object_occurrence_bound) == (3, 7, 0, 30, 17)
    assert dict(b.fresh_objects_per_type) == {"order": 9, "product": 8}


def test_bounds_need_an_accepted_reference_run(order_net):
    t = trace_graphs(catalog.product_only_log())[0]
    with pytest.raises(BoundsError):
        compute_bounds(t, order_net, REF_RUN[:-1], {"p": "product", "r_o": "order", "r_p": "product"})


def _single_order_trace():
    rows = [
        ("e0", "place order", {"o1", "p1"}, 1),
        ("e1", "payment", {"o1"}, 2),
        ("e2", "pick item", {"o1", "p1"}, 3),
        ("e3", "ship", {"o1", "p1"}, 4),
    ]
    log = EventLog([Event(*r) for r in rows], {"o1": "order", "p1": "product"})
    return trace_graphs(log)[0]


RUN = (
    Step.of("new_order", {"nu_o": "o1"}),
    Step.of("new_product", {"nu_p": "p1"}),
    Step.of("place_order", {"o": "o1", "P": ("p1",)}),
    Step.of("payment", {"o": "o1"}),
    Step.of("pick_item", {"o": "o1", "p": "p1"}),
    Step.of("ship", {"o": "o1", "P": ("p1",)}),
)
TYPES = {"o1": "order", "p1": "product"}


def test_perfect_trace_aligns_at_zero(order_net):
    t = _single_order_trace()
    events = sorted(t.events, key=lambda e: e.timestamp)
    g = build_alignment(interleaving(events, order_net.net, RUN), t, order_net, RUN)
    assert alignment_problems(g, t, order_net, RUN, TYPES) == []
    assert alignment_cost(g) == 0
    assert g.count("sync") == 4 and g.count("silent") == 2


def test_all_log_plus_all_model_alignment_costs_m_plus_c(order_net):
    t = _single_order_trace()
    events = sorted(t.events, key=lambda e: e.timestamp)
    pairs = [(e, None) for e in events] + [(None, j) for j in range(len(RUN))]
    g = build_alignment(pairs, t, order_net, RUN)
    assert is_valid_alignment(g, t, order_net, RUN, TYPES)
    assert alignment_cost(g) == 7 + 7


def test_wrong_log_projection_is_reported(order_net):
    t = _single_order_trace()
    events = sorted(t.events, key=lambda e: e.timestamp)
    g = build_alignment(interleaving(events, order_net.net, RUN), t, order_net, RUN)
    broken = AlignmentGraph(g.nodes[:-1], frozenset(e for e in g.edges if max(e) < len(g.nodes) - 1))
    assert alignment_problems(broken, t, order_net, RUN, TYPES)


def test_causal_edges_follow_token_flow(order_net):
    edges = set(causal_edges(order_net, RUN))
    assert (0, 2) in edges and (1, 2) in edges and (2, 3) in edges and (4, 5) in edges
    assert all(a < b for a, b in edges)


@given(st.permutations(range(4)))
def test_interleavings_of_any_event_order_stay_valid(order):
    anet = catalog.order_net()
    t = _single_order_trace()
    events = sorted(t.events, key=lambda e: e.timestamp)
    shuffled = [events[i] for i in order]
    g = build_alignment(interleaving(shuffled, anet.net, RUN), t, anet, RUN)
    assert g.is_acyclic()
    assert alignment_cost(g) >= 0
