import random

import pytest
from hypothesis import given, settings, strategies as st

from ocalign import catalog
from ocalign.opid import (
    AcceptingOPID,
    BindingError,
    Kind,
    Marking,
    NetError,
    NotEnabledError,
    PlaceSpec,
    RunError,
    Step,
    Variable,
    accepts,
    bind_inscription,
    execute_run,
    fire,
    from_object_centric_net,
    inscription,
    is_enabled,
    validate,
)
from ocalign.oracle import SearchBudget, successors

O = Variable("o", Kind.NORMAL, "order")
P = Variable("P", Kind.LIST, "product")
TYPES = {"o1": "order", "o2": "order", "p1": "product", "p2": "product", "p3": "product"}

SHORT_RUN = (
    Step.of("new_order", {"nu_o": "o1"}),
    Step.of("new_product", {"nu_p": "p1"}),
    Step.of("place_order", {"o": "o1", "P": ("p1",)}),
    Step.of("payment", {"o": "o1"}),
    Step.of("pick_item", {"o": "o1", "p": "p1"}),
    Step.of("ship", {"o": "o1", "P": ("p1",)}),
)


@pytest.mark.parametrize("products", [("p1",), ("p1", "p2"), ("p1", "p2", "p3")])
def test_template_inscription_yields_one_token_per_list_member(products):
    tokens = bind_inscription({"o": "o1", "P": products}, inscription(O, P), TYPES)
    assert tokens == {("o1", p) for p in products}


def test_simple_inscription_yields_one_token():
    assert bind_inscription({"o": "o1"}, inscription(O)) == {("o1",)}


@pytest.mark.parametrize(
    "binding",
    [{"o": "o1", "P": ()}, {"o": ("o1",), "P": ("p1",)}, {"o": "p1", "P": ("p1",)}, {"P": ("p1",)}],
)
def test_bad_bindings_are_rejected(binding):
    with pytest.raises(BindingError):
        bind_inscription(binding, inscription(O, P), TYPES)


def test_short_run_is_accepted(order_net):
    assert accepts(order_net, SHORT_RUN, TYPES)
    end, visible = execute_run(order_net, SHORT_RUN)
    assert [s.transition for s in visible] == ["place_order", "payment", "pick_item", "ship"]
    assert end["o3"] == {("o1",)} and end["i3"] == {("o1", "p1")}


def test_prefix_is_not_accepted(order_net):
    assert not accepts(order_net, SHORT_RUN[:-1], TYPES)


def test_run_error_points_at_first_bad_step(order_net):
    with pytest.raises(RunError) as info:
        execute_run(order_net, SHORT_RUN[1:])
    assert info.value.index == 1


def test_fresh_variable_needs_absent_object(order_net):
    m = fire(order_net.net, Marking(), "new_order", {"nu_o": "o1"})
    assert not is_enabled(order_net.net, m, "new_order", {"nu_o": "o1"})
    with pytest.raises(NotEnabledError):
        fire(order_net.net, m, "new_order", {"nu_o": "o1"})
    assert is_enabled(order_net.net, m, "new_order", {"nu_o": "o2"})


def test_list_must_be_fully_present(order_net):
    m = Marking({"o0": {("o1",)}, "i0": {("p1",)}})
    assert is_enabled(order_net.net, m, "place_order", {"o": "o1", "P": ("p1",)})
    assert not is_enabled(order_net.net, m, "place_order", {"o": "o1", "P": ("p1", "p2")})


def test_place_spec_parsing():
    assert PlaceSpec.parse("exactly:2").holds(2)
    assert not PlaceSpec.parse("exactly:2").holds(1)
    assert PlaceSpec.parse("some").holds(3)
    with pytest.raises(NetError):
        PlaceSpec.parse("plenty")


def test_unlisted_places_must_end_empty(order_net):
    assert not order_net.is_final(Marking({"o3": {("o1",)}, "i3": {("o1", "p1")}, "i0": {("p2",)}}))


@pytest.mark.parametrize("factory", [catalog.order_net, catalog.package_net, catalog.review_net])
def test_catalog_nets_are_well_formed(factory):
    assert validate(factory()) == []


def test_validate_reports_color_mismatch(order_net):
    net = order_net.net
    bad_in = dict(net.in_flow)
    bad_in[("o0", "place_order")] = inscription(Variable("p", Kind.NORMAL, "product"))
    broken = AcceptingOPID(type(net)(net.types, net.places, net.transitions, bad_in, net.out_flow))
    assert any("differs from place color" in p for p in validate(broken))


def test_validate_rejects_fresh_input(order_net):
    net = order_net.net
    bad_in = dict(net.in_flow)
    bad_in[("o1", "payment")] = inscription(Variable("nu_o", Kind.FRESH, "order"))
    broken = AcceptingOPID(type(net)(net.types, net.places, net.transitions, bad_in, net.out_flow))
    assert any("fresh variable in input" in p for p in validate(broken))


def test_object_centric_conversion_gives_one_variable_per_arc():
    anet = from_object_centric_net(catalog.order_object_net())
    ins = anet.net.in_flow[("i0", "place_order")]
    assert [v.kind for v in ins.vars] == [Kind.LIST] and ins.color == ("product",)
    assert anet.net.in_flow[("o0", "place_order")].vars[0].kind is Kind.NORMAL
    assert anet.initial[0]["o0"] == {("o1",), ("o2",)}
    assert validate(anet) == []


# -- properties over random walks -------------------------------------------------

NETS = {
    "order": (catalog.order_net(), {"o1": "order", "o2": "order", "p1": "product", "p2": "product"}),
    "package": (catalog.package_net(), {"o": "order", "p": "product", "q": "product", "d": "delivery"}),
    "review": (catalog.review_net(), {"x1": "paper", "r1": "reviewer", "r2": "reviewer"}),
}


def _walk(name, seed, length):
    anet, universe = NETS[name]
    rng = random.Random(seed)
    budget = SearchBudget(length, universe, list_cap=2)
    m = anet.initial[0]
    for _ in range(length):
        options = list(successors(anet.net, m, budget))
        if not options:
            return
        step, m2 = rng.choice(options)
        yield anet, universe, m, step, m2
        m = m2


walks = st.tuples(st.sampled_from(sorted(NETS)), st.integers(0, 10_000), st.integers(1, 12))


@settings(max_examples=60, deadline=None)
@given(walks)
def test_tokens_keep_their_place_color(args):
    for anet, universe, _, _, m2 in _walk(*args):
        for p in m2:
            color = anet.net.places[p].color
            for tok in m2[p]:
                assert tuple(universe[o] for o in tok) == color


@settings(max_examples=60, deadline=None)
@given(walks)
def test_places_outside_the_flow_are_untouched(args):
    for anet, _, m, step, m2 in _walk(*args):
        touched = set(anet.net.preset(step.transition)) | set(anet.net.postset(step.transition))
        for p in anet.net.places:
            if p not in touched:
                assert m[p] == m2[p]


@settings(max_examples=60, deadline=None)
@given(walks)
def test_fresh_objects_are_new_to_the_marking(args):
    for anet, _, m, step, _ in _walk(*args):
        fresh = [step.binding[v.name] for v in anet.net.fresh_variables(step.transition)]
        assert len(set(fresh)) == len(fresh)
        assert not set(fresh) & m.objects()


@settings(max_examples=60, deadline=None)
@given(walks)
def test_firing_moves_exactly_the_bound_tokens(args):
    for anet, _, m, step, m2 in _walk(*args):
        net, b = anet.net, step.binding
        for p in net.places:
            consumed = set().union(*(bind_inscription(b, i) for (q, t), i in net.in_flow.items() if q == p and t == step.transition))
            produced = set().union(*(bind_inscription(b, i) for (t, q), i in net.out_flow.items() if q == p and t == step.transition))
            assert m2[p] == (m[p] - consumed) | produced
