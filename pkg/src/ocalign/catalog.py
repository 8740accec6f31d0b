"""Small hand-built nets and logs used by tests, scripts and the CLI demo."""

from __future__ import annotations

from .log_model import Event, EventLog
from .opid import (
    TAU,
    AcceptingOPID,
    Kind,
    Marking,
    OCArc,
    ObjectCentricNet,
    OPID,
    Place,
    PlaceSpec,
    Transition,
    Variable,
    inscription,
)

ORDER, PRODUCT, DELIVERY = "order", "product", "delivery"


def _v(name: str, typ: str, kind: Kind = Kind.NORMAL) -> Variable:
    return Variable(name, kind, typ)


def _net(types, places, transitions, arcs_in, arcs_out) -> OPID:
    return OPID(
        frozenset(types),
        {p: Place(p, tuple(c)) for p, c in places.items()},
        {t: Transition(t, label) for t, label in transitions.items()},
        {k: inscription(*vs) for k, vs in arcs_in.items()},
        {k: inscription(*vs) for k, vs in arcs_out.items()},
    )


def order_net(final_some: bool = True) -> AcceptingOPID:
    """Order handling: orders and products are created silently, then
    place order (many products), payment, pick item (one product), ship.

    Accepting markings have some token in both end places and nothing
    elsewhere; with ``final_some=False`` every place must end empty.
    """
    o, p = _v("o", ORDER), _v("p", PRODUCT)
    P = _v("P", PRODUCT, Kind.LIST)
    new_o, new_p = _v("nu_o", ORDER, Kind.FRESH), _v("nu_p", PRODUCT, Kind.FRESH)
    net = _net(
        [ORDER, PRODUCT],
        {
            "o0": [ORDER], "o1": [ORDER], "o2": [ORDER], "o3": [ORDER],
            "i0": [PRODUCT], "i1": [ORDER, PRODUCT], "i2": [ORDER, PRODUCT], "i3": [ORDER, PRODUCT],
        },
        {
            "new_order": TAU,
            "new_product": TAU,
            "place_order": "place order",
            "payment": "payment",
            "pick_item": "pick item",
            "ship": "ship",
        },
        {
            ("o0", "place_order"): [o],
            ("i0", "place_order"): [P],
            ("o1", "payment"): [o],
            ("i1", "pick_item"): [o, p],
            ("o2", "ship"): [o],
            ("i2", "ship"): [o, P],
        },
        {
            ("new_order", "o0"): [new_o],
            ("new_product", "i0"): [new_p],
            ("place_order", "o1"): [o],
            ("place_order", "i1"): [o, P],
            ("payment", "o2"): [o],
            ("pick_item", "i2"): [o, p],
            ("ship", "o3"): [o],
            ("ship", "i3"): [o, P],
        },
    )
    final = {"o3": PlaceSpec("some"), "i3": PlaceSpec("some")} if final_some else {}
    return AcceptingOPID(net, (Marking(),), final)


ORDER_OBJECTS = {
    "o1": ORDER, "o2": ORDER, "o3": ORDER,
    "p1": PRODUCT, "p2": PRODUCT, "p3": PRODUCT, "p4": PRODUCT,
}


def order_log() -> EventLog:
    """Ten events over three orders and four products; two components."""
    rows = [
        ("e0", "place order", {"o1", "p1"}, 1),
        ("e1", "payment", {"o1"}, 3),
        ("e2", "pick item", {"o1", "p1"}, 2),
        ("e3", "place order", {"o2", "p2"}, 3),
        ("e4", "payment", {"o2"}, 4),
        ("e5", "pick item", {"o2", "p2"}, 5),
        ("e6", "ship", {"o1", "p2"}, 6),
        ("e7", "ship", {"o2", "p1"}, 9),
        ("e8", "payment", {"o3"}, 2),
        ("e9", "ship", {"o3", "p3", "p4"}, 5),
    ]
    return EventLog([Event(*r) for r in rows], ORDER_OBJECTS)


def product_only_log() -> EventLog:
    """The order was never recorded: every event mentions product p only."""
    rows = [
        ("e0", "place order", {"p"}, 1),
        ("e1", "pick item", {"p"}, 2),
        ("e2", "ship", {"p"}, 3),
    ]
    return EventLog([Event(*r) for r in rows], {"p": PRODUCT})


def order_object_net(orders=("o1", "o2"), products=("p1", "p2")) -> ObjectCentricNet:
    """The order process as a plain object-centric net (variable arcs, no identity links)."""
    place_types = {f"o{k}": ORDER for k in range(4)} | {f"i{k}": PRODUCT for k in range(4)}
    arcs = (
        OCArc("o0", "place_order"), OCArc("place_order", "o1"),
        OCArc("o1", "payment"), OCArc("payment", "o2"),
        OCArc("o2", "ship"), OCArc("ship", "o3"),
        OCArc("i0", "place_order", True), OCArc("place_order", "i1", True),
        OCArc("i1", "pick_item"), OCArc("pick_item", "i2"),
        OCArc("i2", "ship", True), OCArc("ship", "i3", True),
    )
    return ObjectCentricNet(
        place_types,
        {"place_order": "place order", "payment": "payment", "pick_item": "pick item", "ship": "ship"},
        arcs,
        ({"o0": list(orders), "i0": list(products)},),
        {"o3": PlaceSpec("some"), "i3": PlaceSpec("some")},
    )


def swapped_shipment_log() -> EventLog:
    """Items shipped with the wrong order; products picked without their order."""
    rows = [
        ("e0", "place order", {"o1", "p1"}, 1),
        ("e1", "payment", {"o1"}, 2),
        ("e2", "pick item", {"p1"}, 3),
        ("e3", "place order", {"o2", "p2"}, 4),
        ("e4", "payment", {"o2"}, 5),
        ("e5", "pick item", {"p2"}, 6),
        ("e6", "ship", {"o1", "p2"}, 7),
        ("e7", "ship", {"o2", "p1"}, 8),
    ]
    objs = {"o1": ORDER, "o2": ORDER, "p1": PRODUCT, "p2": PRODUCT}
    return EventLog([Event(*r) for r in rows], objs)


def package_net() -> AcceptingOPID:
    """Orders are split into packages, loaded onto deliveries, billed and delivered.

    ``bill`` must see the order together with its packages, so a bill event
    that omits the package cannot be synchronous.  Every place ends empty.
    """
    o, p, d = _v("o", ORDER), _v("p", PRODUCT), _v("d", DELIVERY)
    P = _v("P", PRODUCT, Kind.LIST)
    new_o, new_p = _v("nu_o", ORDER, Kind.FRESH), _v("nu_p", PRODUCT, Kind.FRESH)
    new_d = _v("nu_d", DELIVERY, Kind.FRESH)
    OP, PD = [ORDER, PRODUCT], [PRODUCT, DELIVERY]
    net = _net(
        [ORDER, PRODUCT, DELIVERY],
        {
            "created": [ORDER], "split_done": [ORDER], "notified": [ORDER],
            "pkg_new": [PRODUCT], "pkg_ready": OP, "pkg_load": [PRODUCT], "pkg_wait": OP,
            "pkg_loaded": PD, "pkg_joined": [ORDER, PRODUCT, DELIVERY],
            "pkg_deliver": PD, "pkg_bill": OP,
            "dlv_loading": [DELIVERY], "dlv_done": [DELIVERY],
        },
        {
            "create": "create", "new_package": TAU, "split": "split", "notify": "notify",
            "prepare": TAU, "load": "load", "join": TAU, "retry": "retry", "seal": TAU,
            "bill": "bill", "deliver": "deliver", "finish": "finish",
        },
        {
            ("created", "split"): [o],
            ("pkg_new", "split"): [P],
            ("split_done", "notify"): [o],
            ("pkg_ready", "prepare"): [o, p],
            ("pkg_load", "load"): [P],
            ("pkg_loaded", "join"): [p, d],
            ("pkg_wait", "join"): [o, p],
            ("pkg_joined", "retry"): [o, p, d],
            ("pkg_joined", "seal"): [o, p, d],
            ("notified", "bill"): [o],
            ("pkg_bill", "bill"): [o, P],
            ("pkg_deliver", "deliver"): [P, d],
            ("dlv_loading", "deliver"): [d],
            ("dlv_done", "finish"): [d],
        },
        {
            ("create", "created"): [new_o],
            ("new_package", "pkg_new"): [new_p],
            ("split", "pkg_ready"): [o, P],
            ("split", "split_done"): [o],
            ("notify", "notified"): [o],
            ("prepare", "pkg_load"): [p],
            ("prepare", "pkg_wait"): [o, p],
            ("load", "pkg_loaded"): [P, new_d],
            ("load", "dlv_loading"): [new_d],
            ("join", "pkg_joined"): [o, p, d],
            ("retry", "pkg_ready"): [o, p],
            ("seal", "pkg_deliver"): [p, d],
            ("seal", "pkg_bill"): [o, p],
            ("deliver", "dlv_done"): [d],
        },
    )
    return AcceptingOPID(net, (Marking(),), {})


PACKAGE_OBJECTS = {"o": ORDER, "p": PRODUCT, "d": DELIVERY}


def package_log(bill_with_package: bool = False) -> EventLog:
    """Seven events of one order with one package and one delivery.

    By default ``bill`` omits the package.  The repaired variant bills
    {o, p} and moves delivery and finish one tick later, since p may not
    have two events at the same timestamp.
    """
    if bill_with_package:
        rows = [
            ("e0", "create", {"o"}, 1),
            ("e1", "split", {"o", "p"}, 2),
            ("e2", "notify", {"o"}, 3),
            ("e3", "load", {"d", "p"}, 4),
            ("e4", "bill", {"o", "p"}, 5),
            ("e5", "deliver", {"d", "p"}, 6),
            ("e6", "finish", {"d"}, 7),
        ]
    else:
        rows = [
            ("e0", "create", {"o"}, 1),
            ("e1", "split", {"o", "p"}, 2),
            ("e2", "notify", {"o"}, 3),
            ("e3", "load", {"d", "p"}, 4),
            ("e4", "bill", {"o"}, 5),
            ("e5", "deliver", {"d", "p"}, 5),
            ("e6", "finish", {"d"}, 6),
        ]
    return EventLog([Event(*r) for r in rows], PACKAGE_OBJECTS)


PAPER, REVIEWER = "paper", "reviewer"


def review_net(papers=("x1",), reviewers=("r1", "r2")) -> AcceptingOPID:
    """Papers are submitted, triaged silently, reviewed and decided.

    Reviewers come from a pool in the initial marking and return to it
    when the decision collects all reviews of the paper.
    """
    x, r = _v("x", PAPER), _v("r", REVIEWER)
    R = _v("R", REVIEWER, Kind.LIST)
    XR = [PAPER, REVIEWER]
    net = _net(
        [PAPER, REVIEWER],
        {
            "p_new": [PAPER], "p_in": [PAPER], "p_open": [PAPER], "p_done": [PAPER],
            "pool": [REVIEWER], "assigned": XR, "reviewed": XR,
        },
        {"submit": "submit", "triage": TAU, "assign": "assign", "review": "review", "decide": "decide"},
        {
            ("p_new", "submit"): [x],
            ("p_in", "triage"): [x],
            ("p_open", "assign"): [x],
            ("pool", "assign"): [r],
            ("assigned", "review"): [x, r],
            ("p_open", "decide"): [x],
            ("reviewed", "decide"): [x, R],
        },
        {
            ("submit", "p_in"): [x],
            ("triage", "p_open"): [x],
            ("assign", "p_open"): [x],
            ("assign", "assigned"): [x, r],
            ("review", "reviewed"): [x, r],
            ("decide", "p_done"): [x],
            ("decide", "pool"): [R],
        },
    )
    initial = Marking({"p_new": {(p,) for p in papers}, "pool": {(q,) for q in reviewers}})
    return AcceptingOPID(net, (initial,), {"p_done": PlaceSpec("some"), "pool": PlaceSpec("some")})
