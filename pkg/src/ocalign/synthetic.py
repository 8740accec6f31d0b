"""A loan-application net with offers, and noisy logs sampled from it.

Stands in for a real loan-application log: applications spawn offers,
offers are sent and either returned or cancelled, returned offers are
validated together with their application.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .catalog import _net, _v
from .log_model import Event, EventLog
from .opid import TAU, AcceptingOPID, Kind, Marking, PlaceSpec, Step
from .oracle import SearchBudget, successors

APP, OFFER = "application", "offer"


def loan_net() -> AcceptingOPID:
    a, o = _v("a", APP), _v("o", OFFER)
    O = _v("O", OFFER, Kind.LIST)
    new_a, new_o = _v("nu_a", APP, Kind.FRESH), _v("nu_o", OFFER, Kind.FRESH)
    AO = [APP, OFFER]
    net = _net(
        [APP, OFFER],
        {
            "a_new": [APP], "a_acc": [APP], "a_val": [APP], "a_done": [APP],
            "f_new": AO, "f_sent": AO, "f_ret": AO, "f_cancel": AO, "f_val": AO, "f_acc": AO,
        },
        {
            "create_app": "A_Create Application",
            "accept_app": "A_Accepted",
            "create_offer": "O_Create Offer",
            "send_offer": "O_Sent",
            "return_offer": "O_Returned",
            "cancel_offer": "O_Cancelled",
            "archive": TAU,
            "validate": "A_Validating",
            "accept_offer": "O_Accepted",
            "pending": "A_Pending",
            "deny": "A_Denied",
        },
        {
            ("a_new", "accept_app"): [a],
            ("a_acc", "create_offer"): [a],
            ("f_new", "send_offer"): [a, o],
            ("f_sent", "return_offer"): [a, o],
            ("f_sent", "cancel_offer"): [a, o],
            ("f_cancel", "archive"): [a, o],
            ("a_acc", "validate"): [a],
            ("f_ret", "validate"): [a, O],
            ("f_val", "accept_offer"): [a, o],
            ("a_val", "pending"): [a],
            ("f_acc", "pending"): [a, O],
            ("a_val", "deny"): [a],
            ("f_val", "deny"): [a, O],
        },
        {
            ("create_app", "a_new"): [new_a],
            ("accept_app", "a_acc"): [a],
            ("create_offer", "a_acc"): [a],
            ("create_offer", "f_new"): [a, new_o],
            ("send_offer", "f_sent"): [a, o],
            ("return_offer", "f_ret"): [a, o],
            ("cancel_offer", "f_cancel"): [a, o],
            ("validate", "a_val"): [a],
            ("validate", "f_val"): [a, O],
            ("accept_offer", "f_acc"): [a, o],
            ("pending", "a_done"): [a],
            ("deny", "a_done"): [a],
        },
    )
    return AcceptingOPID(net, (Marking(),), {"a_done": PlaceSpec("some")})


@dataclass(frozen=True)
class NoiseModel:
    drop: float = 0.08  # probability of losing an event
    swap: float = 0.08  # probability of exchanging two consecutive activity labels
    max_offers: int = 4


def random_accepted_run(
    anet: AcceptingOPID, rng: random.Random, budget: SearchBudget, max_steps: int, attempts: int = 1000
) -> tuple[Step, ...] | None:
    """Random walk that restarts until it ends in a final marking within `max_steps`."""
    for _ in range(attempts):
        m, run, used = rng.choice(anet.initial), [], set()
        for _ in range(max_steps + 1):
            if anet.is_final(m) and (not run or rng.random() < 0.7):
                return tuple(run)
            if len(run) == max_steps:
                break
            # fresh values must be new to the whole run, not just to the marking
            options = [(s, m2) for s, m2 in successors(anet.net, m, budget) if not _reuses(anet, s, used)]
            if not options:
                break
            step, m = rng.choice(options)
            used |= step.objects()
            run.append(step)
    return None


def sample_run(anet: AcceptingOPID, rng: random.Random, app: str, max_offers: int, max_steps: int = 60) -> tuple[Step, ...]:
    """Random accepted run for one application; offers are named ``{app}_o{k}``."""
    universe = {app: APP} | {f"{app}_o{k}": OFFER for k in range(1, max_offers + 1)}
    run = random_accepted_run(anet, rng, SearchBudget(max_steps, universe), max_steps)
    if run is None:
        raise RuntimeError("no accepted run sampled")
    return run


def _reuses(anet: AcceptingOPID, step: Step, used: set) -> bool:
    b = step.binding
    return any(b[v.name] in used for v in anet.net.fresh_variables(step.transition))


def run_to_events(anet: AcceptingOPID, run, start_id: int, start_time: int) -> list[Event]:
    out = []
    t = start_time
    for step in run:
        label = anet.net.label(step.transition)
        if label == TAU:
            continue
        t += 1
        out.append(Event(f"e{start_id + len(out)}", label, step.objects(), t))
    return out


def add_noise(events: list[Event], rng: random.Random, noise: NoiseModel) -> list[Event]:
    kept = [e for e in events if rng.random() >= noise.drop] or events[:1]
    labels = [e.activity for e in kept]
    for i in range(len(labels) - 1):
        if rng.random() < noise.swap:
            labels[i], labels[i + 1] = labels[i + 1], labels[i]
    return [Event(e.id, lab, e.objects, e.timestamp) for e, lab in zip(kept, labels)]


def loan_log(
    variants: int = 10,
    seed: int = 7,
    noise: NoiseModel = NoiseModel(),
    min_events: int = 3,
    max_events: int = 23,
) -> EventLog:
    """One application (plus its offers) per variant, each with 3-23 events by default."""
    rng = random.Random(seed)
    anet = loan_net()
    events: list[Event] = []
    objects: dict[str, str] = {}
    clock = 0
    made = 0
    while made < variants:
        app = f"a{made + 1}"
        run = sample_run(anet, rng, app, noise.max_offers)
        evs = add_noise(run_to_events(anet, run, len(events), clock), rng, noise)
        if not min_events <= len(evs) <= max_events:
            continue
        evs = [Event(f"e{len(events) + k}", e.activity, e.objects, e.timestamp) for k, e in enumerate(evs)]
        for e in evs:
            for o in e.objects:
                objects[o] = APP if o == app else OFFER
        events.extend(evs)
        clock = evs[-1].timestamp + 10
        made += 1
    return EventLog(events, objects)


# -- small random instances ---------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    family: str
    anet: AcceptingOPID
    log: EventLog
    n: int
    extra: dict  # spare objects per fresh type


def _families() -> dict:
    from .catalog import ORDER, PRODUCT, order_net, order_object_net, review_net
    from .opid import from_object_centric_net

    return {
        "order": (order_net(), {"o1": ORDER, "p1": PRODUCT, "p2": PRODUCT}, {ORDER: 1, PRODUCT: 1}),
        "object-centric": (from_object_centric_net(order_object_net(("o1",), ("p1", "p2"))), {}, {}),
        "review": (review_net(), {}, {}),
    }


FAMILIES = ("order", "object-centric", "review")


def _distort(events: list[Event], rng: random.Random, labels: list[str]) -> list[Event]:
    out = []
    for e in events:
        r = rng.random()
        if r < 0.15:
            continue
        objects, activity = set(e.objects), e.activity
        if r < 0.3:
            activity = rng.choice(labels)
        elif r < 0.45 and len(objects) > 1:
            objects.discard(rng.choice(sorted(objects)))
        out.append(Event(e.id, activity, frozenset(objects), e.timestamp))
    return out


def random_instance(
    rng: random.Random, family: str, n: int = 6, max_events: int = 4, max_objects: int = 4, tries: int = 200
) -> Instance:
    """A noisy log of at most `max_events` events and `max_objects` objects, drawn from one net family."""
    anet, universe, extra = _families()[family]
    universe = dict(universe)
    for m0 in anet.initial:
        for p in m0:
            for tok in m0[p]:
                universe.update(zip(tok, anet.net.places[p].color))
    labels = sorted({tr.label for tr in anet.net.transitions.values() if not tr.silent})
    budget = SearchBudget(n, universe, list_cap=2)
    for _ in range(tries):
        run = random_accepted_run(anet, rng, budget, n, attempts=tries)
        if run is None:
            continue
        events = _distort(run_to_events(anet, run, 0, 0), rng, labels)
        objects = frozenset().union(*(e.objects for e in events)) if events else frozenset()
        if 1 <= len(events) <= max_events and len(objects) <= max_objects:
            log = EventLog(events, {o: universe[o] for o in objects})
            return Instance(family, anet, log, n, dict(extra))
    raise ValueError(f"no {family} instance within {n} steps")
