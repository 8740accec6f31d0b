"""Acceptance criteria, each at its stated tolerance.

A pass/fail line per criterion is printed in the terminal summary.
Criterion 7 re-solves every instance of criteria 1-5 with the iterative
dialect and compares against the native results cached here.
"""

import random
import time

import networkx as nx
import pytest

from ocalign import catalog
from ocalign.alignments import alignment_cost, is_valid_alignment, move_bound, object_occurrence_bound
from ocalign.conformance import AlignConfig, align_trace, object_types_of
from ocalign.log_model import Event, EventLog, LogError, trace_graphs
from ocalign.opid import accepts, bind_inscription, execute_run
from ocalign.oracle import SearchBudget, successors
from ocalign.synthetic import FAMILIES, loan_log, loan_net, random_instance

from .conftest import needs_z3

pytestmark = needs_z3

# name -> (anet, trace, types, cfg, native report)
SOLVED: dict[str, tuple] = {}


def _solve(name, anet, trace, types, cfg):
    report = align_trace(anet, trace, types, cfg)
    SOLVED[name] = (anet, trace, types, cfg, report)
    return report


def _detail(request, text):
    request.node.user_properties.append(("detail", text))


def _check_valid(report, anet, trace, types):
    assert report.ok, report.problems
    types = dict(types)
    for step in report.run:
        for v in anet.net.variables(step.transition):
            val = step.binding[v.name]
            for o in val if isinstance(val, (tuple, list)) else (val,):
                types.setdefault(o, v.type)
    assert accepts(anet, report.run, types)
    execute_run(anet, report.run)
    assert is_valid_alignment(report.alignment, trace, anet, report.run, types)
    assert alignment_cost(report.alignment) == report.cost


X1_CFG = AlignConfig(bound=12, extra_objects={"order": 1, "product": 1}, dialect="native")


@pytest.mark.criterion(1)
def test_running_example_costs_eight(request, order_net, order_traces, order_types):
    x1, _ = order_traces
    start = time.monotonic()
    r = _solve("X1", order_net, x1, order_types, X1_CFG)
    wall = time.monotonic() - start
    g = r.alignment
    counts = {k: g.count(k) for k in ("sync", "log", "visible-model", "silent")}
    _detail(request, f"cost {r.cost}, moves {counts}, {wall:.1f}s")
    assert r.status == "optimal" and r.cost == 8
    assert counts == {"sync": 6, "log": 2, "visible-model": 2, "silent": 4}
    assert wall < 60
    _check_valid(r, order_net, x1, order_types)


@pytest.mark.criterion(2)
def test_second_component_matches_the_oracle(request, order_net, order_traces, order_types):
    _, x2 = order_traces
    # depth 8; spare objects from the bounds-derived fresh budget
    r0 = align_trace(order_net, x2, order_types, AlignConfig(bound=8, mode="oracle"))
    budget = dict(r0.bounds.fresh_objects_per_type)
    cfg = AlignConfig(bound=8, extra_objects=budget, mode="both", dialect="native")
    r = _solve("X2", order_net, x2, order_types, cfg)
    _detail(request, f"smt {r.cost}, oracle {r.oracle_cost}, spare {budget}")
    assert r.status == "optimal" and r.cost == r.oracle_cost
    _check_valid(r, order_net, x2, order_types)


@pytest.fixture(scope="module")
def product_only():
    log = catalog.product_only_log()
    (t,) = trace_graphs(log)
    return t, dict(log.universe.objects)


@pytest.mark.criterion(3)
def test_product_only_log_needs_a_fresh_order(request, order_net, product_only):
    t, types = product_only
    base = align_trace(order_net, t, types, AlignConfig(mode="oracle", bound=0))
    b = base.bounds
    n, budget = b.move_bound, dict(b.fresh_objects_per_type)
    none = _solve("ex5-no-orders", order_net, t, types, AlignConfig(bound=n, extra_objects={**budget, "order": 0}))
    some = _solve("ex5-budget", order_net, t, types, AlignConfig(bound=n, extra_objects=budget))
    _detail(request, f"n={n}, budget {budget}: zero orders {none.status}, with budget {some.status} cost {some.cost}")
    assert none.status == "infeasible"
    # three log moves plus a full model run for a new order: 3 + (2 + 1 + 2 + 2)
    assert some.status == "optimal" and some.cost == 10
    _check_valid(some, order_net, t, types)


@pytest.mark.criterion(3)
def test_quoted_object_occurrence_bound(request):
    value = object_occurrence_bound(c=3, m=6)
    _detail(request, f"2c+m = {value}, quoted 12")
    assert value == 12


@pytest.mark.criterion(3)
def test_quoted_move_bound(request):
    # three events, no fresh-free silent chain, fresh inscriptions present
    value = move_bound(num_events=3, c=3, m=6, k=0, has_fresh=True)
    _detail(request, f"(|E|+3c+2m)(k+1) = {value}, quoted 25")
    assert value == 25


@pytest.mark.criterion(4)
@pytest.mark.parametrize("repaired, positive", [(False, True), (True, False)])
def test_package_trace(request, repaired, positive):
    anet = catalog.package_net()
    log = catalog.package_log(bill_with_package=repaired)
    (t,) = trace_graphs(log)
    types = dict(log.universe.objects)
    cfg = AlignConfig(bound=11, extra_objects={"order": 0, "product": 0, "delivery": 0})
    r = _solve(f"package-{'repaired' if repaired else 'original'}", anet, t, types, cfg)
    _detail(request, f"cost {r.cost}")
    assert r.status == "optimal"
    assert (r.cost > 0) if positive else (r.cost == 0)
    _check_valid(r, anet, t, types)


def _random_instances(count=60, seed=2024):
    rng = random.Random(seed)
    out = []
    for k in range(count):
        inst = random_instance(rng, FAMILIES[k % len(FAMILIES)])
        for j, t in enumerate(trace_graphs(inst.log)):
            out.append((f"random-{k}-{j}", inst, t))
    return out


@pytest.mark.criterion(5)
def test_smt_equals_oracle_on_random_instances(request):
    cases = _random_instances()
    feasible = 0
    for name, inst, t in cases:
        types = object_types_of(inst.anet, inst.log.universe.objects)
        cfg = AlignConfig(bound=inst.n, extra_objects=inst.extra, mode="both")
        r = _solve(name, inst.anet, t, types, cfg)
        assert r.ok, (name, r.problems)
        if r.status == "infeasible":
            assert r.oracle_cost is None
            continue
        assert r.status == "optimal" and r.cost == r.oracle_cost, name
        _check_valid(r, inst.anet, t, types)
        feasible += 1
    per_family = {f: sum(1 for _, i, _ in cases if i.family == f) for f in FAMILIES}
    _detail(request, f"{len(cases)} trace graphs ({per_family}), {feasible} feasible, all equal to the oracle")
    assert len(cases) >= 50 and feasible >= 50


def _walks(anet, universe, seed, count=200, length=12):
    rng = random.Random(seed)
    budget = SearchBudget(length, universe, list_cap=2)
    for _ in range(count):
        m = anet.initial[0]
        for _ in range(length):
            options = list(successors(anet.net, m, budget))
            if not options:
                break
            step, m2 = rng.choice(options)
            yield m, step, m2
            m = m2


@pytest.mark.criterion(6)
def test_semantics(request):
    nets = [
        (catalog.order_net(), {"o1": "order", "o2": "order", "p1": "product", "p2": "product"}),
        (catalog.package_net(), {"o": "order", "p": "product", "q": "product", "d": "delivery"}),
        (catalog.review_net(), {"x1": "paper", "r1": "reviewer", "r2": "reviewer"}),
        (loan_net(), {"a1": "application", "f1": "offer", "f2": "offer"}),
    ]
    firings = 0
    for seed, (anet, universe) in enumerate(nets):
        net = anet.net
        for m, step, m2 in _walks(anet, universe, seed):
            firings += 1
            b = step.binding
            pre, post = set(net.preset(step.transition)), set(net.postset(step.transition))
            for p in net.places:
                # color preservation
                assert all(tuple(universe[o] for o in tok) == net.places[p].color for tok in m2[p])
                # frame: places outside the flow keep their tokens
                if p not in pre | post:
                    assert m2[p] == m[p]
            # freshness
            fresh = [b[v.name] for v in net.fresh_variables(step.transition)]
            assert len(set(fresh)) == len(fresh) and not set(fresh) & m.objects()
            # template inscriptions give one token per list member
            for key, ins in list(net.in_flow.items()) + list(net.out_flow.items()):
                if step.transition in key and ins.is_template:
                    assert len(bind_inscription(b, ins)) == len(b[ins.list_var.name])
    # trace graphs are acyclic
    graphs = trace_graphs(catalog.order_log()) + trace_graphs(loan_log())
    assert all(nx.is_directed_acyclic_graph(g.to_networkx()) for g in graphs)
    # two events of one object at one timestamp are rejected
    with pytest.raises(LogError):
        EventLog([Event("e0", "a", {"o1"}, 1), Event("e1", "b", {"o1"}, 1)], {"o1": "order"})
    _detail(request, f"{firings} firings over 4 nets, {len(graphs)} trace graphs")


@pytest.mark.criterion(7)
def test_native_and_iterative_agree(request):
    if not SOLVED:
        pytest.skip("criteria 1-5 did not run in this session")
    mismatches = []
    for name, (anet, trace, types, cfg, native) in sorted(SOLVED.items()):
        it = align_trace(anet, trace, types, AlignConfig(**{**cfg.__dict__, "dialect": "iterative", "mode": "smt"}))
        if (it.status, it.cost) != (native.status, native.cost):
            mismatches.append((name, native.status, native.cost, it.status, it.cost))
    _detail(request, f"{len(SOLVED)} instances, {len(mismatches)} mismatches")
    assert not mismatches, mismatches


LOAN_SLACK = 2
LOAN_LIMIT = 30 * 60


@pytest.mark.slow
@pytest.mark.criterion(8)
def test_synthetic_loan_variants(request):
    log = loan_log()
    anet = loan_net()
    types = dict(log.universe.objects)
    walls = []
    for t in trace_graphs(log):
        cfg = AlignConfig(bound=len(t.events) + LOAN_SLACK, extra_objects={"application": 0, "offer": 1}, timeout=LOAN_LIMIT)
        r = align_trace(anet, t, types, cfg)
        walls.append((len(t.events), round(r.wall, 1), r.cost))
        assert r.status == "optimal", (len(t.events), r.status)
        assert r.wall < LOAN_LIMIT
        _check_valid(r, anet, t, types)
    _detail(request, f"(events, seconds, cost): {walls}")
    assert len(walls) == 10
