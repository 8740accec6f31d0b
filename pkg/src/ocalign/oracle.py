"""Brute-force optimal alignments by explicit-state search.

This is the ground truth for small instances: it plays the token game
directly and computes the edit distance concretely, sharing nothing with
the SMT encoding except the net semantics.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .alignments import AlignmentGraph, build_alignment
from .log_model import Event, TraceGraph, linearize
from .opid import AcceptingOPID, Kind, Marking, OPID, Step, fire, is_enabled


class StateCapExceeded(RuntimeError):
    pass


class NoAlignment(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchBudget:
    """Run-length cap, typed object universe and explored-state cap.

    Fresh variables take any absent `pinned` object or the lowest-id absent
    unpinned one: unpinned objects are interchangeable.
    """

    max_depth: int
    universe: Mapping[str, str]
    max_states: int = 2_000_000
    list_cap: int | None = None
    pinned: frozenset[str] = field(default_factory=frozenset)


def _typed(universe: Mapping[str, str]) -> dict[str, list[str]]:
    by_type: dict[str, list[str]] = {}
    for o in sorted(universe):
        by_type.setdefault(universe[o], []).append(o)
    return by_type


def enabled_steps(net: OPID, m: Marking, t: str, budget: SearchBudget) -> list[Step]:
    """All bindings of `t` enabled in `m`, up to fresh-object symmetry."""
    inflows = [(p, ins) for (p, t2), ins in net.in_flow.items() if t2 == t]
    inflows.sort(key=lambda pi: (pi[1].is_template, pi[0]))
    results: list[dict] = []

    def unify(b: dict, ins, tok) -> dict | None:
        b = dict(b)
        for v, o in zip(ins.vars, tok):
            if b.setdefault(v.name, o) != o:
                return None
        return b

    def go(k: int, b: dict) -> None:
        if k == len(inflows):
            results.append(b)
            return
        p, ins = inflows[k]
        tokens = m[p]
        if not ins.is_template:
            for tok in sorted(tokens):
                b2 = unify(b, ins, tok)
                if b2 is not None:
                    go(k + 1, b2)
            return
        i = ins.list_positions[0]
        lvar = ins.vars[i]
        others = [v for j, v in enumerate(ins.vars) if j != i]
        groups: dict[tuple, set[str]] = {}
        for tok in tokens:
            rest = tok[:i] + tok[i + 1:]
            groups.setdefault(rest, set()).add(tok[i])
        for rest, members in sorted(groups.items()):
            b2 = dict(b)
            if any(b2.setdefault(v.name, o) != o for v, o in zip(others, rest)):
                continue
            if lvar.name in b2:
                if set(b2[lvar.name]) <= members:
                    go(k + 1, b2)
                continue
            cap = len(members) if budget.list_cap is None else min(budget.list_cap, len(members))
            ordered = sorted(members)
            for size in range(1, cap + 1):
                for combo in itertools.combinations(ordered, size):
                    b3 = dict(b2)
                    b3[lvar.name] = combo
                    go(k + 1, b3)

    go(0, {})
    fresh = net.fresh_variables(t)
    if not fresh:
        return [Step.of(t, b) for b in results if is_enabled(net, m, t, b)]
    present = m.objects()
    by_type = _typed(budget.universe)
    steps = []
    for b in results:
        for choice in _fresh_choices(fresh, by_type, present, budget.pinned):
            b2 = dict(b)
            b2.update(choice)
            if is_enabled(net, m, t, b2):
                steps.append(Step.of(t, b2))
    return steps


def _fresh_choices(fresh, by_type, present, pinned) -> Iterator[dict]:
    def go(k: int, used: set, acc: dict):
        if k == len(fresh):
            yield dict(acc)
            return
        v = fresh[k]
        candidates = [o for o in by_type.get(v.type, []) if o not in present and o not in used]
        opts = [o for o in candidates if o in pinned]
        spare = [o for o in candidates if o not in pinned]
        if spare:
            opts.append(spare[0])
        for o in opts:
            acc[v.name] = o
            yield from go(k + 1, used | {o}, acc)
        acc.pop(v.name, None)

    yield from go(0, set(), {})


def successors(net: OPID, m: Marking, budget: SearchBudget) -> Iterator[tuple[Step, Marking]]:
    for t in sorted(net.transitions):
        for step in enabled_steps(net, m, t, budget):
            yield step, fire(net, m, step.transition, step.binding)


def enumerate_runs(anet: AcceptingOPID, budget: SearchBudget) -> Iterator[tuple[Step, ...]]:
    """Every accepted run of length <= max_depth (depth-first).

    Raises `StateCapExceeded` after the partial stream once more than
    `max_states` markings have been expanded.
    """
    expanded = 0
    for start in anet.initial:
        stack = [(start, ())]
        while stack:
            m, run = stack.pop()
            if anet.is_final(m):
                yield run
            if len(run) == budget.max_depth:
                continue
            expanded += 1
            if expanded > budget.max_states:
                raise StateCapExceeded(f"more than {budget.max_states} states expanded")
            succ = list(successors(anet.net, m, budget))
            for step, m2 in reversed(succ):
                stack.append((m2, run + (step,)))


def shortest_accepted_run(anet: AcceptingOPID, budget: SearchBudget) -> tuple[Step, ...] | None:
    """Breadth-first search for a shortest accepted run."""
    expanded = 0
    queue = deque((m, ()) for m in anet.initial)
    seen = set(anet.initial)
    while queue:
        m, run = queue.popleft()
        if anet.is_final(m):
            return run
        if len(run) >= budget.max_depth:
            continue
        expanded += 1
        if expanded > budget.max_states:
            raise StateCapExceeded(f"more than {budget.max_states} states expanded")
        for step, m2 in successors(anet.net, m, budget):
            if m2 not in seen:
                seen.add(m2)
                queue.append((m2, run + (step,)))
    return None


# -- edit distance ---------------------------------------------------------------


def step_cost(net: OPID, step: Step) -> int:
    return 0 if net.transitions[step.transition].silent else len(step.objects())


def sync_ok(net: OPID, e: Event, step: Step) -> bool:
    return net.label(step.transition) == e.activity and step.objects() == e.objects


def edit_distance_table(events: Sequence[Event], net: OPID, run: Sequence[Step]) -> list[list[float]]:
    """d[i][j]: cheapest alignment of the first i events with the first j firings."""
    INF = float("inf")
    m, n = len(events), len(run)
    d = [[0.0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        d[i][0] = d[i - 1][0] + len(events[i - 1].objects)
    for j in range(1, n + 1):
        pm = step_cost(net, run[j - 1])
        d[0][j] = d[0][j - 1] + pm
        for i in range(1, m + 1):
            e = events[i - 1]
            sync = d[i - 1][j - 1] if sync_ok(net, e, run[j - 1]) else INF
            d[i][j] = min(sync, len(e.objects) + d[i - 1][j], pm + d[i][j - 1])
    return d


def _next_column(col: list, events: Sequence[Event], net: OPID, step: Step) -> list:
    pm = step_cost(net, step)
    new = [col[0] + pm]
    for i in range(1, len(col)):
        e = events[i - 1]
        best = min(len(e.objects) + new[i - 1], pm + col[i])
        if sync_ok(net, e, step):
            best = min(best, col[i - 1])
        new.append(best)
    return new


def interleaving(events: Sequence[Event], net: OPID, run: Sequence[Step]) -> list[tuple[Event | None, int | None]]:
    """Backtrack the table preferring log, then model, then synchronous moves."""
    d = edit_distance_table(events, net, run)
    i, j = len(events), len(run)
    out = []
    while i > 0 or j > 0:
        if j == 0:
            out.append((events[i - 1], None))
            i -= 1
        elif i == 0:
            out.append((None, j - 1))
            j -= 1
        elif d[i][j] == len(events[i - 1].objects) + d[i - 1][j]:
            out.append((events[i - 1], None))
            i -= 1
        elif d[i][j] == step_cost(net, run[j - 1]) + d[i][j - 1]:
            out.append((None, j - 1))
            j -= 1
        else:
            out.append((events[i - 1], j - 1))
            i, j = i - 1, j - 1
    out.reverse()
    return out


@dataclass
class OracleResult:
    cost: int
    run: tuple[Step, ...]
    alignment: AlignmentGraph
    states: int


def optimal_alignment_bruteforce(
    t: TraceGraph, anet: AcceptingOPID, budget: SearchBudget, prune: bool = True
) -> OracleResult:
    """Minimum edit distance between `linearize(t)` and any accepted run within budget.

    With `prune`, prefixes are cut when their cost column is dominated by an
    earlier prefix reaching the same marking in no more steps, or when no
    completion can beat the incumbent.  Both cuts keep the result exact.
    Trace objects are always pinned so they keep their identity.
    """
    events = linearize(t)
    pinned = budget.pinned | t.objects() | anet.initial_objects()
    budget = SearchBudget(budget.max_depth, budget.universe, budget.max_states, budget.list_cap, frozenset(pinned))
    net = anet.net
    best: tuple[float, tuple] = (float("inf"), ())
    seen: dict[Marking, list[tuple[int, list]]] = {}
    expanded = 0

    def dominated(m: Marking, depth: int, col: list) -> bool:
        entries = seen.setdefault(m, [])
        for d0, c0 in entries:
            if d0 <= depth and all(a <= b for a, b in zip(c0, col)):
                return True
        entries[:] = [(d0, c0) for d0, c0 in entries if not (depth <= d0 and all(a <= b for a, b in zip(col, c0)))]
        entries.append((depth, col))
        return False

    col0 = [0]
    for e in events:
        col0.append(col0[-1] + len(e.objects))
    stack = [(start, (), col0) for start in anet.initial]
    while stack:
        m, run, col = stack.pop()
        if anet.is_final(m) and col[-1] < best[0]:
            best = (col[-1], run)
        if len(run) == budget.max_depth:
            continue
        if prune and (min(col) >= best[0] or dominated(m, len(run), col)):
            continue
        expanded += 1
        if expanded > budget.max_states:
            raise StateCapExceeded(f"more than {budget.max_states} states expanded")
        for step, m2 in successors(net, m, budget):
            stack.append((m2, run + (step,), _next_column(col, events, net, step)))
    if best[0] == float("inf"):
        raise NoAlignment("no accepted run within the search budget")
    run = best[1]
    graph = build_alignment(interleaving(events, net, run), t, anet, run)
    return OracleResult(int(best[0]), run, graph, expanded)
