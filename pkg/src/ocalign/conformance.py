"""Align every trace graph of a log against an accepting net."""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .alignments import (
    AlignmentGraph,
    BoundsError,
    BoundsReport,
    alignment_cost,
    alignment_problems,
    compute_bounds,
    has_fresh_inscriptions,
)
from .log_model import EventLog, TraceGraph, trace_graphs
from .opid import AcceptingOPID, Kind, Step, accepts
from .oracle import NoAlignment, SearchBudget, StateCapExceeded, optimal_alignment_bruteforce, shortest_accepted_run
from .smt_encoding import EncodingParams, build_problem, decode_alignment, decode_run
from .solver import SolveResult, problem_script, solve_minimize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlignConfig:
    bound: int | None = None
    extra_objects: Mapping[str, int] | None = None  # per type; overrides the bounds-derived budget
    list_cap: int | None = None
    solver: str | None = None
    dialect: str | None = None  # native | iterative
    strategy: str = "descent"  # descent | binary (iterative dialect only)
    timeout: float | None = None
    mode: str = "smt"  # smt | oracle | both
    oracle_states: int = 2_000_000
    auto_bound: bool = False
    dump_dir: str | None = None


@dataclass
class TraceReport:
    component: tuple[str, ...]
    events: int
    objects: int
    status: str  # optimal | infeasible | timeout | unknown
    cost: int | None = None
    run: tuple[Step, ...] = ()
    alignment: AlignmentGraph | None = None
    n: int = 0
    universe: tuple[str, ...] = ()
    bounds: BoundsReport | None = None
    oracle_cost: int | None = None
    wall: float = 0.0
    solver: dict = field(default_factory=dict)
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


def reference_run(anet: AcceptingOPID, spare_per_type: int = 3, max_depth: int = 40) -> tuple[Step, ...]:
    """A shortest accepted run over a handful of spare objects per type."""
    net = anet.net
    universe = {}
    for typ in sorted(net.types):
        for k in range(1, spare_per_type + 1):
            universe[f"ref_{typ}_{k}"] = typ
    for m0 in anet.initial:
        for p in m0:
            for tok in m0[p]:
                for o, typ in zip(tok, net.places[p].color):
                    universe.setdefault(o, typ)
    run = shortest_accepted_run(anet, SearchBudget(max_depth, universe, max_states=200_000, list_cap=1))
    if run is None:
        raise BoundsError("the net accepts no run within the reference-run search budget")
    return run


def object_types_of(anet: AcceptingOPID, log_types: Mapping[str, str]) -> dict[str, str]:
    types = dict(log_types)
    for m0 in anet.initial:
        for p in m0:
            for tok in m0[p]:
                for o, typ in zip(tok, anet.net.places[p].color):
                    types.setdefault(o, typ)
    return types


def _plan(anet: AcceptingOPID, trace: TraceGraph, types: Mapping[str, str], cfg: AlignConfig):
    bounds = None
    fresh_types = sorted({v.type for ins in anet.net.out_flow.values() for v in ins.vars if v.kind is Kind.FRESH})
    need_extra = any(t not in (cfg.extra_objects or {}) for t in fresh_types)
    if cfg.bound is None or need_extra:
        ref = reference_run(anet)
        ref_types = dict(types)
        for s in ref:
            for v in anet.net.variables(s.transition):
                val = s.binding[v.name]
                for o in val if isinstance(val, tuple) else (val,):
                    ref_types.setdefault(o, v.type)
        bounds = compute_bounds(trace, anet, ref, ref_types)
    n = cfg.bound if cfg.bound is not None else bounds.move_bound
    extra = {t: (bounds.fresh_objects_per_type.get(t, 0) if bounds else 0) for t in fresh_types}
    extra.update(cfg.extra_objects or {})
    return bounds, n, extra


def align_trace(
    anet: AcceptingOPID, trace: TraceGraph, object_types: Mapping[str, str], cfg: AlignConfig = AlignConfig()
) -> TraceReport:
    start = time.monotonic()
    types = object_types_of(anet, object_types)
    report = TraceReport(tuple(sorted(trace.component)), len(trace.events), len(trace.objects()), "unknown")
    bounds, n_max, extra = _plan(anet, trace, types, cfg)
    report.bounds = bounds
    ns = [n_max]
    if cfg.auto_bound:
        ns, k = [], max(1, len(trace.events))
        while k < n_max:
            ns.append(k)
            k *= 2
        ns.append(n_max)
    for n in ns:
        params = EncodingParams.build(anet, trace, n, types, extra, cfg.list_cap)
        report.n, report.universe = n, params.objects
        if cfg.mode in ("smt", "both"):
            _solve(report, anet, trace, params, cfg)
        if cfg.mode in ("oracle", "both"):
            _oracle(report, anet, trace, params, cfg)
        if report.status != "infeasible":
            break
    report.wall = time.monotonic() - start
    return report


def _solve(report: TraceReport, anet, trace, params: EncodingParams, cfg: AlignConfig) -> None:
    problem = build_problem(anet, trace, params)
    layout = problem.layout
    decls = problem.declarations()
    if cfg.dump_dir:
        os.makedirs(cfg.dump_dir, exist_ok=True)
        name = "_".join(report.component)[:80] or "empty"
        with open(os.path.join(cfg.dump_dir, f"{name}_n{params.n}.smt2"), "w") as fh:
            fh.write("\n".join(problem_script(decls, problem.constraints)))
            fh.write(f"\n(minimize {problem.objective.name})\n(check-sat)\n")
    wanted = layout.run_variable_names() + layout.distance_variable_names()
    res: SolveResult = solve_minimize(
        decls,
        problem.constraints,
        problem.objective,
        wanted,
        solver=cfg.solver,
        dialect=cfg.dialect,
        strategy=cfg.strategy,
        timeout=cfg.timeout,
    )
    report.solver = {
        "status": res.status,
        "checks": res.stats.checks,
        "iterations": res.stats.iterations,
        "wall": round(res.stats.wall, 3),
        "variables": len(decls),
        "constraints": len(problem.constraints),
    }
    if res.status == "unsat":
        report.status = "infeasible"
        return
    if res.objective is None:
        report.status = res.status
        return
    report.status = "optimal" if res.optimal else res.status
    run = decode_run(res.assignment, layout)
    graph = decode_alignment(res.assignment, layout, trace, anet)
    report.cost, report.run, report.alignment = res.objective, run, graph
    report.problems += alignment_problems(graph, trace, anet, run, dict(params.object_types))
    if alignment_cost(graph) != res.objective:
        report.problems.append(f"alignment cost {alignment_cost(graph)} differs from objective {res.objective}")


def _oracle(report: TraceReport, anet, trace, params: EncodingParams, cfg: AlignConfig) -> None:
    budget = SearchBudget(params.n, dict(params.object_types), cfg.oracle_states, params.list_cap)
    try:
        res = optimal_alignment_bruteforce(trace, anet, budget)
    except NoAlignment:
        cost = None
    except StateCapExceeded as exc:
        report.problems.append(f"oracle: {exc}")
        return
    else:
        cost = res.cost
    report.oracle_cost = cost
    if cfg.mode == "oracle":
        if cost is None:
            report.status = "infeasible"
            return
        report.status, report.cost, report.run, report.alignment = "optimal", cost, res.run, res.alignment
        report.problems += alignment_problems(res.alignment, trace, anet, res.run, dict(params.object_types))
    elif report.status == "optimal" and cost != report.cost:
        report.problems.append(f"oracle cost {cost} differs from solver cost {report.cost}")
    elif report.status == "infeasible" and cost is not None:
        report.problems.append(f"oracle found cost {cost} where the solver reported infeasible")


def _align_job(args) -> TraceReport:
    return align_trace(*args)


def run_conformance(
    anet: AcceptingOPID, event_log: EventLog, cfg: AlignConfig = AlignConfig(), jobs: int | None = None
) -> list[TraceReport]:
    """One report per trace graph, in component order."""
    traces = trace_graphs(event_log)
    types = dict(event_log.universe.objects)
    jobs = jobs or os.cpu_count() or 1
    tasks = [(anet, t, types, cfg) for t in traces]
    if jobs == 1 or len(tasks) <= 1:
        return [_align_job(a) for a in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(_align_job, tasks))
