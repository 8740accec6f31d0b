"""Extended PNML nets, OCEL 1.0 JSON logs, and alignment reports.

PNML extensions (all plain attributes, ASCII only):

* ``<place color="order,product">``: the place color as a comma-separated type tuple
* ``<arc inscription="o,L:P">``: variables per color position; ``L:`` marks a
  list variable, ``N:`` a fresh variable; types come from the place color
* ``<transition silent="true">`` or a name of ``τ``/``tau`` marks a silent transition
* ``<toolspecific tool="ocalign">`` holds ``<types>``, ``<initialmarking>`` and
  ``<finalmarking>`` (per-place ``spec`` of ``empty``, ``some`` or ``exactly:k``)

A net whose ``type`` attribute is ``object-centric`` instead carries single-type
place colors and ``variable="true"`` arcs, and is converted to an OPID.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from datetime import datetime, timezone
from typing import Any, Mapping

from .alignments import AlignmentGraph, BoundsReport, ModelPart, Move
from .log_model import Event, EventLog, LogError
from .opid import (
    TAU,
    AcceptingOPID,
    Inscription,
    Kind,
    Marking,
    NetError,
    OCArc,
    ObjectCentricNet,
    OPID,
    Place,
    PlaceSpec,
    Step,
    Transition,
    Variable,
    validate,
)

TOOL = "ocalign"
_PREFIX = {"L": Kind.LIST, "N": Kind.FRESH}


class FormatError(ValueError):
    pass


# -- PNML ----------------------------------------------------------------------


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _children(el: ET.Element, name: str) -> list[ET.Element]:
    return [c for c in el.iter() if _local(c.tag) == name]


def _structural(el: ET.Element, name: str) -> list[ET.Element]:
    """Descendants called `name`, skipping toolspecific sections."""
    out = []
    for c in el:
        tag = _local(c.tag)
        if tag == "toolspecific":
            continue
        if tag == name:
            out.append(c)
        out.extend(_structural(c, name))
    return out


def _name_text(el: ET.Element) -> str | None:
    for c in el:
        if _local(c.tag) == "name":
            for t in c:
                if _local(t.tag) == "text":
                    return (t.text or "").strip()
    return None


def _split(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def parse_inscription(text: str, color: tuple[str, ...]) -> Inscription:
    tokens = _split(text)
    if len(tokens) != len(color):
        raise FormatError(f"inscription {text!r} has arity {len(tokens)}, place color {color} has {len(color)}")
    out = []
    for tok, typ in zip(tokens, color):
        kind = Kind.NORMAL
        if ":" in tok:
            prefix, tok = tok.split(":", 1)
            if prefix not in _PREFIX:
                raise FormatError(f"unknown variable prefix {prefix!r} in {text!r}")
            kind = _PREFIX[prefix]
        if not tok:
            raise FormatError(f"empty variable name in {text!r}")
        out.append(Variable(tok, kind, typ))
    return Inscription(tuple(out))


def format_inscription(ins: Inscription) -> str:
    prefix = {Kind.NORMAL: "", Kind.LIST: "L:", Kind.FRESH: "N:"}
    return ",".join(prefix[v.kind] + v.name for v in ins.vars)


def parse_pnml(text: str) -> AcceptingOPID:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise FormatError(f"XML error: {exc}") from exc
    nets = _children(root, "net")
    if not nets:
        raise FormatError("no <net> element")
    net_el = nets[0]
    tool = next((t for t in _children(net_el, "toolspecific") if t.get("tool") == TOOL), None)
    declared = None
    if tool is not None:
        types_el = _children(tool, "type")
        if types_el:
            declared = {t.get("name") for t in types_el}
    places: dict[str, tuple[str, ...]] = {}
    for p in _structural(net_el, "place"):
        color = tuple(_split(p.get("color", "")))
        if not color:
            raise FormatError(f"place {p.get('id')!r} has no color")
        if declared is not None:
            for typ in color:
                if typ not in declared:
                    raise FormatError(f"place {p.get('id')!r}: unknown type {typ!r}")
        places[p.get("id")] = color
    transitions = {}
    for t in _structural(net_el, "transition"):
        name = _name_text(t)
        silent = t.get("silent", "").lower() == "true" or name in (None, "", TAU, "tau")
        transitions[t.get("id")] = TAU if silent else name
    arcs = _structural(net_el, "arc")
    initial = _read_markings(tool, places)
    final = _read_final(tool)
    if net_el.get("type") == "object-centric":
        anet = _object_centric(places, transitions, arcs, initial, final)
    else:
        anet = _opid(places, transitions, arcs, initial, final, declared)
    problems = validate(anet)
    if problems:
        raise FormatError("; ".join(problems))
    return anet


def _read_markings(tool, places) -> list[dict[str, list[tuple[str, ...]]]]:
    if tool is None:
        return [{}]
    out = []
    for m in _children(tool, "marking"):
        tokens: dict[str, list[tuple[str, ...]]] = {}
        for tok in m:
            if _local(tok.tag) != "token":
                continue
            p = tok.get("place")
            if p not in places:
                raise FormatError(f"initial marking names unknown place {p!r}")
            tokens.setdefault(p, []).append(tuple(_split(tok.text or "")))
        out.append(tokens)
    return out or [{}]


def _read_final(tool) -> dict[str, PlaceSpec]:
    if tool is None:
        return {}
    out = {}
    for fm in _children(tool, "finalmarking"):
        for p in fm:
            if _local(p.tag) == "place":
                try:
                    out[p.get("idref")] = PlaceSpec.parse(p.get("spec", "empty"))
                except NetError as exc:
                    raise FormatError(str(exc)) from exc
    return out


def _opid(places, transitions, arcs, initial, final, declared) -> AcceptingOPID:
    in_flow, out_flow = {}, {}
    for a in arcs:
        s, t = a.get("source"), a.get("target")
        text = a.get("inscription")
        if text is None:
            raise FormatError(f"arc {s}->{t} has no inscription")
        if s in places and t in transitions:
            in_flow[(s, t)] = parse_inscription(text, places[s])
        elif s in transitions and t in places:
            out_flow[(s, t)] = parse_inscription(text, places[t])
        else:
            raise FormatError(f"arc {s}->{t} does not connect a place and a transition")
    types = frozenset(declared) if declared is not None else frozenset(x for c in places.values() for x in c)
    net = OPID(
        types,
        {p: Place(p, c) for p, c in places.items()},
        {t: Transition(t, label) for t, label in transitions.items()},
        in_flow,
        out_flow,
    )
    for m in initial:
        for p, toks in m.items():
            for tok in toks:
                if len(tok) != len(places[p]):
                    raise FormatError(f"initial token {tok} does not fit the color of {p}")
    return AcceptingOPID(net, tuple(Marking(m) for m in initial), final)


def _object_centric(places, transitions, arcs, initial, final) -> AcceptingOPID:
    from .opid import from_object_centric_net

    place_types = {}
    for p, c in places.items():
        if len(c) != 1:
            raise FormatError(f"object-centric place {p!r} needs a single type")
        place_types[p] = c[0]
    oc_arcs = tuple(
        OCArc(a.get("source"), a.get("target"), a.get("variable", "false").lower() == "true") for a in arcs
    )
    init = tuple({p: [tok[0] for tok in toks] for p, toks in m.items()} for m in initial)
    on = ObjectCentricNet(place_types, transitions, oc_arcs, init, final)
    try:
        return from_object_centric_net(on)
    except NetError as exc:
        raise FormatError(str(exc)) from exc


def write_pnml(anet: AcceptingOPID, net_id: str = "net") -> str:
    net = anet.net
    root = ET.Element("pnml")
    net_el = ET.SubElement(root, "net", id=net_id, type="opid")
    page = ET.SubElement(net_el, "page", id="page0")
    for p in sorted(net.places):
        ET.SubElement(page, "place", id=p, color=",".join(net.places[p].color))
    for t in sorted(net.transitions):
        tr = net.transitions[t]
        attrs = {"id": t}
        if tr.silent:
            attrs["silent"] = "true"
        el = ET.SubElement(page, "transition", attrs)
        ET.SubElement(ET.SubElement(el, "name"), "text").text = tr.label
    k = 0
    for (p, t), ins in sorted(net.in_flow.items()):
        ET.SubElement(page, "arc", id=f"a{k}", source=p, target=t, inscription=format_inscription(ins))
        k += 1
    for (t, p), ins in sorted(net.out_flow.items()):
        ET.SubElement(page, "arc", id=f"a{k}", source=t, target=p, inscription=format_inscription(ins))
        k += 1
    tool = ET.SubElement(net_el, "toolspecific", tool=TOOL, version="1")
    types = ET.SubElement(tool, "types")
    for typ in sorted(net.types):
        ET.SubElement(types, "type", name=typ)
    init = ET.SubElement(tool, "initialmarking")
    for m in anet.initial:
        m_el = ET.SubElement(init, "marking")
        for p in sorted(m):
            for tok in sorted(m[p]):
                ET.SubElement(m_el, "token", place=p).text = ",".join(tok)
    fin = ET.SubElement(tool, "finalmarking")
    for p in sorted(anet.final):
        ET.SubElement(fin, "place", idref=p, spec=str(anet.final[p]))
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"


def write_object_centric_pnml(on: ObjectCentricNet, net_id: str = "net") -> str:
    root = ET.Element("pnml")
    net_el = ET.SubElement(root, "net", id=net_id, type="object-centric")
    page = ET.SubElement(net_el, "page", id="page0")
    for p in sorted(on.place_types):
        ET.SubElement(page, "place", id=p, color=on.place_types[p])
    for t in sorted(on.transitions):
        attrs = {"id": t}
        if on.transitions[t] == TAU:
            attrs["silent"] = "true"
        el = ET.SubElement(page, "transition", attrs)
        ET.SubElement(ET.SubElement(el, "name"), "text").text = on.transitions[t]
    for k, a in enumerate(on.arcs):
        ET.SubElement(page, "arc", id=f"a{k}", source=a.source, target=a.target, variable=str(a.variable).lower())
    tool = ET.SubElement(net_el, "toolspecific", tool=TOOL, version="1")
    init = ET.SubElement(tool, "initialmarking")
    for m in on.initial:
        m_el = ET.SubElement(init, "marking")
        for p in sorted(m):
            for o in sorted(m[p]):
                ET.SubElement(m_el, "token", place=p).text = o
    fin = ET.SubElement(tool, "finalmarking")
    for p in sorted(on.final):
        ET.SubElement(fin, "place", idref=p, spec=str(on.final[p]))
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"


# -- OCEL ----------------------------------------------------------------------


def parse_timestamp(value: Any) -> int:
    """Epoch milliseconds from an integer or an ISO-8601 string (naive means UTC)."""
    if isinstance(value, bool):
        raise FormatError(f"bad timestamp {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if not isinstance(value, str):
        raise FormatError(f"bad timestamp {value!r}")
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise FormatError(f"bad timestamp {value!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(round(dt.timestamp() * 1000))


def parse_ocel(text: str) -> EventLog:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"JSON error: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("OCEL document must be a JSON object")
    objects = {}
    for oid, obj in (doc.get("ocel:objects") or {}).items():
        typ = obj.get("ocel:type") if isinstance(obj, dict) else None
        if not typ:
            raise FormatError(f"object {oid!r} has no ocel:type")
        objects[oid] = typ
    events = []
    for eid, ev in (doc.get("ocel:events") or {}).items():
        try:
            act, ts, omap = ev["ocel:activity"], ev["ocel:timestamp"], ev["ocel:omap"]
        except (KeyError, TypeError):
            raise FormatError(f"event {eid!r} lacks ocel:activity, ocel:timestamp or ocel:omap") from None
        if act == TAU:
            raise FormatError(f"event {eid!r} uses the reserved silent label")
        try:
            events.append(Event(eid, act, frozenset(omap), parse_timestamp(ts)))
        except LogError as exc:
            raise FormatError(str(exc)) from exc
    try:
        return EventLog(events, objects)
    except LogError as exc:
        raise FormatError(str(exc)) from exc


def write_ocel(log: EventLog) -> str:
    doc = {
        "ocel:global-log": {"ocel:attribute-names": [], "ocel:object-types": sorted(set(log.universe.objects.values()))},
        "ocel:events": {
            e.id: {
                "ocel:activity": e.activity,
                "ocel:timestamp": e.timestamp,
                "ocel:omap": sorted(e.objects),
                "ocel:vmap": {},
            }
            for e in log.events
        },
        "ocel:objects": {o: {"ocel:type": t, "ocel:ovmap": {}} for o, t in log.universe.objects.items()},
    }
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"


# -- alignment reports -----------------------------------------------------------


def _event_json(e: Event) -> dict:
    return {"id": e.id, "activity": e.activity, "objects": sorted(e.objects), "timestamp": e.timestamp}


def _model_json(r: ModelPart) -> dict:
    return {"index": r.index, "transition": r.transition, "label": r.label, "objects": sorted(r.objects)}


def _step_json(s: Step) -> dict:
    return {"transition": s.transition, "binding": {k: list(v) if isinstance(v, tuple) else v for k, v in s.items}}


COUNT_KINDS = ("sync", "log", "model", "silent", "visible-model")


def alignment_json(g: AlignmentGraph | None) -> dict:
    if g is None:
        return {"moves": [], "edges": [], "counts": {k: 0 for k in COUNT_KINDS}}
    moves = []
    for k, m in enumerate(g.nodes):
        moves.append(
            {
                "index": k,
                "kind": m.kind,
                "cost": m.cost,
                "log": None if m.log is None else _event_json(m.log),
                "model": None if m.model is None else _model_json(m.model),
            }
        )
    return {
        "moves": moves,
        "edges": [list(e) for e in sorted(g.edges)],
        "counts": {k: g.count(k) for k in COUNT_KINDS},
    }


def report_json(report) -> dict:
    """Plain-JSON view of a `TraceReport` (see docs/report-schema.md)."""
    b = report.bounds
    out = {
        "component": list(report.component),
        "events": report.events,
        "objects": report.objects,
        "status": report.status,
        "cost": report.cost if report.cost is not None else None,
        "oracle_cost": report.oracle_cost,
        "n": report.n,
        "universe": list(report.universe),
        "bounds": None
        if b is None
        else {
            "num_events": b.num_events,
            "m": b.m,
            "c": b.c,
            "k": b.k,
            "has_fresh": b.has_fresh,
            "move_bound": b.move_bound,
            "object_occurrence_bound": b.object_occurrence_bound,
            "fresh_objects_per_type": dict(sorted(b.fresh_objects_per_type.items())),
        },
        "run": [_step_json(s) for s in report.run],
        "alignment": alignment_json(report.alignment),
        "wall": report.wall,
        "solver": dict(sorted(report.solver.items())),
        "problems": list(report.problems),
    }
    if out["cost"] is None and report.alignment is not None:
        out["cost"] = sum(m.cost for m in report.alignment.nodes)
    return out


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _value(v):
    return tuple(v) if isinstance(v, list) else v


def read_report(data: Mapping | str):
    """Rebuild a `TraceReport` from `report_json` output."""
    from .conformance import TraceReport

    if isinstance(data, str):
        data = json.loads(data)
    moves = []
    for mv in data["alignment"]["moves"]:
        e = mv["log"]
        r = mv["model"]
        moves.append(
            Move(
                None if e is None else Event(e["id"], e["activity"], frozenset(e["objects"]), e["timestamp"]),
                None if r is None else ModelPart(r["index"], r["transition"], r["label"], frozenset(r["objects"])),
            )
        )
    alignment = None
    if data["status"] not in ("infeasible", "unknown") or moves:
        alignment = AlignmentGraph(tuple(moves), frozenset(tuple(e) for e in data["alignment"]["edges"]))
    b = data["bounds"]
    bounds = None if b is None else BoundsReport(**{**b, "fresh_objects_per_type": dict(b["fresh_objects_per_type"])})
    return TraceReport(
        component=tuple(data["component"]),
        events=data["events"],
        objects=data["objects"],
        status=data["status"],
        cost=data["cost"] if alignment is not None else None,
        run=tuple(Step.of(s["transition"], {k: _value(v) for k, v in s["binding"].items()}) for s in data["run"]),
        alignment=alignment,
        n=data["n"],
        universe=tuple(data["universe"]),
        bounds=bounds,
        oracle_cost=data["oracle_cost"],
        wall=data["wall"],
        solver=dict(data["solver"]),
        problems=list(data["problems"]),
    )


def alignment_table(report) -> str:
    """Human-readable move table with edges, run and cost."""
    lines = [f"trace graph over {{{', '.join(report.component)}}}: {report.events} events, {report.objects} objects"]
    lines.append(f"status: {report.status}, bound n = {report.n}, universe size {len(report.universe)}")
    g = report.alignment
    if g is None:
        lines.append("no alignment")
        return "\n".join(lines) + "\n"
    rows = []
    for k, m in enumerate(g.nodes):
        left = "≫" if m.log is None else f"{m.log.id} {m.log.activity} {{{', '.join(sorted(m.log.objects))}}}"
        right = "≫" if m.model is None else f"{m.model.label} {{{', '.join(sorted(m.model.objects))}}}"
        rows.append((str(k), m.kind, left, right, str(m.cost)))
    head = ("#", "kind", "log", "model", "cost")
    widths = [max(len(r[i]) for r in rows + [head]) for i in range(5)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines.append(fmt.format(*head))
    lines.extend(fmt.format(*r) for r in rows)
    lines.append("edges: " + ", ".join(f"{a}->{b}" for a, b in sorted(g.edges)))
    lines.append("run: " + " ; ".join(repr(s) for s in report.run))
    counts = ", ".join(f"{k} {g.count(k)}" for k in COUNT_KINDS)
    lines.append(f"cost: {report.cost}  ({counts})")
    if report.oracle_cost is not None:
        lines.append(f"oracle cost: {report.oracle_cost}")
    for p in report.problems:
        lines.append(f"PROBLEM: {p}")
    return "\n".join(lines) + "\n"


def write_alignment(report) -> tuple[str, str]:
    """(text table, stable JSON) for one trace report."""
    return alignment_table(report), dumps(report_json(report))
