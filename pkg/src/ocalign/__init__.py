"""Optimal alignments between object-centric event logs and Petri nets with identifiers."""

from .alignments import AlignmentGraph, Move, alignment_cost, compute_bounds, is_valid_alignment
from .log_model import Event, EventLog, TraceGraph, linearize, trace_graphs
from .opid import AcceptingOPID, Marking, OPID, PlaceSpec, Step, execute_run

__all__ = [
    "AcceptingOPID",
    "AlignmentGraph",
    "Event",
    "EventLog",
    "Marking",
    "Move",
    "OPID",
    "PlaceSpec",
    "Step",
    "TraceGraph",
    "alignment_cost",
    "compute_bounds",
    "execute_run",
    "is_valid_alignment",
    "linearize",
    "trace_graphs",
]
