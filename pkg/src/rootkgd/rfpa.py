"""Ripple fault propagation over the knowledge graph.

A hypothesized root is seeded with an initial fault quantity which then
spreads along outgoing triples. Each edge event attenuates the emitted
quantity exponentially in the relation's distance, and a node re-emits the
*average* of what it has received (its accumulated quantity divided by its
receipt count), which keeps cyclic graphs from blowing up. A per-node
initiation cap and a relative minimum-emission threshold stop the ripple.

The whole walk is deterministic: the queue orders items by (priority,
insertion sequence) and edges are iterated in the graph's canonical order.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .kgraph import KnowledgeGraph


class InitMode(str, Enum):
    #: Only the hypothesized root starts with fault quantity.
    SEED_ONLY = "seed_only"
    #: Every entity starts at the seed quantity.
    BASELINE = "baseline"


@dataclass(frozen=True)
class RfpaParams:
    """Propagation hyperparameters.

    sigma_r scales the per-relation attenuation exp(-sigma_r * distance);
    p_max caps how many rounds any single node may initiate; an edge emission
    below delta_s_min_ratio times the seed quantity is skipped, so results
    scale linearly with the seed.
    """

    sigma_r: float = 0.1
    p_max: int = 3
    delta_s_min_ratio: float = 1e-4
    init_mode: InitMode = InitMode.SEED_ONLY

    def __post_init__(self):
        if self.sigma_r <= 0:
            raise ValueError(f"sigma_r must be positive, got {self.sigma_r}")
        if self.p_max < 1:
            raise ValueError(f"p_max must be at least 1, got {self.p_max}")
        if not 0 < self.delta_s_min_ratio < 1:
            raise ValueError(
                f"delta_s_min_ratio must be in (0, 1), got {self.delta_s_min_ratio}"
            )
        object.__setattr__(self, "init_mode", InitMode(self.init_mode))


@dataclass(frozen=True)
class TraceEvent:
    """One log line: a queue pop (relation/tail empty) or an edge emission."""

    seq: int
    priority: int
    head: str
    relation: str | None = None
    tail: str | None = None
    delta: float | None = None
    total: float | None = None


@dataclass(frozen=True)
class PropagationResult:
    """Final fault quantities of one propagation run."""

    quantities: dict[str, float]
    source: str
    s_0: float
    pops: int
    max_priority: int

    def aligned(self, roster: tuple[str, ...]) -> np.ndarray:
        return aligned_sequence(self, roster)


def attenuation(params: RfpaParams, distance: float) -> float:
    """Edge attenuation factor; exactly 1 at distance 0, in (0, 1) otherwise."""
    return math.exp(-params.sigma_r * distance)


def _run(
    graph: KnowledgeGraph,
    params: RfpaParams,
    source: str,
    s_0: float,
    trace_sink: list[TraceEvent] | None,
) -> PropagationResult:
    graph.entity(source)  # raises GraphError for unknown ids
    if not s_0 > 0:
        raise ValueError(f"initial fault quantity must be positive, got {s_0}")

    factor = {r.name: attenuation(params, r.distance) for r in graph.relations}
    threshold = params.delta_s_min_ratio * s_0

    if params.init_mode is InitMode.BASELINE:
        quantity = {e.id: s_0 for e in graph.entities}
        received = {e.id: 1 for e in graph.entities}
    else:
        quantity = {e.id: 0.0 for e in graph.entities}
        received = {e.id: 0 for e in graph.entities}
        quantity[source] = s_0
        received[source] = 1  # the seed assignment counts as one receipt
    initiated = {e.id: 0 for e in graph.entities}
    # A node's pops beyond the (p_max+1)-th are no-ops: the initiation cap is
    # already exceeded, so they emit nothing and change no quantity. Capping
    # queue insertions there leaves results identical and bounds total pops
    # by (p_max + 1) * |entities|.
    pushed = {e.id: 0 for e in graph.entities}
    pushed[source] = 1

    heap: list[tuple[int, int, str]] = [(0, 0, source)]
    seq = 1
    pops = 0
    max_priority = 0
    event = 0

    while heap:
        priority, _, head = heapq.heappop(heap)
        pops += 1
        max_priority = max(max_priority, priority)
        if trace_sink is not None:
            trace_sink.append(TraceEvent(seq=event, priority=priority, head=head))
            event += 1
        initiated[head] += 1
        if initiated[head] > params.p_max:
            continue
        for rel, tail in graph.out_index[head]:
            delta = quantity[head] / received[head] * factor[rel.name]
            if delta < threshold:
                continue
            quantity[tail] += delta
            received[tail] += 1
            if pushed[tail] <= params.p_max:
                pushed[tail] += 1
                heapq.heappush(heap, (priority + rel.priority_offset, seq, tail))
                seq += 1
            if trace_sink is not None:
                trace_sink.append(
                    TraceEvent(
                        seq=event,
                        priority=priority,
                        head=head,
                        relation=rel.name,
                        tail=tail,
                        delta=delta,
                        total=quantity[tail],
                    )
                )
                event += 1

    return PropagationResult(
        quantities=quantity, source=source, s_0=s_0, pops=pops, max_priority=max_priority
    )


def propagate(
    graph: KnowledgeGraph, params: RfpaParams, source: str, s_0: float
) -> PropagationResult:
    """Run one fault propagation from ``source`` seeded with ``s_0``."""
    return _run(graph, params, source, s_0, None)


def trace(
    graph: KnowledgeGraph, params: RfpaParams, source: str, s_0: float
) -> tuple[PropagationResult, tuple[TraceEvent, ...]]:
    """Like propagate, but also returns the full event log."""
    events: list[TraceEvent] = []
    result = _run(graph, params, source, s_0, events)
    return result, tuple(events)


def aligned_sequence(result: PropagationResult, roster: tuple[str, ...]) -> np.ndarray:
    """Quantities projected onto a roster of entity ids, in roster order."""
    missing = [r for r in roster if r not in result.quantities]
    if missing:
        raise ValueError(f"roster ids missing from propagation result: {missing}")
    return np.array([result.quantities[r] for r in roster], dtype=float)


def format_trace_tsv(events: tuple[TraceEvent, ...]) -> str:
    """Render an event log as TSV (header + one line per event)."""
    lines = ["seq\tpriority\thead\trelation\ttail\tdelta_s\ts_tail"]
    for ev in events:
        if ev.relation is None:
            lines.append(f"{ev.seq}\t{ev.priority}\t{ev.head}\t\t\t\t")
        else:
            lines.append(
                f"{ev.seq}\t{ev.priority}\t{ev.head}\t{ev.relation}\t{ev.tail}"
                f"\t{ev.delta!r}\t{ev.total!r}"
            )
    return "\n".join(lines) + "\n"
