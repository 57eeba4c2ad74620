"""Root-cause scoring: align simulated fault profiles with observed contributions.

Every candidate entity is treated as a hypothetical root: a propagation run
is seeded there, its resulting quantities are read off at the measured
variables, and the candidate is scored by cosine similarity between that
profile and the observed contribution-rate vector. Cosine makes the score
independent of the seed magnitude, so physical entities (which have no
contribution of their own) can be seeded with an arbitrary constant.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .features import ContributionVector
from .kgraph import EntityKind, KnowledgeGraph
from .rfpa import RfpaParams, propagate

#: Entity kinds scored by default; substances are excluded unless asked for.
DEFAULT_CANDIDATE_KINDS = (EntityKind.VARIABLE, EntityKind.STREAM, EntityKind.DEVICE)


@dataclass(frozen=True)
class RankEntry:
    id: str
    kind: str
    score: float


@dataclass(frozen=True)
class RootCauseRanking:
    """Scored candidates, sorted by descending score (ties: ascending id)."""

    entries: tuple[RankEntry, ...]
    metadata: dict[str, Any]

    def top(self, n: int) -> tuple[RankEntry, ...]:
        return self.entries[:n]

    def variables(self) -> tuple[RankEntry, ...]:
        return tuple(e for e in self.entries if e.kind == EntityKind.VARIABLE.value)

    def physical(self) -> tuple[RankEntry, ...]:
        return tuple(e for e in self.entries if e.kind != EntityKind.VARIABLE.value)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    norm_a = math.sqrt(float(a @ a))
    norm_b = math.sqrt(float(b @ b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(a @ b) / (norm_a * norm_b)


def root_score(
    graph: KnowledgeGraph,
    params: RfpaParams,
    contributions: ContributionVector,
    candidate: str,
    constant_s0: float = 1.0,
    exclude_self: bool = False,
) -> float:
    """Score one candidate as the root of the observed fault pattern.

    The seed is the candidate's own contribution when it is a measured
    variable with positive contribution; otherwise the constant fallback
    (the score is invariant to that constant). ``exclude_self`` drops the
    candidate's own roster entry from the comparison, for study only.
    """
    if not contributions.roster:
        raise ValueError("contribution roster is empty")
    if constant_s0 <= 0:
        raise ValueError(f"constant_s0 must be positive, got {constant_s0}")

    try:
        own = contributions.get(candidate)
    except KeyError:
        own = 0.0
    s_0 = own if own > 0 else constant_s0

    result = propagate(graph, params, candidate, s_0)
    profile = result.aligned(contributions.roster)
    observed = contributions.scores
    if exclude_self and candidate in contributions.roster:
        keep = np.array([r != candidate for r in contributions.roster])
        profile = profile[keep]
        observed = observed[keep]
    return cosine(profile, observed)


def _score_task(
    args: tuple[KnowledgeGraph, RfpaParams, ContributionVector, str, float, bool],
) -> float:
    return root_score(*args)


def rank_all(
    graph: KnowledgeGraph,
    params: RfpaParams,
    contributions: ContributionVector,
    candidates: Iterable[str] | None = None,
    kinds: Sequence[EntityKind] = DEFAULT_CANDIDATE_KINDS,
    constant_s0: float = 1.0,
    exclude_self: bool = False,
    jobs: int = 1,
    metadata: dict[str, Any] | None = None,
) -> RootCauseRanking:
    """Score every candidate entity and rank them.

    Candidates default to all entities of the requested kinds (variables,
    streams, and devices unless overridden). Scoring runs are independent, so
    ``jobs`` > 1 evaluates them in a process pool; the final deterministic
    sort makes the output identical either way.
    """
    if candidates is None:
        ids = [e.id for e in graph.entities_of_kind(*kinds)]
    else:
        ids = list(candidates)
        for eid in ids:
            graph.entity(eid)
    if not ids:
        raise ValueError("no candidate entities to score")

    tasks = [(graph, params, contributions, eid, constant_s0, exclude_self) for eid in ids]
    if jobs > 1 and len(ids) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(_score_task, tasks, chunksize=max(1, len(ids) // jobs)))
    else:
        scores = [_score_task(t) for t in tasks]

    entries = [
        RankEntry(id=eid, kind=graph.entity(eid).kind.value, score=score)
        for eid, score in zip(ids, scores)
    ]
    entries.sort(key=lambda e: (-e.score, e.id))
    return RootCauseRanking(entries=tuple(entries), metadata=dict(metadata or {}))


def report_dict(ranking: RootCauseRanking) -> dict[str, Any]:
    """Full ranking in the JSON report schema."""
    meta = ranking.metadata
    return {
        "graph": meta.get("graph", ""),
        "params": meta.get("params", {}),
        "window": meta.get("window", {}),
        "ranking": [{"id": e.id, "kind": e.kind, "score": e.score} for e in ranking.entries],
    }


def format_report(ranking: RootCauseRanking, top_k: int = 10, mode: str = "text") -> str:
    """Render a ranking: two side-by-side top-k columns (text) or JSON."""
    if top_k < 1:
        raise ValueError(f"top_k must be at least 1, got {top_k}")
    if mode == "json":
        return json.dumps(report_dict(ranking), indent=2) + "\n"
    if mode != "text":
        raise ValueError(f"mode must be 'text' or 'json', got {mode!r}")

    left = ranking.variables()[:top_k]
    right = ranking.physical()[:top_k]
    width = max([12] + [len(e.id) for e in left + right])
    lines = [
        f"{'rank':>4}  {'variable':<{width}}  {'score':>8}  "
        f"{'stream/device':<{width}}  {'score':>8}"
    ]
    for i in range(max(len(left), len(right))):
        lcell = f"{left[i].id:<{width}}  {left[i].score:>8.5f}" if i < len(left) else (
            f"{'':<{width}}  {'':>8}"
        )
        rcell = f"{right[i].id:<{width}}  {right[i].score:>8.5f}" if i < len(right) else (
            f"{'':<{width}}  {'':>8}"
        )
        lines.append(f"{i + 1:>4}  {lcell}  {rcell}")
    return "\n".join(lines) + "\n"
