from __future__ import annotations

import json

import numpy as np
import pytest

from oracles import cosine_ref
from rootkgd.features import ContributionVector
from rootkgd.kgraph import EntityKind, GraphError, graph_from_dict
from rootkgd.rfpa import RfpaParams, propagate
from rootkgd.scoring import cosine, format_report, rank_all, report_dict, root_score

PARAMS = RfpaParams(sigma_r=0.1, p_max=3, delta_s_min_ratio=1e-6)


def two_island_graph():
    """Two disconnected device+variable islands."""
    return graph_from_dict(
        {
            "entities": [
                {"id": "dev1", "kind": "device", "label": "Device 1"},
                {"id": "a", "kind": "variable", "label": "a", "column": "a"},
                {"id": "dev2", "kind": "device", "label": "Device 2"},
                {"id": "b", "kind": "variable", "label": "b", "column": "b"},
            ],
            "relations": [{"name": "State", "d": 1, "o": 1}],
            "triples": [["dev1", "State", "a"], ["dev2", "State", "b"]],
        }
    )


@pytest.fixture(scope="module")
def tep_contributions(tep_graph):
    """A deterministic synthetic contribution-rate vector over the TEP roster."""
    roster = tuple(e.id for e in tep_graph.variable_roster())
    rng = np.random.default_rng(123)
    scores = rng.exponential(scale=1.0, size=len(roster))
    scores[roster.index("x4")] = 25.0
    return ContributionVector(scores / scores.sum(), roster)


class TestCosine:
    def test_matches_reference(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = rng.uniform(0, 5, size=8)
            b = rng.uniform(0, 5, size=8)
            assert abs(cosine(a, b) - cosine_ref(a, b)) <= 1e-14

    def test_zero_norm_guard(self):
        assert cosine(np.zeros(3), np.ones(3)) == 0.0
        assert cosine(np.ones(3), np.zeros(3)) == 0.0


class TestRootScore:
    def test_parallel_profile_scores_one(self, tep_graph):
        roster = tuple(e.id for e in tep_graph.variable_roster())
        result = propagate(tep_graph, PARAMS, "s4", 1.0)
        profile = result.aligned(roster)
        contributions = ContributionVector(profile / profile.sum(), roster)
        score = root_score(tep_graph, PARAMS, contributions, "s4")
        assert abs(score - 1.0) <= 1e-12

    def test_disjoint_supports_score_zero(self):
        graph = two_island_graph()
        contributions = ContributionVector(np.array([0.0, 1.0]), ("a", "b"))
        assert root_score(graph, PARAMS, contributions, "dev1") == 0.0

    def test_unreachable_roster_scores_zero(self):
        graph = two_island_graph()
        contributions = ContributionVector(np.array([1.0]), ("b",))
        assert root_score(graph, PARAMS, contributions, "dev1") == 0.0

    def test_self_affinity_of_leaf_variable(self):
        graph = graph_from_dict(
            {
                "entities": [
                    {"id": "dev1", "kind": "device", "label": "Device 1"},
                    {"id": "v", "kind": "variable", "label": "v", "column": "v"},
                ],
                "relations": [{"name": "State", "d": 1, "o": 1}],
                "triples": [["dev1", "State", "v"]],
            }
        )
        contributions = ContributionVector(np.array([1.0]), ("v",))
        assert root_score(graph, PARAMS, contributions, "v") == 1.0

    def test_zero_contribution_variable_uses_constant_seed(self, tep_graph):
        roster = tuple(e.id for e in tep_graph.variable_roster())
        scores = np.zeros(len(roster))
        scores[roster.index("x4")] = 1.0
        contributions = ContributionVector(scores, roster)
        # x45 has zero contribution; with a zero seed it could never score.
        assert root_score(tep_graph, PARAMS, contributions, "x45") > 0.0

    def test_empty_roster_rejected(self, tep_graph):
        with pytest.raises(ValueError, match="empty"):
            root_score(tep_graph, PARAMS, ContributionVector(np.zeros(0), ()), "x4")

    def test_unknown_candidate(self, tep_graph, tep_contributions):
        with pytest.raises(GraphError, match="unknown entity"):
            root_score(tep_graph, PARAMS, tep_contributions, "bogus")

    def test_exclude_self_variant(self, tep_graph, tep_contributions):
        full = root_score(tep_graph, PARAMS, tep_contributions, "x4")
        excluded = root_score(tep_graph, PARAMS, tep_contributions, "x4", exclude_self=True)
        assert 0.0 <= excluded <= 1.0
        assert excluded != full


class TestRankAll:
    def test_substances_excluded_by_default(self, tep_graph, tep_contributions):
        ranking = rank_all(tep_graph, PARAMS, tep_contributions)
        kinds = {e.kind for e in ranking.entries}
        assert kinds == {"variable", "stream", "device"}
        assert len(ranking.entries) == 5 + 14 + 51

    def test_substances_includable(self, tep_graph, tep_contributions):
        ranking = rank_all(
            tep_graph,
            PARAMS,
            tep_contributions,
            kinds=(EntityKind.SUBSTANCE,),
        )
        assert {e.kind for e in ranking.entries} == {"substance"}
        assert len(ranking.entries) == 7

    def test_sorted_descending_with_id_tie_break(self, diamond_graph):
        # B and C are mirror images, so their scores are bit-identical.
        payload = {
            "entities": [
                {"id": "A", "kind": "device", "label": "A"},
                {"id": "B", "kind": "device", "label": "B"},
                {"id": "C", "kind": "device", "label": "C"},
                {"id": "vb", "kind": "variable", "label": "vb", "column": "vb"},
                {"id": "vc", "kind": "variable", "label": "vc", "column": "vc"},
            ],
            "relations": [{"name": "State", "d": 1, "o": 1}],
            "triples": [
                ["A", "State", "vb"],
                ["A", "State", "vc"],
                ["B", "State", "vb"],
                ["C", "State", "vc"],
            ],
        }
        graph = graph_from_dict(payload)
        contributions = ContributionVector(np.array([0.5, 0.5]), ("vb", "vc"))
        ranking = rank_all(graph, PARAMS, contributions)
        scores = {e.id: e.score for e in ranking.entries}
        assert scores["B"] == scores["C"]
        order = [e.id for e in ranking.entries]
        assert order.index("B") + 1 == order.index("C")
        assert all(
            ranking.entries[i].score >= ranking.entries[i + 1].score
            for i in range(len(ranking.entries) - 1)
        )

    def test_scale_invariance_of_contributions(self, tep_graph, tep_contributions):
        base = rank_all(tep_graph, PARAMS, tep_contributions)
        scaled_cv = ContributionVector(
            7.3 * tep_contributions.scores, tep_contributions.roster
        )
        scaled = rank_all(tep_graph, PARAMS, scaled_cv)
        assert [e.id for e in scaled.entries] == [e.id for e in base.entries]
        for a, b in zip(base.entries, scaled.entries):
            assert abs(a.score - b.score) <= 1e-12

    def test_constant_seed_invariance_for_physical(self, tep_graph, tep_contributions):
        rankings = [
            rank_all(
                tep_graph,
                PARAMS,
                tep_contributions,
                kinds=(EntityKind.STREAM, EntityKind.DEVICE),
                constant_s0=c,
            )
            for c in (0.1, 1.0, 42.0)
        ]
        for other in rankings[1:]:
            assert [e.id for e in other.entries] == [e.id for e in rankings[0].entries]
            for a, b in zip(rankings[0].entries, other.entries):
                assert abs(a.score - b.score) <= 1e-12

    def test_scores_in_unit_interval(self, tep_graph, tep_contributions):
        ranking = rank_all(tep_graph, PARAMS, tep_contributions)
        for entry in ranking.entries:
            assert -1e-12 <= entry.score <= 1.0 + 1e-12

    def test_parallel_jobs_identical(self, tep_graph, tep_contributions):
        sequential = rank_all(tep_graph, PARAMS, tep_contributions, jobs=1)
        parallel = rank_all(tep_graph, PARAMS, tep_contributions, jobs=2)
        assert sequential.entries == parallel.entries

    def test_explicit_candidates(self, tep_graph, tep_contributions):
        ranking = rank_all(
            tep_graph, PARAMS, tep_contributions, candidates=["x4", "s4", "reactor"]
        )
        assert {e.id for e in ranking.entries} == {"x4", "s4", "reactor"}

    def test_deterministic_repeat(self, tep_graph, tep_contributions):
        first = rank_all(tep_graph, PARAMS, tep_contributions)
        second = rank_all(tep_graph, PARAMS, tep_contributions)
        assert first.entries == second.entries


@pytest.fixture(scope="module")
def ranking(tep_graph, tep_contributions):
    return rank_all(
        tep_graph,
        PARAMS,
        tep_contributions,
        metadata={
            "graph": "tep.kg.json",
            "params": {"sigma_r": 0.1},
            "window": {"fault_start": 160, "length": 100},
        },
    )


class TestFormatReport:
    def test_text_layout(self, ranking):
        text = format_report(ranking, top_k=10, mode="text")
        lines = text.splitlines()
        assert "variable" in lines[0] and "stream/device" in lines[0]
        assert len(lines) == 11
        first = lines[1].split()
        assert first[0] == "1"
        # scores rendered to 5 decimals
        assert all(len(tok.split(".")[1]) == 5 for tok in first if "." in tok)

    def test_top_k_truncation(self, ranking):
        text = format_report(ranking, top_k=1000, mode="text")
        assert len(text.splitlines()) == 1 + 51  # all variables, no padding rows

    def test_json_round_trip(self, ranking):
        payload = json.loads(format_report(ranking, top_k=5, mode="json"))
        assert set(payload) == {"graph", "params", "window", "ranking"}
        assert payload["graph"] == "tep.kg.json"
        by_id = {e["id"]: e["score"] for e in payload["ranking"]}
        for entry in ranking.entries:
            assert by_id[entry.id] == entry.score  # exact float round trip

    def test_report_dict_schema(self, ranking):
        payload = report_dict(ranking)
        assert isinstance(payload["ranking"], list)
        assert payload["ranking"][0].keys() == {"id", "kind", "score"}

    def test_bad_args(self, ranking):
        with pytest.raises(ValueError, match="top_k"):
            format_report(ranking, top_k=0)
        with pytest.raises(ValueError, match="mode"):
            format_report(ranking, mode="xml")
