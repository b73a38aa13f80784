"""Node reconciliation rules and edge replacement."""

import math

import pytest

from sgfuse.alignment import NodeMapping, Thresholds
from sgfuse.geometry import Aabb
from sgfuse.graph import serialize_graph
from sgfuse.update import (
    CONFLICTING_LABEL,
    MATCHING_NODE,
    NEW_NODE,
    classify_node,
    edge_reconcile,
    graph_update,
)

from _helpers import make_graph, make_node

TH = Thresholds()


class TestClassifyNode:
    def test_identical_node_matches(self):
        ref = make_graph([make_node("r0", "chair")])
        q = make_node("q0", "chair")
        d = classify_node(q, ref, TH)
        assert d.kind == MATCHING_NODE
        assert d.reference_id == "r0"
        assert d.centroid_dist == 0.0
        assert d.iou == 1.0

    def test_nearby_same_label_matches(self):
        ref = make_graph([make_node("r0", "chair")])
        q = make_node("q0", "chair", centroid=(0.2, 0.0, 0.0))
        d = classify_node(q, ref, TH)
        assert d.kind == MATCHING_NODE
        assert d.centroid_dist == pytest.approx(0.2)

    def test_conflicting_label_when_gates_pass(self):
        ref = make_graph([make_node("r0", "circular table")])
        q = make_node("q0", "rectangular table", centroid=(0.1, 0.0, 0.0))
        d = classify_node(q, ref, TH)
        assert d.kind == CONFLICTING_LABEL
        assert d.reference_id == "r0"

    def test_far_node_is_new(self):
        # 2.0 m away with theta_dis = 1.5 m: distance gate fails.
        ref = make_graph([make_node("r0", "chair")])
        q = make_node("q0", "chair", centroid=(2.0, 0.0, 0.0))
        d = classify_node(q, ref, TH)
        assert d.kind == NEW_NODE
        assert d.reference_id is None
        assert d.centroid_dist == pytest.approx(2.0)

    def test_low_iou_is_new(self):
        # Close centroids but tiny box against a big one: IoU below 0.4.
        ref = make_graph(
            [make_node("r0", "chair", bbox=Aabb((-1, -1, -1), (1, 1, 1)))]
        )
        q = make_node(
            "q0", "chair", bbox=Aabb((-0.1, -0.1, -0.1), (0.1, 0.1, 0.1))
        )
        d = classify_node(q, ref, TH)
        assert d.kind == NEW_NODE
        assert d.iou < TH.theta_bbox

    def test_empty_reference(self):
        from sgfuse.graph import SceneGraph

        d = classify_node(make_node("q0", "chair"), SceneGraph(), TH)
        assert d.kind == NEW_NODE
        assert math.isinf(d.centroid_dist)

    def test_nearest_candidate_wins(self):
        ref = make_graph(
            [
                make_node("far", "chair", centroid=(1.0, 0.0, 0.0)),
                make_node("near", "chair", centroid=(0.3, 0.0, 0.0)),
            ]
        )
        q = make_node("q0", "chair", centroid=(0.2, 0.0, 0.0))
        d = classify_node(q, ref, TH)
        assert d.reference_id == "near"

    def test_excluded_candidates_skipped(self):
        ref = make_graph([make_node("r0", "chair")])
        q = make_node("q0", "chair")
        d = classify_node(q, ref, TH, exclude=frozenset({"r0"}))
        assert d.kind == NEW_NODE

    def test_distance_gate_boundary_is_exclusive(self):
        ref = make_graph(
            [make_node("r0", "chair", bbox=Aabb((-5, -5, -5), (5, 5, 5)))]
        )
        q = make_node(
            "q0",
            "chair",
            centroid=(1.5, 0.0, 0.0),
            bbox=Aabb((-5, -5, -5), (5, 5, 5)),
        )
        # dist == theta_dis exactly: must not match even with perfect IoU.
        assert classify_node(q, ref, TH).kind == NEW_NODE


class TestGraphUpdate:
    def test_identity_is_fixed_point(self):
        g = make_graph(
            [
                make_node("a", "chair"),
                make_node("b", "table", centroid=(1.0, 0.0, 0.0)),
            ],
            [("a", "near", "b")],
        )
        mapping = NodeMapping(pairs={"a": "a", "b": "b"}, anchor="a")
        out, decisions = graph_update(g, g, mapping, TH)
        assert serialize_graph(out) == serialize_graph(g)
        assert all(d.kind == MATCHING_NODE for d in decisions)

    def test_matching_node_takes_bbox_union_and_new_centroid(self):
        ref = make_graph(
            [make_node("r0", "sofa", bbox=Aabb((0, 0, 0), (1, 1, 1)), centroid=(0.5, 0.5, 0.5))]
        )
        q = make_graph(
            [
                make_node(
                    "q0",
                    "sofa",
                    bbox=Aabb((0.1, 0.1, 0.1), (1.1, 1.1, 1.1)),
                    centroid=(0.6, 0.6, 0.6),
                )
            ]
        )
        out, decisions = graph_update(q, ref, NodeMapping(), TH)
        assert decisions[0].kind == MATCHING_NODE
        merged = out.nodes["r0"]
        assert merged.bbox == Aabb((0, 0, 0), (1.1, 1.1, 1.1))
        assert merged.centroid == (0.6, 0.6, 0.6)

    def test_conflicting_label_replaces_properties(self):
        ref = make_graph([make_node("r0", "circular table")])
        q = make_graph(
            [make_node("q0", "rectangular table", centroid=(0.05, 0.0, 0.0))]
        )
        out, decisions = graph_update(q, ref, NodeMapping(), TH)
        assert decisions[0].kind == CONFLICTING_LABEL
        assert set(out.nodes) == {"r0"}
        assert out.nodes["r0"].label == "rectangular table"
        assert out.nodes["r0"].centroid == (0.05, 0.0, 0.0)

    def test_new_node_inserted_with_edges(self):
        ref = make_graph([make_node("r0", "wall", centroid=(0, 0, 0))])
        q = make_graph(
            [
                make_node("q0", "wall", centroid=(0, 0, 0)),
                make_node("lamp1", "lamp", centroid=(5.0, 0.0, 0.0)),
            ],
            [("lamp1", "attached to", "q0")],
        )
        out, decisions = graph_update(q, ref, NodeMapping(), TH)
        kinds = {d.query_id: d.kind for d in decisions}
        assert kinds == {"q0": MATCHING_NODE, "lamp1": NEW_NODE}
        assert set(out.nodes) == {"r0", "lamp1"}
        assert {e.key for e in out.edges} == {("lamp1", "attached to", "r0")}

    def test_fresh_id_on_collision(self):
        ref = make_graph([make_node("q0", "chair", centroid=(9, 9, 0))])
        q = make_graph([make_node("q0", "lamp", centroid=(0, 0, 0))])
        out, decisions = graph_update(q, ref, NodeMapping(), TH)
        assert decisions[0].kind == NEW_NODE
        assert set(out.nodes) == {"q0", "q0~2"}
        assert out.nodes["q0~2"].label == "lamp"

    def test_one_decision_per_query_node(self):
        ref = make_graph(
            [
                make_node("r0", "chair"),
                make_node("r1", "table", centroid=(1.0, 0.0, 0.0)),
            ]
        )
        q = make_graph(
            [
                make_node("a", "chair"),
                make_node("b", "table", centroid=(1.0, 0.0, 0.0)),
                make_node("c", "plant", centroid=(4.0, 0.0, 0.0)),
            ]
        )
        out, decisions = graph_update(q, ref, NodeMapping(), TH)
        assert len(decisions) == len(q)
        assert sorted(d.query_id for d in decisions) == ["a", "b", "c"]

    def test_stale_mapping_falls_back_to_classification(self):
        # The mapped partner is label-consistent but spatially wrong; a
        # closer same-label node exists and should win via the fallback.
        ref = make_graph(
            [
                make_node("good", "chair", centroid=(0.1, 0.0, 0.0)),
                make_node("bad", "chair", centroid=(8.0, 0.0, 0.0)),
            ]
        )
        q = make_graph([make_node("q0", "chair", centroid=(0.0, 0.0, 0.0))])
        mapping = NodeMapping(pairs={"q0": "bad"}, anchor="q0")
        out, decisions = graph_update(q, ref, mapping, TH)
        assert decisions[0].kind == MATCHING_NODE
        assert decisions[0].reference_id == "good"
        assert out.nodes["bad"].centroid == (8.0, 0.0, 0.0)

    def test_update_is_idempotent(self):
        ref = make_graph(
            [
                make_node("r0", "chair"),
                make_node("r1", "table", centroid=(1.0, 0.0, 0.0)),
            ],
            [("r0", "near", "r1")],
        )
        q = make_graph(
            [
                make_node("a", "chair", centroid=(0.1, 0.0, 0.0)),
                make_node("b", "lamp", centroid=(6.0, 0.0, 0.0)),
            ]
        )
        once, _ = graph_update(q, ref, NodeMapping(), TH)
        twice, _ = graph_update(q, once, NodeMapping(), TH)
        assert serialize_graph(once) == serialize_graph(twice)

    def test_invalid_mapping_rejected(self):
        from sgfuse.alignment import MappingError

        g = make_graph([make_node("a", "chair")])
        r = make_graph([make_node("b", "table")])
        with pytest.raises(MappingError):
            graph_update(g, r, NodeMapping(pairs={"a": "b"}, anchor="a"), TH)


class TestEdgeReconcile:
    def build(self):
        ref = make_graph(
            [
                make_node("r0", "chair"),
                make_node("r1", "table", centroid=(1.0, 0.0, 0.0)),
                make_node("r2", "lamp", centroid=(2.0, 0.0, 0.0)),
            ],
            [("r0", "left of", "r1"), ("r1", "near", "r2")],
        )
        q = make_graph(
            [
                make_node("a", "chair"),
                make_node("b", "table", centroid=(1.0, 0.0, 0.0)),
            ],
            [("a", "right of", "b")],
        )
        return ref, q

    def test_co_observed_pair_replaced(self):
        ref, q = self.build()
        edge_reconcile(q, ref, {"a": "r0", "b": "r1"})
        keys = {e.key for e in ref.edges}
        assert ("a".replace("a", "r0"), "right of", "r1") in keys
        assert ("r0", "left of", "r1") not in keys

    def test_unobserved_pair_retained(self):
        ref, q = self.build()
        edge_reconcile(q, ref, {"a": "r0", "b": "r1"})
        assert ("r1", "near", "r2") in {e.key for e in ref.edges}

    def test_collapsed_pair_skipped(self):
        ref, q = self.build()
        # Both query nodes resolve to r0: no self-loop may be created.
        edge_reconcile(q, ref, {"a": "r0", "b": "r0"})
        assert all(e.subject != e.object for e in ref.edges)

    def test_matches_replay_oracle(self):
        # Expected edge set built independently: reference edges minus every
        # directed pair the query covers, plus the query's edges mapped
        # through the resolution.
        ref, q = self.build()
        resolution = {"a": "r0", "b": "r1"}
        covered = {
            (resolution[e.subject], resolution[e.object]) for e in q.edges
        }
        expected = {
            e.key for e in ref.edges if (e.subject, e.object) not in covered
        } | {
            (resolution[e.subject], e.predicate, resolution[e.object])
            for e in q.edges
        }
        edge_reconcile(q, ref, resolution)
        assert {e.key for e in ref.edges} == expected
