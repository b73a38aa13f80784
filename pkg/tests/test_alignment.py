"""Anchor selection, recursive search, mapping validity, and the merge gate."""

from collections import Counter
from random import Random

import pytest

from sgfuse.alignment import (
    MappingError,
    NodeMapping,
    Thresholds,
    graph_search,
    scene_graph_update,
    select_anchors,
    validate_mapping,
)
from sgfuse.graph import serialize_graph

from _helpers import (
    make_graph,
    make_node,
    max_common_connected_mapping_size,
    random_labeled_graph,
)


def chain(prefix, labels, spacing=1.0):
    nodes = [
        make_node(f"{prefix}{i}", lbl, centroid=(i * spacing, 0.0, 0.0))
        for i, lbl in enumerate(labels)
    ]
    edges = [
        (f"{prefix}{i}", "near", f"{prefix}{i+1}") for i in range(len(labels) - 1)
    ]
    return make_graph(nodes, edges)


class TestThresholds:
    def test_defaults_match_benchmark_settings(self):
        th = Thresholds()
        assert (th.theta_len, th.theta_dis, th.theta_bbox) == (3, 1.5, 0.4)

    @pytest.mark.parametrize(
        "kwargs", [dict(theta_len=0), dict(theta_dis=0.0), dict(theta_bbox=1.0)]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            Thresholds(**kwargs)


class TestSelectAnchors:
    def test_small_graph_returns_all(self):
        g = chain("q", ["a", "b", "c"])
        assert sorted(select_anchors(g, 5, Random(0))) == ["q0", "q1", "q2"]

    def test_deterministic_for_fixed_seed(self):
        rng = Random(1)
        g = random_labeled_graph(rng, max_nodes=20)
        while len(g) <= 6:
            g = random_labeled_graph(rng, max_nodes=20)
        first = select_anchors(g, 5, Random(99))
        second = select_anchors(g, 5, Random(99))
        assert first == second
        assert len(first) == min(5, len(g))

    def test_empty_graph_errors(self):
        from sgfuse.graph import SceneGraph

        with pytest.raises(ValueError):
            select_anchors(SceneGraph(), 5, Random(0))

    def test_sampling_is_uniform(self):
        # Chi-square over 10,000 single-anchor draws from a 20-node graph;
        # 19 dof, 1% critical value ~36.2.
        nodes = [make_node(f"n{i:02d}", "x", centroid=(i, 0, 0)) for i in range(20)]
        g = make_graph(nodes)
        counts = Counter()
        trials = 10_000
        rng = Random(123)
        for _ in range(trials):
            counts[select_anchors(g, 1, rng)[0]] += 1
        expected = trials / 20
        chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
        assert len(counts) == 20
        assert chi2 < 36.2


class TestGraphSearch:
    def test_anchor_must_be_mapped(self):
        g = chain("q", ["a"])
        with pytest.raises(MappingError):
            graph_search("q0", g, g, NodeMapping())

    def test_no_neighbors_leaves_map_unchanged(self):
        g_q = make_graph([make_node("q0", "a")])
        g_r = make_graph([make_node("r0", "a")])
        m = NodeMapping(pairs={"q0": "r0"}, anchor="q0")
        out = graph_search("q0", g_q, g_r, m)
        assert out.pairs == {"q0": "r0"}

    def test_isomorphic_chain_fully_mapped(self):
        g_q = chain("q", ["x", "y", "z"])
        g_r = chain("r", ["x", "y", "z"])
        m = NodeMapping(pairs={"q0": "r0"}, anchor="q0")
        graph_search("q0", g_q, g_r, m)
        assert m.pairs == {"q0": "r0", "q1": "r1", "q2": "r2"}
        assert validate_mapping(m, g_q, g_r)

    def test_never_unmaps_and_superset(self):
        rng = Random(17)
        for _ in range(100):
            g_q = random_labeled_graph(rng)
            g_r = random_labeled_graph(rng, prefix="r")
            anchor = rng.choice(g_q.sorted_ids())
            refs = g_r.ids_with_label(g_q.nodes[anchor].label)
            if not refs:
                continue
            m = NodeMapping(pairs={anchor: refs[0]}, anchor=anchor)
            before = dict(m.pairs)
            graph_search(anchor, g_q, g_r, m)
            assert all(m.pairs[k] == v for k, v in before.items())

    def test_valid_and_bounded_by_bruteforce(self):
        rng = Random(4)
        for _ in range(300):
            g_q = random_labeled_graph(rng)
            g_r = random_labeled_graph(rng, prefix="r")
            anchor = rng.choice(g_q.sorted_ids())
            refs = g_r.ids_with_label(g_q.nodes[anchor].label)
            if not refs:
                continue
            m = NodeMapping(pairs={anchor: rng.choice(refs)}, anchor=anchor)
            graph_search(anchor, g_q, g_r, m)
            assert validate_mapping(m, g_q, g_r)
            assert len(m) <= max_common_connected_mapping_size(g_q, g_r)


class TestValidateMapping:
    def test_empty_map_is_valid(self):
        g = chain("q", ["a"])
        assert validate_mapping(NodeMapping(), g, g)

    def test_duplicate_image_rejected(self):
        g_q = chain("q", ["a", "a"])
        g_r = chain("r", ["a", "a"])
        m = NodeMapping(pairs={"q0": "r0", "q1": "r0"}, anchor="q0")
        assert not validate_mapping(m, g_q, g_r)

    def test_label_mismatch_rejected(self):
        g_q = chain("q", ["a"])
        g_r = chain("r", ["b"])
        m = NodeMapping(pairs={"q0": "r0"}, anchor="q0")
        assert not validate_mapping(m, g_q, g_r)

    def test_disconnected_mapping_rejected(self):
        g_q = chain("q", ["a", "b", "a"])
        g_r = make_graph(
            [
                make_node("r0", "a"),
                make_node("r2", "a", centroid=(9, 0, 0)),
            ]
        )
        m = NodeMapping(pairs={"q0": "r0", "q2": "r2"}, anchor="q0")
        assert not validate_mapping(m, g_q, g_r)


class TestSceneGraphUpdate:
    def test_empty_reference_appends(self):
        from sgfuse.graph import SceneGraph

        g_q = chain("q", ["a", "b"])
        merged, report = scene_graph_update(
            g_q, SceneGraph(), Thresholds(), rng=Random(0)
        )
        assert report.branch == "appended"
        assert set(merged.nodes) == {"q0", "q1"}
        assert len(merged.edges) == 1

    def test_self_merge_is_idempotent(self):
        labels = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]
        g = chain("n", labels, spacing=0.8)
        merged, report = scene_graph_update(g, g.copy(), Thresholds(), rng=Random(0))
        assert report.branch == "merged"
        assert len(merged) == len(g)
        assert len(merged.edges) == len(g.edges)

    def test_small_shared_subgraph_appends(self):
        # Exactly 2 shared labeled-and-connected nodes <= theta_len=3.
        g_q = chain("q", ["a", "b", "x", "y"])
        g_r = chain("r", ["a", "b", "u", "v"])
        assert max_common_connected_mapping_size(g_q, g_r) == 2
        merged, report = scene_graph_update(g_q, g_r, Thresholds(), rng=Random(0))
        assert report.branch == "appended"
        assert len(merged) == 8

    def test_threshold_is_strict(self):
        # Common chain of exactly theta_len nodes: appended; one more: merged.
        g_r = chain("r", ["a", "b", "c", "d", "e"])
        exact = chain("q", ["a", "b", "c"])
        assert max_common_connected_mapping_size(exact, g_r) == 3
        merged, report = scene_graph_update(exact, g_r, Thresholds(), rng=Random(0))
        assert report.branch == "appended"

        above = chain("q", ["a", "b", "c", "d"])
        assert max_common_connected_mapping_size(above, g_r) == 4
        merged, report = scene_graph_update(above, g_r, Thresholds(), rng=Random(0))
        assert report.branch == "merged"
        assert report.map_size == 4

    def test_appended_branch_remaps_colliding_ids(self):
        g_r = chain("q", ["a", "b"])  # same ids as the query on purpose
        g_q = chain("q", ["u", "v"])
        merged, report = scene_graph_update(g_q, g_r, Thresholds(), rng=Random(0))
        assert report.branch == "appended"
        assert len(merged) == 4
        assert report.id_remaps == {"q0": "q0~2", "q1": "q1~2"}

    def test_deterministic_for_fixed_seed(self):
        rng_world = Random(6)
        g_q = random_labeled_graph(rng_world, max_nodes=12)
        g_r = random_labeled_graph(rng_world, max_nodes=12, prefix="r")
        a, ra = scene_graph_update(g_q, g_r, Thresholds(), rng=Random(5))
        b, rb = scene_graph_update(g_q, g_r, Thresholds(), rng=Random(5))
        assert serialize_graph(a) == serialize_graph(b)
        assert ra.to_payload(include_timing=False) == rb.to_payload(include_timing=False)

    def test_monotone_node_counts(self):
        rng = Random(21)
        for _ in range(50):
            g_q = random_labeled_graph(rng)
            g_r = random_labeled_graph(rng, prefix="r")
            merged, report = scene_graph_update(g_q, g_r, Thresholds(), rng=Random(0))
            if report.branch == "appended":
                assert len(merged) == len(g_r) + len(g_q)
            else:
                assert len(g_r) <= len(merged) <= len(g_r) + len(g_q)
