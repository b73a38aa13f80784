"""Label-seeded recursive subgraph alignment and the threshold-gated merge.

The search expands depth-first from an anchor node of the query graph: for
each unvisited query neighbor it takes the first same-label, still-unused
reference neighbor of the current image and recurses.  The result is an
injective, label-consistent, tree-connected partial mapping; maximality is
not guaranteed.  The top-level merge tries several anchors and merges on the
first mapping strictly larger than the size threshold, otherwise the whole
query graph is appended as new nodes and edges.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from random import Random
from typing import Dict, List, Optional, Set, Tuple

from .graph import SceneGraph, RelationEdge

SMALL_GRAPH_ANCHOR_LIMIT = 6
DEFAULT_MAX_ANCHORS = 5


class MappingError(ValueError):
    """Raised when a mapping violates its contract (e.g. unseeded anchor)."""


@dataclass(frozen=True)
class Thresholds:
    """Merge gates: minimum mapping size, centroid distance, and bbox IoU."""

    theta_len: int = 3
    theta_dis: float = 1.5
    theta_bbox: float = 0.4

    def __post_init__(self) -> None:
        if self.theta_len < 1:
            raise ValueError("theta_len must be >= 1")
        if self.theta_dis <= 0:
            raise ValueError("theta_dis must be positive")
        if not 0.0 < self.theta_bbox < 1.0:
            raise ValueError("theta_bbox must lie in (0, 1)")


@dataclass
class NodeMapping:
    """Partial injective map from query node ids to reference node ids."""

    pairs: Dict[str, str] = field(default_factory=dict)
    visit: Set[str] = field(default_factory=set)
    anchor: str = ""

    def __len__(self) -> int:
        return len(self.pairs)

    def images(self) -> Set[str]:
        return set(self.pairs.values())


@dataclass
class AlignmentReport:
    """Outcome of one merge attempt."""

    anchors_tried: int
    map_size: int
    branch: str  # "merged" | "appended"
    align_seconds: float
    id_remaps: Dict[str, str] = field(default_factory=dict)
    decisions: list = field(default_factory=list)

    def to_payload(self, include_timing: bool = True) -> dict:
        payload = {
            "anchors_tried": self.anchors_tried,
            "map_size": self.map_size,
            "branch": self.branch,
        }
        if self.id_remaps:
            payload["id_remaps"] = dict(sorted(self.id_remaps.items()))
        if include_timing:
            payload["align_seconds"] = self.align_seconds
        return payload


def select_anchors(
    g_q: SceneGraph, max_anchors: int = DEFAULT_MAX_ANCHORS, rng: Optional[Random] = None
) -> List[str]:
    """Anchor candidates for the search, deterministic for a fixed seed.

    Graphs with more than six nodes get a uniform sample without replacement;
    smaller graphs use every node, in a shuffled order.
    """
    if len(g_q) == 0:
        raise ValueError("cannot select anchors from an empty graph")
    rng = rng or Random(0)
    ids = g_q.sorted_ids()
    if len(ids) > SMALL_GRAPH_ANCHOR_LIMIT:
        return rng.sample(ids, min(max_anchors, len(ids)))
    rng.shuffle(ids)
    return ids


def graph_search(
    q: str, g_q: SceneGraph, g_r: SceneGraph, mapping: NodeMapping
) -> NodeMapping:
    """Depth-first expansion of ``mapping`` from the mapped query node ``q``.

    Each unvisited query neighbor of ``q`` is paired with the first (ascending
    id) same-label reference neighbor of ``mapping.pairs[q]`` that is not
    already an image, then the search recurses from it.  Never unmaps a node.
    """
    if q not in mapping.pairs:
        raise MappingError(f"query node {q!r} is not mapped")
    mapping.visit.add(q)
    ref_neighbors = sorted(g_r.neighbors(mapping.pairs[q]))
    for u in sorted(g_q.neighbors(q)):
        if u in mapping.visit or u in mapping.pairs:
            continue
        u_label = g_q.nodes[u].label
        used = mapping.images()
        for v in ref_neighbors:
            if v in used:
                continue
            if g_r.nodes[v].label == u_label:
                mapping.pairs[u] = v
                graph_search(u, g_q, g_r, mapping)
                break
    return mapping


def validate_mapping(mapping: NodeMapping, g_q: SceneGraph, g_r: SceneGraph) -> bool:
    """True iff the mapping is injective, label-consistent, and tree-connected."""
    pairs = mapping.pairs
    if len(set(pairs.values())) != len(pairs):
        return False
    for q_id, r_id in pairs.items():
        if q_id not in g_q.nodes or r_id not in g_r.nodes:
            return False
        if g_q.nodes[q_id].label != g_r.nodes[r_id].label:
            return False
    if not pairs:
        return True
    if mapping.anchor and mapping.anchor not in pairs:
        return False
    # Every mapped non-anchor node must be reachable from the anchor through
    # mapped neighbors whose images are also neighbors in the reference graph.
    roots = [mapping.anchor] if mapping.anchor in pairs else [sorted(pairs)[0]]
    seen = set(roots)
    frontier = list(roots)
    while frontier:
        cur = frontier.pop()
        for u in g_q.neighbors(cur):
            if u in pairs and u not in seen:
                if pairs[u] in g_r.neighbors(pairs[cur]):
                    seen.add(u)
                    frontier.append(u)
    return seen == set(pairs)


def _fresh_id(base: str, taken: Set[str]) -> str:
    candidate = base
    n = 1
    while candidate in taken:
        n += 1
        candidate = f"{base}~{n}"
    return candidate


def _append_graph(
    g_q: SceneGraph, g_r: SceneGraph
) -> Tuple[SceneGraph, Dict[str, str]]:
    """Insert all of g_q into a copy of g_r, remapping colliding ids."""
    out = g_r.copy()
    remap: Dict[str, str] = {}
    taken = set(out.nodes)
    for q_id in g_q.sorted_ids():
        new_id = _fresh_id(q_id, taken)
        taken.add(new_id)
        if new_id != q_id:
            remap[q_id] = new_id
        node = g_q.nodes[q_id]
        if new_id != q_id:
            node = replace(node, instance_id=new_id)
        out.add_node(node)
    for e in g_q.edges:
        out.add_edge(
            RelationEdge(
                subject=remap.get(e.subject, e.subject),
                predicate=e.predicate,
                object=remap.get(e.object, e.object),
                predicate_ranking=e.predicate_ranking,
            )
        )
    return out, remap


def scene_graph_update(
    g_q: SceneGraph,
    g_r: SceneGraph,
    th: Thresholds,
    max_anchors: int = DEFAULT_MAX_ANCHORS,
    rng: Optional[Random] = None,
) -> Tuple[SceneGraph, AlignmentReport]:
    """Merge a query graph into the reference graph, or append it verbatim.

    Anchors are tried in ``select_anchors`` order; for each anchor every
    same-label reference node is tried as its image and the largest resulting
    mapping kept.  The first anchor whose best mapping size strictly exceeds
    ``theta_len`` triggers the reconciliation path (see :mod:`sgfuse.update`).
    """
    from .update import graph_update

    if len(g_q) == 0:
        raise ValueError("query graph must be non-empty")
    start = time.perf_counter()
    anchors = select_anchors(g_q, max_anchors, rng)
    best_overall = 0
    tried = 0
    for anchor in anchors:
        tried += 1
        label = g_q.nodes[anchor].label
        best: Optional[NodeMapping] = None
        for ref_id in g_r.ids_with_label(label):
            m = NodeMapping(pairs={anchor: ref_id}, visit=set(), anchor=anchor)
            graph_search(anchor, g_q, g_r, m)
            if best is None or len(m) > len(best):
                best = m
        if best is not None:
            best_overall = max(best_overall, len(best))
        if best is not None and len(best) > th.theta_len:
            merged, decisions = graph_update(g_q, g_r, best, th)
            return merged, AlignmentReport(
                anchors_tried=tried,
                map_size=len(best),
                branch="merged",
                align_seconds=time.perf_counter() - start,
                decisions=decisions,
            )
    appended, remap = _append_graph(g_q, g_r)
    return appended, AlignmentReport(
        anchors_tried=tried,
        map_size=best_overall,
        branch="appended",
        align_seconds=time.perf_counter() - start,
        id_remaps=remap,
    )
