"""Reconciliation of an aligned query graph into the reference graph.

Every query node yields exactly one decision:

* Matching Node  -- a same-label reference node within the distance gate and
  above the IoU gate keeps its id; its bbox becomes the union of both boxes,
  its centroid follows the latest observation, and co-observed edges are
  replaced by the query's.
* Conflicting Label -- gates pass but labels differ; the reference node's
  label and spatial properties are overwritten by the query node's.
* New Node -- no reference candidate passes both gates; the node is inserted
  with a fresh id and its query edges are added.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from .alignment import MappingError, NodeMapping, Thresholds, validate_mapping
from .geometry import aabb_iou, bbox_union, clamp_point, euclidean
from .graph import EntityNode, RelationEdge, SceneGraph, centroid_distance

MATCHING_NODE = "MatchingNode"
CONFLICTING_LABEL = "ConflictingLabel"
NEW_NODE = "NewNode"


@dataclass(frozen=True)
class MatchDecision:
    kind: str
    query_id: str
    reference_id: Optional[str]
    centroid_dist: float
    iou: float

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "query_id": self.query_id,
            "reference_id": self.reference_id,
            "dist": None if math.isinf(self.centroid_dist) else round(self.centroid_dist, 6),
            "iou": round(self.iou, 6),
        }


def classify_node(
    o: EntityNode,
    g_r: SceneGraph,
    th: Thresholds,
    exclude: FrozenSet[str] = frozenset(),
) -> MatchDecision:
    """Pick the reconciliation rule for one observed node.

    Candidates are scanned by ascending centroid distance (ties by ascending
    id); the first one inside the distance gate and above the IoU gate decides
    between MatchingNode and ConflictingLabel.  If none passes both gates the
    node is novel.
    """
    candidates = sorted(
        (euclidean(o.centroid, n.centroid), n.instance_id)
        for n in g_r.nodes.values()
        if n.instance_id not in exclude
    )
    nearest: Optional[Tuple[float, str]] = candidates[0] if candidates else None
    for dist, ref_id in candidates:
        if dist >= th.theta_dis:
            break  # sorted ascending: nothing further can pass the gate
        iou = aabb_iou(o.bbox, g_r.nodes[ref_id].bbox)
        if iou > th.theta_bbox:
            kind = (
                MATCHING_NODE
                if g_r.nodes[ref_id].label == o.label
                else CONFLICTING_LABEL
            )
            return MatchDecision(kind, o.instance_id, ref_id, dist, iou)
    if nearest is None:
        return MatchDecision(NEW_NODE, o.instance_id, None, math.inf, 0.0)
    dist, ref_id = nearest
    return MatchDecision(
        NEW_NODE, o.instance_id, None, dist, aabb_iou(o.bbox, g_r.nodes[ref_id].bbox)
    )


def _fresh_id(base: str, taken: Set[str]) -> str:
    candidate = base
    n = 1
    while candidate in taken:
        n += 1
        candidate = f"{base}~{n}"
    return candidate


def _apply_matching(g: SceneGraph, ref_id: str, q: EntityNode) -> None:
    ref = g.nodes[ref_id]
    merged_box = bbox_union(ref.bbox, q.bbox)
    g.replace_node(
        replace(
            ref,
            bbox=merged_box,
            centroid=clamp_point(q.centroid, merged_box),
            point_stddev=q.point_stddev,
            label_ranking=q.label_ranking,
            provenance=q.provenance,
        )
    )


def _apply_conflicting(g: SceneGraph, ref_id: str, q: EntityNode) -> None:
    g.replace_node(
        replace(
            q,
            instance_id=ref_id,
            centroid=clamp_point(q.centroid, q.bbox),
        )
    )


def edge_reconcile(
    g_q: SceneGraph, g_r: SceneGraph, resolution: Dict[str, str]
) -> None:
    """Replace co-observed directed edges of ``g_r`` with the query's.

    For every directed node pair that carries at least one edge in the query
    graph, the reference edges between the resolved images are dropped and the
    query edges substituted.  Pairs not co-observed in the query are retained
    untouched.  Mutates ``g_r`` in place.
    """
    by_pair: Dict[Tuple[str, str], List[RelationEdge]] = {}
    for e in g_q.edges:
        by_pair.setdefault((e.subject, e.object), []).append(e)
    for (s, o) in sorted(by_pair):
        image_s, image_o = resolution[s], resolution[o]
        if image_s == image_o:
            continue  # two query nodes collapsed onto one reference node
        for old in g_r.edges_between(image_s, image_o):
            g_r.remove_edge(*old.key)
        for e in by_pair[(s, o)]:
            new_edge = RelationEdge(
                subject=image_s,
                predicate=e.predicate,
                object=image_o,
                predicate_ranking=e.predicate_ranking,
            )
            if new_edge.key not in {x.key for x in g_r.edges_between(image_s, image_o)}:
                g_r.add_edge(new_edge)


def graph_update(
    g_q: SceneGraph,
    g_r: SceneGraph,
    mapping: NodeMapping,
    th: Thresholds,
) -> Tuple[SceneGraph, List[MatchDecision]]:
    """Fold every query node into a copy of the reference graph.

    Mapped nodes are processed first and keep their mapped partner when the
    distance/IoU gates hold for that pair; otherwise they fall back to
    ``classify_node`` like unmapped nodes, so stale mappings cannot corrupt
    distant reference nodes.  Returns the updated graph and one decision per
    query node.
    """
    if not validate_mapping(mapping, g_q, g_r):
        raise MappingError("invalid node mapping passed to graph_update")
    out = g_r.copy()
    decisions: List[MatchDecision] = []
    resolution: Dict[str, str] = {}
    claimed: Set[str] = set()
    deferred: List[str] = []

    for q_id in sorted(mapping.pairs):
        r_id = mapping.pairs[q_id]
        qn = g_q.nodes[q_id]
        rn = out.nodes[r_id]
        dist = centroid_distance(qn, rn)
        iou = aabb_iou(qn.bbox, rn.bbox)
        if dist < th.theta_dis and iou > th.theta_bbox and r_id not in claimed:
            _apply_matching(out, r_id, qn)
            decisions.append(MatchDecision(MATCHING_NODE, q_id, r_id, dist, iou))
            resolution[q_id] = r_id
            claimed.add(r_id)
        else:
            deferred.append(q_id)

    remaining = deferred + [q for q in g_q.sorted_ids() if q not in mapping.pairs]
    for q_id in sorted(remaining):
        qn = g_q.nodes[q_id]
        decision = classify_node(qn, out, th, exclude=frozenset(claimed))
        if decision.kind == MATCHING_NODE:
            _apply_matching(out, decision.reference_id, qn)
            resolution[q_id] = decision.reference_id
            claimed.add(decision.reference_id)
        elif decision.kind == CONFLICTING_LABEL:
            _apply_conflicting(out, decision.reference_id, qn)
            resolution[q_id] = decision.reference_id
            claimed.add(decision.reference_id)
        else:
            new_id = _fresh_id(q_id, set(out.nodes))
            out.add_node(
                replace(qn, instance_id=new_id)
            )
            resolution[q_id] = new_id
            claimed.add(new_id)
        decisions.append(decision)

    edge_reconcile(g_q, out, resolution)
    return out, decisions
