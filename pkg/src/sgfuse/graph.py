"""Semantic scene-graph data model and its canonical serialization.

Nodes are object instances with geometry and a ranked label list; edges are
directed predicates.  The serialization is a canonical JSON encoding (sorted
keys, 6-decimal coordinates) so that byte counts are stable and usable for
traffic accounting and golden-file tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Set, Tuple

from .geometry import Aabb, Vec3, euclidean

Ranking = Tuple[Tuple[str, float], ...]

COORD_DECIMALS = 6


class GraphFormatError(ValueError):
    """Raised when serialized graph bytes cannot be decoded."""


class UnknownNodeError(KeyError):
    """Raised when an operation references a node id absent from the graph."""


def _check_ranking(ranking: Ranking, first: str, what: str) -> Ranking:
    ranking = tuple((str(lbl), float(score)) for lbl, score in ranking)
    if not ranking:
        raise ValueError(f"{what} ranking must be non-empty")
    if ranking[0][0] != first:
        raise ValueError(f"{what} ranking must start with {first!r}")
    scores = [s for _, s in ranking]
    if any(a < b for a, b in zip(scores, scores[1:])):
        raise ValueError(f"{what} ranking scores must be non-increasing")
    return ranking


@dataclass(frozen=True)
class Provenance:
    """Where an observation came from: agent, room, and logical timestamp.

    ``source`` optionally records the ground-truth instance id the observation
    was derived from; the simulator uses it for provenance-based evaluation.
    """

    agent: str
    room: str
    t: int
    source: Optional[str] = None


@dataclass(frozen=True)
class EntityNode:
    """One object instance: identity, ranked labels, and 3D extent."""

    instance_id: str
    label: str
    centroid: Vec3
    point_stddev: float
    bbox: Aabb
    provenance: Provenance
    label_ranking: Ranking = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "centroid", tuple(float(c) for c in self.centroid))
        if self.point_stddev < 0:
            raise ValueError("point_stddev must be nonnegative")
        ranking = self.label_ranking or ((self.label, 1.0),)
        object.__setattr__(
            self, "label_ranking", _check_ranking(ranking, self.label, "label")
        )
        if not self.bbox.contains(self.centroid, atol=1e-9):
            raise ValueError(
                f"centroid {self.centroid} outside bbox of {self.instance_id!r}"
            )

    @property
    def volume(self) -> float:
        return self.bbox.volume

    @property
    def max_length(self) -> float:
        return self.bbox.max_length

    def top_labels(self, k: int) -> List[str]:
        return [lbl for lbl, _ in self.label_ranking[:k]]


@dataclass(frozen=True)
class RelationEdge:
    """Directed predicate between two entity nodes."""

    subject: str
    predicate: str
    object: str
    predicate_ranking: Ranking = ()

    def __post_init__(self) -> None:
        if self.subject == self.object:
            raise ValueError("relation endpoints must differ")
        ranking = self.predicate_ranking or ((self.predicate, 1.0),)
        object.__setattr__(
            self, "predicate_ranking", _check_ranking(ranking, self.predicate, "predicate")
        )

    @property
    def key(self) -> Tuple[str, str, str]:
        return (self.subject, self.predicate, self.object)

    def top_predicates(self, k: int) -> List[str]:
        return [p for p, _ in self.predicate_ranking[:k]]


class SceneGraph:
    """A set of entity nodes plus directed relation edges.

    Edges are directed; neighborhood queries ignore direction.  Referential
    integrity (no dangling edges) is maintained by every mutator.
    """

    def __init__(self, frame_tag: str = "global") -> None:
        self.frame_tag = frame_tag
        self.nodes: Dict[str, EntityNode] = {}
        self._edges: Dict[Tuple[str, str, str], RelationEdge] = {}
        self._adjacency: Dict[str, Set[str]] = {}
        self._by_pair: Dict[Tuple[str, str], Set[Tuple[str, str, str]]] = {}
        self._by_node: Dict[str, Set[Tuple[str, str, str]]] = {}

    # -- basic queries ------------------------------------------------------

    @property
    def edges(self) -> List[RelationEdge]:
        return [self._edges[k] for k in sorted(self._edges)]

    def __len__(self) -> int:
        return len(self.nodes)

    def has_node(self, instance_id: str) -> bool:
        return instance_id in self.nodes

    def node(self, instance_id: str) -> EntityNode:
        try:
            return self.nodes[instance_id]
        except KeyError:
            raise UnknownNodeError(instance_id) from None

    def neighbors(self, instance_id: str) -> Set[str]:
        """Ids connected to ``instance_id`` by an edge in either direction."""
        if instance_id not in self.nodes:
            raise UnknownNodeError(instance_id)
        return set(self._adjacency.get(instance_id, ()))

    def edges_between(self, subject: str, obj: str) -> List[RelationEdge]:
        keys = self._by_pair.get((subject, obj), ())
        return [self._edges[k] for k in sorted(keys)]

    def edges_of(self, instance_id: str) -> List[RelationEdge]:
        keys = self._by_node.get(instance_id, ())
        return [self._edges[k] for k in sorted(keys)]

    def sorted_ids(self) -> List[str]:
        return sorted(self.nodes)

    def ids_with_label(self, label: str) -> List[str]:
        return sorted(i for i, n in self.nodes.items() if n.label == label)

    # -- mutation ------------------------------------------------------------

    def add_node(self, node: EntityNode) -> None:
        if node.instance_id in self.nodes:
            raise ValueError(f"duplicate node id {node.instance_id!r}")
        self.nodes[node.instance_id] = node
        self._adjacency.setdefault(node.instance_id, set())

    def replace_node(self, node: EntityNode) -> None:
        if node.instance_id not in self.nodes:
            raise UnknownNodeError(node.instance_id)
        self.nodes[node.instance_id] = node

    def remove_node(self, instance_id: str) -> None:
        if instance_id not in self.nodes:
            raise UnknownNodeError(instance_id)
        for key in sorted(self._by_node.get(instance_id, ())):
            self.remove_edge(*key)
        del self.nodes[instance_id]
        self._adjacency.pop(instance_id, None)
        self._by_node.pop(instance_id, None)

    def add_edge(self, edge: RelationEdge) -> None:
        if edge.subject not in self.nodes or edge.object not in self.nodes:
            raise UnknownNodeError(f"dangling edge {edge.key}")
        if edge.key in self._edges:
            raise ValueError(f"duplicate edge {edge.key}")
        self._edges[edge.key] = edge
        self._adjacency[edge.subject].add(edge.object)
        self._adjacency[edge.object].add(edge.subject)
        self._by_pair.setdefault((edge.subject, edge.object), set()).add(edge.key)
        self._by_node.setdefault(edge.subject, set()).add(edge.key)
        self._by_node.setdefault(edge.object, set()).add(edge.key)

    def remove_edge(self, subject: str, predicate: str, obj: str) -> None:
        key = (subject, predicate, obj)
        del self._edges[key]
        self._by_pair[(subject, obj)].discard(key)
        if not self._by_pair[(subject, obj)]:
            del self._by_pair[(subject, obj)]
        for node in (subject, obj):
            self._by_node[node].discard(key)
        if (subject, obj) not in self._by_pair and (obj, subject) not in self._by_pair:
            self._adjacency[subject].discard(obj)
            self._adjacency[obj].discard(subject)

    def copy(self) -> "SceneGraph":
        out = SceneGraph(self.frame_tag)
        out.nodes = dict(self.nodes)
        out._edges = dict(self._edges)
        out._adjacency = {k: set(v) for k, v in self._adjacency.items()}
        out._by_pair = {k: set(v) for k, v in self._by_pair.items()}
        out._by_node = {k: set(v) for k, v in self._by_node.items()}
        return out


def centroid_distance(a: EntityNode, b: EntityNode) -> float:
    """Euclidean distance between two node centroids (meters)."""
    return euclidean(a.centroid, b.centroid)


# -- canonical serialization --------------------------------------------------


def _round(x: float) -> float:
    return round(float(x), COORD_DECIMALS)


def _vec_payload(v: Vec3) -> List[float]:
    return [_round(c) for c in v]


def _ranking_payload(r: Ranking) -> List[List[object]]:
    return [[lbl, _round(score)] for lbl, score in r]


def node_payload(n: EntityNode) -> dict:
    prov: dict = {
        "agent": n.provenance.agent,
        "room": n.provenance.room,
        "t": n.provenance.t,
    }
    if n.provenance.source is not None:
        prov["source"] = n.provenance.source
    return {
        "id": n.instance_id,
        "label": n.label,
        "label_ranking": _ranking_payload(n.label_ranking),
        "centroid": _vec_payload(n.centroid),
        "stddev": _round(n.point_stddev),
        "bbox": {"min": _vec_payload(n.bbox.min), "max": _vec_payload(n.bbox.max)},
        "provenance": prov,
    }


def edge_payload(e: RelationEdge) -> dict:
    return {
        "subject": e.subject,
        "predicate": e.predicate,
        "predicate_ranking": _ranking_payload(e.predicate_ranking),
        "object": e.object,
    }


def graph_payload(g: SceneGraph) -> dict:
    return {
        "frame_tag": g.frame_tag,
        "nodes": [node_payload(g.nodes[i]) for i in g.sorted_ids()],
        "edges": [edge_payload(e) for e in g.edges],
    }


def serialize_graph(g: SceneGraph) -> bytes:
    """Canonical byte encoding: sorted keys, compact separators, 6-decimal coords."""
    return json.dumps(
        graph_payload(g), sort_keys=True, separators=(",", ":")
    ).encode("utf-8")


def node_from_payload(p: dict) -> EntityNode:
    prov = p.get("provenance", {})
    return EntityNode(
        instance_id=p["id"],
        label=p["label"],
        label_ranking=tuple((l, s) for l, s in p.get("label_ranking", [])),
        centroid=tuple(p["centroid"]),
        point_stddev=p["stddev"],
        bbox=Aabb(tuple(p["bbox"]["min"]), tuple(p["bbox"]["max"])),
        provenance=Provenance(
            agent=prov.get("agent", ""),
            room=prov.get("room", ""),
            t=int(prov.get("t", 0)),
            source=prov.get("source"),
        ),
    )


def edge_from_payload(p: dict) -> RelationEdge:
    return RelationEdge(
        subject=p["subject"],
        predicate=p["predicate"],
        object=p["object"],
        predicate_ranking=tuple((l, s) for l, s in p.get("predicate_ranking", [])),
    )


def graph_from_payload(payload: dict) -> SceneGraph:
    try:
        g = SceneGraph(payload.get("frame_tag", "global"))
        for np_ in payload.get("nodes", []):
            g.add_node(node_from_payload(np_))
        for ep in payload.get("edges", []):
            g.add_edge(edge_from_payload(ep))
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"malformed graph payload: {exc}") from exc
    return g


def deserialize_graph(data: bytes) -> SceneGraph:
    try:
        payload = json.loads(data.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(
            f"invalid graph bytes at position {exc.pos}: {exc.msg}"
        ) from exc
    if not isinstance(payload, dict):
        raise GraphFormatError("graph payload must be a JSON object")
    return graph_from_payload(payload)


def message_bytes(g: SceneGraph) -> int:
    """Byte count of the canonical encoding (the unit of traffic accounting)."""
    return len(serialize_graph(g))


def graphs_structurally_equal(a: SceneGraph, b: SceneGraph) -> bool:
    """Structural equality ignoring provenance, frame tags, and node ids.

    Nodes are compared as a multiset of (label, ranking, centroid, stddev,
    bbox); edges as a multiset of labeled triplets resolved through each
    graph's own nodes.
    """

    def node_key(n: EntityNode):
        return (
            n.label,
            n.label_ranking,
            tuple(_round(c) for c in n.centroid),
            _round(n.point_stddev),
            tuple(_round(c) for c in n.bbox.min),
            tuple(_round(c) for c in n.bbox.max),
        )

    def summary(g: SceneGraph):
        nodes = sorted(node_key(n) for n in g.nodes.values())
        edges = sorted(
            (node_key(g.nodes[e.subject]), e.predicate, e.predicate_ranking,
             node_key(g.nodes[e.object]))
            for e in g.edges
        )
        return nodes, edges

    return summary(a) == summary(b)
