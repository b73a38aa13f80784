"""Synthetic ground-truth worlds, agent trajectories, observations, dynamics.

The world generator lays rooms out on a grid and populates each with labeled
instances and proximity-derived relations.  Agents visit rooms along planned
trajectories with a controlled overlap ratio, and each visit produces a noisy
partial scene graph through the observation model.  A dynamics schedule turns
a static world into its long-term rescan state (moved / removed / changed
objects, plus an optional appeared list).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from random import Random
from typing import Dict, List, Optional, Sequence, Tuple

from .geometry import Aabb, Vec3, clamp_point, euclidean
from .graph import (
    EntityNode,
    GraphFormatError,
    Provenance,
    RelationEdge,
    SceneGraph,
    graph_from_payload,
    graph_payload,
    node_from_payload,
    node_payload,
)

logger = logging.getLogger(__name__)

ROOM_SIZE: Vec3 = (6.0, 6.0, 3.0)
# At most one instance per quarter square meter of floor keeps layouts sane.
MAX_INSTANCES_PER_ROOM = int(ROOM_SIZE[0] * ROOM_SIZE[1] * 4)
OVERLAP_TOLERANCE = 0.05

DEFAULT_LABELS = (
    "wall", "floor", "ceiling", "door", "window", "table", "chair", "sofa",
    "bed", "cabinet", "shelf", "desk", "lamp", "curtain", "pillow", "monitor",
    "plant", "sink", "toilet", "bathtub", "mirror", "towel", "refrigerator",
    "oven", "microwave", "trashcan", "box", "bag", "picture", "clock",
    "heater", "couch table", "nightstand", "wardrobe", "stool", "bench",
    "rug", "blanket", "basket", "whiteboard",
)
DEFAULT_PREDICATES = (
    "standing on", "lying on", "attached to", "hanging on", "supported by",
    "close by", "next to", "inside",
)

# Table-proportioned default dynamics mix (static 1110, moved 214,
# removed 70, changed 194 out of 1588 instances).
DEFAULT_DYNAMICS_PROPORTIONS = {
    "moved": 214 / 1588,
    "removed": 70 / 1588,
    "changed": 194 / 1588,
}

RANKING_LENGTH = 5


class WorldConfigError(ValueError):
    """Raised for infeasible generator or trajectory configurations."""


@dataclass(frozen=True)
class Room:
    id: str
    bounds: Aabb


@dataclass
class GroundTruthWorld:
    rooms: List[Room]
    graph: SceneGraph  # true instances and relations, provenance.room set
    labels: Tuple[str, ...]
    predicates: Tuple[str, ...]
    seed: int
    edges_per_node: float = 3.5
    dynamics: Optional["DynamicsSchedule"] = None

    def room(self, room_id: str) -> Room:
        for r in self.rooms:
            if r.id == room_id:
                return r
        raise KeyError(room_id)

    def room_instances(self, room_id: str) -> List[EntityNode]:
        return [
            self.graph.nodes[i]
            for i in self.graph.sorted_ids()
            if self.graph.nodes[i].provenance.room == room_id
        ]

    def room_subgraph(self, room_id: str) -> SceneGraph:
        g = SceneGraph(frame_tag=f"gt:{room_id}")
        for node in self.room_instances(room_id):
            g.add_node(node)
        for e in self.graph.edges:
            if e.subject in g.nodes and e.object in g.nodes:
                g.add_edge(e)
        return g


@dataclass(frozen=True)
class MovedSpec:
    instance_id: str
    delta: Vec3


@dataclass
class DynamicsSchedule:
    moved: List[MovedSpec] = field(default_factory=list)
    removed: List[str] = field(default_factory=list)
    changed: List[Tuple[str, str]] = field(default_factory=list)  # (id, new label)
    appeared: List[EntityNode] = field(default_factory=list)

    def validate(self, world: GroundTruthWorld) -> None:
        groups = [
            [m.instance_id for m in self.moved],
            list(self.removed),
            [i for i, _ in self.changed],
        ]
        flat = [i for grp in groups for i in grp]
        if len(flat) != len(set(flat)):
            raise WorldConfigError("dynamics lists must be disjoint")
        for i in flat:
            if i not in world.graph.nodes:
                raise WorldConfigError(f"dynamics references unknown instance {i!r}")

    def to_payload(self) -> dict:
        return {
            "moved": [
                {"id": m.instance_id, "delta": list(m.delta)} for m in self.moved
            ],
            "removed": list(self.removed),
            "changed": [{"id": i, "label": l} for i, l in self.changed],
            "appeared": [node_payload(n) for n in self.appeared],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "DynamicsSchedule":
        return cls(
            moved=[
                MovedSpec(m["id"], tuple(m["delta"]))
                for m in payload.get("moved", [])
            ],
            removed=list(payload.get("removed", [])),
            changed=[(c["id"], c["label"]) for c in payload.get("changed", [])],
            appeared=[node_from_payload(p) for p in payload.get("appeared", [])],
        )


@dataclass(frozen=True)
class AgentTrajectory:
    agent_id: str
    room_sequence: Tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.room_sequence)) != len(self.room_sequence):
            raise WorldConfigError("rooms within a trajectory must be distinct")


@dataclass(frozen=True)
class ObservationNoise:
    label_flip_prob: float = 0.25
    centroid_jitter_sigma: float = 0.10
    bbox_jitter_sigma: float = 0.05
    node_dropout_prob: float = 0.10
    edge_dropout_prob: float = 0.15
    predicate_flip_prob: float = 0.25

    def __post_init__(self) -> None:
        for name in (
            "label_flip_prob", "node_dropout_prob",
            "edge_dropout_prob", "predicate_flip_prob",
        ):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise WorldConfigError(f"{name} must lie in [0, 1], got {p}")
        if self.centroid_jitter_sigma < 0 or self.bbox_jitter_sigma < 0:
            raise WorldConfigError("jitter sigmas must be nonnegative")

    @classmethod
    def zero(cls) -> "ObservationNoise":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


# -- world generation ----------------------------------------------------------


def _grid_rooms(n_rooms: int) -> List[Room]:
    cols = math.ceil(math.sqrt(n_rooms))
    rooms = []
    for i in range(n_rooms):
        row, col = divmod(i, cols)
        origin = (col * ROOM_SIZE[0], row * ROOM_SIZE[1], 0.0)
        rooms.append(
            Room(
                id=f"room_{i:03d}",
                bounds=Aabb(origin, tuple(o + s for o, s in zip(origin, ROOM_SIZE))),
            )
        )
    return rooms


def _vocab(base: Sequence[str], size: int, stem: str) -> Tuple[str, ...]:
    if size <= len(base):
        return tuple(base[:size])
    extra = [f"{stem}_{i:02d}" for i in range(size - len(base))]
    return tuple(base) + tuple(extra)


def _proximity_edges(
    nodes: List[EntityNode],
    n_edges: int,
    predicates: Sequence[str],
    rng: Random,
) -> List[RelationEdge]:
    """Connect the n_edges closest instance pairs with random predicates."""
    pairs = sorted(
        (euclidean(a.centroid, b.centroid), a.instance_id, b.instance_id)
        for idx, a in enumerate(nodes)
        for b in nodes[idx + 1:]
    )
    edges = []
    for _, first, second in pairs[:n_edges]:
        if rng.random() < 0.5:
            first, second = second, first
        edges.append(
            RelationEdge(subject=first, predicate=rng.choice(list(predicates)), object=second)
        )
    return edges


def generate_world(
    n_rooms: int,
    instances_per_room: Tuple[int, int] = (8, 12),
    n_labels: int = 40,
    n_predicates: int = 8,
    edges_per_node: float = 3.5,
    seed: int = 0,
) -> GroundTruthWorld:
    """Deterministic synthetic world: grid rooms, in-room instances, proximity edges."""
    if n_rooms < 1:
        raise WorldConfigError("n_rooms must be >= 1")
    lo, hi = instances_per_room
    if lo < 1 or hi < lo:
        raise WorldConfigError("instances_per_room must be a nonempty (lo, hi) range")
    if hi > MAX_INSTANCES_PER_ROOM:
        raise WorldConfigError(
            f"instances_per_room max {hi} exceeds room capacity {MAX_INSTANCES_PER_ROOM}"
        )
    rng = Random(f"{seed}:world")
    labels = _vocab(DEFAULT_LABELS, n_labels, "object")
    predicates = _vocab(DEFAULT_PREDICATES, n_predicates, "relation")

    rooms = _grid_rooms(n_rooms)
    graph = SceneGraph(frame_tag="world")
    counter = 0
    for room in rooms:
        n_inst = rng.randint(lo, hi)
        room_nodes: List[EntityNode] = []
        for _ in range(n_inst):
            size = tuple(rng.uniform(0.2, 2.2) for _ in range(3))
            center = tuple(
                rng.uniform(b_lo + s / 2, b_hi - s / 2)
                if b_hi - b_lo > s
                else (b_lo + b_hi) / 2
                for b_lo, b_hi, s in zip(room.bounds.min, room.bounds.max, size)
            )
            bbox = Aabb(
                tuple(max(c - s / 2, b_lo) for c, s, b_lo in zip(center, size, room.bounds.min)),
                tuple(min(c + s / 2, b_hi) for c, s, b_hi in zip(center, size, room.bounds.max)),
            )
            node = EntityNode(
                instance_id=f"inst_{counter:05d}",
                label=rng.choice(list(labels)),
                centroid=center,
                point_stddev=rng.uniform(0.05, 0.5),
                bbox=bbox,
                provenance=Provenance(
                    agent="gt", room=room.id, t=0, source=f"inst_{counter:05d}"
                ),
            )
            counter += 1
            room_nodes.append(node)
            graph.add_node(node)
        n_edges = round(edges_per_node * n_inst)
        for edge in _proximity_edges(room_nodes, n_edges, predicates, rng):
            graph.add_edge(edge)
    return GroundTruthWorld(
        rooms=rooms,
        graph=graph,
        labels=labels,
        predicates=predicates,
        seed=seed,
        edges_per_node=edges_per_node,
    )


def full_scale_preset(seed: int = 0) -> GroundTruthWorld:
    """47-room world sized to the benchmark's unified-domain magnitudes."""
    return generate_world(
        n_rooms=47, instances_per_room=(31, 37), n_labels=40,
        n_predicates=8, edges_per_node=3.5, seed=seed,
    )


# -- trajectories --------------------------------------------------------------


def measure_overlaps(trajectories: Sequence[AgentTrajectory]) -> Dict[str, float]:
    """Per-agent fraction of the trajectory that other agents also visit."""
    out = {}
    for traj in trajectories:
        others = set()
        for other in trajectories:
            if other.agent_id != traj.agent_id:
                others.update(other.room_sequence)
        shared = sum(1 for r in traj.room_sequence if r in others)
        out[traj.agent_id] = shared / len(traj.room_sequence)
    return out


def _ring_overlaps(base_sizes: List[int], borrows: List[int]) -> List[float]:
    """Predicted per-agent overlap when agent i borrows from agent i+1's base."""
    k = len(base_sizes)
    return [
        (borrows[i] + borrows[(i - 1) % k]) / (base_sizes[i] + borrows[i])
        for i in range(k)
    ]


def plan_trajectories(
    world: GroundTruthWorld,
    k_agents: int,
    overlap_ratio: float,
    rng: Optional[Random] = None,
    strict: bool = True,
) -> List[AgentTrajectory]:
    """Partition rooms among agents, then borrow rooms to hit the overlap band.

    Borrowing runs around a ring (agent i takes rooms from agent i+1's
    partition) so that lending stays balanced; per-agent borrow counts are
    then nudged until each agent's measured overlap lands within +-0.05 of the
    request.  An unreachable band raises unless ``strict`` is off, in which
    case the closest achievable plan is returned.
    """
    if k_agents < 1:
        raise WorldConfigError("k_agents must be >= 1")
    if not 0.0 <= overlap_ratio < 1.0:
        raise WorldConfigError("overlap_ratio must lie in [0, 1)")
    rng = rng or Random(0)
    room_ids = [r.id for r in world.rooms]
    if len(room_ids) < k_agents:
        raise WorldConfigError(
            f"{k_agents} agents cannot cover only {len(room_ids)} rooms"
        )
    shuffled = list(room_ids)
    rng.shuffle(shuffled)
    base: List[List[str]] = [shuffled[i::k_agents] for i in range(k_agents)]

    if k_agents == 1:
        # A lone agent shares nothing; the measured overlap is 0 by definition.
        return [AgentTrajectory("agent_0", tuple(shuffled))]

    sizes = [len(b) for b in base]
    borrows = [0] * k_agents
    if overlap_ratio > 0.0:
        borrows = [
            min(
                round(overlap_ratio * sizes[i] / (2.0 - overlap_ratio)),
                sizes[(i + 1) % k_agents],
            )
            for i in range(k_agents)
        ]
        # Greedy per-agent adjustment toward the band; each change also moves
        # the downstream neighbor, so iterate a bounded number of passes.
        for _ in range(10 * k_agents):
            overlaps = _ring_overlaps(sizes, borrows)
            deviations = [o - overlap_ratio for o in overlaps]
            worst = max(range(k_agents), key=lambda i: abs(deviations[i]))
            if abs(deviations[worst]) <= OVERLAP_TOLERANCE:
                break
            if deviations[worst] > 0 and borrows[worst] > 0:
                borrows[worst] -= 1
            elif deviations[worst] < 0 and borrows[worst] < sizes[(worst + 1) % k_agents]:
                borrows[worst] += 1
            else:
                break

    sequences: List[List[str]] = [list(b) for b in base]
    for i in range(k_agents):
        if borrows[i]:
            sequences[i].extend(rng.sample(base[(i + 1) % k_agents], borrows[i]))
    for seq in sequences:
        rng.shuffle(seq)
    trajectories = [
        AgentTrajectory(f"agent_{i}", tuple(seq)) for i, seq in enumerate(sequences)
    ]
    measured = measure_overlaps(trajectories)
    off = {
        a: round(v, 4) for a, v in measured.items()
        if abs(v - overlap_ratio) > OVERLAP_TOLERANCE
    }
    if off:
        message = (
            f"requested overlap {overlap_ratio} unreachable for "
            f"{k_agents} agents over {len(room_ids)} rooms; measured {off}"
        )
        if strict:
            raise WorldConfigError(message)
        logger.warning("%s (continuing with best-effort plan)", message)
    return trajectories


# -- observation model ---------------------------------------------------------


def _flip_ranking(
    true_label: str, wrong_label: str, vocab: Sequence[str], rng: Random
) -> Tuple[Tuple[str, float], ...]:
    others = [l for l in vocab if l not in (true_label, wrong_label)]
    rng.shuffle(others)
    chosen = [wrong_label, true_label] + others[: RANKING_LENGTH - 2]
    score = 0.9
    ranking = []
    for lbl in chosen:
        ranking.append((lbl, round(score, 6)))
        score *= 0.5
    return tuple(ranking)


def observe(
    world: GroundTruthWorld,
    room_id: str,
    noise: ObservationNoise,
    agent_id: str,
    t: int,
    rng: Optional[Random] = None,
) -> SceneGraph:
    """Noisy partial scene graph of one room visit.

    Zero noise reproduces the room's ground-truth subgraph exactly (up to
    provenance stamps).  Node ids are kept equal to the ground-truth instance
    ids; the simulator also records the source id in the provenance.
    """
    room = world.room(room_id)
    rng = rng or Random(0)
    g = SceneGraph(frame_tag=f"{agent_id}:{room_id}:{t}")
    for node in world.room_instances(room_id):
        if rng.random() < noise.node_dropout_prob:
            continue
        label = node.label
        ranking = node.label_ranking
        if rng.random() < noise.label_flip_prob:
            wrong = rng.choice([l for l in world.labels if l != node.label])
            label = wrong
            ranking = _flip_ranking(node.label, wrong, world.labels, rng)
        centroid = tuple(
            c + rng.gauss(0.0, noise.centroid_jitter_sigma) for c in node.centroid
        )
        corners = [
            [lo + rng.gauss(0.0, noise.bbox_jitter_sigma) for lo in node.bbox.min],
            [hi + rng.gauss(0.0, noise.bbox_jitter_sigma) for hi in node.bbox.max],
        ]
        bbox = Aabb(
            tuple(min(a, b, c) for a, b, c in zip(corners[0], corners[1], centroid)),
            tuple(max(a, b, c) for a, b, c in zip(corners[0], corners[1], centroid)),
        )
        g.add_node(
            EntityNode(
                instance_id=node.instance_id,
                label=label,
                label_ranking=ranking,
                centroid=centroid,
                point_stddev=node.point_stddev,
                bbox=bbox,
                provenance=Provenance(
                    agent=agent_id, room=room_id, t=t, source=node.instance_id
                ),
            )
        )
    for e in world.graph.edges:
        if e.subject not in g.nodes or e.object not in g.nodes:
            continue
        if rng.random() < noise.edge_dropout_prob:
            continue
        predicate = e.predicate
        ranking = e.predicate_ranking
        if rng.random() < noise.predicate_flip_prob:
            wrong = rng.choice([p for p in world.predicates if p != e.predicate])
            predicate = wrong
            ranking = _flip_ranking(e.predicate, wrong, world.predicates, rng)
        g.add_edge(
            RelationEdge(
                subject=e.subject,
                predicate=predicate,
                object=e.object,
                predicate_ranking=ranking,
            )
        )
    return g


# -- dynamics ------------------------------------------------------------------


def sample_schedule(
    world: GroundTruthWorld,
    proportions: Optional[Dict[str, float]] = None,
    rng: Optional[Random] = None,
) -> DynamicsSchedule:
    """Draw a disjoint moved/removed/changed schedule with the default mix.

    Moves translate along a single random axis by a fraction of the box extent
    so a rescan can still reconcile them through the IoU gate.
    """
    proportions = proportions or DEFAULT_DYNAMICS_PROPORTIONS
    rng = rng or Random(f"{world.seed}:schedule")
    ids = world.graph.sorted_ids()
    n = len(ids)
    n_moved = round(proportions.get("moved", 0.0) * n)
    n_removed = round(proportions.get("removed", 0.0) * n)
    n_changed = round(proportions.get("changed", 0.0) * n)
    picked = rng.sample(ids, min(n, n_moved + n_removed + n_changed))
    moved_ids = picked[:n_moved]
    removed_ids = picked[n_moved:n_moved + n_removed]
    changed_ids = picked[n_moved + n_removed:]

    moved = []
    for i in moved_ids:
        node = world.graph.nodes[i]
        room = world.room(node.provenance.room)
        axis = rng.randrange(3)
        extent = node.bbox.extents[axis]
        magnitude = rng.uniform(0.1, 0.3) * max(extent, 0.2)
        sign = rng.choice((-1.0, 1.0))
        delta = [0.0, 0.0, 0.0]
        delta[axis] = sign * magnitude
        # Flip the direction if the translation would leave the room.
        lo, hi = room.bounds.min[axis], room.bounds.max[axis]
        if node.bbox.max[axis] + delta[axis] > hi or node.bbox.min[axis] + delta[axis] < lo:
            delta[axis] = -delta[axis]
        moved.append(MovedSpec(i, tuple(delta)))

    changed = []
    for i in changed_ids:
        node = world.graph.nodes[i]
        changed.append((i, rng.choice([l for l in world.labels if l != node.label])))
    return DynamicsSchedule(moved=moved, removed=list(removed_ids), changed=changed)


def apply_dynamics(
    world: GroundTruthWorld, schedule: DynamicsSchedule
) -> GroundTruthWorld:
    """Rescan state of the world: a new value, the input is left untouched."""
    schedule.validate(world)
    rng = Random(f"{world.seed}:dynamics")
    graph = world.graph.copy()

    moved_ids = [m.instance_id for m in schedule.moved]
    prior_degree = {i: len(graph.neighbors(i)) for i in moved_ids}

    for spec in schedule.moved:
        node = graph.nodes[spec.instance_id]
        room = world.room(node.provenance.room)
        new_box = node.bbox.translated(spec.delta)
        new_box = Aabb(
            clamp_point(new_box.min, room.bounds),
            clamp_point(new_box.max, room.bounds),
        )
        graph.replace_node(
            replace(
                node,
                bbox=new_box,
                centroid=clamp_point(
                    tuple(c + d for c, d in zip(node.centroid, spec.delta)), new_box
                ),
            )
        )

    for instance_id in schedule.removed:
        graph.remove_node(instance_id)

    for instance_id, new_label in schedule.changed:
        node = graph.nodes[instance_id]
        graph.replace_node(
            replace(node, label=new_label, label_ranking=((new_label, 1.0),))
        )

    for node in schedule.appeared:
        graph.add_node(node)

    # Relations touching moved (or appeared) objects are re-derived from the
    # proximity rule: reconnect each to as many nearest in-room neighbors as
    # it had edges before.
    rederive = list(moved_ids) + [n.instance_id for n in schedule.appeared]
    for instance_id in rederive:
        if instance_id not in graph.nodes:
            continue
        node = graph.nodes[instance_id]
        degree = prior_degree.get(
            instance_id, round(world.edges_per_node)
        )
        for key in [e.key for e in graph.edges_of(instance_id)]:
            graph.remove_edge(*key)
        peers = sorted(
            (euclidean(node.centroid, other.centroid), other.instance_id)
            for other in graph.nodes.values()
            if other.instance_id != instance_id
            and other.provenance.room == node.provenance.room
        )
        for _, peer in peers[:degree]:
            subject, obj = (
                (instance_id, peer) if rng.random() < 0.5 else (peer, instance_id)
            )
            edge = RelationEdge(
                subject=subject,
                predicate=rng.choice(list(world.predicates)),
                object=obj,
            )
            if edge.key not in {e.key for e in graph.edges_between(subject, obj)}:
                graph.add_edge(edge)

    return GroundTruthWorld(
        rooms=world.rooms,
        graph=graph,
        labels=world.labels,
        predicates=world.predicates,
        seed=world.seed,
        edges_per_node=world.edges_per_node,
        dynamics=schedule,
    )


# -- persistence ---------------------------------------------------------------


def world_payload(world: GroundTruthWorld) -> dict:
    payload = graph_payload(world.graph)
    payload["rooms"] = [
        {"id": r.id, "bounds": {"min": list(r.bounds.min), "max": list(r.bounds.max)}}
        for r in world.rooms
    ]
    payload["vocab"] = {
        "labels": list(world.labels),
        "predicates": list(world.predicates),
    }
    payload["seed"] = world.seed
    payload["edges_per_node"] = world.edges_per_node
    if world.dynamics is not None:
        payload["dynamics"] = world.dynamics.to_payload()
    return payload


def world_from_payload(payload: dict) -> GroundTruthWorld:
    try:
        graph = graph_from_payload(payload)
        rooms = [
            Room(r["id"], Aabb(tuple(r["bounds"]["min"]), tuple(r["bounds"]["max"])))
            for r in payload["rooms"]
        ]
        vocab = payload.get("vocab", {})
        dynamics = None
        if "dynamics" in payload:
            dynamics = DynamicsSchedule.from_payload(payload["dynamics"])
        return GroundTruthWorld(
            rooms=rooms,
            graph=graph,
            labels=tuple(vocab.get("labels", DEFAULT_LABELS)),
            predicates=tuple(vocab.get("predicates", DEFAULT_PREDICATES)),
            seed=int(payload.get("seed", 0)),
            edges_per_node=float(payload.get("edges_per_node", 3.5)),
            dynamics=dynamics,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"malformed world payload: {exc}") from exc


def serialize_world(world: GroundTruthWorld) -> bytes:
    return json.dumps(
        world_payload(world), sort_keys=True, separators=(",", ":")
    ).encode("utf-8")


def save_world(world: GroundTruthWorld, path: Path) -> None:
    Path(path).write_bytes(serialize_world(world))


def load_world(path: Path) -> GroundTruthWorld:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GraphFormatError(
            f"invalid world file {path} at position {exc.pos}: {exc.msg}"
        ) from exc
    return world_from_payload(payload)


# -- external dataset adapter ----------------------------------------------------


def ingest_3dssg(objects_path: Path, relationships_path: Path) -> GroundTruthWorld:
    """Read the published per-scan object/relationship annotation layout.

    Each scan becomes one room.  Unmappable fields (missing boxes, unknown
    labels) are defaulted and logged; the adapter never writes the inputs.
    """
    try:
        objects_doc = json.loads(Path(objects_path).read_text())
        relations_doc = json.loads(Path(relationships_path).read_text())
    except FileNotFoundError as exc:
        raise GraphFormatError(f"missing dataset file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid dataset JSON: {exc.msg}") from exc

    scans = objects_doc.get("scans")
    if not isinstance(scans, list):
        raise GraphFormatError("objects file must hold a top-level 'scans' array")
    relation_scans = {
        s.get("scan"): s.get("relationships", [])
        for s in relations_doc.get("scans", [])
    }

    rooms: List[Room] = []
    graph = SceneGraph(frame_tag="world")
    labels: List[str] = []
    predicates: List[str] = []
    grid = _grid_rooms(max(len(scans), 1))
    for idx, scan in enumerate(scans):
        scan_id = scan.get("scan", f"scan_{idx}")
        room = Room(id=str(scan_id), bounds=grid[idx].bounds)
        rooms.append(room)
        id_map: Dict[str, str] = {}
        for obj in scan.get("objects", []):
            label = str(obj.get("label", "unknown"))
            if label not in labels:
                labels.append(label)
                if label == "unknown":
                    logger.warning("object without label in scan %s", scan_id)
            bbox = _object_bbox(obj, room)
            instance_id = f"{scan_id}/{obj['id']}"
            id_map[str(obj["id"])] = instance_id
            graph.add_node(
                EntityNode(
                    instance_id=instance_id,
                    label=label,
                    centroid=bbox.center,
                    point_stddev=0.0,
                    bbox=bbox,
                    provenance=Provenance(
                        agent="gt", room=room.id, t=0, source=instance_id
                    ),
                )
            )
        for rel in relation_scans.get(scan_id, []):
            subject, obj_id, _, predicate = (
                str(rel[0]), str(rel[1]), rel[2], str(rel[3])
            )
            if subject not in id_map or obj_id not in id_map:
                logger.warning(
                    "relationship (%s, %s) in scan %s references unknown objects",
                    subject, obj_id, scan_id,
                )
                continue
            if predicate not in predicates:
                predicates.append(predicate)
            edge = RelationEdge(
                subject=id_map[subject], predicate=predicate, object=id_map[obj_id]
            )
            if edge.key not in {
                e.key for e in graph.edges_between(edge.subject, edge.object)
            }:
                graph.add_edge(edge)
    return GroundTruthWorld(
        rooms=rooms,
        graph=graph,
        labels=tuple(labels) or ("unknown",),
        predicates=tuple(predicates) or ("related to",),
        seed=0,
    )


def _object_bbox(obj: dict, room: Room) -> Aabb:
    aabb = obj.get("aabb")
    if aabb and "min" in aabb and "max" in aabb:
        return Aabb(tuple(aabb["min"]), tuple(aabb["max"]))
    obb = obj.get("obb")
    if obb and "centroid" in obb and "axesLengths" in obb:
        c = obb["centroid"]
        half = [a / 2 for a in obb["axesLengths"]]
        return Aabb(
            tuple(ci - h for ci, h in zip(c, half)),
            tuple(ci + h for ci, h in zip(c, half)),
        )
    logger.warning("object %s has no usable box; defaulting to a unit box", obj.get("id"))
    center = room.bounds.center
    return Aabb(
        tuple(c - 0.5 for c in center), tuple(c + 0.5 for c in center)
    )
