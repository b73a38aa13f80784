"""Multi-agent semantic scene-graph fusion: simulator, alignment, metrics."""

from .geometry import Aabb, aabb_iou, bbox_union
from .graph import (
    EntityNode,
    Provenance,
    RelationEdge,
    SceneGraph,
    centroid_distance,
    deserialize_graph,
    message_bytes,
    serialize_graph,
)
from .alignment import (
    AlignmentReport,
    NodeMapping,
    Thresholds,
    graph_search,
    scene_graph_update,
    select_anchors,
    validate_mapping,
)
from .update import MatchDecision, classify_node, edge_reconcile, graph_update
from .metrics import (
    EvalResult,
    MatchSpec,
    SpatialGate,
    TrafficLog,
    eval_objects,
    eval_predicates,
    eval_triplets,
    f1,
    match_instances,
    timing_summary,
    traffic_summary,
)
from .worldsim import (
    AgentTrajectory,
    DynamicsSchedule,
    GroundTruthWorld,
    ObservationNoise,
    apply_dynamics,
    generate_world,
    ingest_3dssg,
    observe,
    plan_trajectories,
)
from .harness import RunReport, ScenarioConfig, merge_loop, run_ldcp, run_scp

__version__ = "0.1.0"

__all__ = [
    "Aabb", "aabb_iou", "bbox_union",
    "EntityNode", "Provenance", "RelationEdge", "SceneGraph",
    "centroid_distance", "deserialize_graph", "message_bytes", "serialize_graph",
    "AlignmentReport", "NodeMapping", "Thresholds",
    "graph_search", "scene_graph_update", "select_anchors", "validate_mapping",
    "MatchDecision", "classify_node", "edge_reconcile", "graph_update",
    "EvalResult", "MatchSpec", "SpatialGate", "TrafficLog",
    "eval_objects", "eval_predicates", "eval_triplets", "f1",
    "match_instances", "timing_summary", "traffic_summary",
    "AgentTrajectory", "DynamicsSchedule", "GroundTruthWorld", "ObservationNoise",
    "apply_dynamics", "generate_world", "ingest_3dssg", "observe",
    "plan_trajectories",
    "RunReport", "ScenarioConfig", "merge_loop", "run_ldcp", "run_scp",
]
