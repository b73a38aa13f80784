"""Accuracy and efficiency metrics for fused scene graphs.

Accuracy covers the triplet / object / predicate prediction tasks at a rank
cutoff k, with recall, precision, and F1.  Instance correspondence between the
predicted and ground-truth graphs comes either from a geometric gate (greedy
one-to-one assignment by descending bbox IoU) or, when the gate is disabled,
from the simulator's stored ground-truth provenance ids.  Efficiency covers
per-agent transmitted bytes and cumulative alignment time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .alignment import AlignmentReport
from .geometry import aabb_iou, euclidean
from .graph import SceneGraph

BYTES_PER_MB = 1_000_000


@dataclass(frozen=True)
class SpatialGate:
    iou_min: float = 0.25
    dist_max: float = 1.5

    def __post_init__(self) -> None:
        if not 0.0 < self.iou_min <= 1.0:
            raise ValueError("iou_min must lie in (0, 1]")
        if self.dist_max <= 0:
            raise ValueError("dist_max must be positive")


@dataclass(frozen=True)
class MatchSpec:
    """Rank cutoff plus the spatial gate (None = provenance-id matching)."""

    k: int = 1
    spatial_gate: Optional[SpatialGate] = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class EvalResult:
    recall: float
    precision: float
    f1: float
    tp: int
    fp: int
    fn: int

    def to_payload(self) -> dict:
        return {
            "r": round(self.recall, 6),
            "p": round(self.precision, 6),
            "f1": round(self.f1, 6),
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
        }


def f1(recall: float, precision: float) -> float:
    """Harmonic mean of recall and precision; 0 when both are 0."""
    if recall + precision == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _result(tp: int, fp: int, fn: int) -> EvalResult:
    recall = tp / (tp + fn) if tp + fn else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    return EvalResult(recall, precision, f1(recall, precision), tp, fp, fn)


def match_instances(
    pred: SceneGraph, gt: SceneGraph, spec: MatchSpec
) -> Dict[str, str]:
    """One-to-one map from predicted node ids to ground-truth node ids.

    With a spatial gate: greedy assignment by descending IoU over all pairs
    passing both the IoU and distance gates, ties broken by ids.  Without a
    gate: each predicted node claims the ground-truth node named by its stored
    provenance source id, first-come by ascending predicted id.
    """
    if spec.spatial_gate is None:
        matched: Dict[str, str] = {}
        claimed = set()
        for pred_id in pred.sorted_ids():
            source = pred.nodes[pred_id].provenance.source or pred_id
            if source in gt.nodes and source not in claimed:
                matched[pred_id] = source
                claimed.add(source)
        return matched

    gate = spec.spatial_gate
    candidates: List[Tuple[float, str, str]] = []
    for pred_id in pred.sorted_ids():
        pn = pred.nodes[pred_id]
        for gt_id in gt.sorted_ids():
            gn = gt.nodes[gt_id]
            if euclidean(pn.centroid, gn.centroid) > gate.dist_max:
                continue
            iou = aabb_iou(pn.bbox, gn.bbox)
            if iou >= gate.iou_min:
                candidates.append((-iou, pred_id, gt_id))
    matched = {}
    used_gt = set()
    for _, pred_id, gt_id in sorted(candidates):
        if pred_id in matched or gt_id in used_gt:
            continue
        matched[pred_id] = gt_id
        used_gt.add(gt_id)
    return matched


def eval_objects(pred: SceneGraph, gt: SceneGraph, spec: MatchSpec) -> EvalResult:
    """Object prediction at rank k over the instance matching."""
    matching = match_instances(pred, gt, spec)
    tp = sum(
        1
        for pred_id, gt_id in matching.items()
        if gt.nodes[gt_id].label in pred.nodes[pred_id].top_labels(spec.k)
    )
    return _result(tp, len(pred.nodes) - tp, len(gt.nodes) - tp)


def eval_predicates(pred: SceneGraph, gt: SceneGraph, spec: MatchSpec) -> EvalResult:
    """Predicate prediction: directed edges over matched endpoint pairs."""
    matching = match_instances(pred, gt, spec)
    inverse = {g: p for p, g in matching.items()}
    tp = 0
    for gt_edge in gt.edges:
        ps, po = inverse.get(gt_edge.subject), inverse.get(gt_edge.object)
        if ps is None or po is None:
            continue
        if any(
            gt_edge.predicate in e.top_predicates(spec.k)
            for e in pred.edges_between(ps, po)
        ):
            tp += 1
    n_pred_edges = len(pred.edges)
    n_gt_edges = len(gt.edges)
    return _result(tp, n_pred_edges - tp, n_gt_edges - tp)


def eval_triplets(pred: SceneGraph, gt: SceneGraph, spec: MatchSpec) -> EvalResult:
    """Triplet prediction: subject label, predicate, and object label at rank k."""
    matching = match_instances(pred, gt, spec)
    inverse = {g: p for p, g in matching.items()}
    tp = 0
    for gt_edge in gt.edges:
        ps, po = inverse.get(gt_edge.subject), inverse.get(gt_edge.object)
        if ps is None or po is None:
            continue
        subject_ok = gt.nodes[gt_edge.subject].label in pred.nodes[ps].top_labels(spec.k)
        object_ok = gt.nodes[gt_edge.object].label in pred.nodes[po].top_labels(spec.k)
        if not (subject_ok and object_ok):
            continue
        if any(
            gt_edge.predicate in e.top_predicates(spec.k)
            for e in pred.edges_between(ps, po)
        ):
            tp += 1
    return _result(tp, len(pred.edges) - tp, len(gt.edges) - tp)


def eval_all(pred: SceneGraph, gt: SceneGraph, spec: MatchSpec) -> Dict[str, EvalResult]:
    return {
        "triplet": eval_triplets(pred, gt, spec),
        "object": eval_objects(pred, gt, spec),
        "predicate": eval_predicates(pred, gt, spec),
    }


# -- efficiency ----------------------------------------------------------------


@dataclass(frozen=True)
class TrafficEntry:
    sender: str
    receiver: str
    n_bytes: int
    timestamp: int


@dataclass
class TrafficLog:
    entries: List[TrafficEntry] = field(default_factory=list)

    def record(self, sender: str, receiver: str, n_bytes: int, timestamp: int) -> None:
        self.entries.append(TrafficEntry(sender, receiver, n_bytes, timestamp))

    @property
    def per_agent_bytes(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for e in self.entries:
            out[e.sender] = out.get(e.sender, 0) + e.n_bytes
        return out

    @property
    def total_bytes(self) -> int:
        return sum(e.n_bytes for e in self.entries)


def traffic_summary(log: TrafficLog, k_agents: int) -> Dict[str, float]:
    """Total transmitted megabytes and the mean per agent (MB = 10^6 bytes)."""
    total_mb = log.total_bytes / BYTES_PER_MB
    return {
        "total_mb": total_mb,
        "per_agent_mean_mb": total_mb / k_agents if k_agents else 0.0,
    }


def timing_summary(
    reports: Sequence[AlignmentReport], wall_seconds: float
) -> Dict[str, float]:
    total_align = sum(r.align_seconds for r in reports)
    return {
        "total_align_seconds": total_align,
        "total_minutes": wall_seconds / 60.0,
    }
