"""Scenario orchestration: configuration, the merge loop, and run reports.

Agents observe rooms along their trajectories, transmit the resulting query
graphs (logged for traffic accounting), and a single writer merges them into
the shared reference graph in logical-timestamp order with agent-id
tie-breaking.  The static scenario runs one exploration pass; the long-term
dynamic scenario applies a dynamics schedule and runs a second pass into the
same reference graph, evaluating against the post-dynamics ground truth.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from random import Random
from typing import Dict, List, Optional, Tuple

from .alignment import AlignmentReport, Thresholds, scene_graph_update
from .graph import SceneGraph, message_bytes, serialize_graph
from .metrics import (
    MatchSpec,
    SpatialGate,
    TrafficLog,
    eval_all,
    timing_summary,
    traffic_summary,
)
from .update import CONFLICTING_LABEL, MATCHING_NODE, NEW_NODE
from .worldsim import (
    DEFAULT_DYNAMICS_PROPORTIONS,
    DynamicsSchedule,
    GroundTruthWorld,
    ObservationNoise,
    WorldConfigError,
    apply_dynamics,
    generate_world,
    measure_overlaps,
    observe,
    plan_trajectories,
    sample_schedule,
)

SCENARIO_SCP = "scp"
SCENARIO_LDCP = "ldcp"
TRAFFIC_GRAPHS_ONLY = "graphs_only"
TRAFFIC_GRAPHS_PLUS_POINTS = "graphs_plus_points"

# Synthetic per-instance point-cloud payload used by the heavyweight traffic
# mode: 10,000 points at 12 bytes (3 float32 coordinates) each.
POINTS_PER_INSTANCE = 10_000
BYTES_PER_POINT = 12


class ConfigError(ValueError):
    """Raised for invalid or incomplete scenario configurations."""


@dataclass
class ScenarioConfig:
    seed: int
    scenario: str = SCENARIO_SCP
    n_rooms: int = 47
    k_agents: int = 5
    overlap_ratio: float = 0.2
    instances_per_room: Tuple[int, int] = (31, 37)
    n_labels: int = 40
    n_predicates: int = 8
    edges_per_node: float = 3.5
    thresholds: Thresholds = field(default_factory=Thresholds)
    max_anchors: int = 5
    noise: ObservationNoise = field(default_factory=ObservationNoise)
    dynamics_proportions: Dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_DYNAMICS_PROPORTIONS)
    )
    traffic_mode: str = TRAFFIC_GRAPHS_ONLY
    eval_k: int = 1
    gate_iou_min: float = 0.25
    gate_dist_max: Optional[float] = None  # defaults to theta_dis
    out_dir: Optional[str] = None

    def __post_init__(self) -> None:
        if self.seed is None:
            raise ConfigError("seed is mandatory")
        if self.scenario not in (SCENARIO_SCP, SCENARIO_LDCP):
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.traffic_mode not in (TRAFFIC_GRAPHS_ONLY, TRAFFIC_GRAPHS_PLUS_POINTS):
            raise ConfigError(f"unknown traffic_mode {self.traffic_mode!r}")
        if self.eval_k < 1:
            raise ConfigError("eval_k must be >= 1")

    @property
    def gated_spec(self) -> MatchSpec:
        dist_max = (
            self.gate_dist_max
            if self.gate_dist_max is not None
            else self.thresholds.theta_dis
        )
        return MatchSpec(
            k=self.eval_k,
            spatial_gate=SpatialGate(iou_min=self.gate_iou_min, dist_max=dist_max),
        )

    @property
    def ungated_spec(self) -> MatchSpec:
        return MatchSpec(k=self.eval_k, spatial_gate=None)

    def to_dict(self) -> dict:
        payload = asdict(self)
        payload["instances_per_room"] = list(self.instances_per_room)
        return payload

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        data = dict(data)
        if "seed" not in data:
            raise ConfigError("config must supply a seed")
        if "thresholds" in data and isinstance(data["thresholds"], dict):
            data["thresholds"] = Thresholds(**data["thresholds"])
        if "noise" in data and isinstance(data["noise"], dict):
            data["noise"] = ObservationNoise(**data["noise"])
        if "instances_per_room" in data:
            data["instances_per_room"] = tuple(data["instances_per_room"])
        known = {f for f in cls.__dataclass_fields__}  # noqa: C416
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: Path) -> "ScenarioConfig":
        try:
            payload = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid config JSON: {exc.msg}") from exc
        return cls.from_dict(payload)


@dataclass(frozen=True)
class Message:
    """One transmitted query graph with its logical timestamp."""

    timestamp: int
    agent: str
    room: str
    graph: SceneGraph


@dataclass
class RunReport:
    config: dict
    merges: List[dict]
    decision_tally: Dict[str, int]
    metrics: dict
    traffic: dict
    timing: dict
    world_sizes: dict
    overlaps: Dict[str, float]
    align_reports: List[AlignmentReport] = field(default_factory=list)

    def to_payload(self, include_timing: bool = True) -> dict:
        payload = {
            "config": self.config,
            "scenario": self.config.get("scenario"),
            "domain_size": self.config.get("n_rooms"),
            "k_agents": self.config.get("k_agents"),
            "overlap": self.config.get("overlap_ratio"),
            "seed": self.config.get("seed"),
            "world_sizes": self.world_sizes,
            "overlaps": {k: round(v, 6) for k, v in sorted(self.overlaps.items())},
            "merges": [
                {k: v for k, v in m.items() if include_timing or k != "align_seconds"}
                for m in self.merges
            ],
            "decisions": self.decision_tally,
            "metrics": self.metrics,
            "traffic": self.traffic,
        }
        if include_timing:
            payload["timing"] = self.timing
        return payload

    def to_canonical_json(self) -> bytes:
        """Deterministic byte encoding: wall-clock timing fields excluded."""
        return json.dumps(
            self.to_payload(include_timing=False),
            sort_keys=True,
            separators=(",", ":"),
        ).encode("utf-8")

    def metrics_payload(self) -> dict:
        """Flat per-run metrics record (one row of the results table)."""
        return {
            "scenario": self.config.get("scenario"),
            "domain_size": self.config.get("n_rooms"),
            "k_agents": self.config.get("k_agents"),
            "overlap": self.config.get("overlap_ratio"),
            "triplet": self.metrics["ungated"]["triplet"],
            "object": self.metrics["ungated"]["object"],
            "predicate": self.metrics["ungated"]["predicate"],
            "traffic_mb": self.traffic["total_mb"],
            "align_seconds": self.timing["total_align_seconds"],
            "total_minutes": self.timing["total_minutes"],
            "seed": self.config.get("seed"),
        }


def merge_loop(
    messages: List[Message],
    reference: SceneGraph,
    thresholds: Thresholds,
    max_anchors: int,
    seed: int,
) -> Tuple[SceneGraph, List[Tuple[Message, AlignmentReport]]]:
    """Apply every message to the reference graph under the single-writer rule.

    Messages are processed in logical-timestamp order with agent-id
    tie-breaking; the reference graph is a valid scene graph between merges.
    """
    ordered = sorted(
        enumerate(messages), key=lambda im: (im[1].timestamp, im[1].agent, im[0])
    )
    outcomes: List[Tuple[Message, AlignmentReport]] = []
    for i, (_, msg) in enumerate(ordered):
        rng = Random(f"{seed}:align:{i}")
        reference, report = scene_graph_update(
            msg.graph, reference, thresholds, max_anchors, rng
        )
        outcomes.append((msg, report))
    return reference, outcomes


def _message_payload_bytes(graph: SceneGraph, traffic_mode: str) -> int:
    n_bytes = message_bytes(graph)
    if traffic_mode == TRAFFIC_GRAPHS_PLUS_POINTS:
        n_bytes += len(graph.nodes) * POINTS_PER_INSTANCE * BYTES_PER_POINT
    return n_bytes


def _exploration_pass(
    config: ScenarioConfig,
    world: GroundTruthWorld,
    pass_tag: str,
    t_offset: int,
) -> Tuple[List[Message], TrafficLog, Dict[str, float], int]:
    """Observe every room visit of one pass and log its transmission."""
    rng_traj = Random(f"{config.seed}:trajectories:{pass_tag}")
    trajectories = plan_trajectories(
        world, config.k_agents, config.overlap_ratio, rng_traj, strict=False
    )
    overlaps = measure_overlaps(trajectories)
    traffic = TrafficLog()
    messages: List[Message] = []
    max_steps = max(len(t.room_sequence) for t in trajectories)
    for step in range(max_steps):
        t = t_offset + step
        for traj in trajectories:
            if step >= len(traj.room_sequence):
                continue
            room = traj.room_sequence[step]
            rng_obs = Random(f"{config.seed}:obs:{pass_tag}:{traj.agent_id}:{step}")
            graph = observe(world, room, config.noise, traj.agent_id, t, rng_obs)
            if len(graph) == 0:
                continue  # everything dropped out; nothing to transmit
            traffic.record(
                traj.agent_id, "hub", _message_payload_bytes(graph, config.traffic_mode), t
            )
            messages.append(Message(timestamp=t, agent=traj.agent_id, room=room, graph=graph))
    return messages, traffic, overlaps, t_offset + max_steps


def _tally(outcomes: List[Tuple[Message, AlignmentReport]]) -> Dict[str, int]:
    tally = {MATCHING_NODE: 0, CONFLICTING_LABEL: 0, NEW_NODE: 0, "appended_nodes": 0}
    for msg, report in outcomes:
        if report.branch == "merged":
            for d in report.decisions:
                tally[d.kind] += 1
        else:
            tally["appended_nodes"] += len(msg.graph)
    return tally


def _merge_records(outcomes: List[Tuple[Message, AlignmentReport]]) -> List[dict]:
    records = []
    for msg, report in outcomes:
        rec = {
            "agent": msg.agent,
            "room": msg.room,
            "t": msg.timestamp,
        }
        rec.update(report.to_payload(include_timing=True))
        records.append(rec)
    return records


def _build_world(config: ScenarioConfig) -> GroundTruthWorld:
    try:
        return generate_world(
            n_rooms=config.n_rooms,
            instances_per_room=config.instances_per_room,
            n_labels=config.n_labels,
            n_predicates=config.n_predicates,
            edges_per_node=config.edges_per_node,
            seed=config.seed,
        )
    except WorldConfigError as exc:
        raise ConfigError(str(exc)) from exc


def _finish_report(
    config: ScenarioConfig,
    outcomes: List[Tuple[Message, AlignmentReport]],
    traffic: TrafficLog,
    overlaps: Dict[str, float],
    merged: SceneGraph,
    gt_world: GroundTruthWorld,
    wall_seconds: float,
) -> RunReport:
    gated = {
        task: res.to_payload()
        for task, res in eval_all(merged, gt_world.graph, config.gated_spec).items()
    }
    ungated = {
        task: res.to_payload()
        for task, res in eval_all(merged, gt_world.graph, config.ungated_spec).items()
    }
    reports = [r for _, r in outcomes]
    traffic_stats = traffic_summary(traffic, config.k_agents)
    traffic_stats["per_agent_mb"] = {
        agent: n / 1_000_000 for agent, n in sorted(traffic.per_agent_bytes.items())
    }
    return RunReport(
        config=config.to_dict(),
        merges=_merge_records(outcomes),
        decision_tally=_tally(outcomes),
        metrics={"gated": gated, "ungated": ungated},
        traffic=traffic_stats,
        timing=timing_summary(reports, wall_seconds),
        world_sizes={
            "gt_nodes": len(gt_world.graph),
            "gt_edges": len(gt_world.graph.edges),
            "merged_nodes": len(merged),
            "merged_edges": len(merged.edges),
        },
        overlaps=overlaps,
        align_reports=reports,
    )


def run_scp(config: ScenarioConfig) -> Tuple[RunReport, SceneGraph, GroundTruthWorld]:
    """One static exploration pass merged into an initially empty reference."""
    if config.scenario != SCENARIO_SCP:
        raise ConfigError("run_scp requires scenario='scp'")
    start = time.perf_counter()
    world = _build_world(config)
    messages, traffic, overlaps, _ = _exploration_pass(config, world, "pass1", 0)
    reference = SceneGraph(frame_tag="global")
    merged, outcomes = merge_loop(
        messages, reference, config.thresholds, config.max_anchors, config.seed
    )
    report = _finish_report(
        config, outcomes, traffic, overlaps, merged, world,
        time.perf_counter() - start,
    )
    return report, merged, world


def run_ldcp(
    config: ScenarioConfig, schedule: Optional[DynamicsSchedule] = None
) -> Tuple[RunReport, SceneGraph, GroundTruthWorld, GroundTruthWorld]:
    """Static pass, dynamics, then a rescan pass into the same reference graph."""
    if config.scenario != SCENARIO_LDCP:
        raise ConfigError("run_ldcp requires scenario='ldcp'")
    start = time.perf_counter()
    world = _build_world(config)
    messages1, traffic, overlaps, t_next = _exploration_pass(config, world, "pass1", 0)
    reference = SceneGraph(frame_tag="global")
    merged, outcomes = merge_loop(
        messages1, reference, config.thresholds, config.max_anchors, config.seed
    )

    if schedule is None:
        schedule = sample_schedule(
            world,
            config.dynamics_proportions,
            Random(f"{config.seed}:schedule"),
        )
    world_after = apply_dynamics(world, schedule)

    messages2, traffic2, overlaps2, _ = _exploration_pass(
        config, world_after, "pass2", t_next
    )
    merged, outcomes2 = merge_loop(
        messages2, merged, config.thresholds, config.max_anchors, config.seed + 1
    )
    outcomes.extend(outcomes2)
    traffic.entries.extend(traffic2.entries)
    overlaps = {
        agent: (overlaps[agent] + overlaps2[agent]) / 2.0 for agent in overlaps
    }
    report = _finish_report(
        config, outcomes, traffic, overlaps, merged, world_after,
        time.perf_counter() - start,
    )
    report.world_sizes["dynamics"] = {
        "moved": len(schedule.moved),
        "removed": len(schedule.removed),
        "changed": len(schedule.changed),
        "appeared": len(schedule.appeared),
    }
    return report, merged, world, world_after


def run_scenario(config: ScenarioConfig):
    if config.scenario == SCENARIO_SCP:
        report, merged, world = run_scp(config)
        return report, merged, world, world
    report, merged, world, world_after = run_ldcp(config)
    return report, merged, world, world_after


def write_outputs(
    out_dir: Path,
    report: RunReport,
    merged: SceneGraph,
    world: GroundTruthWorld,
    world_after: Optional[GroundTruthWorld] = None,
) -> None:
    from .worldsim import save_world

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "run_report.json").write_bytes(report.to_canonical_json())
    (out / "metrics.json").write_text(
        json.dumps(report.metrics_payload(), indent=2, sort_keys=True) + "\n"
    )
    (out / "merged_graph.json").write_bytes(serialize_graph(merged))
    save_world(world, out / "world.json")
    if world_after is not None and world_after is not world:
        save_world(world_after, out / "world_after_dynamics.json")
    (out / "timing.json").write_text(
        json.dumps(report.timing, indent=2, sort_keys=True) + "\n"
    )
