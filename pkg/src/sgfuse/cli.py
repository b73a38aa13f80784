"""Command-line surface.

Subcommands: ``generate`` (emit a world file), ``simulate`` (run a scenario
from a config file), ``align`` (one-shot merge of a query graph into a
reference graph), ``eval`` (score a predicted graph against ground truth),
``ingest-3dssg`` (dataset adapter), and ``report`` (aggregate per-run metrics
into a CSV plus figures).

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from random import Random
from typing import List, Optional, Sequence

from .alignment import Thresholds, scene_graph_update
from .graph import (
    GraphFormatError,
    deserialize_graph,
    serialize_graph,
)
from .harness import (
    ConfigError,
    ScenarioConfig,
    run_scenario,
    write_outputs,
)
from .metrics import MatchSpec, SpatialGate, eval_all
from .worldsim import (
    WorldConfigError,
    generate_world,
    ingest_3dssg,
    save_world,
)

USAGE_ERROR = 1
DATA_ERROR = 2

CSV_COLUMNS = [
    "scenario", "domain_size", "k_agents", "overlap",
    "triplet_r", "triplet_p", "triplet_f1",
    "object_r", "object_p", "object_f1",
    "predicate_r", "predicate_p", "predicate_f1",
    "traffic_mb", "align_seconds", "total_minutes", "seed",
]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1 on usage errors, not 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sgfuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    gen = sub.add_parser("generate", help="generate a synthetic world file")
    gen.add_argument("--rooms", type=int, default=47)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--instances", type=int, nargs=2, default=(31, 37),
                     metavar=("LO", "HI"))
    gen.add_argument("--labels", type=int, default=40)
    gen.add_argument("--predicates", type=int, default=8)
    gen.add_argument("--edges-per-node", type=float, default=3.5)
    gen.add_argument("--out", type=Path, default=Path("world.json"))

    sim = sub.add_parser("simulate", help="run an SCP or LDCP scenario")
    sim.add_argument("--config", type=Path, required=True)
    sim.add_argument("--seed", type=int, default=None, help="override config seed")
    sim.add_argument("--out", type=Path, default=None, help="output directory")
    sim.add_argument("--scenario", choices=["scp", "ldcp"], default=None)
    sim.add_argument("--rooms", type=int, default=None)
    sim.add_argument("--agents", type=int, default=None)
    sim.add_argument("--overlap", type=float, default=None)
    sim.add_argument("--traffic-mode", choices=["graphs", "points"], default=None)

    aln = sub.add_parser("align", help="merge one query graph into a reference graph")
    aln.add_argument("--config", type=Path, default=None)
    aln.add_argument("-q", "--query", type=Path, required=True)
    aln.add_argument("-r", "--reference", type=Path, required=True)
    aln.add_argument("--out", type=Path, default=Path("."))
    aln.add_argument("--seed", type=int, default=None)

    ev = sub.add_parser("eval", help="score a predicted graph against ground truth")
    ev.add_argument("--pred", type=Path, required=True)
    ev.add_argument("--gt", type=Path, required=True)
    ev.add_argument("--k", type=int, default=1)
    ev.add_argument("--iou-min", type=float, default=0.25)
    ev.add_argument("--dist-max", type=float, default=1.5)
    ev.add_argument("--out", type=Path, default=None)

    ing = sub.add_parser("ingest-3dssg", help="convert dataset annotations to a world file")
    ing.add_argument("--objects", type=Path, required=True)
    ing.add_argument("--relationships", type=Path, required=True)
    ing.add_argument("--out", type=Path, default=Path("world.json"))

    rep = sub.add_parser("report", help="aggregate run metrics into CSV and figures")
    rep.add_argument("inputs", type=Path, nargs="+",
                     help="metrics.json files or run output directories")
    rep.add_argument("--out", type=Path, default=Path("report"))
    rep.add_argument("--no-figures", action="store_true")

    return parser


def _cmd_generate(args) -> int:
    world = generate_world(
        n_rooms=args.rooms,
        instances_per_room=tuple(args.instances),
        n_labels=args.labels,
        n_predicates=args.predicates,
        edges_per_node=args.edges_per_node,
        seed=args.seed,
    )
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_world(world, args.out)
    print(f"wrote {args.out} ({len(world.graph)} nodes, {len(world.graph.edges)} edges)")
    return 0


def _cmd_simulate(args) -> int:
    config = ScenarioConfig.from_file(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.scenario is not None:
        config.scenario = args.scenario
    if args.rooms is not None:
        config.n_rooms = args.rooms
    if args.agents is not None:
        config.k_agents = args.agents
    if args.overlap is not None:
        config.overlap_ratio = args.overlap
    if args.traffic_mode is not None:
        config.traffic_mode = (
            "graphs_only" if args.traffic_mode == "graphs" else "graphs_plus_points"
        )
    out_dir = args.out or Path(config.out_dir or "runs") / (
        f"{config.scenario}_{config.n_rooms}r_seed{config.seed}"
    )
    report, merged, world, world_after = run_scenario(config)
    write_outputs(out_dir, report, merged, world, world_after)
    summary = report.metrics_payload()
    print(json.dumps(summary, indent=2, sort_keys=True))
    print(f"outputs written to {out_dir}")
    return 0


def _cmd_align(args) -> int:
    thresholds = Thresholds()
    max_anchors = 5
    seed = 0
    if args.config is not None:
        config = ScenarioConfig.from_file(args.config)
        thresholds = config.thresholds
        max_anchors = config.max_anchors
        seed = config.seed
    if args.seed is not None:
        seed = args.seed
    query = deserialize_graph(args.query.read_bytes())
    reference = deserialize_graph(args.reference.read_bytes())
    merged, report = scene_graph_update(
        query, reference, thresholds, max_anchors, Random(f"{seed}:align:0")
    )
    args.out.mkdir(parents=True, exist_ok=True)
    merged_path = args.out / "merged.json"
    merged_path.write_bytes(serialize_graph(merged))
    (args.out / "align_report.json").write_text(
        json.dumps(report.to_payload(include_timing=False), indent=2, sort_keys=True)
        + "\n"
    )
    print(f"branch={report.branch} map_size={report.map_size} -> {merged_path}")
    return 0


def _cmd_eval(args) -> int:
    pred = deserialize_graph(args.pred.read_bytes())
    gt = deserialize_graph(args.gt.read_bytes())
    gated = MatchSpec(
        k=args.k, spatial_gate=SpatialGate(iou_min=args.iou_min, dist_max=args.dist_max)
    )
    ungated = MatchSpec(k=args.k, spatial_gate=None)
    payload = {
        "gated": {t: r.to_payload() for t, r in eval_all(pred, gt, gated).items()},
        "ungated": {t: r.to_payload() for t, r in eval_all(pred, gt, ungated).items()},
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out is not None:
        args.out.write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _cmd_ingest(args) -> int:
    world = ingest_3dssg(args.objects, args.relationships)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_world(world, args.out)
    print(f"wrote {args.out} ({len(world.graph)} nodes, {len(world.graph.edges)} edges)")
    return 0


def _load_metrics_rows(inputs: Sequence[Path]) -> List[dict]:
    rows = []
    for path in inputs:
        path = Path(path)
        if path.is_dir():
            path = path / "metrics.json"
        if not path.exists():
            raise GraphFormatError(f"no metrics file at {path}")
        try:
            rows.append(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"invalid metrics file {path}: {exc.msg}") from exc
    rows.sort(key=lambda r: (str(r.get("scenario")), r.get("domain_size", 0), r.get("seed", 0)))
    return rows


def _cmd_report(args) -> int:
    rows = _load_metrics_rows(args.inputs)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / "results.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([
                row["scenario"], row["domain_size"], row["k_agents"], row["overlap"],
                row["triplet"]["r"], row["triplet"]["p"], row["triplet"]["f1"],
                row["object"]["r"], row["object"]["p"], row["object"]["f1"],
                row["predicate"]["r"], row["predicate"]["p"], row["predicate"]["f1"],
                row["traffic_mb"], row["align_seconds"], row["total_minutes"],
                row["seed"],
            ])
    written = [csv_path]
    if not args.no_figures:
        from .plotting import render_report_figures

        written.extend(render_report_figures(rows, args.out))
    for path in written:
        print(f"wrote {path}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "simulate": _cmd_simulate,
    "align": _cmd_align,
    "eval": _cmd_eval,
    "ingest-3dssg": _cmd_ingest,
    "report": _cmd_report,
}


def cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return USAGE_ERROR
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, GraphFormatError, WorldConfigError) as exc:
        print(f"sgfuse: data error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except FileNotFoundError as exc:
        print(f"sgfuse: data error: {exc}", file=sys.stderr)
        return DATA_ERROR


def main() -> None:
    raise SystemExit(cli())


if __name__ == "__main__":
    main()
