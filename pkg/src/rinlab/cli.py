"""Command-line frontend: build/analyze/layout/serve/bench/synth."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .analytics import (
    ClosenessVariant,
    CommunityMethod,
    Measure,
    betweenness,
    closeness,
    community_detect,
    degree,
    pagerank,
)
from .bench import run_benchmark, write_csv
from .graph_io import GraphFormat, export_graph, load_graph_json
from .layout import Layout3D, LayoutKind, LayoutParams, maxent_stress_layout
from .rin import DistanceCriterion, RinConfig, build_rin
from .synth import helix_bundle_trajectory, walk_trajectory
from .trajectory import (
    Trajectory,
    export_traj_json,
    parse_pdb,
    parse_traj_json,
    select_protein_residues,
)

CRITERIA = {c.value: c for c in DistanceCriterion}
MEASURES = [m.value for m in Measure] + [c.value for c in CommunityMethod]


def _load_trajectory(path: str, fmt: str | None, include_hydrogens: bool,
                     permissive: bool) -> Trajectory:
    raw = Path(path).read_bytes()
    if fmt == "json" or (fmt is None and path.endswith(".json")):
        traj = parse_traj_json(raw)
    else:
        traj = parse_pdb(raw)
    return select_protein_residues(
        traj, include_hydrogens=include_hydrogens, permissive=permissive
    )


def _cmd_build(args) -> int:
    traj = _load_trajectory(args.input, args.format, args.include_hydrogens,
                            args.permissive)
    config = RinConfig(CRITERIA[args.criterion], args.cutoff,
                       exclude_backbone_neighbors=args.exclude_backbone)
    rin = build_rin(traj.frames[args.frame], traj.topology, config)
    fmt = GraphFormat.GRAPHML if args.out.endswith(".graphml") else GraphFormat.JSON_GRAPH
    export_graph(rin, fmt, args.out)
    print(f"wrote {args.out}: {rin.node_count} nodes, {rin.n_edges} edges "
          f"({args.criterion} @ {args.cutoff} Å, frame {args.frame})")
    return 0


def _cmd_analyze(args) -> int:
    rin = load_graph_json(Path(args.graph).read_bytes())
    token = args.measure
    if token in (CommunityMethod.PLM.value, CommunityMethod.LEIDEN.value):
        part = community_detect(rin, CommunityMethod(token), gamma=args.gamma,
                                seed=args.seed)
        doc = {
            "measure": token,
            "gamma": args.gamma,
            "labels": part.labels.tolist(),
            "community_count": part.community_count,
        }
    else:
        fn = {
            Measure.DEGREE.value: lambda: degree(rin),
            Measure.CLOSENESS.value: lambda: closeness(rin, ClosenessVariant.HARMONIC),
            Measure.BETWEENNESS.value: lambda: betweenness(rin),
            Measure.PAGERANK.value: lambda: pagerank(rin),
            Measure.PAGERANK_NORMALIZED.value: lambda: pagerank(rin, normalized=True),
        }[token]
        scores = fn()
        doc = {"measure": token, "values": scores.values.tolist()}
    Path(args.out).write_text(json.dumps(doc))
    print(f"wrote {args.out}: {token} over {rin.node_count} nodes")
    return 0


def _cmd_layout(args) -> int:
    rin = load_graph_json(Path(args.graph).read_bytes())
    params = LayoutParams(seed=args.seed)
    warm = None
    if args.warm:
        prev = json.loads(Path(args.warm).read_text())
        warm = Layout3D(np.asarray(prev["coords"], dtype=np.float64),
                        LayoutKind.MAXENT_STRESS)
    lay = maxent_stress_layout(rin, params, warm_start=warm)
    doc = {
        "kind": lay.kind.value,
        "params": {
            "target_edge_length": params.target_edge_length,
            "alpha_init": params.alpha_init,
            "alpha_decay": params.alpha_decay,
            "alpha_min": params.alpha_min,
            "max_rounds": params.max_rounds,
            "tol": params.tol,
            "seed": params.seed,
        },
        "coords": lay.coords.tolist(),
    }
    Path(args.out).write_text(json.dumps(doc))
    print(f"wrote {args.out}: {len(lay)} positions")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    static = args.ui if args.ui else _default_ui_dir()
    app = create_app(data_dir=args.data, persist_dir=args.persist, static_dir=static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _default_ui_dir() -> str | None:
    for candidate in (
        Path(__file__).resolve().parent / "ui",
        Path.cwd() / "frontend" / "dist",
    ):
        if candidate.is_dir():
            return str(candidate)
    return None


def _cmd_bench(args) -> int:
    traj = _load_trajectory(args.input, args.format, args.include_hydrogens,
                            permissive=False)
    cutoffs = [float(c) for c in args.cutoffs.split(",")]
    measures = [m.strip() for m in args.measures.split(",")]
    for m in measures:
        if m not in MEASURES:
            print(f"unknown measure {m!r} (choose from {', '.join(MEASURES)})",
                  file=sys.stderr)
            return 2
    frames = [int(f) for f in args.frames.split(",")]
    records = run_benchmark(
        traj,
        RinConfig(CRITERIA[args.criterion], cutoffs[0]),
        cutoffs=cutoffs,
        measures=measures,
        frames=frames,
        repetitions=args.reps,
        protein_id=args.protein_id,
        cold=args.cold,
    )
    write_csv(records, args.out)
    print(f"wrote {args.out}: {len(records)} cells "
          f"({len(cutoffs)} cutoffs × {len(measures)} measures × 3 event kinds)")
    return 0


def _cmd_synth(args) -> int:
    if args.kind == "walk":
        traj = walk_trajectory(args.residues, n_frames=args.frames, seed=args.seed)
    else:
        traj = helix_bundle_trajectory(n_frames=args.frames, seed=args.seed)
    Path(args.out).write_text(export_traj_json(traj))
    print(f"wrote {args.out}: {traj.n_residues} residues × {traj.n_frames} frames")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rin",
        description="Residue interaction network exploration toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a RIN from a trajectory frame")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["pdb", "json"], default=None)
    p.add_argument("--criterion", choices=sorted(CRITERIA), default="min")
    p.add_argument("--cutoff", type=float, required=True)
    p.add_argument("--frame", type=int, default=0)
    p.add_argument("--exclude-backbone", action="store_true")
    p.add_argument("--include-hydrogens", action="store_true")
    p.add_argument("--permissive", action="store_true",
                   help="keep non-standard residues that have a CA atom")
    p.add_argument("--out", required=True,
                   help="output file (.graphml selects GraphML, else JSON)")
    p.set_defaults(fn=_cmd_build)

    p = sub.add_parser("analyze", help="compute a measure over an exported graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--measure", choices=MEASURES, required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("layout", help="maxent-stress 3D layout of an exported graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--warm", default=None, help="layout JSON to warm-start from")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_layout)

    p = sub.add_parser("serve", help="run the interactive session server")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data", default=None, help="directory for server-side trajectories")
    p.add_argument("--persist", default=None,
                   help="directory to dump session snapshots on shutdown")
    p.add_argument("--ui", default=None, help="static UI bundle directory")
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("bench", help="phase-timing benchmark over a trajectory")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["pdb", "json"], default=None)
    p.add_argument("--criterion", choices=sorted(CRITERIA), default="min")
    p.add_argument("--cutoffs", required=True, help="comma-separated Å values")
    p.add_argument("--measures", required=True, help="comma-separated measure names")
    p.add_argument("--frames", required=True, help="comma-separated frame indices")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--out", required=True)
    p.add_argument("--cold", action="store_true",
                   help="disable layout warm starts (cold numbers)")
    p.add_argument("--protein-id", default="synthetic")
    p.add_argument("--include-hydrogens", action="store_true")
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("synth", help="generate a synthetic trajectory")
    p.add_argument("--kind", choices=["walk", "helix"], default="walk")
    p.add_argument("--residues", type=int, default=200)
    p.add_argument("--frames", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
