#!/usr/bin/env python3
"""Compare the compiled kernel backend against the pure numpy/scipy fallback.

Times the hot kernels on a synthetic ~1000-node RIN (and a larger layout
instance) under each available backend:

    python benchmarks/compare_backends.py [--residues N] [--reps R]
"""
import argparse
import os
import time

import numpy as np

from rinlab import _kernels
from rinlab.analytics import CommunityMethod, betweenness, closeness, community_detect, pagerank
from rinlab.layout import LayoutParams, maxent_step, maxent_stress_layout
from rinlab.rin import DistanceCriterion, RinConfig, build_rin
from rinlab.synth import walk_trajectory


def median_ms(fn, reps):
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return sorted(times)[len(times) // 2]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--residues", type=int, default=1000)
    parser.add_argument("--frames", type=int, default=2)
    parser.add_argument("--cutoff", type=float, default=4.5)
    parser.add_argument("--reps", type=int, default=5)
    args = parser.parse_args()

    traj = walk_trajectory(args.residues, n_frames=args.frames, seed=1)
    frame, top = traj.frames[0], traj.topology
    config = RinConfig(DistanceCriterion.MINIMUM_ATOM_DISTANCE, args.cutoff)

    backends = _kernels.available_backends()
    print(f"residues={args.residues}  cutoff={args.cutoff}  reps={args.reps}")
    print(f"backends: {', '.join(backends)}\n")

    results = {}
    for backend in backends:
        os.environ["RINLAB_KERNELS"] = backend  # route default dispatch too
        rin = build_rin(frame, top, config, backend=backend)
        params = LayoutParams(seed=2)
        coords = np.random.default_rng(2).random((rin.node_count, 3))
        cases = {
            "build_rin (atom grid)": lambda b=backend: build_rin(frame, top, config, backend=b),
            "betweenness": lambda b=backend: betweenness(rin, backend=b),
            "closeness": lambda b=backend: closeness(rin, backend=b),
            "pagerank": lambda: pagerank(rin),
            "plm": lambda: community_detect(rin, CommunityMethod.PLM),
            "maxent round (exact)": lambda b=backend: maxent_step(rin, coords, params, 0.1, b),
            "maxent layout (cold)": lambda b=backend: maxent_stress_layout(rin, params, backend=b),
        }
        results[backend] = {
            name: median_ms(fn, args.reps) for name, fn in cases.items()
        }
        print(f"[{backend}] n={rin.node_count} m={rin.n_edges}")
    os.environ.pop("RINLAB_KERNELS", None)

    names = list(next(iter(results.values())))
    width = max(len(n) for n in names) + 2
    header = "kernel".ljust(width) + "".join(f"{b:>12}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print("\n" + header)
    print("-" * len(header))
    for name in names:
        row = name.ljust(width)
        for b in backends:
            row += f"{results[b][name]:>10.1f}ms"
        if len(backends) > 1 and results[backends[0]][name] > 0:
            row += f"{results[backends[1]][name] / results[backends[0]][name]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
