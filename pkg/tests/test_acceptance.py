"""Acceptance suite: one test per criterion, stated tolerances pinned.

A summary block at the end of the pytest run prints one PASS/FAIL line per
criterion (see conftest). Performance budgets target the default kernel
backend on commodity hardware.
"""
import random
import time
from itertools import combinations

import numpy as np
import pytest

from rinlab.analytics import (
    ClosenessVariant,
    CommunityMethod,
    betweenness,
    closeness,
    community_detect,
    modularity,
    nmi,
    pagerank,
)
from rinlab.bench import BenchEventKind, run_benchmark
from rinlab.layout import (
    Layout3D,
    LayoutKind,
    LayoutParams,
    maxent_step,
    maxent_stress_layout,
    stress_energy,
)
from rinlab.rin import (
    DistanceCriterion,
    RinConfig,
    apply_cutoff_change,
    apply_frame_change,
    build_rin,
)
from rinlab.session import (
    EventKind,
    MeasureSelector,
    UpdateEvent,
    create_session,
    handle_event,
    snapshot,
)
from rinlab.synth import helix_bundle_trajectory, walk_trajectory

from conftest import make_rin, random_connected_graph, random_graph
from oracles import (
    best_modularity_partition,
    oracle_betweenness,
    oracle_closeness,
    oracle_modularity,
    oracle_nmi,
    oracle_stress_energy,
)
from test_analytics import partition_from

MIN_DIST = DistanceCriterion.MINIMUM_ATOM_DISTANCE
ALL_CRITERIA = list(DistanceCriterion)


def edge_set(rin):
    return set(zip(rin.edges_i.tolist(), rin.edges_j.tolist()))


# --- exact equivalences (no tolerance) ------------------------------------

def test_incremental_updates_match_full_rebuild():
    """100 random (cutoff, frame) transitions == fresh build, in < 10 s."""
    traj = walk_trajectory(200, n_frames=10, seed=3)
    rng = random.Random(17)
    t0 = time.perf_counter()
    config = RinConfig(MIN_DIST, 5.0)
    frame = traj.frames[0]
    rin = build_rin(frame, traj.topology, config)
    for _ in range(100):
        if rng.random() < 0.5:
            cutoff = rng.uniform(3.0, 9.0)
            rin, delta = apply_cutoff_change(rin, frame, traj.topology, cutoff)
            added = {tuple(p) for p in delta.added.tolist()}
            removed = {tuple(p) for p in delta.removed.tolist()}
            assert not (added & removed)
        else:
            frame = traj.frames[rng.randrange(traj.n_frames)]
            rin = apply_frame_change(rin.config, traj.topology, frame)
        fresh = build_rin(frame, traj.topology, rin.config)
        assert edge_set(rin) == edge_set(fresh)
    assert time.perf_counter() - t0 < 10.0


@pytest.mark.parametrize("criterion", ALL_CRITERIA, ids=lambda c: c.value)
def test_cutoff_monotonicity_nested_edge_sets(criterion):
    """Edge sets nested over cutoffs 4.0, 4.5, ..., 8.5 Å for every criterion."""
    traj = walk_trajectory(150, n_frames=1, seed=5)
    frame, top = traj.frames[0], traj.topology
    previous = set()
    for cutoff in np.arange(4.0, 8.51, 0.5):
        current = edge_set(build_rin(frame, top, RinConfig(criterion, float(cutoff))))
        assert previous <= current
        previous = current


# --- oracle equivalences ----------------------------------------------------

def test_betweenness_matches_enumeration_oracle():
    """100 random graphs, n ≤ 7, within 1e-9 of path enumeration."""
    rng = random.Random(99)
    for _ in range(100):
        n = rng.randint(2, 7)
        edges = random_connected_graph(n, 0.35, rng)
        got = betweenness(make_rin(n, edges)).values
        np.testing.assert_allclose(got, oracle_betweenness(n, edges), atol=1e-9)


def test_closeness_modularity_nmi_stress_match_naive_oracles():
    """Naive-oracle agreement within 1e-12 on random instances, n ≤ 10."""
    rng = random.Random(101)
    for _ in range(40):
        n = rng.randint(2, 10)
        edges = random_graph(n, 0.35, rng)
        rin = make_rin(n, edges)
        np.testing.assert_allclose(
            closeness(rin, ClosenessVariant.HARMONIC).values,
            oracle_closeness(n, edges, "harmonic"), atol=1e-12)
        np.testing.assert_allclose(
            closeness(rin, ClosenessVariant.COMPONENT_RESTRICTED).values,
            oracle_closeness(n, edges, "component"), atol=1e-12)
        labels = [rng.randrange(3) for _ in range(n)]
        assert modularity(rin, partition_from(labels), 1.1) == pytest.approx(
            oracle_modularity(n, edges, labels, 1.1), abs=1e-12)
        other = [rng.randrange(4) for _ in range(n)]
        assert nmi(partition_from(labels), partition_from(other)) == pytest.approx(
            oracle_nmi(labels, other), abs=1e-12)
        coords = np.array([[rng.uniform(-2, 2) for _ in range(3)] for _ in range(n)])
        lay = Layout3D(coords, LayoutKind.MAXENT_STRESS)
        for alpha in (0.0, 0.4):
            assert stress_energy(rin, lay, LayoutParams(), alpha) == pytest.approx(
                oracle_stress_energy(n, edges, coords.tolist(), 1.0, alpha), abs=1e-12)


def test_pagerank_sums_and_cycle_uniformity():
    """Raw scores sum to 1 within 1e-8; cycle graph uniform within 1e-8."""
    rng = random.Random(103)
    for _ in range(20):
        n = rng.randint(2, 30)
        rin = make_rin(n, random_graph(n, 0.2, rng))
        assert pagerank(rin).values.sum() == pytest.approx(1.0, abs=1e-8)
    n = 10
    cycle = make_rin(n, [(i, (i + 1) % n) for i in range(n)])
    np.testing.assert_allclose(pagerank(cycle).values, 1.0 / n, atol=1e-8)


@pytest.mark.parametrize("method", list(CommunityMethod), ids=lambda m: m.value)
def test_community_detection_recovers_two_clique_optimum(method):
    """Exhaustive 8-node modularity optimum recovered on the two-clique instance."""
    edges = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    edges += [(i, j) for i in range(4, 8) for j in range(i + 1, 8)]
    edges.append((0, 4))
    rin = make_rin(8, edges)
    part = community_detect(rin, method=method, gamma=1.0)
    got = {frozenset(np.flatnonzero(part.labels == c).tolist())
           for c in range(part.community_count)}
    best_q, best_blocks = best_modularity_partition(8, edges, 1.0)
    assert got == set(best_blocks)
    assert modularity(rin, part, 1.0) == pytest.approx(best_q, abs=1e-12)


# --- numerical/layout properties -------------------------------------------

def test_layout_stress_monotone_per_round():
    """Stress term non-increasing within 1e-9 per round at fixed α."""
    rng = random.Random(7)
    for _ in range(4):
        n = rng.randint(5, 20)
        rin = make_rin(n, random_graph(n, 0.3, rng))
        params = LayoutParams(seed=11)
        coords = np.random.default_rng(11).random((n, 3))
        prev = stress_energy(rin, Layout3D(coords, LayoutKind.MAXENT_STRESS), params, 0.0)
        for _ in range(25):
            coords = maxent_step(rin, coords, params, alpha=0.0)
            cur = stress_energy(rin, Layout3D(coords, LayoutKind.MAXENT_STRESS), params, 0.0)
            assert cur <= prev + 1e-9
            prev = cur


def test_layout_k4_spread_and_bit_determinism():
    """K4 spread ≤ 1.05 at convergence; same seed → bit-identical coords."""
    rin = make_rin(4, list(combinations(range(4), 2)))
    params = LayoutParams(seed=3, max_rounds=200, tol=1e-6)
    lay = maxent_stress_layout(rin, params)
    dists = [np.linalg.norm(lay.coords[i] - lay.coords[j])
             for i, j in combinations(range(4), 2)]
    assert max(dists) / min(dists) <= 1.05
    # kernels are single-threaded: thread count cannot enter; repeat runs must agree bitwise
    rin2 = make_rin(30, random_graph(30, 0.15, random.Random(13)))
    a = maxent_stress_layout(rin2, LayoutParams(seed=21))
    b = maxent_stress_layout(rin2, LayoutParams(seed=21))
    np.testing.assert_array_equal(a.coords, b.coords)


# --- performance at desk scale ----------------------------------------------

@pytest.fixture(scope="module")
def desk_scale():
    """~1000 nodes / ~6000 edges synthetic RIN behind a live session."""
    traj = walk_trajectory(1000, n_frames=3, seed=1)
    config = RinConfig(MIN_DIST, 4.5)
    rin = build_rin(traj.frames[0], traj.topology, config)
    assert 4500 <= rin.n_edges <= 8500, f"calibration drifted: {rin.n_edges} edges"
    return traj, config, rin


def _median_time(fn, reps=3):
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return sorted(times)[len(times) // 2]


def test_perf_measure_recompute_under_100ms(desk_scale):
    """Every measure recomputes in < 100 ms on the ~1000-node RIN."""
    _, _, rin = desk_scale
    measures = {
        "degree": lambda: __import__("rinlab.analytics", fromlist=["degree"]).degree(rin),
        "closeness": lambda: closeness(rin),
        "betweenness": lambda: betweenness(rin),
        "pagerank": lambda: pagerank(rin),
        "pagerank-norm": lambda: pagerank(rin, normalized=True),
        "plm": lambda: community_detect(rin, CommunityMethod.PLM),
        "leiden": lambda: community_detect(rin, CommunityMethod.LEIDEN),
    }
    for name, fn in measures.items():
        elapsed = _median_time(fn)
        assert elapsed < 0.100, f"{name} took {elapsed * 1e3:.1f} ms"


def test_perf_cold_layout_under_2s(desk_scale):
    """Cold maxent-stress layout < 2 s on the ~1000-node RIN."""
    _, _, rin = desk_scale
    elapsed = _median_time(lambda: maxent_stress_layout(rin, LayoutParams(seed=2)))
    assert elapsed < 2.0, f"cold layout took {elapsed:.2f} s"


def test_perf_frame_change_cycle_under_1500ms(desk_scale):
    """Full server-side frame-change cycle with a measure selected < 1.5 s."""
    traj, config, _ = desk_scale
    state = create_session(traj, config, MeasureSelector.from_token("closeness"))
    frames = [1, 2, 1]
    times = []
    for f in frames:
        state, timing = handle_event(state, UpdateEvent(EventKind.SET_FRAME, f))
        times.append(timing.total_ms)
    median = sorted(times)[1]
    assert median < 1500.0, f"frame cycle took {median:.0f} ms"


def test_perf_benchmark_csv_layout_dominates_edge_update(desk_scale):
    """Cutoff-switch cells report layout_ms > edge_update_ms (qualitative)."""
    traj, config, _ = desk_scale
    records = run_benchmark(
        traj, config, cutoffs=[4.5, 5.5], measures=["closeness"], frames=[0, 1],
        repetitions=3, protein_id="walk1000",
    )
    cutoff_cells = [r for r in records if r.event_kind is BenchEventKind.CUTOFF_SWITCH]
    assert cutoff_cells
    for rec in cutoff_cells:
        assert rec.layout_ms > rec.edge_update_ms, (
            f"layout {rec.layout_ms:.2f} ms vs edge {rec.edge_update_ms:.2f} ms"
        )


# --- qualitative three-helix analogue ----------------------------------------

def test_helix_bundle_communities_contiguous():
    """PLM(γ=1) on the 4.5 Å min-dist RIN of a synthetic 3-helix bundle:
    2..6 communities, ≥ 70% of residues in sequence-contiguous communities."""
    traj = helix_bundle_trajectory(seed=0)
    rin = build_rin(traj.frames[0], traj.topology, RinConfig(MIN_DIST, 4.5))
    part = community_detect(rin, CommunityMethod.PLM, gamma=1.0)
    assert 2 <= part.community_count <= 6
    labels = part.labels
    contiguous_residues = 0
    for c in range(part.community_count):
        members = np.flatnonzero(labels == c)
        if len(members) == members[-1] - members[0] + 1:  # contiguity oracle
            contiguous_residues += len(members)
    assert contiguous_residues / len(labels) >= 0.70


# --- state machine ------------------------------------------------------------

def test_state_machine_path_independence():
    """Any event sequence's final snapshot == fresh-session snapshot for the
    final parameters (delta buffer excluded)."""
    traj = walk_trajectory(40, n_frames=4, seed=9)
    rng = random.Random(307)
    measures = ["degree", "closeness", "betweenness", "pagerank", "plm", "leiden"]
    keys = ("nodes", "edges", "protein_layout", "maxent_layout", "scores", "colors")
    for _ in range(8):
        state = create_session(traj, RinConfig(MIN_DIST, 5.0),
                               MeasureSelector.from_token("degree"))
        for _ in range(rng.randint(3, 12)):
            kind = rng.choice(["set_frame", "set_cutoff", "set_criterion",
                               "set_measure", "toggle_auto", "toggle_delta",
                               "recompute"])
            value = {
                "set_frame": lambda: rng.randrange(traj.n_frames),
                "set_cutoff": lambda: round(rng.uniform(4.0, 8.5), 1),
                "set_criterion": lambda: rng.choice(["min", "calpha", "com"]),
                "set_measure": lambda: rng.choice(measures),
                "toggle_auto": lambda: None,
                "toggle_delta": lambda: None,
                "recompute": lambda: None,
            }[kind]()
            state, _ = handle_event(state, UpdateEvent(EventKind(kind), value))
        if state.stale:
            state, _ = handle_event(state, UpdateEvent(EventKind.RECOMPUTE))
        if state.delta_view:
            state, _ = handle_event(state, UpdateEvent(EventKind.TOGGLE_DELTA, False))
        fresh = create_session(traj, state.config, state.measure)
        fresh, _ = handle_event(fresh, UpdateEvent(EventKind.SET_FRAME, state.frame_index))
        got, want = snapshot(state), snapshot(fresh)
        for key in keys:
            assert got[key] == want[key], f"snapshot field {key} diverged"
