import random

import numpy as np
import pytest

from rinlab.errors import MissingCAlpha
from rinlab.rin import (
    DistanceCriterion,
    RinConfig,
    apply_cutoff_change,
    apply_frame_change,
    build_rin,
    center_of_mass,
    connected_components,
    edge_delta_between,
    residue_distance,
)
from conftest import random_residue_traj, single_atom_traj, toy_traj
from oracles import (
    oracle_components,
    oracle_min_distance_edges,
    oracle_point_edges,
)

MIN_DIST = DistanceCriterion.MINIMUM_ATOM_DISTANCE
CALPHA = DistanceCriterion.CALPHA
COM = DistanceCriterion.CENTER_OF_MASS


def grouped_coords(traj, frame_index=0):
    """Per-residue atom coordinate lists for the brute-force oracles."""
    coords = traj.frames[frame_index].coords
    return [
        [tuple(coords[ai]) for ai in res.atom_indices] for res in traj.residues
    ]


def edge_set(rin):
    return set(zip(rin.edges_i.tolist(), rin.edges_j.tolist()))


class TestResidueDistance:
    def test_single_atoms_all_criteria_agree(self):
        traj = single_atom_traj([(0, 0, 0), (3, 4, 0)])
        f, top = traj.frames[0], traj.topology
        for crit in (CALPHA, COM, MIN_DIST):
            assert residue_distance(f, top, 0, 1, crit) == pytest.approx(5.0)
            assert residue_distance(f, top, 1, 0, crit) == pytest.approx(5.0)

    def test_min_distance_example(self):
        traj = toy_traj(
            [[("CA", "C"), ("CB", "C")], [("CA", "C")]],
            [[[0, 0, 0], [10, 0, 0], [4, 0, 0]]],
        )
        f, top = traj.frames[0], traj.topology
        assert residue_distance(f, top, 0, 1, MIN_DIST) == pytest.approx(4.0)

    def test_equal_mass_center_of_mass_example(self):
        traj = toy_traj(
            [[("CA", "C"), ("CB", "C")], [("CA", "C")]],
            [[[0, 0, 0], [10, 0, 0], [4, 0, 0]]],
        )
        f, top = traj.frames[0], traj.topology
        assert residue_distance(f, top, 0, 1, COM) == pytest.approx(1.0)

    def test_mass_weighting_uses_element_masses(self):
        traj = toy_traj(
            [[("N", "N"), ("O", "O")], [("CA", "C")]],
            [[[0, 0, 0], [2, 0, 0], [10, 0, 0]]],
        )
        f, top = traj.frames[0], traj.topology
        com_x = 2.0 * 15.999 / (14.007 + 15.999)
        assert residue_distance(f, top, 0, 1, COM) == pytest.approx(10.0 - com_x)
        np.testing.assert_allclose(center_of_mass(f, top)[0], [com_x, 0, 0])

    def test_missing_calpha(self):
        traj = toy_traj([[("CB", "C")], [("CA", "C")]], [[[0, 0, 0], [3, 0, 0]]])
        f, top = traj.frames[0], traj.topology
        with pytest.raises(MissingCAlpha):
            residue_distance(f, top, 0, 1, CALPHA)

    def test_same_index_rejected(self):
        traj = single_atom_traj([(0, 0, 0), (1, 0, 0)])
        with pytest.raises(ValueError):
            residue_distance(traj.frames[0], traj.topology, 1, 1, MIN_DIST)


class TestBuildRin:
    def test_tiny_cutoff_gives_no_edges(self, backend):
        rng = random.Random(1)
        traj = random_residue_traj(40, rng)
        rin = build_rin(traj.frames[0], traj.topology, RinConfig(MIN_DIST, 0.1))
        assert rin.n_edges == 0
        assert rin.node_count == 40

    def test_collinear_example(self, backend):
        traj = single_atom_traj([(0, 0, 0), (5, 0, 0), (10, 0, 0)])
        rin = build_rin(traj.frames[0], traj.topology, RinConfig(MIN_DIST, 6.0))
        assert edge_set(rin) == {(0, 1), (1, 2)}

    def test_cutoff_is_inclusive(self, backend):
        traj = single_atom_traj([(0, 0, 0), (5, 0, 0)])
        rin = build_rin(traj.frames[0], traj.topology, RinConfig(MIN_DIST, 5.0))
        assert edge_set(rin) == {(0, 1)}

    @pytest.mark.parametrize("criterion", [MIN_DIST, CALPHA, COM])
    def test_matches_all_pairs_oracle(self, backend, criterion):
        rng = random.Random(7)
        for trial in range(4):
            traj = random_residue_traj(50, rng, box=20.0)
            f, top = traj.frames[0], traj.topology
            cutoff = rng.uniform(3.0, 9.0)
            rin = build_rin(f, top, RinConfig(criterion, cutoff))
            if criterion is MIN_DIST:
                expected = oracle_min_distance_edges(grouped_coords(traj), cutoff)
            elif criterion is CALPHA:
                pts = [tuple(f.coords[top.ca_index[r]]) for r in range(top.n_residues)]
                expected = oracle_point_edges(pts, cutoff)
            else:
                expected = oracle_point_edges(
                    [tuple(p) for p in center_of_mass(f, top)], cutoff
                )
            assert edge_set(rin) == expected

    def test_adjacency_is_symmetric_simple_sorted(self, backend):
        rng = random.Random(3)
        traj = random_residue_traj(60, rng)
        rin = build_rin(traj.frames[0], traj.topology, RinConfig(MIN_DIST, 6.0))
        seen = set()
        for i in range(rin.node_count):
            nbrs = rin.neighbors(i)
            assert np.all(np.diff(nbrs) > 0)  # strictly sorted, no duplicates
            assert i not in nbrs  # no self loops
            for j in nbrs:
                seen.add((i, int(j)))
        assert all((j, i) in seen for i, j in seen)  # undirected

    def test_exclude_backbone_neighbors(self, backend):
        traj = single_atom_traj([(0, 0, 0), (3, 0, 0), (6, 0, 0), (0, 3, 0)])
        f, top = traj.frames[0], traj.topology
        with_bb = build_rin(f, top, RinConfig(MIN_DIST, 4.0))
        without = build_rin(f, top, RinConfig(MIN_DIST, 4.0, exclude_backbone_neighbors=True))
        assert (0, 1) in edge_set(with_bb) and (1, 2) in edge_set(with_bb)
        assert (0, 1) not in edge_set(without) and (1, 2) not in edge_set(without)
        assert (0, 3) in edge_set(without)  # non-consecutive pair kept

    def test_missing_ca_propagates(self, backend):
        traj = toy_traj([[("CB", "C")], [("CA", "C")]], [[[0, 0, 0], [3, 0, 0]]])
        with pytest.raises(MissingCAlpha):
            build_rin(traj.frames[0], traj.topology, RinConfig(CALPHA, 5.0))

    def test_invalid_cutoff_rejected(self):
        with pytest.raises(ValueError):
            RinConfig(MIN_DIST, 0.0)
        with pytest.raises(ValueError):
            RinConfig(MIN_DIST, -1.0)

    def test_isometry_invariance(self, backend):
        rng = random.Random(11)
        traj = random_residue_traj(50, rng, n_frames=1)
        f, top = traj.frames[0], traj.topology
        rin_a = build_rin(f, top, RinConfig(MIN_DIST, 5.0))
        # rigid rotation + translation
        theta = 0.7
        rot = np.array(
            [
                [np.cos(theta), -np.sin(theta), 0],
                [np.sin(theta), np.cos(theta), 0],
                [0, 0, 1],
            ]
        )
        moved = type(f)(f.index, f.coords @ rot.T + np.array([5.0, -3.0, 2.0]))
        rin_b = build_rin(moved, top, RinConfig(MIN_DIST, 5.0))
        assert edge_set(rin_a) == edge_set(rin_b)


class TestCutoffChange:
    def _traj(self, seed=5, n=60):
        return random_residue_traj(n, random.Random(seed), n_frames=2)

    def test_identity_transition(self, backend):
        traj = self._traj()
        f, top = traj.frames[0], traj.topology
        rin = build_rin(f, top, RinConfig(MIN_DIST, 5.0))
        new_rin, delta = apply_cutoff_change(rin, f, top, 5.0)
        assert delta.is_empty
        assert edge_set(new_rin) == edge_set(rin)

    def test_grow_is_monotone(self, backend):
        traj = self._traj()
        f, top = traj.frames[0], traj.topology
        rin = build_rin(f, top, RinConfig(MIN_DIST, 4.5))
        new_rin, delta = apply_cutoff_change(rin, f, top, 7.5)
        assert len(delta.removed) == 0
        assert edge_set(rin) <= edge_set(new_rin)

    @pytest.mark.parametrize("criterion", [MIN_DIST, CALPHA, COM])
    def test_random_transitions_match_rebuild(self, backend, criterion):
        rng = random.Random(13)
        traj = self._traj(seed=17)
        f, top = traj.frames[0], traj.topology
        rin = build_rin(f, top, RinConfig(criterion, 5.0))
        for _ in range(25):
            cutoff = rng.uniform(2.0, 9.0)
            prev_edges = edge_set(rin)
            rin, delta = apply_cutoff_change(rin, f, top, cutoff)
            fresh = build_rin(f, top, RinConfig(criterion, cutoff))
            assert edge_set(rin) == edge_set(fresh)
            np.testing.assert_array_equal(rin.edge_d2, fresh.edge_d2)
            added = {tuple(p) for p in delta.added.tolist()}
            removed = {tuple(p) for p in delta.removed.tolist()}
            assert added == edge_set(rin) - prev_edges
            assert removed == prev_edges - edge_set(rin)
            assert not (added & removed)

    def test_frame_change_equals_fresh_build(self, backend):
        traj = self._traj(seed=19)
        top = traj.topology
        cfg = RinConfig(MIN_DIST, 5.5)
        rin_0 = build_rin(traj.frames[0], top, cfg)
        rin_1 = apply_frame_change(cfg, top, traj.frames[1])
        fresh = build_rin(traj.frames[1], top, cfg)
        assert edge_set(rin_1) == edge_set(fresh)
        assert rin_1.frame_index == 1
        assert rin_1.node_count == rin_0.node_count

    def test_frame_translation_keeps_edges(self, backend):
        traj = self._traj(seed=23)
        f, top = traj.frames[0], traj.topology
        cfg = RinConfig(MIN_DIST, 5.0)
        moved = type(f)(1, f.coords + np.array([1.0, 1.0, 1.0]))
        assert edge_set(build_rin(f, top, cfg)) == edge_set(
            apply_frame_change(cfg, top, moved)
        )

    def test_edge_delta_between(self, backend):
        traj = self._traj(seed=29)
        f, top = traj.frames[0], traj.topology
        a = build_rin(f, top, RinConfig(MIN_DIST, 4.0))
        b = build_rin(f, top, RinConfig(MIN_DIST, 6.0))
        delta = edge_delta_between(a, b)
        assert {tuple(p) for p in delta.added.tolist()} == edge_set(b) - edge_set(a)
        assert len(delta.removed) == 0


class TestThresholdMonotonicity:
    @pytest.mark.parametrize("criterion", [MIN_DIST, CALPHA, COM])
    def test_nested_edge_sets(self, backend, criterion):
        traj = random_residue_traj(50, random.Random(31))
        f, top = traj.frames[0], traj.topology
        previous = set()
        for cutoff in np.arange(4.0, 8.51, 0.5):
            current = edge_set(build_rin(f, top, RinConfig(criterion, float(cutoff))))
            assert previous <= current
            previous = current

    def test_criterion_dominance(self, backend):
        traj = random_residue_traj(50, random.Random(37))
        f, top = traj.frames[0], traj.topology
        for cutoff in (4.5, 6.0, 8.0):
            ca = edge_set(build_rin(f, top, RinConfig(CALPHA, cutoff)))
            md = edge_set(build_rin(f, top, RinConfig(MIN_DIST, cutoff)))
            assert ca <= md


class TestConnectedComponents:
    def test_edgeless(self):
        traj = single_atom_traj([(0, 0, 0), (50, 0, 0), (100, 0, 0), (150, 0, 0), (200, 0, 0)])
        rin = build_rin(traj.frames[0], traj.topology, RinConfig(MIN_DIST, 1.0))
        part = connected_components(rin)
        assert part.community_count == 5
        np.testing.assert_array_equal(part.labels, np.arange(5))

    def test_path_plus_isolated(self):
        traj = single_atom_traj([(0, 0, 0), (4, 0, 0), (8, 0, 0), (100, 0, 0)])
        rin = build_rin(traj.frames[0], traj.topology, RinConfig(MIN_DIST, 5.0))
        part = connected_components(rin)
        assert part.labels.tolist() == [0, 0, 0, 1]

    def test_against_union_find_oracle(self, backend):
        rng = random.Random(41)
        for _ in range(5):
            traj = random_residue_traj(40, rng, box=40.0)
            rin = build_rin(traj.frames[0], traj.topology, RinConfig(MIN_DIST, 5.0))
            expected = oracle_components(
                rin.node_count, list(zip(rin.edges_i.tolist(), rin.edges_j.tolist()))
            )
            assert connected_components(rin).labels.tolist() == expected
