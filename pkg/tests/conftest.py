import json
import random

import numpy as np
import pytest

from rinlab import _kernels
from rinlab.rin import DistanceCriterion, Rin, RinConfig, _assemble
from rinlab.trajectory import parse_traj_json


@pytest.fixture(params=_kernels.available_backends())
def backend(request, monkeypatch):
    """Run kernel-dependent tests under every available backend."""
    monkeypatch.setenv("RINLAB_KERNELS", request.param)
    return request.param


_acceptance_results = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance_results.append((report.nodeid.split("::")[-1], report.passed))


def pytest_terminal_summary(terminalreporter):
    if _acceptance_results:
        terminalreporter.section("acceptance criteria")
        for name, ok in _acceptance_results:
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")


def make_rin(n: int, edges, cutoff: float = 5.0,
             criterion=DistanceCriterion.MINIMUM_ATOM_DISTANCE) -> Rin:
    """Build a Rin directly from an undirected edge list (for analytics tests)."""
    pairs = sorted({(min(a, b), max(a, b)) for a, b in edges})
    ei = np.array([p[0] for p in pairs], dtype=np.int32)
    ej = np.array([p[1] for p in pairs], dtype=np.int32)
    d2 = np.full(len(pairs), 1.0)
    return _assemble(n, ei, ej, d2, RinConfig(criterion, cutoff), 0)


def random_graph(n: int, p: float, rng: random.Random):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return edges


def random_connected_graph(n: int, p: float, rng: random.Random):
    """Random tree + extra edges: always connected."""
    edges = set()
    for v in range(1, n):
        edges.add((rng.randrange(v), v))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.add((i, j))
    return sorted(edges)


def toy_traj(residue_atoms, frames_coords):
    """Build a trajectory from per-residue (name, element) atom lists and
    per-frame flat coordinate lists (grouped by residue)."""
    doc = {
        "residues": [
            {
                "name": "ALA",
                "chain": "A",
                "seq": ri + 1,
                "atoms": [{"name": nm, "element": el} for nm, el in atoms],
            }
            for ri, atoms in enumerate(residue_atoms)
        ],
        "frames": frames_coords,
    }
    return parse_traj_json(json.dumps(doc))


def single_atom_traj(points, element="C", name="CA"):
    return toy_traj(
        [[(name, element)] for _ in points],
        [[list(map(float, p)) for p in points]],
    )


def random_residue_traj(n_residues, rng, n_frames=1, box=30.0, max_atoms=4,
                        with_ca=True, wobble=None):
    """Random compact residues. ``wobble=None`` draws each frame fresh;
    a number perturbs the first frame by that amplitude (0.0 = exact copies)."""
    residue_atoms = []
    for _ in range(n_residues):
        k = rng.randint(1, max_atoms)
        atoms = [("CA", "C")] if with_ca else [("CB", "C")]
        atoms += [(f"X{i}", rng.choice("CNOS")) for i in range(k - 1)]
        residue_atoms.append(atoms)
    base_frame = []
    offsets = []
    for atoms in residue_atoms:
        base = [rng.uniform(0, box) for _ in range(3)]
        base_frame.append(list(base))
        offsets.append([0.0, 0.0, 0.0])
        for _ in atoms[1:]:
            off = [rng.uniform(-1.5, 1.5) for _ in range(3)]
            base_frame.append([b + o for b, o in zip(base, off)])
            offsets.append(off)
    frames = [base_frame]
    for _ in range(n_frames - 1):
        if wobble is None:
            frame = []
            for atoms in residue_atoms:
                base = [rng.uniform(0, box) for _ in range(3)]
                frame.append(list(base))
                for _ in atoms[1:]:
                    frame.append([b + rng.uniform(-1.5, 1.5) for b in base])
            frames.append(frame)
        else:
            frames.append(
                [[c + rng.uniform(-wobble, wobble) for c in atom] for atom in base_frame]
            )
    return toy_traj(residue_atoms, frames)
