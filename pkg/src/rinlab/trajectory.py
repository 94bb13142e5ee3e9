"""Trajectory ingestion: multi-model PDB files and a compact JSON format.

A trajectory is a shared topology (residues + atom metadata) plus a list of
coordinate frames. Coordinates are always in ångström.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInput, InconsistentTopology, MalformedRecord, SchemaViolation

STANDARD_AMINO_ACIDS = frozenset(
    "ALA ARG ASN ASP CYS GLN GLU GLY HIS ILE LEU LYS MET PHE PRO SER THR TRP TYR VAL".split()
)

_KEPT_ALTLOCS = (" ", "A")


@dataclass(frozen=True)
class Atom:
    serial: int
    name: str
    element: str
    residue_index: int
    position: np.ndarray  # (3,) Å


@dataclass(frozen=True)
class Residue:
    index: int
    name: str
    chain_id: str
    seq_number: int
    atom_indices: tuple[int, ...]

    def __post_init__(self):
        if not self.atom_indices:
            raise ValueError(f"residue {self.index} has no atoms")
        if any(b <= a for a, b in zip(self.atom_indices, self.atom_indices[1:])):
            raise ValueError(f"residue {self.index} atom indices not strictly increasing")

    @property
    def label(self) -> str:
        return f"{self.chain_id}:{self.name}{self.seq_number}"


@dataclass(frozen=True, eq=False)
class Frame:
    index: int
    coords: np.ndarray  # (n_atoms, 3) float64, Å


@dataclass(frozen=True, eq=False)
class Topology:
    """Per-atom and per-residue metadata shared by all frames."""

    residues: tuple[Residue, ...]
    atom_serials: np.ndarray  # (n_atoms,) int32
    atom_names: tuple[str, ...]
    atom_elements: tuple[str, ...]
    atom_residue: np.ndarray  # (n_atoms,) int32, residue index per atom
    ca_index: np.ndarray  # (n_residues,) int32, atom index of CA or -1
    residue_chain: tuple[str, ...] = field(repr=False, default=())

    @property
    def n_atoms(self) -> int:
        return len(self.atom_names)

    @property
    def n_residues(self) -> int:
        return len(self.residues)


@dataclass(frozen=True, eq=False)
class Trajectory:
    topology: Topology
    frames: tuple[Frame, ...]
    source_path: str = ""

    def __post_init__(self):
        if not self.frames:
            raise EmptyInput("trajectory has no frames")
        if not self.topology.residues:
            raise EmptyInput("trajectory has no residues")
        n = self.topology.n_atoms
        for f in self.frames:
            if f.coords.shape != (n, 3):
                raise InconsistentTopology(
                    f"frame {f.index} has {f.coords.shape[0]} atoms, topology has {n}"
                )

    @property
    def residues(self) -> tuple[Residue, ...]:
        return self.topology.residues

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    @property
    def n_residues(self) -> int:
        return self.topology.n_residues

    @property
    def n_atoms(self) -> int:
        return self.topology.n_atoms

    def atoms(self, frame_index: int = 0) -> list[Atom]:
        """Atom records with positions taken from the given frame."""
        coords = self.frames[frame_index].coords
        top = self.topology
        return [
            Atom(int(top.atom_serials[i]), top.atom_names[i], top.atom_elements[i],
                 int(top.atom_residue[i]), coords[i])
            for i in range(top.n_atoms)
        ]


def _build_topology(records: list[tuple]) -> Topology:
    """Group parsed atom records (name, element, chain, seq, resname, serial) into residues."""
    residues: list[Residue] = []
    atom_residue = np.empty(len(records), dtype=np.int32)
    current_key = None
    current_atoms: list[int] = []

    def _flush(key):
        chain, seq, resname, _icode = key
        residues.append(
            Residue(len(residues), resname, chain, seq, tuple(current_atoms))
        )

    for i, rec in enumerate(records):
        name, element, chain, seq, resname, serial, icode = rec
        key = (chain, seq, resname, icode)
        if key != current_key:
            if current_key is not None:
                _flush(current_key)
            current_key = key
            current_atoms = []
        current_atoms.append(i)
        atom_residue[i] = len(residues)
    if current_key is not None:
        _flush(current_key)

    ca_index = np.full(len(residues), -1, dtype=np.int32)
    for res in residues:
        for ai in res.atom_indices:
            if records[ai][0] == "CA":
                ca_index[res.index] = ai
                break

    return Topology(
        residues=tuple(residues),
        atom_serials=np.array([r[5] for r in records], dtype=np.int32),
        atom_names=tuple(r[0] for r in records),
        atom_elements=tuple(r[1] for r in records),
        atom_residue=atom_residue,
        ca_index=ca_index,
        residue_chain=tuple(res.chain_id for res in residues),
    )


def _element_from_name(raw_name: str) -> str:
    """Derive the element from the 4-column atom name when columns 77-78 are blank."""
    stripped = raw_name.strip()
    if not stripped:
        return ""
    if raw_name[0] in " 0123456789":
        return stripped.lstrip("0123456789")[:1].upper()
    if stripped[0] == "H":  # 4-char hydrogen names like HG11 start in column 13
        return "H"
    return stripped[:2].upper()


def parse_pdb(data: bytes | str) -> Trajectory:
    """Parse PDB fixed-column text into a Trajectory.

    Frames are delimited by MODEL/ENDMDL records (a single implicit frame if
    absent). Topology comes from the first model; later models must list the
    same atoms in the same order. altLoc other than ' '/'A' is dropped.
    """
    text = data.decode("utf-8", errors="replace") if isinstance(data, bytes) else data

    records: list[tuple] = []  # first-model atom metadata
    frames_xyz: list[list[list[float]]] = []
    current: list[list[float]] | None = None
    current_meta: list[tuple] | None = None
    in_model = False
    saw_model = False
    atom_cursor = 0

    def _open_frame():
        nonlocal current, current_meta, atom_cursor
        current = []
        current_meta = [] if not frames_xyz else None
        atom_cursor = 0

    def _close_frame(lineno: int):
        nonlocal current, current_meta
        if current is None:
            return
        if not frames_xyz:
            if not current:
                raise EmptyInput("first model contains no ATOM records")
            records.extend(current_meta)
        else:
            if len(current) != len(records):
                raise InconsistentTopology(
                    f"model ending at line {lineno} has {len(current)} atoms, "
                    f"expected {len(records)}"
                )
        frames_xyz.append(current)
        current = None
        current_meta = None

    for lineno, line in enumerate(text.splitlines(), start=1):
        rectype = line[:6]
        if rectype.startswith("MODEL"):
            if current is not None and current:
                raise MalformedRecord(f"line {lineno}: MODEL inside coordinate block")
            if current is not None:
                current = None
            _open_frame()
            in_model = True
            saw_model = True
            continue
        if rectype.startswith("ENDMDL"):
            if not in_model:
                raise MalformedRecord(f"line {lineno}: ENDMDL without MODEL")
            _close_frame(lineno)
            in_model = False
            continue
        if rectype not in ("ATOM  ", "HETATM"):
            continue
        if current is None:
            if saw_model:
                raise MalformedRecord(f"line {lineno}: coordinates outside MODEL block")
            _open_frame()
        if len(line) < 54:
            raise MalformedRecord(f"line {lineno}: record shorter than coordinate columns")
        altloc = line[16]
        if altloc not in _KEPT_ALTLOCS:
            continue
        try:
            x = float(line[30:38])
            y = float(line[38:46])
            z = float(line[46:54])
        except ValueError as exc:
            raise MalformedRecord(f"line {lineno}: bad coordinate field ({exc})") from None
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            raise MalformedRecord(f"line {lineno}: non-finite coordinate")
        name = line[12:16].strip()
        resname = line[17:20].strip()
        chain = line[21]
        icode = line[26] if len(line) > 26 else " "
        try:
            seq = int(line[22:26])
        except ValueError:
            raise MalformedRecord(f"line {lineno}: bad residue sequence number") from None
        if current_meta is not None:
            element = line[76:78].strip().upper() if len(line) >= 78 else ""
            if not element:
                element = _element_from_name(line[12:16])
            try:
                serial = int(line[6:11])
            except ValueError:
                serial = len(current_meta) + 1
            current_meta.append((name, element, chain, seq, resname, serial, icode))
        else:
            i = atom_cursor
            if (
                i >= len(records)
                or records[i][0] != name
                or records[i][2] != chain
                or records[i][3] != seq
            ):
                raise InconsistentTopology(
                    f"line {lineno}: atom order differs from first model"
                )
        current.append([x, y, z])
        atom_cursor += 1

    if current is not None:
        _close_frame(lineno)
    if not frames_xyz or not records:
        raise EmptyInput("no ATOM records found")

    topology = _build_topology(records)
    frames = tuple(
        Frame(i, np.asarray(xyz, dtype=np.float64)) for i, xyz in enumerate(frames_xyz)
    )
    return Trajectory(topology=topology, frames=frames)


def export_traj_json(traj: Trajectory) -> str:
    """Serialize a trajectory to the compact JSON interchange format."""
    top = traj.topology
    residues = [
        {
            "name": res.name,
            "chain": res.chain_id,
            "seq": res.seq_number,
            "atoms": [
                {"name": top.atom_names[ai], "element": top.atom_elements[ai]}
                for ai in res.atom_indices
            ],
        }
        for res in top.residues
    ]
    # In the interchange format atoms are stored grouped by residue, so frames
    # must follow that order regardless of the in-memory atom order.
    order = np.fromiter(
        (ai for res in top.residues for ai in res.atom_indices), dtype=np.int64
    )
    frames = [f.coords[order].tolist() for f in traj.frames]
    return json.dumps({"residues": residues, "frames": frames}, separators=(",", ":"))


def parse_traj_json(data: bytes | str) -> Trajectory:
    """Parse the JSON interchange format into a Trajectory."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("$", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaViolation("$", "expected a JSON object")

    residues = doc.get("residues")
    if not isinstance(residues, list) or not residues:
        raise SchemaViolation("residues", "expected a non-empty array")

    records: list[tuple] = []
    serial = 1
    for ri, res in enumerate(residues):
        where = f"residues[{ri}]"
        if not isinstance(res, dict):
            raise SchemaViolation(where, "expected an object")
        name = res.get("name")
        chain = res.get("chain")
        seq = res.get("seq")
        atoms = res.get("atoms")
        if not isinstance(name, str) or not name:
            raise SchemaViolation(f"{where}.name", "expected a non-empty string")
        if not isinstance(chain, str) or len(chain) != 1:
            raise SchemaViolation(f"{where}.chain", "expected a single character")
        if not isinstance(seq, int):
            raise SchemaViolation(f"{where}.seq", "expected an integer")
        if not isinstance(atoms, list) or not atoms:
            raise SchemaViolation(f"{where}.atoms", "expected a non-empty array")
        for ai, atom in enumerate(atoms):
            if (
                not isinstance(atom, dict)
                or not isinstance(atom.get("name"), str)
                or not isinstance(atom.get("element"), str)
            ):
                raise SchemaViolation(
                    f"{where}.atoms[{ai}]", "expected {'name': str, 'element': str}"
                )
            records.append((atom["name"], atom["element"], chain, seq, name, serial, " "))
            serial += 1

    frames_doc = doc.get("frames")
    if not isinstance(frames_doc, list) or not frames_doc:
        raise SchemaViolation("frames", "expected a non-empty array (Empty)")
    n_atoms = len(records)
    frames = []
    for fi, fr in enumerate(frames_doc):
        if not isinstance(fr, list) or len(fr) != n_atoms:
            raise SchemaViolation(
                f"frames[{fi}]",
                f"expected {n_atoms} atom coordinates, got "
                f"{len(fr) if isinstance(fr, list) else type(fr).__name__}",
            )
        try:
            coords = np.asarray(fr, dtype=np.float64)
        except (TypeError, ValueError):
            raise SchemaViolation(f"frames[{fi}]", "expected [x,y,z] number triples") from None
        if coords.shape != (n_atoms, 3):
            raise SchemaViolation(f"frames[{fi}]", "expected [x,y,z] number triples")
        if not np.all(np.isfinite(coords)):
            bad = int(np.argwhere(~np.isfinite(coords))[0][0])
            raise SchemaViolation(f"frames[{fi}][{bad}]", "non-finite coordinate")
        frames.append(Frame(fi, coords))

    return Trajectory(topology=_build_topology(records), frames=tuple(frames))


def select_protein_residues(
    traj: Trajectory, include_hydrogens: bool = False, permissive: bool = False
) -> Trajectory:
    """Filter to amino-acid residues (and optionally drop hydrogens).

    ``permissive`` additionally keeps non-standard residues that have a CA
    atom. Residue and atom indices are re-compacted; idempotent.
    """
    top = traj.topology
    kept_res = [
        res
        for res in top.residues
        if res.name in STANDARD_AMINO_ACIDS
        or (permissive and top.ca_index[res.index] >= 0)
    ]

    records: list[tuple] = []
    old_atom_indices: list[int] = []
    for res in kept_res:
        for ai in res.atom_indices:
            if not include_hydrogens and top.atom_elements[ai] == "H":
                continue
            records.append(
                (
                    top.atom_names[ai],
                    top.atom_elements[ai],
                    res.chain_id,
                    res.seq_number,
                    res.name,
                    int(top.atom_serials[ai]),
                    " ",
                )
            )
            old_atom_indices.append(ai)

    if not records:
        raise EmptyInput("no amino-acid residues remain after filtering")

    sel = np.asarray(old_atom_indices, dtype=np.int64)
    frames = tuple(
        Frame(f.index, np.ascontiguousarray(f.coords[sel])) for f in traj.frames
    )
    return Trajectory(
        topology=_build_topology(records), frames=frames, source_path=traj.source_path
    )
