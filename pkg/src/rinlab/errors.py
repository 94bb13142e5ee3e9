"""Exception types shared across the package."""


class RinLabError(Exception):
    """Base class for all rinlab errors."""


class MalformedRecord(RinLabError):
    """A fixed-column PDB record could not be parsed."""


class InconsistentTopology(RinLabError):
    """A trajectory model disagrees with the first model's atom list."""


class EmptyInput(RinLabError):
    """No usable atoms/residues/frames in the input."""


class SchemaViolation(RinLabError):
    """A JSON document does not match the expected schema.

    ``path`` points at the offending field, e.g. ``frames[2][5]``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class MissingCAlpha(RinLabError):
    """A residue lacks a CA atom required by the requested operation."""


class LengthMismatch(RinLabError):
    """Two per-node arrays have different lengths."""


class MeasureMismatch(RinLabError):
    """Two score vectors belong to different measures."""


class CoincidentPoints(RinLabError):
    """Two layout points coincide where a positive distance is required."""


class InvalidPayload(RinLabError):
    """A session event carries an out-of-range or ill-typed payload."""


class IoError(RinLabError):
    """Reading or writing an external file failed."""
