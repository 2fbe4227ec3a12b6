"""Exception and warning types shared across the package."""


class MvclustError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(MvclustError):
    """Views (or other paired arrays) disagree on the sample count."""


class NonFiniteEntryError(MvclustError):
    """A matrix contains NaN or infinity; carries the first offending location."""

    def __init__(self, view: int, row: int, col: int):
        self.view = view
        self.row = row
        self.col = col
        super().__init__(f"non-finite entry at view={view}, row={row}, col={col}")


class LabelRangeError(MvclustError):
    """Labels are malformed: wrong length, negative, or class ids with gaps."""


class LayerSpecError(MvclustError):
    """Layer sizes violate the admissibility rules for a dataset/cluster count."""


class RankDeficientError(MvclustError):
    """A Gram matrix collapsed completely; no usable pseudo-inverse exists."""


class SolverStallError(MvclustError):
    """An iterative solver failed to reach its tolerance within its budget."""


class LengthMismatchError(MvclustError):
    """Two label sequences being compared have different lengths."""


class MissingManifestError(MvclustError):
    """A dataset directory has no manifest file."""


class MissingFileError(MvclustError):
    """A file referenced by a manifest does not exist."""


class ParseError(MvclustError):
    """A text file could not be parsed; carries file/line/column when known."""

    def __init__(self, path, line=None, col=None, reason=""):
        self.path = str(path)
        self.line = line
        self.col = col
        loc = self.path
        if line is not None:
            loc += f":{line}"
            if col is not None:
                loc += f":{col}"
        super().__init__(f"parse error at {loc}: {reason}" if reason else f"parse error at {loc}")


class SchemaVersionMismatchError(MvclustError):
    """A persisted report was written with an unsupported schema version."""


class InfeasibleGeometryError(MvclustError):
    """Requested synthetic cluster geometry cannot fit in the given dimensions."""


class RankDeficientWarning(UserWarning):
    """A Gram matrix was near-singular; eigenvalue flooring was applied."""


class DegenerateGraphWarning(UserWarning):
    """A similarity graph has isolated nodes; degrees were floored."""


class ZeroColumnWarning(UserWarning):
    """Normalization encountered all-zero sample columns and left them unchanged."""
