"""Exception hierarchy shared by all modules."""


class FPGraphError(Exception):
    """Base class for every error raised by :mod:`fpgraph`."""


# graph construction
class GraphSpecError(FPGraphError, ValueError):
    pass


class RootNotUnique(GraphSpecError):
    pass


class OrphanVertex(GraphSpecError):
    pass


class DeadEndVertex(GraphSpecError):
    pass


class MultiEdge(GraphSpecError):
    pass


class ShapeMismatch(GraphSpecError):
    pass


class IndexOutOfRange(FPGraphError, IndexError):
    pass


class NotSymmetric(FPGraphError):
    """Per-vertex counts differ across a sphere."""


# symmetry
class SymmetrySearchTimeout(FPGraphError):
    """The automorphism search exhausted its node budget."""


# discrete decomposition
class NonCommuting(FPGraphError):
    pass


class SubspaceNotInvariant(FPGraphError):
    pass


class CompletenessFailure(FPGraphError):
    pass


class NotTridiagonal(FPGraphError):
    pass


# metric reduction
class ConstancyViolation(FPGraphError):
    pass


class EmptySupport(FPGraphError):
    pass


class GridMismatch(FPGraphError, ValueError):
    pass


# spectra
class DegenerateWindow(FPGraphError, ValueError):
    pass


class ScanStepTooCoarse(FPGraphError):
    pass


class MeshMisfit(FPGraphError, ValueError):
    pass


# generators
class InvalidParams(FPGraphError, ValueError):
    pass


class NotATree(FPGraphError, ValueError):
    pass


class BranchTooSmall(FPGraphError, ValueError):
    pass


# pipeline
class StageError(FPGraphError):
    """Wraps an error with the name of the pipeline stage that raised it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
