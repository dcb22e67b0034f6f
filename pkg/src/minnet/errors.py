"""Exception hierarchy.

Every error raised by the package derives from :class:`MinNetError`. The
three intermediate classes map onto the CLI exit codes: input problems (2),
non-convex data (3) and solver failures (4).
"""


class MinNetError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InvalidInput(MinNetError):
    exit_code = 2


class TooFewPoints(InvalidInput):
    pass


class DuplicateProjection(InvalidInput):
    def __init__(self, i, j):
        super().__init__(f"points {i} and {j} have the same (x, y) projection")
        self.i = i
        self.j = j


class CollinearProjections(InvalidInput):
    pass


class DegenerateTriangle(InvalidInput):
    pass


class OverlappingTriangles(InvalidInput):
    pass


class VertexMismatch(InvalidInput):
    pass


class OutOfRange(InvalidInput):
    pass


class NonConvexData(MinNetError):
    exit_code = 3


class SolverError(MinNetError):
    exit_code = 4


class SingularWindow(SolverError):
    pass


class StartEdgeChoiceFailed(SolverError):
    def __init__(self, i):
        super().__init__(f"no start edge at vertex {i} gives nonzero leading coefficients")
        self.vertex = i


class SingularJacobian(SolverError):
    pass


class MaxIterationsExceeded(SolverError):
    def __init__(self, message, alpha=None, residual=None):
        super().__init__(message)
        self.alpha = alpha
        self.residual = residual


class Infeasible(SolverError):
    pass


class NotConverged(SolverError):
    def __init__(self, message, best=None, gap=None):
        super().__init__(message)
        self.best = best
        self.gap = gap
