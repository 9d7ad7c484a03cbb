"""Exception taxonomy shared across the library."""


class MassLabError(Exception):
    """Base class for all library errors."""


class DomainError(MassLabError):
    """A point or radius lies outside the valid chart of a metric."""


class ArgumentError(MassLabError):
    """Invalid arguments (bad radii lists, malformed meshes, ...)."""


class CapabilityError(MassLabError):
    """A requested combination is outside the implemented scope."""


class PreconditionError(MassLabError):
    """A mathematical precondition fails (e.g. Gauss curvature <= 0)."""


class SolverError(MassLabError):
    """An elliptic solve did not converge; carries a residual report."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class MeshError(MassLabError):
    """A triangulated surface is not a valid 2-complex."""


class SingularityError(MassLabError):
    """Degenerate parametrization node."""


class DegeneracyError(MassLabError):
    """A coupling coefficient vanished; the linear relation is singular."""
