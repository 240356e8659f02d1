"""Exception hierarchy shared by all modules."""


class NdksError(Exception):
    """Base class for numerical failures raised by this package."""


class CutoffTooSmall(NdksError):
    """The Fock cutoff discards more probability than allowed."""


class NonConvergence(NdksError):
    """A series or search hit its iteration cap."""


class VacuumState(NdksError):
    """Mandel's Q is undefined for a state with zero mean photon number."""


class DimensionMismatch(NdksError):
    pass


class NotHermitian(NdksError):
    pass


class GridEvaluationError(NdksError):
    """A phase-space grid point failed; carries the offending coordinate."""

    def __init__(self, point: complex, cause: Exception):
        self.point = point
        self.cause = cause
        super().__init__(
            f"grid evaluation failed at ({point.real:.6g}, {point.imag:.6g}): {cause}"
        )
