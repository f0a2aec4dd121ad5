"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ContractViolation -> 2, Capacity -> 3.
"""


class SbdynError(Exception):
    """Base class for all package errors."""


class StructuralError(SbdynError):
    """Malformed input: dimension mismatch, unbound parameter, missing data."""


class ContractViolationError(SbdynError):
    """A documented precondition was violated (non-Hermitian operator, bad spec, ...)."""


class CapacityError(SbdynError):
    """Register size exceeds what the dense simulators are allowed to handle."""


class StalledManifoldError(SbdynError):
    """Every singular value of the McLachlan matrix fell below the cutoff."""

    def __init__(self, singular_values, message="all singular values below cutoff"):
        super().__init__(message)
        self.singular_values = singular_values


class MitigationError(SbdynError):
    """Readout calibration matrix is singular; mitigation cannot proceed."""


class SearchAbortError(SbdynError):
    """Trotter depth search exceeded its depth ceiling."""
