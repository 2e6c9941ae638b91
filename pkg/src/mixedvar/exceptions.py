"""Exception hierarchy for the mixedvar package."""


class MixedVarError(Exception):
    """Base class for all package errors."""


class UnitRootAmbiguity(MixedVarError):
    """An eigenvalue modulus falls inside the unit-circle exclusion band."""


class SingularBasis(MixedVarError):
    """Eigenvector basis is singular or too ill-conditioned to invert."""


class ComplexSpectrum(MixedVarError):
    """Operation requires a real spectrum but complex eigenvalues were found."""


class InvalidDof(MixedVarError):
    """Student-t degrees of freedom must exceed 2 for a finite variance."""


class NotCausal(MixedVarError):
    """Operation requires a purely causal coefficient matrix."""


class LengthMismatch(MixedVarError):
    """Data too short for the requested lag structure."""


class LagTooLarge(MixedVarError):
    """Autocovariance lag is not smaller than the sample length."""


class SingularWeight(MixedVarError):
    """The weighting matrix is numerically singular even after ridging."""


class NonFiniteObjective(MixedVarError):
    """Objective value is not finite and could not be recovered from."""


class SingularDesign(MixedVarError):
    """Regressor Gram matrix is singular; least squares has no unique solution."""


class SingularEstimate(MixedVarError):
    """An estimated matrix that must be inverted is singular."""


class ParseError(MixedVarError):
    """A delimited text file could not be parsed into a numeric matrix."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TooShort(MixedVarError):
    """Series has too few rows for the requested operation."""
