"""Exceptions raised by the library.

Every error carries a stable ``code`` used as the prefix of the one-line CLI
error message, and the process exit code the CLI maps it to.
"""


class SymplectomoError(Exception):
    code = "SYMPLECTOMO_ERROR"
    exit_code = 1

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message

    def __str__(self):
        return f"{self.code}: {self.message}"


class DimensionMismatch(SymplectomoError):
    code = "DIMENSION_MISMATCH"
    exit_code = 10


class NotHermitian(SymplectomoError):
    code = "NOT_HERMITIAN"
    exit_code = 11


class NotADensityMatrix(SymplectomoError):
    code = "NOT_A_DENSITY_MATRIX"
    exit_code = 12


class FockLevelOutOfRange(SymplectomoError):
    code = "FOCK_LEVEL_OUT_OF_RANGE"
    exit_code = 13


class InvalidWeights(SymplectomoError):
    code = "INVALID_WEIGHTS"
    exit_code = 14


class InvalidFrame(SymplectomoError):
    code = "INVALID_FRAME"
    exit_code = 20


class SupportNotCovered(SymplectomoError):
    code = "SUPPORT_NOT_COVERED"
    exit_code = 21


class InsufficientFrameCoverage(SymplectomoError):
    code = "INSUFFICIENT_FRAME_COVERAGE"
    exit_code = 22


class ImaginaryResidueTooLarge(SymplectomoError):
    code = "IMAGINARY_RESIDUE_TOO_LARGE"
    exit_code = 23


class NyquistViolation(SymplectomoError):
    code = "NYQUIST_VIOLATION"
    exit_code = 24


class NotNormalized(SymplectomoError):
    code = "NOT_NORMALIZED"
    exit_code = 25


class NuZeroInKernel(SymplectomoError):
    code = "NU_ZERO_IN_KERNEL"
    exit_code = 30


class QuadratureNotConverged(SymplectomoError):
    code = "QUADRATURE_NOT_CONVERGED"
    exit_code = 31


class MissingRequiredFrame(SymplectomoError):
    code = "MISSING_REQUIRED_FRAME"
    exit_code = 32


class NotTraceClass(SymplectomoError):
    code = "NOT_TRACE_CLASS"
    exit_code = 33


class ParseError(SymplectomoError):
    code = "PARSE_ERROR"
    exit_code = 40


class FormatError(SymplectomoError):
    code = "FORMAT_ERROR"
    exit_code = 41


class ConfigError(SymplectomoError):
    code = "CONFIG_ERROR"
    exit_code = 42


class DependencyError(SymplectomoError):
    code = "DEPENDENCY_ERROR"
    exit_code = 43


class UsageError(SymplectomoError):
    code = "USAGE_ERROR"
    exit_code = 2
