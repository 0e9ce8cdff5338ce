"""Exception types shared across the package."""


class CstarApproxError(Exception):
    """Base class for all package errors."""


class NonFinite(CstarApproxError):
    """Input contains NaN or Inf entries."""


class NoConvergence(CstarApproxError):
    """An iterative routine hit its iteration cap before reaching tolerance."""


class SignatureMismatch(CstarApproxError):
    """Two algebra elements do not share the same block structure."""


class DependentBasis(CstarApproxError):
    """Claimed basis is numerically linearly dependent."""


class CertificateNotFound(CstarApproxError):
    """Certificate search failed to reach the feasibility tolerance."""

    def __init__(self, message, residual=None, gap=None):
        super().__init__(message)
        self.residual = residual
        self.gap = gap


class NotAContraction(CstarApproxError):
    """Element has operator norm above 1 (beyond tolerance)."""


class ZeroElement(CstarApproxError):
    """Operation is undefined for the zero element."""


class NotSmooth(CstarApproxError):
    """Criterion only applies to trace-norm smooth elements."""


class UnsupportedForm(CstarApproxError):
    """Tail operator is outside the representable head + weighted-shift class."""


class TooSmall(CstarApproxError):
    """Truncation size is smaller than the head block."""


class NoFiniteN(CstarApproxError):
    """No truncation size within the cap meets the requested tail bound."""


class TooManyDimensions(CstarApproxError):
    """Grid search is only feasible for subspaces of dimension at most 2."""


class ProblemFormatError(CstarApproxError):
    """Problem or report file failed validation; names the offending field."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
