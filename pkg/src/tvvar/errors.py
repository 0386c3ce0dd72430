"""Exception hierarchy shared across the package.

Data errors (bad input files, malformed panels) and numerical errors
(singular systems, failed factorizations) are kept on separate branches so
callers can map them to distinct exit codes / HTTP statuses.
"""


class TvVarError(Exception):
    """Base class for all package-specific errors."""


class DataError(TvVarError):
    """Invalid or unusable input data."""


class ParseError(DataError):
    def __init__(self, line, column, reason):
        self.line = line
        self.column = column
        self.reason = reason
        super().__init__(f"line {line}, column {column}: {reason}")


class TooShortError(DataError):
    def __init__(self, length, minimum):
        self.length = length
        self.minimum = minimum
        super().__init__(f"series length {length} below minimum {minimum}")


class NumericalError(TvVarError):
    """Numerical failure in an estimation or identification step."""


class NotPositiveDefiniteError(NumericalError):
    def __init__(self, pivot_index, message=None):
        self.pivot_index = pivot_index
        super().__init__(message or f"matrix not positive definite (pivot {pivot_index})")


class SingularDesignError(NumericalError):
    def __init__(self, tau, rcond):
        self.tau = tau
        self.rcond = rcond
        super().__init__(f"singular local design at tau={tau:.6g} (rcond={rcond:.3g})")


class DegenerateWindowError(NumericalError):
    def __init__(self, tau, h, n_support=0):
        self.tau = tau
        self.h = h
        self.n_support = n_support
        super().__init__(
            f"degenerate kernel window at tau={tau:.6g}, h={h:.6g} "
            f"({n_support} support points)"
        )


class SingularLongRunMatrixError(NumericalError):
    def __init__(self, tau=None, rcond=None):
        self.tau = tau
        self.rcond = rcond
        msg = "long-run impact matrix (I - sum A_i) is numerically singular"
        if rcond is not None:
            msg += f" (rcond={rcond:.3g})"
        super().__init__(msg)


class SingularWeightError(NumericalError):
    def __init__(self, n_skipped, n_total):
        self.n_skipped = n_skipped
        self.n_total = n_total
        super().__init__(
            f"test weight matrix singular at {n_skipped}/{n_total} grid points"
        )


class UnstableDgpError(TvVarError):
    def __init__(self, tau, radius):
        self.tau = tau
        self.radius = radius
        super().__init__(f"DGP unstable at tau={tau:.4g} (companion radius {radius:.4g})")


class DomainError(TvVarError):
    """Argument outside the mathematical domain of a formula."""
