"""Exception hierarchy shared across the package.

Two broad classes matter to callers: input problems (``ValidationError``)
and failures of the numerical stages themselves (``NumericalError``).  The
command-line layer maps them to distinct exit codes.
"""


class MixMNLError(Exception):
    """Base class for all package errors."""


class ValidationError(MixMNLError):
    """Malformed or out-of-contract input."""


class NumericalError(MixMNLError):
    """A numerical stage failed on otherwise well-formed input."""


class GraphGenerationError(NumericalError):
    """Random graph generation exhausted its retries.

    Carries the diagnostics of the last rejected graph in ``last_diagnostics``
    so callers can see why candidates kept failing.
    """

    def __init__(self, message, last_diagnostics=None):
        super().__init__(message)
        self.last_diagnostics = last_diagnostics


class RankDeficiencyError(NumericalError):
    """A matrix expected to carry rank-r structure did not.

    ``spectrum`` holds the offending eigenvalues (descending) when available.
    """

    def __init__(self, message, spectrum=None):
        super().__init__(message)
        self.spectrum = spectrum


class DegenerateTensorError(NumericalError):
    """Tensor power iterations found no direction with non-negligible weight."""
