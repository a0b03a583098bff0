"""Error and warning types shared across the package."""


class CircgpError(Exception):
    """Base class for circgp errors."""


class CholeskyFailure(CircgpError):
    """A covariance matrix stayed numerically indefinite after jitter escalation.

    Usually triggered by duplicated inputs combined with a jitter that is
    too small for the resulting near-singular matrix.
    """


class NonFiniteLoglik(CircgpError):
    """A sampler was handed a state whose log-likelihood is -inf or NaN."""


class DataFormatError(CircgpError):
    """A data, trace, or prediction file failed to parse.

    Carries the 1-based line number when the failure is tied to a line.
    """

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        prefix = ""
        if path is not None:
            prefix += str(path)
        if lineno is not None:
            prefix += f":{lineno}"
        super().__init__(f"{prefix}: {message}" if prefix else message)


class DegenerateGroup(UserWarning):
    """A local-slope group had zero input variance and was skipped."""
