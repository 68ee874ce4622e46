"""This module provides the exception hierarchy of fauio."""


class FauioError(Exception):
    """Base class of all fauio errors."""


class DimensionError(FauioError, ValueError):
    """Raised when matrix dimensions are inconsistent.

    Args:
        field: Name of the offending field.
        message: Description of the mismatch.

    Examples:
        >>> err = DimensionError("B", "expected 4 rows, got 3")
        >>> str(err)
        'B: expected 4 rows, got 3'
        >>> err.field
        'B'
    """

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class ConfigError(FauioError, ValueError):
    """Raised for a malformed configuration file.

    Args:
        location: `file:line` or dotted field path where the problem was found.
        message: Description of the problem.
    """

    def __init__(self, location: str, message: str):
        self.location = location
        self.message = message
        super().__init__(f"{location}: {message}" if location else message)


class VertexCapError(FauioError, ValueError):
    """Raised when a bound box has more vertices than the cap allows."""


class SynthesisError(FauioError):
    """Raised when observer gains cannot be computed."""


class DivergenceError(FauioError):
    """Raised when an integration produces a non-finite state.

    Args:
        step: Index of the first bad step.
        time: Time of the first bad step.
    """

    def __init__(self, step: int, time: float):
        self.step = step
        self.time = time
        super().__init__(f"non-finite state at step {step} (t={time:.6g})")


class NoFeasiblePairError(FauioError):
    """Raised when every point of a scalar grid is infeasible.

    Args:
        table: Per-grid-point rows of the failed search.
    """

    def __init__(self, table=None):
        self.table = table or []
        super().__init__("no feasible scalar pair")


class NonFiniteError(FauioError, ValueError):
    """Raised when a nonlinearity evaluates to NaN or infinity.

    Args:
        sample: Index of the sample point.
        index: 1-based `(i, j)` of the partial derivative.

    Examples:
        >>> str(NonFiniteError(3, (1, 2)))
        'non-finite slope of g_1 in coordinate 2 at sample 3'
    """

    def __init__(self, sample: int, index: tuple):
        self.sample = sample
        self.index = index
        i, j = index
        super().__init__(
            f"non-finite slope of g_{i} in coordinate {j} at sample {sample}"
        )
