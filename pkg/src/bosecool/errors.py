"""Exception types raised across the package."""


class BosecoolError(Exception):
    """Base class for all package errors."""


class DimensionOverflowError(BosecoolError):
    """A dense operator would exceed the configured entry budget."""


class DomainError(BosecoolError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ShapeMismatchError(BosecoolError, ValueError):
    pass


class PreconditionError(BosecoolError):
    """An input state violates a moment condition required by an operation.

    ``condition`` names the violated condition (``"first"``, ``"anomalous"`` or
    ``"normal_diagonal"``), ``index`` the worst entry and ``value`` its size.
    """

    def __init__(self, condition: str, index: tuple, value: float) -> None:
        self.condition = condition
        self.index = index
        self.value = value
        super().__init__(
            f"state violates the {condition!r} moment condition: "
            f"worst entry {index} has magnitude {value:.3e}"
        )


class ConvergenceError(BosecoolError):
    """A numerical procedure did not reach its accuracy target."""

    def __init__(self, message: str, achieved: float | None = None) -> None:
        self.achieved = achieved
        super().__init__(message)
