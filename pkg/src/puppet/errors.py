"""Exception hierarchy shared across the package."""


class PuppetError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(PuppetError):
    """An operation was called with arguments that break its preconditions."""


class ModelError(PuppetError):
    """A robot model file failed validation. Message carries the JSON path."""


class ScenarioError(PuppetError):
    """A scenario file failed validation. Message carries the JSON path."""


class NumericalFault(PuppetError):
    """A simulation step produced non-finite state."""


class ReplayMismatch(PuppetError):
    """Replay diverged from the recorded trajectory."""

    def __init__(self, row: int, field: str, detail: str):
        self.row = row
        self.field = field
        self.detail = detail
        super().__init__(f"replay mismatch at row {row}, field {field!r}: {detail}")
