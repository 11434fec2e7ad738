"""Exception types shared across the pipeline, mapped to process exit codes."""


class TrendmineError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 3


class UsageError(TrendmineError):
    """Bad command line, bad config key, or bad parameter value."""

    exit_code = 1


class DataError(TrendmineError):
    """Input data is missing, malformed beyond tolerance, or inconsistent."""

    exit_code = 2


class StageError(TrendmineError):
    """A pipeline stage failed; carries the stage name and the original cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)
