"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class CorpusFormatError(PipelineError):
    """A corpus file could not be parsed or violates a data invariant.

    Carries the offending path and 1-based line number so batch loaders can
    report exactly which record is broken.
    """

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:" if line is None else f"{path}:{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)


class InfeasibleError(PipelineError):
    """A constrained search or assignment has no valid solution."""


class GenerationError(PipelineError):
    """Synthetic corpus generation could not satisfy the requested spec."""
