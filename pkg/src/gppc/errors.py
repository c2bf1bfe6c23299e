"""Exception types raised across the detection pipeline."""


class GPPCError(Exception):
    """Base class for every error raised by this package."""


class DegenerateSample(GPPCError):
    """Three points do not span a plane."""


class OffPlanePoint(GPPCError):
    """A point expected to lie on a plane does not."""


class InvalidProbability(GPPCError, ValueError):
    pass


class TooFewPoints(GPPCError):
    pass


class NoPlaneFound(GPPCError):
    pass


class EmptyInput(GPPCError, ValueError):
    pass


class InvalidBounds(GPPCError, ValueError):
    pass


class OutOfBounds(GPPCError, IndexError):
    pass


class CellSizeMismatch(GPPCError, ValueError):
    pass


class TemplateLargerThanGrid(GPPCError):
    pass


class BodyNotVisible(GPPCError):
    pass


class ParseError(GPPCError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedData(GPPCError):
    pass


class IoError(GPPCError, OSError):
    pass


class StageError(GPPCError):
    """A pipeline stage failed; ``stage`` names it and ``__cause__`` holds the error."""

    def __init__(self, stage, error):
        self.stage = stage
        self.error = error
        super().__init__(f"[{stage}] {type(error).__name__}: {error}")
