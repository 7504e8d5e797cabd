"""
Exception types shared by all pipeline stages.
Every error carries the process exit code the CLI reports for it.
"""

from typing import Optional


class CitescanError(Exception):
    """Base class for data errors (exit code 2)"""
    exit_code = 2


class UsageError(CitescanError):
    """Invalid command-line usage (exit code 1)"""
    exit_code = 1


class EmptyCorpus(CitescanError):
    pass


class DegenerateCorpus(CitescanError):
    pass


class TooFewItems(CitescanError):
    pass


class SampleTooLarge(CitescanError):
    pass


class LexiconMissing(CitescanError):
    pass


class LengthMismatch(CitescanError):
    pass


class EmptySpans(CitescanError):
    pass


class UnsupportedModelVersion(CitescanError):
    pass


class EvaluationError(CitescanError):
    pass


class ParseError(CitescanError):
    """A malformed line in an input file"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        if path and line:
            location = f"{path}:{line}: "
        elif path or line:
            location = f"{path}: " if path else f"line {line}: "
        else:
            location = ""
        super().__init__(f"{location}{message}")


class OffsetOutOfBounds(ParseError):
    pass
