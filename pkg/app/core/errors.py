# error hierarchy shared by services and the command line

from typing import List, Optional, Tuple


class AQRelaxError(Exception):
    exit_code = 1


class UsageError(AQRelaxError):
    exit_code = 3


class ConfigurationError(AQRelaxError):
    exit_code = 3

    def __init__(self, message: str, errors: Optional[List[Tuple[int, str]]] = None):
        super().__init__(message)
        self.errors = errors or []

    def __str__(self):
        if not self.errors:
            return super().__str__()
        lines = [f"line {line}: {msg}" if line else msg for line, msg in self.errors]
        return super().__str__() + "\n" + "\n".join(lines)


class ConstantRankViolation(AQRelaxError):
    exit_code = 3

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        # (x, lambda, rank)
        self.witness = witness


class ResolutionError(AQRelaxError):
    exit_code = 3


class DivergedError(AQRelaxError):
    exit_code = 4


class ArtifactIOError(AQRelaxError):
    exit_code = 5


VERDICT_FAIL_EXIT = 2
