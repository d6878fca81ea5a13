import logging
import threading
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, Optional

from .error_codes import ErrorCodeFormatter, LabErrorCode
from .exceptions import ConfigError, LabError, create_error

logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    OK = 0
    CONFIG_ERROR = 2
    NUMERICAL_FAILURE = 3


@dataclass
class HandledError:
    code: LabErrorCode
    message: str
    exit_code: ExitCode


@dataclass
class ErrorCollector:
    """Errors seen during one run, counted by code."""
    max_errors: int = 1000
    errors: List[HandledError] = field(default_factory=list)
    _counts: Dict[LabErrorCode, int] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def add(self, error: HandledError) -> None:
        with self._lock:
            if len(self.errors) < self.max_errors:
                self.errors.append(error)
            self._counts[error.code] = self._counts.get(error.code, 0) + 1

    def has_errors(self) -> bool:
        return bool(self.errors)

    def summary(self) -> Dict[str, int]:
        return {code.name: count for code, count in self._counts.items()}

    def by_category(self) -> Dict[str, int]:
        categories: Dict[str, int] = {}
        for code, count in self._counts.items():
            category = LabErrorCode.get_category(code)
            categories[category] = categories.get(category, 0) + count
        return categories


def exit_code_for(error: BaseException) -> ExitCode:
    """2 for configuration problems and missing files, 3 for any other lab failure."""
    if isinstance(error, (ConfigError, FileNotFoundError)):
        return ExitCode.CONFIG_ERROR
    if isinstance(error, LabError):
        return ExitCode.NUMERICAL_FAILURE
    raise error


class LabErrorHandler:
    """Turns exceptions escaping a command into a logged message and an exit code."""

    def __init__(self, collector: Optional[ErrorCollector] = None):
        self.collector = collector or ErrorCollector()

    def handle(self, error: BaseException, operation: str = "run") -> ExitCode:
        exit_code = exit_code_for(error)
        if not isinstance(error, LabError):
            error = create_error(LabErrorCode.MISSING_FILE, str(error), "main", operation,
                                 filename=getattr(error, 'filename', None))
        message = ErrorCodeFormatter.format(error.code, error.message)
        self.collector.add(HandledError(code=error.code, message=message, exit_code=exit_code))
        # warning codes raised as exceptions still fail the run but log one level lower
        logger.log(logging.ERROR if LabErrorCode.is_error(error.code) else logging.WARNING, message)
        return exit_code
