from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum, auto
import logging
from typing import Any, Dict, List, Optional, Set

from ..error_codes import LabErrorCode
from ..exceptions import ConfigSchemaError, LabError

logger = logging.getLogger(__name__)


class ValidationSeverity(Enum):
    INFO = auto()
    WARNING = auto()
    ERROR = auto()
    FATAL = auto()


@dataclass
class ValidationResult:
    """Result of a validation operation."""
    success: bool
    severity: ValidationSeverity
    error_code: Optional[LabErrorCode] = None
    message: str = ""
    key: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)
    child_results: List['ValidationResult'] = field(default_factory=list)

    def failures(self) -> List['ValidationResult']:
        """Flatten the tree into its failed leaves."""
        if not self.child_results:
            return [] if self.success else [self]
        out: List[ValidationResult] = []
        for child in self.child_results:
            out.extend(child.failures())
        return out


class BaseValidator:
    """Base class for validators that run named scopes and collect results."""

    def __init__(self):
        self.validation_stack: List[str] = []
        self._active_validations: Set[str] = set()
        self._validation_results: Dict[str, ValidationResult] = {}

    def begin_validation(self, name: str) -> None:
        if name in self._active_validations:
            raise LabError(f"Validation '{name}' is already active", LabErrorCode.INTERNAL_ERROR)
        self._active_validations.add(name)
        self.validation_stack.append(name)
        logger.debug(f"Beginning validation: {name}")

    def end_validation(self, name: str) -> ValidationResult:
        if name not in self._active_validations:
            raise LabError(f"Validation '{name}' is not active", LabErrorCode.INTERNAL_ERROR)
        if name != self.validation_stack[-1]:
            raise LabError(
                f"Validation end mismatch. Expected {self.validation_stack[-1]}, got {name}",
                LabErrorCode.INTERNAL_ERROR,
            )
        self._active_validations.remove(name)
        self.validation_stack.pop()
        result = self._validation_results.get(name)
        if result is None:
            result = ValidationResult(
                success=True,
                severity=ValidationSeverity.INFO,
                message=f"Validation {name} completed with no issues",
            )
            self._validation_results[name] = result
        logger.debug(f"Ending validation: {name} (success={result.success})")
        return result

    def add_validation_result(self, result: ValidationResult) -> None:
        """Attach a result to the innermost active scope."""
        if not self.validation_stack:
            raise LabError("No active validation scope", LabErrorCode.INTERNAL_ERROR)
        current = self.validation_stack[-1]
        group = self._validation_results.get(current)
        if group is None:
            group = ValidationResult(
                success=True,
                severity=ValidationSeverity.INFO,
                message=f"Validation group: {current}",
            )
            self._validation_results[current] = group
        group.child_results.append(result)
        if not result.success:
            group.success = False
            if result.severity.value > group.severity.value:
                group.severity = result.severity

    def fail(self, key: str, message: str, code: LabErrorCode = LabErrorCode.CONFIG_SCHEMA) -> None:
        self.add_validation_result(ValidationResult(
            success=False,
            severity=ValidationSeverity.ERROR,
            error_code=code,
            message=message,
            key=key,
        ))

    @contextmanager
    def validation_scope(self, name: str):
        self.begin_validation(name)
        try:
            yield
        finally:
            self.end_validation(name)

    def get_result(self, validation_name: str) -> Optional[ValidationResult]:
        return self._validation_results.get(validation_name)

    def raise_for_failures(self, validation_name: str) -> None:
        """Raise one ConfigSchemaError naming every failed key of a scope."""
        result = self.get_result(validation_name)
        if result is None or result.success:
            return
        failures = result.failures()
        for failure in failures:
            logger.error(f"{failure.key}: {failure.message}")
        keys = [f.key for f in failures if f.key]
        messages = "; ".join(f"{f.key}: {f.message}" for f in failures)
        raise ConfigSchemaError(f"Invalid configuration: {messages}", keys=keys)

    def reset(self) -> None:
        self.validation_stack.clear()
        self._active_validations.clear()
        self._validation_results.clear()
