# validation/validators/__init__.py

from .base import (
    BaseValidator,
    ValidationResult,
    ValidationSeverity
)
from .config import ConfigValidator

__all__ = [
    'BaseValidator',
    'ValidationResult',
    'ValidationSeverity',
    'ConfigValidator',
]
