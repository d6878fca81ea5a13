# validation/__init__.py

from .error_codes import ErrorCodeFormatter, LabErrorCode
from .error_handlers import ErrorCollector, ExitCode, LabErrorHandler, exit_code_for
from .exceptions import (
    ConfigError,
    ConfigSchemaError,
    ControlError,
    ErrorInfo,
    FrozenCoefficientWarning,
    GeometryError,
    LabError,
    PacketError,
    ProjectionError,
    RayError,
    ReconstructionError,
    WaveError,
    create_error,
)
from .validators import BaseValidator, ConfigValidator, ValidationResult, ValidationSeverity

__all__ = [
    'ErrorCodeFormatter',
    'LabErrorCode',
    'ErrorCollector',
    'ExitCode',
    'LabErrorHandler',
    'exit_code_for',
    'ConfigError',
    'ConfigSchemaError',
    'ControlError',
    'ErrorInfo',
    'FrozenCoefficientWarning',
    'GeometryError',
    'LabError',
    'PacketError',
    'ProjectionError',
    'RayError',
    'ReconstructionError',
    'WaveError',
    'create_error',
    'BaseValidator',
    'ConfigValidator',
    'ValidationResult',
    'ValidationSeverity',
]
