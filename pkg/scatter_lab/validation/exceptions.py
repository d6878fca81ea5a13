# validation/exceptions.py

import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Type

from .error_codes import LabErrorCode


@dataclass
class ErrorInfo:
    """Where and under which parameters an error was raised."""
    code: LabErrorCode
    component: str
    operation: str
    timestamp: float = field(default_factory=time.time)
    context: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'code': self.code.value,
            'code_name': self.code.name,
            'component': self.component,
            'operation': self.operation,
            'timestamp': self.timestamp,
            'context': self.context,
        }


class LabError(Exception):
    """Base exception for all laboratory errors."""

    default_code: LabErrorCode = LabErrorCode.UNKNOWN_ERROR

    def __init__(
        self,
        message: str,
        code: Optional[LabErrorCode] = None,
        error_info: Optional[ErrorInfo] = None,
        **kwargs
    ):
        super().__init__(message)
        self.message = message
        self.code = code or self.default_code
        self.error_info = error_info
        self.additional_info = kwargs

    def __str__(self) -> str:
        base_message = f"[{self.code.name}] {self.message}"
        if self.error_info:
            return f"{base_message} (in {self.error_info.component}.{self.error_info.operation})"
        return base_message

    def get_details(self) -> Dict[str, Any]:
        details = {
            'message': self.message,
            'code': self.code.value,
            'code_name': self.code.name,
            'additional_info': self.additional_info,
        }
        if self.error_info:
            details['error_info'] = self.error_info.to_dict()
        return details


# Category classes, one per code range.

class ConfigError(LabError):
    default_code = LabErrorCode.INVALID_PARAMETER


class GeometryError(LabError):
    default_code = LabErrorCode.UNKNOWN_ERROR


class WaveError(LabError):
    pass


class ProjectionError(LabError):
    pass


class ControlError(LabError):
    pass


class ReconstructionError(LabError):
    pass


class RayError(LabError):
    pass


class PacketError(LabError):
    pass


class ConfigSchemaError(ConfigError):
    """Config failed validation; `keys` lists every offending key."""
    default_code = LabErrorCode.CONFIG_SCHEMA

    def __init__(self, message: str, keys=(), **kwargs):
        super().__init__(message, **kwargs)
        self.keys = list(keys)

    def __str__(self) -> str:
        if not self.keys:
            return super().__str__()
        return f"{super().__str__()} [keys: {', '.join(self.keys)}]"


class OverlappingRegions(GeometryError):
    default_code = LabErrorCode.OVERLAPPING_REGIONS


class SpeedOutOfBounds(GeometryError):
    default_code = LabErrorCode.SPEED_OUT_OF_BOUNDS


class MalformedInterface(GeometryError):
    default_code = LabErrorCode.MALFORMED_INTERFACE


class OutOfDomain(GeometryError):
    default_code = LabErrorCode.OUT_OF_DOMAIN


class UnresolvedBoundary(GeometryError):
    default_code = LabErrorCode.UNRESOLVED_BOUNDARY


class PNotOnBoundary(GeometryError):
    default_code = LabErrorCode.P_NOT_ON_BOUNDARY


class GridTooCoarse(GeometryError):
    default_code = LabErrorCode.GRID_TOO_COARSE


class ChainContainmentError(GeometryError):
    default_code = LabErrorCode.CHAIN_CONTAINMENT


class UpsilonTooSmall(GeometryError):
    default_code = LabErrorCode.UPSILON_TOO_SMALL


class GridMismatch(WaveError):
    default_code = LabErrorCode.GRID_MISMATCH


class CFLViolation(WaveError):
    default_code = LabErrorCode.CFL_VIOLATION


class SupportViolation(WaveError):
    default_code = LabErrorCode.SUPPORT_VIOLATION


class AccessViolation(WaveError):
    """Raised whenever inverse-side code touches a value inside the hidden region."""
    default_code = LabErrorCode.ACCESS_VIOLATION


class SolverDivergence(ProjectionError):
    default_code = LabErrorCode.SOLVER_DIVERGENCE


class TOutOfRange(ControlError):
    default_code = LabErrorCode.T_OUT_OF_RANGE


class NotHarmonic(ReconstructionError):
    default_code = LabErrorCode.NOT_HARMONIC


class NonConvergent(ReconstructionError):
    default_code = LabErrorCode.NON_CONVERGENT


class DenominatorNearZero(ReconstructionError):
    default_code = LabErrorCode.DENOMINATOR_NEAR_ZERO


class InsufficientSamples(ReconstructionError):
    default_code = LabErrorCode.INSUFFICIENT_SAMPLES


class SpeedMissing(ReconstructionError):
    default_code = LabErrorCode.SPEED_MISSING


class TangentialCrossing(RayError):
    default_code = LabErrorCode.TANGENTIAL_CROSSING


class TIRTermination(RayError):
    default_code = LabErrorCode.TIR_TERMINATION


class GrazingAngle(RayError):
    default_code = LabErrorCode.GRAZING_ANGLE


class NoPathFound(RayError):
    default_code = LabErrorCode.NO_PATH_FOUND


class UnresolvedFrequency(PacketError):
    default_code = LabErrorCode.UNRESOLVED_FREQUENCY


class CutoffClipped(PacketError):
    default_code = LabErrorCode.CUTOFF_CLIPPED


class CausticInCollar(PacketError):
    default_code = LabErrorCode.CAUSTIC_IN_COLLAR


class NoisyProfile(PacketError):
    default_code = LabErrorCode.NOISY_PROFILE


class FrozenCoefficientWarning(UserWarning):
    """The speed varies by more than 1% over a packet cutoff."""


_CATEGORY_CLASSES: Dict[str, Type[LabError]] = {
    "Config": ConfigError,
    "Geometry": GeometryError,
    "Wave": WaveError,
    "Projection": ProjectionError,
    "Control": ControlError,
    "Reconstruction": ReconstructionError,
    "Ray": RayError,
    "Packet": PacketError,
}


def create_error(
    code: LabErrorCode,
    message: str,
    component: str,
    operation: str,
    **context
) -> LabError:
    """Factory function to create an error of the code's category."""
    error_info = ErrorInfo(
        code=code,
        component=component,
        operation=operation,
        context=context,
    )
    error_class = _CATEGORY_CLASSES.get(LabErrorCode.get_category(code), LabError)
    return error_class(message, code, error_info=error_info)
