# validation/error_codes.py

from enum import Enum
from typing import Dict, Optional


class LabErrorCode(Enum):
    """Error codes for laboratory failures."""

    # General and configuration errors (0-99)
    SUCCESS = 0
    UNKNOWN_ERROR = 1
    INVALID_PARAMETER = 2
    CONFIG_SCHEMA = 3
    MISSING_FILE = 4
    INTERNAL_ERROR = 7

    # Geometry errors (100-199)
    OVERLAPPING_REGIONS = 100
    SPEED_OUT_OF_BOUNDS = 101
    MALFORMED_INTERFACE = 102
    OUT_OF_DOMAIN = 103
    UNRESOLVED_BOUNDARY = 104
    P_NOT_ON_BOUNDARY = 105
    GRID_TOO_COARSE = 106
    CHAIN_CONTAINMENT = 107
    UPSILON_TOO_SMALL = 108

    # Wave errors (200-299)
    GRID_MISMATCH = 200
    CFL_VIOLATION = 201
    SUPPORT_VIOLATION = 202
    ACCESS_VIOLATION = 203

    # Projection errors (300-399)
    SOLVER_DIVERGENCE = 300

    # Control errors (400-499)
    T_OUT_OF_RANGE = 400

    # Reconstruction errors (500-599)
    NOT_HARMONIC = 500
    NON_CONVERGENT = 501
    DENOMINATOR_NEAR_ZERO = 502
    INSUFFICIENT_SAMPLES = 503
    SPEED_MISSING = 504

    # Ray errors (600-699)
    TANGENTIAL_CROSSING = 600
    TIR_TERMINATION = 601
    GRAZING_ANGLE = 602
    NO_PATH_FOUND = 603

    # Packet and interface errors (700-799)
    UNRESOLVED_FREQUENCY = 700
    CUTOFF_CLIPPED = 701
    CAUSTIC_IN_COLLAR = 702
    NOISY_PROFILE = 703

    # Warnings (800-899)
    FROZEN_COEFFICIENT = 800
    DATA_OUTSIDE_THETA = 801
    SPEED_FLAGGED = 802

    @classmethod
    def get_category(cls, code: 'LabErrorCode') -> str:
        """Get the category for an error code."""
        code_value = code.value
        if code_value < 100:
            return "Config"
        elif code_value < 200:
            return "Geometry"
        elif code_value < 300:
            return "Wave"
        elif code_value < 400:
            return "Projection"
        elif code_value < 500:
            return "Control"
        elif code_value < 600:
            return "Reconstruction"
        elif code_value < 700:
            return "Ray"
        elif code_value < 800:
            return "Packet"
        else:
            return "Warning"

    @classmethod
    def is_error(cls, code: 'LabErrorCode') -> bool:
        """Warnings and SUCCESS are not errors."""
        return code != cls.SUCCESS and code.value < 800


class ErrorCodeFormatter:
    """Formats error codes into user-facing hints."""

    _HINTS: Dict[LabErrorCode, str] = {
        LabErrorCode.CONFIG_SCHEMA: "Check the listed keys against config.yaml",
        LabErrorCode.MISSING_FILE: "Paths are resolved relative to the config file",
        LabErrorCode.CFL_VIOLATION: "Reduce solver.dt or leave it unset to derive it from the CFL number",
        LabErrorCode.UPSILON_TOO_SMALL: "Enlarge grid.extent so waves cannot reach the outer boundary in 2*t_max",
        LabErrorCode.GRID_TOO_COARSE: "Refine grid.spacing or reduce j_max",
        LabErrorCode.UNRESOLVED_FREQUENCY: "Refine grid.spacing or lower the packet scale",
        LabErrorCode.SUPPORT_VIOLATION: "Initial data must avoid the hidden region",
    }

    @classmethod
    def format(cls, code: LabErrorCode, message: Optional[str] = None) -> str:
        category = LabErrorCode.get_category(code)
        text = f"{category} error {code.value} ({code.name})"
        if message:
            text = f"{text}: {message}"
        hint = cls._HINTS.get(code)
        if hint:
            text = f"{text}. Hint: {hint}"
        return text
