from .geometry import AirProperties, RoomGeometry
from .cases import VELOCITY_RANGE, CaseSpec, DiscretizedCase, build_case, build_validation_case
from .simple import FlowState, SolverError, solve_steady
from .state import energy_balance, extract_profile, mass_imbalance
from .caseio import CaseFileError, CaseResult, read_case, write_case

__all__ = [
    "AirProperties",
    "RoomGeometry",
    "VELOCITY_RANGE",
    "CaseSpec",
    "DiscretizedCase",
    "build_case",
    "build_validation_case",
    "FlowState",
    "SolverError",
    "solve_steady",
    "energy_balance",
    "extract_profile",
    "mass_imbalance",
    "CaseFileError",
    "CaseResult",
    "read_case",
    "write_case",
]
