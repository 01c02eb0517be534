"""
Keygraph Lab Data Module

This module provides configuration values and numerical constants used throughout the lab.
"""

from .config import (
    DEBUG,
    CURRENT_VERSION,
    PROGRAM_NAME,
    THREADS_ENV_VAR,
    DEFAULT_MASTER_SEED,
    DEFAULT_TRIALS,
    DEFAULT_IDENTITY_GRID_SIZE,
    DEFAULT_IDENTITY_SEED,
)

from .constants import (
    IDENTITY_TOL,
    EXPANSION_TOL,
    MC_SIGMAS,
    WILSON_Z,
    P_MAX,
    DIMENSION_REL_TOL,
    ORACLE_MAX_TERMS,
    EXACT_P_LIMIT,
    MAX_NODES,
    OVERLAY_CHUNK_PAIRS,
    FLOAT_FORMAT,
    MODES,
    OUTPUT_FORMATS,
    DEVIATION_KINDS,
    DIMENSION_RULES,
    SCHEDULE_COLUMNS,
    SWEEP_COLUMNS,
    TRIAL_COLUMNS,
    ORACLE_GRID_N,
    ORACLE_GRID_MAX_P,
    ORACLE_GRID_ALPHAS,
    KEYMATH_GRID_MAX_K,
    KEYMATH_GRID_P_SPAN,
    PSI_PROBES,
)

__all__ = [
    # Config
    "DEBUG",
    "CURRENT_VERSION",
    "PROGRAM_NAME",
    "THREADS_ENV_VAR",
    "DEFAULT_MASTER_SEED",
    "DEFAULT_TRIALS",
    "DEFAULT_IDENTITY_GRID_SIZE",
    "DEFAULT_IDENTITY_SEED",
    # Constants
    "IDENTITY_TOL",
    "EXPANSION_TOL",
    "MC_SIGMAS",
    "WILSON_Z",
    "P_MAX",
    "DIMENSION_REL_TOL",
    "ORACLE_MAX_TERMS",
    "EXACT_P_LIMIT",
    "MAX_NODES",
    "OVERLAY_CHUNK_PAIRS",
    "FLOAT_FORMAT",
    "MODES",
    "OUTPUT_FORMATS",
    "DEVIATION_KINDS",
    "DIMENSION_RULES",
    "SCHEDULE_COLUMNS",
    "SWEEP_COLUMNS",
    "TRIAL_COLUMNS",
    "ORACLE_GRID_N",
    "ORACLE_GRID_MAX_P",
    "ORACLE_GRID_ALPHAS",
    "KEYMATH_GRID_MAX_K",
    "KEYMATH_GRID_P_SPAN",
    "PSI_PROBES",
]
