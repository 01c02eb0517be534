"""
Keygraph Lab Module

This module provides the key-graph probability kernel, graph sampling,
closed-form isolation moments, scaling schedules and the exact oracle.
"""

from .errors import (
    KeygraphError,
    InvalidParameterError,
    InconsistentDeviationError,
    InfeasibleTargetError,
    EnumerationTooLargeError,
    OracleMismatchError,
)

from .keymath import (
    Theta,
    check_probability,
    log_v,
    v,
    q,
    one_minus_q,
    p_edge,
    overlap_pmf,
    psi,
    exact_v,
    exact_q,
    exact_overlap_pmf,
)

from .graphgen import (
    ModelParams,
    RngSpec,
    GraphSample,
    substream_seed,
    pair_count,
    pair_index,
    sample_key_rings,
    sample_er_overlay,
    unpack_pairs,
    key_adjacent_pairs,
    intersect_and_count,
    wilson_interval,
    summarize_counts,
    resolve_workers,
    run_trials,
)

from .moments import (
    isolation_probability,
    first_moment,
    first_moment_expansion,
    first_moment_bound,
    cross_moment_exact,
    second_moment,
    r_chain,
    second_moment_ratio,
    probability_bounds,
    moment_report,
)

from .scaling import (
    REGIME_LABEL,
    DeviationSpec,
    ScheduleEntry,
    strong_to_deviation,
    deviation_of,
    build_schedule,
    schedule_rows,
    write_schedule_csv,
    alpha_schedule_from_config,
    deviation_from_config,
    classify_regime,
)

from .oracle import (
    enumeration_terms,
    enumerate_exact,
    exact_vs_formula,
    oracle_grid_points,
    oracle_grid,
)

from .invariants import run_invariant_suite

from .export import format_value, write_csv, to_jsonable, dumps_json

__all__ = [
    # Errors
    "KeygraphError",
    "InvalidParameterError",
    "InconsistentDeviationError",
    "InfeasibleTargetError",
    "EnumerationTooLargeError",
    "OracleMismatchError",
    # Key math
    "Theta",
    "check_probability",
    "log_v",
    "v",
    "q",
    "one_minus_q",
    "p_edge",
    "overlap_pmf",
    "psi",
    "exact_v",
    "exact_q",
    "exact_overlap_pmf",
    # Graph sampling
    "ModelParams",
    "RngSpec",
    "GraphSample",
    "substream_seed",
    "pair_count",
    "pair_index",
    "sample_key_rings",
    "sample_er_overlay",
    "unpack_pairs",
    "key_adjacent_pairs",
    "intersect_and_count",
    "wilson_interval",
    "summarize_counts",
    "resolve_workers",
    "run_trials",
    # Moments
    "isolation_probability",
    "first_moment",
    "first_moment_expansion",
    "first_moment_bound",
    "cross_moment_exact",
    "second_moment",
    "r_chain",
    "second_moment_ratio",
    "probability_bounds",
    "moment_report",
    # Scaling
    "REGIME_LABEL",
    "DeviationSpec",
    "ScheduleEntry",
    "strong_to_deviation",
    "deviation_of",
    "build_schedule",
    "schedule_rows",
    "write_schedule_csv",
    "alpha_schedule_from_config",
    "deviation_from_config",
    "classify_regime",
    # Oracle
    "enumeration_terms",
    "enumerate_exact",
    "exact_vs_formula",
    "oracle_grid_points",
    "oracle_grid",
    # Invariants
    "run_invariant_suite",
    # Export
    "format_value",
    "write_csv",
    "to_jsonable",
    "dumps_json",
]
