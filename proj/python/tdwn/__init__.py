"""Simulator and closed-form analytics for the TDWN cache-poisoning defense."""

from ._core import (
    ConfigError,
    InvariantViolation,
    Metrics,
    QueryIntervalStats,
    QueryEventTrace,
    Simulator,
    SuccessCurve,
    TimeToSuccess,
    UnreachableTarget,
    effective_outstanding,
    figure_csv,
    figure_names,
    guess_space_size,
    independence_bound,
    mc_query_intervals,
    p_round_fail,
    query_event_process,
    simulate,
    success_curve,
    success_within_rounds,
    time_to_success,
)

__all__ = [
    "ConfigError",
    "InvariantViolation",
    "Metrics",
    "QueryIntervalStats",
    "QueryEventTrace",
    "Simulator",
    "SuccessCurve",
    "TimeToSuccess",
    "UnreachableTarget",
    "effective_outstanding",
    "figure_csv",
    "figure_names",
    "guess_space_size",
    "independence_bound",
    "mc_query_intervals",
    "p_round_fail",
    "query_event_process",
    "simulate",
    "success_curve",
    "success_within_rounds",
    "time_to_success",
]
