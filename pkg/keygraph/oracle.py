"""
Brute-force law of I_n on tiny instances, in exact rational arithmetic.

Key-ring assignments are enumerated once and bucketed by the set of
K-adjacent pairs they produce; conditional on that set, every ER channel
pattern is enumerated with its own weight.
"""

import math
from collections import Counter
from fractions import Fraction
from itertools import combinations, product
from data import (
    IDENTITY_TOL,
    ORACLE_GRID_ALPHAS,
    ORACLE_GRID_MAX_P,
    ORACLE_GRID_N,
    ORACLE_MAX_TERMS,
)
from .errors import EnumerationTooLargeError, OracleMismatchError
from .graphgen import ModelParams, pair_count
from .keymath import Theta
from .moments import first_moment, probability_bounds, second_moment


def _popcount(value):
    return bin(value).count("1")


def enumeration_terms(params):
    n, theta = params.n, params.theta
    return math.comb(theta.P, theta.K) ** n * 2 ** pair_count(n)


def enumerate_exact(params):
    terms = enumeration_terms(params)
    if terms > ORACLE_MAX_TERMS:
        raise EnumerationTooLargeError(terms, ORACLE_MAX_TERMS)

    n, K, P = params.n, params.theta.K, params.theta.P
    pairs = list(combinations(range(n), 2))
    rings = [sum(1 << key for key in ring) for ring in combinations(range(P), K)]

    # K-adjacency pattern (bit b set iff pair b shares a key) -> assignment count
    patterns = Counter()
    for assignment in product(rings, repeat=n):
        mask = 0
        for bit, (i, j) in enumerate(pairs):
            if assignment[i] & assignment[j]:
                mask |= 1 << bit
        patterns[mask] += 1

    isolated_by_edges = []
    for live in range(2 ** len(pairs)):
        touched = 0
        for bit, (i, j) in enumerate(pairs):
            if live >> bit & 1:
                touched |= (1 << i) | (1 << j)
        isolated_by_edges.append(n - _popcount(touched))

    alpha = Fraction(params.alpha)
    channel_weights = [
        alpha ** _popcount(up) * (1 - alpha) ** (len(pairs) - _popcount(up))
        for up in range(2 ** len(pairs))
    ]

    total = len(rings) ** n
    pmf_exact = {k: Fraction(0) for k in range(n + 1)}
    for mask, count in sorted(patterns.items()):
        key_weight = Fraction(count, total)
        for up, weight in enumerate(channel_weights):
            if weight:
                pmf_exact[isolated_by_edges[mask & up]] += key_weight * weight

    e_I = sum(k * prob for k, prob in pmf_exact.items())
    e_I2 = sum(k * k * prob for k, prob in pmf_exact.items())

    return {
        "params": params.as_dict(),
        "pmf_I": {k: float(prob) for k, prob in pmf_exact.items()},
        "pmf_exact": pmf_exact,
        "p_no_isolated": float(pmf_exact[0]),
        "e_I": float(e_I),
        "e_I2": float(e_I2),
    }


def _close(expected, actual):
    return abs(expected - actual) <= IDENTITY_TOL * max(1.0, abs(expected))


def exact_vs_formula(params):
    """Check the closed forms against enumeration; raise on the first mismatch."""
    exact = enumerate_exact(params)
    lower, upper = probability_bounds(params)

    record = {
        "params": params.as_dict(),
        "e_I": exact["e_I"],
        "first_moment": first_moment(params),
        "e_I2": exact["e_I2"],
        "second_moment": second_moment(params),
        "p_no_isolated": exact["p_no_isolated"],
        "lower_bound_P0": lower,
        "upper_bound_P0": upper,
    }

    if not _close(record["e_I"], record["first_moment"]):
        raise OracleMismatchError("first_moment", record["e_I"], record["first_moment"])
    if not _close(record["e_I2"], record["second_moment"]):
        raise OracleMismatchError(
            "second_moment", record["e_I2"], record["second_moment"]
        )
    if not lower - IDENTITY_TOL <= record["p_no_isolated"] <= upper + IDENTITY_TOL:
        raise OracleMismatchError(
            "probability_bounds", record["p_no_isolated"], [lower, upper]
        )

    return record


def oracle_grid_points(
    n_values=ORACLE_GRID_N, max_P=ORACLE_GRID_MAX_P, alphas=ORACLE_GRID_ALPHAS
):
    for n in n_values:
        for P in range(2, max_P + 1):
            for K in range(1, P):
                for alpha in alphas:
                    yield ModelParams(n=n, theta=Theta(K=K, P=P), alpha=alpha)


def oracle_grid(n_values=ORACLE_GRID_N, max_P=ORACLE_GRID_MAX_P, alphas=ORACLE_GRID_ALPHAS):
    return [
        exact_vs_formula(params)
        for params in oracle_grid_points(n_values, max_P, alphas)
    ]
