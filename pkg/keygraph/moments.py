"""
Closed-form moments of the isolated-node count I_n of K-cap-G(n; theta, alpha).

E[I_n] = n (1 - p)^(n-1). The cross moment E[chi_1 chi_2] depends on the two
key rings only through |K1 & K2|, so it is an exact finite sum over the
overlap law rather than an estimate.
"""

import math
from data import EXPANSION_TOL
from .errors import InconsistentDeviationError, InvalidParameterError
from .keymath import one_minus_q, overlap_pmf, p_edge, psi, q, v


def _exp(x):
    return math.inf if x > 709.0 else math.exp(x)


def _power(base, exponent):
    if exponent == 0:
        return 1.0
    if base <= 0.0:
        return 0.0
    return _exp(exponent * math.log(base))


def _power_1p(x, exponent):
    """(1 + x)^exponent via log1p; x may be negative."""
    if exponent == 0:
        return 1.0
    if x <= -1.0:
        return 0.0
    return _exp(exponent * math.log1p(x))


def isolation_probability(params):
    """E[chi_1] = (1 - p)^(n - 1)."""
    n = params.n
    if n == 1:
        return 1.0

    p = p_edge(params.theta, params.alpha)
    if p >= 1.0:
        return 0.0
    return math.exp((n - 1) * math.log1p(-p))


def first_moment(params):
    return params.n * isolation_probability(params)


def _check_deviation(params, gamma_n):
    n = params.n
    p = p_edge(params.theta, params.alpha)
    if p >= 1.0:
        raise InconsistentDeviationError("the first-moment expansion needs p < 1")

    implied = (math.log(n) + gamma_n) / n
    if abs(p - implied) > EXPANSION_TOL * max(1.0, abs(p)):
        raise InconsistentDeviationError(
            f"gamma_n={gamma_n!r} implies p={implied!r}, but the model has p={p!r}"
        )
    return p


def first_moment_expansion(params, gamma_n):
    """
    Split E[I_n] into n^(1/n) * exp(-((n-1)/n) gamma_n) * exp(-(n-1) Psi(p)).

    gamma_n must satisfy p = (log n + gamma_n) / n.
    """
    p = _check_deviation(params, gamma_n)
    n = params.n

    root_factor = n ** (1.0 / n)
    deviation_factor = _exp(-((n - 1) / n) * gamma_n)
    psi_factor = math.exp(-(n - 1) * psi(p))

    return {
        "root_factor": root_factor,
        "deviation_factor": deviation_factor,
        "psi_factor": psi_factor,
        "product": root_factor * deviation_factor * psi_factor,
    }


def first_moment_bound(params, gamma_n):
    """n^(1/n) exp(-((n-1)/n) gamma_n), an upper bound on E[I_n]."""
    _check_deviation(params, gamma_n)
    n = params.n
    return n ** (1.0 / n) * _exp(-((n - 1) / n) * gamma_n)


def cross_moment_exact(params):
    """E[chi_1 chi_2] = sum_m P(M = m) (1 - alpha [m >= 1]) Z_m^(n-2)."""
    n = params.n
    if n < 2:
        raise InvalidParameterError("the cross moment needs at least two nodes")

    theta, alpha = params.theta, params.alpha
    p = p_edge(theta, alpha)
    q_value = q(theta)

    terms = []
    for m, prob in overlap_pmf(theta):
        weight = 1.0 if m == 0 else 1.0 - alpha
        if prob == 0.0 or weight == 0.0:
            continue
        z = (1.0 - p) ** 2 + alpha**2 * (v(theta, 2 * theta.K - m) - q_value**2)
        terms.append(prob * weight * _power(z, n - 2))

    return math.fsum(terms)


def second_moment(params):
    """E[I_n^2] = n E[chi_1] + n (n - 1) E[chi_1 chi_2]."""
    n = params.n
    if n == 1:
        return 1.0
    return n * isolation_probability(params) + n * (n - 1) * cross_moment_exact(params)


def r_chain(params):
    """
    R_n, its bounds R*_n and R°_n, and the key bound q + (1 - q) R*_n.

    R_n is returned together with its disjoint-ring part (at most q) and
    its overlapping-ring part (at most (1 - alpha)(1 - q) R*_n).
    """
    n = params.n
    theta, alpha = params.theta, params.alpha
    p = p_edge(theta, alpha)
    if n < 2:
        raise InvalidParameterError("R_n needs at least two nodes")
    if p >= 1.0:
        raise InvalidParameterError("R_n needs p < 1")

    q_value = q(theta)
    not_q = one_minus_q(theta)
    scale = (1.0 - p) ** 2

    disjoint, overlapping = [], []
    for m, prob in overlap_pmf(theta):
        weight = 1.0 if m == 0 else 1.0 - alpha
        if prob == 0.0 or weight == 0.0:
            continue
        z_tilde = alpha**2 * (v(theta, 2 * theta.K - m) - q_value**2) / scale
        term = prob * weight * _power_1p(z_tilde, n - 2)
        (disjoint if m == 0 else overlapping).append(term)

    r_star = _exp((n - 2) * alpha * q_value * p / scale)
    r_circ = _exp(alpha * math.log(n) / scale)

    return {
        "r_n": math.fsum(disjoint + overlapping),
        "r_disjoint": math.fsum(disjoint),
        "r_overlap": math.fsum(overlapping),
        "r_star": r_star,
        "r_circ": r_circ,
        "bound_rhs": q_value + not_q * r_star,
        "r_circ_rhs": q_value + not_q * r_circ,
    }


def second_moment_ratio(params):
    """E[I^2] / (E I)^2 as 1/E[I] + ((n-1)/n) E[chi_1 chi_2] / E[chi_1]^2."""
    n = params.n
    mean = first_moment(params)
    if mean == 0.0:
        return 1.0
    if n == 1:
        return 1.0 / mean

    p = p_edge(params.theta, params.alpha)
    cross_ratio = r_chain(params)["r_n"] / (1.0 - p) ** 2
    return 1.0 / mean + (n - 1) / n * cross_ratio


def probability_bounds(params):
    """
    First- and second-moment bounds on P(I_n = 0).

    1 - E[I] <= P(I = 0) <= 1 - (E I)^2 / E[I^2]; the upper bound is 1 when
    E[I] = 0. Writing the ratio as E[I] * (E[I] / E[I^2]) keeps the pair
    ordered in floating point whenever E[I^2] >= E[I].
    """
    mean = first_moment(params)
    lower = max(0.0, 1.0 - mean)

    if mean > 0.0:
        upper = min(1.0, max(0.0, 1.0 - mean * (mean / second_moment(params))))
    else:
        upper = 1.0

    return lower, upper


def moment_report(params):
    n = params.n
    theta, alpha = params.theta, params.alpha
    p = p_edge(theta, alpha)
    lower, upper = probability_bounds(params)

    report = params.as_dict()
    report.update(
        {
            "q": q(theta),
            "p": p,
            "first_moment": first_moment(params),
            "cross_moment": cross_moment_exact(params) if n >= 2 else None,
            "second_moment": second_moment(params),
            "ratio": second_moment_ratio(params),
            "lower_bound_P0": lower,
            "upper_bound_P0": upper,
            "r_n": None,
            "r_star": None,
            "r_circ": None,
        }
    )

    if n >= 2 and p < 1.0:
        chain = r_chain(params)
        report["r_n"] = chain["r_n"]
        report["r_star"] = chain["r_star"]
        report["r_circ"] = chain["r_circ"]

    return report
