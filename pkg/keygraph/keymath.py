"""
Exact probability kernel for the Eschenauer-Gligor key scheme.

Binomial ratios are evaluated as telescoping products of at most K factors
in log space, so pools up to 10^9 keys never touch a factorial. A rational
slow path built on integer binomials backs every value for pools up to
EXACT_P_LIMIT keys.
"""

import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from data import EXACT_P_LIMIT
from .errors import InvalidParameterError


@dataclass(frozen=True)
class Theta:
    """Key-ring size K drawn from a pool of P keys, with 1 <= K < P."""

    K: int
    P: int

    def __post_init__(self):
        for name in ("K", "P"):
            value = getattr(self, name)
            if isinstance(value, bool):
                raise InvalidParameterError(f"{name} must be an integer")
            try:
                object.__setattr__(self, name, operator.index(value))
            except TypeError:
                raise InvalidParameterError(
                    f"{name} must be an integer. Received: {type(value).__name__}."
                ) from None

        if self.K < 1:
            raise InvalidParameterError(f"K must be at least 1. Received: {self.K}.")
        if self.P < 2:
            raise InvalidParameterError(f"P must be at least 2. Received: {self.P}.")
        if self.K >= self.P:
            raise InvalidParameterError(
                f"K must be smaller than P. Received: K={self.K}, P={self.P}."
            )


def check_probability(value, name="alpha"):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidParameterError(
            f"{name} must be a number. Received: {type(value).__name__}."
        ) from None

    if not 0.0 <= value <= 1.0:
        raise InvalidParameterError(f"{name} must lie in [0, 1]. Received: {value}.")
    return value


def _check_key_count(r):
    if isinstance(r, bool):
        raise InvalidParameterError("r must be an integer")
    try:
        r = operator.index(r)
    except TypeError:
        raise InvalidParameterError(
            f"r must be an integer. Received: {type(r).__name__}."
        ) from None
    if r < 0:
        raise InvalidParameterError(f"r must be non-negative. Received: {r}.")
    return r


def _log_comb(a, b):
    b = min(b, a - b)
    return math.fsum(math.log(a - i) - math.log(b - i) for i in range(b))


def log_v(theta, r):
    """log of C(P - r, K) / C(P, K); -inf once r exceeds P - K."""
    r = _check_key_count(r)
    K, P = theta.K, theta.P

    if r > P - K:
        return -math.inf
    if r == 0:
        return 0.0

    # (P - r - i) / (P - i) = 1 - r / (P - i)
    return math.fsum(math.log1p(-r / (P - i)) for i in range(K))


def v(theta, r):
    """Probability that a key ring avoids a fixed set of r keys."""
    return math.exp(log_v(theta, r))


def q(theta):
    """Probability that two independent key rings are disjoint."""
    if theta.P < 2 * theta.K:
        return 0.0
    return v(theta, theta.K)


def one_minus_q(theta):
    if theta.P < 2 * theta.K:
        return 1.0
    return -math.expm1(log_v(theta, theta.K))


def p_edge(theta, alpha):
    """Edge probability of the intersection graph, alpha * (1 - q)."""
    alpha = check_probability(alpha)
    return alpha * one_minus_q(theta)


def overlap_pmf(theta):
    """Law of |K1 & K2| for two independent rings, as (m, prob) pairs."""
    K, P = theta.K, theta.P
    m_min = max(0, 2 * K - P)

    if m_min == 0:
        log_prob = log_v(theta, K)
    else:
        # C(P - K, K - m_min) = 1 here
        log_prob = _log_comb(K, m_min) - _log_comb(P, K)

    pmf = [(m_min, math.exp(log_prob))]
    for m in range(m_min, K):
        log_prob += (
            2.0 * math.log(K - m) - math.log(m + 1) - math.log(P - 2 * K + m + 1)
        )
        pmf.append((m + 1, math.exp(log_prob)))

    return pmf


def psi(x):
    """Psi(x) = -x - log(1 - x), the integral of t / (1 - t) over [0, x]."""
    if not 0.0 <= x < 1.0:
        raise InvalidParameterError(f"psi is defined on [0, 1). Received: {x}.")

    if x < 1e-3:
        return math.fsum(x**k / k for k in range(2, 12))
    return -x - math.log1p(-x)


# ----------------Exact rational slow path----------------


def _check_exact_pool(theta, max_pool):
    if max_pool is not None and theta.P > max_pool:
        raise InvalidParameterError(
            f"Exact arithmetic is limited to P <= {max_pool}. Received: P={theta.P}."
        )


def exact_v(theta, r, max_pool=EXACT_P_LIMIT):
    _check_exact_pool(theta, max_pool)
    r = _check_key_count(r)
    K, P = theta.K, theta.P

    if r > P - K:
        return Fraction(0)
    return Fraction(math.comb(P - r, K), math.comb(P, K))


def exact_q(theta, max_pool=EXACT_P_LIMIT):
    _check_exact_pool(theta, max_pool)
    if theta.P < 2 * theta.K:
        return Fraction(0)
    return exact_v(theta, theta.K, max_pool)


def exact_overlap_pmf(theta, max_pool=EXACT_P_LIMIT):
    _check_exact_pool(theta, max_pool)
    K, P = theta.K, theta.P
    total = math.comb(P, K)

    return [
        (m, Fraction(math.comb(K, m) * math.comb(P - K, K - m), total))
        for m in range(max(0, 2 * K - P), K + 1)
    ]
