"""
Scalings alpha_n (1 - q(theta_n)) = (log n + gamma_n) / n.

Integer (K, P) cannot hit a real-valued target exactly, so every schedule
entry records the deviation it asked for next to the one it achieved. A
fixed (K, P) sequence asks for none and only records what it achieves.
"""

import math
import numpy as np
from dataclasses import dataclass, field
from data import (
    DEVIATION_KINDS,
    DIMENSION_REL_TOL,
    DIMENSION_RULES,
    P_MAX,
    SCHEDULE_COLUMNS,
)
from .errors import InfeasibleTargetError, InvalidParameterError
from .export import write_csv
from .graphgen import ModelParams
from .keymath import Theta, check_probability, one_minus_q, p_edge
from .moments import first_moment, first_moment_bound

REGIME_LABEL = (
    "finite-n diagnostics — asymptotic hypotheses are not decidable from finite data"
)


@dataclass(frozen=True)
class DeviationSpec:
    """
    gamma_n as a function of n.

    kind "constant": gamma_n = value
    kind "c_log":    gamma_n = (value - 1) log n, value = c > 0
    kind "log_log":  gamma_n = value * log log n, value = +1 or -1
    kind "table":    gamma_n = table[n]
    """

    kind: str
    value: float = 0.0
    table: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in DEVIATION_KINDS:
            raise InvalidParameterError(
                f"Unknown deviation kind {self.kind!r}. Expected one of {DEVIATION_KINDS}."
            )
        if self.kind == "c_log" and not self.value > 0:
            raise InvalidParameterError(f"c must be positive. Received: {self.value}.")
        if self.kind == "log_log" and self.value not in (1, -1):
            raise InvalidParameterError(
                f"log_log sign must be +1 or -1. Received: {self.value}."
            )
        if self.kind == "table":
            object.__setattr__(
                self, "table", {int(n): float(g) for n, g in self.table.items()}
            )

    def at(self, n):
        if n < 2:
            raise InvalidParameterError(f"gamma_n is evaluated for n >= 2. Received: {n}.")
        if self.kind == "constant":
            return float(self.value)
        if self.kind == "c_log":
            return strong_to_deviation(self.value, n)
        if self.kind == "log_log":
            return self.value * math.log(math.log(n))
        if n not in self.table:
            raise InvalidParameterError(f"Deviation table has no entry for n={n}")
        return self.table[n]


@dataclass(frozen=True)
class ScheduleEntry:
    n: int
    theta: Theta
    alpha: float
    gamma_target: float
    gamma_achieved: float
    c_equiv: float

    @property
    def params(self):
        return ModelParams(n=self.n, theta=self.theta, alpha=self.alpha)

    def as_row(self):
        return {
            "n": self.n,
            "K": self.theta.K,
            "P": self.theta.P,
            "alpha": self.alpha,
            "gamma_target": self.gamma_target,
            "gamma_achieved": self.gamma_achieved,
            "c_equiv": self.c_equiv,
        }


def strong_to_deviation(c, n):
    """gamma_n = (c - 1) log n, the deviation of a strong scaling with constant c."""
    if not c > 0:
        raise InvalidParameterError(f"c must be positive. Received: {c}.")
    if n < 2:
        raise InvalidParameterError(f"n must be at least 2. Received: {n}.")
    return (c - 1) * math.log(n)


def deviation_of(params):
    """gamma_n realised by a fixed instance: n alpha (1 - q) - log n."""
    return params.n * p_edge(params.theta, params.alpha) - math.log(params.n)


def _closest(candidates, target):
    # Ties go to the first candidate
    return min(candidates, key=lambda theta: abs(one_minus_q(theta) - target))


def _dimension_fix_K(K, target):
    """Pool size P with 1 - q(K, P) closest to target; 1 - q falls as P grows."""
    smallest = Theta(K=K, P=2 * K)
    below = [Theta(K=K, P=2 * K - 1)] if K >= 2 else []

    if one_minus_q(smallest) <= target:
        return _closest(below + [smallest], target)

    largest = Theta(K=K, P=P_MAX)
    if one_minus_q(largest) >= target:
        return largest

    # Invariant: 1 - q(lo) > target >= 1 - q(hi)
    lo, hi = 2 * K, P_MAX
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if one_minus_q(Theta(K=K, P=mid)) > target:
            lo = mid
        else:
            hi = mid
    return _closest([Theta(K=K, P=hi), Theta(K=K, P=lo)], target)


def _dimension_fix_P(P, target):
    """
    Ring size K with 1 - q(K, P) closest to target; 1 - q rises with K.

    K is bracketed by doubling from 1, so the cost follows the answer
    (about sqrt(target * P)) rather than the pool size.
    """
    if P < 3:
        return Theta(K=1, P=P)

    first = Theta(K=1, P=P)
    if one_minus_q(first) >= target:
        return first

    top = P // 2
    lo = 1
    while True:
        hi = min(2 * lo, top)
        if one_minus_q(Theta(K=hi, P=P)) >= target:
            break
        if hi == top:
            candidates_above = [Theta(K=top + 1, P=P)] if top + 1 < P else []
            return _closest([Theta(K=top, P=P)] + candidates_above, target)
        lo = hi

    # Invariant: 1 - q(lo) < target <= 1 - q(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if one_minus_q(Theta(K=mid, P=P)) < target:
            lo = mid
        else:
            hi = mid
    return _closest([Theta(K=lo, P=P), Theta(K=hi, P=P)], target)


def _check_dimension_rule(dimension_rule):
    if not isinstance(dimension_rule, dict) or len(dimension_rule) != 1:
        raise InvalidParameterError(
            "dimension_rule must be {'fix_K': K}, {'fix_P': P} or {'fixed': (K, P)}"
        )
    (rule, size), = dimension_rule.items()
    if rule not in DIMENSION_RULES:
        raise InvalidParameterError(f"Unknown dimension rule {rule!r}")
    if rule == "fixed":
        if not isinstance(size, (list, tuple)) or len(size) != 2:
            raise InvalidParameterError(f"fixed must be a (K, P) pair. Received: {size!r}.")
        return rule, Theta(K=size[0], P=size[1])
    if isinstance(size, bool) or not isinstance(size, int):
        raise InvalidParameterError(f"{rule} must be a whole number")
    if rule == "fix_K" and not 1 <= size < P_MAX // 2:
        raise InvalidParameterError(f"fix_K must be between 1 and {P_MAX // 2 - 1}")
    if rule == "fix_P" and not 2 <= size <= P_MAX:
        raise InvalidParameterError(f"fix_P must be between 2 and {P_MAX}")
    return rule, size


def build_schedule(n_values, alpha_schedule, deviation, dimension_rule):
    """
    Dimension one integer theta_n per n so that 1 - q(theta_n) is as close
    as possible to t_n = (log n + gamma_n) / (n alpha_n).

    With {"fixed": (K, P)} theta stays put and the deviation is whatever
    n alpha_n (1 - q) - log n comes out to; `deviation` may then be None,
    and when given it only fills gamma_target.
    """
    rule, size = _check_dimension_rule(dimension_rule)
    if deviation is None and rule != "fixed":
        raise InvalidParameterError(f"dimension rule {rule} needs a deviation")
    entries = []

    for n in sorted(set(n_values)):
        if n < 2:
            raise InvalidParameterError(f"Schedules start at n=2. Received: n={n}.")

        alpha = check_probability(alpha_schedule(n), name=f"alpha_{n}")
        if alpha <= 0.0:
            raise InfeasibleTargetError(n, "alpha_n must be positive")

        gamma_target = deviation.at(n) if deviation is not None else None

        if rule == "fixed":
            theta = size
        else:
            target = (math.log(n) + gamma_target) / (n * alpha)
            if not 0.0 < target <= 1.0:
                raise InfeasibleTargetError(
                    n, f"target 1 - q = {target!r} lies outside (0, 1]"
                )

            if rule == "fix_K":
                theta = _dimension_fix_K(size, target)
            else:
                theta = _dimension_fix_P(size, target)

            achieved = one_minus_q(theta)
            if abs(achieved - target) > DIMENSION_REL_TOL * target:
                raise InfeasibleTargetError(
                    n,
                    f"closest theta=({theta.K}, {theta.P}) gives 1 - q = {achieved!r}, "
                    f"target {target!r}",
                )

        achieved = one_minus_q(theta)
        entries.append(
            ScheduleEntry(
                n=n,
                theta=theta,
                alpha=alpha,
                gamma_target=gamma_target,
                gamma_achieved=n * alpha * achieved - math.log(n),
                c_equiv=n * alpha * achieved / math.log(n),
            )
        )

    return entries


def schedule_rows(schedule):
    return [entry.as_row() for entry in schedule]


def write_schedule_csv(schedule, handle):
    write_csv(schedule_rows(schedule), SCHEDULE_COLUMNS, handle)


def alpha_schedule_from_config(value):
    """
    Turn a config value into n -> alpha_n.

    A number is a constant; {"kind": "inverse_log", "scale": s} gives
    min(1, s / log n); {"kind": "table", "values": {n: alpha}} is explicit.
    """
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        alpha = check_probability(value)
        return lambda n: alpha

    if not isinstance(value, dict):
        raise InvalidParameterError(
            f"alpha schedule must be a number or an object. Received: {type(value).__name__}."
        )

    kind = value.get("kind")
    if kind == "constant":
        alpha = check_probability(value.get("value"))
        return lambda n: alpha
    if kind == "inverse_log":
        scale = value.get("scale", 1.0)
        if isinstance(scale, bool) or not isinstance(scale, (int, float)) or scale <= 0:
            raise InvalidParameterError("inverse_log scale must be a positive number")
        return lambda n: min(1.0, scale / math.log(n))
    if kind == "table":
        table = {int(n): check_probability(a) for n, a in value.get("values", {}).items()}

        def from_table(n):
            if n not in table:
                raise InfeasibleTargetError(n, "alpha table has no entry")
            return table[n]

        return from_table

    raise InvalidParameterError(f"Unknown alpha schedule kind {kind!r}")


def deviation_from_config(value):
    if not isinstance(value, dict):
        raise InvalidParameterError("deviation must be an object with a 'kind' field")

    kind = value.get("kind")
    if kind == "constant":
        return DeviationSpec(kind, value=float(value.get("gamma", 0.0)))
    if kind == "c_log":
        return DeviationSpec(kind, value=float(value.get("c", 1.0)))
    if kind == "log_log":
        return DeviationSpec(kind, value=int(value.get("sign", 1)))
    if kind == "table":
        return DeviationSpec(kind, table=value.get("values", {}))
    raise InvalidParameterError(f"Unknown deviation kind {kind!r}")


def _trend(xs, ys):
    if len(xs) < 2:
        return 0.0, "flat"
    slope = float(np.polyfit(xs, ys, 1)[0])
    tolerance = 1e-9 * (1.0 + max(abs(y) for y in ys))
    if slope > tolerance:
        return slope, "increasing"
    if slope < -tolerance:
        return slope, "decreasing"
    return slope, "flat"


def classify_regime(schedule):
    """Per-n diagnostics and trend tags; finite data never decides a limit."""
    if not schedule:
        raise InvalidParameterError("classify_regime needs a non-empty schedule")

    rows = []
    for entry in schedule:
        params = entry.params
        p = p_edge(params.theta, params.alpha)
        rows.append(
            {
                "n": entry.n,
                "gamma": entry.gamma_achieved,
                "alpha_log_n": entry.alpha * math.log(entry.n),
                "alpha": entry.alpha,
                "p": p,
                "e_I": first_moment(params),
                "first_moment_bound": (
                    first_moment_bound(params, entry.gamma_achieved) if p < 1.0 else None
                ),
            }
        )

    tail = rows[-max(1, len(rows) // 4) :]
    gamma_tail_mean = math.fsum(row["gamma"] for row in tail) / len(tail)
    if gamma_tail_mean > 0:
        gamma_sign = "positive"
    elif gamma_tail_mean < 0:
        gamma_sign = "negative"
    else:
        gamma_sign = "zero"

    log_n = [math.log(row["n"]) for row in rows]
    gamma_slope, gamma_trend = _trend(log_n, [row["gamma"] for row in rows])
    alpha_log_n_slope, alpha_log_n_trend = _trend(
        log_n, [row["alpha_log_n"] for row in rows]
    )

    alpha_log_n_label = {
        "increasing": "diverging",
        "decreasing": "vanishing",
        "flat": "constant",
    }[alpha_log_n_trend]
    limsup_alpha_one = max(row["alpha"] for row in tail) >= 1.0 - 1e-12

    return {
        "label": REGIME_LABEL,
        "rows": rows,
        "gamma_tail_mean": gamma_tail_mean,
        "gamma_sign": gamma_sign,
        "gamma_slope": gamma_slope,
        "gamma_trend": gamma_trend,
        "alpha_log_n_slope": alpha_log_n_slope,
        "alpha_log_n_trend": alpha_log_n_label,
        "limsup_alpha_one": limsup_alpha_one,
        "one_law_trend": gamma_sign == "positive" and gamma_trend == "increasing",
        "zero_law_trend": gamma_sign == "negative" and gamma_trend == "decreasing",
        "zero_law_covered": not (alpha_log_n_label == "diverging" and limsup_alpha_one),
    }
