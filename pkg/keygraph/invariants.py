"""
Invariant grid suite: identities and inequalities every kernel must satisfy.

Modules are referenced through their namespace (keymath.q, moments.r_chain)
so that a patched kernel is the one being checked.
"""

import math
import sys
import numpy as np
from data import (
    DEBUG,
    DEFAULT_IDENTITY_GRID_SIZE,
    DEFAULT_IDENTITY_SEED,
    EXPANSION_TOL,
    IDENTITY_TOL,
    KEYMATH_GRID_MAX_K,
    KEYMATH_GRID_P_SPAN,
    PSI_PROBES,
)
from . import graphgen, keymath, moments, oracle, scaling
from .errors import KeygraphError


def _new_report():
    return {"checks": 0, "by_check": {}, "failures": [], "warnings": []}


def _record(report, name, ok, case, detail="", soft=False):
    report["checks"] += 1
    report["by_check"][name] = report["by_check"].get(name, 0) + 1
    if not ok:
        bucket = report["warnings"] if soft else report["failures"]
        bucket.append({"check": name, "case": case, "detail": detail})


def _close(a, b, tol=IDENTITY_TOL):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _theta_case(theta):
    return {"K": theta.K, "P": theta.P}


def _fixed_thetas():
    for K in range(1, KEYMATH_GRID_MAX_K + 1):
        for P in range(2 * K, 2 * K + KEYMATH_GRID_P_SPAN + 1):
            yield keymath.Theta(K=K, P=P)


def _random_tuples(size, seed):
    rng = np.random.default_rng(seed)
    for _ in range(size):
        n = int(rng.integers(2, 10**4 + 1))
        K = int(rng.integers(1, 9))
        P = int(rng.integers(2 * K, 10**6 + 1))
        alpha = float(rng.random())
        yield graphgen.ModelParams(n=n, theta=keymath.Theta(K=K, P=P), alpha=alpha)


def check_theta(report, theta):
    case = _theta_case(theta)
    q_value = keymath.q(theta)

    if theta.P >= 2 * theta.K:
        v_K = keymath.v(theta, theta.K)
        _record(report, "q_equals_v", q_value == v_K, case, f"q={q_value!r}, v={v_K!r}")

    values = [keymath.v(theta, r) for r in range(0, 2 * theta.K + 2)]
    ok = all(0.0 <= x <= 1.0 for x in values) and all(
        a >= b for a, b in zip(values, values[1:])
    )
    _record(report, "v_monotone", ok, case, f"v={values!r}")

    if 0.0 < q_value < 1.0:
        v_2K = keymath.v(theta, 2 * theta.K)
        _record(
            report,
            "v_2K_below_q_squared",
            v_2K < q_value**2,
            case,
            f"v(2K)={v_2K!r}, q^2={q_value**2!r}",
        )

    if q_value >= 1e-6:
        total = keymath.one_minus_q(theta) + q_value
        _record(report, "complement_sum", _close(total, 1.0), case, f"sum={total!r}")

    pmf = keymath.overlap_pmf(theta)
    mass = math.fsum(prob for _, prob in pmf)
    _record(report, "overlap_total", _close(mass, 1.0), case, f"mass={mass!r}")
    if pmf[0][0] == 0:
        _record(
            report,
            "overlap_disjoint_mass",
            _close(pmf[0][1], q_value),
            case,
            f"pmf(0)={pmf[0][1]!r}, q={q_value!r}",
        )


def check_psi(report):
    for x in PSI_PROBES:
        ratio = keymath.psi(x) / x**2
        _record(
            report, "psi_small_x", abs(ratio - 0.5) <= x, {"x": x}, f"ratio={ratio!r}"
        )
    for x in np.linspace(0.001, 0.999, 999):
        x = float(x)
        value = keymath.psi(x)
        _record(
            report, "psi_lower_bound", value >= x * x / 2, {"x": x}, f"psi={value!r}"
        )


def check_params(report, params):
    theta, alpha = params.theta, params.alpha
    case = params.as_dict()
    q_value = keymath.q(theta)
    p = keymath.p_edge(theta, alpha)

    lhs = (1.0 - p) ** 2 - alpha**2 * q_value**2
    rhs = (1.0 - alpha) * (1.0 - alpha + 2.0 * alpha * q_value)
    _record(report, "p_identity", _close(lhs, rhs), case, f"lhs={lhs!r}, rhs={rhs!r}")

    if p < 1.0:
        chain = moments.r_chain(params)
        slack = IDENTITY_TOL * max(1.0, chain["bound_rhs"])
        _record(
            report,
            "key_bound",
            chain["r_n"] <= chain["bound_rhs"] + slack,
            case,
            f"r_n={chain['r_n']!r}, bound={chain['bound_rhs']!r}",
        )

        # Only claimed asymptotically, so a violation is reported, not failed
        if scaling.deviation_of(params) <= 0.0:
            slack = IDENTITY_TOL * max(1.0, chain["r_circ"])
            _record(
                report,
                "r_star_below_r_circ",
                chain["r_star"] <= chain["r_circ"] + slack,
                case,
                f"r_star={chain['r_star']!r}, r_circ={chain['r_circ']!r}",
                soft=True,
            )

    first = moments.first_moment(params)
    second = moments.second_moment(params)
    ok = second >= first * (1.0 - IDENTITY_TOL)
    if first > 0.0:
        ok = ok and moments.second_moment_ratio(params) >= 1.0 - IDENTITY_TOL
    _record(report, "second_moment_order", ok, case, f"E[I]={first!r}, E[I^2]={second!r}")

    lower, upper = moments.probability_bounds(params)
    _record(
        report,
        "bounds_ordered",
        0.0 <= lower <= upper <= 1.0,
        case,
        f"lower={lower!r}, upper={upper!r}",
    )

    richer = graphgen.ModelParams(n=params.n, theta=theta, alpha=min(1.0, alpha + 0.1))
    _record(
        report,
        "first_moment_monotone_in_alpha",
        moments.first_moment(richer) <= first * (1.0 + IDENTITY_TOL),
        case,
    )


def check_expansion(report, count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(2, 10**4 + 1))
        K = int(rng.integers(1, 9))
        theta = keymath.Theta(K=K, P=int(rng.integers(2 * K, 10**6 + 1)))
        gamma = float(rng.uniform(-math.log(n), 5.0))
        target = (math.log(n) + gamma) / n
        alpha = min(1.0, target / keymath.one_minus_q(theta))
        params = graphgen.ModelParams(n=n, theta=theta, alpha=alpha)
        if keymath.p_edge(theta, alpha) >= 1.0:
            continue

        gamma_n = scaling.deviation_of(params)
        product = moments.first_moment_expansion(params, gamma_n)["product"]
        first = moments.first_moment(params)
        _record(
            report,
            "first_moment_expansion",
            abs(product - first) <= EXPANSION_TOL * max(first, 1e-300),
            {**params.as_dict(), "gamma_n": gamma_n},
            f"product={product!r}, E[I]={first!r}",
        )


def check_graph_samples(report, count, seed):
    params = graphgen.ModelParams.from_values(n=30, K=3, P=40, alpha=0.5)
    for t in range(count):
        sample = graphgen.intersect_and_count(params, graphgen.RngSpec(seed, t))
        matrix = sample.adjacency_matrix()
        ok = bool((matrix == matrix.T).all()) and not matrix.diagonal().any()

        i, j = 0, 1
        expected = sample.er_edge(i, j) and sample.key_adjacent(i, j)
        ok = ok and sample.adjacent(i, j) == expected
        ok = ok and sample.isolated_count == params.n - int(matrix.any(axis=1).sum())
        _record(report, "graph_sample_structure", ok, {"seed": seed, "trial": t})


def check_schedule(report):
    schedule = scaling.build_schedule(
        [100, 400, 1600],
        lambda n: 1.0,
        scaling.DeviationSpec("c_log", value=2.0),
        {"fix_K": 4},
    )
    for entry in schedule:
        implied = (
            entry.n * entry.alpha * keymath.one_minus_q(entry.theta) - math.log(entry.n)
        )
        _record(
            report,
            "schedule_round_trip",
            abs(implied - entry.gamma_achieved) <= EXPANSION_TOL,
            entry.as_row(),
        )


def check_oracle(report):
    for params in oracle.oracle_grid_points():
        try:
            oracle.exact_vs_formula(params)
            _record(report, "oracle_equivalence", True, params.as_dict())
        except KeygraphError as e:
            _record(report, "oracle_equivalence", False, params.as_dict(), str(e))


def run_invariant_suite(
    grid_size=DEFAULT_IDENTITY_GRID_SIZE,
    seed=DEFAULT_IDENTITY_SEED,
    fixed_grids=True,
    include_oracle=True,
):
    report = _new_report()

    if fixed_grids:
        for theta in _fixed_thetas():
            check_theta(report, theta)
        check_psi(report)
        check_schedule(report)
        check_graph_samples(report, 20, seed)
        if include_oracle:
            check_oracle(report)

    for params in _random_tuples(grid_size, seed):
        check_theta(report, params.theta)
        check_params(report, params)

    if grid_size > 0:
        check_expansion(report, min(100, grid_size), seed + 1)

    if DEBUG:
        print(f"[INFO] Invariant suite ran {report['checks']} checks", file=sys.stderr)

    return report
