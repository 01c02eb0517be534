import argparse
import io
import json
import math
import sys
from data import (
    CURRENT_VERSION,
    DEFAULT_IDENTITY_GRID_SIZE,
    DEFAULT_IDENTITY_SEED,
    DEFAULT_MASTER_SEED,
    DEFAULT_TRIALS,
    DEVIATION_KINDS,
    DIMENSION_RULES,
    MAX_NODES,
    MC_SIGMAS,
    MODES,
    OUTPUT_FORMATS,
    PROGRAM_NAME,
    SWEEP_COLUMNS,
    TRIAL_COLUMNS,
)
from keygraph import (
    InfeasibleTargetError,
    InvalidParameterError,
    KeygraphError,
    ModelParams,
    OracleMismatchError,
    alpha_schedule_from_config,
    build_schedule,
    classify_regime,
    deviation_from_config,
    dumps_json,
    enumerate_exact,
    exact_vs_formula,
    moment_report,
    oracle_grid,
    run_invariant_suite,
    run_trials,
    substream_seed,
    write_csv,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID_CONFIG = 2
EXIT_INFEASIBLE = 3

# Flag name -> config key
FLAG_KEYS = {
    "mode": "mode",
    "n": "n",
    "K": "K",
    "P": "P",
    "alpha": "alpha",
    "c": "c",
    "gamma_kind": "gamma_kind",
    "gamma": "gamma",
    "dimension": "dimension",
    "n_values": "n_values",
    "trials": "trials",
    "seed": "seed",
    "workers": "workers",
    "grid_size": "grid_size",
    "out": "out",
    "format": "format",
    "trials_csv": "trials_csv",
}

CONFIG_KEYS = set(FLAG_KEYS.values()) | {
    "alpha_schedule",
    "deviation",
    "fixed_grids",
    "include_oracle",
    "grid",
}

# Any of these asks a fixed-theta sweep for a target deviation too
DEVIATION_KEYS = {"deviation", "c", "gamma_kind", "gamma"}


def log(message):
    print(message, file=sys.stderr)


def _int_list(text):
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated whole numbers, got {text!r}"
        ) from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog=PROGRAM_NAME,
        description="Isolated nodes in random key graphs intersected with ER graphs.",
    )
    parser.add_argument("--version", action="version", version=CURRENT_VERSION)
    parser.add_argument("--config", help="JSON experiment config; flags override it")
    parser.add_argument("--mode", choices=MODES)
    parser.add_argument("--n", type=int, help="number of nodes")
    parser.add_argument("--K", type=int, help="key ring size")
    parser.add_argument("--P", type=int, help="key pool size")
    parser.add_argument("--alpha", type=float, help="channel on-probability")
    parser.add_argument("--c", type=float, help="strong scaling constant")
    parser.add_argument(
        "--gamma-kind",
        dest="gamma_kind",
        choices=[kind for kind in DEVIATION_KINDS if kind != "table"],
    )
    parser.add_argument(
        "--gamma", type=float, help="constant deviation, or the sign for log_log"
    )
    parser.add_argument(
        "--dimension",
        choices=DIMENSION_RULES,
        help="how a sweep picks (K, P) per n; fixed keeps --K and --P",
    )
    parser.add_argument("--n-values", dest="n_values", type=_int_list)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--grid-size", dest="grid_size", type=int)
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--format", choices=OUTPUT_FORMATS)
    parser.add_argument("--trials-csv", dest="trials_csv", help="per-trial dump")
    return parser


def load_config(path):
    with open(path, "r", encoding="utf-8") as f:
        config = json.load(f)
    if not isinstance(config, dict):
        raise ValueError(f"{path} must hold a JSON object")
    return config


def merge_flags(config, args):
    merged = dict(config)
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            merged[key] = value
    return merged


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def validate_config_values(config):
    invalid_values = {}
    valid_values = {}

    for key in config:
        if key not in CONFIG_KEYS:
            invalid_values[key] = "Unknown option."

    # ---- Validate mode / format ----
    mode = config.get("mode", "eval")
    if mode not in MODES:
        invalid_values["mode"] = f"Must be one of {', '.join(MODES)}. Received: {mode!r}."
    else:
        valid_values["mode"] = mode

    output_format = config.get("format")
    if output_format is not None:
        if output_format not in OUTPUT_FORMATS:
            invalid_values["format"] = (
                f"Must be one of {', '.join(OUTPUT_FORMATS)}. Received: {output_format!r}."
            )
        elif output_format == "csv" and mode not in ("eval", "sweep"):
            invalid_values["format"] = "CSV output is available for eval and sweep only."
        else:
            valid_values["format"] = output_format

    # ---- Validate whole numbers ----
    bounds = {
        "n": (1, MAX_NODES),
        "K": (1, None),
        "P": (2, None),
        "trials": (0, None),
        "workers": (1, None),
        "grid_size": (0, None),
        "seed": (-(2**63), 2**64 - 1),
    }
    for key, (low, high) in bounds.items():
        val = config.get(key)
        if val is None:
            continue
        if not _is_int(val):
            invalid_values[key] = f"Must be a whole number. Received: {type(val).__name__}."
        elif val < low or (high is not None and val > high):
            upper = high if high is not None else "infinity"
            invalid_values[key] = f"Must be between {low} and {upper}. Received: {val}."
        else:
            valid_values[key] = val

    if mode == "simulate" and valid_values.get("trials") == 0:
        invalid_values["trials"] = "Must be at least 1 in simulate mode."
        del valid_values["trials"]

    # ---- Validate real-valued parameters ----
    alpha = config.get("alpha")
    if alpha is not None:
        if not _is_number(alpha):
            invalid_values["alpha"] = f"Must be a number. Received: {type(alpha).__name__}."
        elif not 0.0 <= alpha <= 1.0:
            invalid_values["alpha"] = f"Must be between 0 and 1. Received: {alpha}."
        else:
            valid_values["alpha"] = float(alpha)

    c = config.get("c")
    if c is not None:
        if not _is_number(c) or not math.isfinite(c) or c <= 0:
            invalid_values["c"] = f"Must be a positive number. Received: {c!r}."
        else:
            valid_values["c"] = float(c)

    gamma = config.get("gamma")
    if gamma is not None:
        if not _is_number(gamma) or not math.isfinite(gamma):
            invalid_values["gamma"] = f"Must be a finite number. Received: {gamma!r}."
        else:
            valid_values["gamma"] = float(gamma)

    gamma_kind = config.get("gamma_kind")
    if gamma_kind is not None:
        if gamma_kind not in DEVIATION_KINDS or gamma_kind == "table":
            invalid_values["gamma_kind"] = (
                f"Must be constant, c_log or log_log. Received: {gamma_kind!r}."
            )
        else:
            valid_values["gamma_kind"] = gamma_kind

    dimension = config.get("dimension")
    if dimension is not None:
        if dimension not in DIMENSION_RULES:
            invalid_values["dimension"] = (
                f"Must be one of {', '.join(DIMENSION_RULES)}. Received: {dimension!r}."
            )
        else:
            valid_values["dimension"] = dimension

    # ---- Validate n_values ----
    n_values = config.get("n_values")
    if n_values is not None:
        if not isinstance(n_values, list) or not n_values:
            invalid_values["n_values"] = "Must be a non-empty list of whole numbers."
        else:
            errors = [
                f"'{n}': Must be a whole number between 2 and {MAX_NODES}."
                for n in n_values
                if not _is_int(n) or not 2 <= n <= MAX_NODES
            ]
            if errors:
                invalid_values["n_values"] = "\n".join(errors)
            else:
                valid_values["n_values"] = n_values

    # ---- Validate strings / flags / objects ----
    for key in ("out", "trials_csv"):
        val = config.get(key)
        if val is not None:
            if not isinstance(val, str) or not val:
                invalid_values[key] = "Must be a file path."
            else:
                valid_values[key] = val

    for key in ("fixed_grids", "include_oracle", "grid"):
        val = config.get(key)
        if val is not None:
            if not isinstance(val, bool):
                invalid_values[key] = (
                    f"Must be true or false. Received: {type(val).__name__}."
                )
            else:
                valid_values[key] = val

    alpha_schedule = config.get("alpha_schedule")
    if alpha_schedule is not None:
        if not isinstance(alpha_schedule, dict) and not _is_number(alpha_schedule):
            invalid_values["alpha_schedule"] = (
                f"Must be a number or an object. Received: {type(alpha_schedule).__name__}."
            )
        else:
            valid_values["alpha_schedule"] = alpha_schedule

    deviation = config.get("deviation")
    if deviation is not None:
        if not isinstance(deviation, dict):
            invalid_values["deviation"] = (
                f"Must be an object. Received: {type(deviation).__name__}."
            )
        else:
            valid_values["deviation"] = deviation

    return {
        "invalid_values": invalid_values,
        "valid_values": valid_values,
    }


def _require(config, *keys):
    missing = [key for key in keys if key not in config]
    if missing:
        raise InvalidParameterError(
            f"mode {config['mode']} needs {', '.join(missing)}"
        )


def _model_params(config):
    _require(config, "n", "K", "P", "alpha")
    return ModelParams.from_values(config["n"], config["K"], config["P"], config["alpha"])


def _deviation(config):
    if "deviation" in config:
        return deviation_from_config(config["deviation"])

    kind = config.get("gamma_kind", "c_log" if "c" in config else "constant")
    if kind == "c_log":
        _require(config, "c")
        return deviation_from_config({"kind": kind, "c": config["c"]})
    if kind == "log_log":
        return deviation_from_config({"kind": kind, "sign": config.get("gamma", 1)})
    return deviation_from_config({"kind": kind, "gamma": config.get("gamma", 0.0)})


def _dimension_rule(config):
    rule = config.get("dimension")
    if rule == "fixed":
        _require(config, "K", "P")
        return {"fixed": (config["K"], config["P"])}
    if rule == "fix_K" or (rule is None and "K" in config):
        _require(config, "K")
        return {"fix_K": config["K"]}
    if rule == "fix_P" or (rule is None and "P" in config):
        _require(config, "P")
        return {"fix_P": config["P"]}
    raise InvalidParameterError("mode sweep needs K (fix_K) or P (fix_P)")


def schedule_from_config(config):
    _require(config, "n_values")
    if "alpha_schedule" in config:
        alpha_schedule = alpha_schedule_from_config(config["alpha_schedule"])
    else:
        alpha_schedule = alpha_schedule_from_config(config.get("alpha", 1.0))

    dimension_rule = _dimension_rule(config)
    if "fixed" in dimension_rule and not DEVIATION_KEYS.intersection(config):
        deviation = None
    else:
        deviation = _deviation(config)

    return build_schedule(config["n_values"], alpha_schedule, deviation, dimension_rule)


def cmd_eval(config):
    params = _model_params(config)
    report = moment_report(params)
    log(
        f"[OK] E[I]={report['first_moment']:.6g}, "
        f"P(I=0) in [{report['lower_bound_P0']:.6g}, {report['upper_bound_P0']:.6g}]"
    )
    return report


def _write_trials_csv(path, counts):
    rows = [{"trial": t, "isolated_count": int(c)} for t, c in enumerate(counts)]
    with open(path, "w", encoding="utf-8", newline="") as f:
        write_csv(rows, TRIAL_COLUMNS, f)
    log(f"[OK] Per-trial counts written to {path}")


def cmd_simulate(config):
    params = _model_params(config)
    trials = config.get("trials", DEFAULT_TRIALS)
    seed = config.get("seed", DEFAULT_MASTER_SEED)

    log(f"[START] {trials} trials, n={params.n}, seed={seed}")
    summary = run_trials(
        params,
        trials,
        seed,
        workers=config.get("workers"),
        keep_counts="trials_csv" in config,
    )
    if "trials_csv" in config:
        _write_trials_csv(config["trials_csv"], summary["counts"])

    analytic = moment_report(params)
    wilson_low, wilson_high = summary["wilson_I0"]
    half_width = (wilson_high - wilson_low) / 2
    mean_gap = abs(summary["mean_I"] - analytic["first_moment"])

    result = {
        "params": params.as_dict(),
        "master_seed": seed,
        "trials": trials,
        "mc_freq_I0": summary["freq_I0"],
        "mc_wilson_I0": [wilson_low, wilson_high],
        "mc_stderr_I0": summary["stderr_I0"],
        "mc_mean_I": summary["mean_I"],
        "mc_stderr_mean_I": summary["stderr_mean_I"],
        "mc_var_I": summary["var_I"],
        "analytic": analytic,
        "checks": {
            "mean_within_sigmas": mean_gap <= MC_SIGMAS * summary["stderr_mean_I"],
            "freq_within_bounds": (
                analytic["lower_bound_P0"] - MC_SIGMAS * half_width
                <= summary["freq_I0"]
                <= analytic["upper_bound_P0"] + MC_SIGMAS * half_width
            ),
        },
    }

    for name, ok in result["checks"].items():
        log(f"[OK] {name}" if ok else f"[WARNING] {name} does not hold")
    return result


def _sweep_row(entry, trials, master_seed, workers):
    params = entry.params
    report = moment_report(params)
    row = {
        "n": entry.n,
        "K": entry.theta.K,
        "P": entry.theta.P,
        "alpha": entry.alpha,
        "gamma_achieved": entry.gamma_achieved,
        "c_equiv": entry.c_equiv,
        "e_I_analytic": report["first_moment"],
        "e_I2_analytic": report["second_moment"],
        "lower_bound_P0": report["lower_bound_P0"],
        "upper_bound_P0": report["upper_bound_P0"],
        "trials": trials,
    }

    if trials > 0:
        # Row seed depends on n only, so adding rows leaves the others unchanged
        seed = substream_seed(master_seed, entry.n)
        summary = run_trials(params, trials, seed, workers=workers)
        row.update(
            {
                "mc_freq_I0": summary["freq_I0"],
                "mc_mean_I": summary["mean_I"],
                "mc_stderr_I0": summary["stderr_I0"],
                "seed": seed,
            }
        )
    return row


def cmd_sweep(config):
    schedule = schedule_from_config(config)
    trials = config.get("trials", 0)
    seed = config.get("seed", DEFAULT_MASTER_SEED)

    log(f"[START] Sweep over n={[entry.n for entry in schedule]}, {trials} trials/row")
    rows = []
    for entry in schedule:
        row = _sweep_row(entry, trials, seed, config.get("workers"))
        rows.append(row)
        log(
            f"[INFO] n={entry.n}: theta=({entry.theta.K}, {entry.theta.P}), "
            f"P(I=0) in [{row['lower_bound_P0']:.4g}, {row['upper_bound_P0']:.4g}]"
        )

    diagnostics = classify_regime(schedule)
    log("=" * 60)
    log(f"[SUMMARY] {diagnostics['label']}")
    log(
        f"[SUMMARY] gamma {diagnostics['gamma_sign']}, {diagnostics['gamma_trend']}; "
        f"alpha log n {diagnostics['alpha_log_n_trend']}"
    )
    if diagnostics["gamma_sign"] == "negative" and not diagnostics["zero_law_covered"]:
        log("[WARNING] alpha_n log n diverges with alpha_n reaching 1: zero law not covered")
    log("=" * 60)

    return {"rows": rows, "diagnostics": diagnostics}


def cmd_identities(config):
    grid_size = config.get("grid_size", DEFAULT_IDENTITY_GRID_SIZE)
    report = run_invariant_suite(
        grid_size=grid_size,
        seed=config.get("seed", DEFAULT_IDENTITY_SEED),
        fixed_grids=config.get("fixed_grids", True),
        include_oracle=config.get("include_oracle", True),
    )

    if report["checks"] == 0:
        log("[WARNING] 0 checks ran: the invariant grid is empty")
    for failure in report["failures"]:
        log(f"[ERROR] {failure['check']} failed at {failure['case']}: {failure['detail']}")
    for warning in report["warnings"]:
        log(f"[WARNING] {warning['check']} at {warning['case']}: {warning['detail']}")

    log("=" * 60)
    log(
        f"[SUMMARY] {report['checks']} checks, {len(report['failures'])} failures, "
        f"{len(report['warnings'])} warnings"
    )
    log("=" * 60)
    return report


def cmd_oracle(config):
    if config.get("grid", False):
        records = oracle_grid()
        log(f"[OK] {len(records)} grid points match the closed forms")
        return {"records": records}

    params = _model_params(config)
    record = exact_vs_formula(params)
    exact = enumerate_exact(params)
    record["pmf_I"] = exact["pmf_I"]
    record["pmf_exact"] = exact["pmf_exact"]
    log("[OK] Enumeration matches the closed forms")
    return record


COMMANDS = {
    "eval": cmd_eval,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "identities": cmd_identities,
    "oracle": cmd_oracle,
}


def render(config, payload):
    mode = config["mode"]
    output_format = config.get("format", "csv" if mode == "sweep" else "json")
    if output_format == "json":
        return dumps_json(payload)

    buffer = io.StringIO()
    if mode == "sweep":
        write_csv(payload["rows"], SWEEP_COLUMNS, buffer)
    else:
        write_csv([payload], list(payload), buffer)
    return buffer.getvalue()


def emit(config, text):
    if "out" in config:
        with open(config["out"], "w", encoding="utf-8", newline="") as f:
            f.write(text)
        log(f"[OK] Output written to {config['out']}")
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)

    config = {}
    if args.config:
        try:
            config = load_config(args.config)
        except (OSError, ValueError) as e:
            log(f"[ERROR] Failed to load config: {e}")
            return EXIT_INVALID_CONFIG

    result = validate_config_values(merge_flags(config, args))
    if result["invalid_values"]:
        for key, message in result["invalid_values"].items():
            for line in message.split("\n"):
                log(f"[ERROR] {key}: {line}")
        return EXIT_INVALID_CONFIG
    config = result["valid_values"]

    try:
        payload = COMMANDS[config["mode"]](config)
    except InfeasibleTargetError as e:
        log(f"[ERROR] Infeasible schedule at n={e.n}: {e}")
        return EXIT_INFEASIBLE
    except OracleMismatchError as e:
        log(f"[ERROR] Oracle mismatch in {e.quantity}: {e}")
        return EXIT_CHECK_FAILED
    except KeygraphError as e:
        log(f"[ERROR] {e}")
        return EXIT_INVALID_CONFIG

    emit(config, render(config, payload))

    if config["mode"] == "identities" and payload["failures"]:
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
