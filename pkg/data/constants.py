IDENTITY_TOL = 1e-12

EXPANSION_TOL = 1e-9

MC_SIGMAS = 4

# Two-sided 95% normal quantile
WILSON_Z = 1.959963984540054

P_MAX = 10**9

DIMENSION_REL_TOL = 0.10

ORACLE_MAX_TERMS = 10**8

EXACT_P_LIMIT = 10**4

# Adjacency kept as a packed bitset over unordered pairs up to this many nodes
MAX_NODES = 2**16

# Channel states are drawn and packed this many pairs at a time; a multiple of 8
OVERLAY_CHUNK_PAIRS = 2**18

FLOAT_FORMAT = ".17g"

MODES = ("eval", "simulate", "sweep", "oracle", "identities")

OUTPUT_FORMATS = ("csv", "json")

DEVIATION_KINDS = ("constant", "c_log", "log_log", "table")

# fix_K and fix_P dimension theta_n per n; fixed holds (K, P) for every n
DIMENSION_RULES = ("fix_K", "fix_P", "fixed")

SCHEDULE_COLUMNS = [
    "n",
    "K",
    "P",
    "alpha",
    "gamma_target",
    "gamma_achieved",
    "c_equiv",
]

SWEEP_COLUMNS = [
    "n",
    "K",
    "P",
    "alpha",
    "gamma_achieved",
    "c_equiv",
    "e_I_analytic",
    "e_I2_analytic",
    "lower_bound_P0",
    "upper_bound_P0",
    "mc_freq_I0",
    "mc_mean_I",
    "mc_stderr_I0",
    "trials",
    "seed",
]

TRIAL_COLUMNS = ["trial", "isolated_count"]

ORACLE_GRID_N = (2, 3, 4)

ORACLE_GRID_MAX_P = 5

ORACLE_GRID_ALPHAS = (0.0, 0.3, 0.7, 1.0)

# Fixed keymath grid: K in [1, 6], P in [2K, 2K + 50]
KEYMATH_GRID_MAX_K = 6

KEYMATH_GRID_P_SPAN = 50

PSI_PROBES = (1e-3, 1e-4, 1e-5, 1e-6)
