DEBUG = False

CURRENT_VERSION = "1.0.0"

PROGRAM_NAME = "keygraph_lab"

# Caps the worker count; results never depend on it
THREADS_ENV_VAR = "KEYGRAPH_LAB_THREADS"

DEFAULT_MASTER_SEED = 42

DEFAULT_TRIALS = 1000

DEFAULT_IDENTITY_GRID_SIZE = 10_000

DEFAULT_IDENTITY_SEED = 20140101
