"""
Solver constants and default configuration values.
All tolerances, iteration caps, size caps and output formats live here.
"""

# Newton-Kleinman (stage Riccati equations)
NEWTON_TOL = 1e-10          # Relative ARE residual
NEWTON_MAX_ITER = 15
NEWTON_DIVERGENCE_STREAK = 3  # Consecutive residual increases before giving up

# Low-rank ADI (stage Lyapunov equations)
ADI_TOL = None              # None resolves to n * machine epsilon
ADI_MAX_ITER = 100
ADI_SHIFT_COUNT = 25
ADI_COMPRESS_EVERY = 10     # Compress the solution factor every N steps
ADI_STAGNATION_WINDOW = 10  # Steps without 10% residual reduction before stopping
ADI_STAGNATION_FACTOR = 0.9
ADI_STAGNATION_FLOOR = 1e-11  # Stagnation is only accepted below this relative residual

# Shift heuristic (two-sided Arnoldi sweep)
ARNOLDI_STEPS_FORWARD = 20
ARNOLDI_STEPS_INVERSE = 10
ARNOLDI_BREAKDOWN_TOL = 1e-12

# Column compression
COMPRESS_TOL = None         # None resolves to n * machine epsilon

# Shifted solves
SHIFTED_SOLVE_REFINE_TOL = 1e-12   # Relative residual that triggers one refinement sweep
LU_CACHE_SIZE = 64

# Dense conversions
DENSE_CAP = 2000            # ldl_to_dense
ORACLE_DENSE_CAP = 400      # Dense reference scheme
KRONECKER_CAP = 60          # Kronecker-product Lyapunov oracle

# Dense oracle Newton
DENSE_NEWTON_TOL = 1e-12
DENSE_NEWTON_MAX_ITER = 30

# Startup
STARTUP_SUBSTEPS = 10

# Reference solution
REFERENCE_REFINEMENT = 32   # tau_ref = tau_min / REFERENCE_REFINEMENT
REFERENCE_SCHEME = 'mod-ros-peer'
REFERENCE_COEFFICIENTS = 'rosenbrock-2'
RICHARDSON_TOL = 1e-9
REFERENCE_MAX_HALVINGS = 8

# Scheme identifiers (also used in the reference dump header)
SCHEMES = {
    'implicit': 0,
    'ros-peer': 1,
    'mod-ros-peer': 2,
}

# Shorthand scheme labels accepted by the CLI: label -> (scheme, coefficient set)
SCHEME_LABELS = {
    'implicit-1': ('implicit', 'implicit-1'),
    'implicit-2': ('implicit', 'implicit-2'),
    'ros-peer-1': ('ros-peer', 'rosenbrock-1'),
    'ros-peer-2': ('ros-peer', 'rosenbrock-2'),
    'mod-ros-peer-1': ('mod-ros-peer', 'rosenbrock-1'),
    'mod-ros-peer-2': ('mod-ros-peer', 'rosenbrock-2'),
}

# Time-varying operator scaling mu(t) = amplitude * sin(frequency * pi * t) + 1
MU_AMPLITUDE = 0.75
MU_FREQUENCY = 8.0

# Time grid tolerance (relative) when checking that tau divides the horizon
GRID_TOL = 1e-9

# Output
CSV_FLOAT_FORMAT = '{:.5e}'  # 6 significant digits
RUN_CONFIG_FILE = 'run_config.json'
SUMMARY_FILE = 'summary.json'
TRAJECTORY_CSV = 'trajectory.csv'
CONVERGENCE_CSV = 'convergence.csv'
COMPARE_CSV = 'compare.csv'
ENDPOINT_FILE = 'endpoint.npz'
ORDER_FIT_POINTS = 3        # Observed order fitted over the finest N step sizes
MAX_DEFAULT_JOBS = 4        # Default worker threads for independent runs (capped by the core count)

# Logging
LOGGER_ROOT = 'riccati_peer'
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'
DEFAULT_LOG_LEVEL = 'WARNING'
