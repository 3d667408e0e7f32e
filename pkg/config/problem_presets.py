"""
Problem presets.
FDM parameters, time horizons and default step sizes of the built-in problems.
"""

# Indicator boxes ((xi1 range), (xi2 range)), open intervals
INPUT_BOX = ((0.0, 0.35), (0.0, 0.35))
OUTPUT_BOX = ((0.0, 1.0), (0.95, 1.0))

PROBLEM_PRESETS = {
    # Time-varying convection-diffusion, A(t) = mu(t) A0
    'fdm-ltv': {
        'kind': 'fdm',
        'n0': 9,
        'f': (20.0, 5.0, 0.0),
        'time_varying': True,
        't0': 0.0,
        'tf': 0.5,
        'tau': 1.0 / 100.0,
    },
    # Large time-invariant convection-diffusion
    'fdm-lti': {
        'kind': 'fdm',
        'n0': 45,
        'f': (50.0, 10.0, 0.0),
        'time_varying': False,
        't0': 0.0,
        'tf': 0.3,
        'tau': 1.0 / 100.0,
    },
    # x' = 1 - x^2, x(0) = 0, exact solution tanh(t)
    'scalar-tanh': {
        'kind': 'scalar',
        'a': 0.0,
        'b': 1.0,
        'c': 1.0,
        'x0': 0.0,
        't0': 0.0,
        'tf': 0.5,
        'tau': 0.1,
    },
}

# Step sizes of the convergence study, as divisors of 1
CONVERGENCE_TAUS = (100, 200, 400, 800, 1600)
