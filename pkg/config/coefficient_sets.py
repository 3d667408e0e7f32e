"""
Built-in peer coefficient sets.

Each entry maps a set name to its tables (row-major lists). An 'a' entry of
None means the two-step weights are recovered from the order conditions of
the declared order when the set is built.
"""
import math

SQRT2 = math.sqrt(2.0)
ROS2_GAMMA = 1.0 - 1.0 / SQRT2

COEFFICIENT_SETS = {
    'implicit-1': {
        'kind': 'implicit',
        'order': 1,
        'c': [1.0],
        'b': [[1.0]],
        'a': [[0.0]],
        'g': [[1.0]],
    },
    # Two-stage implicit peer method of order 2
    'implicit-2': {
        'kind': 'implicit',
        'order': 2,
        'c': [0.4831632475943920, 1.0],
        'b': [[-0.3045407685048590, 1.3045407685048591],
              [-0.3045407685048590, 1.3045407685048591]],
        'a': None,
        'g': [[0.2584183762028040, 0.0],
              [0.4376001712448750, 0.2584183762028040]],
    },
    # Linearly implicit Euler
    'rosenbrock-1': {
        'kind': 'rosenbrock',
        'order': 1,
        'c': [1.0],
        'b': [[1.0]],
        'a': [[1.0]],
        'g': [[1.0]],
    },
    # Two-stage Rosenbrock-type peer method of order 2, A- and L-stable
    'rosenbrock-2': {
        'kind': 'rosenbrock',
        'order': 2,
        'c': [SQRT2 - 1.0, 1.0],
        'b': [[(1.0 - SQRT2) / 2.0, (1.0 + SQRT2) / 2.0],
              [(1.0 - SQRT2) / 2.0, (1.0 + SQRT2) / 2.0]],
        'a': [[(1.0 - SQRT2) / 2.0, 0.5],
              [0.5 - SQRT2, 2.5 - 1.0 / SQRT2]],
        'g': [[ROS2_GAMMA, 0.0],
              [2.0 - SQRT2, ROS2_GAMMA]],
    },
}
