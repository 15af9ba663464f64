import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import setensor as st


def mpsd_boundary_entries():
    """n=3, M-positive semidefinite with an indefinite unfolding.

    Biquadratic form: 2*(x1*y1 + x2*y2)^2 + 2*x3^2*y3^2 >= 0, attaining 0.
    """
    a = np.zeros((3, 3, 3, 3))
    a[0, 0, 0, 0] = a[1, 1, 1, 1] = a[2, 2, 2, 2] = 2.0
    a[0, 1, 1, 0] = a[1, 0, 1, 0] = a[1, 0, 0, 1] = a[0, 1, 0, 1] = 1.0
    return a


def nonneg_irreducible_entries():
    """n=2, nonnegative and irreducible; spectral radius 10.907536."""
    b = np.zeros((2, 2, 2, 2))
    b[0, 0, 0, 0] = 4.0
    b[0, 0, 1, 1] = b[1, 1, 0, 0] = 10.0
    b[1, 1, 1, 1] = 2.0
    for idx in [(0, 0, 0, 1), (0, 0, 1, 0), (0, 1, 0, 0), (1, 0, 0, 0)]:
        b[idx] = 1.0
    for idx in [(0, 1, 0, 1), (0, 1, 1, 0), (1, 0, 0, 1), (1, 0, 1, 0)]:
        b[idx] = 1.0
    for idx in [(0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (1, 1, 1, 0)]:
        b[idx] = 2.0
    return b


def mtensor_entries():
    """n=2 nonsingular M-structured tensor with an indefinite unfolding."""
    raw = {
        (1, 1, 1, 1): 13.0, (1, 1, 2, 2): 2.0, (2, 2, 1, 1): 2.0,
        (2, 2, 2, 2): 12.0, (1, 1, 1, 2): -2.0, (1, 2, 1, 1): -2.0,
        (1, 2, 1, 2): -4.0, (1, 2, 2, 2): -1.0, (2, 2, 1, 2): -1.0,
    }
    a = np.zeros((2, 2, 2, 2))
    for (i, j, k, l), v in raw.items():
        for (p, q) in [(i, j), (j, i)]:
            for (r, s) in [(k, l), (l, k)]:
                a[p - 1, q - 1, r - 1, s - 1] = v
    return a


# Verified reference values for the three example tensors (computed with
# the exhaustive stationarity enumeration and cross-checked against the
# brute-force grid extrema of the biquadratic form).
MTENSOR_UNFOLDING = np.array([
    [13.0, -2.0, -2.0, -4.0],
    [-2.0, 2.0, -4.0, -1.0],
    [-2.0, -4.0, 2.0, -1.0],
    [-4.0, -1.0, -1.0, 12.0],
])
MTENSOR_UNFOLDING_EIGS = [-2.833116, 6.0, 9.222068, 16.611048]
MTENSOR_DISTINCT_EIGS = [13.416334, 12.111819, 11.203635, 6.177835, 0.244192]
MTENSOR_MIN_EIG = 0.244192
NONNEG_MAX_EIG = 10.907536
NONNEG_MAX_X = np.array([0.2936, 0.9560])
NONNEG_MAX_Y = np.array([0.9442, 0.3294])
NONNEG_SECOND_EIG = 10.5
MPSD_UNFOLDING_EIGS_SORTED = [-1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 2.0, 3.0]


@pytest.fixture(scope="session")
def mpsd_boundary():
    return st.new_elasticity_tensor(3, mpsd_boundary_entries())


@pytest.fixture(scope="session")
def nonneg_irreducible():
    return st.new_elasticity_tensor(2, nonneg_irreducible_entries())


@pytest.fixture(scope="session")
def mtensor():
    return st.new_elasticity_tensor(2, mtensor_entries())


@pytest.fixture(scope="session")
def identity2():
    return st.identity_tensor(2)


@pytest.fixture(scope="session")
def identity3():
    return st.identity_tensor(3)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
