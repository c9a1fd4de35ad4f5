import numpy as np
import pytest

SQRT2 = np.sqrt(2.0)

# 2x3 design whose l1-eigenvalue at S={3} has the closed form
# max{(5 - L)/sqrt(26), 0}
EX2_FIRST = SQRT2 * np.array([[5.0 / 13.0, 0.0, 1.0], [12.0 / 13.0, 1.0, 0.0]])

# same construction with the sharper angle; delta(3, {3}) = 0
EX2_SECOND = SQRT2 * np.array([[12.0 / 13.0, 0.0, 1.0], [5.0 / 13.0, 1.0, 0.0]])


@pytest.fixture
def ex2_first():
    return EX2_FIRST.copy()


@pytest.fixture
def ex2_second():
    return EX2_SECOND.copy()


def orthonormal_design(n, p, seed):
    """n x p matrix with X'X/n = I (columns orthonormal in ||.||_n)."""
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    return Q[:, :p] * np.sqrt(n)


def random_design(n, p, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, p))
