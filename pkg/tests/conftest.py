import numpy as np
import pytest

from mixedvar import ErrorSpec, ObjectiveConfig, SimConfig, VarParams
from mixedvar import assemble_from_jordan, make_transform_set, simulate_mixed


@pytest.fixture(scope="session")
def theta_diag_strong():
    """Diagonal matrix with one stable (0.5) and one explosive (2.0) eigenvalue."""
    return VarParams.from_matrix([[0.5, 0.0], [0.0, 2.0]])


@pytest.fixture(scope="session")
def theta_diag_near_unit():
    """Diagonal matrix with near-unit eigenvalues (0.85, 1.2)."""
    return VarParams.from_matrix([[0.85, 0.0], [0.0, 1.2]])


@pytest.fixture(scope="session")
def theta_coupled_strong():
    """Cross-coupled matrix with eigenvalues (0.4, 2.0)."""
    return assemble_from_jordan(np.array([[0.3, 0.7], [0.4, -1.0]]), [0.4, 2.0])


@pytest.fixture(scope="session")
def theta_coupled_near_unit():
    """Cross-coupled matrix with eigenvalues (0.85, 1.2)."""
    return assemble_from_jordan(np.array([[0.3, 0.7], [0.4, -1.0]]), [0.85, 1.2])


@pytest.fixture(scope="session")
def t1_config():
    return ObjectiveConfig(transforms=make_transform_set("T1", 2))


def simulate(params, T, seed, trim_frac=0.10, df=4.0):
    return simulate_mixed(SimConfig(T=T, params=params, trim_frac=trim_frac),
                          ErrorSpec(n=params.n, df=df, seed=seed))


@pytest.fixture(scope="session")
def simulate_path():
    return simulate
