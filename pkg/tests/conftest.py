import numpy as np
import pytest

from couplingflow import dwp_model, evolve_ramp, solve_aho, solve_dwp

TABLE1_G = [0.1, 0.5, 1.0, 5.0, 10.0]
TABLE2_GP = [0.5, 1.0, 5.5, 8.0]
FD_STEP = 0.01


def with_neighbours(points, step=FD_STEP):
    return sorted({round(p + d, 12) for p in points for d in (-step, 0.0, step)})


@pytest.fixture(scope="session")
def aho_table():
    table, _ = solve_aho(50, with_neighbours(TABLE1_G))
    return table


@pytest.fixture(scope="session")
def dwp_table():
    return solve_dwp(50, with_neighbours(TABLE2_GP))


@pytest.fixture(scope="session")
def dwp50():
    return dwp_model(50)


@pytest.fixture(scope="session")
def ramps(dwp50):
    """DWP ramps from the AHO ground state over g' in [0, 6], keyed by v."""
    samples = np.linspace(0.0, 6.0, 121)
    return {v: evolve_ramp(dwp50, v, 6.0, 0, samples) for v in (0.1, 1.0, 3.0, 30.0, 1000.0)}


def gauss_hermite(n_nodes=200):
    return np.polynomial.hermite.hermgauss(n_nodes)


def normalized_hermite_polys(nmax, x):
    """h_k(x) = H_k(x)/sqrt(sqrt(pi) 2^k k!), without the Gaussian factor."""
    out = np.empty((nmax, len(x)))
    out[0] = np.pi ** -0.25
    if nmax > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, nmax - 1):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * x * out[k] - np.sqrt(k / (k + 1.0)) * out[k - 1]
    return out
