import numpy as np
import pytest

from isphalf.domain import Dispersion, TriangularPotential, block_mask
from isphalf.edge_coupled import EdgeBoundary, EdgeCoupledSystem
from isphalf.forward import solve_kernels
from isphalf.linefunc import make_grid
from isphalf.profiles import ExpSumProfile


@pytest.fixture(scope="session")
def n1_disp():
    return Dispersion(1, (-1.0, 1.0))


@pytest.fixture(scope="session")
def n1_pot():
    e = ExpSumProfile(((1.0, 1.0),))
    return TriangularPotential(1, q12=[[e]], envelope=(1.0, 1.0))


@pytest.fixture(scope="session")
def n1_kernels(n1_pot, n1_disp):
    return solve_kernels(n1_pot, n1_disp, step=0.02, x_max=16.0, tau_max=36.0)


@pytest.fixture(scope="session")
def grid_100_4096():
    return make_grid(100.0, 4096)


@pytest.fixture(scope="session")
def e1_disp():
    return Dispersion(2, (-2.0, -1.0, 1.0, 2.0))


@pytest.fixture(scope="session")
def e1_system(e1_disp):
    e = ExpSumProfile(((1.0, 1.0),))
    return EdgeCoupledSystem(e1_disp, c_first=(None, e), c_last=(), envelope=(1.0, 1.0))


@pytest.fixture(scope="session")
def e1_boundaries():
    return EdgeBoundary(2, [[1.0]]), EdgeBoundary(2, [[2.0]])


def random_potential(n: int, seed: int, amplitude: float = 0.25, rate_lo=1.0, rate_hi=2.0):
    """Full admissible-structure random exponential-sum potential."""
    rng = np.random.default_rng(seed)
    blocks = {}
    for name in ("q11", "q12", "q21", "q22"):
        mask = block_mask(name, n)
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                if mask[i, j]:
                    g = amplitude * (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2)
                    row.append(ExpSumProfile(((g, float(rng.uniform(rate_lo, rate_hi))),)))
                else:
                    row.append(None)
            rows.append(row)
        blocks[name] = rows
    return TriangularPotential(n, envelope=(1.0, rate_lo), **blocks)


@pytest.fixture(scope="session")
def n2_random_pot():
    return random_potential(2, seed=42)


@pytest.fixture(scope="session")
def n2_random_kernels(n2_random_pot, e1_disp):
    return solve_kernels(n2_random_pot, e1_disp, step=0.04, x_max=14.0, tau_max=30.0)
