import numpy as np
import pytest

from isphalf.domain import (
    BoundaryMatrix,
    Dispersion,
    KERNEL_ALLOWED,
    TriangularPotential,
    validate_potential,
)
from isphalf.forward import (
    asymptotic_coefficients,
    boundary_parts,
    kernel_transforms,
    potential_from_kernels,
    reconstruct_from_kernels,
    scattering_matrix,
    solve_bounded_solution,
    solve_kernels,
    strip_diagnostics,
    transmission_matrix,
)
from isphalf.linefunc import make_grid
from isphalf.profiles import ExpSumProfile

from conftest import random_potential


# -- bounded solutions -------------------------------------------------------


def test_free_solution_zero_potential():
    d = Dispersion(2, (-2.0, -1.0, 1.0, 2.0))
    pot = TriangularPotential(2)
    lam = 1.3
    A = np.array([1.0, -0.5j])
    B = np.array([0.25, 1.0 + 1.0j])
    sol = solve_bounded_solution(pot, d, lam, A, B, step=0.05, x_max=4.0)
    x = sol.x_grid
    want1 = np.exp(1j * lam * d.sigma1[None, :] * x[:, None]) * A[None, :]
    want2 = np.exp(1j * lam * d.sigma2[None, :] * x[:, None]) * B[None, :]
    np.testing.assert_allclose(sol.y1, want1, atol=1e-14)
    np.testing.assert_allclose(sol.y2, want2, atol=1e-14)
    assert sol.sweeps <= 2


@pytest.mark.parametrize("lam", [0.0, 0.7, -3.2])
def test_single_exponential_boundary_value(n1_pot, n1_disp, lam):
    sol = solve_bounded_solution(n1_pot, n1_disp, lam, [1.0], [1.0], step=0.005)
    want = 1.0 + 1j / (1.0 - 2j * lam)
    assert abs(sol.y1[0, 0] - want) < 1e-5
    assert abs(sol.y2[0, 0] - 1.0) < 1e-12


def test_amplitude_quadrature_cancellation(n1_pot, n1_disp):
    # A = 0, B = 1: the boundary value is exactly the coupling integral
    lam = 1.1
    sol = solve_bounded_solution(n1_pot, n1_disp, lam, [0.0], [1.0], step=0.005)
    a, b = asymptotic_coefficients(sol, n1_pot, n1_disp)
    assert abs(a[0]) < 1e-12
    assert abs(b[0] - 1.0) < 1e-12


def test_amplitude_roundtrip(n2_random_pot, e1_disp):
    rng = np.random.default_rng(3)
    for lam in (0.0, 2.2, -5.0):
        A = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        B = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        sol = solve_bounded_solution(n2_random_pot, e1_disp, lam, A, B, step=0.02)
        a, b = asymptotic_coefficients(sol, n2_random_pot, e1_disp)
        assert np.abs(a - A).max() < 1e-8
        assert np.abs(b - B).max() < 1e-8


# -- kernels -----------------------------------------------------------------


def test_zero_potential_kernels_vanish():
    d = Dispersion(2, (-2.0, -1.0, 1.0, 2.0))
    ker = solve_kernels(TriangularPotential(2), d, step=0.1, x_max=3.0, tau_max=6.0)
    for name in ("A11", "A12", "A21", "A22"):
        assert np.abs(ker.blocks[name]).max() == 0.0


def test_single_exponential_kernel_closed_form(n1_kernels):
    ker = n1_kernels
    x = ker.x_grid
    tau = ker.tau_grid
    want = 0.5j * np.exp(-x[:, None]) * np.exp(-tau[None, :] / 2)
    np.testing.assert_allclose(ker.blocks["A12"][0, 0], want, atol=1e-13)
    for name in ("A11", "A21", "A22"):
        assert np.abs(ker.blocks[name]).max() == 0.0


def test_kernel_decay_slope(n1_kernels):
    tau = n1_kernels.tau_grid
    mags = np.abs(n1_kernels.blocks["A12"][0, 0, 0, :])
    window = (mags > 1e-10) & (tau > 0.5)
    slope = np.polyfit(tau[window], np.log(mags[window]), 1)[0]
    assert slope == pytest.approx(-0.5, abs=1e-6)


def test_kernel_structure_preserved(n2_random_kernels):
    n = 2
    for name in ("A11", "A12", "A21", "A22"):
        for i in range(n):
            for j in range(n):
                if not KERNEL_ALLOWED[name](i, j, n):
                    assert np.abs(n2_random_kernels.blocks[name][i, j]).max() == 0.0


def test_kernel_envelope_bound(n2_random_kernels):
    ker = n2_random_kernels
    x, tau = ker.x_grid, ker.tau_grid
    env = ker.c_tilde * np.exp(-ker.envelope_eps * (x[:, None] + ker.theta * tau[None, :]))
    for name in ("A11", "A12", "A21", "A22"):
        mags = np.abs(ker.blocks[name]).max(axis=(0, 1))
        assert np.all(mags <= env * (1.0 + 1e-9))


def test_coupled_decay_slope_bound(n2_random_kernels):
    # fitted slope of the x = 0 trace must be at least as steep as -eps*theta
    ker = n2_random_kernels
    tau = ker.tau_grid
    bound = -ker.envelope_eps * ker.theta + 0.05
    for name in ("A12", "A21"):
        mags = np.abs(ker.trace_at_zero(name)).max(axis=(0, 1))
        window = (mags > 1e-9) & (tau > 0.5) & (tau < 20.0)
        slope = np.polyfit(tau[window], np.log(mags[window]), 1)[0]
        assert slope <= bound


def test_potential_recovery_zero():
    d = Dispersion(1, (-1.0, 1.0))
    ker = solve_kernels(TriangularPotential(1), d, step=0.1, x_max=3.0, tau_max=6.0)
    pot = potential_from_kernels(ker, d)
    assert pot.is_zero


def test_potential_recovery_closed_form(n1_kernels, n1_disp):
    # A12(x,x) = (i/2) e^{-x} with speeds (-1, 1) maps back to e^{-x}
    pot = potential_from_kernels(n1_kernels, n1_disp)
    x = n1_kernels.x_grid
    got = pot.q12[0][0](x)
    np.testing.assert_allclose(got, np.exp(-x), rtol=1e-12, atol=1e-13)
    assert validate_potential(pot) == []


def test_potential_recovery_roundtrip(n2_random_pot, e1_disp, n2_random_kernels):
    pot2 = potential_from_kernels(n2_random_kernels, e1_disp)
    x = n2_random_kernels.x_grid
    keep = x <= 5.0
    for name in ("q11", "q12", "q21", "q22"):
        for i in range(2):
            for j in range(2):
                truth = n2_random_pot.block(name)[i][j](x[keep])
                got = pot2.block(name)[i][j](x[keep])
                scale = max(np.abs(truth).max(), 1e-30)
                assert np.abs(got - truth).max() / scale < 1e-6


def test_representation_consistency(n2_random_pot, e1_disp, n2_random_kernels):
    # solution rebuilt from the kernels matches the integral-equation solver
    rng = np.random.default_rng(11)
    lams = rng.uniform(-10, 10, 5)
    A = np.array([1.0, -0.4 + 0.2j])
    B = np.array([0.3j, 0.8])
    for lam in lams:
        sol = solve_bounded_solution(n2_random_pot, e1_disp, lam, A, B, step=0.01, x_max=16.0)
        for ix in (0, 25, 75):
            x = n2_random_kernels.x_grid[ix]
            isol = int(round(x / (sol.x_grid[1] - sol.x_grid[0])))
            y1r, y2r = reconstruct_from_kernels(n2_random_kernels, e1_disp, lam, A, B, ix)
            err = max(np.abs(y1r - sol.y1[isol]).max(), np.abs(y2r - sol.y2[isol]).max())
            assert err < 2e-4


# -- transforms and matrices -------------------------------------------------


@pytest.fixture(scope="module")
def n1_blocks(n1_kernels, n1_disp, grid_100_4096):
    return kernel_transforms(n1_kernels, n1_disp, grid_100_4096)


def test_transform_closed_form(n1_blocks, grid_100_4096):
    lam = grid_100_4096
    want = 1j / (1 - 2j * lam)
    assert np.abs(n1_blocks.a12_plus.values[:, 0, 0] - want).max() < 1e-6
    for f in (n1_blocks.a11_minus, n1_blocks.a21_minus, n1_blocks.a22_plus):
        assert f.sup_norm() == 0.0
    assert n1_blocks.a12_plus.analyticity.kind == "plus"
    assert n1_blocks.a11_minus.analyticity.kind == "minus"
    assert n1_blocks.a12_plus.analyticity.delta == pytest.approx(0.5)


def test_transform_vanishes_at_infinity(n1_blocks):
    nrm = n1_blocks.a12_plus.norms()
    assert nrm[0] < 5.1e-3 and nrm[-1] < 5.1e-3
    assert nrm[0] < 0.01 * nrm.max()


def test_boundary_parts_closed_form(n1_blocks, grid_100_4096):
    h = 1.0
    plus, minus = boundary_parts(n1_blocks, BoundaryMatrix(np.array([[h]])))
    want = -1j * h / (1 - 2j * grid_100_4096)
    assert np.abs(plus.values[:, 0, 0] - want).max() < 1e-6
    assert minus.sup_norm() == 0.0


def test_boundary_parts_identity_matrix(n2_random_kernels, e1_disp, grid_100_4096):
    blocks = kernel_transforms(n2_random_kernels, e1_disp, grid_100_4096)
    plus, minus = boundary_parts(blocks, BoundaryMatrix(np.eye(2)))
    np.testing.assert_allclose(
        plus.values, (blocks.a22_plus - blocks.a12_plus).values, atol=1e-14
    )
    np.testing.assert_allclose(
        minus.values, (blocks.a11_minus - blocks.a21_minus).values, atol=1e-14
    )


def test_scattering_identity_for_zero_parts(grid_100_4096):
    from isphalf.linefunc import zero_like, LineMatrixFunction

    z = zero_like(LineMatrixFunction(grid_100_4096, np.zeros((4096, 2, 2))))
    s = scattering_matrix(z, z)
    np.testing.assert_allclose(s.values, np.eye(2)[None, :, :].repeat(4096, 0), atol=0)


def test_scattering_closed_form(n1_blocks, grid_100_4096):
    plus, minus = boundary_parts(n1_blocks, BoundaryMatrix(np.array([[1.0]])))
    s = scattering_matrix(plus, minus)
    lam = grid_100_4096
    want = (1 - 2j * lam) / (1 - 2j * lam - 1j)
    window = np.abs(lam) <= 20.0
    assert np.abs(s.values[window, 0, 0] - want[window]).max() < 1e-6
    assert abs(s.at(0.0)[0, 0] - (0.5 + 0.5j)) < 1e-6
    assert s.analyticity.kind == "strip"


def test_scattering_neumann_edge_bound(n1_blocks, grid_100_4096):
    plus, minus = boundary_parts(n1_blocks, BoundaryMatrix(np.array([[1.0]])))
    s = scattering_matrix(plus, minus)
    for idx in (0, -1):
        lhs = np.abs(s.values[idx] - np.eye(1)).max()
        rhs = 2 * np.abs(plus.values[idx]).max() + np.abs(minus.values[idx]).max()
        assert lhs <= rhs


def test_scattering_asymptotics_monotone(n1_kernels, n1_disp):
    grid = make_grid(128.0, 4096)
    blocks = kernel_transforms(n1_kernels, n1_disp, grid)
    plus, minus = boundary_parts(blocks, BoundaryMatrix(np.array([[1.0]])))
    s = scattering_matrix(plus, minus)
    eye = np.eye(1)
    devs = []
    for mag in (10.0, 20.0, 40.0, 80.0):
        devs.append(max(np.abs(s.at(mag) - eye).max(), np.abs(s.at(-mag) - eye).max()))
    assert all(a > b for a, b in zip(devs, devs[1:]))
    assert devs[-1] <= 0.05


def test_transmission_unipotent(n1_blocks, grid_100_4096):
    p, pi = transmission_matrix(n1_blocks)
    lam = grid_100_4096
    want01 = 1j / (1 - 2j * lam)
    assert np.abs(p.values[:, 0, 1] - want01).max() < 1e-6
    assert np.abs(pi.values[:, 0, 1] + want01).max() < 1e-6
    np.testing.assert_allclose(np.linalg.det(p.values), 1.0, atol=1e-12)
    prod = p.values @ pi.values
    np.testing.assert_allclose(prod, np.broadcast_to(np.eye(2), prod.shape), atol=1e-12)


def test_transmission_identity_zero_blocks(grid_100_4096):
    d = Dispersion(1, (-1.0, 1.0))
    ker = solve_kernels(TriangularPotential(1), d, step=0.1, x_max=2.0, tau_max=4.0)
    blocks = kernel_transforms(ker, d, grid_100_4096)
    p, pi = transmission_matrix(blocks)
    np.testing.assert_allclose(p.values, np.broadcast_to(np.eye(2), p.values.shape), atol=0)
    np.testing.assert_allclose(pi.values, np.broadcast_to(np.eye(2), pi.values.shape), atol=0)


def test_boundary_coupling_identity(n2_random_pot, e1_disp, n2_random_kernels, grid_100_4096):
    # choose B = S H A; the bounded solution must then satisfy y2(0) = H y1(0)
    blocks = kernel_transforms(n2_random_kernels, e1_disp, grid_100_4096)
    hmat = np.array([[1.0, 0.4], [-0.2, 2.0]], dtype=complex)
    bnd = BoundaryMatrix(hmat)
    plus, minus = boundary_parts(blocks, bnd)
    s = scattering_matrix(plus, minus)
    rng = np.random.default_rng(4)
    for lam in (0.0, grid_100_4096[2248], grid_100_4096[1300]):
        A = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        B = s.at(lam) @ hmat @ A
        sol = solve_bounded_solution(n2_random_pot, e1_disp, float(lam), A, B, step=0.01)
        resid = np.abs(sol.y2[0] - hmat @ sol.y1[0]).max()
        assert resid < 5e-4


def test_strip_diagnostics_zero_parts(grid_100_4096):
    from isphalf.linefunc import zero_like, LineMatrixFunction

    z = zero_like(LineMatrixFunction(grid_100_4096, np.zeros((4096, 1, 1))))
    rep = strip_diagnostics(z, z, delta=0.2)
    assert rep["min_abs_det_plus"] == pytest.approx(1.0)
    assert rep["min_abs_det_minus"] == pytest.approx(1.0)
    assert rep["edge_residual_plus"] == 0.0


def test_strip_diagnostics_closed_form(n1_blocks, grid_100_4096):
    plus, minus = boundary_parts(n1_blocks, BoundaryMatrix(np.array([[1.0]])))
    rep = strip_diagnostics(plus, minus)
    lam = grid_100_4096
    dets = np.abs(1.0 - 1j / (1 - 2j * lam))
    # det at lambda = 0 is 1 - i with modulus sqrt(2); the grid minimum is lower
    assert abs(dets[np.argmin(np.abs(lam))] - np.sqrt(2.0)) < 1e-12
    assert rep["min_abs_det_plus"] == pytest.approx(dets.min(), abs=2e-6)
    assert rep["min_abs_det_plus"] <= np.sqrt(2.0)
    # |det - 1| = 1/|1 - 2 i lam| which is about 1/200 at the window edge
    assert rep["edge_residual_plus"] <= 0.01
    assert rep["min_abs_det_minus"] == pytest.approx(1.0)
    # shifted lines stay inside the strip and keep the determinant away from 0
    assert rep["delta"] > 0
    for key, val in rep.items():
        if key.startswith("min_abs_det_plus_at_"):
            assert val > 0.3


def test_bounded_solution_against_ode_integrator(n2_random_pot, e1_disp):
    # independent oracle: march the ODE system from the far end with an
    # adaptive high-order integrator and compare boundary values
    from scipy.integrate import solve_ivp

    lam = 0.83
    A = np.array([1.0, -0.3 + 0.4j])
    B = np.array([0.5j, 0.9])
    X = 16.0
    xi = e1_disp.xi_arr
    from isphalf.forward import _full_profile

    def rhs(x, yri):
        y = yri[:4] + 1j * yri[4:]
        q = np.zeros((4, 4), complex)
        for r in range(4):
            for c in range(4):
                p = _full_profile(n2_random_pot, r, c)
                if not p.is_zero:
                    q[r, c] = p(np.array([x]))[0]
        dy = 1j * (lam * np.diag(xi) - q) @ y
        return np.concatenate([dy.real, dy.imag])

    amps = np.concatenate([A, B])
    y_end = amps * np.exp(1j * lam * xi * X)
    ode = solve_ivp(
        rhs, [X, 0.0], np.concatenate([y_end.real, y_end.imag]), rtol=1e-11, atol=1e-12
    )
    y0_ode = ode.y[:4, -1] + 1j * ode.y[4:, -1]
    sol = solve_bounded_solution(n2_random_pot, e1_disp, lam, A, B, step=0.005, x_max=X)
    got = np.concatenate([sol.y1[0], sol.y2[0]])
    assert np.abs(got - y0_ode).max() < 5e-6


def test_bounded_solution_tail_residual(n1_pot, n1_disp):
    sol = solve_bounded_solution(n1_pot, n1_disp, 0.7, [1.0], [1.0], step=0.01)
    assert np.isfinite(np.abs(sol.y).max())
    assert sol.tail_residual < 1e-10
