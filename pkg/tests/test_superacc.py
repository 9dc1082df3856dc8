import numpy as np
import pytest

from swgalerkin.mesh import MeshFamily, build_mesh
from swgalerkin.projection import l2_project
from swgalerkin.spaces import Boundary, SpaceSpec, build_space
from swgalerkin.superacc import (
    cell_moments,
    dual_functional_norms,
    fit_rate,
    midpoint_derivative_errors,
    run_suite,
)

PI = np.pi
NS = (16, 32, 64, 128)


def _spaces(n):
    mesh = build_mesh(MeshFamily.UNIFORM, n)
    free = build_space(mesh, SpaceSpec(2, 0, Boundary.FREE))
    zero = build_space(mesh, SpaceSpec(2, 0, Boundary.ZERO_ENDPOINTS))
    return mesh, free, zero


def _sweep(values_for_n):
    hs, vals = [], []
    for n in NS:
        hs.append(1.0 / n)
        vals.append(values_for_n(n))
    return fit_rate(hs, vals)


def test_requires_uniform_piecewise_linear():
    mesh = build_mesh(MeshFamily.ALTERNATING, 16)
    space = build_space(mesh, SpaceSpec(2, 0, Boundary.FREE))
    with pytest.raises(ValueError, match="uniform piecewise-linear"):
        cell_moments(space, np.sin)
    cubic = build_space(build_mesh(MeshFamily.UNIFORM, 16), SpaceSpec(4, 2, Boundary.FREE))
    with pytest.raises(ValueError, match="uniform piecewise-linear"):
        midpoint_derivative_errors(cubic, np.sin)


def test_cell_moment_cross_check_against_fine_quadrature():
    # the 8-point rule behind the diagnostics is converged: a 32-point
    # evaluation of the same integrals agrees far below the h^5 signal
    _, _, zero = _spaces(32)
    u = lambda x: np.sin(PI * x)
    moments = cell_moments(zero, u)
    proj = l2_project(zero, u)
    xs, ws = np.polynomial.legendre.leggauss(32)
    mesh = zero.mesh
    for i in range(0, 32, 7):
        a, b = mesh.nodes[i], mesh.nodes[i + 1]
        xg = a + (xs + 1) / 2 * (b - a)
        wg = ws / 2 * (b - a)
        fine = float((wg * (u(xg) - proj(xg))).sum())
        assert abs(fine - moments[i]) < 1e-15


def test_sigma_cell_moments_fifth_order():
    slope = _sweep(lambda n: np.abs(cell_moments(_spaces(n)[2], lambda x: np.sin(PI * x))).max())
    assert abs(slope - 5.0) <= 0.2


def test_incompatible_data_degrades_cell_moments():
    # x(1-x) has nonzero second derivative at the endpoints
    slope = _sweep(lambda n: np.abs(cell_moments(_spaces(n)[2], lambda x: x * (1 - x))).max())
    assert slope < 4.5


def test_rho_cell_moments_fifth_order():
    slope = _sweep(lambda n: np.abs(cell_moments(_spaces(n)[1], lambda x: np.cos(PI * x))).max())
    assert abs(slope - 5.0) <= 0.2


def test_weighted_rho_moments_fifth_order():
    slope = _sweep(
        lambda n: np.abs(
            cell_moments(_spaces(n)[1], lambda x: np.cos(PI * x), weight=np.exp)
        ).max()
    )
    assert abs(slope - 5.0) <= 0.2


def test_moment_linear_system_identity():
    """The per-cell moments solve the tridiagonal system their construction
    implies: rebuilding the right-hand side from loads and cell integrals
    reproduces the moments through the matrix with rows [1 4 1] (3 at the
    corners)."""
    n = 32
    _, _, zero = _spaces(n)
    u = lambda x: np.sin(PI * x)
    eps = cell_moments(zero, u)
    tab8 = zero.tables(8)
    iu = tab8.cell_integrals(u(tab8.x))
    # the load vector the projection actually used
    tab_load = zero.tables(zero.order + 2)
    b = tab_load.load(u(tab_load.x))
    gamma = np.zeros((n, n))
    for i in range(n):
        gamma[i, i] = 4.0
        if i > 0:
            gamma[i, i - 1] = 1.0
        if i < n - 1:
            gamma[i, i + 1] = 1.0
    gamma[0, 0] = gamma[-1, -1] = 3.0
    r = np.empty(n)
    r[0] = 3 * iu[0] + iu[1] - 3 * b[0]
    for i in range(1, n - 1):
        r[i] = iu[i - 1] + 4 * iu[i] + iu[i + 1] - 3 * (b[i - 1] + b[i])
    r[-1] = iu[-2] + 3 * iu[-1] - 3 * b[-1]
    assert np.abs(gamma @ eps - r).max() <= 1e-12


def test_midpoint_derivative_of_member_vanishes():
    _, free, _ = _spaces(16)
    coeffs = np.random.default_rng(2).standard_normal(free.dim)
    member = lambda x: free.evaluate(coeffs, x)
    member_prime = lambda x: free.evaluate(coeffs, x, deriv=1)
    vals = midpoint_derivative_errors(free, member, member_prime)
    assert np.abs(vals).max() < 1e-12


def test_sigma_midpoint_derivatives_second_order():
    slope = _sweep(
        lambda n: np.abs(
            midpoint_derivative_errors(
                _spaces(n)[2], lambda x: np.sin(PI * x), lambda x: PI * np.cos(PI * x)
            )
        ).max()
    )
    assert abs(slope - 2.0) <= 0.1


def test_rho_midpoint_derivatives_second_order():
    slope = _sweep(
        lambda n: np.abs(
            midpoint_derivative_errors(
                _spaces(n)[1], lambda x: np.cos(PI * x), lambda x: -PI * np.sin(PI * x)
            )
        ).max()
    )
    assert abs(slope - 2.0) <= 0.1


def test_dual_functionals_vanish_for_members():
    _, free, zero = _spaces(16)
    rng = np.random.default_rng(4)
    ce = rng.standard_normal(free.dim)
    cu = rng.standard_normal(zero.dim)
    eta = lambda x: free.evaluate(ce, x)
    u = lambda x: zero.evaluate(cu, x)
    norms = dual_functional_norms(free, zero, eta, u, lambda x: np.sin(PI * x), np.exp)
    assert max(norms.values()) < 1e-11


def test_dual_functional_norms_decay_at_least_cubically():
    slopes = {}
    values = {key: [] for key in (
        "rho_x_zero", "sigma_x_free", "w_rho_x_free",
        "v_sigma_x_free", "v_sigma_x_zero", "v_rho_x_zero")}
    hs = []
    for n in NS:
        _, free, zero = _spaces(n)
        norms = dual_functional_norms(
            free, zero, lambda x: np.cos(PI * x), lambda x: np.sin(PI * x),
            lambda x: np.sin(PI * x), np.exp,
        )
        hs.append(1.0 / n)
        for key, val in norms.items():
            values[key].append(val)
    for key, vals in values.items():
        slopes[key] = fit_rate(hs, vals)
        assert slopes[key] >= 2.8, (key, slopes[key])


def test_dual_functional_norms_degrade_without_compatibility():
    def slope_for(eta, u):
        hs, vals = [], []
        for n in NS:
            _, free, zero = _spaces(n)
            norms = dual_functional_norms(free, zero, eta, u, lambda x: np.sin(PI * x), np.exp)
            hs.append(1.0 / n)
            vals.append(norms["sigma_x_free"])
        return fit_rate(hs, vals)

    good = slope_for(lambda x: np.cos(PI * x), lambda x: np.sin(PI * x))
    bad = slope_for(lambda x: np.cos(PI * x), lambda x: x * (1 - x))
    assert good - bad >= 0.4


def test_fit_rate_exact_powers():
    hs = [1 / 8, 1 / 16, 1 / 32, 1 / 64]
    assert abs(fit_rate(hs, [h**2 for h in hs]) - 2.0) < 1e-12
    assert abs(fit_rate(hs, [h**5 for h in hs]) - 5.0) < 1e-12


def test_fit_rate_matches_reported_pairwise_order():
    # two-point fit equals the pairwise observed order; reference values from
    # the first refinement pair of the alternating-mesh elevation errors
    slope = fit_rate([1.0 / 40, 1.0 / 80], [0.7332e-1, 0.3605e-1])
    assert abs(slope - 1.0240) < 1e-3


def test_fit_rate_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_rate([0.1], [1.0])
    with pytest.raises(ValueError):
        fit_rate([0.1, 0.05], [1.0, -1.0])
    with pytest.raises(ValueError):
        fit_rate([0.1, -0.05], [1.0, 0.5])


def test_run_suite_structure():
    reports = run_suite((16, 32))
    assert len(reports) == 12
    for rep in reports:
        assert len(rep.values) == 2
        assert np.isfinite(rep.slope)
        assert all(v > 0 for v in rep.values)
