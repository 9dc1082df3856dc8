import numpy as np
import pytest

from swgalerkin.mesh import MeshFamily, build_mesh
from swgalerkin.projection import FemFunction, l2_project
from swgalerkin.spaces import Boundary, SpaceSpec, build_space
from swgalerkin.superacc import fit_rate

GAUSS64 = np.polynomial.legendre.leggauss(64)


def oracle_l2_error(fem, f, deriv=0):
    """High-order quadrature of ||fem - f||, independent of the solver path."""
    xs, ws = GAUSS64
    mesh = fem.space.mesh
    total = 0.0
    for i in range(mesh.n_cells):
        a, b = mesh.nodes[i], mesh.nodes[i + 1]
        xg = a + (xs + 1) / 2 * (b - a)
        wg = ws / 2 * (b - a)
        diff = fem(xg, deriv=deriv) - f(xg)
        total += float((wg * diff * diff).sum())
    return np.sqrt(total)


def test_projection_of_member_recovers_coefficients():
    rng = np.random.default_rng(5)
    mesh = build_mesh(MeshFamily.UNIFORM, 16)
    for r in (2, 4):
        space = build_space(mesh, SpaceSpec(r, r - 2, Boundary.FREE))
        coeffs = rng.standard_normal(space.dim)
        member = FemFunction(space, coeffs)
        proj = l2_project(space, member)
        assert np.abs(proj.coeffs - coeffs).max() < 1e-11


def test_constant_reproduced_exactly():
    mesh = build_mesh(MeshFamily.ALTERNATING, 8)
    space = build_space(mesh, SpaceSpec(2, 0, Boundary.FREE))
    proj = l2_project(space, lambda x: np.ones_like(x))
    assert np.abs(proj.coeffs - 1.0).max() < 1e-13


def test_galerkin_orthogonality():
    mesh = build_mesh(MeshFamily.UNIFORM, 16)
    f = lambda x: np.exp(x) * np.sin(np.pi * x)
    for r in (2, 4):
        space = build_space(mesh, SpaceSpec(r, r - 2, Boundary.FREE))
        proj = l2_project(space, f)
        tab = space.tables(8)
        resid = f(tab.x) - tab.value(proj.coeffs)
        assert np.abs(tab.load(resid)).max() <= 1e-11 * np.e * mesh.h_max


def test_sine_projection_second_order():
    f = lambda x: np.sin(np.pi * x)
    errors, hs = [], []
    for n in (8, 16, 32, 64):
        mesh = build_mesh(MeshFamily.UNIFORM, n)
        space = build_space(mesh, SpaceSpec(2, 0, Boundary.FREE))
        errors.append(oracle_l2_error(l2_project(space, f), f))
        hs.append(mesh.h_max)
    assert abs(fit_rate(hs, errors) - 2.0) <= 0.05


def test_best_approximation_property():
    f = np.exp
    mesh = build_mesh(MeshFamily.UNIFORM, 16)
    space = build_space(mesh, SpaceSpec(2, 0, Boundary.FREE))
    proj = l2_project(space, f)
    best = oracle_l2_error(proj, f)
    rng = np.random.default_rng(17)
    for _ in range(100):
        chi = FemFunction(space, proj.coeffs + rng.standard_normal(space.dim) * 10 ** rng.uniform(-6, 0))
        assert best <= oracle_l2_error(chi, f) + 1e-10


@pytest.mark.parametrize("r", [2, 4])
def test_approximation_rates(r):
    f = lambda x: np.exp(x) * np.sin(np.pi * x)
    l2_errors, linf_errors, hs = [], [], []
    for n in (8, 16, 32, 64, 128):
        mesh = build_mesh(MeshFamily.UNIFORM, n)
        space = build_space(mesh, SpaceSpec(r, r - 2, Boundary.FREE))
        proj = l2_project(space, f)
        l2_errors.append(oracle_l2_error(proj, f))
        samp = space.sampling_tables(20)
        linf_errors.append(np.abs(samp.value(proj.coeffs) - f(samp.x)).max())
        hs.append(mesh.h_max)
    assert abs(fit_rate(hs, l2_errors) - r) <= 0.1
    assert abs(fit_rate(hs, linf_errors) - r) <= 0.15


def test_zero_endpoint_member_values():
    mesh = build_mesh(MeshFamily.UNIFORM, 16)
    space = build_space(mesh, SpaceSpec(4, 2, Boundary.ZERO_ENDPOINTS))
    proj = l2_project(space, lambda x: np.sin(np.pi * x))
    assert abs(proj(0.0)) < 1e-13 and abs(proj(1.0)) < 1e-13


def test_periodic_projection():
    mesh = build_mesh(MeshFamily.UNIFORM, 32)
    f = lambda x: np.cos(2 * np.pi * x) + 0.5
    for r in (2, 3, 4):
        space = build_space(mesh, SpaceSpec(r, r - 2, Boundary.PERIODIC))
        proj = l2_project(space, f)
        assert oracle_l2_error(proj, f) < 10.0 * (2 * np.pi / 32) ** r
