import numpy as np
import pytest

from swgalerkin.mesh import MeshFamily, build_mesh
from swgalerkin.spaces import Boundary, SpaceSpec, assemble_gram, build_space


def test_dimensions():
    mesh4 = build_mesh(MeshFamily.UNIFORM, 4)
    mesh8 = build_mesh(MeshFamily.UNIFORM, 8)
    assert build_space(mesh4, SpaceSpec(2, 0, Boundary.FREE)).dim == 5
    assert build_space(mesh4, SpaceSpec(2, 0, Boundary.ZERO_ENDPOINTS)).dim == 3
    assert build_space(mesh8, SpaceSpec(4, 2, Boundary.FREE)).dim == 11
    assert build_space(mesh8, SpaceSpec(4, 2, Boundary.ZERO_ENDPOINTS)).dim == 9
    for r in (2, 3, 4):
        assert build_space(mesh8, SpaceSpec(r, r - 2, Boundary.PERIODIC)).dim == 8


def test_hat_basis_is_nodal():
    mesh = build_mesh(MeshFamily.UNIFORM, 4)
    space = build_space(mesh, SpaceSpec(2, 0, Boundary.FREE))
    values = space.basis_matrix(mesh.nodes)
    assert np.abs(values - np.eye(5)).max() < 1e-14


def test_zero_endpoint_spaces_vanish_at_boundary():
    mesh = build_mesh(MeshFamily.UNIFORM, 8)
    for r in (2, 4):
        space = build_space(mesh, SpaceSpec(r, r - 2, Boundary.ZERO_ENDPOINTS))
        ends = space.basis_matrix(np.array([0.0, 1.0]))
        assert np.abs(ends).max() < 1e-14


@pytest.mark.parametrize(
    "family,n", [(MeshFamily.UNIFORM, 8), (MeshFamily.ALTERNATING, 8), (MeshFamily.SLOWLY_VARYING, 14)]
)
@pytest.mark.parametrize("r", [2, 4])
def test_partition_of_unity_free_spaces(family, n, r):
    mesh = build_mesh(family, n)
    space = build_space(mesh, SpaceSpec(r, r - 2, Boundary.FREE))
    x = np.linspace(0.0, 1.0, 57)
    assert np.abs(space.basis_matrix(x).sum(axis=1) - 1.0).max() < 1e-13


def test_periodic_partition_of_unity():
    mesh = build_mesh(MeshFamily.UNIFORM, 8)
    for r in (2, 3, 4):
        space = build_space(mesh, SpaceSpec(r, r - 2, Boundary.PERIODIC))
        x = np.linspace(0.0, 1.0, 41)
        assert np.abs(space.basis_matrix(x).sum(axis=1) - 1.0).max() < 1e-13


def test_basis_support_at_most_r_cells():
    mesh = build_mesh(MeshFamily.UNIFORM, 12)
    for spec in (SpaceSpec(2, 0, Boundary.FREE), SpaceSpec(4, 2, Boundary.FREE),
                 SpaceSpec(4, 2, Boundary.PERIODIC)):
        space = build_space(mesh, spec)
        tab = space.tables(spec.order + 1)
        touched = {d: 0 for d in range(space.dim)}
        for i in range(mesh.n_cells):
            for l in range(spec.order):
                if np.abs(tab.val[i, l]).max() > 0:
                    touched[int(tab.dofs[i, l])] += 1
        assert max(touched.values()) <= spec.order


def test_unsupported_combination_named():
    with pytest.raises(ValueError, match="order=3"):
        SpaceSpec(3, 1, Boundary.FREE)
    with pytest.raises(ValueError, match="smoothness=1"):
        SpaceSpec(4, 1, Boundary.FREE)


def test_periodic_cubic_needs_uniform_mesh():
    mesh = build_mesh(MeshFamily.ALTERNATING, 8)
    with pytest.raises(ValueError, match="uniform"):
        build_space(mesh, SpaceSpec(4, 2, Boundary.PERIODIC))
    # quadratic periodic splines work on any mesh
    build_space(mesh, SpaceSpec(3, 1, Boundary.PERIODIC))


def test_gram_linear_zero_endpoints_tridiagonal():
    n = 8
    mesh = build_mesh(MeshFamily.UNIFORM, n)
    space = build_space(mesh, SpaceSpec(2, 0, Boundary.ZERO_ENDPOINTS))
    h = 1.0 / n
    gram = space.gram
    # rows scale to [1, 4, 1] * h/6
    assert np.abs(gram.bands[0] - 4 * h / 6).max() < 1e-15
    assert np.abs(gram.bands[1][: space.dim - 1] - h / 6).max() < 1e-15


def test_gram_linear_free_entries():
    n = 8
    mesh = build_mesh(MeshFamily.UNIFORM, n)
    space = build_space(mesh, SpaceSpec(2, 0, Boundary.FREE))
    h = 1.0 / n
    diag = space.gram.bands[0]
    assert abs(diag[0] - h / 3) < 1e-15 and abs(diag[-1] - h / 3) < 1e-15
    assert np.abs(diag[1:-1] - 2 * h / 3).max() < 1e-15
    assert np.abs(space.gram.bands[1][: n] - h / 6).max() < 1e-15


def test_gram_quadratic_form_gerschgorin_example():
    # the [h/3, h] window is guaranteed for the interior-hat matrix
    n = 16
    mesh = build_mesh(MeshFamily.UNIFORM, n)
    space = build_space(mesh, SpaceSpec(2, 0, Boundary.ZERO_ENDPOINTS))
    h = 1.0 / n
    rng = np.random.default_rng(0)
    for _ in range(50):
        beta = rng.standard_normal(space.dim)
        q = space.gram.quadratic_form(beta)
        norm2 = float(beta @ beta)
        assert h / 3 * norm2 - 1e-12 <= q <= h * norm2 + 1e-12


def _gerschgorin_bounds(gram):
    dense = gram.to_dense()
    radii = np.abs(dense).sum(axis=1) - np.abs(np.diag(dense))
    return (np.diag(dense) - radii).min(), (np.diag(dense) + radii).max()


@pytest.mark.parametrize("r,boundary", [
    (2, Boundary.FREE), (2, Boundary.ZERO_ENDPOINTS),
    (4, Boundary.FREE), (4, Boundary.ZERO_ENDPOINTS), (4, Boundary.PERIODIC),
])
def test_gram_spectrum_within_gerschgorin_bounds(r, boundary):
    n = 16
    mesh = build_mesh(MeshFamily.UNIFORM, n)
    space = build_space(mesh, SpaceSpec(r, r - 2, boundary))
    lo, hi = _gerschgorin_bounds(space.gram)
    rng = np.random.default_rng(42)
    for _ in range(1000):
        beta = rng.standard_normal(space.dim)
        q = space.gram.quadratic_form(beta)
        norm2 = float(beta @ beta)
        assert lo * norm2 - 1e-12 <= q <= hi * norm2 + 1e-12
    h = 1.0 / n
    if r == 2 and boundary is Boundary.ZERO_ENDPOINTS:
        # the classical h-scaled window [h/3, h] belongs to the interior-hat
        # mass matrix, where every Gerschgorin row clears h/3
        assert lo >= h / 3 - 1e-14
        assert hi <= h + 1e-14
        for _ in range(1000):
            beta = rng.standard_normal(space.dim)
            q = space.gram.quadratic_form(beta)
            norm2 = float(beta @ beta)
            assert h / 3 * norm2 - 1e-12 <= q <= h * norm2 + 1e-12
    if r == 2 and boundary is Boundary.FREE:
        # boundary rows lower the row bound to h/6; the true spectral floor
        # sits at h/4 (boundary-localized mode)
        assert abs(lo - h / 6) < 1e-14
        assert abs(hi - h) < 1e-14
        # true spectral floor sits between the row bound and the interior
        # constant (a boundary-localized mode approaches h/4 from below)
        eigs = np.linalg.eigvalsh(space.gram.to_dense())
        assert h / 6 <= eigs[0] <= h / 3


def test_inverse_inequality_ratio_bounded():
    rng = np.random.default_rng(9)
    for r, cap in ((2, np.sqrt(3.0) + 0.01), (4, 5.0)):
        worst = []
        for n in (16, 32, 64, 128):
            mesh = build_mesh(MeshFamily.UNIFORM, n)
            space = build_space(mesh, SpaceSpec(r, r - 2, Boundary.FREE))
            samp = space.sampling_tables(20)
            ratios = []
            for _ in range(50):
                beta = rng.standard_normal(space.dim)
                sup = np.abs(samp.value(beta)).max()
                l2 = np.sqrt(space.gram.quadratic_form(beta))
                ratios.append(sup / (np.sqrt(n) * l2))
            worst.append(max(ratios))
        assert max(worst) <= cap
        assert worst[-1] <= worst[0] * 1.25  # no growth under refinement


def test_basis_derivative_consistent_with_finite_differences():
    rng = np.random.default_rng(21)
    delta = 1e-6
    for r in (2, 4):
        mesh = build_mesh(MeshFamily.UNIFORM, 16)
        space = build_space(mesh, SpaceSpec(r, r - 2, Boundary.FREE))
        beta = rng.standard_normal(space.dim)
        # stay away from the knots, where hats have derivative jumps
        x = mesh.nodes[:-1] + 0.37 * mesh.cells
        fd = (space.evaluate(beta, x + delta) - space.evaluate(beta, x - delta)) / (2 * delta)
        assert np.abs(fd - space.evaluate(beta, x, deriv=1)).max() < 1e-6


def test_assemble_gram_is_consistent_with_build():
    mesh = build_mesh(MeshFamily.UNIFORM, 10)
    space = build_space(mesh, SpaceSpec(4, 2, Boundary.ZERO_ENDPOINTS))
    again = assemble_gram(space)
    assert np.allclose(again.to_dense(), space.gram.to_dense(), atol=1e-15)
