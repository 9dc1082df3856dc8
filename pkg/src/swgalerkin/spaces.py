"""Piecewise-polynomial spaces on [0, 1] and their Gram (mass) matrices.

A space of order ``r`` holds splines of degree r - 1.  The Dirichlet-side
spaces are built from B-splines on a clamped knot vector (endpoint knots of
multiplicity r), which for r = 2 reproduces the nodal hat basis; the
zero-endpoint variant drops the single B-spline that is nonzero at each
endpoint.  Periodic spaces use wrap-around B-splines with one basis function
per cell.  Every basis function is supported on at most r consecutive cells,
so the Gram matrix is banded with bandwidth r - 1 (plus corner blocks in the
periodic case).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .banded import BandedMatrix
from .mesh import Mesh, MeshFamily
from .quadrature import quad_rule

__all__ = [
    "Boundary",
    "SpaceSpec",
    "CellTables",
    "FemSpace",
    "build_space",
    "assemble_gram",
]


class Boundary(str, Enum):
    FREE = "free"
    ZERO_ENDPOINTS = "zero_endpoints"
    PERIODIC = "periodic"


_SUPPORTED = {
    (2, 0, Boundary.FREE),
    (2, 0, Boundary.ZERO_ENDPOINTS),
    (4, 2, Boundary.FREE),
    (4, 2, Boundary.ZERO_ENDPOINTS),
    (2, 0, Boundary.PERIODIC),
    (3, 1, Boundary.PERIODIC),
    (4, 2, Boundary.PERIODIC),
}


@dataclass(frozen=True)
class SpaceSpec:
    """Order r (degree r - 1), smoothness class C^k, and boundary mode."""

    order: int
    smoothness: int
    boundary: Boundary

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        key = (self.order, self.smoothness, self.boundary)
        if key not in _SUPPORTED:
            raise ValueError(
                f"unsupported space (order={self.order}, "
                f"smoothness={self.smoothness}, boundary={self.boundary.value})"
            )


def _bspline_vals_ders(t: np.ndarray, m: int, xs: np.ndarray, p: int):
    """Values and first derivatives of the p+1 degree-p B-splines that are
    nonzero on the knot span [t[m], t[m+1]], at the points ``xs``.

    Cox-de Boor recursion; row l corresponds to the spline with leading knot
    t[m - p + l].
    """
    nx = xs.shape[0]
    vals = np.zeros((p + 1, nx))
    vals[0] = 1.0
    left = np.zeros((p + 1, nx))
    right = np.zeros((p + 1, nx))
    low = None
    for j in range(1, p + 1):
        left[j] = xs - t[m + 1 - j]
        right[j] = t[m + j] - xs
        if j == p:
            low = vals[:p].copy()
        saved = np.zeros(nx)
        for rr in range(j):
            temp = vals[rr] / (right[rr + 1] + left[j - rr])
            vals[rr] = saved + right[rr + 1] * temp
            saved = left[j - rr] * temp
        vals[j] = saved

    ders = np.zeros((p + 1, nx))
    if p == 0:
        return vals, ders
    for l in range(p + 1):
        j = m - p + l
        d1 = t[j + p] - t[j]
        d2 = t[j + p + 1] - t[j + 1]
        term = 0.0
        if l >= 1 and d1 > 0.0:
            term = low[l - 1] / d1
        if l <= p - 1 and d2 > 0.0:
            term = term - low[l] / d2
        ders[l] = p * term
    return vals, ders


@dataclass(eq=False)
class CellTables:
    """Per-cell evaluation tables of a space's local basis.

    Shapes: ``x``/``w`` are (cells, points), ``val``/``der`` are
    (cells, local basis, points), ``dofs`` is (cells, local basis).  Rows of
    dropped boundary functions are identically zero and indexed to dof 0, so
    gathers and scatters need no masking.
    """

    x: np.ndarray
    w: np.ndarray | None
    val: np.ndarray
    der: np.ndarray
    dofs: np.ndarray
    dim: int

    def __post_init__(self):
        if self.w is not None:
            self.wval = self.w[:, None, :] * self.val
            self.wder = self.w[:, None, :] * self.der

    def value(self, coeffs: np.ndarray) -> np.ndarray:
        return np.einsum("clq,cl->cq", self.val, coeffs[self.dofs])

    def deriv(self, coeffs: np.ndarray) -> np.ndarray:
        return np.einsum("clq,cl->cq", self.der, coeffs[self.dofs])

    def load(self, g: np.ndarray) -> np.ndarray:
        """Assemble the vector of integrals of g against each basis function."""
        c = np.einsum("clq,cq->cl", self.wval, g)
        return np.bincount(self.dofs.ravel(), weights=c.ravel(), minlength=self.dim)

    def load_deriv(self, g: np.ndarray) -> np.ndarray:
        """As ``load`` but against the basis derivatives."""
        c = np.einsum("clq,cq->cl", self.wder, g)
        return np.bincount(self.dofs.ravel(), weights=c.ravel(), minlength=self.dim)

    def integrate(self, g: np.ndarray) -> float:
        return float((self.w * g).sum())

    def cell_integrals(self, g: np.ndarray) -> np.ndarray:
        return (self.w * g).sum(axis=1)


class FemSpace:
    """A built finite element space: basis, quadrature tables, factored Gram."""

    def __init__(self, mesh: Mesh, spec: SpaceSpec):
        spec = spec if isinstance(spec, SpaceSpec) else SpaceSpec(*spec)
        r = spec.order
        if spec.boundary is Boundary.PERIODIC:
            if r == 4 and mesh.family is not MeshFamily.UNIFORM:
                raise ValueError("periodic cubic splines require a uniform mesh")
            if mesh.n_cells <= 2 * (r - 1):
                raise ValueError(
                    f"periodic order {r} needs more than {2 * (r - 1)} cells"
                )
        self.mesh = mesh
        self.spec = spec
        self.order = r
        self.periodic = spec.boundary is Boundary.PERIODIC

        n = mesh.n_cells
        if self.periodic:
            self.knots = None
            self._n_full = n
            self.dim = n
        else:
            self.knots = np.concatenate(
                [np.full(r - 1, 0.0), mesh.nodes, np.full(r - 1, 1.0)]
            )
            self._n_full = n + r - 1
            drop = 2 if spec.boundary is Boundary.ZERO_ENDPOINTS else 0
            self.dim = self._n_full - drop

        self._tables: dict = {}
        self.gram = assemble_gram(self)

    # -- basis evaluation ----------------------------------------------------

    def _node_ext(self, j: int) -> float:
        # periodic extension of the node sequence by period 1
        n = self.mesh.n_cells
        return self.mesh.nodes[j % n] + (j // n)

    def _cell_basis(self, cell: int, xs: np.ndarray):
        """Local dofs, values, and derivatives of the nonzero basis on a cell."""
        r = self.order
        p = r - 1
        if self.periodic:
            n = self.mesh.n_cells
            t_local = np.array(
                [self._node_ext(j) for j in range(cell - p, cell + r + 1)]
            )
            vals, ders = _bspline_vals_ders(t_local, p, xs, p)
            dofs = (cell - p + np.arange(r)) % n
            return dofs, vals, ders

        m = p + cell
        vals, ders = _bspline_vals_ders(self.knots, m, xs, p)
        full = cell + np.arange(r)
        if self.spec.boundary is Boundary.ZERO_ENDPOINTS:
            dofs = full - 1
            dropped = (full == 0) | (full == self._n_full - 1)
            if dropped.any():
                vals = vals.copy()
                ders = ders.copy()
                vals[dropped] = 0.0
                ders[dropped] = 0.0
                dofs = np.where(dropped, 0, dofs)
        else:
            dofs = full
        return dofs, vals, ders

    def _build_tables(self, ref_pts: np.ndarray, ref_wts: np.ndarray | None) -> CellTables:
        mesh = self.mesh
        n = mesh.n_cells
        r = self.order
        q = ref_pts.size
        left = mesh.nodes[:-1]
        x = left[:, None] + mesh.cells[:, None] * ref_pts[None, :]
        w = mesh.cells[:, None] * ref_wts[None, :] if ref_wts is not None else None
        val = np.empty((n, r, q))
        der = np.empty((n, r, q))
        dofs = np.empty((n, r), dtype=np.intp)
        for i in range(n):
            d, v, dv = self._cell_basis(i, x[i])
            dofs[i] = d
            val[i] = v
            der[i] = dv
        return CellTables(x=x, w=w, val=val, der=der, dofs=dofs, dim=self.dim)

    def tables(self, q: int) -> CellTables:
        """Quadrature tables with the q-point Gauss rule per cell (cached).

        The lazy cache is safe to hit from several threads: a racing rebuild
        is idempotent and dict assignment is atomic under the GIL.
        """
        tab = self._tables.get(q)
        if tab is None:
            rule = quad_rule(q)
            tab = self._build_tables(rule.points, rule.weights)
            self._tables[q] = tab
        return tab

    def sampling_tables(self, points_per_cell: int) -> CellTables:
        """Weightless tables on equispaced points per cell, endpoints included."""
        key = ("sample", points_per_cell)
        tab = self._tables.get(key)
        if tab is None:
            ref = np.linspace(0.0, 1.0, points_per_cell + 1)
            tab = self._build_tables(ref, None)
            self._tables[key] = tab
        return tab

    def evaluate(self, coeffs: np.ndarray, x: np.ndarray, deriv: int = 0) -> np.ndarray:
        """Evaluate the spline with the given coefficients at arbitrary points."""
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        n = self.mesh.n_cells
        cells = np.clip(
            np.searchsorted(self.mesh.nodes, flat, side="right") - 1, 0, n - 1
        )
        out = np.empty(flat.shape)
        for cell in np.unique(cells):
            mask = cells == cell
            dofs, vals, ders = self._cell_basis(int(cell), flat[mask])
            table = ders if deriv == 1 else vals
            out[mask] = coeffs[dofs] @ table
        return out.reshape(x.shape) if x.ndim else out[0]

    def basis_matrix(self, x: np.ndarray, deriv: int = 0) -> np.ndarray:
        """Dense (len(x), dim) matrix of basis values; for small-scale checks."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros((x.size, self.dim))
        n = self.mesh.n_cells
        cells = np.clip(np.searchsorted(self.mesh.nodes, x, side="right") - 1, 0, n - 1)
        for k, (cell, pt) in enumerate(zip(cells, x)):
            dofs, vals, ders = self._cell_basis(int(cell), np.array([pt]))
            table = ders if deriv == 1 else vals
            for l, dof in enumerate(dofs):
                out[k, dof] += table[l, 0]
        return out

    def __repr__(self) -> str:
        return (
            f"FemSpace(order={self.order}, boundary={self.spec.boundary.value}, "
            f"dim={self.dim}, mesh={self.mesh!r})"
        )


def build_space(mesh: Mesh, spec: SpaceSpec) -> FemSpace:
    """Construct the space, assemble its Gram matrix, and factor it."""
    return FemSpace(mesh, spec)


def assemble_gram(space: FemSpace) -> BandedMatrix:
    """Assemble the factored mass matrix of basis inner products.

    The (r+1)-point Gauss rule integrates the degree 2r - 2 products exactly.
    """
    r = space.order
    tab = space._tables.get(r + 1)
    if tab is None:
        rule = quad_rule(r + 1)
        tab = space._build_tables(rule.points, rule.weights)
        space._tables[r + 1] = tab
    gram = BandedMatrix(space.dim, r - 1, periodic=space.periodic)
    blocks = np.einsum("caq,cbq->cab", tab.wval, tab.val)
    dofs = tab.dofs
    for i in range(space.mesh.n_cells):
        for a in range(r):
            for b in range(a, r):
                v = blocks[i, a, b]
                if v != 0.0:
                    gram.add(int(dofs[i, a]), int(dofs[i, b]), v)
    gram.factor()
    return gram
