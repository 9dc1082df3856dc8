"""Superaccuracy diagnostics of the L2 projection on uniform piecewise
linears.

Three families of functionals of the projection residual e = f - Pf are
measured per cell: plain and weighted cell moments (integral of w*e over each
cell, which decays like h^5 for smooth data meeting the endpoint
compatibility conditions), derivative errors at cell midpoints (h^2), and
the L2 norms of six dual functionals obtained by testing (g*e)' against the
basis (h^3).  Rates are confirmed by least-squares log-log fits over a
refinement sweep.

All quantities here assume the uniform-mesh piecewise-linear setting; other
spaces are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .mesh import MeshFamily, build_mesh
from .projection import apply_to_grid, l2_project
from .spaces import Boundary, FemSpace, SpaceSpec, build_space

__all__ = [
    "cell_moments",
    "midpoint_derivative_errors",
    "dual_functional_norms",
    "fit_rate",
    "SuperaccReport",
    "run_suite",
]

_ORACLE_Q = 8  # Gauss points per cell for the diagnostic integrals


def _check_setting(space: FemSpace) -> None:
    if space.mesh.family is not MeshFamily.UNIFORM or space.order != 2:
        raise ValueError(
            "superaccuracy diagnostics require a uniform piecewise-linear space"
        )


def _fd_derivative(f: Callable, delta: float = 1e-3) -> Callable:
    # fourth-order central difference; used only when no analytic derivative
    # is supplied, with error far below the h^2 signal being measured
    def fp(x):
        return (
            -f(x + 2 * delta) + 8 * f(x + delta) - 8 * f(x - delta) + f(x - 2 * delta)
        ) / (12 * delta)

    return fp


def cell_moments(
    space: FemSpace, f: Callable, weight: Optional[Callable] = None
) -> np.ndarray:
    """Per-cell integrals of weight * (f - Pf); weight defaults to 1."""
    _check_setting(space)
    proj = l2_project(space, f)
    tab = space.tables(_ORACLE_Q)
    resid = apply_to_grid(f, tab.x) - tab.value(proj.coeffs)
    if weight is not None:
        resid = apply_to_grid(weight, tab.x) * resid
    return tab.cell_integrals(resid)


def midpoint_derivative_errors(
    space: FemSpace, f: Callable, fprime: Optional[Callable] = None
) -> np.ndarray:
    """(f - Pf)'(midpoint) for every cell."""
    _check_setting(space)
    proj = l2_project(space, f)
    mids = 0.5 * (space.mesh.nodes[:-1] + space.mesh.nodes[1:])
    if fprime is None:
        fprime = _fd_derivative(f)
    return apply_to_grid(fprime, mids) - proj(mids, deriv=1)


def dual_functional_norms(
    free_space: FemSpace,
    zero_space: FemSpace,
    eta: Callable,
    u: Callable,
    weight_zero_bc: Callable,
    weight_generic: Callable,
) -> dict[str, float]:
    """L2 norms of the six dual functionals built on the projection residuals.

    With rho = eta - (projection of eta onto the free space) and
    sigma = u - (projection of u onto the zero-endpoint space), each
    functional tests the derivative of one of rho, sigma, w*rho, v*sigma,
    v*rho against a basis (free or zero-endpoint), where w vanishes at the
    endpoints and v is arbitrary smooth; the representer's norm is returned.
    Integration by parts moves the derivative onto the basis, the boundary
    terms vanishing either through w or through rho/sigma themselves.
    """
    _check_setting(free_space)
    _check_setting(zero_space)
    rho_f = l2_project(free_space, eta)
    sigma_f = l2_project(zero_space, u)
    tf = free_space.tables(_ORACLE_Q)
    tz = zero_space.tables(_ORACLE_Q)
    x = tf.x  # both spaces share the mesh and rule
    rho = apply_to_grid(eta, x) - tf.value(rho_f.coeffs)
    sigma = apply_to_grid(u, x) - tz.value(sigma_f.coeffs)
    w = apply_to_grid(weight_zero_bc, x)
    v = apply_to_grid(weight_generic, x)

    def represent(tab, space, g):
        b = -tab.load_deriv(g)
        zeta = space.gram.solve(b)
        return float(np.sqrt(max(space.gram.quadratic_form(zeta), 0.0)))

    return {
        "rho_x_zero": represent(tz, zero_space, rho),
        "sigma_x_free": represent(tf, free_space, sigma),
        "w_rho_x_free": represent(tf, free_space, w * rho),
        "v_sigma_x_free": represent(tf, free_space, v * sigma),
        "v_sigma_x_zero": represent(tz, zero_space, v * sigma),
        "v_rho_x_zero": represent(tz, zero_space, v * rho),
    }


def fit_rate(h_values: Sequence[float], quantity_values: Sequence[float]) -> float:
    """Least-squares slope of log(quantity) against log(h)."""
    h = np.asarray(h_values, dtype=float)
    v = np.asarray(quantity_values, dtype=float)
    if h.size != v.size or h.size < 2:
        raise ValueError("need at least 2 (h, value) pairs")
    if (h <= 0).any() or (v <= 0).any():
        raise ValueError("rate fit requires positive h and quantity values")
    return float(np.polyfit(np.log(h), np.log(v), 1)[0])


@dataclass
class SuperaccReport:
    """One diagnostic swept over refinements, with its fitted decay rate."""

    quantity: str
    n_values: list[int]
    h_values: list[float]
    values: list[float]
    slope: float
    target: float


_DEFAULT_NS = (16, 32, 64, 128)


def run_suite(n_values: Sequence[int] = _DEFAULT_NS) -> list[SuperaccReport]:
    """Run every diagnostic with standard compatible test data.

    u = sin(pi x) vanishes at the endpoints together with its second
    derivative; eta = cos(pi x) has vanishing first and third derivatives
    there; sin(pi x) doubles as the endpoint-zero weight and exp(x) as the
    generic one.
    """
    pi = np.pi
    u = lambda x: np.sin(pi * x)
    up = lambda x: pi * np.cos(pi * x)
    eta = lambda x: np.cos(pi * x)
    etap = lambda x: -pi * np.sin(pi * x)
    vexp = np.exp

    sweeps: dict[str, tuple[float, list[float]]] = {
        "sigma_cell_moment": (5.0, []),
        "rho_cell_moment": (5.0, []),
        "sigma_weighted_moment": (5.0, []),
        "rho_weighted_moment": (5.0, []),
        "sigma_midpoint_deriv": (2.0, []),
        "rho_midpoint_deriv": (2.0, []),
        "rho_x_zero": (3.0, []),
        "sigma_x_free": (3.0, []),
        "w_rho_x_free": (3.0, []),
        "v_sigma_x_free": (3.0, []),
        "v_sigma_x_zero": (3.0, []),
        "v_rho_x_zero": (3.0, []),
    }

    h_values = []
    for n in n_values:
        mesh = build_mesh(MeshFamily.UNIFORM, n)
        free = build_space(mesh, SpaceSpec(2, 0, Boundary.FREE))
        zero = build_space(mesh, SpaceSpec(2, 0, Boundary.ZERO_ENDPOINTS))
        h_values.append(mesh.h_max)

        sweeps["sigma_cell_moment"][1].append(np.abs(cell_moments(zero, u)).max())
        sweeps["rho_cell_moment"][1].append(np.abs(cell_moments(free, eta)).max())
        sweeps["sigma_weighted_moment"][1].append(
            np.abs(cell_moments(zero, u, weight=vexp)).max()
        )
        sweeps["rho_weighted_moment"][1].append(
            np.abs(cell_moments(free, eta, weight=vexp)).max()
        )
        sweeps["sigma_midpoint_deriv"][1].append(
            np.abs(midpoint_derivative_errors(zero, u, up)).max()
        )
        sweeps["rho_midpoint_deriv"][1].append(
            np.abs(midpoint_derivative_errors(free, eta, etap)).max()
        )
        duals = dual_functional_norms(free, zero, eta, u, u, vexp)
        for key, val in duals.items():
            sweeps[key][1].append(val)

    return [
        SuperaccReport(
            quantity=name,
            n_values=list(n_values),
            h_values=h_values,
            values=vals,
            slope=fit_rate(h_values, vals),
            target=target,
        )
        for name, (target, vals) in sweeps.items()
    ]
