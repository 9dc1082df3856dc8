"""The shallow water system, its symmetric variant, and their Galerkin
semidiscretizations.

Both systems are carried in their amplitude-scaled form, where a parameter
``epsilon`` multiplies every nonlinear term; the unscaled equations are the
``epsilon = 1`` instance.  Writing eta for the free-surface elevation and u
for the velocity:

    shallow water (sw):    eta_t + u_x + eps*(eta*u)_x           = f1
                           u_t + eta_x + eps*u*u_x               = f2

    symmetric (ssw):       eta_t + u_x + (eps/2)*(eta*u)_x       = f1
                           u_t + eta_x + (eps/2)*eta*eta_x
                                       + (3*eps/2)*u*u_x         = f2

The semidiscrete right-hand side tests these against the elevation and
velocity spaces and solves the two Gram systems.  Nonlinear products are
integrated with the (r+1)-point Gauss rule, which is exact for the degree
3(r-1) integrands, so the symmetric system's quadratic energy identity holds
at machine precision.  Manufactured forcing, when supplied, is integrated
with the (r+2)-point rule used for projections.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .projection import FemFunction, l2_project
from .spaces import FemSpace

__all__ = [
    "SystemFamily",
    "SystemKind",
    "SystemState",
    "ManufacturedSolution",
    "PRESETS",
    "preset",
    "make_system",
    "initial_state",
    "rhs",
    "semidiscrete_rhs",
    "forcing_values",
    "energy",
]


class SystemFamily(str, Enum):
    SW = "sw"
    SSW = "ssw"


@dataclass(frozen=True)
class SystemKind:
    """Which nonlinearity layout to use, and its amplitude scale."""

    family: SystemFamily
    epsilon: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", SystemFamily(self.family))
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")


def make_system(family: str, epsilon: float = 1.0) -> SystemKind:
    return SystemKind(SystemFamily(family), epsilon)


@dataclass(eq=False)
class SystemState:
    """Pair of spline fields sharing a mesh, at a common time."""

    eta: FemFunction
    u: FemFunction
    t: float = 0.0


@dataclass(frozen=True, eq=False)
class ManufacturedSolution:
    """Closed-form (eta, u) with the partial derivatives the forcing needs.

    For Dirichlet presets u vanishes at both endpoints for all t; periodic
    presets are 1-periodic in x.
    """

    name: str
    eta: Callable
    u: Callable
    eta_t: Callable
    eta_x: Callable
    u_t: Callable
    u_x: Callable
    periodic: bool = False


def _preset_trig_a() -> ManufacturedSolution:
    pi = np.pi
    return ManufacturedSolution(
        name="trig-a",
        eta=lambda x, t: np.exp(2 * t) * (np.cos(pi * x) + x + 2),
        eta_t=lambda x, t: 2 * np.exp(2 * t) * (np.cos(pi * x) + x + 2),
        eta_x=lambda x, t: np.exp(2 * t) * (1 - pi * np.sin(pi * x)),
        u=lambda x, t: np.exp(-x * t) * np.sin(pi * x),
        u_t=lambda x, t: -x * np.exp(-x * t) * np.sin(pi * x),
        u_x=lambda x, t: np.exp(-x * t) * (pi * np.cos(pi * x) - t * np.sin(pi * x)),
    )


def _preset_trig_b() -> ManufacturedSolution:
    pi = np.pi
    return ManufacturedSolution(
        name="trig-b",
        eta=lambda x, t: np.exp(2 * t) * (np.cos(pi * x) + x + 2),
        eta_t=lambda x, t: 2 * np.exp(2 * t) * (np.cos(pi * x) + x + 2),
        eta_x=lambda x, t: np.exp(2 * t) * (1 - pi * np.sin(pi * x)),
        u=lambda x, t: np.exp(x * t) * (np.sin(pi * x) + x**3 - x**2),
        u_t=lambda x, t: x * np.exp(x * t) * (np.sin(pi * x) + x**3 - x**2),
        u_x=lambda x, t: np.exp(x * t)
        * (t * (np.sin(pi * x) + x**3 - x**2) + pi * np.cos(pi * x) + 3 * x**2 - 2 * x),
    )


def _preset_trig_c() -> ManufacturedSolution:
    pi = np.pi
    return ManufacturedSolution(
        name="trig-c",
        eta=lambda x, t: np.exp(2 * t) * (np.cos(pi * x) + x + 2),
        eta_t=lambda x, t: 2 * np.exp(2 * t) * (np.cos(pi * x) + x + 2),
        eta_x=lambda x, t: np.exp(2 * t) * (1 - pi * np.sin(pi * x)),
        u=lambda x, t: np.exp(x * t) * (np.sin(pi * x) + 5 * x**2 * (x - 1)),
        u_t=lambda x, t: x * np.exp(x * t) * (np.sin(pi * x) + 5 * x**2 * (x - 1)),
        u_x=lambda x, t: np.exp(x * t)
        * (
            t * (np.sin(pi * x) + 5 * x**2 * (x - 1))
            + pi * np.cos(pi * x)
            + 15 * x**2
            - 10 * x
        ),
    )


def _preset_periodic_trig() -> ManufacturedSolution:
    w = 2 * np.pi
    return ManufacturedSolution(
        name="periodic-trig",
        eta=lambda x, t: np.exp(0.3 * t) * (np.sin(w * x + 0.3) + 2),
        eta_t=lambda x, t: 0.3 * np.exp(0.3 * t) * (np.sin(w * x + 0.3) + 2),
        eta_x=lambda x, t: w * np.exp(0.3 * t) * np.cos(w * x + 0.3),
        u=lambda x, t: np.exp(-0.2 * t) * np.cos(w * x - 0.4),
        u_t=lambda x, t: -0.2 * np.exp(-0.2 * t) * np.cos(w * x - 0.4),
        u_x=lambda x, t: -w * np.exp(-0.2 * t) * np.sin(w * x - 0.4),
        periodic=True,
    )


PRESETS = {
    p.name: p
    for p in (
        _preset_trig_a(),
        _preset_trig_b(),
        _preset_trig_c(),
        _preset_periodic_trig(),
    )
}


def preset(name: str) -> ManufacturedSolution:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown preset '{name}'; available: {', '.join(sorted(PRESETS))}"
        ) from None


def forcing_values(system: SystemKind, ms: ManufacturedSolution, x: np.ndarray, t: float):
    """Point values of the forcing pair that makes ``ms`` an exact solution."""
    eps = system.epsilon
    ev = ms.eta(x, t)
    ex = ms.eta_x(x, t)
    uv = ms.u(x, t)
    ux = ms.u_x(x, t)
    if system.family is SystemFamily.SW:
        f1 = ms.eta_t(x, t) + ux + eps * (ex * uv + ev * ux)
        f2 = ms.u_t(x, t) + ex + eps * uv * ux
    else:
        f1 = ms.eta_t(x, t) + ux + 0.5 * eps * (ex * uv + ev * ux)
        f2 = ms.u_t(x, t) + ex + 0.5 * eps * ev * ex + 1.5 * eps * uv * ux
    return f1, f2


def initial_state(
    eta_space: FemSpace,
    u_space: FemSpace,
    eta0: Callable,
    u0: Callable,
    t: float = 0.0,
) -> SystemState:
    """Project the initial data onto the two spaces."""
    if eta_space.mesh is not u_space.mesh and not np.array_equal(
        eta_space.mesh.nodes, u_space.mesh.nodes
    ):
        raise ValueError("elevation and velocity spaces must share a mesh")
    if eta_space.order != u_space.order:
        raise ValueError("elevation and velocity spaces must share the order")
    return SystemState(
        eta=l2_project(eta_space, eta0), u=l2_project(u_space, u0), t=t
    )


def semidiscrete_rhs(
    system: SystemKind,
    eta_space: FemSpace,
    u_space: FemSpace,
    eta_coeffs: np.ndarray,
    u_coeffs: np.ndarray,
    t: float,
    forcing: Optional[ManufacturedSolution] = None,
):
    """Coefficient time derivatives of the Galerkin semidiscretization."""
    r = eta_space.order
    te = eta_space.tables(r + 1)
    tu = u_space.tables(r + 1)
    ev = te.value(eta_coeffs)
    ed = te.deriv(eta_coeffs)
    uv = tu.value(u_coeffs)
    ud = tu.deriv(u_coeffs)
    eps = system.epsilon
    pair_x = ed * uv + ev * ud  # (eta*u)_x at the quadrature nodes
    if system.family is SystemFamily.SW:
        g1 = -(ud + eps * pair_x)
        g2 = -(ed + eps * uv * ud)
    else:
        g1 = -(ud + 0.5 * eps * pair_x)
        g2 = -(ed + 0.5 * eps * ev * ed + 1.5 * eps * uv * ud)
    b1 = te.load(g1)
    b2 = tu.load(g2)
    if forcing is not None:
        fe = eta_space.tables(r + 2)
        fu = u_space.tables(r + 2)
        # the spaces share the mesh, so fe.x and fu.x hold the same grid
        f1, f2 = forcing_values(system, forcing, fe.x, t)
        b1 = b1 + fe.load(f1)
        b2 = b2 + fu.load(f2)
    return eta_space.gram.solve(b1), u_space.gram.solve(b2)


def rhs(
    system: SystemKind, state: SystemState, forcing: Optional[ManufacturedSolution] = None
):
    """Time-derivative coefficient pair for the current state."""
    return semidiscrete_rhs(
        system,
        state.eta.space,
        state.u.space,
        state.eta.coeffs,
        state.u.coeffs,
        state.t,
        forcing,
    )


def energy(state: SystemState) -> float:
    """Squared L2 norm of the state, elevation plus velocity."""
    return state.eta.space.gram.quadratic_form(
        state.eta.coeffs
    ) + state.u.space.gram.quadratic_form(state.u.coeffs)
