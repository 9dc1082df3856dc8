"""Explicit Runge-Kutta time stepping for the semidiscrete systems.

Four schemes: forward Euler, the improved Euler (explicit midpoint) method,
a three-stage third-order scheme in its two-register form

    y1   = y + k f(t, y)
    y2   = y + (k/4) f(t, y) + (k/4) f(t + k, y1)
    y^+  = y + (k/6) f(t, y) + (k/6) f(t + k, y1) + (2k/3) f(t + k/2, y2)

whose absolute stability interval on the imaginary axis is [-sqrt(3),
sqrt(3)], and the classical four-stage fourth-order method.

Divergence is an observation, not a failure: ``integrate`` returns a
``Blowup`` value carrying the first step time at which a coefficient went
non-finite or the energy passed 1e10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .projection import FemFunction
from .systems import ManufacturedSolution, SystemKind, SystemState, energy, semidiscrete_rhs

__all__ = [
    "Scheme",
    "SCHEMES",
    "EULER",
    "IMPROVED_EULER",
    "SHU_OSHER3",
    "CLASSICAL_RK4",
    "StepRule",
    "Blowup",
    "BlowupError",
    "advance",
    "step",
    "integrate",
]

_ENERGY_CAP = 1e10


@dataclass(frozen=True)
class Scheme:
    tag: str
    stages: int
    order: int


EULER = Scheme("euler", 1, 1)
IMPROVED_EULER = Scheme("improved_euler", 2, 2)
SHU_OSHER3 = Scheme("shu_osher3", 3, 3)
CLASSICAL_RK4 = Scheme("rk4", 4, 4)

SCHEMES = {s.tag: s for s in (EULER, IMPROVED_EULER, SHU_OSHER3, CLASSICAL_RK4)}

_ALLOWED_POWERS = (1.0, 4.0 / 3.0, 2.0)


@dataclass(frozen=True)
class StepRule:
    """Time step k = coefficient * spacing**power."""

    coefficient: float
    power: float = 1.0
    label: Optional[str] = None

    def __post_init__(self):
        if self.coefficient <= 0:
            raise ValueError("step rule coefficient must be positive")
        if not any(abs(self.power - p) < 1e-12 for p in _ALLOWED_POWERS):
            raise ValueError(f"step rule power must be 1, 4/3, or 2, got {self.power}")

    def step_size(self, spacing: float) -> float:
        return self.coefficient * spacing**self.power

    def __str__(self) -> str:
        if self.label is not None:
            return self.label
        base = "h" if self.power == 1.0 else f"h^{self.power:g}"
        return f"{base}*{self.coefficient:g}"

    @classmethod
    def fixed_ratio(cls, coefficient: float) -> "StepRule":
        return cls(coefficient, 1.0)

    @classmethod
    def power_ratio(cls, coefficient: float, power: float) -> "StepRule":
        return cls(coefficient, power)


@dataclass(frozen=True)
class Blowup:
    """Divergence observation: the first step time with a non-finite or
    energy-capped state."""

    time: float
    step: int


class BlowupError(RuntimeError):
    def __init__(self, time: float):
        super().__init__(f"solution blew up at t={time:g}")
        self.time = time


def _axpy(y, coeffs_and_stages, k):
    """y + k * sum(c_i * f_i) over tuples of arrays."""
    out = []
    for comp in range(len(y)):
        acc = y[comp].copy()
        for c, f in coeffs_and_stages:
            acc += (k * c) * f[comp]
        out.append(acc)
    return tuple(out)


def advance(rhs: Callable, t: float, y: tuple, k: float, scheme: Scheme) -> tuple:
    """One step of the scheme on a tuple-of-arrays state; rhs(t, y) -> tuple."""
    if scheme.tag == "euler":
        f0 = rhs(t, y)
        return _axpy(y, [(1.0, f0)], k)
    if scheme.tag == "improved_euler":
        f0 = rhs(t, y)
        y1 = _axpy(y, [(0.5, f0)], k)
        f1 = rhs(t + 0.5 * k, y1)
        return _axpy(y, [(1.0, f1)], k)
    if scheme.tag == "shu_osher3":
        f0 = rhs(t, y)
        y1 = _axpy(y, [(1.0, f0)], k)
        f1 = rhs(t + k, y1)
        y2 = _axpy(y, [(0.25, f0), (0.25, f1)], k)
        f2 = rhs(t + 0.5 * k, y2)
        return _axpy(y, [(1.0 / 6.0, f0), (1.0 / 6.0, f1), (2.0 / 3.0, f2)], k)
    if scheme.tag == "rk4":
        f0 = rhs(t, y)
        y1 = _axpy(y, [(0.5, f0)], k)
        f1 = rhs(t + 0.5 * k, y1)
        y2 = _axpy(y, [(0.5, f1)], k)
        f2 = rhs(t + 0.5 * k, y2)
        y3 = _axpy(y, [(1.0, f2)], k)
        f3 = rhs(t + k, y3)
        return _axpy(
            y,
            [(1.0 / 6.0, f0), (1.0 / 3.0, f1), (1.0 / 3.0, f2), (1.0 / 6.0, f3)],
            k,
        )
    raise ValueError(f"unknown scheme tag '{scheme.tag}'")


def _pde_rhs(system, eta_space, u_space, forcing):
    def f(t, y):
        return semidiscrete_rhs(system, eta_space, u_space, y[0], y[1], t, forcing)

    return f


def _finite(y: tuple) -> bool:
    return all(np.isfinite(comp[-1]) and np.isfinite(comp).all() for comp in y)


def step(
    scheme: Scheme,
    system: SystemKind,
    state: SystemState,
    k: float,
    forcing: Optional[ManufacturedSolution] = None,
) -> SystemState:
    """Advance one step of size k; raises BlowupError on a non-finite result."""
    if k <= 0:
        raise ValueError("step size must be positive")
    eta_space, u_space = state.eta.space, state.u.space
    f = _pde_rhs(system, eta_space, u_space, forcing)
    y = advance(f, state.t, (state.eta.coeffs, state.u.coeffs), k, scheme)
    if not _finite(y):
        raise BlowupError(state.t + k)
    return SystemState(
        eta=FemFunction(eta_space, y[0]),
        u=FemFunction(u_space, y[1]),
        t=state.t + k,
    )


def integrate(
    scheme: Scheme,
    system: SystemKind,
    state0: SystemState,
    step_rule: StepRule,
    final_time: float,
    forcing: Optional[ManufacturedSolution] = None,
    observer: Optional[Callable] = None,
) -> Union[SystemState, Blowup]:
    """March from state0 to the final time with a fixed step.

    The step comes from the rule applied to the mesh's reference spacing; the
    last step is shortened to land exactly on the final time.  The observer,
    when given, receives (step index, t, state) after the initial state and
    after every step.  Divergence returns a Blowup value instead of a state.
    """
    if final_time <= 0:
        raise ValueError("final time must be positive")
    eta_space, u_space = state0.eta.space, state0.u.space
    k = step_rule.step_size(eta_space.mesh.reference_spacing)
    n_steps = max(1, math.ceil(final_time / k - 1e-9))
    f = _pde_rhs(system, eta_space, u_space, forcing)
    y = (state0.eta.coeffs, state0.u.coeffs)
    if observer is not None:
        observer(0, 0.0, state0)
    t = 0.0
    for n in range(n_steps):
        kn = k if n < n_steps - 1 else final_time - t
        with np.errstate(over="ignore", invalid="ignore"):
            y = advance(f, t, y, kn, scheme)
        t = final_time if n == n_steps - 1 else (n + 1) * k
        state = SystemState(
            eta=FemFunction(eta_space, y[0]), u=FemFunction(u_space, y[1]), t=t
        )
        if not _finite(y) or energy(state) > _ENERGY_CAP:
            return Blowup(time=t, step=n + 1)
        if observer is not None:
            observer(n + 1, t, state)
    return state
