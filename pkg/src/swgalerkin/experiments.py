"""Experiment drivers: convergence sweeps, the explicit-scheme stability
probe, the small-amplitude system comparison, and the energy audit.

Sweeps over refinements or amplitude parameters run their entries through a
thread pool (numpy and LAPACK release the GIL in the kernels that dominate);
the SWG_THREADS environment variable caps the worker count.  Reports are
plain data and serialize through ``swgalerkin.cli.emit_csv``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .integrators import (
    CLASSICAL_RK4,
    IMPROVED_EULER,
    SHU_OSHER3,
    Blowup,
    Scheme,
    StepRule,
    advance,
    integrate,
)
from .mesh import Mesh, MeshFamily, build_mesh
from .projection import FemFunction
from .spaces import Boundary, FemSpace, SpaceSpec, build_space
from .systems import (
    ManufacturedSolution,
    SystemFamily,
    SystemKind,
    SystemState,
    energy,
    initial_state,
    preset,
    semidiscrete_rhs,
)

__all__ = [
    "ComponentErrors",
    "error_norms",
    "observed_order",
    "ConvergenceConfig",
    "ConvergenceRow",
    "ConvergenceReport",
    "run_convergence",
    "StabilityReport",
    "run_stability_probe",
    "EpsReport",
    "run_eps_comparison",
    "EnergyReport",
    "run_energy_check",
    "Table",
]

_ERROR_Q = 8  # Gauss points per cell for error integrals
_LINF_SAMPLES = 20  # equispaced samples per cell (nodes added on top)

OVERFLOW = "overflow"


def _worker_count(n_items: int) -> int:
    env = os.environ.get("SWG_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, n_items))


def _parallel_map(fn: Callable, items: Sequence) -> list:
    workers = _worker_count(len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# error norms


@dataclass(frozen=True)
class ComponentErrors:
    l2: float
    linf: float
    h1: float
    h1_semi: float


def _component_errors(fem: FemFunction, f: Callable, fx: Callable, t: float) -> ComponentErrors:
    space = fem.space
    tab = space.tables(_ERROR_Q)
    e = tab.value(fem.coeffs) - f(tab.x, t)
    ed = tab.deriv(fem.coeffs) - fx(tab.x, t)
    l2_sq = tab.integrate(e * e)
    semi_sq = tab.integrate(ed * ed)
    samp = space.sampling_tables(_LINF_SAMPLES)
    linf = float(np.abs(samp.value(fem.coeffs) - f(samp.x, t)).max())
    return ComponentErrors(
        l2=math.sqrt(max(l2_sq, 0.0)),
        linf=linf,
        h1=math.sqrt(max(l2_sq + semi_sq, 0.0)),
        h1_semi=math.sqrt(max(semi_sq, 0.0)),
    )


def error_norms(state: SystemState, exact: ManufacturedSolution) -> dict[str, ComponentErrors]:
    """L2, Linf, and H1 errors of both components against the exact solution."""
    return {
        "eta": _component_errors(state.eta, exact.eta, exact.eta_x, state.t),
        "u": _component_errors(state.u, exact.u, exact.u_x, state.t),
    }


def observed_order(e1: float, e2: float, n1: float, n2: float) -> Optional[float]:
    """log(e1/e2) / log(n2/n1); None when either error is not positive."""
    if e1 is None or e2 is None or e1 <= 0 or e2 <= 0:
        return None
    return math.log(e1 / e2) / math.log(n2 / n1)


# ---------------------------------------------------------------------------
# reports are emitted through a small generic table


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    metadata: dict[str, str] = field(default_factory=dict)


def make_spaces(mesh: Mesh, order: int, periodic: bool) -> tuple[FemSpace, FemSpace]:
    """Elevation and velocity spaces for a run; periodic runs share one space."""
    if periodic:
        space = build_space(mesh, SpaceSpec(order, order - 2, Boundary.PERIODIC))
        return space, space
    eta_space = build_space(mesh, SpaceSpec(order, order - 2, Boundary.FREE))
    u_space = build_space(mesh, SpaceSpec(order, order - 2, Boundary.ZERO_ENDPOINTS))
    return eta_space, u_space


# ---------------------------------------------------------------------------
# convergence sweeps


@dataclass(frozen=True)
class ConvergenceConfig:
    system: SystemKind
    scheme: Scheme
    mesh_family: MeshFamily
    order: int
    n_values: tuple[int, ...]
    step_rule: StepRule
    final_time: float
    preset: str
    periodic: bool = False


@dataclass
class ConvergenceRow:
    n: int
    errors: Optional[dict[str, ComponentErrors]]
    blowup_time: Optional[float] = None


@dataclass
class ConvergenceReport:
    config: ConvergenceConfig
    rows: list[ConvergenceRow]

    def orders(self, component: str, norm: str) -> list[Optional[float]]:
        """Pairwise observed orders down the sweep; None for first/blowup rows."""
        out: list[Optional[float]] = [None]
        for prev, cur in zip(self.rows, self.rows[1:]):
            if prev.errors is None or cur.errors is None:
                out.append(None)
                continue
            e1 = getattr(prev.errors[component], norm)
            e2 = getattr(cur.errors[component], norm)
            out.append(observed_order(e1, e2, prev.n, cur.n))
        return out

    def as_table(self) -> Table:
        cols = ["N"]
        for norm, tag in (("l2", "L2"), ("linf", "Linf"), ("h1", "H1")):
            for comp in ("eta", "u"):
                cols.append(f"{comp}_{tag}")
                cols.append(f"{comp}_{tag}_order")
        order_cache = {
            (c, n): self.orders(c, n) for c in ("eta", "u") for n in ("l2", "linf", "h1")
        }
        rows = []
        for i, row in enumerate(self.rows):
            out: list = [row.n]
            for norm in ("l2", "linf", "h1"):
                for comp in ("eta", "u"):
                    if row.errors is None:
                        out.extend([OVERFLOW, None])
                    else:
                        out.append(getattr(row.errors[comp], norm))
                        out.append(order_cache[(comp, norm)][i])
            rows.append(out)
        return Table(columns=cols, rows=rows, metadata={})


def _convergence_row(config: ConvergenceConfig, n: int) -> ConvergenceRow:
    mesh = build_mesh(config.mesh_family, n)
    ms = preset(config.preset)
    eta_space, u_space = make_spaces(mesh, config.order, config.periodic)
    state0 = initial_state(
        eta_space, u_space, lambda x: ms.eta(x, 0.0), lambda x: ms.u(x, 0.0)
    )
    result = integrate(
        config.scheme, config.system, state0, config.step_rule, config.final_time, ms
    )
    if isinstance(result, Blowup):
        return ConvergenceRow(n=n, errors=None, blowup_time=result.time)
    return ConvergenceRow(n=n, errors=error_norms(result, ms))


def run_convergence(config: ConvergenceConfig) -> ConvergenceReport:
    """Sweep the refinement list; divergence marks the row instead of aborting."""
    rows = _parallel_map(lambda n: _convergence_row(config, n), list(config.n_values))
    return ConvergenceReport(config=config, rows=rows)


# ---------------------------------------------------------------------------
# stability probe


@dataclass
class StabilityRule:
    rule: StepRule
    k: float
    checkpoint_errors: list[Optional[float]]  # eta L2 error, None once diverged
    checkpoint_times: list[Optional[float]]  # actual step times sampled
    blowup_time: Optional[float]


@dataclass
class StabilityReport:
    system: SystemKind
    n: int
    preset: str
    checkpoints: list[float]
    results: list[StabilityRule]

    def as_table(self) -> Table:
        cols = ["t"] + [str(r.rule) for r in self.results]
        rows = []
        for i, t in enumerate(self.checkpoints):
            row: list = [t]
            for res in self.results:
                err = res.checkpoint_errors[i]
                row.append(OVERFLOW if err is None else err)
            rows.append(row)
        return Table(columns=cols, rows=rows, metadata={})


_DEFAULT_CHECKPOINTS = (0.05, 0.1, 0.3, 0.35, 0.5, 0.59, 0.7, 0.8, 0.9, 1.0)


def _probe_rule(
    system: SystemKind,
    mesh: Mesh,
    rule: StepRule,
    final_time: float,
    ms: ManufacturedSolution,
    checkpoints: Sequence[float],
) -> StabilityRule:
    eta_space, u_space = make_spaces(mesh, 2, periodic=False)
    state0 = initial_state(
        eta_space, u_space, lambda x: ms.eta(x, 0.0), lambda x: ms.u(x, 0.0)
    )
    k = rule.step_size(mesh.reference_spacing)
    n_steps = max(1, math.ceil(final_time / k - 1e-9))
    # steps nearest each checkpoint; the final (shortened) step lands on T
    targets = {}
    for i, t_star in enumerate(checkpoints):
        n_star = min(n_steps, max(1, round(t_star / k)))
        targets.setdefault(n_star, []).append(i)
    errors: list[Optional[float]] = [None] * len(checkpoints)
    times: list[Optional[float]] = [None] * len(checkpoints)

    def observer(n, t, state):
        if n in targets:
            err = error_norms(state, ms)["eta"].l2
            for i in targets[n]:
                errors[i] = err
                times[i] = t

    result = integrate(IMPROVED_EULER, system, state0, rule, final_time, ms, observer)
    blowup = result.time if isinstance(result, Blowup) else None
    return StabilityRule(
        rule=rule,
        k=k,
        checkpoint_errors=errors,
        checkpoint_times=times,
        blowup_time=blowup,
    )


def run_stability_probe(
    system: SystemKind,
    n: int,
    step_rules: Sequence[StepRule],
    final_time: float = 1.0,
    preset_name: str = "trig-b",
    checkpoints: Sequence[float] = _DEFAULT_CHECKPOINTS,
) -> StabilityReport:
    """Improved-Euler trajectories under each step rule, blowup times included."""
    mesh = build_mesh(MeshFamily.UNIFORM, n)
    ms = preset(preset_name)
    results = _parallel_map(
        lambda rule: _probe_rule(system, mesh, rule, final_time, ms, checkpoints),
        list(step_rules),
    )
    return StabilityReport(
        system=system,
        n=n,
        preset=preset_name,
        checkpoints=list(checkpoints),
        results=results,
    )


# ---------------------------------------------------------------------------
# small-amplitude comparison of the two systems


@dataclass
class EpsRow:
    epsilon: float
    t: float
    l2: Optional[float]  # None once the epsilon run diverged
    h1: Optional[float]


@dataclass
class EpsReport:
    epsilons: list[float]
    checkpoints: list[float]
    h: float
    k: float
    rows: list[EpsRow]
    blowups: dict[float, float]  # epsilon -> blowup time

    def value(self, epsilon: float, t: float, norm: str) -> Optional[float]:
        for row in self.rows:
            if row.epsilon == epsilon and row.t == t:
                return getattr(row, norm)
        return None

    def orders(self, norm: str) -> dict[tuple[float, float], Optional[float]]:
        """Order in epsilon at each checkpoint, between consecutive epsilons."""
        out = {}
        for t in self.checkpoints:
            for e_prev, e_cur in zip(self.epsilons, self.epsilons[1:]):
                d1 = self.value(e_prev, t, norm)
                d2 = self.value(e_cur, t, norm)
                if d1 is None or d2 is None or d1 <= 0 or d2 <= 0 or e_prev == e_cur:
                    out[(e_cur, t)] = None
                else:
                    out[(e_cur, t)] = math.log(d1 / d2) / math.log(e_prev / e_cur)
        return out

    def as_table(self) -> Table:
        cols = ["eps", "t", "L2_diff", "L2_order", "H1_diff", "H1_order"]
        l2o = self.orders("l2")
        h1o = self.orders("h1")
        rows = []
        for row in self.rows:
            key = (row.epsilon, row.t)
            rows.append(
                [
                    row.epsilon,
                    row.t,
                    OVERFLOW if row.l2 is None else row.l2,
                    l2o.get(key),
                    OVERFLOW if row.h1 is None else row.h1,
                    h1o.get(key),
                ]
            )
        return Table(columns=cols, rows=rows, metadata={})


def _transformed_differences(
    sw_state: tuple, ssw_state: tuple, eta_space: FemSpace, u_space: FemSpace, eps: float
) -> tuple[float, float]:
    """L2 and H1 norms of (eta - eta_s, u - u_s*(1 - eps/2*eta_s))."""
    te = eta_space.tables(_ERROR_Q)
    tu = u_space.tables(_ERROR_Q)
    c_eta, c_u = sw_state
    c_eta_s, c_u_s = ssw_state
    de = te.value(c_eta) - te.value(c_eta_s)
    ded = te.deriv(c_eta) - te.deriv(c_eta_s)
    es = te.value(c_eta_s)
    esd = te.deriv(c_eta_s)
    us = tu.value(c_u_s)
    usd = tu.deriv(c_u_s)
    fac = 1.0 - 0.5 * eps * es
    du = tu.value(c_u) - us * fac
    dud = tu.deriv(c_u) - usd * fac + us * (0.5 * eps * esd)
    e_l2 = math.sqrt(max(te.integrate(de * de), 0.0))
    e_h1 = math.sqrt(max(te.integrate(de * de) + te.integrate(ded * ded), 0.0))
    u_l2 = math.sqrt(max(tu.integrate(du * du), 0.0))
    u_h1 = math.sqrt(max(tu.integrate(du * du) + tu.integrate(dud * dud), 0.0))
    return e_l2 + u_l2, e_h1 + u_h1


def _eps_run(
    eps: float,
    eta_space: FemSpace,
    u_space: FemSpace,
    k: float,
    checkpoints: Sequence[float],
) -> tuple[list[EpsRow], Optional[float]]:
    sw = SystemKind(SystemFamily.SW, eps)
    ssw = SystemKind(SystemFamily.SSW, eps)
    eta0 = lambda x: np.ones_like(x)
    u0 = lambda x: x * (x - 1.0)
    u0s = lambda x: x * (x - 1.0) * (1.0 + 0.5 * eps)  # eta0 is identically 1
    st_sw = initial_state(eta_space, u_space, eta0, u0)
    st_ssw = initial_state(eta_space, u_space, eta0, u0s)
    y_sw = (st_sw.eta.coeffs, st_sw.u.coeffs)
    y_ssw = (st_ssw.eta.coeffs, st_ssw.u.coeffs)

    def f_sw(t, y):
        return semidiscrete_rhs(sw, eta_space, u_space, y[0], y[1], t)

    def f_ssw(t, y):
        return semidiscrete_rhs(ssw, eta_space, u_space, y[0], y[1], t)

    final_time = max(checkpoints)
    n_steps = max(1, math.ceil(final_time / k - 1e-9))
    targets = {}
    for t_star in checkpoints:
        targets.setdefault(min(n_steps, max(1, round(t_star / k))), []).append(t_star)

    rows: list[EpsRow] = []
    blowup_time = None
    reached: dict[float, tuple[float, float]] = {}
    for n in range(1, n_steps + 1):
        t = n * k if n < n_steps else final_time
        kn = k if n < n_steps else final_time - (n - 1) * k
        with np.errstate(over="ignore", invalid="ignore"):
            y_sw = advance(f_sw, (n - 1) * k, y_sw, kn, SHU_OSHER3)
            y_ssw = advance(f_ssw, (n - 1) * k, y_ssw, kn, SHU_OSHER3)
        finite = all(np.isfinite(c).all() for c in (*y_sw, *y_ssw))
        if not finite:
            blowup_time = t
            break
        if n in targets:
            d_l2, d_h1 = _transformed_differences(y_sw, y_ssw, eta_space, u_space, eps)
            for t_star in targets[n]:
                reached[t_star] = (d_l2, d_h1)
    for t_star in checkpoints:
        if t_star in reached:
            d_l2, d_h1 = reached[t_star]
            rows.append(EpsRow(epsilon=eps, t=t_star, l2=d_l2, h1=d_h1))
        else:
            rows.append(EpsRow(epsilon=eps, t=t_star, l2=None, h1=None))
    return rows, blowup_time


def run_eps_comparison(
    epsilons: Sequence[float],
    h: float,
    k: float,
    checkpoints: Sequence[float],
) -> EpsReport:
    """Run the scaled systems side by side from transform-related data.

    Cubic splines on the uniform mesh with the given width, third-order
    two-register stepping with the given k; the reported quantities are the
    norms of the transformed differences at each checkpoint, with orders in
    epsilon alongside.
    """
    n = round(1.0 / h)
    mesh = build_mesh(MeshFamily.UNIFORM, n)
    eta_space, u_space = make_spaces(mesh, 4, periodic=False)
    eps_list = sorted(epsilons, reverse=True)
    results = _parallel_map(
        lambda eps: _eps_run(eps, eta_space, u_space, k, checkpoints), eps_list
    )
    rows: list[EpsRow] = []
    blowups: dict[float, float] = {}
    for eps, (eps_rows, blow) in zip(eps_list, results):
        rows.extend(eps_rows)
        if blow is not None:
            blowups[eps] = blow
    return EpsReport(
        epsilons=eps_list,
        checkpoints=list(checkpoints),
        h=h,
        k=k,
        rows=rows,
        blowups=blowups,
    )


# ---------------------------------------------------------------------------
# energy audit


@dataclass
class EnergyReport:
    identity_max_rel: float
    drift_rel: float
    n: int
    n_states: int

    def as_table(self) -> Table:
        return Table(
            columns=["quantity", "value"],
            rows=[
                ["identity_max_rel", self.identity_max_rel],
                ["drift_rel", self.drift_rel],
            ],
            metadata={},
        )


def run_energy_check(
    n: int = 64, n_states: int = 100, final_time: float = 1.0, seed: int = 2024
) -> EnergyReport:
    """Audit the symmetric system's quadratic invariant.

    First the semidiscrete identity: for random states the inner product of
    the time derivative with the state (both components, Gram-weighted) must
    vanish; the relative residual against the sizes of the two terms is
    reported.  Second the time-stepped drift: a homogeneous run with the
    classical fourth-order scheme at k = h/20 must conserve the energy to
    within integrator dissipation.
    """
    mesh = build_mesh(MeshFamily.UNIFORM, n)
    eta_space, u_space = make_spaces(mesh, 2, periodic=False)
    ssw = SystemKind(SystemFamily.SSW)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_states):
        ce = rng.uniform(-1.0, 1.0, eta_space.dim)
        cu = rng.uniform(-1.0, 1.0, u_space.dim)
        de, du = semidiscrete_rhs(ssw, eta_space, u_space, ce, cu, 0.0)
        t1 = float(eta_space.gram.matvec(de) @ ce)
        t2 = float(u_space.gram.matvec(du) @ cu)
        rel = abs(t1 + t2) / max(abs(t1) + abs(t2), 1e-30)
        worst = max(worst, rel)

    state0 = initial_state(
        eta_space,
        u_space,
        lambda x: 0.1 * np.cos(np.pi * x),
        lambda x: 0.1 * np.sin(np.pi * x),
    )
    e0 = energy(state0)
    result = integrate(
        CLASSICAL_RK4, ssw, state0, StepRule(1.0 / 20.0), final_time
    )
    if isinstance(result, Blowup):
        drift = float("inf")
    else:
        drift = abs(energy(result) - e0) / e0
    return EnergyReport(
        identity_max_rel=worst, drift_rel=drift, n=n, n_states=n_states
    )
