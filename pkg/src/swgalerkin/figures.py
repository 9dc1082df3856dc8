"""Figure rendering for the CLI's --plot flag.

Each report kind gets one matplotlib figure written next to the CSV: log-log
error curves for convergence sweeps, error histories for the stability probe,
difference-versus-time curves for the amplitude comparison, and decay curves
for the projection diagnostics.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import ConvergenceReport, EnergyReport, EpsReport, StabilityReport

__all__ = ["render_figure"]


def _convergence_figure(report: ConvergenceReport, path: str) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ns = [row.n for row in report.rows if row.errors is not None]
    for comp, style in (("eta", "o-"), ("u", "s--")):
        for norm, color in (("l2", "C0"), ("linf", "C1"), ("h1", "C2")):
            vals = [
                getattr(row.errors[comp], norm)
                for row in report.rows
                if row.errors is not None
            ]
            if ns and all(v > 0 for v in vals):
                ax.loglog(ns, vals, style, color=color, label=f"{comp} {norm}")
    if ns:
        anchor = max(
            getattr(row.errors["eta"], "l2")
            for row in report.rows
            if row.errors is not None
        )
        ref = anchor * (np.asarray(ns, float) / ns[0]) ** (-report.config.order)
        ax.loglog(ns, ref, "k:", label=f"slope {report.config.order}")
    ax.set_xlabel("N")
    ax.set_ylabel("error")
    ax.legend(fontsize=7)
    ax.set_title(f"{report.config.system.family.value}, {report.config.preset}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _stability_figure(report: StabilityReport, path: str) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    for res in report.results:
        ts = [
            t
            for t, e in zip(report.checkpoints, res.checkpoint_errors)
            if e is not None
        ]
        es = [e for e in res.checkpoint_errors if e is not None]
        ax.semilogy(ts, es, "o-", label=str(res.rule))
        if res.blowup_time is not None:
            ax.axvline(res.blowup_time, color="r", linestyle=":", alpha=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("elevation L2 error")
    ax.legend()
    ax.set_title(f"{report.system.family.value}, N={report.n}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _eps_figure(report: EpsReport, path: str) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.6))
    for norm, ax in zip(("l2", "h1"), axes):
        for eps in report.epsilons:
            ts, vals = [], []
            for t in report.checkpoints:
                v = report.value(eps, t, norm)
                if v is not None:
                    ts.append(t)
                    vals.append(v)
            if ts:
                ax.semilogy(ts, vals, "o-", label=f"eps={eps:g}")
        ax.set_xlabel("t")
        ax.set_ylabel(f"{norm.upper()} difference")
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _superacc_figure(reports: list, path: str) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    for rep in reports:
        ax.loglog(rep.h_values, rep.values, "o-", label=f"{rep.quantity} ({rep.slope:.2f})")
    ax.set_xlabel("h")
    ax.set_ylabel("diagnostic")
    ax.legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _energy_figure(report: EnergyReport, path: str) -> None:
    fig, ax = plt.subplots(figsize=(4.0, 3.2))
    ax.bar(
        ["identity", "drift"],
        [max(report.identity_max_rel, 1e-20), max(report.drift_rel, 1e-20)],
    )
    ax.set_yscale("log")
    ax.set_ylabel("relative residual")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_figure(report, path: str) -> None:
    if isinstance(report, ConvergenceReport):
        _convergence_figure(report, path)
    elif isinstance(report, StabilityReport):
        _stability_figure(report, path)
    elif isinstance(report, EpsReport):
        _eps_figure(report, path)
    elif isinstance(report, EnergyReport):
        _energy_figure(report, path)
    elif isinstance(report, list):
        _superacc_figure(report, path)
    else:
        raise TypeError(f"no figure renderer for {type(report).__name__}")
