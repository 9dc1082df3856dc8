"""Command-line front end: flat key=value configuration and CSV reports.

Five subcommands: converge, superacc, stability, compare-eps, energy-check.
Every key is validated against the subcommand's schema before any compute;
flags override values read from an optional config file (one key=value per
line, '#' comments allowed).  Reports serialize as CSV with a single leading
'#' metadata comment that round-trips back into the run configuration.
Divergence during a stability run is a successful observation and exits 0;
only configuration errors or numerical infrastructure failures exit nonzero.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .experiments import (
    ConvergenceConfig,
    Table,
    run_convergence,
    run_energy_check,
    run_eps_comparison,
    run_stability_probe,
)
from .integrators import SCHEMES, StepRule
from .mesh import MeshFamily, validate_cell_count
from .superacc import run_suite
from .systems import PRESETS, SystemFamily, SystemKind

__all__ = ["RunConfig", "ConfigError", "parse_config", "parse_comment", "emit_csv", "main"]


class ConfigError(ValueError):
    """A configuration problem; the message names the offending key."""


@dataclass
class RunConfig:
    subcommand: str
    params: dict[str, str]
    output: Optional[str] = None
    plot: bool = False

    def __eq__(self, other):
        return (
            isinstance(other, RunConfig)
            and self.subcommand == other.subcommand
            and self.params == other.params
        )


def parse_step_rule(text: str) -> StepRule:
    """Parse 'h/10', 'h^4/3/10', 'h^2/5' into a step rule."""
    m = re.fullmatch(r"h(?:\^(\d+)(?:/(\d+))?)?/(\d+(?:\.\d+)?)", text.strip())
    if m is None:
        raise ValueError(f"cannot parse step rule '{text}' (examples: h/10, h^4/3/10)")
    num, den, divisor = m.groups()
    power = 1.0 if num is None else float(Fraction(int(num), int(den or 1)))
    return StepRule(coefficient=1.0 / float(divisor), power=power, label=text.strip())


_SPACE_ORDERS = {"linear": 2, "quadratic": 3, "cubic": 4}

# Scale presets for the amplitude comparison.  The time step respects the
# explicit-scheme stability bound of the cubic pair (measured spectral radius
# 3.5672/h on the imaginary axis versus the scheme's interval sqrt(3)), which
# caps k below 0.4856*h for unit wave speed.
_EPS_PRESETS = {
    # name: (h, k, checkpoint times)
    "smallamp-ci": ("1e-2", "4e-3", "25,50"),
    "smallamp-full": ("5e-3", "2e-3", "50,100,200,300"),
}


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok]


def _parse_ints(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


# key -> (default or None if required, help text)
_SCHEMAS: dict[str, dict[str, tuple[Optional[str], str]]] = {
    "converge": {
        "system": ("sw", "system: sw or ssw"),
        "space": ("linear", "space: linear, quadratic (periodic only), or cubic"),
        "mesh": ("uniform", "mesh family: " + ", ".join(f.value for f in MeshFamily)),
        "bc": ("dirichlet", "boundary conditions: dirichlet or periodic"),
        "n": (None, "comma-separated cell counts, e.g. 40,80,160"),
        "scheme": ("rk4", "time scheme: " + ", ".join(SCHEMES)),
        "krule": ("h/10", "time step rule, e.g. h/10 or h^4/3/10"),
        "t": ("1", "final time"),
        "preset": ("trig-a", "manufactured solution: " + ", ".join(sorted(PRESETS))),
        "eps": ("1", "nonlinearity amplitude in (0, 1]"),
    },
    "superacc": {
        "n": ("16,32,64,128", "comma-separated cell counts"),
    },
    "stability": {
        "system": ("sw", "system: sw or ssw"),
        "n": ("400", "cell count (single integer)"),
        "krule": ("h/10,h^4/3/10", "comma-separated step rules"),
        "t": ("1", "final time"),
        "preset": ("trig-b", "manufactured solution"),
        "checkpoints": (
            "0.05,0.1,0.3,0.35,0.5,0.59,0.7,0.8,0.9,1.0",
            "comma-separated report times",
        ),
    },
    "compare-eps": {
        "eps": ("1e-3,1e-4,1e-5", "comma-separated amplitude parameters"),
        "preset": ("smallamp-ci", "scale preset: " + ", ".join(_EPS_PRESETS)),
        "h": (None, "mesh width (defaults from preset)"),
        "k": (None, "time step (defaults from preset)"),
        "checkpoints": (None, "comma-separated report times (defaults from preset)"),
    },
    "energy-check": {
        "n": ("64", "cell count"),
        "states": ("100", "number of random states for the identity check"),
        "t": ("1", "final time of the drift run"),
        "seed": ("2024", "random seed"),
    },
}

_COMMANDS = tuple(_SCHEMAS)


def _usage() -> str:
    lines = ["usage: swgalerkin <subcommand> [--key value ...] [-o PATH] [--plot]", ""]
    lines.append("subcommands and keys (defaults in brackets):")
    for cmd, schema in _SCHEMAS.items():
        lines.append(f"  {cmd}")
        for key, (default, help_text) in schema.items():
            tag = f"[{default}]" if default is not None else "(required)"
            lines.append(f"    --{key:<12} {help_text} {tag}")
    lines.append("")
    lines.append("common flags:")
    lines.append("    --config PATH  read key=value lines; explicit flags override")
    lines.append("    -o, --output PATH  CSV destination ('-' for stdout) [-]")
    lines.append("    --plot         also render a figure next to the CSV output")
    return "\n".join(lines)


def _read_config_file(path: str, schema: dict, cmd: str) -> dict[str, str]:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line '{line}' is not key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in schema:
            raise ConfigError(f"unknown key '{key}' for subcommand '{cmd}'")
        out[key] = value
    return out


def parse_config(argv: Sequence[str]) -> RunConfig:
    """Parse command-line tokens (and an optional config file) to a RunConfig."""
    argv = list(argv)
    if not argv or argv[0] in ("-h", "--help"):
        raise ConfigError(_usage())
    cmd = argv[0]
    if cmd not in _SCHEMAS:
        raise ConfigError(
            f"unknown subcommand '{cmd}'; expected one of: {', '.join(_COMMANDS)}"
        )
    schema = _SCHEMAS[cmd]

    flags: dict[str, str] = {}
    output: Optional[str] = None
    plot = False
    config_path: Optional[str] = None
    i = 1
    while i < len(argv):
        tok = argv[i]
        if tok in ("-h", "--help"):
            raise ConfigError(_usage())
        if tok == "--plot":
            plot = True
            i += 1
            continue
        if tok in ("-o", "--output"):
            if i + 1 >= len(argv):
                raise ConfigError("missing value for --output")
            output = argv[i + 1]
            i += 2
            continue
        if tok == "--config":
            if i + 1 >= len(argv):
                raise ConfigError("missing value for --config")
            config_path = argv[i + 1]
            i += 2
            continue
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected token '{tok}'")
        key = tok[2:]
        if key not in schema:
            raise ConfigError(f"unknown key '{key}' for subcommand '{cmd}'")
        if i + 1 >= len(argv):
            raise ConfigError(f"missing value for key '{key}'")
        flags[key] = argv[i + 1]
        i += 2

    params = {k: d for k, (d, _) in schema.items() if d is not None}
    if config_path is not None:
        params.update(_read_config_file(config_path, schema, cmd))
    params.update(flags)

    missing = [k for k, (d, _) in schema.items() if d is None and k not in params]
    if cmd == "compare-eps":
        missing = []  # the scale preset fills h/k/checkpoints
    if missing:
        raise ConfigError(f"missing required key '{missing[0]}' for '{cmd}'")

    config = RunConfig(subcommand=cmd, params=params, output=output, plot=plot)
    _validate(config)
    return config


def _get_system(params: dict[str, str], key: str = "system") -> SystemKind:
    name = params[key]
    try:
        family = SystemFamily(name)
    except ValueError:
        raise ConfigError(f"key 'system' must be sw or ssw, got '{name}'") from None
    eps = float(params.get("eps", "1"))
    return SystemKind(family, eps)


def _validate(config: RunConfig) -> None:
    """Semantic validation before any compute; errors name the bad key."""
    p = config.params
    cmd = config.subcommand
    try:
        if cmd == "converge":
            _get_system(p)
            if p["space"] not in _SPACE_ORDERS:
                raise ConfigError(f"key 'space' must be one of {list(_SPACE_ORDERS)}")
            family = MeshFamily(p["mesh"])
            if p["bc"] not in ("dirichlet", "periodic"):
                raise ConfigError("key 'bc' must be dirichlet or periodic")
            if p["bc"] == "dirichlet" and p["space"] == "quadratic":
                raise ConfigError("key 'space': quadratic is periodic-only")
            if (
                p["bc"] == "periodic"
                and p["space"] == "cubic"
                and family is not MeshFamily.UNIFORM
            ):
                raise ConfigError("key 'mesh': periodic cubic splines need uniform")
            if p["scheme"] not in SCHEMES:
                raise ConfigError(f"key 'scheme' must be one of {list(SCHEMES)}")
            if p["preset"] not in PRESETS:
                raise ConfigError(f"key 'preset' must be one of {sorted(PRESETS)}")
            parse_step_rule(p["krule"])
            for n in _parse_ints(p["n"]):
                validate_cell_count(family, n)
            float(p["t"])
        elif cmd == "superacc":
            for n in _parse_ints(p["n"]):
                validate_cell_count(MeshFamily.UNIFORM, n)
        elif cmd == "stability":
            _get_system(p)
            validate_cell_count(MeshFamily.UNIFORM, int(p["n"]))
            if p["preset"] not in PRESETS:
                raise ConfigError(f"key 'preset' must be one of {sorted(PRESETS)}")
            for rule in p["krule"].split(","):
                parse_step_rule(rule)
            float(p["t"])
            _parse_floats(p["checkpoints"])
        elif cmd == "compare-eps":
            if p["preset"] not in _EPS_PRESETS:
                raise ConfigError(f"key 'preset' must be one of {list(_EPS_PRESETS)}")
            defaults = _EPS_PRESETS[p["preset"]]
            p.setdefault("h", defaults[0])
            p.setdefault("k", defaults[1])
            p.setdefault("checkpoints", defaults[2])
            eps_list = _parse_floats(p["eps"])
            if not eps_list or any(not 0 < e <= 1 for e in eps_list):
                raise ConfigError("key 'eps' must list values in (0, 1]")
            float(p["h"]), float(p["k"])
            _parse_floats(p["checkpoints"])
        elif cmd == "energy-check":
            int(p["n"]), int(p["states"]), int(p["seed"])
            float(p["t"])
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# CSV emission


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.5e}"  # 6 significant digits
    return str(value)


def metadata_comment(config: RunConfig) -> str:
    parts = [config.subcommand] + [f"{k}={v}" for k, v in sorted(config.params.items())]
    return "# " + " ".join(parts)


def parse_comment(line: str) -> RunConfig:
    """Rebuild the run configuration from a CSV metadata comment."""
    body = line.lstrip("#").strip()
    tokens = body.split()
    if not tokens or tokens[0] not in _SCHEMAS:
        raise ConfigError(f"not a recognizable metadata comment: '{line}'")
    params = {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ConfigError(f"bad metadata token '{tok}'")
        key, value = tok.split("=", 1)
        params[key] = value
    return RunConfig(subcommand=tokens[0], params=params)


def render_csv(table: Table, config: RunConfig) -> str:
    lines = [metadata_comment(config)]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(_format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def emit_csv(table: Table, config: RunConfig, path: Optional[str] = None) -> str:
    """Write the report as CSV to the path ('-' or None for stdout)."""
    text = render_csv(table, config)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text


# ---------------------------------------------------------------------------
# dispatch


def _run(config: RunConfig):
    p = config.params
    cmd = config.subcommand
    if cmd == "converge":
        cc = ConvergenceConfig(
            system=_get_system(p),
            scheme=SCHEMES[p["scheme"]],
            mesh_family=MeshFamily(p["mesh"]),
            order=_SPACE_ORDERS[p["space"]],
            n_values=tuple(_parse_ints(p["n"])),
            step_rule=parse_step_rule(p["krule"]),
            final_time=float(p["t"]),
            preset=p["preset"],
            periodic=p["bc"] == "periodic",
        )
        return run_convergence(cc)
    if cmd == "superacc":
        return run_suite(_parse_ints(p["n"]))
    if cmd == "stability":
        return run_stability_probe(
            _get_system(p),
            int(p["n"]),
            [parse_step_rule(r) for r in p["krule"].split(",")],
            float(p["t"]),
            p["preset"],
            _parse_floats(p["checkpoints"]),
        )
    if cmd == "compare-eps":
        return run_eps_comparison(
            _parse_floats(p["eps"]),
            float(p["h"]),
            float(p["k"]),
            _parse_floats(p["checkpoints"]),
        )
    if cmd == "energy-check":
        return run_energy_check(
            n=int(p["n"]),
            n_states=int(p["states"]),
            final_time=float(p["t"]),
            seed=int(p["seed"]),
        )
    raise ConfigError(f"unknown subcommand '{cmd}'")


def _superacc_table(reports) -> Table:
    cols = ["diagnostic", "N", "h", "value", "ls_slope", "target"]
    rows = []
    for rep in reports:
        for i, (n, h, v) in enumerate(zip(rep.n_values, rep.h_values, rep.values)):
            last = i == len(rep.values) - 1
            rows.append(
                [rep.quantity, n, h, v, rep.slope if last else None, rep.target if last else None]
            )
    return Table(columns=cols, rows=rows, metadata={})


def report_table(report) -> Table:
    if isinstance(report, list):  # superaccuracy suite
        return _superacc_table(report)
    return report.as_table()


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] in ("-h", "--help"):
        print(_usage())
        return 0
    try:
        config = parse_config(argv)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    try:
        report = _run(config)
        table = report_table(report)
        emit_csv(table, config, config.output)
        if config.plot:
            from .figures import render_figure

            if config.output in (None, "-"):
                print("--plot requires --output pointing at a file", file=sys.stderr)
                return 2
            render_figure(report, str(Path(config.output).with_suffix(".png")))
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except Exception as exc:  # numerical-infrastructure failure
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
