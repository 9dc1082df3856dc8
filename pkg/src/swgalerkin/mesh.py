"""Partitions of [0, 1] used by the convergence and stability studies.

Five families are supported: the uniform mesh, an alternating quasiuniform
mesh whose cells repeat the width pattern (0.75, 0.5) times a base spacing,
a three-block piecewise uniform mesh, a mesh whose widths vary linearly
across the middle block, and a uniform mesh perturbed by second-order
jitter.  Nodes are stored as left-to-right cumulative sums with the last
node snapped to 1.0, so the widths sum to one bit-stably.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = ["MeshFamily", "Mesh", "build_mesh", "validate_cell_count"]


class MeshFamily(str, Enum):
    UNIFORM = "uniform"
    ALTERNATING = "alternating"
    PIECEWISE_UNIFORM = "piecewise_uniform"
    SLOWLY_VARYING = "slowly_varying"
    PERTURBED_UNIFORM = "perturbed_uniform"


_REQUIRED_FACTOR = {
    MeshFamily.UNIFORM: 1,
    MeshFamily.ALTERNATING: 2,
    MeshFamily.PIECEWISE_UNIFORM: 10,
    MeshFamily.SLOWLY_VARYING: 7,
    MeshFamily.PERTURBED_UNIFORM: 4,
}


def validate_cell_count(family: MeshFamily, n: int) -> None:
    """Reject cell counts the family cannot realize.

    Each non-uniform family needs ``n`` divisible by a fixed factor so its
    width pattern tiles [0, 1] exactly.
    """
    if n < 2:
        raise ValueError(f"need at least 2 cells, got {n}")
    factor = _REQUIRED_FACTOR[MeshFamily(family)]
    if n % factor != 0:
        raise ValueError(
            f"mesh family '{MeshFamily(family).value}' needs a cell count "
            f"divisible by {factor}, got {n}"
        )


@dataclass(frozen=True, eq=False)
class Mesh:
    """An ordered partition of [0, 1].

    Attributes:
        nodes: strictly increasing node positions, nodes[0] = 0, nodes[-1] = 1
        cells: per-cell widths, cells[i] = nodes[i+1] - nodes[i]
        family: the construction family tag
    """

    nodes: np.ndarray
    cells: np.ndarray
    family: MeshFamily

    @property
    def n_cells(self) -> int:
        return self.cells.size

    @property
    def h_max(self) -> float:
        return float(self.cells.max())

    @property
    def h_min(self) -> float:
        return float(self.cells.min())

    @property
    def reference_spacing(self) -> float:
        """Length the time-step rules scale against.

        The alternating family is parameterized by a base spacing 1.6/N (the
        widths are 0.75 and 0.5 times it); every other family uses the mean
        width 1/N.
        """
        if self.family is MeshFamily.ALTERNATING:
            return 1.6 / self.n_cells
        return 1.0 / self.n_cells

    def __repr__(self) -> str:  # keep reprs short; nodes can be long
        return f"Mesh({self.family.value}, n_cells={self.n_cells})"


def _widths(family: MeshFamily, n: int) -> np.ndarray:
    if family is MeshFamily.UNIFORM:
        return np.full(n, 1.0 / n)

    if family is MeshFamily.ALTERNATING:
        dx = 1.6 / n
        w = np.empty(n)
        w[0::2] = 0.75 * dx
        w[1::2] = 0.5 * dx
        return w

    if family is MeshFamily.PIECEWISE_UNIFORM:
        n1, n2, n3 = 3 * n // 10, 5 * n // 10, 2 * n // 10
        return np.concatenate(
            [
                np.full(n1, 1.0 / (4 * n1)),
                np.full(n2, 1.0 / (2 * n2)),
                np.full(n3, 1.0 / (4 * n3)),
            ]
        )

    if family is MeshFamily.SLOWLY_VARYING:
        n1, n2, n3 = 3 * n // 7, 3 * n // 7, n // 7
        h1 = 1.0 / (4 * n1)
        h3 = 1.0 / (4 * n3)
        i = np.arange(1, n2 + 1)
        mid = h1 + (h3 - h1) * (i - 1) / (n2 - 1)
        return np.concatenate([np.full(n1, h1), mid, np.full(n3, h3)])

    if family is MeshFamily.PERTURBED_UNIFORM:
        h = 1.0 / n
        w = np.empty(n)
        w[0::4] = h - 0.25 * h * h
        w[1::4] = h + 0.5 * h * h
        w[2::4] = h - 0.5 * h * h
        w[3::4] = h + 0.25 * h * h
        return w

    raise ValueError(f"unknown mesh family {family!r}")


def build_mesh(family: MeshFamily | str, n: int) -> Mesh:
    """Build the ``n``-cell mesh of the given family.

    Raises ValueError when ``n`` violates the family's divisibility
    constraint; the message names the required factor.
    """
    family = MeshFamily(family)
    validate_cell_count(family, n)
    if family is MeshFamily.UNIFORM:
        # i/n per node keeps every width within one ulp of 1/n
        nodes = np.arange(n + 1) / n
    else:
        widths = _widths(family, n)
        nodes = np.empty(n + 1)
        nodes[0] = 0.0
        np.cumsum(widths, out=nodes[1:])
        nodes[-1] = 1.0  # remove cumulative rounding drift
    return Mesh(nodes=nodes, cells=np.diff(nodes), family=family)
