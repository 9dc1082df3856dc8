"""L2 projection onto a finite element space."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spaces import FemSpace

__all__ = ["FemFunction", "l2_project", "apply_to_grid"]


@dataclass(eq=False)
class FemFunction:
    """A member of a FemSpace, represented by its coefficient vector."""

    space: FemSpace
    coeffs: np.ndarray

    def __call__(self, x, deriv: int = 0):
        return self.space.evaluate(self.coeffs, x, deriv=deriv)

    def l2_norm(self) -> float:
        return float(np.sqrt(max(self.space.gram.quadratic_form(self.coeffs), 0.0)))


def apply_to_grid(f: Callable, x: np.ndarray) -> np.ndarray:
    """Evaluate f on a point grid, tolerating scalar-only callables."""
    try:
        out = np.asarray(f(x), dtype=float)
        if out.shape == x.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.vectorize(f, otypes=[float])(x)


def l2_project(space: FemSpace, f: Callable) -> FemFunction:
    """Best L2 approximation of f in the space.

    Load integrals use one Gauss point more than the Gram assembly so the
    projection error, not the quadrature error, dominates for smooth data.
    """
    tab = space.tables(space.order + 2)
    fx = apply_to_grid(f, tab.x)
    return FemFunction(space, space.gram.solve(tab.load(fx)))
