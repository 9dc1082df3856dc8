"""Gauss-Legendre quadrature on the reference cell [0, 1]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["QuadRule", "quad_rule"]

_MAX_POINTS = 10


@dataclass(frozen=True, eq=False)
class QuadRule:
    """Points and weights on [0, 1]; exact for polynomials of degree 2q - 1."""

    points: np.ndarray
    weights: np.ndarray

    @property
    def count(self) -> int:
        return self.points.size


def quad_rule(q: int) -> QuadRule:
    """Return the q-point Gauss-Legendre rule mapped from [-1, 1] to [0, 1]."""
    if not 1 <= q <= _MAX_POINTS:
        raise ValueError(f"quadrature point count must be in [1, {_MAX_POINTS}], got {q}")
    x, w = np.polynomial.legendre.leggauss(q)
    return QuadRule(points=(x + 1.0) / 2.0, weights=w / 2.0)
