"""Symmetric positive definite banded matrices, optionally with periodic wrap.

The band is stored in LAPACK lower form: ``bands[d, i]`` holds the entry on
subdiagonal ``d`` in column ``i``.  A periodic matrix additionally carries the
top-right corner block ``corner[i, j] = A[i, n - b + j]`` (the bottom-left
block is its transpose).  Factorization is a banded Cholesky of the band part;
periodic solves reduce the corner blocks to the banded solver through the
Sherman-Morrison-Woodbury identity, keeping every solve O(n).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import (
    LinAlgError,
    cho_solve_banded,
    cholesky_banded,
    lu_factor,
    lu_solve,
)

__all__ = ["BandedMatrix", "banded_solve", "NotSPDError"]


class NotSPDError(ValueError):
    """The matrix is not symmetric positive definite (assembly bug upstream)."""


class BandedMatrix:
    """Symmetric banded matrix with optional periodic corner blocks."""

    def __init__(self, n: int, bandwidth: int, periodic: bool = False):
        if periodic and n <= 2 * bandwidth:
            raise ValueError(
                f"periodic band storage needs n > 2*bandwidth, got n={n}, "
                f"bandwidth={bandwidth}"
            )
        self.n = n
        self.bandwidth = bandwidth
        self.periodic = periodic
        self.bands = np.zeros((bandwidth + 1, n))
        self.corner = np.zeros((bandwidth, bandwidth)) if periodic else None
        self._chol = None
        self._smw_w = None
        self._smw_lu = None

    # -- assembly ----------------------------------------------------------

    def add(self, row: int, col: int, value: float) -> None:
        """Accumulate into entry (row, col); call once per unordered pair."""
        if row < col:
            row, col = col, row
        d = row - col
        if d <= self.bandwidth:
            self.bands[d, col] += value
        elif self.periodic and self.n - d <= self.bandwidth:
            self.corner[col, row - (self.n - self.bandwidth)] += value
        else:
            raise ValueError(f"entry ({row}, {col}) lies outside the band")

    # -- dense views (test oracles, small problems) ------------------------

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for d in range(self.bandwidth + 1):
            for i in range(self.n - d):
                a[i + d, i] = self.bands[d, i]
                a[i, i + d] = self.bands[d, i]
        if self.periodic:
            b = self.bandwidth
            a[: b, self.n - b:] += self.corner
            a[self.n - b:, : b] += self.corner.T
        return a

    # -- products ----------------------------------------------------------

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.bands[0] * x
        for d in range(1, self.bandwidth + 1):
            band = self.bands[d, : self.n - d]
            y[d:] += band * x[: self.n - d]
            y[: self.n - d] += band * x[d:]
        if self.periodic:
            b = self.bandwidth
            y[:b] += self.corner @ x[self.n - b:]
            y[self.n - b:] += self.corner.T @ x[:b]
        return y

    def quadratic_form(self, x: np.ndarray) -> float:
        return float(x @ self.matvec(x))

    # -- factorization and solves ------------------------------------------

    def factor(self) -> None:
        try:
            self._chol = cholesky_banded(self.bands, lower=True)
        except LinAlgError as exc:
            raise NotSPDError("matrix not SPD") from exc
        if self.periodic:
            b = self.bandwidth
            n = self.n
            u = np.zeros((n, 2 * b))
            u[:b, :b] = np.eye(b)
            u[n - b:, b:] = np.eye(b)
            w = cho_solve_banded((self._chol, True), u)
            rinv = np.linalg.inv(self.corner)
            kinv = np.zeros((2 * b, 2 * b))
            kinv[:b, b:] = rinv.T
            kinv[b:, :b] = rinv
            s = kinv + np.vstack([w[:b], w[n - b:]])
            self._smw_w = w
            self._smw_lu = lu_factor(s)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        # check_finite off: non-finite values propagate to the output, where
        # the time steppers detect them as a blowup observation
        if self._chol is None:
            self.factor()
        z = cho_solve_banded((self._chol, True), rhs, check_finite=False)
        if self.periodic:
            b = self.bandwidth
            t = np.concatenate([z[:b], z[self.n - b:]])
            z = z - self._smw_w @ lu_solve(self._smw_lu, t, check_finite=False)
        return z


def banded_solve(matrix: BandedMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve ``matrix @ x = rhs`` through the factored band."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != matrix.n:
        raise ValueError(f"rhs length {rhs.shape[0]} != dimension {matrix.n}")
    return matrix.solve(rhs)
