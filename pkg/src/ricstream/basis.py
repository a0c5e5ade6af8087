"""Basis families, the linear operators applied to them, and the folds that
turn boundary and ridge penalties into a :class:`QuadRegularizer`.

Column orderings are frozen because snapshots and CSV files index by them:

* ``Fourier1D``: 0 -> 1, then (2j-1, 2j) -> (j sin(j a s), j cos(j a s)) for
  j = 1..half_order, where ``a`` is the argument scale (1 by default).
  Operator: d^2/ds^2 + identity.
* ``SineProduct2D``: (j-1)*m + (k-1) -> sin(j pi x) sin(k pi y), sampled on a
  fixed x grid.  Operator: kappa * Laplacian.
* ``ConstantBasis``: a single constant column under the identity operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonPositiveGamma
from .riccati import QuadRegularizer


def sinpi(z):
    """sin(pi z), exactly zero wherever z is an integer."""
    z = np.asarray(z, dtype=np.float64)
    return np.where(z == np.round(z), 0.0, np.sin(math.pi * z))


@dataclass(frozen=True)
class Fourier1D:
    half_order: int
    scale: float = 1.0

    def __post_init__(self):
        if self.half_order < 1:
            raise ValueError("half_order must be a positive integer")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def n(self) -> int:
        return 2 * self.half_order + 1

    @property
    def m(self) -> int:
        return 1

    def evaluate(self, s):
        """Rows of Phi and of the applied design at each point of ``s``.

        Returns two arrays of shape (len(s), n).
        """
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        j = np.arange(1, self.half_order + 1, dtype=np.float64)
        freq = self.scale * j
        arg = s[:, None] * freq
        sn, cs = np.sin(arg), np.cos(arg)
        gain = j * (1.0 - freq * freq)
        phi = np.empty((s.shape[0], self.n))
        applied = np.empty_like(phi)
        phi[:, 0] = 1.0
        applied[:, 0] = 1.0
        phi[:, 1::2] = j * sn
        phi[:, 2::2] = j * cs
        applied[:, 1::2] = gain * sn
        applied[:, 2::2] = gain * cs
        return phi, applied

    def applied(self, s: float) -> np.ndarray:
        return self.evaluate(s)[1]


@dataclass(frozen=True)
class SineProduct2D:
    m_order: int
    kappa: float
    x_grid: tuple
    _sin_x: np.ndarray = field(init=False, repr=False, compare=False)
    _lap: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.m_order < 1:
            raise ValueError("m_order must be a positive integer")
        xg = np.asarray(self.x_grid, dtype=np.float64)
        if xg.ndim != 1 or xg.size < 1 or xg.min() < 0 or xg.max() > 1:
            raise ValueError("x_grid must be a nonempty vector inside [0, 1]")
        object.__setattr__(self, "x_grid", tuple(float(v) for v in xg))
        j = np.arange(1, self.m_order + 1, dtype=np.float64)
        object.__setattr__(self, "_sin_x", sinpi(np.outer(xg, j)))
        # (j, k) eigenvalue of kappa * Laplacian on sin(j pi x) sin(k pi y)
        lap = -self.kappa * math.pi**2 * (j[:, None] ** 2 + j[None, :] ** 2)
        object.__setattr__(self, "_lap", lap)

    @classmethod
    def uniform(cls, m_order: int, kappa: float, n_intervals: int) -> "SineProduct2D":
        return cls(m_order, kappa, tuple(np.arange(n_intervals + 1) / n_intervals))

    @property
    def n(self) -> int:
        return self.m_order**2

    @property
    def m(self) -> int:
        return len(self.x_grid)

    @property
    def laplacian_weights(self) -> np.ndarray:
        """m x m array of kappa * Laplacian eigenvalues, indexed (j-1, k-1)."""
        return self._lap.copy()

    def evaluate(self, y: float):
        """(phi, phi_applied), each of shape (len(x_grid), n), at height ``y``."""
        k = np.arange(1, self.m_order + 1, dtype=np.float64)
        sy = sinpi(k * y)
        phi = (self._sin_x[:, :, None] * sy[None, None, :]).reshape(self.m, self.n)
        applied = (self._sin_x[:, :, None] * (self._lap * sy)[None, :, :]).reshape(self.m, self.n)
        return phi, applied

    def applied(self, y: float) -> np.ndarray:
        return self.evaluate(y)[1]


@dataclass(frozen=True)
class ConstantBasis:
    """One constant column under the identity operator (plain regression)."""

    @property
    def n(self) -> int:
        return 1

    @property
    def m(self) -> int:
        return 1

    def evaluate(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        ones = np.ones((s.shape[0], 1))
        return ones, ones.copy()

    def applied(self, s: float) -> np.ndarray:
        return np.ones((1, 1))


def fourier1d_design(spec: Fourier1D, s: float):
    """(phi, phi_applied) rows, each of shape (1, n), at a single time."""
    return spec.evaluate(s)


def sineprod2d_design(spec: SineProduct2D, y: float):
    return spec.evaluate(y)


def _gamma_vector(gamma, n):
    g = np.asarray(gamma, dtype=np.float64)
    if g.ndim == 0:
        g = np.full(n, float(g))
    if g.shape != (n,):
        raise DimensionMismatch(f"gamma has shape {g.shape}, expected ({n},)")
    if not np.all(g > 0):
        raise NonPositiveGamma("all ridge weights gamma_i must be positive")
    return g


def diag_regularizer(gamma) -> QuadRegularizer:
    """Plain ridge prior: M = diag(gamma), c = 0."""
    g = np.atleast_1d(np.asarray(gamma, dtype=np.float64))
    g = _gamma_vector(g, g.shape[0])
    return QuadRegularizer(np.diag(g), np.zeros_like(g))


def ode_regularizer(lambda0, lambdaT, gamma, u0, uT, T, spec) -> QuadRegularizer:
    """Fold two boundary penalties and a ridge term into one quadratic prior.

    lambda0/2 |Phi(0) theta - u0|^2 + lambdaT/2 |Phi(T) theta - uT|^2
    + 1/2 sum gamma_i theta_i^2, up to a constant, is 1/2 theta' M theta - c' theta.
    """
    if lambda0 < 0 or lambdaT < 0:
        raise ValueError("boundary weights must be nonnegative")
    g = _gamma_vector(gamma, spec.n)
    phi0 = spec.evaluate(0.0)[0][0]
    phiT = spec.evaluate(T)[0][0]
    M = np.diag(g) + lambda0 * np.outer(phi0, phi0) + lambdaT * np.outer(phiT, phiT)
    c = lambda0 * u0 * phi0 + lambdaT * uT * phiT
    return QuadRegularizer(0.5 * (M + M.T), c)
