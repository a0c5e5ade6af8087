"""Model evaluation on metric grids and the relative L2 error protocol."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import ConstantBasis, Fourier1D, SineProduct2D, sinpi
from .errors import ZeroReference


@dataclass(frozen=True)
class ErrorReport:
    checkpoint_time: float
    err_u: float
    err_f: float

    def __post_init__(self):
        if self.err_u < 0 or self.err_f < 0:
            raise ValueError("error percentages must be nonnegative")


def trapezoid_weights(a: float, b: float, points: int) -> np.ndarray:
    if points < 2:
        raise ValueError("trapezoid rule needs at least 2 points")
    w = np.full(points, (b - a) / (points - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def tensor_weights(wx, wy) -> np.ndarray:
    return np.outer(wx, wy)


def evaluate_model(theta, spec, grid):
    """Model u and f on ``grid``.

    For 1-D bases ``grid`` is a vector of times.  For ``SineProduct2D`` it is a
    pair (x_points, y_points) and the result is evaluated on their tensor
    product, shape (len(x), len(y)); there the model right-hand side is
    minus the applied operator, matching f = -kappa * Laplacian(u).
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (spec.n,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({spec.n},)")
    if isinstance(spec, SineProduct2D):
        xs, ys = (np.asarray(g, dtype=np.float64) for g in grid)
        j = np.arange(1, spec.m_order + 1)
        sx = sinpi(np.outer(xs, j))
        sy = sinpi(np.outer(ys, j))
        T = theta.reshape(spec.m_order, spec.m_order)
        u = sx @ T @ sy.T
        f = -(sx @ (T * spec.laplacian_weights) @ sy.T)
        return u, f
    if isinstance(spec, (Fourier1D, ConstantBasis)):
        phi, applied = spec.evaluate(grid)
        return phi @ theta, applied @ theta
    raise TypeError(f"unsupported basis {type(spec).__name__}")


def rel_l2_error(approx, exact, weights) -> float:
    """100 * ||approx - exact|| / ||exact|| in the weighted L2 norm."""
    approx = np.asarray(approx, dtype=np.float64)
    exact = np.asarray(exact, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    ref = float(np.sum(weights * exact * exact))
    if not ref > 0:
        raise ZeroReference("reference solution has zero norm")
    return 100.0 * math.sqrt(float(np.sum(weights * (approx - exact) ** 2)) / ref)
