"""Independent reference solvers: quadrature of the normal-equation
ingredients, a direct least-squares solve, and the quadratic Hopf maximizer.

Nothing here touches the Riccati machinery, so agreement between the two is
a genuine check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy import linalg

from .errors import DimensionMismatch, SingularSystem
from .riccati import QuadRegularizer

# design rows per quadrature chunk; bounds memory at ~_CHUNK_ROWS * n doubles
_CHUNK_ROWS = 1 << 15


@dataclass(frozen=True)
class Trapezoid:
    points: int

    def __post_init__(self):
        if self.points < 2:
            raise ValueError("trapezoid rule needs at least 2 points")

    def nodes(self, t0: float, t1: float):
        s = np.linspace(t0, t1, self.points)
        w = np.full(self.points, (t1 - t0) / (self.points - 1))
        w[0] *= 0.5
        w[-1] *= 0.5
        return s, w


@dataclass(frozen=True)
class MonteCarlo:
    points: int
    seed: int = 0

    def __post_init__(self):
        if self.points < 1:
            raise ValueError("Monte Carlo needs at least 1 point")

    def nodes(self, t0: float, t1: float):
        rng = np.random.default_rng(self.seed)
        s = t0 + (t1 - t0) * rng.random(self.points)
        return s, np.full(self.points, (t1 - t0) / self.points)


QuadratureSpec = Union[Trapezoid, MonteCarlo]


class InfoMoments(NamedTuple):
    """K = int A'A ds, k_y = int A'y ds, energy = int |y|^2 ds."""

    K: np.ndarray
    k_y: np.ndarray
    energy: float


def _batch_rows(source, spec, s):
    """Stacked design rows and targets for a batch of times.

    Uses vectorized evaluation for single-row bases, falling back to one
    sample per time otherwise.
    """
    if spec is None:
        samples = [source.sample(float(v)) for v in s]
        return (np.vstack([smp.phi_applied for smp in samples]),
                np.concatenate([smp.target for smp in samples]))
    y = source.targets(s)
    if spec.m == 1:
        return spec.evaluate(s)[1], y.reshape(-1)
    return np.vstack([spec.applied(float(v)) for v in s]), y.reshape(-1)


def quadrature_info(source, spec, t: float, q: QuadratureSpec, t0: float = 0.0) -> InfoMoments:
    """Assemble K(t), k_y(t) and the target energy over [t0, t] by quadrature.

    ``spec`` may be None, in which case ``source`` must expose
    ``sample(s) -> DesignSample``.  Chunks are reduced in a fixed order.
    """
    s_all, w_all = q.nodes(t0, t)
    rows = spec.m if spec is not None else source.sample(float(s_all[0])).target.shape[0]
    chunk = max(1, _CHUNK_ROWS // rows)
    K = None
    k_y = None
    energy = 0.0
    for lo in range(0, s_all.shape[0], chunk):
        s = s_all[lo:lo + chunk]
        w = w_all[lo:lo + chunk]
        A, y = _batch_rows(source, spec, s)
        wr = np.repeat(w, A.shape[0] // s.shape[0])
        if K is None:
            K = np.zeros((A.shape[1], A.shape[1]))
            k_y = np.zeros(A.shape[1])
        Aw = A * wr[:, None]
        K += Aw.T @ A
        k_y += Aw.T @ y
        energy += float(wr @ (y * y))
    return InfoMoments(0.5 * (K + K.T), k_y, energy)


def _solve_spd(H, rhs):
    try:
        cf = linalg.cho_factor(H, lower=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise SingularSystem(f"M + lambda K is not positive definite: {exc}") from None
    return linalg.cho_solve(cf, rhs)


def _system(reg, lam, K, k_y):
    K = np.asarray(K, dtype=np.float64)
    k_y = np.asarray(k_y, dtype=np.float64)
    if K.shape != (reg.n, reg.n) or k_y.shape != (reg.n,):
        raise DimensionMismatch(f"K {K.shape} / k_y {k_y.shape} do not match n={reg.n}")
    return reg.M + lam * K, reg.c + lam * k_y


def lse_solve(reg: QuadRegularizer, lam: float, K, k_y) -> np.ndarray:
    """Solve the normal equations (M + lam K) theta = c + lam k_y."""
    H, rhs = _system(reg, lam, K, k_y)
    return _solve_spd(H, rhs)


def hopf_direct(reg: QuadRegularizer, lam: float, K, k_y, x,
                energy: float = 0.0) -> tuple[float, np.ndarray]:
    """Maximize the quadratic Hopf objective in p directly.

    The objective is <x,p> - 1/2 p'(M + lam K)p + (c + lam k_y)'p - lam/2 energy,
    so the maximizer solves (M + lam K) p = x + c + lam k_y.  With ``energy``
    set to int |y|^2 the value at x = 0 is minus the minimal loss.
    """
    H, rhs = _system(reg, lam, K, k_y)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (reg.n,):
        raise DimensionMismatch(f"x has shape {x.shape}, expected ({reg.n},)")
    g = x + rhs
    p = _solve_spd(H, g)
    return 0.5 * float(g @ p) - 0.5 * lam * energy, p

