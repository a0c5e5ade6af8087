"""Riccati state of the quadratic Hamilton-Jacobi problem behind ridge-type
regression with integral losses.

The learning problem

    L(theta) = int_0^t lam/2 |Phi~(s) theta - y(s)|^2 ds + 1/2 theta' M theta - c' theta

is carried by the triple (Sxx, Sx, Sc) of the value function
S(x, t) = 1/2 x' Sxx x + Sx' x + Sc.  Adding data on (t, t1] means integrating
the Riccati ODEs forward; removing it means integrating them backward.  At any
time the minimizer of L is Sx.

Two RK4 formulations share the same stage lattice (t, t+h/2, t+h/2, t+h):

``"covariance"``
    Classical RK4 on (Sxx, Sx, Sc) exactly as the ODEs are written.  Explicit,
    so it needs ``h * lam * |Phi~ Sxx Phi~'|`` below the RK4 stability limit.
``"information"``
    Classical RK4 on the same system written in information coordinates
    (Sxx^-1, Sxx^-1 Sx).  There the right-hand side does not depend on the
    state, so the four stages collapse to Simpson weights h/6, 4h/6, h/6 on
    the three distinct stage times; the increment is folded back into
    (Sxx, Sx, Sc) with a Joseph-form Woodbury update.  Unconditionally stable,
    which stiff spectral designs require.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Protocol

import numpy as np
from scipy import linalg

from .errors import (
    DimensionMismatch,
    InvalidTarget,
    NotPositiveDefinite,
    ScNotTracked,
)

FORMS = ("covariance", "information")


@dataclass
class QuadRegularizer:
    """Quadratic prior 1/2 theta' M theta - c' theta in information form.

    ``M = A'A`` and ``c = A'b`` for the square-root parameterization
    1/2 |A theta - b|^2, so neither A nor its inverse is ever needed.
    """

    M: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        self.M = np.array(self.M, dtype=np.float64, ndmin=2)
        self.c = np.array(self.c, dtype=np.float64, ndmin=1)
        n = self.c.shape[0]
        if self.M.shape != (n, n):
            raise DimensionMismatch(f"M has shape {self.M.shape}, c has length {n}")

    @property
    def n(self) -> int:
        return self.c.shape[0]

    def prior_mean(self) -> np.ndarray:
        """M^-1 c, the minimizer before any data arrives."""
        return linalg.cho_solve(_cho(self.M), self.c)


@dataclass
class DesignSample:
    """Operator-applied design rows and targets at one stream time."""

    phi_applied: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        self.phi_applied = np.array(self.phi_applied, dtype=np.float64, ndmin=2)
        self.target = np.array(self.target, dtype=np.float64, ndmin=1)
        if self.phi_applied.ndim != 2 or self.target.shape != (self.phi_applied.shape[0],):
            raise DimensionMismatch(
                f"design {self.phi_applied.shape} incompatible with target {self.target.shape}"
            )


class DesignStream(Protocol):
    """Anything that maps a stream time to a :class:`DesignSample`."""

    def sample(self, s: float) -> DesignSample: ...


@dataclass
class RiccatiState:
    Sxx: np.ndarray
    Sx: np.ndarray
    lam: float
    t: float = 0.0
    Sc: Optional[float] = None
    n: int = field(init=False)

    def __post_init__(self):
        self.Sxx = np.asarray(self.Sxx, dtype=np.float64)
        self.Sx = np.asarray(self.Sx, dtype=np.float64)
        self.n = self.Sx.shape[0]
        if self.Sxx.shape != (self.n, self.n):
            raise DimensionMismatch(f"Sxx has shape {self.Sxx.shape}, Sx has length {self.n}")
        if self.t < 0:
            raise InvalidTarget(f"stream time must be nonnegative, got {self.t}")
        if self.lam < 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")

    @property
    def track_sc(self) -> bool:
        return self.Sc is not None

    def copy(self) -> "RiccatiState":
        return replace(self, Sxx=self.Sxx.copy(), Sx=self.Sx.copy())


def _cho(M):
    try:
        return linalg.cho_factor(M, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NotPositiveDefinite(str(exc)) from None


def _sym(A):
    return 0.5 * (A + A.T)


def check_positive_definite(state: RiccatiState) -> None:
    """Raise :class:`NotPositiveDefinite` unless Sxx admits a Cholesky factor."""
    try:
        np.linalg.cholesky(state.Sxx)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(f"Sxx lost positive definiteness at t={state.t}") from None
    if not np.all(np.isfinite(state.Sx)):
        raise NotPositiveDefinite(f"Sx is not finite at t={state.t}")


def init_state(reg: QuadRegularizer, lam: float, track_sc: bool = True) -> RiccatiState:
    """Riccati state at t = 0: Sxx = M^-1, Sx = M^-1 c, Sc = c' M^-1 c / 2."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    cf = _cho(reg.M)
    Sxx = _sym(linalg.cho_solve(cf, np.eye(reg.n)))
    Sx = linalg.cho_solve(cf, reg.c)
    Sc = 0.5 * float(reg.c @ Sx) if track_sc else None
    return RiccatiState(Sxx=Sxx, Sx=Sx, lam=float(lam), t=0.0, Sc=Sc)


def _rhs(S, x, lam, sample):
    A, y = sample.phi_applied, sample.target
    W = A @ S
    r = A @ x - y
    dS = -lam * _sym(W.T @ W)
    dx = -lam * (W.T @ r)
    dc = -0.5 * lam * float(r @ r)
    return dS, dx, dc


def _check_sample(sample, n):
    if sample.phi_applied.shape[1] != n:
        raise DimensionMismatch(
            f"design has {sample.phi_applied.shape[1]} columns, state has n={n}"
        )


def riccati_rhs(state: RiccatiState, sample: DesignSample):
    """Right-hand side (dSxx, dSx, dSc) of the Riccati system at one sample.

    dSxx = -lam W'W with W = Phi~ Sxx, so the result is exactly symmetric.
    dSc is returned even when the state does not track Sc.
    """
    _check_sample(sample, state.n)
    return _rhs(state.Sxx, state.Sx, state.lam, sample)


def _covariance_step(S, x, Sc, lam, h, s1, sm, s4):
    k1 = _rhs(S, x, lam, s1)
    k2 = _rhs(S + (0.5 * h) * k1[0], x + (0.5 * h) * k1[1], lam, sm)
    k3 = _rhs(S + (0.5 * h) * k2[0], x + (0.5 * h) * k2[1], lam, sm)
    k4 = _rhs(S + h * k3[0], x + h * k3[1], lam, s4)
    h6 = h / 6.0
    S = _sym(S + h6 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]))
    x = x + h6 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    if Sc is not None:
        Sc = Sc + h6 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    return S, x, Sc


def _information_step(S, x, Sc, lam, h, s1, sm, s4):
    # Simpson weights of the three distinct stage times; the two midpoint
    # stages of RK4 share one sample.
    samples = (s1, sm, s4)
    weights = (h / 6.0, 4.0 * h / 6.0, h / 6.0)
    U = np.vstack([s.phi_applied for s in samples])
    y = np.concatenate([s.target for s in samples])
    noise = np.concatenate(
        [np.full(s.target.shape[0], 1.0 / (lam * w)) for s, w in zip(samples, weights)]
    )
    W = U @ S
    innov = W @ U.T
    innov = _sym(innov) + np.diag(noise)
    r = y - U @ x
    try:
        sol = np.linalg.solve(innov, np.column_stack([W, r]))
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("singular innovation matrix in information step") from None
    Kt, z = sol[:, :-1], sol[:, -1]
    K = Kt.T
    x = x + W.T @ z
    # Joseph form keeps the update symmetric positive semidefinite
    X = S - K @ W
    S = _sym(X - (X @ U.T) @ Kt + K @ (noise[:, None] * Kt))
    if Sc is not None:
        Sc = Sc - 0.5 * float(r @ z)
    return S, x, Sc


_STEPPERS = {"covariance": _covariance_step, "information": _information_step}


def _stepper(form):
    try:
        return _STEPPERS[form]
    except KeyError:
        raise ValueError(f"unknown RK4 form {form!r}; expected one of {FORMS}") from None


def rk4_step(state: RiccatiState, stream: DesignStream, h: float,
             form: str = "covariance") -> RiccatiState:
    """One RK4 step of size ``h`` (negative to step backward in time)."""
    if h == 0:
        raise ValueError("step size must be nonzero")
    step = _stepper(form)
    t = state.t
    s1 = stream.sample(t)
    sm = stream.sample(t + 0.5 * h)
    s4 = stream.sample(t + h)
    for s in (s1, sm, s4):
        _check_sample(s, state.n)
    if state.lam == 0:
        out = state.copy()
    else:
        S, x, Sc = step(state.Sxx, state.Sx, state.Sc, state.lam, h, s1, sm, s4)
        out = RiccatiState(Sxx=S, Sx=x, lam=state.lam, t=state.t, Sc=Sc)
    out.t = t + h
    return out


def _on_lattice(t, h):
    r = t / h
    k = round(r)
    return k if abs(r - k) <= max(1e-9, 1e-12 * abs(r)) else None


def step_boundaries(t0: float, t1: float, h: float) -> list[float]:
    """Step endpoints from ``t0`` to ``t1`` aligned to the global lattice k*h.

    Interior endpoints are the lattice points strictly between t0 and t1, so
    any segmentation of an interval replays the same steps (and the same
    stage times).  Endpoints that sit on the lattice are snapped to it; the
    first and last steps may be shorter than ``h`` when they are not.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    if t0 == t1:
        return [t0]
    sign = 1 if t1 > t0 else -1
    k0, k1 = _on_lattice(t0, h), _on_lattice(t1, h)
    a = k0 * h if k0 is not None else t0
    b = k1 * h if k1 is not None else t1
    if sign > 0:
        first = k0 + 1 if k0 is not None else math.floor(t0 / h) + 1
        last = k1 - 1 if k1 is not None else math.ceil(t1 / h) - 1
        interior = [k * h for k in range(first, last + 1)]
    else:
        first = k0 - 1 if k0 is not None else math.ceil(t0 / h) - 1
        last = k1 + 1 if k1 is not None else math.floor(t1 / h) + 1
        interior = [k * h for k in range(first, last - 1, -1)]
    return [a, *interior, b]


def _integrate(state, stream, t_target, h, form):
    bounds = step_boundaries(state.t, t_target, h)
    out = state.copy()
    if len(bounds) < 2:
        return out
    step = _stepper(form)
    S, x, Sc = out.Sxx, out.Sx, out.Sc
    lam = state.lam
    prev = None
    # an unstable explicit run overflows; the final PD check reports it
    with np.errstate(over="ignore", invalid="ignore"):
        for a, b in zip(bounds[:-1], bounds[1:]):
            if a == b:
                continue
            s1 = prev if prev is not None else stream.sample(a)
            sm = stream.sample(0.5 * (a + b))
            s4 = stream.sample(b)
            if prev is None:
                _check_sample(s1, state.n)
            _check_sample(sm, state.n)
            _check_sample(s4, state.n)
            if lam != 0:
                S, x, Sc = step(S, x, Sc, lam, b - a, s1, sm, s4)
            prev = s4
    out = RiccatiState(Sxx=S, Sx=x, lam=lam, t=float(t_target), Sc=Sc)
    check_positive_definite(out)
    return out


def evolve(state: RiccatiState, stream: DesignStream, t_target: float, h: float,
           form: str = "covariance") -> RiccatiState:
    """Add the data on (state.t, t_target] by integrating forward.

    The returned state has ``t == t_target`` exactly and has passed a
    positive-definiteness check.
    """
    if t_target < state.t:
        raise InvalidTarget(f"evolve target {t_target} precedes current time {state.t}")
    return _integrate(state, stream, t_target, h, form)


def retract(state: RiccatiState, stream: DesignStream, t_target: float, h: float,
            form: str = "covariance") -> RiccatiState:
    """Remove the data on (t_target, state.t] by integrating backward."""
    if t_target > state.t:
        raise InvalidTarget(f"retract target {t_target} is after current time {state.t}")
    if t_target < 0:
        raise InvalidTarget("cannot retract below t = 0")
    return _integrate(state, stream, t_target, h, form)


def minimizer(state: RiccatiState) -> np.ndarray:
    return state.Sx.copy()


def retune_bias(state: RiccatiState, c_x) -> np.ndarray:
    """Minimizer after adding ``c_x`` to the prior's linear term.

    ``state`` must have been evolved from the complementary prior c - c_x;
    the data is not touched again.
    """
    c_x = np.asarray(c_x, dtype=np.float64)
    if c_x.shape != (state.n,):
        raise DimensionMismatch(f"bias has shape {c_x.shape}, expected ({state.n},)")
    return state.Sxx @ c_x + state.Sx


def apply_bias(state: RiccatiState, reg: QuadRegularizer, c_x):
    """State and prior after permanently adding ``c_x`` to the linear term.

    Sx is linear in c and Sxx does not depend on it, so the shifted state is
    exactly the one an evolution from c + c_x would have produced.
    """
    theta = retune_bias(state, c_x)
    out = state.copy()
    out.Sx = theta
    if state.track_sc:
        out.Sc = state.Sc + float(state.Sx @ c_x) + 0.5 * float(c_x @ state.Sxx @ c_x)
    return out, QuadRegularizer(reg.M.copy(), reg.c + c_x)


def hopf_value(state: RiccatiState, x) -> float:
    """S(x, t) = 1/2 x' Sxx x + Sx' x + Sc."""
    if not state.track_sc:
        raise ScNotTracked("hopf_value needs Sc tracking")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (state.n,):
        raise DimensionMismatch(f"x has shape {x.shape}, expected ({state.n},)")
    return 0.5 * float(x @ state.Sxx @ x) + float(state.Sx @ x) + state.Sc


def min_loss(state: RiccatiState, reg: QuadRegularizer) -> float:
    """Minimal value of the loss over the data seen so far.

    Equals c' M^-1 c / 2 - Sc(t); zero at t = 0.
    """
    if not state.track_sc:
        raise ScNotTracked("min_loss needs Sc tracking")
    return 0.5 * float(reg.c @ reg.prior_mean()) - state.Sc
