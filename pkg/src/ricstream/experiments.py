"""Experiment assembly and the run / extend / forget / retune / oracle
pipelines behind the command line."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import riccati
from .basis import ConstantBasis, Fourier1D, SineProduct2D, diag_regularizer, ode_regularizer
from .config import ExperimentConfig
from .errors import DimensionMismatch, InvalidTarget
from .metrics import ErrorReport, evaluate_model, rel_l2_error, tensor_weights, trapezoid_weights
from .oracles import MonteCarlo, Trapezoid, lse_solve, quadrature_info
from .riccati import QuadRegularizer, RiccatiState
from .snapshot import save_snapshot
from .streams import (
    Custom,
    NoiseSpec,
    OdeAnalytic,
    PoissonAnalytic,
    SourceStream,
    ode_truth,
    poisson_truth,
    read_gridded,
)


@dataclass
class Problem:
    config: ExperimentConfig
    basis: object
    reg: QuadRegularizer
    lam: float
    source: object
    T: float
    truth: Optional[Callable] = None
    _metric: Optional[tuple] = field(default=None, repr=False)

    @property
    def stream(self) -> SourceStream:
        return SourceStream(self.source, self.basis)

    @property
    def h(self) -> float:
        return self.config.step_h

    @property
    def form(self) -> str:
        return self.config.form

    def initial_state(self) -> RiccatiState:
        return riccati.init_state(self.reg, self.lam, track_sc=self.config.track_sc)

    def metric(self):
        """(grid, weights, u_exact, f_exact) on the error-metric grid."""
        if self._metric is None:
            pts = self.config.metric_points
            if isinstance(self.basis, SineProduct2D):
                g = np.linspace(0.0, 1.0, pts)
                w = trapezoid_weights(0.0, 1.0, pts)
                X, Y = np.meshgrid(g, g, indexing="ij")
                u, f = self.truth(X, Y) if self.truth else (None, None)
                self._metric = ((g, g), tensor_weights(w, w), u, f)
            else:
                lo = self.source.domain[0]
                g = np.linspace(lo, self.T, pts)
                u, f = self.truth(g) if self.truth else (None, None)
                self._metric = (g, trapezoid_weights(lo, self.T, pts), u, f)
        return self._metric

    def report(self, theta, t: float) -> Optional[ErrorReport]:
        grid, w, u_ex, f_ex = self.metric()
        if u_ex is None:
            return None
        u, f = evaluate_model(theta, self.basis, grid)
        return ErrorReport(float(t), rel_l2_error(u, u_ex, w), rel_l2_error(f, f_ex, w))


def _gamma(config, n):
    g = np.asarray(config.gamma, dtype=np.float64)
    if g.size == 1:
        return np.full(n, float(g[0]))
    if g.size != n:
        raise DimensionMismatch(f"gamma lists {g.size} entries, the basis has n={n}")
    return g


def _noise(config):
    if config.noise_scale == 0:
        return None
    return NoiseSpec(config.seed, config.noise_scale, config.step_h / 2)


def build_problem(config: ExperimentConfig) -> Problem:
    kind = config.experiment
    if kind == "ode":
        T = config.T_final
        scale = config.basis_scale if config.basis_scale is not None else 1.0 / T
        basis = Fourier1D(config.half_order, scale)
        u0 = float(ode_truth(0.0)[0])
        uT = float(ode_truth(T)[0])
        reg = ode_regularizer(config.lambda_0, config.lambda_T, _gamma(config, basis.n),
                              u0, uT, T, basis)
        lam = config.lambda_f / T if config.time_normalized else config.lambda_f
        return Problem(config, basis, reg, lam, OdeAnalytic(T, _noise(config)), T, ode_truth)
    if kind == "poisson":
        basis = SineProduct2D.uniform(config.m_order, config.kappa, config.N_x)
        reg = diag_regularizer(_gamma(config, basis.n))
        source = PoissonAnalytic(basis.x_grid, config.kappa, _noise(config))
        kappa = config.kappa
        return Problem(config, basis, reg, config.lambda_f / config.N_x, source,
                       config.T_final, lambda x, y: poisson_truth(x, y, kappa))
    if kind == "scalar":
        basis = ConstantBasis()
        reg = diag_regularizer(_gamma(config, 1))
        target = config.scalar_target
        source = Custom(lambda s: [target], (0.0, config.T_final), _noise(config))

        def truth(s):
            v = np.full(np.shape(s), target)
            return v, v.copy()

        return Problem(config, basis, reg, config.lambda_f, source, config.T_final, truth)
    # custom: targets from a gridded file, no ground truth
    source = read_gridded(config.data_file)
    source.noise = _noise(config)
    if config.basis == "constant":
        basis = ConstantBasis()
    else:
        basis = Fourier1D(config.half_order,
                          config.basis_scale if config.basis_scale is not None else 1.0)
    if source.m != basis.m:
        raise DimensionMismatch(f"data file has m={source.m}, the basis expects m={basis.m}")
    T = config.T_final if config.T_final is not None else source.domain[1]
    return Problem(config, basis, diag_regularizer(_gamma(config, basis.n)),
                   config.lambda_f, source, T)


@dataclass
class Outcome:
    state: RiccatiState
    reg: QuadRegularizer
    theta: np.ndarray
    reports: list


def _march(problem, state, t_end, stream=None, direction=1):
    """Move ``state`` to ``t_end`` through the configured checkpoints."""
    stream = stream if stream is not None else problem.stream
    t0 = state.t
    if direction > 0:
        stops = [c for c in problem.config.checkpoints if t0 < c < t_end]
        move = riccati.evolve
    else:
        stops = [c for c in reversed(problem.config.checkpoints) if t_end < c < t0]
        move = riccati.retract
    reports = []
    for t in [*stops, t_end]:
        state = move(state, stream, t, problem.h, form=problem.form)
        rep = problem.report(state.Sx, t)
        if rep is not None:
            reports.append(rep)
    return state, reports


def run(problem: Problem, t_end: Optional[float] = None) -> Outcome:
    t_end = problem.T if t_end is None else t_end
    state = problem.initial_state()
    if t_end == 0:
        rep = problem.report(state.Sx, 0.0)
        return Outcome(state, problem.reg, riccati.minimizer(state), [rep] if rep else [])
    state, reports = _march(problem, state, t_end)
    return Outcome(state, problem.reg, riccati.minimizer(state), reports)


def extend(problem: Problem, state: RiccatiState, reg: QuadRegularizer, t1: float,
           stream=None) -> Outcome:
    """Add the data on (state.t, t1]; ``stream`` overrides the problem's stream."""
    if t1 < state.t:
        raise InvalidTarget(f"extend target {t1} precedes snapshot time {state.t}")
    problem = _with_reg(problem, reg)
    state, reports = _march(problem, state, t1, stream)
    return Outcome(state, reg, riccati.minimizer(state), reports)


def forget(problem: Problem, state: RiccatiState, reg: QuadRegularizer, t2: float,
           stream=None) -> Outcome:
    """Remove the data on (t2, state.t]."""
    if t2 > state.t:
        raise InvalidTarget(f"forget target {t2} is after snapshot time {state.t}")
    problem = _with_reg(problem, reg)
    state, reports = _march(problem, state, t2, stream, direction=-1)
    return Outcome(state, reg, riccati.minimizer(state), reports[-1:])


def retune(problem: Problem, state: RiccatiState, reg: QuadRegularizer, c_x) -> Outcome:
    c_x = np.asarray(c_x, dtype=np.float64)
    new_state, new_reg = riccati.apply_bias(state, reg, c_x)
    rep = problem.report(new_state.Sx, state.t)
    return Outcome(new_state, new_reg, riccati.minimizer(new_state), [rep] if rep else [])


def _with_reg(problem, reg):
    if reg.n != problem.reg.n:
        raise DimensionMismatch(f"snapshot has n={reg.n}, configuration gives n={problem.reg.n}")
    return Problem(problem.config, problem.basis, reg, problem.lam, problem.source,
                   problem.T, problem.truth, problem._metric)


def _segment_rule(config, t0, t1, total, index):
    span = max(t1 - t0, 0.0)
    pts = max(2, int(round((config.oracle_points - 1) * span / total)) + 1)
    if config.oracle_kind == "montecarlo":
        return MonteCarlo(pts, seed=config.seed + index)
    return Trapezoid(pts)


def oracle(problem: Problem, t_end: Optional[float] = None) -> Outcome:
    """Direct least-squares solves at each checkpoint.

    Quadrature is accumulated segment by segment, so with the trapezoid rule
    the result equals a single composite rule of ``oracle_points`` nodes over
    [0, t_end].  The returned state is the exact Riccati state implied by the
    normal equations.
    """
    cfg = problem.config
    t_end = problem.T if t_end is None else t_end
    stops = [c for c in cfg.checkpoints if 0 < c < t_end] + [t_end]
    reg, lam = problem.reg, problem.lam
    K = np.zeros((reg.n, reg.n))
    k_y = np.zeros(reg.n)
    energy = 0.0
    prev = 0.0
    reports = []
    theta = reg.prior_mean()
    for i, t in enumerate(stops):
        if t > prev:
            mom = quadrature_info(problem.source, problem.basis, t,
                                  _segment_rule(cfg, prev, t, t_end, i), t0=prev)
            K += mom.K
            k_y += mom.k_y
            energy += mom.energy
        theta = lse_solve(reg, lam, K, k_y)
        rep = problem.report(theta, t)
        if rep is not None:
            reports.append(rep)
        prev = t
    H = reg.M + lam * K
    Sxx = np.linalg.inv(0.5 * (H + H.T))
    Sxx = 0.5 * (Sxx + Sxx.T)
    eta = reg.c + lam * k_y
    Sc = 0.5 * float(theta @ eta) - 0.5 * lam * energy if cfg.track_sc else None
    state = RiccatiState(Sxx=Sxx, Sx=theta, lam=lam, t=float(t_end), Sc=Sc)
    return Outcome(state, reg, theta, reports)


def _fmt(v) -> str:
    return format(float(v), ".17g")


def write_outputs(out_dir, problem: Problem, outcome: Outcome, digest: bytes) -> Path:
    """Write state.snap, theta.csv, errors.csv and inference.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_snapshot(out / "state.snap", outcome.state, outcome.reg, digest)
    with open(out / "theta.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "value"])
        w.writerows([i, _fmt(v)] for i, v in enumerate(outcome.theta))
    with open(out / "errors.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["checkpoint", "err_u_pct", "err_f_pct"])
        w.writerows([_fmt(r.checkpoint_time), _fmt(r.err_u), _fmt(r.err_f)]
                    for r in outcome.reports)
    _write_inference(out / "inference.csv", problem, outcome.theta)
    return out


def _write_inference(path, problem, theta):
    grid, _, u_ex, f_ex = problem.metric()
    u, f = evaluate_model(theta, problem.basis, grid)
    if u_ex is None:
        u_ex = np.full_like(u, math.nan)
        f_ex = np.full_like(f, math.nan)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if isinstance(problem.basis, SineProduct2D):
            xs, ys = grid
            w.writerow(["x", "y", "u_model", "f_model", "u_exact", "f_exact"])
            X, Y = np.meshgrid(xs, ys, indexing="ij")
            cols = (X, Y, u, f, u_ex, f_ex)
        else:
            w.writerow(["s", "u_model", "f_model", "u_exact", "f_exact"])
            cols = (grid, u, f, u_ex, f_ex)
        flat = np.column_stack([np.ravel(c) for c in cols])
        w.writerows([_fmt(v) for v in row] for row in flat)


def read_bias_file(path) -> np.ndarray:
    """One decimal per line; blank lines and ``#`` comments are skipped."""
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                vals.append(float(line))
    return np.array(vals)
