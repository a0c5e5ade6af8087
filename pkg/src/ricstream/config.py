"""``key = value`` experiment configuration with per-experiment defaults."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Optional

from .errors import ParseError, RangeError, UnknownKey

EXPERIMENTS = ("ode", "poisson", "scalar", "custom")

# Keys that change the learning problem itself; snapshots are tied to these.
PROBLEM_KEYS = (
    "experiment", "n_basis", "m_order", "T_final", "step_h", "lambda_f",
    "lambda_0", "lambda_T", "gamma", "kappa", "N_x", "seed", "noise_scale",
    "form", "basis_scale", "time_normalized", "scalar_target", "data_file",
)

_DEFAULTS = {
    "ode": dict(n_basis=301, T_final=100.0, step_h=1e-3, lambda_f=100.0,
                checkpoints=(25.0, 75.0, 100.0), form="information",
                time_normalized=True, oracle_points=100001, metric_points=1001),
    "poisson": dict(m_order=15, N_x=100, T_final=1.0, step_h=1e-4, lambda_f=40000.0,
                    kappa=0.01 / math.pi**2, noise_scale=0.05,
                    checkpoints=(0.25, 0.75, 1.0), form="covariance",
                    oracle_points=20001, metric_points=401),
    "scalar": dict(n_basis=1, T_final=1.0, step_h=1e-3, lambda_f=1.0,
                   checkpoints=(1.0,), oracle_points=10001, metric_points=1001),
    "custom": dict(n_basis=1, step_h=1e-3, lambda_f=1.0, oracle_points=10001,
                   metric_points=1001),
}


@dataclass
class ExperimentConfig:
    experiment: str = "scalar"
    n_basis: int = 1
    m_order: int = 15
    T_final: Optional[float] = None
    step_h: float = 1e-3
    lambda_f: float = 100.0
    lambda_0: float = 1.0
    lambda_T: float = 1.0
    gamma: tuple = (1.0,)
    kappa: float = 0.01 / math.pi**2
    N_x: int = 100
    seed: int = 0
    noise_scale: float = 0.0
    checkpoints: tuple = ()
    track_sc: bool = True
    out_dir: str = "out"
    form: str = "covariance"
    basis_scale: Optional[float] = None
    time_normalized: bool = False
    scalar_target: float = 1.0
    data_file: Optional[str] = None
    basis: str = "fourier1d"
    oracle_kind: str = "trapezoid"
    oracle_points: int = 10001
    metric_points: int = 1001

    @property
    def half_order(self) -> int:
        return (self.n_basis - 1) // 2

    def digest(self) -> bytes:
        """SHA-256 over the problem-defining keys in a canonical form."""
        lines = [f"{k}={_canonical(getattr(self, k))}" for k in PROBLEM_KEYS]
        return hashlib.sha256("\n".join(lines).encode()).digest()

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise RangeError(f"experiment must be one of {EXPERIMENTS}")
        if not self.step_h > 0:
            raise RangeError("step_h must be positive")
        if self.T_final is not None and not self.T_final > 0:
            raise RangeError("T_final must be positive")
        if self.lambda_f < 0 or self.lambda_0 < 0 or self.lambda_T < 0:
            raise RangeError("belief weights must be nonnegative")
        if any(not g > 0 for g in self.gamma):
            raise RangeError("gamma entries must be positive")
        if self.noise_scale < 0:
            raise RangeError("noise_scale must be nonnegative")
        if self.n_basis < 1 or self.m_order < 1 or self.N_x < 1:
            raise RangeError("n_basis, m_order and N_x must be positive")
        if self.experiment == "ode" and self.n_basis % 2 == 0:
            raise RangeError("n_basis must be odd for the Fourier basis")
        if self.basis_scale is not None and not self.basis_scale > 0:
            raise RangeError("basis_scale must be positive")
        if self.form not in ("covariance", "information"):
            raise RangeError("form must be 'covariance' or 'information'")
        if self.oracle_kind not in ("trapezoid", "montecarlo"):
            raise RangeError("oracle_kind must be 'trapezoid' or 'montecarlo'")
        if self.oracle_points < 2 or self.metric_points < 2:
            raise RangeError("oracle_points and metric_points must be at least 2")
        if self.basis not in ("fourier1d", "constant"):
            raise RangeError("basis must be 'fourier1d' or 'constant'")
        if self.experiment == "custom" and not self.data_file:
            raise RangeError("custom experiments need data_file")
        cps = list(self.checkpoints)
        if cps != sorted(cps) or any(c < 0 for c in cps):
            raise RangeError("checkpoints must be sorted ascending and nonnegative")
        if self.T_final is not None and cps and cps[-1] > self.T_final:
            raise RangeError("checkpoints must lie within [0, T_final]")
        return self


def _canonical(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(_canonical(x) for x in v)
    return str(v)


def _to_bool(text):
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _to_floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _to_opt_float(text):
    return None if text.lower() in ("none", "") else float(text)


_CONVERTERS = {
    "experiment": str, "n_basis": int, "m_order": int, "T_final": _to_opt_float,
    "step_h": float, "lambda_f": float, "lambda_0": float, "lambda_T": float,
    "gamma": _to_floats, "kappa": float, "N_x": int, "seed": int,
    "noise_scale": float, "checkpoints": _to_floats, "track_sc": _to_bool,
    "out_dir": str, "form": str, "basis_scale": _to_opt_float,
    "time_normalized": _to_bool, "scalar_target": float, "data_file": str,
    "basis": str, "oracle_kind": str, "oracle_points": int, "metric_points": int,
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines; experiment defaults fill unset keys."""
    given = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ParseError("expected 'key = value'", line=lineno)
        if key not in _CONVERTERS:
            raise UnknownKey(f"unknown key {key!r}", line=lineno)
        if key in given:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        try:
            given[key] = _CONVERTERS[key](value)
        except ValueError as exc:
            raise ParseError(f"bad value for {key}: {exc}", line=lineno) from None
    experiment = given.get("experiment", "scalar")
    if experiment not in EXPERIMENTS:
        raise RangeError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")
    merged = dict(_DEFAULTS[experiment])
    merged.update(given)
    merged["experiment"] = experiment
    cfg = ExperimentConfig(**merged)
    if "checkpoints" not in given and cfg.T_final is not None and not cfg.checkpoints:
        cfg.checkpoints = (cfg.T_final,)
    return cfg.validate()


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())
