"""Deterministic data streams: analytic ground truths, gridded files, and a
counter-based noise layer.

Every ``sample(s)`` is a pure function of (s, configuration, seed), which is
what lets retract replay exactly the data that evolve consumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .basis import sinpi
from .errors import OffLattice, ParseError, StreamOutOfRange
from .riccati import DesignSample

KAPPA_DEFAULT = 0.01 / math.pi**2

# (j, k, weight) of the manufactured Poisson solution
POISSON_MODES = ((3, 8, -0.8), (9, 7, 0.4), (6, 10, -0.3))


def ode_truth(s):
    """u(s) = exp(-0.05 s) sin(0.4 pi s) and f = u'' + u."""
    s = np.asarray(s, dtype=np.float64)
    w = 0.4 * math.pi
    decay = np.exp(-0.05 * s)
    u = decay * np.sin(w * s)
    f = decay * ((1.0025 - w * w) * np.sin(w * s) - 0.04 * math.pi * np.cos(w * s))
    return u, f


def poisson_truth(x, y, kappa: float = KAPPA_DEFAULT):
    """Manufactured solution u on [0,1]^2 and f = -kappa * Laplacian(u)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    u = np.zeros(np.broadcast(x, y).shape)
    f = np.zeros_like(u)
    for j, k, a in POISSON_MODES:
        mode = sinpi(j * x) * sinpi(k * y)
        u = u + a * mode
        f = f + a * kappa * math.pi**2 * (j * j + k * k) * mode
    return u, f


@dataclass(frozen=True)
class NoiseSpec:
    seed: int
    scale: float
    grid_spacing: float

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError("noise scale must be nonnegative")
        if not self.grid_spacing > 0:
            raise ValueError("noise grid spacing must be positive")

    def lattice_index(self, s: float) -> int:
        return int(round(s / self.grid_spacing))


_COUNTER_MASK = (1 << 256) - 1


def noise_vector(spec: NoiseSpec, lattice_index: int, rows: int) -> np.ndarray:
    """Scaled standard-normal deviates for ``rows`` rows at one lattice point.

    A Philox generator keyed on the seed with its counter set to the lattice
    index, so any point can be regenerated in isolation.
    """
    if spec.scale == 0:
        return np.zeros(rows)
    bitgen = np.random.Philox(key=spec.seed & ((1 << 128) - 1),
                              counter=lattice_index & _COUNTER_MASK)
    return spec.scale * np.random.Generator(bitgen).standard_normal(rows)


def noise_at(spec: NoiseSpec, lattice_index: int, row: int) -> float:
    return float(noise_vector(spec, lattice_index, row + 1)[row])


class StreamSource:
    """Target values y(s) over a closed domain, optionally with noise."""

    domain: tuple = (0.0, math.inf)
    noise: Optional[NoiseSpec] = None

    def clean_target(self, s: float) -> np.ndarray:
        raise NotImplementedError

    def check_domain(self, s: float) -> None:
        lo, hi = self.domain
        tol = 1e-12 * max(1.0, abs(lo), abs(hi) if math.isfinite(hi) else 1.0)
        if not (lo - tol <= s <= hi + tol):
            raise StreamOutOfRange(f"stream time {s} outside [{lo}, {hi}]")

    def targets(self, s) -> np.ndarray:
        """Targets at each time of ``s`` stacked as (len(s), m)."""
        return np.vstack([self.target(float(v)) for v in np.atleast_1d(s)])

    def target(self, s: float) -> np.ndarray:
        self.check_domain(s)
        y = self.clean_target(s)
        if self.noise is not None and self.noise.scale > 0:
            y = y + noise_vector(self.noise, self.noise.lattice_index(s), y.shape[0])
        return y


class OdeAnalytic(StreamSource):
    """y(s) = [f(s)] for the damped-sine boundary-value problem."""

    def __init__(self, T: float, noise: Optional[NoiseSpec] = None):
        self.domain = (0.0, float(T))
        self.noise = noise

    def clean_target(self, s):
        return np.array([float(ode_truth(s)[1])])

    def targets(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        if self.noise is not None and self.noise.scale > 0:
            return super().targets(s)
        for v in (s.min(), s.max()):
            self.check_domain(float(v))
        return ode_truth(s)[1][:, None]


class PoissonAnalytic(StreamSource):
    """y(y) = -[f(x_1, y), ..., f(x_{N+1}, y)] along a fixed x grid."""

    def __init__(self, x_grid, kappa: float = KAPPA_DEFAULT, noise: Optional[NoiseSpec] = None):
        self.x_grid = np.asarray(x_grid, dtype=np.float64)
        self.kappa = kappa
        self.domain = (0.0, 1.0)
        self.noise = noise

    def clean_target(self, y):
        return -poisson_truth(self.x_grid, y, self.kappa)[1]


class Gridded(StreamSource):
    """Tabulated targets on a lattice t0 + i * spacing; no interpolation."""

    def __init__(self, spacing: float, values, t0: float = 0.0, noise: Optional[NoiseSpec] = None):
        if not spacing > 0:
            raise ValueError("grid spacing must be positive")
        self.spacing = float(spacing)
        self.t0 = float(t0)
        self.values = np.atleast_2d(np.asarray(values, dtype=np.float64))
        self.domain = (self.t0, self.t0 + (self.values.shape[0] - 1) * self.spacing)
        self.noise = noise

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def clean_target(self, s):
        r = (s - self.t0) / self.spacing
        i = round(r)
        if abs(r - i) > 1e-9 * max(1.0, abs(r)):
            raise OffLattice(f"time {s} is not on the lattice t0={self.t0}, spacing={self.spacing}")
        return self.values[i].copy()


class Custom(StreamSource):
    def __init__(self, callback: Callable[[float], np.ndarray], domain=(0.0, math.inf),
                 noise: Optional[NoiseSpec] = None):
        self.callback = callback
        self.domain = tuple(domain)
        self.noise = noise

    def clean_target(self, s):
        return np.atleast_1d(np.asarray(self.callback(s), dtype=np.float64))


def stream_sample(source: StreamSource, spec, s: float) -> DesignSample:
    """Applied design of ``spec`` and the (possibly noisy) target at ``s``."""
    y = source.target(s)
    return DesignSample(spec.applied(s), y)


class SourceStream:
    """Pairs a target source with a basis so it can drive the Riccati core."""

    def __init__(self, source: StreamSource, spec):
        self.source = source
        self.spec = spec

    @property
    def domain(self):
        return self.source.domain

    def sample(self, s: float) -> DesignSample:
        return stream_sample(self.source, self.spec, s)


class FunctionStream:
    """Stream from two callables s -> design (m x n) and s -> target (m,)."""

    def __init__(self, design: Callable, target: Callable, domain=(0.0, math.inf)):
        self.design = design
        self.target = target
        self.domain = tuple(domain)

    def sample(self, s: float) -> DesignSample:
        lo, hi = self.domain
        if not lo - 1e-12 <= s <= hi + 1e-12:
            raise StreamOutOfRange(f"stream time {s} outside [{lo}, {hi}]")
        return DesignSample(self.design(s), self.target(s))


def read_gridded(path) -> Gridded:
    """Parse a ``# ricstream v1 m=<m> h2=<spacing> t0=<start>`` text file."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# ricstream v1"):
        raise ParseError("missing '# ricstream v1' header", line=1)
    fields = {}
    for tok in lines[0][len("# ricstream v1"):].split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise ParseError(f"malformed header token {tok!r}", line=1)
        fields[key] = val
    try:
        m = int(fields["m"])
        spacing = float(fields["h2"])
        t0 = float(fields.get("t0", "0"))
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad header: {exc}", line=1) from None
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            vals = [float(v) for v in line.split()]
        except ValueError:
            raise ParseError("non-numeric target", line=lineno) from None
        if len(vals) != m:
            raise ParseError(f"expected {m} values, found {len(vals)}", line=lineno)
        rows.append(vals)
    if not rows:
        raise ParseError("no data rows")
    return Gridded(spacing, np.array(rows), t0=t0)


def write_gridded(path, spacing: float, values, t0: float = 0.0) -> None:
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    out = [f"# ricstream v1 m={values.shape[1]} h2={spacing!r} t0={t0!r}"]
    out += [" ".join(repr(float(v)) for v in row) for row in values]
    Path(path).write_text("\n".join(out) + "\n")
