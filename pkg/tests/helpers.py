"""Small analytic problems shared by the test modules."""

import time
from dataclasses import dataclass

import numpy as np

from ricstream.riccati import DesignSample, QuadRegularizer
from ricstream.streams import FunctionStream


def rel(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def constant_stream(phi=1.0, y=0.0):
    return FunctionStream(lambda s: np.array([[phi]]), lambda s: np.array([y]))


class TrigStream:
    """Design and target built from random sums of sinusoids in s."""

    def __init__(self, rng, n, m, terms=3):
        self.amp = rng.normal(size=(terms, m, n))
        self.freq = rng.uniform(0.5, 4.0, size=(terms, m, n))
        self.phase = rng.uniform(0, 2 * np.pi, size=(terms, m, n))
        self.yamp = rng.normal(size=(terms, m))
        self.yfreq = rng.uniform(0.5, 4.0, size=(terms, m))
        self.yphase = rng.uniform(0, 2 * np.pi, size=(terms, m))
        self.domain = (0.0, np.inf)

    def design(self, s):
        return np.sum(self.amp * np.cos(self.freq * s + self.phase), axis=0)

    def target(self, s):
        return np.sum(self.yamp * np.sin(self.yfreq * s + self.yphase), axis=0)

    def sample(self, s):
        return DesignSample(self.design(s), self.target(s))


@dataclass
class RandomProblem:
    reg: QuadRegularizer
    lam: float
    stream: TrigStream


def random_problem(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 11))
    m = int(rng.integers(1, 4))
    B = rng.normal(size=(n, n))
    M = B.T @ B / n + 0.5 * np.eye(n)
    c = rng.normal(size=n)
    lam = float(rng.uniform(0.5, 2.0))
    return RandomProblem(QuadRegularizer(0.5 * (M + M.T), c), lam, TrigStream(rng, n, m))


SUITE_SEEDS = range(20)


class Timed:
    def __init__(self, value, seconds):
        self.value = value
        self.seconds = seconds


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    value = fn(*args, **kwargs)
    return Timed(value, time.perf_counter() - t0)
