import math

import numpy as np
import pytest

from ricstream.basis import Fourier1D, SineProduct2D
from ricstream.errors import OffLattice, ParseError, StreamOutOfRange
from ricstream.streams import (
    Custom,
    Gridded,
    NoiseSpec,
    OdeAnalytic,
    PoissonAnalytic,
    SourceStream,
    noise_at,
    noise_vector,
    ode_truth,
    poisson_truth,
    read_gridded,
    stream_sample,
    write_gridded,
)

KAPPA = 0.01 / math.pi**2


def test_ode_truth_examples():
    u, f = ode_truth(0.0)
    assert u == 0.0 and f == pytest.approx(-0.04 * math.pi, rel=1e-14)
    u, f = ode_truth(2.5)
    assert abs(u) < 1e-15
    assert f == pytest.approx(math.exp(-0.125) * 0.04 * math.pi, rel=1e-12)
    assert abs(ode_truth(100.0)[0]) < 1e-15


def test_ode_truth_residual(rng):
    d = 1e-4
    s = rng.uniform(0, 100, size=100)
    u = ode_truth(s)[0]
    upp = (ode_truth(s + d)[0] - 2 * u + ode_truth(s - d)[0]) / d**2
    assert np.max(np.abs(ode_truth(s)[1] - (upp + u))) <= 1e-6


def test_poisson_truth_boundary():
    for x, y in ((0, 0.3), (1, 0.7), (0.4, 0), (0.2, 1)):
        u, f = poisson_truth(x, y)
        assert abs(u) < 1e-14 and abs(f) < 1e-14


def test_poisson_coefficients():
    x = np.linspace(0.05, 0.95, 7)
    y = 0.37
    _, f = poisson_truth(x, y)
    expected = (-0.584 * np.sin(3 * np.pi * x) * np.sin(8 * np.pi * y)
                + 0.52 * np.sin(9 * np.pi * x) * np.sin(7 * np.pi * y)
                - 0.408 * np.sin(6 * np.pi * x) * np.sin(10 * np.pi * y))
    np.testing.assert_allclose(f, expected, rtol=1e-12, atol=1e-15)


def test_poisson_truth_finite_difference():
    d = 1e-4
    x, y = 0.5, 0.25
    u = lambda a, b: poisson_truth(a, b)[0]
    lap = (u(x + d, y) + u(x - d, y) + u(x, y + d) + u(x, y - d) - 4 * u(x, y)) / d**2
    assert poisson_truth(x, y)[1] == pytest.approx(-KAPPA * lap, abs=1e-4)


def test_ode_stream_sample():
    spec = Fourier1D(3)
    smp = stream_sample(OdeAnalytic(100.0), spec, 1.7)
    assert smp.target.shape == (1,)
    assert smp.target[0] == ode_truth(1.7)[1]
    np.testing.assert_array_equal(smp.phi_applied, spec.applied(1.7))


def test_poisson_stream_sign_and_boundary():
    spec = SineProduct2D.uniform(4, KAPPA, 20)
    src = PoissonAnalytic(spec.x_grid, KAPPA)
    smp = stream_sample(src, spec, 0.31)
    np.testing.assert_allclose(smp.target, -poisson_truth(np.array(spec.x_grid), 0.31)[1])
    assert abs(smp.target[0]) < 1e-15 and abs(smp.target[-1]) < 1e-15
    assert not smp.phi_applied[0].any()
    assert np.abs(smp.phi_applied[-1]).max() < 1e-15


def test_poisson_noise_keeps_design():
    spec = SineProduct2D.uniform(3, KAPPA, 10)
    clean = PoissonAnalytic(spec.x_grid, KAPPA)
    noisy = PoissonAnalytic(spec.x_grid, KAPPA, NoiseSpec(5, 0.05, 5e-5))
    a, b = stream_sample(clean, spec, 0.5), stream_sample(noisy, spec, 0.5)
    np.testing.assert_array_equal(a.phi_applied, b.phi_applied)
    assert not np.array_equal(a.target, b.target)


def test_zero_noise_is_identity():
    spec = Fourier1D(2)
    a = stream_sample(OdeAnalytic(10.0), spec, 3.3)
    b = stream_sample(OdeAnalytic(10.0, NoiseSpec(1, 0.0, 0.1)), spec, 3.3)
    np.testing.assert_array_equal(a.target, b.target)
    assert noise_at(NoiseSpec(9, 0.0, 0.5), 12, 3) == 0.0


def test_noise_determinism():
    spec = NoiseSpec(42, 0.05, 5e-5)
    assert noise_at(spec, 1234, 7) == noise_at(spec, 1234, 7)
    np.testing.assert_array_equal(noise_vector(spec, 99, 5), noise_vector(spec, 99, 5))
    assert noise_at(spec, 1234, 7) != noise_at(NoiseSpec(43, 0.05, 5e-5), 1234, 7)
    assert noise_at(spec, 1234, 2) == noise_vector(spec, 1234, 10)[2]


def test_noise_depends_on_lattice_index_only():
    spec = NoiseSpec(3, 1.0, 0.1)
    src = OdeAnalytic(10.0, spec)
    base = OdeAnalytic(10.0)
    shift = src.target(0.3) - base.target(0.3)
    shift2 = src.target(0.3 + 1e-12) - base.target(0.3 + 1e-12)
    np.testing.assert_array_equal(shift, shift2)
    assert shift[0] == noise_at(spec, 3, 0)


def test_noise_moments():
    spec = NoiseSpec(2024, 0.05, 1.0)
    draws = np.concatenate([noise_vector(spec, i, 1000) for i in range(1000)])
    assert abs(draws.mean()) < 0.005
    assert abs(draws.std() / 0.05 - 1) < 0.005


def test_stream_domain():
    with pytest.raises(StreamOutOfRange):
        OdeAnalytic(10.0).target(10.5)
    with pytest.raises(StreamOutOfRange):
        PoissonAnalytic((0.0, 1.0), KAPPA).target(-0.1)


def test_gridded_lattice():
    src = Gridded(0.5, [[1.0], [2.0], [3.0]])
    assert src.target(1.0)[0] == 3.0
    with pytest.raises(OffLattice):
        src.target(0.25)
    with pytest.raises(StreamOutOfRange):
        src.target(1.5)


def test_gridded_file_roundtrip(tmp_path):
    values = np.array([[0.1, -2.0], [3.5, 1e-17], [1 / 3, 7.0]])
    path = tmp_path / "data.txt"
    write_gridded(path, 0.25, values, t0=0.5)
    src = read_gridded(path)
    assert src.spacing == 0.25 and src.t0 == 0.5 and src.m == 2
    np.testing.assert_array_equal(src.values, values)


def test_gridded_file_errors(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1 2 3\n")
    with pytest.raises(ParseError):
        read_gridded(path)
    path.write_text("# ricstream v1 m=2 h2=0.5 t0=0\n1 2\n3\n")
    with pytest.raises(ParseError, match="line 3"):
        read_gridded(path)


def test_custom_source_and_source_stream():
    spec = Fourier1D(1)
    stream = SourceStream(Custom(lambda s: [2 * s], (0.0, 1.0)), spec)
    smp = stream.sample(0.25)
    assert smp.target[0] == 0.5
    assert stream.domain == (0.0, 1.0)
