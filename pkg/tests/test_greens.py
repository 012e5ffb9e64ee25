import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import k0, k1

from spikelab import greens
from spikelab.errors import DomainError, SingularPoint

Z = np.concatenate([np.geomspace(1e-6, 2, 40), np.linspace(2, 30, 60), np.geomspace(30, 600, 20)])


def test_bessel_against_scipy():
    a, b = greens.bessel_k0k1(Z)
    assert np.max(np.abs(a / k0(Z) - 1)) < 1e-12
    assert np.max(np.abs(b / k1(Z) - 1)) < 1e-12


@pytest.mark.parametrize("z", [0.3, 1.9, 2.1, 7.5, 29.0, 31.0])
def test_bessel_against_integral_representation(z):
    # K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt, scaled by e^z for range
    top = math.acosh(1 + 60 / z) + 1  # integrand below e^-60 past here
    g = lambda t: math.exp(-z * (math.cosh(t) - 1))
    f0 = quad(g, 0, top, epsabs=0, epsrel=1e-13, limit=200)[0]
    f1 = quad(lambda t: g(t) * math.cosh(t), 0, top, epsabs=0, epsrel=1e-13, limit=200)[0]
    a, b = greens.bessel_k0k1(z)
    assert a * math.exp(z) == pytest.approx(f0, rel=1e-11)
    assert b * math.exp(z) == pytest.approx(f1, rel=1e-11)


def test_bessel_wronskian_like_identity():
    # K0' = -K1, checked by central differences across the branch switches
    for z in (1.5, 1.999, 2.001, 10.0, 29.99, 30.01, 80.0):
        h = 1e-5 * z
        d = (greens.bessel_k0(z + h) - greens.bessel_k0(z - h)) / (2 * h)
        assert d == pytest.approx(-greens.bessel_k1(z), rel=1e-8)


def test_bessel_rejects_nonpositive():
    with pytest.raises(DomainError):
        greens.bessel_k0(0.0)
    with pytest.raises(DomainError):
        greens.bessel_k0k1(np.array([1.0, -1.0]))


def test_gradient_against_finite_difference():
    p = greens.GreenParams(0.7)
    x, z = np.array([0.4, -1.1]), np.array([-0.3, 0.2])
    h = 1e-6
    fd = [(greens.green_free(p, x + h * e, z) - greens.green_free(p, x - h * e, z)) / (2 * h)
          for e in np.eye(2)]
    assert np.allclose(greens.green_gradient(p, x, z), fd, rtol=1e-7, atol=0)


def test_helmholtz_residual_is_second_order():
    p = greens.GreenParams(1.3)
    x0 = np.array([0.9, 0.5])
    z = np.zeros(2)

    def res(h):
        g = lambda dx, dy: greens.green_free(p, x0 + [dx, dy], z)
        lap = (g(h, 0) + g(-h, 0) + g(0, h) + g(0, -h) - 4 * g(0, 0)) / h ** 2
        return abs(lap - p.sigma ** 2 * g(0, 0))

    r1, r2 = res(0.02), res(0.01)
    assert r1 < 1e-3
    assert r1 / r2 == pytest.approx(4.0, rel=0.05)


def test_singular_point():
    with pytest.raises(SingularPoint):
        greens.green_free(greens.GreenParams(1.0), [1.0, 2.0], [1.0, 2.0])


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 5.0), st.floats(1e-3, 20.0), st.floats(1e-3, 20.0))
def test_green_monotone_in_distance(sigma, r1, r2):
    p = greens.GreenParams(sigma)
    if abs(r1 - r2) < 1e-9 * max(r1, r2):
        return
    g1 = greens.green_free(p, [r1, 0.0], [0.0, 0.0])
    g2 = greens.green_free(p, [0.0, r2], [0.0, 0.0])
    assert (g1 > g2) == (r1 < r2)


def test_boundary_bound_and_csv(tmp_path):
    p = greens.GreenParams(2.0)
    assert greens.boundary_correction_bound(p, [0.1, 0.0], 1.0) == pytest.approx(k0(3.6) / (2 * np.pi), rel=1e-12)
    with pytest.raises(DomainError):
        greens.boundary_correction_bound(p, [2.0, 0.0], 1.0)
    greens.write_kernel_csv(p, [0.5, 1.0], tmp_path / "g.csv")
    rows = np.loadtxt(tmp_path / "g.csv", delimiter=",", skiprows=1)
    assert rows[1, 1] == pytest.approx(k0(2.0) / (2 * np.pi), rel=1e-12)
