import math

import mpmath
import numpy as np
import pytest
from scipy import integrate as si
from scipy import special as sp
from scipy import stats

from fracheat.errors import DomainError
from fracheat.kernels import (KernelParams, mass_profile, phi, phi_lr_norm, phi_scaled, spatial_fourier_phi,
                              symbol)
from fracheat.quadrature import QuadratureSpec, gauss_jacobi_01, integrate
from fracheat.special import (ball_volume, heat_ball_mass, log_gamma, mbar_constant, offset_ball_floor,
                              partial_beta, ring_expectation, ring_probability, riesz_constant, sharp_constant,
                              sphere_area)


# special functions ---------------------------------------------------------------

@pytest.mark.parametrize("x", [1e-8, 0.1, 0.5, 1.0, 2.0, 3.7, 10.0, 171.3, 1e5])
def test_log_gamma_matches_scipy(x):
    assert log_gamma(x) == pytest.approx(sp.gammaln(x), rel=1e-13, abs=1e-14)


def test_log_gamma_examples_and_domain():
    assert log_gamma(1.0) == 0.0
    assert log_gamma(2.0) == 0.0
    assert log_gamma(0.5) == pytest.approx(0.5723649429247001, rel=1e-14)
    with pytest.raises(DomainError):
        log_gamma(0.0)
    with pytest.raises(DomainError):
        log_gamma(-1.5)


def test_sharp_constant_values():
    assert sharp_constant(1.0, 0.5) == pytest.approx(0.5, rel=1e-15)
    assert sharp_constant(2.0, 0.5) == pytest.approx(1.0 / 12.0, rel=1e-14)
    ref = mpmath.gamma(mpmath.mpf(5) / 4) / mpmath.gamma(mpmath.mpf(7) / 4)
    assert sharp_constant(0.5, 1.0 / 3.0) == pytest.approx(float(ref), rel=1e-13)
    assert mbar_constant(2.0, 0.5) == pytest.approx(1.0 / 6.0, rel=1e-14)
    assert mbar_constant(0.5, 1.0 / 3.0) == pytest.approx(float(mpmath.gamma(1.5) * ref), rel=1e-13)
    for lam in (0.0, 1.0, 1.5):
        with pytest.raises(DomainError):
            sharp_constant(1.0, lam)


def test_sharp_constant_range():
    # M <= 1 holds for alpha >= 1 only; below that Gamma dips under 1 on (1, 2)
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, lam = rng.uniform(0.01, 5), rng.uniform(0.01, 0.99)
        M = sharp_constant(a, lam)
        assert M > 0
        if a >= 1:
            assert M <= 1
    a, lam = 0.4373893440466856, 0.24207429646417772
    x = mpmath.mpf(a) * lam / (1 - lam)
    ref = mpmath.gamma(x + 1) / mpmath.gamma(x + a + 1)
    assert sharp_constant(a, lam) == pytest.approx(float(ref), rel=1e-13)
    assert sharp_constant(a, lam) > 1


def test_riesz_constant_and_geometry():
    n, a = 3, 1.0
    ref = 4 ** a * math.pi ** 1.5 * math.gamma(a) / math.gamma(1.5 - a)
    assert riesz_constant(n, a) == pytest.approx(ref, rel=1e-14)
    assert riesz_constant(3, 1.0) == pytest.approx(4.0 * math.pi, rel=1e-14)
    with pytest.raises(DomainError):
        riesz_constant(2, 1.0)
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(3) == pytest.approx(4.0 * math.pi)
    assert ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_ring_probability_matches_noncentral_chi2(n):
    d, sigma = 0.7, np.array([0.05, 0.3, 1.0, 4.0])
    R = np.array([0.5, 0.9, 1.3, 3.0])
    got = ring_probability(n, d, sigma[:, None], R[None, :])
    ref = stats.ncx2.cdf((R[None, :] / sigma[:, None]) ** 2, n, (d / sigma[:, None]) ** 2)
    np.testing.assert_allclose(got, ref, rtol=1e-9, atol=1e-13)


def test_ring_probability_tiny_sigma_stays_finite():
    # Bessel arguments beyond 1e9 go through the asymptotic branch
    sigma = 1e-6
    d = 1.0
    val = ring_probability(3, d, sigma, d + 2 * sigma)
    assert val == pytest.approx(stats.norm.cdf(2.0), rel=1e-6)


def test_heat_ball_mass_limits():
    assert heat_ball_mass(2, 0.0, 1.0, 1e6) == pytest.approx(1.0)
    # N(0, 2 s I) mass of the unit ball in n = 1 from the centre
    assert heat_ball_mass(1, 0.0, 0.5, 1.0) == pytest.approx(math.erf(1.0 / math.sqrt(2.0)) * 1.0, rel=1e-12)
    with pytest.raises(DomainError):
        heat_ball_mass(1, 0.0, 0.0, 1.0)


def test_ring_expectation_against_direct_quadrature():
    prof = lambda r: np.exp(-np.asarray(r) ** 2)
    d, sig = 0.8, 0.6
    ref = si.quad(lambda y: prof(abs(y)) * stats.norm.pdf(y, d, sig), -np.inf, np.inf)[0]
    assert ring_expectation(prof, 1, d, sig) == pytest.approx(ref, rel=1e-9)


def test_offset_ball_floor_against_normal_cdf():
    # n = 1: P(|Z - 1| < r) for Z ~ N(0, 1/2)
    r = 1.0 / (2.0 * math.sqrt(3.0))
    s = 1.0 / math.sqrt(2.0)
    ref = stats.norm.cdf(1 + r, 0, s) - stats.norm.cdf(1 - r, 0, s)
    assert offset_ball_floor(1) == pytest.approx(ref, rel=1e-10)


def test_partial_beta():
    ref = si.quad(lambda s: s ** 0.5 * (1 - s) ** 1.5, 0.2, 0.7)[0]
    assert partial_beta(1.5, 2.5, 0.2, 0.7) == pytest.approx(ref, rel=1e-10)


# quadrature ------------------------------------------------------------------------------

def test_integrate_endpoint_singularity_and_infinite_range():
    assert integrate(lambda x: x ** -0.5, 0.0, 1.0).value == pytest.approx(2.0, rel=1e-10)
    assert integrate(lambda x: np.exp(-x), 0.0, math.inf).value == pytest.approx(1.0, rel=1e-10)


def test_gauss_jacobi_weight():
    x, w = gauss_jacobi_01(16, -0.5)
    # int_0^1 u^-1/2 (1 + u) du = 2 + 2/3
    assert np.sum(w * (1 + x)) == pytest.approx(8.0 / 3.0, rel=1e-13)


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(rel_tol=0)
    with pytest.raises(DomainError):
        QuadratureSpec(max_panels=8)
    with pytest.raises(DomainError):
        QuadratureSpec(singularity_mode="midpoint")
    assert QuadratureSpec().with_(rel_tol=1e-6).rel_tol == 1e-6


# kernels -----------------------------------------------------------------------------------

def test_phi_values():
    assert phi(KernelParams(1, 1.0), 0.0, 1.0) == pytest.approx(1.0 / math.sqrt(4 * math.pi), rel=1e-15)
    assert phi(KernelParams(1, 1.0), 0.0, -1.0) == 0.0
    assert phi(KernelParams(2, 0.5), [0.3, 0.1], 0.0) == 0.0
    x, t, a = 0.7, 0.4, 1.3
    ref = t ** (a - 1) / math.gamma(a) * (4 * math.pi * t) ** -0.5 * math.exp(-x * x / (4 * t))
    assert phi(KernelParams(1, a), x, t) == pytest.approx(ref, rel=1e-14)


def test_phi_scaled_identity_and_mass():
    p = KernelParams(1, 0.6, 1.0, 1.0)
    assert phi_scaled(p, 0.3, 0.8) == pytest.approx(phi(p, 0.3, 0.8), rel=1e-15)
    q = KernelParams(1, 0.6, 0.5, 2.0)
    tau = 0.9
    mass = si.quad(lambda x: phi_scaled(q, x, tau), -np.inf, np.inf)[0]
    # a^-n b^-1 Phi(x/a, t/b) integrates over x to b^-1 (t/b)^(alpha-1)/Gamma(alpha)
    assert mass == pytest.approx(mass_profile(0.6, tau / 2.0) / 2.0, rel=1e-8)


def test_unit_time_marginal():
    tau = 0.37
    mass = si.quad(lambda x: phi(KernelParams(1, 1.7), x, tau), -np.inf, np.inf)[0]
    assert mass == pytest.approx(tau ** 0.7 / math.gamma(1.7), rel=1e-9)


def test_symbol_values():
    assert symbol(1, 1.0, 1.0, 0.0) == pytest.approx(1.0)
    assert symbol(1, 0.5, 1.0, 1.0) == pytest.approx((1 - 1j) ** -0.5, rel=1e-14)
    with pytest.raises(DomainError):
        symbol(1, 1.0, 0.0, 0.0)


def test_symbol_is_time_fourier_transform_of_fourier_phi():
    # int_0^inf e^{i s t} t^(alpha-1)/Gamma(alpha) e^{-t |y|^2} dt = (|y|^2 - i s)^-alpha
    a, y, s = 0.8, 1.2, 0.7
    re = si.quad(lambda t: spatial_fourier_phi(1, a, y, t) * math.cos(s * t), 0, np.inf, limit=400)[0]
    im = si.quad(lambda t: spatial_fourier_phi(1, a, y, t) * math.sin(s * t), 0, np.inf, limit=400)[0]
    assert complex(re, im) == pytest.approx(symbol(1, a, y, s), rel=1e-7)


@pytest.mark.parametrize("y", [0.0, 0.5, 1.0, 2.0])
def test_spatial_fourier_against_quadrature(y):
    t = 1.0
    ref = si.quad(lambda x: phi(KernelParams(1, 1.0), x, t) * math.cos(x * y), -40, 40, limit=200)[0]
    assert spatial_fourier_phi(1, 1.0, y, t) == pytest.approx(ref, abs=1e-6)
    assert spatial_fourier_phi(1, 1.0, 1.0, 1.0) == pytest.approx(math.exp(-1.0))


def test_phi_lr_norm():
    assert phi_lr_norm(1, 0.5, 1.0, 1.0) == pytest.approx(2.0 / math.sqrt(math.pi), rel=1e-14)
    assert phi_lr_norm(3, 1.0, 1.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    ref = si.dblquad(lambda x, t: phi(KernelParams(1, 1.0), x, t) ** 2, 0, 1, -30, 30, epsabs=1e-12)[0]
    assert phi_lr_norm(1, 1.0, 2.0, 1.0) == pytest.approx(math.sqrt(ref), rel=1e-6)
    with pytest.raises(DomainError):
        phi_lr_norm(3, 0.5, 3.0, 1.0)
