import math

import numpy as np
import pytest
from scipy import integrate as si
from scipy import stats

from fracheat.errors import DomainError
from fracheat.fields import (Bump, Cylinder, HeatKernelField, ParaboloidPower, Rescaled, eval_field,
                             make_exact_solution, make_indicator_similarity)
from fracheat.kernels import KernelParams, phi, phi_scaled
from fracheat.potentials import (PotentialField, SlabRegion, j_alpha, j_scaled, riemann_liouville, riesz,
                                 v_alpha)
from fracheat.quadrature import QuadratureSpec
from fracheat.special import riesz_constant


def test_time_indicator_closed_form():
    one = Cylinder(1)
    assert j_alpha(one, 1, 0.5, 0.0, 1.0) == pytest.approx(2.0 / math.sqrt(math.pi), rel=1e-10)
    assert j_alpha(one, 1, 1.0, 0.3, 1.7) == pytest.approx(1.7, rel=1e-10)
    gj = QuadratureSpec(singularity_mode="gauss-jacobi")
    assert j_alpha(one, 1, 0.5, 0.0, 1.0, gj) == pytest.approx(2.0 / math.sqrt(math.pi), rel=1e-10)


def test_exact_solution_potential():
    g = make_exact_solution(1.0, 0.5)
    # g = t/2, J_1 g = t^2/4
    assert j_alpha(g, 1, 1.0, 0.0, 1.0) == pytest.approx(0.25, rel=1e-10)


def test_zero_for_nonpositive_times():
    f = Bump(1)
    assert j_alpha(f, 1, 0.7, 0.2, -0.5) == 0.0
    assert j_alpha(f, 1, 0.7, 0.2, 0.0) == 0.0


def _brute_force_1d(f, alpha, x, t):
    def g(y, s):
        return phi(KernelParams(1, alpha), x - y, t - s) * float(f.value(np.array([[y]]), np.array([s]))[0])
    return si.dblquad(g, 0, t, lambda s: -math.sqrt(s), lambda s: math.sqrt(s), epsabs=1e-10, epsrel=1e-8)[0]


def test_paraboloid_against_brute_force_quadrature():
    f = ParaboloidPower(1, 1.0, 0.5, truncate=True)
    alpha, x, t = 1.5, 0.3, 0.8
    ref = _brute_force_1d(f, alpha, x, t)
    assert j_alpha(f, 1, alpha, x, t) == pytest.approx(ref, rel=1e-4)


def test_kernel_semigroup_brute_force_point():
    a, b, x, t = 1.0, 1.0, 0.4, 1.2
    inner = lambda y, s: phi(KernelParams(1, a), x - y, t - s) * phi(KernelParams(1, b), y, s)
    ref = si.dblquad(inner, 0, t, -12, 12, epsabs=1e-12, epsrel=1e-10)[0]
    assert ref == pytest.approx(phi(KernelParams(1, a + b), x, t), rel=1e-6)
    assert j_alpha(HeatKernelField(1, b), 1, a, x, t) == pytest.approx(ref, rel=1e-6)


def test_operator_semigroup():
    f = Bump(1)
    x, t = np.array([0.0, 0.6]), np.array([0.5, 1.3])
    inner = PotentialField(f, 0.5)
    twice = j_alpha(inner, 1, 0.5, x, t)
    once = j_alpha(f, 1, 1.0, x, t)
    np.testing.assert_allclose(twice, once, rtol=1e-7)


def test_monotonicity():
    small, big = Bump(1, "gauss", 1.0, 0.0, 1.0, 0.5), Bump(1, "gauss", 1.0, 0.0, 1.0, 1.0)
    x = np.linspace(-2, 2, 7)
    t = np.full(7, 0.8)
    assert np.all(j_alpha(small, 1, 0.7, x, t) <= j_alpha(big, 1, 0.7, x, t))


def test_scaling_covariance():
    child = make_indicator_similarity(1, 0.5, 0.5)
    K, T, alpha, lam = 2.0, 0.5, 0.5, 0.5
    g = Rescaled(child, K, lam, alpha, T)
    x, t = 0.2, 0.9
    c = K ** (1 / (1 - lam)) * T ** (alpha * lam / (1 - lam))
    ref = c * T ** alpha * j_alpha(child, 1, alpha, x / math.sqrt(T), t / T)
    assert j_alpha(g, 1, alpha, x, t) == pytest.approx(ref, rel=1e-8)


def test_scaled_operator_against_nested_quadrature():
    f = Bump(1)
    alpha, a, b, x, t = 0.7, 0.5, 2.0, 0.1, 0.9

    # the scaled kernel is b^-alpha (t-s)^(alpha-1)/Gamma(alpha) times a Gaussian of variance 2 a^2 (t-s)/b
    def space(s):
        sig = math.sqrt(max(2 * a * a * (t - s) / b, 0.0))
        if sig == 0:
            return float(f.value(np.array([[x]]), np.array([s]))[0])
        return si.quad(lambda y: float(f.value(np.array([[y]]), np.array([s]))[0]) * stats.norm.pdf(y, x, sig),
                       x - 12 * sig, x + 12 * sig, epsabs=1e-13, epsrel=1e-11)[0]

    ref = si.quad(space, 0, t, weight="alg", wvar=(0, alpha - 1), epsabs=1e-12, epsrel=1e-10, limit=200)[0]
    ref *= b ** -alpha / math.gamma(alpha)
    assert j_scaled(f, 1, alpha, a, b, x, t) == pytest.approx(ref, rel=1e-8)
    assert j_scaled(f, 1, alpha, 1.0, 1.0, x, t) == pytest.approx(j_alpha(f, 1, alpha, x, t), rel=1e-12)


def test_riemann_liouville():
    one = Cylinder(1)
    assert riemann_liouville(one, 1.0, 0.0, 2.0) == pytest.approx(2.0, rel=1e-10)
    assert riemann_liouville(one, 0.5, 0.0, 1.0) == pytest.approx(2.0 / math.sqrt(math.pi), rel=1e-10)
    f, g = Bump(1), Cylinder(1, 1.0, 0.2, 0.7)
    x, t = np.array([0.0, 0.5]), np.array([0.6, 0.9])
    lhs = riemann_liouville(f + g, 0.6, x, t)
    np.testing.assert_allclose(lhs, riemann_liouville(f, 0.6, x, t) + riemann_liouville(g, 0.6, x, t),
                               rtol=1e-9)
    # pointwise oracle: int_0^t (t-s)^(alpha-1)/Gamma(alpha) f(x, s) ds
    ref = si.quad(lambda s: (0.9 - s) ** -0.4 / math.gamma(0.6) * float(f.value(np.array([[0.5]]),
                                                                             np.array([s]))[0]), 0, 0.9)[0]
    assert lhs[1] - riemann_liouville(g, 0.6, 0.5, 0.9) == pytest.approx(ref, rel=1e-7)


def test_riesz_newtonian_ball():
    ball = Cylinder(3, 1.0)
    assert riesz(ball, 3, 1.0, [0.0, 0.0, 0.0], 1.0) == pytest.approx(0.5, rel=1e-8)
    assert riesz(ball, 3, 1.0, [2.0, 0.0, 0.0], 1.0) == pytest.approx(1.0 / 6.0, rel=1e-8)
    zero = Cylinder(3, 1.0, 0.0, 1.0, 0.0)
    assert riesz(zero, 3, 1.0, [0.0, 0.0, 0.0], 0.5) == 0.0
    with pytest.raises(DomainError):
        riesz(ball, 2, 1.0, [0.0, 0.0], 1.0)


def test_riesz_time_marginal_of_scaled_kernel():
    n, alpha, b = 3, 0.75, 0.5
    xi = np.array([0.6, 0.0, 0.0])
    p = KernelParams(n, alpha, 1.0, b)
    val = si.quad(lambda tau: phi_scaled(p, xi, tau), 0, np.inf, limit=200)[0]
    assert val == pytest.approx(0.6 ** (2 * alpha - n) / riesz_constant(n, alpha), rel=1e-8)


def test_truncated_potential():
    one = Cylinder(1)
    slab = SlabRegion(0.0, 2.0)
    assert v_alpha(one, 1, 1.0, slab, 0.0, 1.0) == pytest.approx(1.0, rel=1e-10)
    g = make_exact_solution(0.5, 0.5)
    x, t = np.array([0.0, 1.0]), np.array([0.5, 1.5])
    np.testing.assert_allclose(v_alpha(g, 1, 0.5, slab, x, t), j_alpha(g, 1, 0.5, x, t), rtol=1e-12)
    # starting the slab at a > 0 drops the history before a
    assert v_alpha(one, 1, 1.0, SlabRegion(0.5, 2.0), 0.0, 1.0) == pytest.approx(0.5, rel=1e-10)
    with pytest.raises(DomainError):
        v_alpha(one, 1, 1.0, slab, 0.0, 2.5)
    with pytest.raises(DomainError):
        SlabRegion(1.0, 0.5)


def test_indicator_in_two_dimensions_against_brute_force():
    f = Cylinder(2, 1.0, 0.0, 1.0)
    alpha, t = 1.0, 1.0
    # J_1 of chi{|x|<1, 0<t<1} at x=0: int_0^1 P(|N(0, 2s I)| < 1) ds = int_0^1 (1 - e^(-1/(4s))) ds
    ref = si.quad(lambda s: 1 - math.exp(-1 / (4 * s)), 0, 1)[0]
    assert j_alpha(f, 2, alpha, [0.0, 0.0], t) == pytest.approx(ref, rel=1e-9)
    assert eval_field(f, [0.0, 0.0], 0.5) == 1.0
