import math

import numpy as np
import pytest
from scipy import integrate as si

from fracheat.errors import DomainError, ToleranceError
from fracheat.fields import Bump, HeatKernelField, make_exact_solution
from fracheat.inverse import (InverseSpec, calibrate_constant, inverse_scan, j_inverse, marchaud_constant,
                              marchaud_difference, marchaud_integral, marchaud_integral_series, recover)
from fracheat.potentials import PotentialField


def test_marchaud_integral_against_series_and_scipy():
    assert marchaud_integral(0.5, 2) == pytest.approx(marchaud_integral_series(0.5, 2), rel=1e-12)
    assert marchaud_integral(1.0, 2) == pytest.approx(2 * math.log(2), rel=1e-12)
    f = lambda s: s ** -1.75 * (-math.expm1(-s)) ** 3
    ref = si.quad(f, 0, 1, limit=200)[0] + si.quad(f, 1, np.inf, limit=200)[0]
    assert marchaud_integral(0.75, 3) == pytest.approx(ref, rel=1e-9)
    with pytest.raises(DomainError):
        marchaud_integral(2.0, 2)
    with pytest.raises(DomainError):
        marchaud_integral_series(1.0, 2)


def test_marchaud_constant():
    # A(1/2, 1) = Gamma(-1/2) (-1) = 2 sqrt(pi)
    assert marchaud_constant(1, 0.5, 1) == pytest.approx(1 / (4 * math.pi), rel=1e-12)


def test_marchaud_difference_of_linear_function():
    u = lambda x, t: np.asarray(x)[..., 0] * 0 + np.asarray(t)
    # second difference of a linear function in t vanishes
    assert marchaud_difference(u, 2, 0.3, 0.1, np.array([0.0]), 1.0) == pytest.approx(0.0, abs=1e-15)
    assert marchaud_difference(u, 1, 0.3, 0.1, np.array([0.0]), 1.0) == pytest.approx(0.1, rel=1e-12)


def test_recover_exact_solution():
    g = make_exact_solution(1.0, 0.5)
    u = PotentialField(g, 1.0)
    got = recover(u, 1, 1.0, InverseSpec(l=2), 0.0, 1.0)
    assert got[0] == pytest.approx(0.5, rel=1e-8)


@pytest.mark.parametrize("alpha", [0.5, 0.75])
def test_recover_heat_kernel_family(alpha):
    # J_alpha^-1 Phi_{alpha+1} = Phi_1
    u = HeatKernelField(1, alpha + 1.0)
    x, t = np.array([0.0, 0.3, 1.0]), np.array([0.5, 0.5, 1.2])
    ref = HeatKernelField(1, 1.0).value(x[:, None], t)
    np.testing.assert_allclose(recover(u, 1, alpha, InverseSpec(l=2), x, t), ref, rtol=1e-4)


def test_plain_callable_path():
    h = HeatKernelField(1, 1.5)
    got = recover(lambda x, t: h.value(x, t), 1, 0.5, InverseSpec(l=2), 0.3, 0.5)
    ref = HeatKernelField(1, 1.0).value(np.array([[0.3]]), np.array([0.5]))
    assert got[0] == pytest.approx(ref[0], rel=1e-3)


def test_zero_before_time_origin():
    u = PotentialField(Bump(1), 0.5)
    assert j_inverse(u, 1, 0.5, InverseSpec(), 0.0, -0.5) == 0.0
    scan = inverse_scan(u, 1, 0.5, InverseSpec(), [0.0, 0.0], [-1.0, 0.0])
    assert np.all(scan.values == 0) and np.all(scan.extrapolated == 0)


def test_scan_shape_and_rate():
    u = PotentialField(Bump(1), 0.5)
    scan = inverse_scan(u, 1, 0.5, InverseSpec(l=2), 0.0, 0.5, levels=6)
    assert scan.values.shape == (6, 1)
    assert np.all(np.diff(scan.eps) < 0)
    assert scan.rate == 1.5
    assert scan.cauchy_ok


def test_calibrated_constant_matches_closed_form():
    f = Bump(1)
    u = PotentialField(f, 0.5)
    x, t = np.array([0.0, 0.5]), np.array([0.5, 0.8])
    c = calibrate_constant(u, f.value(x[:, None], t), 1, 0.5, InverseSpec(l=2), x, t)
    assert c == pytest.approx(marchaud_constant(1, 0.5, 2), rel=1e-6)


def test_spec_validation():
    with pytest.raises(DomainError):
        InverseSpec(l=0)
    with pytest.raises(DomainError):
        InverseSpec(eps=0.0)
    with pytest.raises(DomainError):
        j_inverse(Bump(1), 1, 1.5, InverseSpec(l=1), 0.0, 0.5)


def test_strict_mode_raises_on_non_cauchy_sequence():
    # a jump in time just before t: the dyadic differences stop shrinking once eps passes the jump
    u = lambda x, t: np.where(np.asarray(t) > 0.5, 1.0, 0.0) * np.ones(np.shape(x)[:-1])
    scan = inverse_scan(u, 1, 0.5, InverseSpec(l=2), 0.0, 0.501, levels=8)
    assert not scan.cauchy_ok
    with pytest.raises(ToleranceError):
        inverse_scan(u, 1, 0.5, InverseSpec(l=2), 0.0, 0.501, levels=8, strict=True)
