"""Gamma function, Gaussian ball masses and the closed-form constants.

Everything here is deterministic. Scalar constants are memoized with
``functools.lru_cache``, which is internally locked in CPython.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special as sp

from .errors import DomainError

_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# ring densities are integrated over d +- RING_SIGMAS * sigma
RING_SIGMAS = 10.0
RING_NODES = 64
_CHUNK = 16384


def _lanczos(x):
    # valid for x >= 0.5
    z = x - 1.0
    a = np.full_like(z, _LANCZOS_COEF[0])
    for i in range(1, 9):
        a = a + _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(a)


def _log_gamma_array(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("log_gamma requires x > 0")
    small = x < 0.5
    xs = np.where(small, x + 1.0, x)
    out = _lanczos(xs)
    return np.where(small, out - np.log(x), out)


@lru_cache(maxsize=4096)
def _log_gamma_scalar(x: float) -> float:
    return float(_log_gamma_array(np.array([x]))[0])


def log_gamma(x):
    """ln Gamma(x) for x > 0, scalar or array."""
    if np.ndim(x) == 0:
        xf = float(x)
        if not xf > 0:
            raise DomainError(f"log_gamma requires x > 0, got {x}")
        if xf.is_integer() and xf <= 170:
            return math.log(math.factorial(int(xf) - 1))
        return _log_gamma_scalar(xf)
    return _log_gamma_array(x)


def gamma(x):
    """Gamma(x) for x > 0."""
    return np.exp(log_gamma(x)) if np.ndim(x) else math.exp(log_gamma(x))


def _check_lambda(lam):
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")


@lru_cache(maxsize=1024)
def sharp_constant(alpha: float, lam: float) -> float:
    """M = Gamma(k+1) / Gamma(alpha+k+1) with k = alpha*lam/(1-lam)."""
    _check_lambda(lam)
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    k = alpha * lam / (1.0 - lam)
    return math.exp(log_gamma(k + 1.0) - log_gamma(alpha + k + 1.0))


@lru_cache(maxsize=1024)
def mbar_constant(alpha: float, lam: float) -> float:
    """Gamma(alpha+1) * M(alpha, lambda)."""
    return math.exp(log_gamma(alpha + 1.0)) * sharp_constant(alpha, lam)


@lru_cache(maxsize=1024)
def riesz_constant(n: int, alpha: float) -> float:
    """gamma(n, alpha) = 4^alpha pi^(n/2) Gamma(alpha) / Gamma(n/2 - alpha)."""
    if not 0.0 < 2.0 * alpha < n:
        raise DomainError(f"Riesz potential needs 0 < 2*alpha < n, got alpha={alpha}, n={n}")
    return math.exp(alpha * math.log(4.0) + 0.5 * n * math.log(math.pi)
                    + log_gamma(alpha) - log_gamma(0.5 * n - alpha))


@lru_cache(maxsize=64)
def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (0.5 * n) / math.exp(log_gamma(0.5 * n))


@lru_cache(maxsize=64)
def ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return math.pi ** (0.5 * n) / math.exp(log_gamma(0.5 * n + 1.0))


@lru_cache(maxsize=32)
def gauss_legendre(m: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def ring_density(rho, n: int, d, sigma):
    """Density of |W| for W ~ N(d e1, sigma^2 I) in R^n, evaluated at rho >= 0."""
    rho, d, sigma = np.broadcast_arrays(np.asarray(rho, float), np.asarray(d, float),
                                        np.asarray(sigma, float))
    if n == 1:
        c = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
        return c * (np.exp(-0.5 * ((rho - d) / sigma) ** 2)
                    + np.exp(-0.5 * ((rho + d) / sigma) ** 2))
    nu = 0.5 * n - 1.0
    s2 = sigma * sigma
    z = rho * d / s2
    with np.errstate(divide="ignore", invalid="ignore"):
        big = (rho / s2) * (rho / d) ** nu * np.exp(-0.5 * (rho - d) ** 2 / s2) * _ive(nu, z)
    small = (rho ** (n - 1) * np.exp(-0.5 * (rho * rho + d * d) / s2)
             / (2.0 ** nu * sigma ** n * math.exp(log_gamma(0.5 * n))))
    return np.where(z < 1e-8, small, big)


def _ive(nu, z):
    # exp(-z) I_nu(z); scipy returns nan for z beyond ~1e9, where two asymptotic terms suffice
    mu = 4.0 * nu * nu
    zs = np.maximum(z, 1.0)
    asym = (1.0 - (mu - 1.0) / (8.0 * zs) + (mu - 1.0) * (mu - 9.0) / (128.0 * zs * zs)) \
        / np.sqrt(2.0 * math.pi * zs)
    return np.where(z > 1e8, asym, sp.ive(nu, np.minimum(z, 1e8)))


def _ring_density_std(z, n, d, sigma):
    # sigma * density of |W| at rho = d + sigma*z, written in z to avoid cancellation
    rho = d + sigma * z
    if n == 1:
        c = 1.0 / math.sqrt(2.0 * math.pi)
        return c * (np.exp(-0.5 * z * z) + np.exp(-0.5 * ((rho + d) / sigma) ** 2))
    nu = 0.5 * n - 1.0
    big_z = rho * d / (sigma * sigma)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        big = (rho / sigma) * (rho / d) ** nu * np.exp(-0.5 * z * z) * _ive(nu, big_z)
        small = ((rho / sigma) ** (n - 1) * np.exp(-0.5 * ((rho / sigma) ** 2 + (d / sigma) ** 2))
                 / (2.0 ** nu * math.exp(log_gamma(0.5 * n))))
    return np.where(big_z < 1e-8, small, big)


def _ring_window(n, d, sigma):
    # window in the standardized variable z = (rho - d)/sigma, rho >= 0
    zlo = np.maximum(-d / sigma, -RING_SIGMAS)
    zhi = np.full(np.shape(d), RING_SIGMAS + math.sqrt(n))
    return zlo, zhi


def _ring_integral(n, d, sigma, zlo, zhi, profile=None):
    # 64-point Gauss-Legendre of the ring density (times profile) over z in [zlo, zhi], chunked
    x01, w01 = gauss_legendre(RING_NODES)
    out = np.zeros(d.shape)
    flat = [np.ascontiguousarray(a).reshape(-1) for a in (d, sigma, zlo, zhi)]
    res = out.reshape(-1)
    for start in range(0, res.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        dd, ss, aa, bb = (a[sl, None] for a in flat)
        width = np.maximum(bb - aa, 0.0)
        z = aa + width * x01
        dens = _ring_density_std(z, n, dd, ss)
        if profile is not None:
            dens = dens * profile(dd + ss * z)
        res[sl] = np.sum(np.where(np.isfinite(dens), dens, 0.0) * w01, axis=1) * width[:, 0]
    return out


def ring_probability(n: int, d, sigma, R):
    """P(|W| < R) for W ~ N(d e1, sigma^2 I) in R^n; arrays broadcast."""
    d, sigma, R = np.broadcast_arrays(np.asarray(d, float), np.asarray(sigma, float),
                                      np.asarray(R, float))
    d = np.abs(d)
    point = sigma <= 0
    sig = np.where(point, 1.0, sigma)
    if n == 1:
        with np.errstate(invalid="ignore"):
            r2 = math.sqrt(2.0) * sig
            val = 0.5 * (sp.erf((R - d) / r2) + sp.erf((R + d) / r2))
        val = np.where(np.isinf(R), 1.0, val)
    else:
        zlo, zhi = _ring_window(n, d, sig)
        with np.errstate(invalid="ignore"):
            zR = np.where(np.isinf(R), np.inf, (R - d) / sig)
        val = _ring_integral(n, d, sig, zlo, np.maximum(np.minimum(zR, zhi), zlo))
        val = np.where(zR >= zhi, 1.0, np.where(zR <= zlo, 0.0, val))
    val = np.where(point, (d < R).astype(float), val)
    return np.clip(val, 0.0, 1.0)


def ring_expectation(profile, n: int, d, sigma, rmax=np.inf):
    """E[profile(|W|)] for W ~ N(d e1, sigma^2 I), profile supported in [0, rmax].

    ``profile`` maps an array of radii to values. sigma = 0 gives profile(d).
    """
    d, sigma, rmax = np.broadcast_arrays(np.abs(np.asarray(d, float)), np.asarray(sigma, float),
                                         np.asarray(rmax, float))
    point = sigma <= 0
    sig = np.where(point, 1.0, sigma)
    zlo, zhi = _ring_window(n, d, sig)
    with np.errstate(invalid="ignore"):
        zmax = np.where(np.isinf(rmax), np.inf, (rmax - d) / sig)
    val = _ring_integral(n, d, sig, zlo, np.maximum(np.minimum(zhi, zmax), zlo), profile)
    if np.any(point):
        val = np.where(point, profile(d), val)
    return val


def offset_gaussian_mass(n: int, c, R):
    """G(n, c, R) = pi^(-n/2) * integral of exp(-|z|^2) over |z - c e1| < R."""
    return ring_probability(n, c, 1.0 / math.sqrt(2.0), R)


def heat_ball_mass(n: int, dist, s, R):
    """Heat-kernel mass of the ball |xi| < R seen from |x| = dist after time s."""
    s = np.asarray(s, float)
    if np.any(s <= 0):
        raise DomainError("heat_ball_mass needs s > 0")
    return ring_probability(n, dist, np.sqrt(2.0 * s), R)


def heat_ball_mass_unchecked(n: int, dist, s, R):
    """heat_ball_mass that allows s = 0 (point evaluation of the indicator)."""
    return ring_probability(n, dist, np.sqrt(2.0 * np.maximum(s, 0.0)), R)


@lru_cache(maxsize=64)
def offset_ball_floor(n: int) -> float:
    """Lower bound of the heat mass of {|xi|^2 < tau} seen from |x|^2 < t, t/4 < tau < 3t/4.

    Equals G(n, 1, 1/(2 sqrt 3)).
    """
    return float(offset_gaussian_mass(n, 1.0, 1.0 / (2.0 * math.sqrt(3.0))))


@lru_cache(maxsize=64)
def shrinking_ball_floor(n: int) -> float:
    """Lower bound of the heat mass of {|xi| < sqrt(T - tau)} seen from |x| <= sqrt(T - t).

    Computed as the N(0, 2I) probability of the unit ball centred at e1.
    """
    return float(ring_probability(n, 1.0, math.sqrt(2.0), 1.0))


def partial_beta(a: float, b: float, lo: float, hi: float) -> float:
    """Integral of s^(a-1) (1-s)^(b-1) over [lo, hi] inside [0, 1]."""
    full = math.exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b))
    return full * float(sp.betainc(a, b, hi) - sp.betainc(a, b, lo))
