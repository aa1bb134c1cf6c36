"""Space-time fields f(x, t): the closed-form catalog and sampled grids.

Every field exposes

* ``value(x, t)``: pointwise values, ``x`` of shape (..., n), ``t`` of shape (...);
* ``smooth(x, s, tau)``: the heat smoothing  int Phi_1(x - xi, s) f(xi, tau) dxi,
  with ``s = 0`` meaning the point value. Potentials only ever need this;
* ``time_breaks()``: times where the field is not smooth in t;
* ``spherical_mean(x, rho, t)``: the average of f(., t) over the sphere S(x, rho).

All catalog fields vanish for t <= 0.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np
from scipy import special as sp
from scipy.interpolate import RegularGridInterpolator

from .errors import DomainError, UnsupportedVariantError
from .special import (ball_volume, ring_expectation, ring_probability, sharp_constant,
                      offset_gaussian_mass, offset_ball_floor, partial_beta, log_gamma)


def as_points(x, n):
    """Coerce ``x`` to an array whose last axis has length n."""
    x = np.asarray(x, float)
    if x.ndim == 0 or x.shape[-1] != n:
        if n == 1:
            x = x[..., None]
        else:
            raise DomainError(f"expected points with last dimension {n}, got shape {x.shape}")
    return x


def _r2(x):
    return np.sum(x * x, axis=-1)


def _g(v) -> str:
    """Round-trip number text for describe()."""
    return format(float(v), ".17g")


def _safe_pow(base, expo, mask):
    # base**expo where mask holds, 0 elsewhere, without warnings
    b = np.where(mask, base, 1.0)
    return np.where(mask, b ** expo, 0.0)


def _power_integral(s, a, b):
    """Integral of t^s over (a, b) with 0 <= a <= b <= inf."""
    if b <= a:
        return 0.0
    if s == -1.0:
        if a == 0 or math.isinf(b):
            return math.inf
        return math.log(b / a)
    if s < -1.0 and a == 0:
        return math.inf
    if s > -1.0 and math.isinf(b):
        return math.inf
    if math.isinf(b):
        return -a ** (s + 1.0) / (s + 1.0)
    return (b ** (s + 1.0) - a ** (s + 1.0)) / (s + 1.0)


def diverges(exponent, n, q, rel=1e-12):
    """Whether s^-exponent chi{|x|^2 < s} fails to be in L^q near s = 0.

    The boundary case exponent = (n+2)/(2q) diverges (logarithmically); a
    relative band absorbs rounding in exponents built from float inputs.
    """
    crit = (n + 2) / (2.0 * q)
    return exponent >= crit * (1.0 - rel)


def exact_profile(alpha, lam, t):
    """g(t) = (M t^alpha)^(lam/(1-lam)) for t > 0, else 0."""
    M = sharp_constant(alpha, lam)
    kappa = lam / (1.0 - lam)
    t = np.asarray(t, float)
    pos = t > 0
    return np.where(pos, np.exp(kappa * (math.log(M) + alpha * np.log(np.where(pos, t, 1.0)))), 0.0)


def cutoff(t, delta):
    """Smooth step: 1 for t <= 1, 0 for t >= 1 + delta, C-infinity in between."""
    s = (np.asarray(t, float) - 1.0) / delta
    mid = (s > 0) & (s < 1)
    sm = np.where(mid, s, 0.5)
    with np.errstate(over="ignore"):
        a = np.exp(-1.0 / (1.0 - sm))
        b = np.exp(-1.0 / sm)
    return np.where(s <= 0, 1.0, np.where(s >= 1, 0.0, a / (a + b)))


def time_bump(t, t0=0.0, t1=1.0):
    """exp(1 - 1/(4u(1-u))) with u = (t-t0)/(t1-t0) on (0, 1); peak value 1 at the midpoint."""
    u = (np.asarray(t, float) - t0) / (t1 - t0)
    inside = (u > 0) & (u < 1)
    us = np.where(inside, u, 0.5)
    return np.where(inside, np.exp(1.0 - 1.0 / (4.0 * us * (1.0 - us))), 0.0)


def compact_profile(r, radius):
    """exp(1 - 1/(1 - (r/radius)^2)) inside the ball, peak value 1."""
    z = np.asarray(r, float) / radius
    inside = z < 1
    zs = np.where(inside, z, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - zs * zs)), 0.0)


@lru_cache(maxsize=16)
def _sphere_rule(n, m=48):
    # nodes u = cos(theta) in (-1, 1) with weight (1-u^2)^((n-3)/2), normalized
    a = 0.5 * (n - 3)
    u, w = sp.roots_jacobi(m, a, a)
    return u, w / w.sum()


class Field:
    """Base class of all space-time fields."""

    radial = False          # depends on |x| only
    x_independent = False   # depends on t only
    exact = True            # False for interpolated data

    # evaluation ---------------------------------------------------------
    def value(self, x, t):
        raise NotImplementedError

    def smooth(self, x, s, tau):
        raise UnsupportedVariantError(f"{type(self).__name__} has no heat smoothing")

    def time_breaks(self):
        return np.array([0.0])

    def spatial_extent(self, t):
        """Radius of a ball around 0 containing the support of f(., t)."""
        return math.inf

    def radial_breaks(self, t):
        """Radii where the radial profile of f(., t) is not smooth."""
        return []

    def spherical_mean(self, x, rho, t):
        x = np.asarray(x, float)
        n = x.shape[-1]
        rho = np.asarray(rho, float)
        t = np.asarray(t, float)
        if n == 1:
            return 0.5 * (self.value(x + rho[..., None], t) + self.value(x - rho[..., None], t))
        if not self.radial:
            raise UnsupportedVariantError("spherical means in n >= 2 need a radial field")
        u, w = _sphere_rule(n)
        d = np.sqrt(_r2(x))[..., None]
        r = np.sqrt(np.maximum(d * d + rho[..., None] ** 2 + 2.0 * d * rho[..., None] * u, 0.0))
        pts = np.zeros(r.shape + (n,))
        pts[..., 0] = r
        return np.sum(self.value(pts, t[..., None]) * w, axis=-1)

    def singular_points(self, q):
        """Times t* where the local L^q norm is infinite, as (t*, side) pairs.

        ``side`` is "below" when the blow-up is approached as t increases to t*.
        """
        return []

    def lp_power(self, p, t_lo=-math.inf, t_hi=math.inf):
        """Closed form of the integral of |f|^p over R^n x (t_lo, t_hi)."""
        raise UnsupportedVariantError(f"no closed-form norm for {type(self).__name__}")

    def __add__(self, other):
        return Sum((self, other))

    def describe(self) -> str:
        return type(self).__name__


def eval_field(field: Field, x, t):
    """Evaluate with scalar-friendly coercion of x and t."""
    n = getattr(field, "n", None) or (np.shape(x)[-1] if np.ndim(x) else 1)
    xp = as_points(x, n)
    t = np.broadcast_to(np.asarray(t, float), xp.shape[:-1])
    out = field.value(xp, t)
    return float(out) if np.ndim(out) == 0 else out


# time-only fields ---------------------------------------------------------

class TimeOnly(Field):
    radial = True
    x_independent = True

    def profile(self, t):
        raise NotImplementedError

    def value(self, x, t):
        t = np.broadcast_to(np.asarray(t, float), np.shape(x)[:-1])
        return self.profile(t)

    def smooth(self, x, s, tau):
        tau = np.broadcast_to(np.asarray(tau, float), np.shape(x)[:-1])
        return self.profile(tau)

    def spherical_mean(self, x, rho, t):
        return self.profile(np.broadcast_to(np.asarray(t, float), np.shape(rho)))

    def lp_power(self, p, t_lo=-math.inf, t_hi=math.inf):
        return math.inf if t_hi > 0 else 0.0


@dataclass(frozen=True)
class ExactSolution(TimeOnly):
    alpha: float
    lam: float

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise DomainError("ExactSolution needs 0 < lambda < 1")
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")

    def profile(self, t):
        return exact_profile(self.alpha, self.lam, t)

    def describe(self):
        return f"exact(alpha={_g(self.alpha)},lambda={_g(self.lam)})"


@dataclass(frozen=True)
class MollifiedExact(TimeOnly):
    alpha: float
    lam: float
    delta: float

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise DomainError("MollifiedExact needs 0 < lambda < 1")
        if not 0 < self.delta < 1:
            raise DomainError("delta must lie in (0, 1)")

    def profile(self, t):
        return cutoff(t, self.delta) * exact_profile(self.alpha, self.lam, t)

    def time_breaks(self):
        return np.array([0.0, 1.0, 1.0 + self.delta])

    def lp_power(self, p, t_lo=-math.inf, t_hi=math.inf):
        return math.inf if t_hi > 0 else 0.0

    def describe(self):
        return f"mollified(alpha={_g(self.alpha)},lambda={_g(self.lam)},delta={_g(self.delta)})"


# radial indicator fields: A(t) * chi{|x| < R(t)} ------------------------------

class RadialIndicator(Field):
    radial = True

    def amp_radius(self, t):
        """Return (A(t), R(t), mask) with mask marking t inside the time support."""
        raise NotImplementedError

    def value(self, x, t):
        A, R, m = self.amp_radius(np.broadcast_to(np.asarray(t, float), np.shape(x)[:-1]))
        return np.where(m & (_r2(x) < R * R), A, 0.0)

    def smooth(self, x, s, tau):
        shape = np.shape(x)[:-1]
        A, R, m = self.amp_radius(np.broadcast_to(np.asarray(tau, float), shape))
        s = np.broadcast_to(np.asarray(s, float), shape)
        out = np.zeros(shape)
        if np.any(m):
            d = np.sqrt(_r2(x))
            out[m] = A[m] * ring_probability(self.n, d[m], np.sqrt(2.0 * s[m]), R[m])
        return out

    def spherical_mean(self, x, rho, t):
        rho = np.asarray(rho, float)
        shape = np.broadcast_shapes(np.shape(x)[:-1], rho.shape)
        A, R, m = self.amp_radius(np.broadcast_to(np.asarray(t, float), shape))
        d = np.broadcast_to(np.sqrt(_r2(x)), shape)
        rho = np.broadcast_to(rho, shape)
        frac = cap_fraction(self.n, d, rho, R)
        return np.where(m, A * frac, 0.0)

    def spatial_extent(self, t):
        A, R, m = self.amp_radius(np.atleast_1d(float(t)))
        return float(R[0]) if m[0] else 0.0

    def radial_breaks(self, t):
        return [self.spatial_extent(t)]

    def radial_lp_power(self, p, t_lo, t_hi):
        raise UnsupportedVariantError

    def lp_power(self, p, t_lo=-math.inf, t_hi=math.inf):
        return ball_volume(self.n) * self.radial_lp_power(p, t_lo, t_hi)


def cap_fraction(n, d, rho, R):
    """Fraction of the sphere S(x, rho), |x| = d, lying inside the ball |y| < R."""
    d, rho, R = np.broadcast_arrays(np.asarray(d, float), np.asarray(rho, float),
                                    np.asarray(R, float))
    if n == 1:
        return 0.5 * ((np.abs(d + rho) < R).astype(float) + (np.abs(d - rho) < R).astype(float))
    with np.errstate(divide="ignore", invalid="ignore"):
        c0 = (R * R - d * d - rho * rho) / (2.0 * d * rho)
    h = 0.5 * (n - 1)
    frac = sp.betainc(h, h, np.clip(0.5 * (np.nan_to_num(c0, nan=0.0, posinf=1.0, neginf=-1.0) + 1.0), 0.0, 1.0))
    centre = (d == 0) | (rho == 0)
    return np.where(centre, (np.maximum(d, rho) < R).astype(float), frac)


@dataclass(frozen=True)
class ParaboloidPower(RadialIndicator):
    n: int
    p: float
    gamma_exp: float
    truncate: bool = False

    def __post_init__(self):
        if not self.gamma_exp > 0:
            raise DomainError("ParaboloidPower needs gamma > 0")
        if self.p < 1:
            raise DomainError("p must be at least 1")

    @property
    def exponent(self):
        return (self.n + 2) / (2.0 * self.p) - self.gamma_exp

    def amp_radius(self, t):
        t = np.asarray(t, float)
        m = t > 0
        if self.truncate:
            m = m & (t < 1.0)
        ts = np.where(m, t, 1.0)
        return np.where(m, ts ** -self.exponent, 0.0), np.sqrt(ts), m

    def time_breaks(self):
        return np.array([0.0, 1.0]) if self.truncate else np.array([0.0])

    def singular_points(self, q):
        if diverges(self.exponent, self.n, q):
            return [(0.0, "above")]
        return []

    def radial_lp_power(self, p, t_lo, t_hi):
        hi = min(t_hi, 1.0) if self.truncate else t_hi
        return _power_integral(0.5 * self.n - p * self.exponent, max(t_lo, 0.0), hi)

    def describe(self):
        tr = ",truncate=1" if self.truncate else ""
        return f"paraboloid(n={self.n},p={_g(self.p)},gamma={_g(self.gamma_exp)}{tr})"


@dataclass(frozen=True)
class BackwardParaboloid(RadialIndicator):
    n: int
    p: float
    gamma_exp: float
    t0: float
    T: float

    def __post_init__(self):
        if not self.t0 < self.T:
            raise DomainError("BackwardParaboloid needs t0 < T")
        if self.p < 1:
            raise DomainError("p must be at least 1")

    @property
    def exponent(self):
        return (self.n + 2) / (2.0 * self.p) - self.gamma_exp

    def amp_radius(self, t):
        t = np.asarray(t, float)
        m = (t > self.t0) & (t < self.T)
        gap = np.where(m, self.T - t, 1.0)
        return np.where(m, gap ** -self.exponent, 0.0), np.sqrt(gap), m

    def time_breaks(self):
        return np.array([self.t0, self.T])

    def singular_points(self, q):
        if diverges(self.exponent, self.n, q):
            return [(self.T, "below")]
        return []

    def radial_lp_power(self, p, t_lo, t_hi):
        a = max(t_lo, self.t0)
        b = min(t_hi, self.T)
        if b <= a:
            return 0.0
        return _power_integral(0.5 * self.n - p * self.exponent, self.T - b, self.T - a)

    def describe(self):
        return (f"backward(n={self.n},p={_g(self.p)},gamma={_g(self.gamma_exp)},"
                f"t0={_g(self.t0)},T={_g(self.T)})")


@dataclass(frozen=True)
class IndicatorSimilarity(RadialIndicator):
    n: int
    alpha: float
    lam: float
    L: float = 1.0

    def amp_radius(self, t):
        t = np.asarray(t, float)
        m = t > 0
        return self.L * exact_profile(self.alpha, self.lam, t), np.sqrt(np.where(m, t, 0.0)), m

    def radial_lp_power(self, p, t_lo, t_hi):
        M = sharp_constant(self.alpha, self.lam)
        kappa = self.lam / (1.0 - self.lam)
        c = (self.L * M ** kappa) ** p
        return c * _power_integral(self.alpha * kappa * p + 0.5 * self.n, max(t_lo, 0.0), t_hi)

    def describe(self):
        return f"indsim(n={self.n},alpha={_g(self.alpha)},lambda={_g(self.lam)},L={_g(self.L)})"


@dataclass(frozen=True)
class Cylinder(RadialIndicator):
    """amp * chi{|x| < radius, t0 < t < t1}; radius = inf gives a time window."""
    n: int
    radius: float = math.inf
    t0: float = 0.0
    t1: float = math.inf
    amp: float = 1.0

    def __post_init__(self):
        if self.t0 < 0:
            raise DomainError("fields must vanish for t < 0")

    def amp_radius(self, t):
        t = np.asarray(t, float)
        m = (t > self.t0) & (t < self.t1)
        return np.full(t.shape, self.amp), np.full(t.shape, self.radius), m

    def time_breaks(self):
        return np.array([b for b in (self.t0, self.t1) if math.isfinite(b)])

    @property
    def x_independent(self):
        return math.isinf(self.radius)

    def radial_lp_power(self, p, t_lo, t_hi):
        span = max(0.0, min(t_hi, self.t1) - max(t_lo, self.t0))
        if span == 0:
            return 0.0
        return abs(self.amp) ** p * self.radius ** self.n * span

    def describe(self):
        return f"cylinder(n={self.n},R={_g(self.radius)},t0={_g(self.t0)},t1={_g(self.t1)},amp={_g(self.amp)})"


# smooth fields ------------------------------------------------------------------

def tilt_profile(r):
    """phi(x) = exp(-(sqrt(1 + |x|^2) - 1)) as a function of |x|."""
    r = np.asarray(r, float)
    return np.exp(-(np.sqrt(1.0 + r * r) - 1.0))


@dataclass(frozen=True)
class TiltedExact(Field):
    n: int
    alpha: float
    lam: float
    N: float
    K: float
    delta: float
    gamma_w: float
    eps: float

    radial = True

    @property
    def amplitude(self):
        M = sharp_constant(self.alpha, self.lam)
        return self.K ** (1.0 / (1.0 - self.lam)) * (self.N / M) ** (self.lam / (1.0 - self.lam))

    def time_profile(self, t):
        return self.amplitude * cutoff(t, self.delta) * exact_profile(self.alpha, self.lam, t)

    def value(self, x, t):
        return tilt_profile(self.eps * np.sqrt(_r2(x))) * self.time_profile(t)

    def smooth(self, x, s, tau):
        shape = np.shape(x)[:-1]
        h = np.broadcast_to(self.time_profile(tau), shape)
        s = np.broadcast_to(np.asarray(s, float), shape)
        out = np.zeros(shape)
        m = h != 0
        if np.any(m):
            d = np.sqrt(_r2(x))[m]
            eps = self.eps
            out[m] = h[m] * ring_expectation(lambda r: tilt_profile(eps * r), self.n, d,
                                             np.sqrt(2.0 * s[m]))
        return out

    def time_breaks(self):
        return np.array([0.0, 1.0, 1.0 + self.delta])

    def describe(self):
        return (f"tilted(alpha={_g(self.alpha)},lambda={_g(self.lam)},N={_g(self.N)},K={_g(self.K)},"
                f"n={self.n})")


@dataclass(frozen=True)
class Bump(Field):
    """Smooth bump: time_bump on (t0, t1) times a Gaussian or compact spatial profile.

    kind="gauss": exp(-|x|^2/radius^2); kind="compact": compact_profile(|x|, radius).
    """
    n: int
    kind: str = "gauss"
    radius: float = 1.0
    t0: float = 0.0
    t1: float = 1.0
    amp: float = 1.0

    radial = True

    def __post_init__(self):
        if self.kind not in ("gauss", "compact"):
            raise DomainError("bump kind must be 'gauss' or 'compact'")
        if self.t0 < 0 or not self.t1 > self.t0:
            raise DomainError("bump needs 0 <= t0 < t1")

    def spatial(self, r):
        if self.kind == "gauss":
            return np.exp(-(np.asarray(r, float) / self.radius) ** 2)
        return compact_profile(r, self.radius)

    def value(self, x, t):
        return self.amp * self.spatial(np.sqrt(_r2(x))) * time_bump(t, self.t0, self.t1)

    def smooth(self, x, s, tau):
        shape = np.shape(x)[:-1]
        h = np.broadcast_to(self.amp * time_bump(tau, self.t0, self.t1), shape)
        s = np.broadcast_to(np.asarray(s, float), shape)
        d2 = _r2(x)
        if self.kind == "gauss":
            w2 = self.radius ** 2
            return h * (1.0 + 4.0 * s / w2) ** (-0.5 * self.n) * np.exp(-d2 / (w2 + 4.0 * s))
        out = np.zeros(shape)
        m = h != 0
        if np.any(m):
            out[m] = h[m] * ring_expectation(self.spatial, self.n, np.sqrt(d2[m]),
                                             np.sqrt(2.0 * s[m]), self.radius)
        return out

    def time_breaks(self):
        return np.array([self.t0, self.t1])

    def spatial_extent(self, t):
        return self.radius if self.kind == "compact" else math.inf

    def describe(self):
        return (f"bump(n={self.n},kind={self.kind},radius={_g(self.radius)},t0={_g(self.t0)},"
                f"t1={_g(self.t1)},amp={_g(self.amp)})")


@dataclass(frozen=True)
class HeatKernelField(Field):
    """Phi_beta(x, t) itself, with its closed-form heat smoothing."""
    n: int
    beta: float

    radial = True

    def value(self, x, t):
        from .kernels import _phi
        return _phi(self.n, self.beta, _r2(x), np.broadcast_to(np.asarray(t, float), np.shape(x)[:-1]))

    def smooth(self, x, s, tau):
        shape = np.shape(x)[:-1]
        tau = np.broadcast_to(np.asarray(tau, float), shape)
        s = np.broadcast_to(np.asarray(s, float), shape)
        pos = tau > 0
        ts = np.where(pos, tau, 1.0)
        lt = ((self.beta - 1.0) * np.log(ts) - log_gamma(self.beta)
              - 0.5 * self.n * np.log(4.0 * math.pi * (ts + s)) - _r2(x) / (4.0 * (ts + s)))
        return np.where(pos, np.exp(lt), 0.0)

    def describe(self):
        return f"heat(n={self.n},beta={_g(self.beta)})"


# piecewise constant cells -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Cells(Field):
    """Piecewise-constant field on a tensor grid of cells in (x_1, ..., x_n, t)."""
    x_edges: tuple
    t_edges: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_edges", tuple(np.asarray(e, float) for e in self.x_edges))
        object.__setattr__(self, "t_edges", np.asarray(self.t_edges, float))
        object.__setattr__(self, "values", np.asarray(self.values, float))
        shape = tuple(len(e) - 1 for e in self.x_edges) + (len(self.t_edges) - 1,)
        if self.values.shape != shape:
            raise DomainError(f"cell values must have shape {shape}")
        if self.t_edges[0] < 0:
            raise DomainError("fields must vanish for t < 0")

    @property
    def n(self):
        return len(self.x_edges)

    def _time_index(self, t):
        j = np.searchsorted(self.t_edges, t, side="right") - 1
        ok = (j >= 0) & (j < len(self.t_edges) - 1)
        return np.where(ok, j, 0), ok

    def value(self, x, t):
        j, ok = self._time_index(np.broadcast_to(np.asarray(t, float), np.shape(x)[:-1]))
        idx = []
        for i, e in enumerate(self.x_edges):
            k = np.searchsorted(e, x[..., i], side="right") - 1
            ok = ok & (k >= 0) & (k < len(e) - 1)
            idx.append(np.clip(k, 0, len(e) - 2))
        return np.where(ok, self.values[tuple(idx) + (j,)], 0.0)

    def smooth(self, x, s, tau):
        shape = np.shape(x)[:-1]
        j, ok = self._time_index(np.broadcast_to(np.asarray(tau, float), shape))
        sig = np.sqrt(2.0 * np.broadcast_to(np.asarray(s, float), shape))
        vals = np.moveaxis(self.values, -1, 0)[j]        # (..., c1, ..., cn)
        for i in reversed(range(self.n)):
            e = self.x_edges[i]
            xi = x[..., i][..., None]
            sg = sig[..., None]
            with np.errstate(divide="ignore", invalid="ignore"):
                cdf = np.where(sg > 0, sp.ndtr((e - xi) / np.where(sg > 0, sg, 1.0)),
                               (e > xi).astype(float) + 0.0 * sg)
            cdf = np.where(sg > 0, cdf, 1.0 - (e > xi).astype(float))
            mass = cdf[..., 1:] - cdf[..., :-1]
            # contract the last remaining cell axis
            vals = np.sum(vals * mass.reshape(mass.shape[:-1] + (1,) * i + mass.shape[-1:]), axis=-1)
        return np.where(ok, vals, 0.0)

    def time_breaks(self):
        return self.t_edges.copy()

    def spatial_extent(self, t):
        return float(max(np.max(np.abs(e)) for e in self.x_edges)) * math.sqrt(self.n)

    def lp_power(self, p, t_lo=-math.inf, t_hi=math.inf):
        vol = np.ones(())
        for e in self.x_edges:
            vol = np.multiply.outer(vol, np.diff(e))
        dt = np.clip(np.minimum(self.t_edges[1:], t_hi) - np.maximum(self.t_edges[:-1], t_lo), 0, None)
        return float(np.sum(np.abs(self.values) ** p * np.multiply.outer(vol, dt)))

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def describe(self):
        return f"cells(shape={self.values.shape})"


def random_cells(rng, n=1, nx=4, nt=4, x_range=(-1.0, 1.0), t_range=(0.0, 1.0), signed=True):
    """Random piecewise-constant field with jittered cell edges."""
    def edges(lo, hi, k):
        inner = np.sort(rng.uniform(lo, hi, k - 1))
        return np.concatenate([[lo], inner, [hi]])
    xe = tuple(edges(*x_range, nx) for _ in range(n))
    te = edges(*t_range, nt)
    shape = (nx,) * n + (nt,)
    vals = rng.uniform(-1.0, 1.0, shape) if signed else rng.uniform(0.0, 1.0, shape)
    return Cells(xe, te, vals)


# sampled grids -----------------------------------------------------------------------

def _smoothed_hats(nodes, x, sig, clamp):
    """Heat smoothing of the piecewise-linear hat functions on ``nodes`` at ``x``.

    Returns an array (..., len(nodes)). sig is the Gaussian standard deviation.
    """
    xe = x[..., None]
    sg = np.where(sig > 0, sig, 1.0)[..., None]
    z = (nodes - xe) / sg
    cdf = sp.ndtr(z)
    pdf = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    h = np.diff(nodes)
    mass = cdf[..., 1:] - cdf[..., :-1]
    # int over [a, b] of (xi - a)/(b - a) * N(xi; x, sig)
    rise = ((xe - nodes[:-1]) * mass + sg * (pdf[..., :-1] - pdf[..., 1:])) / h
    fall = mass - rise
    out = np.zeros(z.shape)
    out[..., 1:] += rise
    out[..., :-1] += fall
    if clamp:
        out[..., 0] += cdf[..., 0]
        out[..., -1] += 1.0 - cdf[..., -1]
    return out


@dataclass(frozen=True, eq=False)
class Sampled(Field):
    """Values on a tensor grid (x_1, ..., x_n, t) with multilinear interpolation.

    Outside the spatial hull the field is 0 (extend="zero", flagged by
    ``value_with_flag``) or continued by its boundary values (extend="clamp").
    Outside the time range it is 0. Values at grid times t <= 0 must be 0.
    """
    x_axes: tuple
    t_axis: np.ndarray
    values: np.ndarray
    extend: str = "zero"
    source: str = ""               # CSV path when read from disk

    exact = False

    def __post_init__(self):
        object.__setattr__(self, "x_axes", tuple(np.asarray(a, float) for a in self.x_axes))
        object.__setattr__(self, "t_axis", np.asarray(self.t_axis, float))
        object.__setattr__(self, "values", np.asarray(self.values, float))
        shape = tuple(len(a) for a in self.x_axes) + (len(self.t_axis),)
        if self.values.shape != shape:
            raise DomainError(f"sampled values must have shape {shape}, got {self.values.shape}")
        if self.extend not in ("zero", "clamp"):
            raise DomainError("extend must be 'zero' or 'clamp'")
        if np.any(self.values[..., self.t_axis <= 0] != 0):
            raise DomainError("sampled field must vanish at grid times t <= 0")
        for a in self.x_axes + (self.t_axis,):
            if len(a) < 2 or np.any(np.diff(a) <= 0):
                raise DomainError("grid axes must be strictly increasing with at least 2 nodes")
        interp = RegularGridInterpolator(self.x_axes + (self.t_axis,), self.values,
                                         bounds_error=False, fill_value=0.0)
        object.__setattr__(self, "_interp", interp)

    @property
    def n(self):
        return len(self.x_axes)

    def value_with_flag(self, x, t):
        x = np.asarray(x, float)
        t = np.broadcast_to(np.asarray(t, float), x.shape[:-1])
        outside = np.zeros(t.shape, bool)
        xq = x.copy()
        for i, a in enumerate(self.x_axes):
            out_i = (x[..., i] < a[0]) | (x[..., i] > a[-1])
            outside |= out_i
            if self.extend == "clamp":
                xq[..., i] = np.clip(x[..., i], a[0], a[-1])
        pts = np.concatenate([xq, t[..., None]], axis=-1)
        val = self._interp(pts.reshape(-1, self.n + 1)).reshape(t.shape)
        if self.extend == "zero":
            val = np.where(outside, 0.0, val)
        return val, outside

    def value(self, x, t):
        return self.value_with_flag(x, t)[0]

    def smooth(self, x, s, tau):
        shape = np.shape(x)[:-1]
        tau = np.broadcast_to(np.asarray(tau, float), shape)
        s = np.broadcast_to(np.asarray(s, float), shape)
        ta = self.t_axis
        j = np.clip(np.searchsorted(ta, tau, side="right") - 1, 0, len(ta) - 2)
        inside = (tau >= ta[0]) & (tau <= ta[-1])
        w1 = np.clip((tau - ta[j]) / (ta[j + 1] - ta[j]), 0.0, 1.0)
        vals = np.moveaxis(self.values, -1, 0)
        vt = (1.0 - w1)[(...,) + (None,) * self.n] * vals[j] + w1[(...,) + (None,) * self.n] * vals[j + 1]
        sig = np.sqrt(2.0 * s)
        for i in reversed(range(self.n)):
            H = _smoothed_hats(self.x_axes[i], x[..., i], sig, self.extend == "clamp")
            vt = np.sum(vt * H.reshape(H.shape[:-1] + (1,) * i + H.shape[-1:]), axis=-1)
        out = np.where(inside, vt, 0.0)
        point = s <= 0
        if np.any(point):
            out = np.where(point, self.value(x, tau), out)
        return out

    def time_breaks(self):
        return self.t_axis.copy()

    def spatial_extent(self, t):
        if self.extend == "clamp":
            return math.inf
        return float(np.sqrt(sum(max(a[0] ** 2, a[-1] ** 2) for a in self.x_axes)))

    def describe(self):
        if self.source:
            return f"sampled({self.source})"
        return f"sampled(shape={self.values.shape},extend={self.extend})"


def write_sampled_csv(field: Sampled, path):
    """Header x1,...,xn,t,value; rows in lexicographic order of the grid."""
    names = [f"x{i + 1}" for i in range(field.n)] + ["t", "value"]
    grids = np.meshgrid(*field.x_axes, field.t_axis, indexing="ij")
    cols = [g.reshape(-1) for g in grids] + [field.values.reshape(-1)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([format(v, ".17g") for v in row])


def read_sampled_csv(path, extend="zero") -> Sampled:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array([[float(v) for v in r] for r in rows[1:] if r])
    n = len(header) - 2
    if n < 1 or header[-2:] != ["t", "value"]:
        raise DomainError("sampled CSV header must be x1,...,xn,t,value")
    axes = [np.unique(body[:, i]) for i in range(n + 1)]
    shape = tuple(len(a) for a in axes)
    if body.shape[0] != int(np.prod(shape)):
        raise DomainError("sampled CSV does not describe a full tensor grid")
    order = np.lexsort(body[:, :n + 1].T[::-1])
    if not np.array_equal(order, np.arange(len(order))):
        raise DomainError("sampled CSV rows must be sorted lexicographically")
    return Sampled(tuple(axes[:n]), axes[n], body[:, -1].reshape(shape), extend, str(path))


# combinators -------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Sum(Field):
    children: tuple

    def __post_init__(self):
        flat = []
        for c in self.children:
            flat.extend(c.children if isinstance(c, Sum) else [c])
        object.__setattr__(self, "children", tuple(flat))

    @property
    def n(self):
        ns = {getattr(c, "n", None) for c in self.children} - {None}
        return ns.pop() if len(ns) == 1 else None

    @property
    def radial(self):
        return all(c.radial for c in self.children)

    @property
    def x_independent(self):
        return all(c.x_independent for c in self.children)

    @property
    def exact(self):
        return all(c.exact for c in self.children)

    def value(self, x, t):
        return sum(c.value(x, t) for c in self.children)

    def smooth(self, x, s, tau):
        return sum(c.smooth(x, s, tau) for c in self.children)

    def spherical_mean(self, x, rho, t):
        return sum(c.spherical_mean(x, rho, t) for c in self.children)

    def time_breaks(self):
        return np.unique(np.concatenate([c.time_breaks() for c in self.children]))

    def spatial_extent(self, t):
        return max(c.spatial_extent(t) for c in self.children)

    def radial_breaks(self, t):
        return sorted({r for c in self.children for r in c.radial_breaks(t)})

    def singular_points(self, q):
        return [sp_ for c in self.children for sp_ in c.singular_points(q)]

    def lp_power(self, p, t_lo=-math.inf, t_hi=math.inf):
        if p != 1:
            raise UnsupportedVariantError("closed-form norms of sums exist only for p = 1; "
                                          "use lp_norm_upper_bound")
        return sum(c.lp_power(1, t_lo, t_hi) for c in self.children)

    def describe(self):
        return "sum(" + ";".join(c.describe() for c in self.children) + ")"


@dataclass(frozen=True, eq=False)
class Rescaled(Field):
    """K^(1/(1-lam)) T^(alpha*lam/(1-lam)) * child(x/sqrt(T), t/T)."""
    child: Field
    K: float
    lam: float
    alpha: float
    T: float

    def __post_init__(self):
        if self.lam == 1:
            raise DomainError("rescaling needs lambda != 1")
        if not self.T > 0 or not self.K > 0:
            raise DomainError("rescaling needs K > 0 and T > 0")

    @property
    def factor(self):
        e = 1.0 / (1.0 - self.lam)
        return self.K ** e * self.T ** (self.alpha * self.lam * e)

    n = property(lambda self: getattr(self.child, "n", None))
    radial = property(lambda self: self.child.radial)
    x_independent = property(lambda self: self.child.x_independent)
    exact = property(lambda self: self.child.exact)

    def value(self, x, t):
        r = math.sqrt(self.T)
        return self.factor * self.child.value(np.asarray(x) / r, np.asarray(t) / self.T)

    def smooth(self, x, s, tau):
        r = math.sqrt(self.T)
        return self.factor * self.child.smooth(np.asarray(x) / r, np.asarray(s) / self.T,
                                               np.asarray(tau) / self.T)

    def spherical_mean(self, x, rho, t):
        r = math.sqrt(self.T)
        return self.factor * self.child.spherical_mean(np.asarray(x) / r, np.asarray(rho) / r,
                                                       np.asarray(t) / self.T)

    def time_breaks(self):
        return self.T * self.child.time_breaks()

    def spatial_extent(self, t):
        return math.sqrt(self.T) * self.child.spatial_extent(t / self.T)

    def radial_breaks(self, t):
        return [math.sqrt(self.T) * r for r in self.child.radial_breaks(t / self.T)]

    def singular_points(self, q):
        return [(self.T * t, side) for t, side in self.child.singular_points(q)]

    def lp_power(self, p, t_lo=-math.inf, t_hi=math.inf):
        n = self.child.n
        inner = self.child.lp_power(p, t_lo / self.T, t_hi / self.T)
        return self.factor ** p * self.T ** (0.5 * n + 1.0) * inner

    def describe(self):
        return (f"rescale({self.child.describe()},K={_g(self.K)},T={_g(self.T)},"
                f"lambda={_g(self.lam)},alpha={_g(self.alpha)})")


# constructors -----------------------------------------------------------------------

def make_exact_solution(alpha, lam) -> ExactSolution:
    return ExactSolution(alpha, lam)


def make_paraboloid_power(n, p, gamma_exp, truncate=False) -> ParaboloidPower:
    return ParaboloidPower(n, p, gamma_exp, truncate)


def make_backward_paraboloid(n, p, gamma_exp, t0, T) -> BackwardParaboloid:
    return BackwardParaboloid(n, p, gamma_exp, t0, T)


def similarity_constant(n, alpha, lam) -> float:
    """C with J_alpha(g chi{|x|^2<t}) >= C g^(1/lam) on the paraboloid.

    C = G(n, 1, 1/(2 sqrt 3)) * B / (Gamma(alpha) M), where
    B = int_{1/4}^{3/4} (1-s)^(alpha-1) s^(alpha lam/(1-lam)) ds.
    """
    if not 0 < lam < 1:
        raise DomainError("needs 0 < lambda < 1")
    k = alpha * lam / (1.0 - lam)
    B = partial_beta(k + 1.0, alpha, 0.25, 0.75)
    M = sharp_constant(alpha, lam)
    return offset_ball_floor(n) * B / (math.exp(log_gamma(alpha)) * M)


def make_indicator_similarity(n, alpha, lam) -> IndicatorSimilarity:
    C = similarity_constant(n, alpha, lam)
    return IndicatorSimilarity(n, alpha, lam, C ** (lam / (1.0 - lam)))


def tilted_parameters(n, alpha, lam, N):
    """(delta, gamma_w, eps) chosen as in the sharpness construction."""
    M = sharp_constant(alpha, lam)
    if not 0 < N < M:
        raise DomainError(f"need 0 < N < M = {M}")
    g1 = float(exact_profile(alpha, lam, 1.0))
    g2 = float(exact_profile(alpha, lam, 2.0))
    C = g2 / (math.exp(log_gamma(alpha + 1.0)) * g1 ** (1.0 / lam))
    delta = min(0.5, ((1.0 - math.sqrt(N / M)) / C) ** (1.0 / alpha))
    gain = (M / N) ** (lam / 2.0)
    gamma_w = 2.0
    for _ in range(60):
        I = float(offset_gaussian_mass(n, 0.0, gamma_w / 2.0))
        if gain * I ** lam > 1.0:
            break
        gamma_w *= 2.0
    else:
        raise DomainError("search for the window width did not terminate")
    eps = min(0.5, math.log(gain * I ** lam) / (gamma_w * lam * math.sqrt(2.0)))
    return delta, gamma_w, eps


def make_tilted_exact(alpha, lam, N, K=1.0, n=1) -> TiltedExact:
    delta, gamma_w, eps = tilted_parameters(n, alpha, lam, N)
    return TiltedExact(n, alpha, lam, N, K, delta, gamma_w, eps)


def rescale(field: Field, K, lam, alpha, T) -> Rescaled:
    return Rescaled(field, K, lam, alpha, T)


def closed_form_lp_norm(field: Field, p, t_lo=-math.inf, t_hi=math.inf):
    """Exact L^p norm over R^n x (t_lo, t_hi); +inf when the reduced integral diverges."""
    val = field.lp_power(p, t_lo, t_hi)
    return math.inf if math.isinf(val) else val ** (1.0 / p)


def lp_norm_upper_bound(field: Field, p, t_lo=-math.inf, t_hi=math.inf):
    """Minkowski bound: sum of the children's closed-form norms."""
    if isinstance(field, Rescaled):
        n = field.child.n
        inner = lp_norm_upper_bound(field.child, p, t_lo / field.T, t_hi / field.T)
        return field.factor * field.T ** ((0.5 * n + 1.0) / p) * inner
    if isinstance(field, Sum):
        return sum(lp_norm_upper_bound(c, p, t_lo, t_hi) for c in field.children)
    return closed_form_lp_norm(field, p, t_lo, t_hi)
