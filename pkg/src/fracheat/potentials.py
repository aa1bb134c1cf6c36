"""Space-time potentials J_alpha f and their scaled and degenerate variants.

All of them are computed from one representation. Substituting the time lag
t - tau = b*u turns the convolution with a^-n b^-1 Phi_alpha(x/a, t/b) into

    J_{alpha,a,b} f(x, t) = int_0^U u^(alpha-1)/Gamma(alpha) * S_f(x, a^2 u, t - b u) du,

with U = (t - origin)/b and S_f(x, s, tau) the heat smoothing of f(., tau)
over time s (``Field.smooth``). The spatial integral is therefore done in
closed form or by a 1-D ring integral, and only the lag u is quadratured.
a = 0 gives the Riemann-Liouville integral (S_f is then the point value).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ToleranceError
from .fields import Field, as_points
from .quadrature import QuadResult, QuadratureSpec, gauss_jacobi_01, tanh_sinh
from .special import log_gamma, riesz_constant, sphere_area

DEFAULT_QUAD = QuadratureSpec()
_GJ_ORDERS = (8, 16, 32, 64, 128, 256, 512)


@dataclass(frozen=True)
class SlabRegion:
    """Omega = R^n x (a, b)."""
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise DomainError("slab needs a < b")

    @property
    def width(self):
        return self.b - self.a


def _field_dim(field, n):
    fn = getattr(field, "n", None)
    if fn is not None and n is not None and fn != n:
        raise DomainError(f"field has dimension {fn}, got n={n}")
    return n or fn or 1


def _prepare(n, x, t):
    xp = as_points(x, n)
    t = np.asarray(t, float)
    shape = np.broadcast_shapes(xp.shape[:-1], t.shape)
    xp = np.broadcast_to(xp, shape + (n,)).reshape(-1, n)
    return xp, np.broadcast_to(t, shape).reshape(-1), shape


def _finish(res: QuadResult, shape, full_output):
    if not shape:
        res = QuadResult(float(res.value[0]), float(res.error[0]))
    else:
        res = QuadResult(res.value.reshape(shape), res.error.reshape(shape))
    return res if full_output else res.value


def _lag_panels(t, U, breaks, b):
    """Panel endpoints in u with the exact tau at each endpoint.

    Candidates: 0, U, min(U/2, first break), the field's time breaks and
    u = 2^k for U > 2. Returns flat arrays (point, ulo, uhi, tau_lo, tau_hi).
    """
    P = t.size
    brk = np.asarray(breaks, float)
    ub = (t[:, None] - brk[None, :]) / b
    inside = (ub > 0) & (ub < U[:, None])
    ub = np.where(inside, ub, np.nan)
    tb = np.where(inside, np.broadcast_to(brk, ub.shape), np.nan)
    first = np.fmin(0.5 * U, np.nanmin(np.where(inside, ub, np.inf), axis=1))
    kmax = int(np.ceil(np.log2(max(np.max(U), 2.0))))
    geo = 2.0 ** np.arange(1, kmax + 1)
    ug = np.where(geo[None, :] < U[:, None], geo[None, :], np.nan)
    cu = np.concatenate([np.zeros((P, 1)), U[:, None], first[:, None], ub, ug], axis=1)
    ct = np.concatenate([t[:, None], t[:, None] - b * U[:, None], t[:, None] - b * first[:, None],
                         tb, t[:, None] - b * ug], axis=1)
    order = np.argsort(cu, axis=1)  # nan sorts last
    cu = np.take_along_axis(cu, order, axis=1)
    ct = np.take_along_axis(ct, order, axis=1)
    lo, hi = cu[:, :-1], cu[:, 1:]
    ok = np.isfinite(lo) & np.isfinite(hi) & (hi > lo)
    pt = np.broadcast_to(np.arange(P)[:, None], lo.shape)[ok]
    return pt, lo[ok], hi[ok], ct[:, :-1][ok], ct[:, 1:][ok]


def _converged(val, err, quad):
    return err <= np.maximum(quad.abs_tol, quad.rel_tol * np.abs(val))


def lag_integral(field: Field, alpha, a, b, x, t, s0=None, origin=0.0, quad=DEFAULT_QUAD,
                 strict=True) -> QuadResult:
    """int_0^U u^(alpha-1)/Gamma(alpha) S_f(x, s0 + a^2 u, t - b u) du for points x (P, n)."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if not b > 0 or a < 0:
        raise DomainError("lag integral needs b > 0 and a >= 0")
    P = t.size
    s0 = np.zeros(P) if s0 is None else np.broadcast_to(np.asarray(s0, float), (P,))
    value = np.zeros(P)
    error = np.zeros(P)
    U = (t - origin) / b
    live = U > 0
    if not np.any(live):
        return QuadResult(value, error)
    li = np.flatnonzero(live)
    pt, ulo, uhi, tlo, thi = _lag_panels(t[li], U[li], field.time_breaks(), b)
    pt = li[pt]
    lg = log_gamma(alpha)
    a2 = a * a
    xs = x

    def smooth_at(p, s, tau):
        xp = np.broadcast_to(xs[p][:, None, :], s.shape + (xs.shape[1],))
        return field.smooth(xp, s, tau)

    singular_first = alpha < 1.0
    head = (ulo == 0) & singular_first
    regular = np.flatnonzero(~head)
    bad = []

    if regular.size:
        def f_reg(idx, u, da, db):
            j = regular[idx]
            near_lo = da < db
            tau = np.where(near_lo, tlo[j, None] - b * da, thi[j, None] + b * db)
            us = np.where(ulo[j, None] == 0, np.where(near_lo, da, u), u)
            p = pt[j]
            w = np.exp((alpha - 1.0) * np.log(us) - lg)
            return w * smooth_at(p, s0[p, None] + a2 * us, tau)
        v, e = tanh_sinh(f_reg, ulo[regular], uhi[regular], quad.rel_tol, quad.abs_tol,
                         quad.max_level, strict=False)
        np.add.at(value, pt[regular], v)
        np.add.at(error, pt[regular], e)
        bad.append(~_converged(v, e, quad))

    hidx = np.flatnonzero(head)
    if hidx.size:
        if quad.singularity_mode == "substitution":
            # v = u^alpha removes the u^(alpha-1) weight
            vhi = uhi[hidx] ** alpha
            lg1 = log_gamma(alpha + 1.0)

            def f_sub(idx, v, da, db):
                j = hidx[idx]
                u = np.where(da < db, da, vhi[idx, None] - db) ** (1.0 / alpha)
                p = pt[j]
                return math.exp(-lg1) * smooth_at(p, s0[p, None] + a2 * u, t[p, None] - b * u)
            v, e = tanh_sinh(f_sub, np.zeros(hidx.size), vhi, quad.rel_tol, quad.abs_tol,
                             quad.max_level, strict=False)
        else:
            v, e = _gauss_jacobi_head(smooth_at, alpha, a2, b, pt[hidx], uhi[hidx], s0, t, quad)
        np.add.at(value, pt[hidx], v)
        np.add.at(error, pt[hidx], e)
        bad.append(~_converged(v, e, quad))

    if strict and any(np.any(m) for m in bad):
        raise ToleranceError(f"lag quadrature missed tolerance at {sum(int(np.sum(m)) for m in bad)} "
                             f"panels (max error {np.max(error):.3g})", value=value, error=error)
    return QuadResult(value, error)


def _gauss_jacobi_head(smooth_at, alpha, a2, b, p, u1, s0, t, quad):
    # int_0^u1 u^(alpha-1) S du = u1^alpha int_0^1 w^(alpha-1) S(u1 w) dw
    scale = np.exp(alpha * np.log(u1) - log_gamma(alpha))
    prev = None
    err = np.full(p.size, np.inf)
    active = np.arange(p.size)
    val = np.zeros(p.size)
    for m in _GJ_ORDERS:
        w, W = gauss_jacobi_01(m, alpha - 1.0)
        q = p[active]
        u = u1[active, None] * w
        cur = scale[active] * np.sum(W * smooth_at(q, s0[q, None] + a2 * u, t[q, None] - b * u), axis=1)
        if prev is not None:
            err[active] = np.abs(cur - prev)
            val[active] = cur
            done = _converged(cur, err[active], quad)
            active = active[~done]
            prev = cur[~done]
        else:
            val[active] = cur
            prev = cur
        if active.size == 0:
            break
    return val, err


# public operators --------------------------------------------------------------

def j_alpha(field: Field, n, alpha, x, t, quad: QuadratureSpec = DEFAULT_QUAD, full_output=False):
    """J_alpha f(x, t) = int_0^t int Phi_alpha(x - xi, t - tau) f(xi, tau) dxi dtau."""
    return j_scaled(field, n, alpha, 1.0, 1.0, x, t, quad, full_output)


def j_scaled(field: Field, n, alpha, a, b, x, t, quad: QuadratureSpec = DEFAULT_QUAD,
             full_output=False):
    """Convolution with a^-n b^-1 Phi_alpha(x/a, t/b).

    a = 0 gives b^-alpha times the Riemann-Liouville integral, b = 0 gives
    a^(-2 alpha) times the Riesz potential of f(., t).
    """
    if a < 0 or b < 0:
        raise DomainError("scales must be nonnegative")
    if a == 0 and b == 0:
        raise DomainError("a and b cannot both vanish")
    n = _field_dim(field, n)
    if b == 0:
        r = riesz(field, n, alpha, x, t, quad, full_output=True)
        c = a ** (-2.0 * alpha)
        res = QuadResult(c * r.value, c * r.error)
        return res if full_output else res.value
    xp, tp, shape = _prepare(n, x, t)
    res = lag_integral(field, alpha, a, b, xp, tp, origin=quad.time_origin, quad=quad)
    return _finish(res, shape, full_output)


def riemann_liouville(field: Field, alpha, x, t, quad: QuadratureSpec = DEFAULT_QUAD, n=None,
                      full_output=False):
    """int_origin^t (t - tau)^(alpha-1)/Gamma(alpha) f(x, tau) dtau."""
    n = _field_dim(field, n)
    xp, tp, shape = _prepare(n, x, t)
    res = lag_integral(field, alpha, 0.0, 1.0, xp, tp, origin=quad.time_origin, quad=quad)
    return _finish(res, shape, full_output)


def v_alpha(field: Field, n, alpha, slab: SlabRegion, x, t, quad: QuadratureSpec = DEFAULT_QUAD,
            full_output=False):
    """Convolution with Phi_alpha restricted to Omega = R^n x (slab.a, slab.b)."""
    tt = np.asarray(t, float)
    if np.any((tt <= slab.a) | (tt >= slab.b)):
        raise DomainError("t must lie inside the slab")
    n = _field_dim(field, n)
    xp, tp, shape = _prepare(n, x, t)
    res = lag_integral(field, alpha, 1.0, 1.0, xp, tp, origin=slab.a, quad=quad)
    return _finish(res, shape, full_output)


def riesz(field: Field, n, alpha, x, t, quad: QuadratureSpec = DEFAULT_QUAD, full_output=False):
    """gamma(n, alpha)^-1 int f(y, t) |x - y|^(2 alpha - n) dy, in polar coordinates about x.

    Writes the integral as |S^(n-1)| int_0^inf rho^(2 alpha - 1) m(rho) drho with
    m the spherical mean of f(., t) around x; the rho^(2 alpha - 1) weight is
    integrable and handled by the endpoint clustering of the tanh-sinh rule.
    """
    n = _field_dim(field, n)
    gam = riesz_constant(n, alpha)
    xp, tp, shape = _prepare(n, x, t)
    value = np.zeros(tp.size)
    error = np.zeros(tp.size)
    for i in range(tp.size):
        v, e = _riesz_point(field, n, alpha, xp[i], tp[i], quad)
        value[i], error[i] = v / gam, e / gam
    return _finish(QuadResult(value, error), shape, full_output)


def _riesz_point(field, n, alpha, x, t, quad):
    if t <= quad.time_origin:
        return 0.0, 0.0
    d = float(np.sqrt(np.sum(x * x)))
    area = sphere_area(n)
    if field.x_independent:
        m0 = field.spherical_mean(x[None, :], np.array([0.0]), np.array([t]))[0]
        return (math.inf if m0 != 0 else 0.0), 0.0
    if n == 1:
        cuts = {abs(d - r) for r in field.radial_breaks(t)} | {d + r for r in field.radial_breaks(t)}
    else:
        cuts = {abs(r - d) for r in field.radial_breaks(t)} | {r + d for r in field.radial_breaks(t)}
    ext = field.spatial_extent(t)
    top = d + ext if math.isfinite(ext) else math.inf
    cuts = sorted(c for c in cuts if 0 < c < top)
    if not cuts and math.isinf(top):
        cuts = [max(d, 1.0)]
    edges = [0.0] + cuts + ([top] if math.isfinite(top) else [])
    lo = np.array(edges[:-1])
    hi = np.array(edges[1:])

    def mean(rho):
        r = rho.reshape(-1)
        out = field.spherical_mean(np.broadcast_to(x, (r.size, n)), r, np.full(r.size, t))
        return np.asarray(out).reshape(rho.shape)

    def f(idx, rho, da, db):
        r = np.where(lo[idx, None] == 0, np.where(da < db, da, rho), rho)
        return r ** (2.0 * alpha - 1.0) * mean(r)

    v, e = tanh_sinh(f, lo, hi, quad.rel_tol, quad.abs_tol, quad.max_level, strict=False)
    total, err = float(np.sum(v)), float(np.sum(e))
    if math.isinf(top):
        start = edges[-1]

        def g(idx, s, ds0, ds1):
            r = start + ds0 / ds1
            return r ** (2.0 * alpha - 1.0) * mean(r) / (ds1 * ds1)
        v2, e2 = tanh_sinh(g, [0.0], [1.0], quad.rel_tol, quad.abs_tol, quad.max_level, strict=False)
        total += float(v2[0])
        err += float(e2[0])
    if err > max(quad.abs_tol, quad.rel_tol * abs(total)) * (len(edges) + 1):
        raise ToleranceError(f"Riesz quadrature error {err:.3g}", value=total, error=err)
    return area * total, area * err


class PotentialField(Field):
    """u = J_alpha f as a field, with heat smoothing

    S_u(x, s, tau) = int_0^tau v^(alpha-1)/Gamma(alpha) S_f(x, s + v, tau - v) dv.
    """

    def __init__(self, field: Field, alpha, quad: QuadratureSpec = DEFAULT_QUAD, origin=0.0):
        self.field = field
        self.alpha = alpha
        self.quad = quad
        self.origin = origin
        self.n = getattr(field, "n", None)
        self.radial = field.radial
        self.x_independent = field.x_independent

    def value(self, x, t):
        return self.smooth(x, 0.0, t)

    def smooth(self, x, s, tau):
        x = np.asarray(x, float)
        shape = np.broadcast_shapes(x.shape[:-1], np.shape(s), np.shape(tau))
        xp = np.broadcast_to(x, shape + x.shape[-1:]).reshape(-1, x.shape[-1])
        sp_ = np.broadcast_to(np.asarray(s, float), shape).reshape(-1)
        tp = np.broadcast_to(np.asarray(tau, float), shape).reshape(-1)
        res = lag_integral(self.field, self.alpha, 1.0, 1.0, xp, tp, s0=sp_, origin=self.origin,
                           quad=self.quad, strict=False)
        return res.value.reshape(shape)

    def time_breaks(self):
        return self.field.time_breaks()

    def spatial_extent(self, t):
        return math.inf

    def describe(self):
        return f"potential({self.field.describe()},alpha={format(float(self.alpha), '.17g')})"
