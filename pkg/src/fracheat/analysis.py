"""Region classification, sup bounds, Picard iteration and numerical diagnostics."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import DomainError, ToleranceError, UnsupportedVariantError
from .fields import Field, RadialIndicator, Sampled, as_points
from .potentials import DEFAULT_QUAD, SlabRegion, j_alpha, j_scaled, lag_integral
from .quadrature import QuadratureSpec, gauss_jacobi_01, tanh_sinh
from .report import Report
from .special import (ball_volume, gauss_legendre, heat_ball_mass_unchecked, log_gamma,
                      mbar_constant, sharp_constant, sphere_area)

D_BAND = 1e-12


class RegionLabel(enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"


def critical_alpha(lam, p, n):
    """alpha = (n+2)/(2p) (1 - 1/lambda); exact for rational inputs."""
    if all(isinstance(v, Rational) for v in (lam, p, n)):
        lam, p = Fraction(lam), Fraction(p)
        return Fraction(n + 2) / (2 * p) * (1 - 1 / lam)
    return (n + 2) / (2.0 * p) * (1.0 - 1.0 / lam)


def classify(lam, alpha, p, n) -> RegionLabel:
    if not (lam > 0 and alpha > 0 and p >= 1 and n >= 1):
        raise DomainError("classify needs lambda > 0, alpha > 0, p >= 1, n >= 1")
    if lam < 1:
        return RegionLabel.B
    if lam == 1:
        return RegionLabel.A
    theta = critical_alpha(lam, p, n)
    if all(isinstance(v, Rational) for v in (lam, alpha, p, n)):
        diff = Fraction(alpha) - theta
        on_curve = diff == 0
    else:
        diff = float(alpha) - float(theta)
        on_curve = abs(diff) <= D_BAND * max(abs(float(theta)), abs(float(alpha)))
    if on_curve:
        return RegionLabel.D
    return RegionLabel.A if diff > 0 else RegionLabel.C


@dataclass(frozen=True)
class ParabolicBox:
    """R = {|x| < sqrt(t_j), t_j < t < 2 t_j}."""
    t_j: float

    def __post_init__(self):
        if not self.t_j > 0:
            raise DomainError("box time must be positive")

    @property
    def t_lo(self):
        return self.t_j

    @property
    def t_hi(self):
        return 2.0 * self.t_j

    @property
    def radius(self):
        return math.sqrt(self.t_j)


def sup_bounds(K, lam, alpha, b):
    """(sup f, sup J_alpha f) over R^n x (0, b) for subsolutions with constant K."""
    if not 0 < lam < 1:
        raise DomainError("sup bounds need 0 < lambda < 1")
    if not b > 0:
        raise DomainError("b must be positive")
    base = sharp_constant(alpha, lam) * b ** alpha
    e = 1.0 / (1.0 - lam)
    return K ** e * base ** (lam * e), K ** e * base ** e


@dataclass
class GammaSequence:
    values: np.ndarray
    limit: float


def gamma_sequence(alpha, lam, j_max) -> GammaSequence:
    """gamma_1 = 1, gamma_{j+1} = (Mbar gamma_j)^lambda, with its fixed point Mbar^(lambda/(1-lambda))."""
    if not 0 < lam < 1:
        raise DomainError("needs 0 < lambda < 1")
    mb = mbar_constant(alpha, lam)
    vals = np.empty(j_max)
    g = 1.0
    for j in range(j_max):
        vals[j] = g
        g = (mb * g) ** lam
    return GammaSequence(vals, mb ** (lam / (1.0 - lam)))


# Picard iteration --------------------------------------------------------------

@dataclass(frozen=True)
class PicardGrid:
    """Radial nodes r_i = i*dr (i < nr) and times t_j = j*dt (j <= nt), dt = t_max/nt.

    Node i carries the shell [r_i - dr/2, r_i + dr/2); the last shell extends to
    infinity, so data constant in x is represented without truncation.
    """
    n: int = 1
    x_max: float = 4.0
    nr: int = 33
    t_max: float = 1.0
    nt: int = 40

    @property
    def r(self):
        return np.linspace(0.0, self.x_max, self.nr)

    @property
    def t(self):
        return np.linspace(0.0, self.t_max, self.nt + 1)


@dataclass
class PicardResult:
    sups: list
    values: np.ndarray      # (nr, nt+1) on the last iterate
    grid: PicardGrid
    diverged: bool
    field: Sampled | None
    notes: str = ""


def _picard_weights(grid: PicardGrid, alpha, m_gj=24, m_gl=12):
    """W[m, i, k]: J_alpha of (shell k) x (time hat centred m steps back), at node r_i."""
    n, r, dt = grid.n, grid.r, grid.t_max / grid.nt
    dr = r[1] - r[0] if r.size > 1 else grid.x_max
    inner = np.maximum(r - 0.5 * dr, 0.0)
    outer = r + 0.5 * dr
    outer[-1] = math.inf
    g = math.exp(-log_gamma(alpha))

    def shell_mass(s):
        # s: (q,) lags -> (q, nr, nr) heat mass of shell k seen from r_i
        d = r[None, :, None]
        ss = s[:, None, None]
        mo = heat_ball_mass_unchecked(n, np.broadcast_to(d, (s.size, r.size, r.size)),
                                      np.broadcast_to(ss, (s.size, r.size, r.size)),
                                      np.broadcast_to(outer[None, None, :], (s.size, r.size, r.size)))
        mi = heat_ball_mass_unchecked(n, np.broadcast_to(d, (s.size, r.size, r.size)),
                                      np.broadcast_to(ss, (s.size, r.size, r.size)),
                                      np.broadcast_to(inner[None, None, :], (s.size, r.size, r.size)))
        return mo - mi

    W = np.zeros((grid.nt, r.size, r.size))
    # lag piece [0, dt] of the hat centred at lag 0 (m = 0) and lag dt (m = 1)
    w0, W0 = gauss_jacobi_01(m_gj, alpha - 1.0)
    s0 = w0 * dt
    M0 = shell_mass(s0)
    scale0 = dt ** alpha * g
    W[0] += scale0 * np.einsum("q,q,qik->ik", W0, 1.0 - w0, M0)
    if grid.nt > 1:
        W[1] += scale0 * np.einsum("q,q,qik->ik", W0, w0, M0)
    z, wz = gauss_legendre(m_gl)
    for m in range(1, grid.nt):
        # hat m: rising on [(m-1)dt, m dt] (handled below for m-1 >= 1), falling on [m dt, (m+1) dt]
        for lo, shape in ((m * dt, 1.0 - z), ((m - 1) * dt, z)):
            if lo == 0.0:
                continue
            s = lo + dt * z
            ker = s ** (alpha - 1.0) * g
            W[m] += dt * np.einsum("q,q,q,qik->ik", wz, ker, shape, shell_mass(s))
    return W


def picard(field0: Field, K, lam, alpha, grid: PicardGrid = PicardGrid(), iters=50,
           quad: QuadratureSpec = DEFAULT_QUAD, guard=1e100) -> PicardResult:
    """Iterate f <- K (J_alpha f)^lambda on a radial shell x piecewise-linear time grid.

    The first step applies J_alpha to field0 exactly; later steps use the
    discrete weights. Returns the grid sup of every iterate.
    """
    n = grid.n
    r, t = grid.r, grid.t
    pts = np.zeros((r.size * t.size, n))
    pts[:, 0] = np.repeat(r, t.size)
    tt = np.tile(t, r.size)
    sups = [float(np.max(field0.value(pts, tt)))]
    Jf = j_alpha(field0, n, alpha, pts, tt, quad).reshape(r.size, t.size)
    f = K * np.maximum(Jf, 0.0) ** lam
    f[:, 0] = 0.0
    sups.append(float(np.max(f)))
    W = _picard_weights(grid, alpha) if iters > 1 else None
    diverged = False
    for _ in range(iters - 1):
        if not np.isfinite(sups[-1]) or sups[-1] > guard:
            diverged = True
            break
        Jd = np.zeros_like(f)
        for j in range(1, t.size):
            # nodes t_1..t_j carry hats centred at lags m = j - j' in 0..j-1
            mm = np.arange(j)
            Jd[:, j] = np.einsum("mik,km->i", W[mm], f[:, j - mm])
        f = K * np.maximum(Jd, 0.0) ** lam
        sups.append(float(np.max(f)))
    if sups[-1] > guard:
        diverged = True
    fld = None
    if n == 1:
        xs = np.concatenate([-r[:0:-1], r])
        vals = np.concatenate([f[:0:-1], f], axis=0)
        fld = Sampled((xs,), t, vals, extend="clamp")
    notes = (f"radial shells dr={r[1] - r[0]:.6g} up to {grid.x_max:.6g} with an unbounded outer "
             f"shell; piecewise-linear in t with dt={grid.t_max / grid.nt:.6g}")
    return PicardResult(sups, f, grid, diverged, fld, notes)


# subsolution check ---------------------------------------------------------------

def verify_subsolution(field: Field, K, lam, alpha, sample_points, quad: QuadratureSpec = DEFAULT_QUAD,
                       tol=1e-6, n=None) -> Report:
    """Check 0 <= f and f <= K (J_alpha f)^lambda at the sample points (x, t)."""
    x, t = sample_points
    n = n or getattr(field, "n", None) or (np.shape(x)[-1] if np.ndim(x) > 1 else 1)
    xp = as_points(x, n)
    t = np.broadcast_to(np.asarray(t, float), xp.shape[:-1])
    f = field.value(xp, t)
    Jf = j_alpha(field, n, alpha, xp, t, quad)
    rhs = K * np.maximum(Jf, 0.0) ** lam
    pos = f > 0
    rel = np.where(pos, (f - rhs) / np.where(pos, f, 1.0), 0.0)
    rep = Report(metadata={"field": field.describe(), "points": int(f.size)})
    params = dict(field=field.describe(), K=K, **{"lambda": lam}, alpha=alpha)
    rep.add("subsolution.nonnegative", float(np.min(f)), 0.0, 0.0, "min", **params)
    rep.add("subsolution.max_relative_violation", float(max(np.max(rel), 0.0)), 0.0, tol, "max", **params)
    return rep


# box norms ---------------------------------------------------------------------------

@dataclass
class BoxNorm:
    value: float
    error: float
    certified: bool = False
    certificate: str = ""


def _box_extent(box):
    if isinstance(box, ParabolicBox):
        return box.t_lo, box.t_hi, box.radius
    if isinstance(box, SlabRegion):
        return box.a, box.b, math.inf
    raise DomainError("box must be a ParabolicBox or a SlabRegion")


def divergence_certificate(field: Field, q, box):
    """Return a text certificate when a singular point of the field lies in the box."""
    lo, hi, _ = _box_extent(box)
    n = getattr(field, "n", None)
    for ts, side in field.singular_points(q):
        inside = (lo < ts <= hi) if side == "below" else (lo <= ts < hi)
        if inside:
            return (f"L^{q} norm diverges at t*={ts:.17g} ({side}): local exponent "
                    f">= (n+2)/(2q) = {(n + 2) / (2.0 * q):.17g}")
    return None


def box_norm(field: Field, q, box, quad: QuadratureSpec = DEFAULT_QUAD) -> BoxNorm:
    """L^q norm of f over a parabolic box or slab; +inf with a certificate when it diverges."""
    if q < 1:
        raise DomainError("q must be at least 1")
    lo, hi, rad = _box_extent(box)
    lo = max(lo, quad.time_origin)
    if not hi > lo:
        return BoxNorm(0.0, 0.0)
    if math.isfinite(q):
        cert = divergence_certificate(field, q, box)
        if cert:
            return BoxNorm(math.inf, 0.0, True, cert)
    n = getattr(field, "n", None) or 1
    breaks = [b for b in np.unique(field.time_breaks()) if lo < b < hi]
    edges = np.array([lo] + breaks + [hi])
    if math.isinf(q):
        return BoxNorm(_grid_sup(field, n, lo, hi, rad), math.nan)
    if isinstance(field, RadialIndicator):
        vol = ball_volume(n)

        def f(idx, t, da, db):
            tt = np.where(da < db, edges[idx, None] + da, edges[idx + 1, None] - db)
            A, R, m = field.amp_radius(tt)
            return np.where(m, np.abs(A) ** q * vol * np.minimum(R, rad) ** n, 0.0)
        v, e = tanh_sinh(f, edges[:-1], edges[1:], quad.rel_tol, quad.abs_tol, quad.max_level,
                         strict=False)
    else:
        v, e = tanh_sinh(_tensor_integrand(field, n, q, rad, edges), edges[:-1], edges[1:],
                         quad.rel_tol, quad.abs_tol, quad.max_level, strict=False)
    total, err = float(np.sum(v)), float(np.sum(e))
    if err > max(quad.abs_tol, quad.rel_tol * abs(total)) * len(v):
        raise ToleranceError(f"box norm quadrature error {err:.3g}", value=total, error=err)
    val = total ** (1.0 / q)
    return BoxNorm(val, err / (q * max(total, 1e-300)) * val)


def _tensor_integrand(field, n, q, rad, edges, level=6):
    # inner radial (or x for n = 1) integral with a fixed tanh-sinh rule on [0, 1]
    from .quadrature import _level_nodes
    ea = np.concatenate([_level_nodes(k)[1] for k in range(level + 1)])
    wgt = np.concatenate([_level_nodes(k)[3] for k in range(level + 1)]) * 2.0 ** -level

    def inner(t):
        shape = t.shape
        tt = t.reshape(-1)
        top = np.array([min(rad, field.spatial_extent(s)) for s in tt])
        infinite = ~np.isfinite(top)
        # map [0, 1) -> [0, inf) where the extent is unbounded
        z = ea[None, :]
        r = np.where(infinite[:, None], z / (1.0 - z), top[:, None] * z)
        jac = np.where(infinite[:, None], 1.0 / (1.0 - z) ** 2, top[:, None])
        if n == 1 and not field.radial:
            pts_p = r[..., None]
            vals = (np.abs(field.value(pts_p, tt[:, None])) ** q
                    + np.abs(field.value(-pts_p, tt[:, None])) ** q)
            meas = 1.0
        else:
            pts = np.zeros(r.shape + (n,))
            pts[..., 0] = r
            vals = np.abs(field.value(pts, tt[:, None])) ** q
            meas = sphere_area(n) * r ** (n - 1)
        prod = vals * meas * jac
        out = np.sum(np.where(np.isfinite(prod), prod, 0.0) * wgt, axis=1)
        return out.reshape(shape)

    def f(idx, t, da, db):
        return inner(t)
    return f


def _grid_sup(field, n, lo, hi, rad, m=64):
    t = lo + (np.arange(m) + 0.5) / m * (hi - lo)
    R = rad if math.isfinite(rad) else 8.0 * math.sqrt(hi)
    r = (np.arange(m) + 0.5) / m * R
    pts = np.zeros((m, m, n))
    pts[..., 0] = r[None, :]
    return float(np.max(np.abs(field.value(pts, t[:, None]))))


# limit scans --------------------------------------------------------------------------

def limit_scan(field: Field, n, alpha, mode, param_seq, sample_points, quad: QuadratureSpec = DEFAULT_QUAD,
               final_tol=1e-3) -> Report:
    """max over sample points of |J_{alpha,a,1} f - J_{alpha,0,1} f| (time-limit) or
    |J_{alpha,1,b} f - J_{alpha,1,0} f| (space-limit) for each parameter."""
    if mode not in ("time-limit", "space-limit"):
        raise DomainError("mode must be 'time-limit' or 'space-limit'")
    if mode == "space-limit" and not 0 < 2 * alpha < n:
        raise DomainError("space-limit needs 0 < 2 alpha < n")
    x, t = sample_points
    xp = as_points(x, n)
    t = np.broadcast_to(np.asarray(t, float), xp.shape[:-1])
    if mode == "time-limit":
        ref = j_scaled(field, n, alpha, 0.0, 1.0, xp, t, quad)
        approx = lambda a: j_scaled(field, n, alpha, a, 1.0, xp, t, quad)
    else:
        ref = j_scaled(field, n, alpha, 1.0, 0.0, xp, t, quad)
        approx = lambda b: j_scaled(field, n, alpha, 1.0, b, xp, t, quad)
    errors = [float(np.max(np.abs(approx(c) - ref))) for c in param_seq]
    rep = Report(metadata={"mode": mode, "params": list(param_seq), "errors": errors,
                           "field": field.describe()})
    name = "limits." + mode.split("-")[0]
    for c, e in zip(param_seq, errors):
        rep.add(name + ".error", e, 0.0, math.inf, "max", param=c, alpha=alpha, n=n)
    if all(e == 0 for e in errors):
        dec = True
    else:
        dec = all(b < a for a, b in zip(errors, errors[1:]))
    rep.add(name + ".strictly_decreasing", float(dec), 1.0, 0.0, "abs", alpha=alpha, n=n)
    rep.add(name + ".final_error", errors[-1], 0.0, final_tol, "max", alpha=alpha, n=n)
    return rep
