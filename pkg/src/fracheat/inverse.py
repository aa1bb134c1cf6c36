"""Approximate inverse of J_alpha by hypersingular finite differences.

    J_eps^-alpha u(x, t) = C(n, alpha, l) int_eps^inf tau^(-1-alpha) int e^(-|y|^2/4) D_{y,tau} u(x, t) dy dtau,
    D_{y,tau} u(x, t) = sum_k (-1)^k binom(l, k) u(x - y sqrt(k tau), t - k tau).

The y-integral of the k-th term is (4 pi)^(n/2) times the heat smoothing of
u(., t - k tau) over time k tau, so for fields with ``smooth`` it is exact.
Since C (4 pi)^(n/2) = 1/A(alpha, l), what is left is

    J_eps^-alpha u = (1/A) int_eps^inf tau^(-1-alpha) sum_k (-1)^k binom(l, k) S_u(x, k tau, t - k tau) dtau.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np
from scipy.special import comb

from .errors import DomainError, ToleranceError
from .fields import as_points
from .quadrature import QuadratureSpec, integrate
from .special import gauss_legendre, log_gamma

INNER_QUAD = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15)
_TAU_NODES = 16


@dataclass(frozen=True)
class InverseSpec:
    l: int = 2
    eps: float = 2.0 ** -12
    quad: QuadratureSpec = dc_field(default_factory=lambda: INNER_QUAD)
    tau_max: float | None = None   # None: integrate exactly, with the closed-form tail
    y_radius: float = 8.0          # y-window half-width, in standard deviations of e^(-|y|^2/4)
    time_origin: float = 0.0

    def __post_init__(self):
        if self.l < 1 or int(self.l) != self.l:
            raise DomainError("difference order l must be a positive integer")
        if not self.eps > 0:
            raise DomainError("eps must be positive")


def _check_order(alpha, l):
    if not l > alpha:
        raise DomainError(f"difference order l={l} must exceed alpha={alpha}")


def _eval(u, x, t):
    return u.value(x, t) if hasattr(u, "value") else u(x, t)


def marchaud_difference(u, l, y, tau, x, t):
    """sum_k (-1)^k binom(l, k) u(x - y sqrt(k tau), t - k tau)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    x = x[..., None] if x.ndim == 0 else x
    y = np.broadcast_to(y[..., None] if y.ndim == 0 else y, x.shape)
    total = 0.0
    for k in range(l + 1):
        total = total + (-1) ** k * comb(l, k, exact=True) * _eval(
            u, x - y * math.sqrt(k * tau), np.asarray(t, float) - k * tau)
    return total


@lru_cache(maxsize=256)
def marchaud_integral(alpha, l) -> float:
    """A(alpha, l) = int_0^inf s^(-1-alpha) (1 - e^-s)^l ds, by quadrature."""
    _check_order(alpha, l)
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    f = lambda s: s ** (-1.0 - alpha) * (-np.expm1(-s)) ** l
    return integrate(f, 0.0, 1.0, 1e-14, 1e-16).value + integrate(f, 1.0, math.inf, 1e-14, 1e-16).value


def marchaud_integral_series(alpha, l) -> float:
    """Gamma(-alpha) sum_k (-1)^k binom(l, k) k^alpha, valid for non-integer alpha."""
    _check_order(alpha, l)
    if float(alpha).is_integer():
        raise DomainError("the series form needs non-integer alpha")
    s = sum((-1) ** k * comb(l, k, exact=True) * k ** alpha for k in range(1, l + 1))
    from scipy.special import gamma
    return float(gamma(-alpha)) * s


def marchaud_constant(n, alpha, l) -> float:
    """C(n, alpha, l) = [(4 pi)^(n/2) A(alpha, l)]^-1."""
    return 1.0 / ((4.0 * math.pi) ** (0.5 * n) * marchaud_integral(alpha, l))


def _smoothing(u, n, spec, x, s, tau):
    """Heat smoothing of u; Gauss-Legendre over the y-window for plain callables."""
    if hasattr(u, "smooth"):
        return u.smooth(x, s, tau)
    m = 96
    z, w = gauss_legendre(m)
    half = spec.y_radius * math.sqrt(2.0)
    yy = (2.0 * z - 1.0) * half
    wy = 2.0 * half * w * np.exp(-yy * yy / 4.0) / math.sqrt(4.0 * math.pi)
    grids = np.meshgrid(*([yy] * n), indexing="ij")
    Y = np.stack([g.reshape(-1) for g in grids], axis=-1)
    W = np.ones(1)
    for _ in range(n):
        W = np.multiply.outer(W, wy).reshape(-1)
    out = np.zeros(np.shape(s))
    sq = np.sqrt(np.asarray(s, float))[..., None, None]
    pts = x[..., None, :] - Y * sq
    vals = _eval(u, pts, np.asarray(tau, float)[..., None])
    return np.sum(vals * W, axis=-1) + out


def _tau_edges(t, eps_min, spec, breaks):
    top = t - spec.time_origin
    if top <= eps_min:
        return np.array([eps_min]), top
    k = np.arange(0, int(math.ceil(math.log2(top / eps_min))) + 1)
    edges = set((eps_min * 2.0 ** k).tolist())
    for tb in np.append(np.asarray(breaks, float), spec.time_origin):
        if spec.time_origin <= tb < t:
            for j in range(1, spec.l + 1):
                edges.add((t - tb) / j)
    hi = top if spec.tau_max is None else min(top, spec.tau_max)
    e = np.array(sorted(v for v in edges if eps_min <= v < hi) + [hi])
    return e, top


def _panel_integrals(u, n, alpha, spec, x, t, eps_min):
    """Per-panel integrals of tau^(-1-alpha) D(tau) and the closed-form tail."""
    breaks = u.time_breaks() if hasattr(u, "time_breaks") else []
    edges, top = _tau_edges(t, eps_min, spec, breaks)
    l = spec.l
    if edges.size < 2:
        lo = hi = np.zeros(0)
        panel = np.zeros(0)
    else:
        lo, hi = edges[:-1], edges[1:]
        z, w = gauss_legendre(_TAU_NODES)
        tau = lo[:, None] + (hi - lo)[:, None] * z
        D = np.zeros(tau.shape)
        xp = np.broadcast_to(x, tau.shape + (n,))
        for k in range(l + 1):
            c = (-1) ** k * comb(l, k, exact=True)
            if k == 0:
                D = D + c * float(_eval(u, x[None, :], np.array([t]))[0])
            else:
                D = D + c * _smoothing(u, n, spec, xp, k * tau, t - k * tau)
        panel = np.sum(w * tau ** (-1.0 - alpha) * D, axis=1) * (hi - lo)
    u0 = float(_eval(u, x[None, :], np.array([t]))[0])
    if spec.tau_max is None or spec.tau_max >= top:
        start = max(top, eps_min)
        tail = u0 * start ** -alpha / alpha
        trunc = 0.0
    else:
        tail = 0.0
        trunc = 2.0 ** l * abs(u0) * spec.tau_max ** -alpha / alpha
    return lo, panel, tail, trunc


@dataclass
class InverseScan:
    eps: np.ndarray            # dyadic eps values, decreasing
    values: np.ndarray         # (len(eps), points)
    extrapolated: np.ndarray   # Richardson value from the two smallest eps
    rate: float                # assumed rate l - alpha
    observed_rate: np.ndarray  # log2 of successive difference ratios, per point
    cauchy_ok: bool
    truncation: np.ndarray


def inverse_scan(u, n, alpha, spec: InverseSpec, x, t, levels=8, strict=False) -> InverseScan:
    """J_eps^-alpha u for eps = spec.eps * 2^j, j = levels-1, ..., 0, plus Richardson extrapolation."""
    _check_order(alpha, spec.l)
    xp = as_points(x, n)
    tt = np.broadcast_to(np.asarray(t, float), xp.shape[:-1])
    xp = np.broadcast_to(xp, tt.shape + (n,)).reshape(-1, n)
    tt = tt.reshape(-1)
    eps = spec.eps * 2.0 ** np.arange(levels - 1, -1, -1)
    A = marchaud_integral(alpha, spec.l)
    vals = np.zeros((levels, tt.size))
    trunc = np.zeros(tt.size)
    for i in range(tt.size):
        if tt[i] <= spec.time_origin:
            continue
        lo, panel, tail, trunc[i] = _panel_integrals(u, n, alpha, spec, xp[i], tt[i], spec.eps)
        for j, e in enumerate(eps):
            vals[j, i] = (np.sum(panel[lo >= e * (1 - 1e-12)]) + tail) / A
    rate = spec.l - alpha
    r = 2.0 ** rate
    extra = (r * vals[-1] - vals[-2]) / (r - 1.0) if levels >= 2 else vals[-1]
    diffs = np.abs(np.diff(vals, axis=0))
    with np.errstate(divide="ignore", invalid="ignore"):
        observed = np.log2(diffs[:-1] / diffs[1:]) if levels >= 3 else np.zeros((0, tt.size))
    # Cauchy test: successive differences shrink (one violation tolerated for noise)
    shrinking = diffs[1:] <= diffs[:-1] * 1.0001 + 1e-13
    cauchy_ok = bool(np.all(np.sum(~shrinking, axis=0) <= 1)) if levels >= 3 else True
    if strict and not cauchy_ok:
        raise ToleranceError("dyadic eps sequence failed the Cauchy test", value=vals, error=diffs)
    return InverseScan(eps, vals, extra, rate, observed, cauchy_ok, trunc)


def j_inverse(u, n, alpha, spec: InverseSpec, x, t):
    """J_eps^-alpha u(x, t) at eps = spec.eps."""
    scan = inverse_scan(u, n, alpha, spec, x, t, levels=1)
    out = scan.values[0]
    return float(out[0]) if np.ndim(t) == 0 and as_points(x, n).ndim == 1 else out


def recover(u, n, alpha, spec: InverseSpec, x, t, levels=8):
    """Richardson-extrapolated recovery of f from u = J_alpha f."""
    return inverse_scan(u, n, alpha, spec, x, t, levels).extrapolated


def calibrate_constant(u, f_values, n, alpha, spec: InverseSpec, x, t, levels=8) -> float:
    """Least-squares C making C * int int tau^(-1-alpha) e^(-|y|^2/4) D u match f."""
    scan = inverse_scan(u, n, alpha, spec, x, t, levels)
    # un-normalized double integral: the y-integral contributes (4 pi)^(n/2)
    I = scan.extrapolated * marchaud_integral(alpha, spec.l) * (4.0 * math.pi) ** (0.5 * n)
    f = np.asarray(f_values, float).reshape(-1)
    return float(np.dot(I, f) / np.dot(I, I))
