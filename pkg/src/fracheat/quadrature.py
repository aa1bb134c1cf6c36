"""Quadrature settings and the batched tanh-sinh rule used by every integral.

The tanh-sinh (double exponential) rule clusters nodes at both ends of an
interval, so integrable endpoint singularities such as u^(alpha-1) or
(T - t)^(-r) cost only a few extra levels. Integrands receive the node
together with its distances to both endpoints, which lets them evaluate
singular factors without cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import special as sp
from scipy.special import expit

from .errors import DomainError, ToleranceError

SINGULARITY_MODES = ("substitution", "gauss-jacobi")
# half-width of the tanh-sinh parameter range; expit(-pi*sinh(6)) ~ 1e-275
U_MAX = 6.0


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_panels: int = 4096
    singularity_mode: str = "substitution"
    spatial_tail_sigmas: float = 8.0
    time_origin: float = 0.0

    def __post_init__(self):
        if not self.rel_tol > 0 or not self.abs_tol > 0:
            raise DomainError("rel_tol and abs_tol must be positive")
        if self.max_panels < 16:
            raise DomainError("max_panels must be at least 16")
        if self.spatial_tail_sigmas < 4:
            raise DomainError("spatial_tail_sigmas must be at least 4")
        if self.singularity_mode not in SINGULARITY_MODES:
            raise DomainError(f"unknown singularity_mode {self.singularity_mode!r}")

    @property
    def max_level(self) -> int:
        """Finest tanh-sinh level; level k uses 12 * 2^k + 1 nodes."""
        return max(3, int(math.floor(math.log2(self.max_panels / 12.0))))

    def with_(self, **changes) -> "QuadratureSpec":
        return replace(self, **changes)


@dataclass
class QuadResult:
    value: np.ndarray | float
    error: np.ndarray | float

    def __float__(self):
        return float(self.value)


@lru_cache(maxsize=16)
def _level_nodes(level: int):
    if level == 0:
        u = np.arange(-U_MAX, U_MAX + 0.5)
    else:
        h = 2.0 ** -level
        count = int(round(U_MAX / h))
        u = np.arange(-count + 1, count, 2) * h
    v = math.pi * np.sinh(u)
    ea = expit(v)
    eb = expit(-v)
    wgt = math.pi * np.cosh(u) * ea * eb
    keep = wgt > 0
    return u[keep], ea[keep], eb[keep], wgt[keep]


def tanh_sinh(func, lo, hi, rel_tol=1e-10, abs_tol=1e-14, max_level=8, min_level=3,
              strict=True):
    """Integrate over a batch of intervals [lo_i, hi_i] at once.

    ``func(idx, x, da, db)`` gets the indices of the still-active intervals,
    nodes ``x`` of shape (len(idx), m) and the distances of each node to the
    lower and upper endpoint; it returns values of the same shape.
    Non-finite values (nodes that round onto a singular endpoint) are dropped.
    Returns ``(value, error)`` arrays; raises ToleranceError when ``strict``
    and some interval misses ``max(abs_tol, rel_tol*|value|)``.
    """
    lo = np.atleast_1d(np.asarray(lo, float))
    hi = np.atleast_1d(np.asarray(hi, float))
    width = hi - lo
    B = lo.size
    value = np.zeros(B)
    error = np.zeros(B)
    raw = np.zeros(B)
    active = np.flatnonzero(width > 0)
    error[width <= 0] = 0.0
    for level in range(max_level + 1):
        if active.size == 0:
            break
        u, ea, eb, wgt = _level_nodes(level)
        w = width[active, None]
        da = w * ea
        db = w * eb
        x = np.where(u < 0, lo[active, None] + da, hi[active, None] - db)
        with np.errstate(all="ignore"):
            f = func(active, x, da, db)
            contrib = np.where(np.isfinite(f), f * wgt, 0.0)
        raw[active] += contrib.sum(axis=1)
        new = raw[active] * width[active] * 2.0 ** -level
        if level > 0:
            err = np.abs(new - value[active])
            error[active] = err
            value[active] = new
            done = (level >= min_level) & (err <= np.maximum(abs_tol, rel_tol * np.abs(new)))
            active = active[~done]
        else:
            value[active] = new
            error[active] = np.inf
    if strict and active.size:
        raise ToleranceError(
            f"tanh-sinh did not converge on {active.size} of {B} intervals "
            f"(worst error {np.max(error[active]):.3g})", value=value, error=error)
    return value, error


def integrate(f, a, b, rel_tol=1e-10, abs_tol=1e-14, max_level=10):
    """Scalar tanh-sinh integral of a vectorized ``f`` over [a, b]; b may be inf."""
    if math.isinf(b):
        # x = a + s/(1-s) maps [0, 1) onto [a, inf)
        def g(idx, s, ds0, ds1):
            x = a + ds0 / ds1
            return f(x) / (ds1 * ds1)
        val, err = tanh_sinh(g, [0.0], [1.0], rel_tol, abs_tol, max_level)
    else:
        val, err = tanh_sinh(lambda idx, x, da, db: f(x), [a], [b], rel_tol, abs_tol, max_level)
    return QuadResult(float(val[0]), float(err[0]))


@lru_cache(maxsize=64)
def gauss_jacobi_01(m: int, beta: float):
    """Nodes and weights on [0, 1] for the weight u^beta (beta > -1)."""
    x, w = sp.roots_jacobi(m, 0.0, beta)
    return 0.5 * (x + 1.0), w * 2.0 ** (-beta - 1.0)
