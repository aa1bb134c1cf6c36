"""Subsolutions whose L^q norms blow up on a sequence of parabolic boxes.

Both constructions add disjoint backward paraboloids f_j, each singular at its
apex time T_j, to a forward paraboloid f_0. The small-time family has
T_j -> 0 and the large-time family has T_j -> inf. The sum satisfies
f <= C (J_alpha f)^lambda for some C. That C is estimated on samples, and the
field is then multiplied by kappa = C^(1/(lambda-1)), which gives constant 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .analysis import RegionLabel, classify
from .errors import DomainError, RegionError
from .fields import BackwardParaboloid, Field, ParaboloidPower, Rescaled, Sum
from .potentials import DEFAULT_QUAD, j_alpha
from .quadrature import QuadratureSpec

SAMPLES = 64
_MAX_HALVINGS = 60


def paraboloid_samples(n, t_lo, t_hi, apex=None, m=SAMPLES):
    """m x m midpoint samples of {t_lo < t < t_hi, |x| < radius(t)} along the x_1 axis.

    radius(t) = sqrt(t) for a forward paraboloid (apex None), sqrt(apex - t) otherwise.
    """
    t = t_lo + (np.arange(m) + 0.5) / m * (t_hi - t_lo)
    frac = (np.arange(m) + 0.5) / m
    rad = np.sqrt(t) if apex is None else np.sqrt(apex - t)
    R = rad[:, None] * frac[None, :]
    x = np.zeros((m * m, n))
    x[:, 0] = R.reshape(-1)
    return x, np.repeat(t, m)


def _ratio_sup(num: Field, den: Field, n, alpha, lam, x, t, quad):
    f = num.value(x, t)
    J = j_alpha(den, n, alpha, x, t, quad)
    with np.errstate(divide="ignore"):
        r = np.where(f > 0, f / np.maximum(J, 1e-300) ** lam, 0.0)
    return float(np.max(r))


@dataclass
class BlowupFamily:
    base: Field
    terms: list
    T_seq: list
    mode: str
    q: float
    n: int
    p: float
    lam: float
    alpha: float
    scale: float = 1.0              # kappa multiplying f_0 + sum f_j
    ratio_sup: float = math.nan     # sampled sup of f/(J f)^lambda before scaling
    conditions: list = dc_field(default_factory=list)

    @property
    def unscaled(self) -> Sum:
        return Sum((self.base, *self.terms))

    @property
    def field(self) -> Field:
        """kappa * (f_0 + sum f_j), a subsolution with constant 1 on the samples."""
        K = self.scale ** (1.0 - self.lam)
        return Rescaled(self.unscaled, K, self.lam, self.alpha, 1.0)

    @property
    def box_times(self):
        """t_j of the boxes R_j = {|x| < sqrt(t_j), t_j < t < 2 t_j}."""
        return [T / 2.0 for T in self.T_seq]

    def describe(self):
        return self.field.describe()


def _check_region(n, p, lam, alpha):
    label = classify(lam, alpha, p, n)
    if label is not RegionLabel.C:
        raise RegionError(f"(lambda={lam}, alpha={alpha}) lies in region {label.value}, not C, "
                          f"for n={n}, p={p}")


def _scale_family(fam: BlowupFamily, quad, extra_samples):
    """Estimate C = sup f/(J f)^lambda on samples of every piece and set kappa."""
    f = fam.unscaled
    n, alpha, lam = fam.n, fam.alpha, fam.lam
    xs, ts = zip(*extra_samples)
    x = np.concatenate(xs)
    t = np.concatenate(ts)
    C = _ratio_sup(f, f, n, alpha, lam, x, t, quad)
    fam.ratio_sup = C
    # kappa^(1-lam) C <= 1 with lam > 1; a 1% margin absorbs sampling
    fam.scale = (1.01 * C) ** (1.0 / (lam - 1.0))
    return fam


def make_blowup_small_time(n, p, lam, alpha, q=None, J=3, quad: QuadratureSpec = DEFAULT_QUAD,
                           samples=SAMPLES) -> BlowupFamily:
    """f_0 = t^-r chi{|x|^2 < t < 1} plus J backward paraboloids with apex T_j -> 0, r = (n+2)/(2q)."""
    _check_region(n, p, lam, alpha)
    q_max = (n + 2) / (2.0 * alpha) * (1.0 - 1.0 / lam)
    if q is None:
        q = min(0.5 * (p + q_max), p + 0.5)
    if not p < q < q_max:
        raise DomainError(f"q must lie in (p, {q_max}) so that alpha < (n+2)/(2q)(1-1/lambda)")
    if J < 1:
        raise DomainError("J must be at least 1")
    r = (n + 2) / (2.0 * q)
    gam = (n + 2) / (2.0 * p) - r
    f0 = ParaboloidPower(n, p, gam, truncate=True)
    fam = BlowupFamily(f0, [], [], "small-time", q, n, p, lam, alpha)
    T = 0.25
    for j in range(J):
        for _ in range(_MAX_HALVINGS):
            fj = BackwardParaboloid(n, p, gam, T / 2.0, T)
            x, t = paraboloid_samples(n, T / 2.0, T, T, samples)
            plus = t > 0.75 * T
            c1 = _ratio_sup(f0, f0, n, alpha, lam, x, t, quad)
            c2 = _ratio_sup(fj, fj, n, alpha, lam, x[plus], t[plus], quad)
            c3 = _ratio_sup(fj, f0, n, alpha, lam, x[~plus], t[~plus], quad)
            if c1 < 1.0 and c2 < 1.0 and c3 < 0.5:
                break
            T *= 0.5
        else:
            raise DomainError("apex search did not terminate")
        fam.terms.append(fj)
        fam.T_seq.append(T)
        fam.conditions.append({"T": T, "f0_over_Jf0": c1, "fj_over_Jfj": c2, "fj_over_Jf0": c3})
        T /= 8.0
    pieces = [paraboloid_samples(n, 0.0, 1.0, None, samples)]
    pieces += [paraboloid_samples(n, T / 2.0, T, T, samples) for T in fam.T_seq]
    return _scale_family(fam, quad, pieces)


def large_time_gamma(n, p, lam, alpha):
    """gamma solving lambda = ((n+2)/(2p) - gamma)/((n+2)/(2p) - alpha - gamma)."""
    return (n + 2) / (2.0 * p) - lam * alpha / (lam - 1.0)


def make_blowup_large_time(n, p, lam, alpha, J=3, quad: QuadratureSpec = DEFAULT_QUAD,
                           samples=SAMPLES) -> BlowupFamily:
    """f_0 = t^-(k-gamma) chi{|x|^2 < t} plus backward paraboloids with apex T_j = 4^j, k = (n+2)/(2p)."""
    _check_region(n, p, lam, alpha)
    if J < 1:
        raise DomainError("J must be at least 1")
    gam = large_time_gamma(n, p, lam, alpha)
    q = (n + 2) / (2.0 * alpha) * (1.0 - 1.0 / lam)
    f0 = ParaboloidPower(n, p, gam)
    fam = BlowupFamily(f0, [], [], "large-time", q, n, p, lam, alpha)
    T = 4.0
    for _ in range(J):
        fam.terms.append(BackwardParaboloid(n, p, gam, T / 2.0, T))
        fam.T_seq.append(T)
        T *= 4.0
    top = 2.0 * fam.T_seq[-1]
    # f_0 is self-similar, so samples over (0, top) on a log scale cover it
    pieces = []
    edges = np.geomspace(1e-3, top, 9)
    for lo, hi in zip(edges[:-1], edges[1:]):
        pieces.append(paraboloid_samples(n, lo, hi, None, samples // 2))
    pieces += [paraboloid_samples(n, T / 2.0, T, T, samples) for T in fam.T_seq]
    return _scale_family(fam, quad, pieces)
