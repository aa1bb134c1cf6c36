"""The kernel family Phi_{alpha,a,b}, its Fourier symbol and Lebesgue norms."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .special import log_gamma


@dataclass(frozen=True)
class KernelParams:
    n: int
    alpha: float
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.n < 1 or int(self.n) != self.n:
            raise DomainError("n must be a positive integer")
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")
        if self.a < 0 or self.b < 0:
            raise DomainError("scales a and b must be nonnegative")
        if self.a == 0 and self.b == 0:
            raise DomainError("a and b cannot both vanish")


def _points(x, n):
    x = np.asarray(x, float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape[-1] != n:
        if n == 1:
            x = x[..., None]
        else:
            raise DomainError(f"points must have last dimension {n}")
    return x


def _sq_norm(x, n):
    x = _points(x, n)
    return np.sum(x * x, axis=-1)


def log_phi_radial(n, alpha, r2, t):
    """log Phi_alpha at squared radius r2 and time t > 0 (arrays)."""
    return ((alpha - 1.0 - 0.5 * n) * np.log(t) - log_gamma(alpha)
            - 0.5 * n * math.log(4.0 * math.pi) - r2 / (4.0 * t))


def phi(params: KernelParams, x, t):
    """Phi_alpha(x, t); exactly 0 for t <= 0."""
    if params.a != 1 or params.b != 1:
        raise DomainError("phi is the unscaled kernel; use phi_scaled")
    return _phi(params.n, params.alpha, _sq_norm(x, params.n), t)


def _phi(n, alpha, r2, t):
    r2, t = np.broadcast_arrays(np.asarray(r2, float), np.asarray(t, float))
    pos = t > 0
    ts = np.where(pos, t, 1.0)
    out = np.where(pos, np.exp(log_phi_radial(n, alpha, r2, ts)), 0.0)
    return out if out.ndim else float(out)


def phi_scaled(params: KernelParams, x, t):
    """a^-n b^-1 Phi_alpha(x/a, t/b) for a, b > 0."""
    if params.a == 0 or params.b == 0:
        raise DomainError("phi_scaled needs a > 0 and b > 0; degenerate limits live in potentials")
    a, b, n = params.a, params.b, params.n
    return a ** -n / b * _phi(n, params.alpha, _sq_norm(x, n) / (a * a), np.asarray(t, float) / b)


def symbol(n, alpha, y, s):
    """(|y|^2 - i s)^(-alpha) on the principal branch."""
    y2 = _sq_norm(y, n)
    base = y2 - 1j * np.asarray(s, float)
    if np.any(base == 0):
        raise DomainError("symbol is singular at y = 0, s = 0")
    # principal power: Re(base) >= 0 keeps the argument inside [-pi/2, pi/2]
    out = np.exp(-alpha * np.log(base))
    return out if out.ndim else complex(out)


def spatial_fourier_phi(n, alpha, y, t):
    """Spatial Fourier transform of Phi_alpha(., t): t^(alpha-1)/Gamma(alpha) e^(-t|y|^2)."""
    t = np.asarray(t, float)
    if np.any(t <= 0):
        raise DomainError("spatial_fourier_phi needs t > 0")
    y2 = _sq_norm(y, n)
    out = np.exp((alpha - 1.0) * np.log(t) - log_gamma(alpha) - t * y2)
    return out if out.ndim else float(out)


def phi_lr_norm(n, alpha, r, dt):
    """L^r norm of Phi_alpha restricted to R^n x (0, dt), in closed form."""
    if r < 1:
        raise DomainError("r must be at least 1")
    if not dt > 0:
        raise DomainError("dt must be positive")
    e = r * (alpha - 1.0 - 0.5 * n) + 0.5 * n
    if not e > -1.0:
        raise DomainError("Phi_alpha is not in L^r near t = 0 for these parameters")
    log_val = (-r * log_gamma(alpha) + 0.5 * n * (1.0 - r) * math.log(4.0 * math.pi)
               - 0.5 * n * math.log(r) + (e + 1.0) * math.log(dt) - math.log(e + 1.0))
    return math.exp(log_val / r)


def mass_profile(alpha, tau):
    """Spatial integral of Phi_alpha(., tau): tau^(alpha-1)/Gamma(alpha) for tau > 0."""
    tau = np.asarray(tau, float)
    pos = tau > 0
    out = np.where(pos, np.exp((alpha - 1.0) * np.log(np.where(pos, tau, 1.0)) - log_gamma(alpha)), 0.0)
    return out if out.ndim else float(out)
