"""Named verification suites. Each returns a Report of measured-vs-reference checks."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .analysis import (ParabolicBox, RegionLabel, box_norm, classify, critical_alpha, gamma_sequence,
                       limit_scan, sup_bounds)
from .errors import DomainError
from .fields import (Bump, Field, HeatKernelField, ParaboloidPower, Rescaled, lp_norm_upper_bound,
                     make_exact_solution, make_indicator_similarity, make_tilted_exact, random_cells)
from .inverse import InverseSpec, inverse_scan
from .kernels import KernelParams, phi, phi_lr_norm
from .potentials import PotentialField, SlabRegion, j_alpha, v_alpha
from .quadrature import QuadratureSpec
from .report import Report
from .special import gauss_legendre, log_gamma, mbar_constant, sharp_constant


@dataclass(frozen=True)
class SuiteConfig:
    """Overrides for suite defaults; None keeps the suite's own grid of parameters."""
    n: int | None = None
    alpha: float | None = None
    lam: float | None = None
    p: float | None = None
    q: float | None = None
    K: float | None = None
    a: float | None = None
    b: float | None = None
    tol: float | None = None
    eps: float | None = None
    l: int | None = None
    iters: int | None = None
    seed: int = 0
    quad: QuadratureSpec = QuadratureSpec()


def _pick(value, default):
    return default if value is None else value


def _grid(value, defaults):
    return list(defaults) if value is None else [value]


def standard_bump(n=1) -> Bump:
    """Smooth compactly supported test field for the limit scans."""
    if n == 1:
        return Bump(1, "gauss", 1.0, 0.0, 1.0)
    return Bump(n, "compact", 0.5, 0.0, 2.0)


# kernel semigroup ------------------------------------------------------------------

def suite_semigroup(cfg: SuiteConfig) -> Report:
    """Phi_{a+b} = Phi_a * Phi_b at a 5 x 5 grid of (x, t), n = 1."""
    tol = _pick(cfg.tol, 1e-6)
    pairs = [(0.5, 0.5), (1.0, 0.5), (1.0, 1.0)]
    if cfg.alpha is not None:
        pairs = [(cfg.alpha, b) for b in (0.5, 1.0)]
    x = np.repeat(np.linspace(-2.0, 2.0, 5), 5)
    t = np.tile(np.linspace(0.25, 2.0, 5), 5)
    rep = Report()
    for a, b in pairs:
        exact = phi(KernelParams(1, a + b), x, t)
        conv = j_alpha(HeatKernelField(1, b), 1, a, x, t, cfg.quad)
        rel = float(np.max(np.abs(conv - exact) / exact))
        rep.add("semigroup.relative_residual", rel, 0.0, tol, "max", alpha=a, beta=b, points=int(x.size))
    return rep


# exact self-similar solution -------------------------------------------------------

def suite_exact(cfg: SuiteConfig) -> Report:
    """sup over t in [0.1, 2] of |(J_alpha g)^lambda - g| / g."""
    tol = _pick(cfg.tol, 1e-6)
    quad = cfg.quad.with_(rel_tol=min(cfg.quad.rel_tol, 1e-8))
    t = np.geomspace(0.1, 2.0, 16)
    rep = Report()
    for n in _grid(cfg.n, (1, 2)):
        x = np.zeros((t.size, n))
        for alpha in _grid(cfg.alpha, (0.5, 1.0, 1.5)):
            for lam in _grid(cfg.lam, (0.25, 0.5, 0.75)):
                g = make_exact_solution(alpha, lam)
                gv = g.value(x, t)
                J = j_alpha(g, n, alpha, x, t, quad)
                res = float(np.max(np.abs(J ** lam - gv) / gv))
                rep.add("exact.residual", res, 0.0, tol, "max", n=n, alpha=alpha, **{"lambda": lam})
    return rep


# sup bounds and sharpness ------------------------------------------------------------

def _grid_sup(field: Field, n, b, m):
    r = np.linspace(0.0, 3.0, m)
    t = np.linspace(0.0, b, m + 1)[1:]
    pts = np.zeros((t.size, r.size, n))
    pts[..., 0] = r[None, :]
    return float(np.max(field.value(pts, t[:, None])))


def suite_bounds(cfg: SuiteConfig) -> Report:
    """Measured sup f, sup J f over R^n x (0, b) against the sharp bounds; tilted sharpness at x = 0."""
    alpha, lam = _pick(cfg.alpha, 1.0), _pick(cfg.lam, 0.5)
    K, n = _pick(cfg.K, 1.0), _pick(cfg.n, 1)
    tol = _pick(cfg.tol, 1e-4)
    M = sharp_constant(alpha, lam)
    N = 0.9 * M
    kappa = lam / (1.0 - lam)
    unit = {"exact": make_exact_solution(alpha, lam), "indsim": make_indicator_similarity(n, alpha, lam)}
    cands = {k: (f if K == 1.0 else Rescaled(f, K, lam, alpha, 1.0)) for k, f in unit.items()}
    cands["tilted"] = make_tilted_exact(alpha, lam, N, K, n)
    rep = Report()
    params = dict(alpha=alpha, K=K, n=n, **{"lambda": lam})
    for b in (0.5, 1.0, 2.0):
        bf, bJ = sup_bounds(K, lam, alpha, b)
        for name, f in cands.items():
            s1, s2 = _grid_sup(f, n, b, 32), _grid_sup(f, n, b, 64)
            sup = s2 + (s2 - s1)        # one Richardson step on the grid maximum
            rep.add("bounds.sup_f_over_bound", sup / bf, 1.0, tol, "max", field=name, b=b, grid=64, **params)
            x = np.zeros((4, n))
            x[:, 0] = [0.0, 0.0, 0.5, 1.0]
            t = np.array([0.5 * b, b, b, b])
            J = j_alpha(f, n, alpha, x, t, cfg.quad)
            rep.add("bounds.sup_Jf_over_bound", float(np.max(J)) / bJ, 1.0, tol, "max", field=name, b=b,
                    **params)
        if b <= 1.0:
            # the time cutoff of the tilted field is 1 up to t = 1
            val = float(cands["tilted"].value(np.zeros((1, n)), np.array([b]))[0])
            rep.add("bounds.tilted_attained_fraction", val / bf, (N / M) ** kappa, 1e-12, "min", b=b,
                    N_over_M=N / M, **params)
    return rep


# gamma recursion ---------------------------------------------------------------------

def suite_gamma_rec(cfg: SuiteConfig) -> Report:
    """gamma_j -> Mbar^(lambda/(1-lambda)) on a 5 x 5 (alpha, lambda) grid, and M(1, 1/2) = 1/2."""
    tol = _pick(cfg.tol, 1e-10)
    iters = _pick(cfg.iters, 200)
    rep = Report()
    rep.add("gamma-rec.sharp_constant", sharp_constant(1.0, 0.5), 0.5, 1e-15, "abs", alpha=1.0,
            **{"lambda": 0.5})
    for alpha in _grid(cfg.alpha, np.linspace(0.25, 2.0, 5)):
        for lam in _grid(cfg.lam, np.linspace(0.1, 0.9, 5)):
            seq = gamma_sequence(float(alpha), float(lam), iters)
            ref = mbar_constant(float(alpha), float(lam)) ** (lam / (1.0 - lam))
            rep.add("gamma-rec.limit", float(seq.values[-1]), ref, tol, "abs", alpha=float(alpha),
                    iters=iters, **{"lambda": float(lam)})
    return rep


# truncated-potential and Young bounds on random piecewise-constant fields ----------------

def suite_lemma71(cfg: SuiteConfig, count=100) -> Report:
    """Grid sup of |V_{alpha,Omega} f| against (b-a)^alpha/Gamma(alpha+1) sup|f|."""
    a, b = _pick(cfg.a, 0.0), _pick(cfg.b, 1.0)
    if not b > a:
        raise DomainError("lemma71 needs a < b")
    rng = np.random.default_rng(cfg.seed)
    slab = SlabRegion(a, b)
    x = np.repeat(np.linspace(-1.5, 1.5, 7), 5)
    t = np.tile(a + (b - a) * np.array([0.1, 0.3, 0.5, 0.8, 1.0 - 1e-9]), 7)
    worst, viol = 0.0, 0
    for _ in range(count):
        alpha = float(rng.uniform(0.3, 2.0))
        f = random_cells(rng, 1, 4, 4, (-1.0, 1.0), (a, b))
        bound = (b - a) ** alpha * math.exp(-log_gamma(alpha + 1.0)) * f.sup_norm()
        ratio = float(np.max(np.abs(v_alpha(f, 1, alpha, slab, x, t, cfg.quad)))) / bound
        worst = max(worst, ratio)
        viol += ratio > 1.0
    rep = Report()
    rep.add("lemma71.violations", viol, 0, 0, "abs", fields=count, a=a, b=b, seed=cfg.seed)
    rep.add("lemma71.max_ratio", worst, 1.0, 0.0, "max", fields=count, a=a, b=b, seed=cfg.seed)
    return rep


def _panel_rule(edges, m):
    z, w = gauss_legendre(m)
    lo, hi = edges[:-1, None], edges[1:, None]
    return (lo + (hi - lo) * z).ravel(), ((hi - lo) * w).ravel()


def lq_norm_1d(field: Field, alpha, q, t_edges, x_edges, quad, m=8):
    """L^q norm of J_alpha f over R x (t_edges[0], t_edges[-1]) by panel Gauss-Legendre."""
    t, wt = _panel_rule(np.asarray(t_edges, float), m)
    x, wx = _panel_rule(np.asarray(x_edges, float), m)
    J = j_alpha(field, 1, alpha, np.repeat(x, t.size), np.tile(t, x.size), quad).reshape(x.size, t.size)
    return float(np.einsum("i,j,ij->", wx, wt, np.abs(J) ** q)) ** (1.0 / q)


def suite_lemma72(cfg: SuiteConfig, count=20) -> Report:
    """||J_alpha f||_q <= ||Phi_alpha chi_(0,b-a)||_r ||f||_p with 1 - 1/r = 1/p - 1/q."""
    a, b = _pick(cfg.a, 0.0), _pick(cfg.b, 1.0)
    rng = np.random.default_rng(cfg.seed + 1)
    rep = Report()
    worst, viol = 0.0, 0
    for _ in range(count):
        alpha = float(rng.uniform(0.3, 1.4)) if cfg.alpha is None else cfg.alpha
        p = float(rng.choice([1.0, 1.5, 2.0, 3.0])) if cfg.p is None else cfg.p
        delta = float(rng.uniform(0.0, 0.95 * min(2.0 * alpha / 3.0, 1.0 / p)))
        q = 1.0 / (1.0 / p - delta) if cfg.q is None else cfg.q
        delta = 1.0 / p - 1.0 / q
        if not 0 <= delta < 2.0 * alpha / 3.0 < 1.0:
            raise DomainError("(p, q, alpha) violate 0 <= 1/p - 1/q < 2 alpha/(n+2) < 1")
        r = 1.0 / (1.0 - delta)
        f = random_cells(rng, 1, 4, 4, (-1.0, 1.0), (a, b))
        reach = 1.0 + 10.0 * math.sqrt(b - a)
        xe = np.unique(np.concatenate([[-reach, -2.0], f.x_edges[0], [2.0, reach]]))
        xe = np.unique(np.concatenate([xe, 0.5 * (xe[1:] + xe[:-1])]))
        lhs = lq_norm_1d(f, alpha, q, f.t_edges, xe, cfg.quad)
        rhs = phi_lr_norm(1, alpha, r, b - a) * f.lp_power(p) ** (1.0 / p)
        worst = max(worst, lhs / rhs)
        viol += lhs > rhs
    rep.add("lemma72.violations", viol, 0, 0, "abs", fields=count, a=a, b=b, seed=cfg.seed)
    rep.add("lemma72.max_ratio", worst, 1.0, 0.0, "max", fields=count, a=a, b=b, seed=cfg.seed)
    return rep


# paraboloid potential sandwich -----------------------------------------------------------

def suite_lemma76(cfg: SuiteConfig) -> Report:
    """J_alpha f_0(0, t) t^((n+2)/(2p) - gamma - alpha) stays within [C1, C2] for t in 0.1..1."""
    n, p = _pick(cfg.n, 1), _pick(cfg.p, 1.0)
    alpha, gam = _pick(cfg.alpha, 0.5), 0.5
    f0 = ParaboloidPower(n, p, gam)
    t = np.linspace(0.1, 1.0, 10)
    J = j_alpha(f0, n, alpha, np.zeros((t.size, n)), t, cfg.quad)
    ratio = J * t ** ((n + 2) / (2.0 * p) - gam - alpha)
    c1, c2 = float(np.min(ratio)), float(np.max(ratio))
    params = dict(n=n, p=p, gamma=gam, alpha=alpha)
    rep = Report(metadata={"C1": c1, "C2": c2})
    rep.add("lemma76.C1_positive", c1, 0.0, 0.0, "min", **params)
    rep.add("lemma76.C2_finite", float(np.isfinite(c2)), 1.0, 0.0, "abs", **params)
    rep.add("lemma76.spread", c2 / c1, 10.0, 0.0, "max", **params)
    return rep


# inverse ---------------------------------------------------------------------------------

def inverse_bump() -> Bump:
    return Bump(1, "gauss", 1.0, 0.0, 1.0)


def suite_inverse(cfg: SuiteConfig) -> Report:
    """Recover f from u = J_alpha f at 9 interior points; u and its inverse vanish for t < 0."""
    tol = _pick(cfg.tol, 1e-2)
    spec = InverseSpec(l=_pick(cfg.l, 2), eps=_pick(cfg.eps, 2.0 ** -12))
    f = inverse_bump()
    x = np.repeat([-0.5, 0.0, 0.5], 3)
    t = np.tile([0.25, 0.5, 0.75], 3)
    fmax = float(f.value(np.zeros((1, 1)), np.array([0.5]))[0])
    rep = Report()
    for alpha in _grid(cfg.alpha, (0.5, 0.75)):
        u = PotentialField(f, alpha, cfg.quad)
        scan = inverse_scan(u, 1, alpha, spec, x, t)
        err = float(np.max(np.abs(scan.extrapolated - f.value(x[:, None], t)))) / fmax
        params = dict(alpha=alpha, l=spec.l, eps=spec.eps)
        rep.add("inverse.relative_error", err, 0.0, tol, "max", **params)
        rep.add("inverse.cauchy", float(scan.cauchy_ok), 1.0, 0.0, "abs", **params)
        tn = np.array([-1.0, -0.5, -1e-9])
        xn = np.zeros(3)
        rep.add("inverse.forward_zero_t_negative", float(np.max(np.abs(u.value(xn[:, None], tn)))), 0.0, 0.0,
                "abs", **params)
    return rep


def suite_p3(cfg: SuiteConfig) -> Report:
    """A field vanishing for t < T0 has J_alpha f and J_eps^-alpha u vanishing there too."""
    T0 = 0.5
    f = Bump(1, "gauss", 1.0, T0, T0 + 1.0)
    rep = Report()
    x = np.repeat([-1.0, 0.0, 0.7], 3)
    t = np.tile([-0.5, 0.1, T0 - 1e-9], 3)
    spec = InverseSpec(l=_pick(cfg.l, 2), eps=_pick(cfg.eps, 2.0 ** -12))
    for alpha in _grid(cfg.alpha, (0.5, 1.0, 1.5)):
        J = j_alpha(f, 1, alpha, x, t, cfg.quad)
        rep.add("p3.potential_before_support", float(np.max(np.abs(J))), 0.0, 0.0, "abs", alpha=alpha, T0=T0)
        u = PotentialField(f, alpha, cfg.quad)
        inv = inverse_scan(u, 1, alpha, spec, x, t, levels=3).values
        rep.add("p3.inverse_before_support", float(np.max(np.abs(inv))), 0.0, 0.0, "abs", alpha=alpha, T0=T0,
                l=spec.l)
    return rep


# scaling limits ----------------------------------------------------------------------------

LIMIT_SEQ = [2.0 ** -k for k in range(6)]


def limit_points(mode, n, t_end=1.0):
    """Sample points on the x_1 axis at 1/2 and 3/4 of the time window (0, t_end)."""
    radii = [0.0, 0.5, 1.0] if mode == "time-limit" else [0.0, 0.5]
    x = np.zeros((2 * len(radii), n))
    x[:, 0] = np.tile(radii, 2)
    t = np.repeat([0.5, 0.75], len(radii)) * t_end
    return x, t


def suite_limits_time(cfg: SuiteConfig) -> Report:
    n, alpha = _pick(cfg.n, 1), _pick(cfg.alpha, 0.5)
    f = standard_bump(n)
    pts = limit_points("time-limit", n, f.t1)
    return limit_scan(f, n, alpha, "time-limit", LIMIT_SEQ, pts, cfg.quad, _pick(cfg.tol, 1e-3))


def suite_limits_space(cfg: SuiteConfig) -> Report:
    n, alpha = _pick(cfg.n, 3), _pick(cfg.alpha, 0.5)
    f = standard_bump(n)
    pts = limit_points("space-limit", n, f.t1)
    return limit_scan(f, n, alpha, "space-limit", LIMIT_SEQ, pts, cfg.quad, _pick(cfg.tol, 1e-3))


# blow-up ----------------------------------------------------------------------------------

def _blowup_report(fam, kind, p_slab_times) -> Report:
    params = dict(n=fam.n, p=fam.p, q=fam.q, alpha=fam.alpha, **{"lambda": fam.lam})
    rep = Report(metadata={"T": list(fam.T_seq), "scale": fam.scale, "ratio_sup": fam.ratio_sup})
    f = fam.field
    for j, tj in enumerate(fam.box_times):
        bn = box_norm(f, fam.q, ParabolicBox(tj))
        rep.add(f"blowup-{kind}.box_norm_infinite", float(math.isinf(bn.value) and bn.certified), 1.0, 0.0,
                "abs", j=j, t_j=tj, **params)
    ts = fam.box_times
    mono = all(b < a for a, b in zip(ts, ts[1:])) if kind == "small" else all(b > a for a, b in zip(ts, ts[1:]))
    rep.add(f"blowup-{kind}.t_j_monotone", float(mono), 1.0, 0.0, "abs", **params)
    for T in p_slab_times:
        norm = lp_norm_upper_bound(f, fam.p, -math.inf, T)
        rep.add(f"blowup-{kind}.lp_norm_finite", float(math.isfinite(norm)), 1.0, 0.0, "abs", T=T,
                bound=norm, **params)
    return rep


def suite_blowup_small(cfg: SuiteConfig) -> Report:
    from .blowup import make_blowup_small_time
    fam = make_blowup_small_time(_pick(cfg.n, 1), _pick(cfg.p, 1.0), _pick(cfg.lam, 3.0),
                                 _pick(cfg.alpha, 0.2), cfg.q, J=3)
    return _blowup_report(fam, "small", [1.0])


def suite_blowup_large(cfg: SuiteConfig) -> Report:
    from .blowup import make_blowup_large_time
    fam = make_blowup_large_time(_pick(cfg.n, 1), _pick(cfg.p, 1.0), _pick(cfg.lam, 3.0),
                                 _pick(cfg.alpha, 0.2), J=3)
    return _blowup_report(fam, "large", [1.0] + [2.0 * T for T in fam.T_seq])


# region map -------------------------------------------------------------------------------

def suite_region_classify(cfg: SuiteConfig, count=1000) -> Report:
    """classify agrees with the sign of alpha - critical_alpha on random rational points."""
    rng = np.random.default_rng(cfg.seed + 2)
    agree, hits_d = 0, 0
    for i in range(count):
        n = int(rng.integers(1, 4)) if cfg.n is None else cfg.n
        p = Fraction(int(rng.integers(2, 9)), 2) if cfg.p is None else Fraction(cfg.p)
        lam = Fraction(int(rng.integers(1, 80)), 10)
        if i % 5 == 0 and lam > 1:
            alpha = critical_alpha(lam, p, n)          # exactly on the curve
        else:
            alpha = Fraction(int(rng.integers(1, 60)), 20)
        if lam < 1:
            expect = RegionLabel.B
        elif lam == 1:
            expect = RegionLabel.A
        else:
            d = alpha - critical_alpha(lam, p, n)
            expect = RegionLabel.D if d == 0 else (RegionLabel.A if d > 0 else RegionLabel.C)
        got = classify(lam, alpha, p, n)
        agree += got is expect
        hits_d += got is RegionLabel.D
    rep = Report()
    rep.add("region-classify.agreement", agree / count, 1.0, 0.0, "abs", points=count, seed=cfg.seed)
    rep.add("region-classify.boundary_hits", hits_d, 1, 0, "min", points=count, seed=cfg.seed)
    # closed-form curve at a few float points: D band and both sides
    for lam, p, n in ((2.0, 1.0, 1), (3.0, 2.0, 2), (1.5, 1.0, 3)):
        th = critical_alpha(lam, p, n)
        ok = (classify(lam, th, p, n) is RegionLabel.D and classify(lam, th * 1.01, p, n) is RegionLabel.A
              and classify(lam, th * 0.99, p, n) is RegionLabel.C)
        rep.add("region-classify.float_curve", float(ok), 1.0, 0.0, "abs", n=n, p=p, **{"lambda": lam})
    return rep


SUITES = {
    "semigroup": suite_semigroup,
    "exact": suite_exact,
    "bounds": suite_bounds,
    "gamma-rec": suite_gamma_rec,
    "lemma71": suite_lemma71,
    "lemma72": suite_lemma72,
    "lemma76": suite_lemma76,
    "inverse": suite_inverse,
    "limits-time": suite_limits_time,
    "limits-space": suite_limits_space,
    "blowup-small": suite_blowup_small,
    "blowup-large": suite_blowup_large,
    "region-classify": suite_region_classify,
    "p3": suite_p3,
}


def run_suite(name: str, cfg: SuiteConfig = SuiteConfig()) -> Report:
    if name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    t0 = time.perf_counter()
    rep = SUITES[name](cfg)
    rep.metadata.setdefault("suite", name)
    rep.metadata["seconds"] = time.perf_counter() - t0
    return rep
