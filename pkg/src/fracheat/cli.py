"""Command-line front end.

    fracheat kernel --n 1 --alpha 1 --x 0 --t -1
    fracheat potential --field "exact(alpha=1,lambda=0.5)" --alpha 1 --x 0 --t 1
    fracheat inverse --field "potential(bump(1),alpha=0.5)" --alpha 0.5 --x 0 --t 0.5
    fracheat verify --suite exact --alpha 1 --lambda 0.5 --tol 1e-6
    fracheat regions --n 1 --p 1 --lambda-grid 1:6:0.05 --out regions.csv
    fracheat blowup --mode small --n 1 --p 1 --lambda 3 --alpha 0.2
    fracheat limits --mode time --n 1 --alpha 0.5
    fracheat picard --field "cylinder(1,inf,0,inf,1)" --K 1 --lambda 0.5 --alpha 1

Exit status: 0 on success, 1 when a verification entry fails, 2 on usage errors.
With ``--format svg`` the CSV is still written and an SVG plot goes next to it.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DomainError, ToleranceError, UnsupportedVariantError
from .report import Report, fmt

COMMANDS = ("kernel", "potential", "inverse", "verify", "regions", "blowup", "limits", "picard")

# flag -> (destination, type)
_FLAGS = {
    "n": int, "alpha": float, "lambda": float, "p": float, "q": float, "K": float,
    "a": float, "b": float, "x": str, "t": str, "field": str, "suite": str, "tol": float,
    "out": str, "format": str, "grid": str, "iters": int, "eps": float, "l": int, "config": str,
    "lambda-grid": str, "mode": str, "terms": int, "seed": int,
}

_REQUIRED = {
    "kernel": ("n", "alpha", "x", "t"),
    "potential": ("field", "alpha", "x", "t"),
    "inverse": ("field", "alpha", "x", "t"),
    "verify": ("suite",),
    "regions": ("n", "p", "lambda-grid"),
    "blowup": ("n", "p", "lambda", "alpha"),
    "limits": (),
    "picard": ("field", "K", "lambda", "alpha"),
}


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    command: str
    values: dict = dc_field(default_factory=dict)

    def get(self, key, default=None):
        v = self.values.get(key)
        return default if v is None else v

    def require(self, key):
        v = self.values.get(key)
        if v is None:
            raise UsageError(f"--{key} is required for '{self.command}'")
        return v


# parsing --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracheat", description="Fractional heat potentials and verification suites.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd)
        for flag, typ in _FLAGS.items():
            p.add_argument("--" + flag, dest=flag, type=typ, default=None)
    return parser


def _convert(key, raw):
    try:
        return _FLAGS[key](raw)
    except ValueError:
        raise UsageError(f"--{key}: cannot read {raw!r}") from None


def read_config(path) -> dict:
    """Plain key=value lines; '#' starts a comment."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}") from None
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config: expected key=value, got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        k = k.lstrip("-")
        if k not in _FLAGS or k == "config":
            raise UsageError(f"--config: unknown key {k!r}")
        out[k] = _convert(k, v)
    return out


def parse_args(argv) -> CliConfig:
    ns = build_parser().parse_args(argv)
    if ns.command is None:
        raise UsageError("a command is required: " + ", ".join(COMMANDS))
    values = {k: v for k, v in vars(ns).items() if k != "command"}
    if values.get("config"):
        for k, v in read_config(values["config"]).items():
            if values.get(k) is None:
                values[k] = v
    cfg = CliConfig(ns.command, values)
    for key in _REQUIRED[cfg.command]:
        cfg.require(key)
    fmt_ = cfg.get("format", "csv")
    if fmt_ not in ("csv", "svg"):
        raise UsageError("--format must be csv or svg")
    if fmt_ == "svg" and not cfg.get("out"):
        raise UsageError("--format svg needs --out")
    return cfg


def _floats(text, flag):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{flag}: expected comma-separated numbers, got {text!r}") from None


def _points(text, n):
    """'x1,...,xn;x1,...,xn' or, for n = 1, '0,0.5,1' (one point per value)."""
    groups = [g for g in text.split(";") if g.strip()]
    if n == 1 and len(groups) == 1:
        return np.array(_floats(groups[0], "x"))[:, None]
    pts = [_floats(g, "x") for g in groups]
    if any(len(p) != n for p in pts):
        raise UsageError(f"--x: every point needs {n} coordinates")
    return np.array(pts)


def _grid_spec(text):
    """lo:hi:step with exact decimal arithmetic; hi is included when hit."""
    try:
        lo, hi, step = (Fraction(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"--lambda-grid: expected lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise UsageError("--lambda-grid: need step > 0 and hi >= lo")
    k = int((hi - lo) / step)
    return [lo + i * step for i in range(k + 1)]


# output ---------------------------------------------------------------------------------

def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in r])
    return buf.getvalue()


def _emit(cfg: CliConfig, header, rows, plot=None, stream=None):
    stream = stream or sys.stdout
    text = _csv_text(header, rows)
    out = cfg.get("out")
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="")
        if cfg.get("format", "csv") == "svg" and plot is not None:
            plot(str(Path(out).with_suffix(".svg")))
    else:
        stream.write(text)


def _emit_report(cfg: CliConfig, rep: Report, stream=None):
    stream = stream or sys.stdout
    out = cfg.get("out")
    if out:
        rep.write_csv(out)
        if cfg.get("format", "csv") == "svg":
            from .plotting import line_plot
            margin = [abs(float(e.measured) - float(e.reference)) / float(e.tol)
                      if float(e.tol) > 0 and math.isfinite(float(e.tol)) else math.nan
                      for e in rep.sorted_entries()]
            line_plot(str(Path(out).with_suffix(".svg")), np.arange(len(margin)),
                      {"|measured - reference| / tol": margin}, xlabel="entry", logy=True, markers=True)
    else:
        stream.write(rep.to_csv())
    sys.stderr.write(rep.summary() + "\n")
    return 0 if rep.passed else 1


# commands ---------------------------------------------------------------------------------

def _quad(cfg):
    from .quadrature import QuadratureSpec
    tol = cfg.get("tol")
    return QuadratureSpec() if tol is None or cfg.command == "verify" else QuadratureSpec(rel_tol=tol)


def _point_rows(n, x, t, values):
    rows = []
    k = 0
    for xi in x:
        for ti in t:
            rows.append(list(xi) + [ti, values[k]])
            k += 1
    return rows


def _eval_grid(cfg, n):
    x = _points(cfg.require("x"), n)
    t = np.array(_floats(cfg.require("t"), "t"))
    X = np.repeat(x, t.size, axis=0)
    T = np.tile(t, x.shape[0])
    return x, t, X, T


def _print_values(cfg, n, x, t, vals):
    if x.shape[0] == 1 and t.size == 1 and not cfg.get("out"):
        print(fmt(float(vals[0])))
        return 0
    header = [f"x{i + 1}" for i in range(n)] + ["t", "value"]
    _emit(cfg, header, _point_rows(n, x, t, vals))
    return 0


def cmd_kernel(cfg):
    from .kernels import KernelParams, phi, phi_scaled
    n, alpha = cfg.require("n"), cfg.require("alpha")
    a, b = cfg.get("a", 1.0), cfg.get("b", 1.0)
    params = KernelParams(n, alpha, a, b)
    x, t, X, T = _eval_grid(cfg, n)
    vals = np.atleast_1d(phi(params, X, T) if a == 1 and b == 1 else phi_scaled(params, X, T))
    return _print_values(cfg, n, x, t, vals)


def _field_and_n(cfg):
    from .grammar import parse_field
    f = parse_field(cfg.require("field"))
    n = cfg.get("n") or getattr(f, "n", None) or 1
    return f, n


def cmd_potential(cfg):
    from .potentials import j_scaled
    f, n = _field_and_n(cfg)
    alpha = cfg.require("alpha")
    x, t, X, T = _eval_grid(cfg, n)
    vals = np.atleast_1d(j_scaled(f, n, alpha, cfg.get("a", 1.0), cfg.get("b", 1.0), X, T, _quad(cfg)))
    return _print_values(cfg, n, x, t, vals)


def cmd_inverse(cfg):
    from .inverse import InverseSpec, inverse_scan
    u, n = _field_and_n(cfg)
    alpha = cfg.require("alpha")
    spec = InverseSpec(l=cfg.get("l", 2), eps=cfg.get("eps", 2.0 ** -12))
    x, t, X, T = _eval_grid(cfg, n)
    scan = inverse_scan(u, n, alpha, spec, X, T, levels=cfg.get("iters", 8))
    header = [f"x{i + 1}" for i in range(n)] + ["t", "eps", "value", "extrapolated"]
    rows = []
    for k in range(X.shape[0]):
        rows.append(list(X[k]) + [T[k], scan.eps[-1], scan.values[-1, k], scan.extrapolated[k]])
    if len(rows) == 1 and not cfg.get("out"):
        print(fmt(float(scan.extrapolated[0])))
        return 0
    _emit(cfg, header, rows)
    return 0


def cmd_verify(cfg):
    from .quadrature import QuadratureSpec
    from .suites import SUITES, SuiteConfig, run_suite
    name = cfg.require("suite")
    names = list(SUITES) if name == "all" else [name]
    if any(s not in SUITES for s in names):
        raise UsageError(f"--suite: unknown suite {name!r}; choose from all, {', '.join(SUITES)}")
    sc = SuiteConfig(n=cfg.get("n"), alpha=cfg.get("alpha"), lam=cfg.get("lambda"), p=cfg.get("p"),
                     q=cfg.get("q"), K=cfg.get("K"), a=cfg.get("a"), b=cfg.get("b"), tol=cfg.get("tol"),
                     eps=cfg.get("eps"), l=cfg.get("l"), iters=cfg.get("iters"), seed=cfg.get("seed", 0),
                     quad=QuadratureSpec())
    rep = Report()
    for s in names:
        rep.extend(run_suite(s, sc))
    return _emit_report(cfg, rep)


def cmd_regions(cfg):
    from .analysis import critical_alpha
    n, p = cfg.require("n"), cfg.require("p")
    if n < 1 or p < 1:
        raise UsageError("--n must be >= 1 and --p >= 1")
    pf = Fraction(str(p))
    lams = _grid_spec(cfg.require("lambda-grid"))
    rows = []
    for lam in lams:
        if lam <= 0:
            continue
        alpha = critical_alpha(lam, pf, n) if lam >= 1 else Fraction(0)
        rows.append([float(lam), float(alpha)])

    def plot(path):
        from .plotting import line_plot
        arr = np.array(rows)
        line_plot(path, arr[:, 0], {"alpha = (n+2)/(2p)(1 - 1/lambda)": arr[:, 1]},
                  xlabel="lambda", ylabel="alpha", title=f"critical curve, n={n}, p={fmt(p)}")
    _emit(cfg, ["lambda", "alpha_critical"], rows, plot)
    return 0


def cmd_blowup(cfg):
    from .analysis import ParabolicBox, box_norm
    from .blowup import make_blowup_large_time, make_blowup_small_time
    from .fields import lp_norm_upper_bound
    mode = cfg.get("mode", "small")
    n, p, lam, alpha = (cfg.require(k) for k in ("n", "p", "lambda", "alpha"))
    J = cfg.get("terms", 3)
    if mode in ("small", "small-time"):
        fam = make_blowup_small_time(n, p, lam, alpha, cfg.get("q"), J)
    elif mode in ("large", "large-time"):
        fam = make_blowup_large_time(n, p, lam, alpha, J)
    else:
        raise UsageError("--mode must be small or large for blowup")
    f = fam.field
    rows = []
    for j, (T, tj) in enumerate(zip(fam.T_seq, fam.box_times)):
        bn = box_norm(f, fam.q, ParabolicBox(tj))
        norm = lp_norm_upper_bound(f, p, -math.inf, 2.0 * tj if mode.startswith("large") else 1.0)
        rows.append([j + 1, T, tj, fam.q, bn.value, "true" if bn.certified else "false", norm])
    sys.stderr.write(f"field: {fam.describe()}\nscale: {fmt(fam.scale)}\n")

    def plot(path):
        from .plotting import line_plot
        arr = np.array([[r[0], r[2]] for r in rows], float)
        line_plot(path, arr[:, 0], {"t_j": arr[:, 1]}, xlabel="j", ylabel="box time", logy=True, markers=True)
    _emit(cfg, ["j", "T_j", "t_j", "q", "box_norm", "certified", "lp_norm_bound"], rows, plot)
    return 0


def cmd_limits(cfg):
    from .analysis import limit_scan
    from .suites import LIMIT_SEQ, limit_points, standard_bump
    mode = cfg.get("mode", "time")
    mode = {"time": "time-limit", "space": "space-limit"}.get(mode, mode)
    if mode not in ("time-limit", "space-limit"):
        raise UsageError("--mode must be time or space for limits")
    n = cfg.get("n", 1 if mode == "time-limit" else 3)
    alpha = cfg.get("alpha", 0.5)
    if cfg.get("field"):
        f, n = _field_and_n(cfg)
    else:
        f = standard_bump(n)
    if cfg.get("x"):
        x, t, X, T = _eval_grid(cfg, n)
    else:
        X, T = limit_points(mode, n, getattr(f, "t1", 1.0))
    rep = limit_scan(f, n, alpha, mode, LIMIT_SEQ, (X, T), _quad(cfg), cfg.get("tol", 1e-3))
    status = _emit_report(cfg, rep)
    if cfg.get("out") and cfg.get("format") == "svg":
        from .plotting import line_plot
        line_plot(str(Path(cfg.get("out")).with_suffix(".svg")), LIMIT_SEQ, {"max error": rep.metadata["errors"]},
                  xlabel="a" if mode == "time-limit" else "b", ylabel="error", logx=True, logy=True, markers=True)
    return status


def _picard_grid(text, n):
    from .analysis import PicardGrid
    if not text:
        return PicardGrid(n=n)
    keys = {"x_max": float, "nr": int, "t_max": float, "nt": int}
    kw = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError("--grid: expected key=value pairs from x_max, nr, t_max, nt")
        k, v = (s.strip() for s in part.split("=", 1))
        if k not in keys:
            raise UsageError(f"--grid: unknown key {k!r}")
        kw[k] = keys[k](v)
    return PicardGrid(n=n, **kw)


def cmd_picard(cfg):
    from .analysis import picard
    f, n = _field_and_n(cfg)
    grid = _picard_grid(cfg.get("grid"), n)
    res = picard(f, cfg.require("K"), cfg.require("lambda"), cfg.require("alpha"), grid, cfg.get("iters", 30),
                 _quad(cfg))
    rows = [[k, s] for k, s in enumerate(res.sups)]
    sys.stderr.write(res.notes + ("\ndiverged\n" if res.diverged else "\n"))

    def plot(path):
        from .plotting import line_plot
        line_plot(path, [r[0] for r in rows], {"grid sup": [r[1] for r in rows]}, xlabel="iteration",
                  ylabel="sup f", logy=True, markers=True)
    _emit(cfg, ["iteration", "sup"], rows, plot)
    return 0


HANDLERS = {
    "kernel": cmd_kernel, "potential": cmd_potential, "inverse": cmd_inverse, "verify": cmd_verify,
    "regions": cmd_regions, "blowup": cmd_blowup, "limits": cmd_limits, "picard": cmd_picard,
}


def run(cfg: CliConfig) -> int:
    return HANDLERS[cfg.command](cfg)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
        return run(cfg)
    except UsageError as exc:
        sys.stderr.write(f"fracheat: error: {exc}\n")
        return 2
    except (DomainError, UnsupportedVariantError) as exc:
        sys.stderr.write(f"fracheat: error: {exc}\n")
        return 2
    except ToleranceError as exc:
        sys.stderr.write(f"fracheat: tolerance not met: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
