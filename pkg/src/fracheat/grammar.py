"""Plain-text field specifications, as used on the command line.

    exact(alpha=A,lambda=L)              tilted(alpha=A,lambda=L,N=N,K=K[,n=1])
    paraboloid(n=N,p=P,gamma=G[,truncate=0|1])
    backward(n=N,p=P,gamma=G,t0=T0,T=T1) indsim(n=N,alpha=A,lambda=L[,L=c])
    blowup_small(n,p,lambda,alpha[,q][,J])   blowup_large(n,p,lambda,alpha[,J])
    sum(F1;F2;...)                       rescale(F,K=K,T=T[,lambda=L,alpha=A])
    sampled(path.csv)
    mollified(alpha,lambda,delta)        cylinder(n,R,t0,t1,amp)
    bump(n,kind,radius,t0,t1,amp)        heat(n,beta)
    potential(F,alpha=A)                 (J_alpha F, evaluated by quadrature)

Arguments may be given by keyword or by position in the order shown.
``describe()`` of every catalog field returns text this module parses back.
"""
from __future__ import annotations

import math
import re

from .errors import DomainError
from . import fields as F

_NAME = re.compile(r"\s*([A-Za-z_][A-Za-z_0-9]*)\s*\(")

# positional order and converters; a trailing "?" marks optional arguments
_SIGNATURES = {
    "exact": ("alpha", "lambda"),
    "mollified": ("alpha", "lambda", "delta"),
    "tilted": ("alpha", "lambda", "N", "K?", "n?"),
    "paraboloid": ("n", "p", "gamma", "truncate?"),
    "backward": ("n", "p", "gamma", "t0", "T"),
    "indsim": ("n", "alpha", "lambda", "L?"),
    "cylinder": ("n", "R?", "t0?", "t1?", "amp?"),
    "bump": ("n", "kind?", "radius?", "t0?", "t1?", "amp?"),
    "heat": ("n", "beta"),
    "blowup_small": ("n", "p", "lambda", "alpha", "q?", "J?"),
    "blowup_large": ("n", "p", "lambda", "alpha", "J?"),
}
_INTS = {"n", "J", "truncate"}
_STRINGS = {"kind"}


def _split(body: str, sep: str):
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise DomainError("unbalanced ')' in field spec")
        if ch == sep and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise DomainError("unbalanced '(' in field spec")
    tail = "".join(cur).strip()
    if tail or parts:
        parts.append(tail)
    return parts


def _head(text: str):
    m = _NAME.match(text)
    if not m or not text.rstrip().endswith(")"):
        raise DomainError(f"cannot parse field spec {text!r}")
    return m.group(1), text[m.end():text.rstrip().rfind(")")]


def _number(key, raw):
    raw = raw.strip()
    if key in _STRINGS:
        return raw
    try:
        v = float(raw)
    except ValueError:
        raise DomainError(f"argument {key}={raw!r} is not a number") from None
    if key in _INTS:
        if not v.is_integer():
            raise DomainError(f"argument {key} must be an integer")
        return int(v)
    return v


def _bind(name, args):
    sig = _SIGNATURES[name]
    keys = [s.rstrip("?") for s in sig]
    out = {}
    for i, a in enumerate(args):
        if "=" in a:
            k, v = a.split("=", 1)
            k = k.strip()
        elif i < len(keys):
            k, v = keys[i], a
        else:
            raise DomainError(f"{name}() takes at most {len(keys)} arguments")
        if k not in keys:
            raise DomainError(f"{name}() has no argument {k!r}")
        if k in out:
            raise DomainError(f"{name}() got {k!r} twice")
        out[k] = _number(k, v)
    missing = [s for s in sig if not s.endswith("?") and s not in out]
    if missing:
        raise DomainError(f"{name}() is missing {', '.join(missing)}")
    return out


def _rescale(args):
    if not args:
        raise DomainError("rescale() needs a field")
    child = parse_field(args[0])
    kw = {}
    for a in args[1:]:
        if "=" not in a:
            raise DomainError("rescale() parameters must be given as key=value")
        k, v = a.split("=", 1)
        kw[k.strip()] = float(v)
    unknown = set(kw) - {"K", "T", "lambda", "alpha"}
    if unknown:
        raise DomainError(f"rescale() has no argument {sorted(unknown)[0]!r}")
    if "K" not in kw or "T" not in kw:
        raise DomainError("rescale() needs K= and T=")
    lam = kw.get("lambda", getattr(child, "lam", None))
    alpha = kw.get("alpha", getattr(child, "alpha", None))
    if lam is None or alpha is None:
        raise DomainError("rescale() needs lambda= and alpha= for this field")
    return F.rescale(child, kw["K"], lam, alpha, kw["T"])


def parse_field(text: str) -> F.Field:
    """Build a field from its text specification."""
    name, body = _head(text.strip())
    if name == "sum":
        parts = _split(body, ";")
        if not parts or any(not p for p in parts):
            raise DomainError("sum() needs one or more fields separated by ';'")
        children = [parse_field(p) for p in parts]
        return children[0] if len(children) == 1 else F.Sum(tuple(children))
    if name == "rescale":
        return _rescale(_split(body, ","))
    if name == "potential":
        args = _split(body, ",")
        if len(args) != 2 or not args[1].replace(" ", "").startswith("alpha="):
            raise DomainError("potential() needs a field and alpha=")
        from .potentials import PotentialField
        return PotentialField(parse_field(args[0]), float(args[1].split("=", 1)[1]))
    if name == "sampled":
        path = body.strip()
        if not path:
            raise DomainError("sampled() needs a CSV path")
        return F.read_sampled_csv(path)
    if name not in _SIGNATURES:
        raise DomainError(f"unknown field kind {name!r}")
    kw = _bind(name, _split(body, ","))
    if name == "exact":
        return F.make_exact_solution(kw["alpha"], kw["lambda"])
    if name == "mollified":
        return F.MollifiedExact(kw["alpha"], kw["lambda"], kw["delta"])
    if name == "tilted":
        return F.make_tilted_exact(kw["alpha"], kw["lambda"], kw["N"], kw.get("K", 1.0), kw.get("n", 1))
    if name == "paraboloid":
        return F.make_paraboloid_power(kw["n"], kw["p"], kw["gamma"], bool(kw.get("truncate", 0)))
    if name == "backward":
        return F.make_backward_paraboloid(kw["n"], kw["p"], kw["gamma"], kw["t0"], kw["T"])
    if name == "indsim":
        if "L" in kw:
            return F.IndicatorSimilarity(kw["n"], kw["alpha"], kw["lambda"], kw["L"])
        return F.make_indicator_similarity(kw["n"], kw["alpha"], kw["lambda"])
    if name == "cylinder":
        return F.Cylinder(kw["n"], kw.get("R", math.inf), kw.get("t0", 0.0), kw.get("t1", math.inf),
                          kw.get("amp", 1.0))
    if name == "bump":
        return F.Bump(kw["n"], kw.get("kind", "gauss"), kw.get("radius", 1.0), kw.get("t0", 0.0),
                      kw.get("t1", 1.0), kw.get("amp", 1.0))
    if name == "heat":
        return F.HeatKernelField(kw["n"], kw["beta"])
    from .blowup import make_blowup_large_time, make_blowup_small_time
    if name == "blowup_small":
        fam = make_blowup_small_time(kw["n"], kw["p"], kw["lambda"], kw["alpha"], kw.get("q"),
                                     kw.get("J", 3))
    else:
        fam = make_blowup_large_time(kw["n"], kw["p"], kw["lambda"], kw["alpha"], kw.get("J", 3))
    return fam.field
