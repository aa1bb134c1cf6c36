import math

import pytest

from fracheat.errors import DomainError, RegionError
from fracheat.fields import (BackwardParaboloid, ExactSolution, IndicatorSimilarity, ParaboloidPower, Rescaled,
                             Sum, TiltedExact)
from fracheat.grammar import parse_field
from fracheat.potentials import PotentialField


def test_catalog_kinds():
    assert isinstance(parse_field("exact(alpha=1,lambda=0.5)"), ExactSolution)
    assert isinstance(parse_field("tilted(alpha=1,lambda=0.5,N=0.45,K=1)"), TiltedExact)
    p = parse_field("paraboloid(n=2,p=1,gamma=0.5)")
    assert isinstance(p, ParaboloidPower) and p.n == 2 and not p.truncate
    b = parse_field("backward(n=1,p=1,gamma=0.5,t0=0.5,T=1)")
    assert isinstance(b, BackwardParaboloid) and b.T == 1.0
    assert isinstance(parse_field("indsim(n=1,alpha=0.5,lambda=0.5)"), IndicatorSimilarity)
    assert isinstance(parse_field("potential(bump(1),alpha=0.5)"), PotentialField)


def test_positional_and_keyword_forms_agree():
    a = parse_field("backward(1,1,0.5,0.5,1)")
    b = parse_field("backward(n=1, p=1, gamma=0.5, t0=0.5, T=1)")
    assert a == b


def test_sum_and_rescale():
    s = parse_field("sum(exact(alpha=1,lambda=0.5);paraboloid(n=1,p=1,gamma=0.5))")
    assert isinstance(s, Sum) and len(s.children) == 2
    r = parse_field("rescale(exact(alpha=1,lambda=0.5),K=2,T=3)")
    assert isinstance(r, Rescaled) and r.lam == 0.5 and r.alpha == 1.0
    with pytest.raises(DomainError):
        parse_field("rescale(paraboloid(n=1,p=1,gamma=0.5),K=2,T=3)")
    r2 = parse_field("rescale(paraboloid(n=1,p=1,gamma=0.5),K=2,T=3,lambda=0.5,alpha=1)")
    assert r2.T == 3.0


def test_blowup_specs():
    f = parse_field("blowup_small(1,1,3,0.2,1.5,1)")
    assert isinstance(f, Rescaled) and len(f.child.children) == 2
    with pytest.raises(RegionError):
        parse_field("blowup_large(1,1,3,2,1)")


@pytest.mark.parametrize("bad", ["", "exact", "exact(alpha=1)", "exact(alpha=1,lambda=0.5,beta=2)",
                                 "nosuch(1)", "exact(alpha=x,lambda=0.5)", "sum()", "sum(exact(alpha=1,lambda=0.5)",
                                 "paraboloid(n=1.5,p=1,gamma=1)", "exact(alpha=1,alpha=1,lambda=0.5)"])
def test_malformed_specs(bad):
    with pytest.raises(DomainError):
        parse_field(bad)


def test_infinite_values():
    c = parse_field("cylinder(1,inf,0,inf,1)")
    assert math.isinf(c.radius) and c.x_independent
