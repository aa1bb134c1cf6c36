import math
from fractions import Fraction

import numpy as np
import pytest

from fracheat.analysis import (ParabolicBox, PicardGrid, RegionLabel, box_norm, classify, critical_alpha,
                               gamma_sequence, limit_scan, picard, sup_bounds, verify_subsolution)
from fracheat.blowup import make_blowup_large_time, make_blowup_small_time
from fracheat.errors import DomainError, RegionError
from fracheat.fields import BackwardParaboloid, Bump, Cylinder, ParaboloidPower, make_exact_solution
from fracheat.potentials import SlabRegion, j_alpha
from fracheat.special import mbar_constant, sharp_constant


def test_classify_exact_rationals():
    n, p = 1, Fraction(1)
    lam = Fraction(3, 2)
    th = critical_alpha(lam, p, n)
    assert th == Fraction(1, 2)
    assert classify(lam, th, p, n) is RegionLabel.D
    assert classify(lam, th + Fraction(1, 10 ** 30), p, n) is RegionLabel.A
    assert classify(lam, th - Fraction(1, 10 ** 30), p, n) is RegionLabel.C
    assert classify(Fraction(1, 2), Fraction(1), p, n) is RegionLabel.B
    assert classify(Fraction(1), Fraction(1), p, n) is RegionLabel.A


def test_classify_floats():
    th = critical_alpha(3.0, 1.0, 1)
    assert th == pytest.approx(1.0)
    assert classify(3.0, th, 1.0, 1) is RegionLabel.D
    assert classify(3.0, 0.9, 1.0, 1) is RegionLabel.C
    assert classify(3.0, 1.1, 1.0, 1) is RegionLabel.A
    with pytest.raises(DomainError):
        classify(1.5, 1.0, 0.5, 1)


def test_sup_bounds_attained_by_exact_solution():
    alpha, lam, b = 1.0, 0.5, 2.0
    sf, sj = sup_bounds(1.0, lam, alpha, b)
    g = make_exact_solution(alpha, lam)
    assert sf == pytest.approx(float(g.value(np.array([[0.0]]), np.array([b]))[0]), rel=1e-14)
    assert sj == pytest.approx(j_alpha(g, 1, alpha, 0.0, b), rel=1e-10)
    with pytest.raises(DomainError):
        sup_bounds(1.0, 1.0, alpha, b)


def test_gamma_sequence_fixed_point():
    seq = gamma_sequence(1.0, 0.5, 60)
    assert seq.values[0] == 1.0
    assert seq.limit == pytest.approx(mbar_constant(1.0, 0.5), rel=1e-14)
    assert abs(seq.values[-1] - seq.limit) < 1e-12


def test_picard_converges_to_exact_profile():
    # from the time indicator, f <- (J_1 f)^(1/2) tends to (M t)^1 with M = 1/2
    r = picard(Cylinder(1), 1.0, 0.5, 1.0, iters=30)
    assert not r.diverged
    assert r.sups[-1] == pytest.approx(sharp_constant(1.0, 0.5), rel=1e-6)
    assert r.field is not None and r.values.shape == (33, 41)


def test_picard_decays_in_region_a():
    r = picard(Cylinder(1, amp=0.1), 1.0, 2.0, 2.0, grid=PicardGrid(nr=9, nt=10), iters=8)
    assert r.sups[1] < r.sups[0]
    assert all(b <= a for a, b in zip(r.sups[1:], r.sups[2:]))
    assert r.sups[-1] < 1e-30


def test_verify_subsolution():
    g = make_exact_solution(1.0, 0.5)
    pts = (np.linspace(-1, 1, 5), np.linspace(0.2, 1.0, 5))
    assert verify_subsolution(g, 1.0, 0.5, 1.0, pts).passed
    # halving K breaks the inequality by a factor of two
    bad = verify_subsolution(g, 0.5, 0.5, 1.0, pts)
    assert not bad.passed
    viol = [e for e in bad.entries if e.check == "subsolution.max_relative_violation"][0]
    assert float(viol.measured) == pytest.approx(0.5, rel=1e-8)


def test_box_norms():
    f = ParaboloidPower(1, 1.0, 0.5, truncate=True)
    assert box_norm(f, 1.0, SlabRegion(0.0, 1.0)).value == pytest.approx(4.0, rel=1e-12)
    # on {|x| < 1, 1 < t < 2} the untruncated paraboloid has |x| < sqrt(t), so the box cuts it to |x| < 1
    g = ParaboloidPower(1, 1.0, 0.5)
    ref = 2 * math.log(2.0)
    assert box_norm(g, 1.0, ParabolicBox(1.0)).value == pytest.approx(ref, rel=1e-9)
    sing = BackwardParaboloid(1, 1.0, 0.0, 0.5, 1.0)
    bn = box_norm(sing, 1.0, ParabolicBox(0.5))
    assert math.isinf(bn.value) and bn.certified and bn.certificate
    assert box_norm(Cylinder(1, 1.0, 0.0, 1.0), 2.0, SlabRegion(0.0, 1.0)).value == pytest.approx(math.sqrt(2))
    with pytest.raises(DomainError):
        box_norm(f, 0.5, SlabRegion(0.0, 1.0))


def test_limit_scan_of_zero_field():
    zero = Cylinder(1, 1.0, 0.0, 1.0, 0.0)
    rep = limit_scan(zero, 1, 0.5, "time-limit", [1.0, 0.5], (np.array([[0.0]]), np.array([0.5])))
    assert rep.passed and rep.metadata["errors"] == [0.0, 0.0]
    with pytest.raises(DomainError):
        limit_scan(zero, 1, 0.5, "space-limit", [1.0], (np.array([[0.0]]), np.array([0.5])))
    with pytest.raises(DomainError):
        limit_scan(zero, 1, 0.5, "other", [1.0], (np.array([[0.0]]), np.array([0.5])))


def test_limit_scan_decreases():
    f = Bump(1)
    rep = limit_scan(f, 1, 0.5, "time-limit", [0.5, 0.25, 0.125], (np.array([[0.0], [0.3]]), np.array([0.5, 1.0])),
                     final_tol=math.inf)
    errs = rep.metadata["errors"]
    assert errs[0] > errs[1] > errs[2] > 0


def test_blowup_small_time_family():
    fam = make_blowup_small_time(1, 1.0, 3.0, 0.2, J=2)
    assert fam.T_seq == sorted(fam.T_seq, reverse=True)
    # backward supports (T/2, T) are pairwise disjoint
    spans = sorted((T / 2, T) for T in fam.T_seq)
    assert all(a[1] <= b[0] for a, b in zip(spans, spans[1:]))
    assert fam.scale > 0
    f = fam.field
    for T in fam.T_seq:
        bn = box_norm(f, fam.q, ParabolicBox(T / 2))
        assert math.isinf(bn.value) and bn.certified


def test_blowup_large_time_family():
    fam = make_blowup_large_time(1, 1.0, 3.0, 0.2, J=2)
    assert fam.T_seq == [4.0, 16.0]


def test_blowup_rejects_other_regions():
    with pytest.raises(RegionError):
        make_blowup_small_time(1, 1.0, 3.0, 2.0)
    with pytest.raises(RegionError):
        make_blowup_large_time(1, 1.0, 0.5, 0.2)
