import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equidistance.covariance import DegenerateDistributionError
from equidistance.distribution import DistributionSpec
from equidistance.oracle import (
    BudgetExceeded,
    _Codec,
    brute_p_d,
    column_law,
    convergence_table,
    dp_p_d,
    dp_tables,
    exact_p_d,
    mc_estimate,
)

from conftest import surd


def test_column_law_bernoulli(bern):
    law = column_law(bern, 3)
    assert law.atoms == {
        (0, 0): Fraction(1, 4),
        (1, 1): Fraction(1, 4),
        (-1, 0): Fraction(1, 4),
        (0, -1): Fraction(1, 4),
    }


def test_column_law_constant():
    law = column_law(DistributionSpec.uniform([3]), 4)
    assert law.atoms == {(0,) * 5: 1}


def test_column_law_surd(surd4):
    law = column_law(surd4, 3)
    assert law.dimension == 8 and law.ell == 4
    assert sum(law.atoms.values()) == 1
    assert law.atoms[(0,) * 8] > 0
    assert len(law.weights) <= 4**3


@pytest.mark.parametrize("d,p", [(0, 1), (1, Fraction(1, 4)), (2, Fraction(1, 16)), (3, Fraction(7, 64))])
def test_small_d_bernoulli(bern, d, p):
    assert exact_p_d(bern, 3, d) == p
    assert brute_p_d(bern, 3, d) == p


def test_surd_small_d(surd4):
    # 4 of the 64 triples are equidistant: the constant ones
    assert brute_p_d(surd4, 3, 1) == Fraction(4, 64)
    assert exact_p_d(surd4, 3, 2) == brute_p_d(surd4, 3, 2)


@st.composite
def small_dists(draw):
    pool = [0, 1, 2, 3, Fraction(1, 2), surd(1, 2), surd(1, 3), surd(1, 2) + 1]
    k = draw(st.integers(2, 3))
    idx = draw(st.lists(st.integers(0, len(pool) - 1), min_size=k, max_size=k, unique=True))
    w = draw(st.lists(st.integers(1, 4), min_size=k, max_size=k))
    return DistributionSpec(tuple(pool[i] for i in idx), tuple(Fraction(x, sum(w)) for x in w))


@settings(max_examples=25, deadline=None)
@given(small_dists(), st.integers(3, 4), st.integers(0, 2))
def test_dp_equals_brute(dist, n, d):
    assert exact_p_d(dist, n, d) == brute_p_d(dist, n, d)


@settings(max_examples=20, deadline=None)
@given(small_dists(), st.integers(1, 3), st.integers(-3, 3), st.integers(1, 4))
def test_affine_invariance(dist, a, b, d):
    moved = dist.map(lambda x: -a * x + b)
    assert exact_p_d(moved, 3, d) == exact_p_d(dist, 3, d)


def test_mass_conservation(surd4):
    for dist in (DistributionSpec.uniform([0, 1, 3]), surd4):
        tables = dp_tables(dist, 3, 3)
        law = column_law(dist, 3)
        for t in tables:
            assert t.total() == law.denominator**t.step
            if t.step:
                assert t.points()[(0,) * law.dimension] > 0


@given(st.integers(1, 6).flatmap(lambda k: st.lists(st.integers(-20, 20), min_size=k, max_size=k)))
def test_codec_roundtrip(v):
    codec = _Codec(len(v), 20)
    assert codec.decode(codec.encode(v)) == tuple(v)
    assert codec.encode([-x for x in v]) == -codec.encode(v)


def test_float_mode_tracks_exact(bern):
    ds = [5, 10, 20]
    ex = dp_p_d(bern, 4, ds).values
    fl = dp_p_d(bern, 4, ds, mode="float").values
    for d in ds:
        assert math.isclose(fl[d], float(ex[d]), rel_tol=1e-12)


def test_budget_refusal(bern):
    with pytest.raises(BudgetExceeded, match="float mode"):
        exact_p_d(bern, 3, 200, budget=100)
    res = dp_p_d(bern, 3, [2, 200], budget=100)
    assert res.values == {2: Fraction(1, 16)} and res.refused == (200,)
    with pytest.raises(BudgetExceeded):
        brute_p_d(bern, 3, 30)
    with pytest.raises(ValueError):
        dp_p_d(bern, 3, [1], mode="approx")


def test_mc_determinism(bern):
    a = mc_estimate(bern, 3, 20, 50_000, seed=42, shard_size=4096)
    b = mc_estimate(bern, 3, 20, 50_000, seed=42, shard_size=4096, workers=3)
    c = mc_estimate(bern, 3, 20, 50_000, seed=43, shard_size=4096)
    assert a == b and a != c
    assert 0 <= a.hits <= a.samples
    assert a.estimate == a.hits / a.samples
    assert a.standard_error == math.sqrt(a.estimate * (1 - a.estimate) / a.samples)


def test_mc_agrees_with_dp(bern, surd4):
    r = mc_estimate(bern, 3, 10, 200_000, seed=1)
    assert abs(r.estimate - float(exact_p_d(bern, 3, 10))) <= 4 * r.standard_error
    nonuniform = DistributionSpec((0, 1, surd(1, 2)), (Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)))
    r = mc_estimate(nonuniform, 3, 3, 200_000, seed=2)
    assert abs(r.estimate - float(exact_p_d(nonuniform, 3, 3))) <= 4 * r.standard_error


def test_mc_edges(bern):
    assert mc_estimate(bern, 3, 0, 10, seed=0).estimate == 1
    with pytest.raises(ValueError):
        mc_estimate(bern, 3, 5, 0, seed=0)


def test_convergence_table(bern):
    rows = convergence_table(bern, 3, [1, 2, 3, 40])
    assert [r.p for r in rows[:3]] == [Fraction(1, 4), Fraction(1, 16), Fraction(7, 64)]
    assert rows[0].method == "brute" and rows[-1].method == "exact-dp"
    assert abs(rows[-1].ratio - 1) < 0.02


def test_convergence_table_fallbacks(bern):
    rows = convergence_table(bern, 3, [100], exact_budget=50, float_budget=50, samples=20_000, seed=3)
    assert rows[0].method == "mc" and rows[0].standard_error is not None
    rows = convergence_table(bern, 3, [100], exact_budget=50, float_budget=50)
    assert rows[0].p is None and "refused" in rows[0].note
    rows = convergence_table(bern, 3, [100], exact_budget=50)
    assert rows[0].method == "float-dp"


def test_convergence_table_degenerate():
    with pytest.raises(DegenerateDistributionError):
        convergence_table(DistributionSpec.uniform([1]), 3, [1, 2])
