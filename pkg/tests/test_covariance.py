import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equidistance.covariance import (
    DegenerateDistributionError,
    SingularCovarianceError,
    asymptotic_constant,
    binary_q,
    c_constants,
    c_constants_by_enumeration,
    cov_by_enumeration,
    cov_matrix_V,
    cov_matrix_V_general,
    det_cov_closed,
    det_cov_general_closed,
    is_positive_definite,
    lattice_q,
    matrix_constants,
    moments,
    structured_det,
)
from equidistance.distribution import DistributionSpec, normalize
from equidistance.lattice import bareiss_det

from conftest import surd


@st.composite
def rational_dists(draw, max_size=4):
    k = draw(st.integers(2, max_size))
    support = draw(st.lists(st.fractions(-6, 6, max_denominator=4), min_size=k, max_size=k, unique=True))
    weights = draw(st.lists(st.integers(1, 6), min_size=k, max_size=k))
    total = sum(weights)
    return DistributionSpec(tuple(support), tuple(Fraction(w, total) for w in weights))


def test_moments_examples(bern):
    mo = moments(bern)
    assert (mo.m1, mo.m2, mo.m3, mo.m4, mo.var) == (Fraction(1, 2),) * 4 + (Fraction(1, 4),)
    mo = moments(DistributionSpec.uniform([0, 1, 2]))
    assert (mo.m1, mo.m2, mo.var) == (1, Fraction(5, 3), Fraction(2, 3))
    assert moments(DistributionSpec.uniform([4])).var == 0


def test_constants_examples(bern):
    cc = c_constants(bern)
    assert (cc.c0, cc.c1) == (Fraction(1, 4), 0)
    cc = c_constants(DistributionSpec.uniform([0, 1, 2]))
    assert (cc.c0, cc.c1) == (Fraction(20, 9), Fraction(2, 9))
    assert c_constants(DistributionSpec.uniform([-3, 5])).c1 == 0
    with pytest.raises(DegenerateDistributionError):
        c_constants(DistributionSpec.uniform([2]))


@given(rational_dists())
def test_constant_identities(dist):
    cc = c_constants(dist)
    assert cc.c0 - 2 * cc.c1 == 4 * cc.var**2
    assert cc.c1 >= 0
    assert cc == c_constants_by_enumeration(dist)


def test_binary_cov_matrix(bern):
    for n in (3, 4, 5):
        mat = cov_matrix_V(bern, n)
        k = len(mat)
        assert mat == [[Fraction(1, 4) + Fraction(1, 4) * (i == j) for j in range(k)] for i in range(k)]


@settings(max_examples=15, deadline=None)
@given(rational_dists(max_size=3), st.integers(3, 5))
def test_cov_matrix_matches_enumeration(dist, n):
    assert cov_matrix_V(dist, n) == cov_by_enumeration(dist, n)


@settings(max_examples=15, deadline=None)
@given(rational_dists(), st.integers(3, 6))
def test_closed_determinant(dist, n):
    cc = c_constants(dist)
    assert det_cov_closed(n, cc.c0, cc.c1) == bareiss_det(cov_matrix_V(dist, n))


def test_closed_determinant_examples():
    assert det_cov_closed(3, Fraction(1, 4), 0) == Fraction(3, 16)
    assert det_cov_closed(4, Fraction(1, 4), 0) == Fraction(3, 512)
    assert det_cov_closed(5, Fraction(1), Fraction(1, 2)) == 0


def test_structured_det():
    assert structured_det(2, 1, 3) == 4
    assert structured_det(Fraction(3), 0, 4) == 81
    assert structured_det(5, 5, 3) == 0
    with pytest.raises(ValueError):
        structured_det(1, 1, 0)


@given(st.fractions(-5, 5, max_denominator=3), st.fractions(-5, 5, max_denominator=3), st.integers(1, 6))
def test_structured_det_matches_bareiss(a, b, k):
    mat = [[a if i == j else b for j in range(k)] for i in range(k)]
    assert structured_det(a, b, k) == bareiss_det(mat)


def test_matrix_constants_surd(surd4):
    mc = matrix_constants(surd4)
    assert mc.ell == 4
    assert is_positive_definite(mc.c0)
    # c0 - 2 c1 is four times the covariance of the centered product
    assert all(
        mc.c0[i][j] - 2 * mc.c1[i][j] == 4 * mc.centered_product_cov[i][j] for i in range(4) for j in range(4)
    )
    for n in (3, 4):
        full = cov_matrix_V_general(surd4, n, mc)
        assert full == cov_by_enumeration(surd4, n)
        assert det_cov_general_closed(n, mc.c0, mc.c1) == bareiss_det(full)


def test_matrix_case_reduces_to_scalar():
    dist = DistributionSpec.uniform([0, 1, 3])
    mc = matrix_constants(dist)
    cc = c_constants(dist)
    assert (mc.c0, mc.c1) == ([[cc.c0]], [[cc.c1]])
    for n in (3, 4, 5):
        assert det_cov_general_closed(n, mc.c0, mc.c1) == det_cov_closed(n, cc.c0, cc.c1)


def test_singular_c0_flagged():
    with pytest.raises(SingularCovarianceError):
        det_cov_general_closed(3, [[Fraction(1), 0], [0, Fraction(0)]], [[0, 0], [0, 0]])
    assert not is_positive_definite([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(1)]])


def test_binary_constants(bern):
    p3 = asymptotic_constant(bern, 3)
    assert p3.exponent == 1 and p3.constant.q == Fraction(4, 3) and p3.constant.pi_power == -1
    assert abs(p3.constant.value - 0.367553) < 1e-6
    p4 = asymptotic_constant(bern, 4)
    assert p4.exponent == Fraction(5, 2) and p4.constant.q == Fraction(2**9, 6)
    for n in range(3, 9):
        p = asymptotic_constant(bern, n)
        assert p.constant.q == binary_q(n) == lattice_q(n, Fraction(1, 4), 0)
        assert p.lattice_volume == 2 ** (p.m - n)


@settings(max_examples=20, deadline=None)
@given(rational_dists(), st.integers(3, 6))
def test_lattice_formula_closed_form(dist, n):
    p = asymptotic_constant(dist, n)
    cc = c_constants(normalize(dist)[0])
    assert p.constant.q == lattice_q(n, cc.var, cc.c1)
    assert p.notes == ()


@settings(max_examples=20, deadline=None)
@given(rational_dists(), st.integers(1, 5), st.integers(-4, 4), st.integers(3, 5), st.randoms())
def test_affine_and_permutation_invariance(dist, a, b, n, rnd):
    p = asymptotic_constant(dist, n)
    sign = rnd.choice([1, -1])
    moved = dist.map(lambda x: sign * a * x + b)
    order = list(range(len(dist.support)))
    rnd.shuffle(order)
    perm = DistributionSpec(tuple(dist.support[i] for i in order), tuple(dist.probs[i] for i in order))
    assert asymptotic_constant(moved, n).constant == p.constant
    assert asymptotic_constant(perm, n).constant == p.constant


def test_general_path(surd4):
    p = asymptotic_constant(surd4, 3)
    assert (p.method, p.ell, p.exponent, p.lattice_volume, p.ratio) == ("general", 4, 4, 64, 2)
    neg = surd4.map(lambda x: -x + 7)
    assert asymptotic_constant(neg, 3).constant == p.constant
    with pytest.raises(ValueError):
        asymptotic_constant(surd4, 3, method="lattice")


def test_general_method_on_rational_support():
    rnd = random.Random(3)
    for _ in range(5):
        support = rnd.sample(range(-6, 7), rnd.randint(2, 4))
        dist = DistributionSpec.uniform(support)
        for n in (3, 4, 5):
            assert asymptotic_constant(dist, n, "general").constant == asymptotic_constant(dist, n, "lattice").constant


def test_degenerate_prediction():
    p = asymptotic_constant(DistributionSpec.uniform([surd(1, 2)]), 4)
    assert p.degenerate and p.predict(10) == 1.0
    assert p.to_json()["p_d"] == 1
