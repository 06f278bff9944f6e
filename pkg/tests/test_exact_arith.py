import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equidistance.exact_arith import (
    BasisIncompleteError,
    HamelBasis,
    Surd,
    SurdSum,
    build_hamel_basis,
    number_to_json,
    parse_number,
    parse_rational,
    product_sets,
    reference_frame,
    square_free_decompose,
    to_qspan,
)

from conftest import surd


@pytest.mark.parametrize("n,expected", [(1, (1, 1)), (12, (2, 3)), (72, (6, 2)), (49, (7, 1)), (30, (1, 30))])
def test_square_free_examples(n, expected):
    assert square_free_decompose(n) == expected


@given(st.integers(1, 10**5))
def test_square_free_property(n):
    g, u = square_free_decompose(n)
    assert g * g * u == n
    assert all(u % (p * p) for p in range(2, math.isqrt(u) + 1))


def test_square_free_rejects_nonpositive():
    with pytest.raises(ValueError):
        square_free_decompose(0)


def test_surd_canonical_form():
    assert Surd(1, 8) == Surd(2, 2)
    assert Surd(0, 5).radicand == 1
    assert Surd(3, 9) == Surd(9, 1)
    assert Surd(1, 2) * Surd(1, 3) == Surd(1, 6)
    assert Surd(1, 2) * Surd(1, 2) == Surd(2, 1)


def test_parse_rational_refuses_floats():
    assert parse_rational("3/6") == Fraction(1, 2)
    with pytest.raises(ValueError):
        parse_rational("0.5")
    with pytest.raises(TypeError):
        parse_rational(0.5)
    with pytest.raises(TypeError):
        parse_rational(True)


def test_field_identities():
    one = SurdSum.coerce(1)
    r2 = surd(1, 2)
    assert (one + r2) * (one - r2) == SurdSum.coerce(-1)
    assert surd(1, 2) + surd(1, 3) != surd(1, 5)
    s = surd(1, 2) + surd(1, 3)
    assert s * s == SurdSum.coerce(5) + surd(2, 6)
    assert (s - s).is_zero()


small_surd = st.builds(
    lambda c, t: surd(c, t),
    st.fractions(min_value=-5, max_value=5, max_denominator=6),
    st.sampled_from([1, 2, 3, 5, 6, 7, 10]),
)
surd_sums = st.lists(small_surd, min_size=0, max_size=3).map(lambda xs: sum(xs, SurdSum()))


@given(surd_sums, surd_sums, surd_sums)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == SurdSum()


@given(surd_sums, surd_sums)
def test_float_rendering_consistent(a, b):
    assert math.isclose((a * b).to_float(), a.to_float() * b.to_float(), rel_tol=1e-9, abs_tol=1e-9)


@given(surd_sums)
def test_json_roundtrip(x):
    assert parse_number(number_to_json(x)) == x


def test_parse_number_forms():
    assert parse_number("1/3") == SurdSum.coerce(Fraction(1, 3))
    assert parse_number({"s": "2", "t": 8}) == surd(4, 2)
    assert parse_number([{"s": "1", "t": 2}, "1"]) == surd(1, 2) + 1
    with pytest.raises(ValueError):
        parse_number({"s": "1", "r": 2})


def test_hamel_basis_validation():
    with pytest.raises(ValueError):
        HamelBasis((2, 3))
    with pytest.raises(ValueError):
        HamelBasis((1, 4))
    with pytest.raises(ValueError):
        HamelBasis((1, 2, 2))
    b = build_hamel_basis([surd(1, 3), surd(2, 2), 5])
    assert b.radicands == (1, 2, 3)
    with pytest.raises(BasisIncompleteError):
        b.index(5)
    v = to_qspan(surd(1, 3) + 2, b)
    assert v.coords == (2, 0, 1)
    assert (v + v).to_surd_sum() == 2 * (surd(1, 3) + 2)


def test_product_sets_and_frame():
    x1, x2 = product_sets([0, 1, surd(1, 2)])
    assert surd(2, 2) in x1 and SurdSum.coerce(2) in x1
    assert SurdSum.coerce(1) in x2 and SurdSum.coerce(1) not in x1
    # a sum of surds spans fewer directions than its radicands suggest
    xs = [0, 1, surd(1, 2) + surd(1, 3)]
    frame = reference_frame(product_sets(xs)[1])
    assert frame.dim == 3 and not frame.is_full
    with pytest.raises(BasisIncompleteError):
        frame.coords(surd(1, 2))


@settings(max_examples=50)
@given(st.lists(small_surd, min_size=1, max_size=4))
def test_frame_coords_reconstruct(values):
    frame = reference_frame(values)
    for v in values:
        c = frame.coords(v)
        back = sum((ci * SurdSum(dict(zip(frame.hamel.radicands, row))) for ci, row in zip(c, frame.rows)), SurdSum())
        assert back == v
