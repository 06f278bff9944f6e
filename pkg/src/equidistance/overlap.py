"""The overlapping map and the lattices spanned by its images.

Pairs ``(i, j)`` with ``1 <= i < j <= n`` are flattened in plain lexicographic
order ``(1,2), (1,3), ..., (n-1,n)``.  Every quantity computed downstream
(volumes, determinants, spectra) is invariant under a permutation of the
coordinates, so this choice is a convention only.

Vectors over the field span ``L`` are flattened pair-major: the coordinate
``(pair, k)`` of a tensor ``u (x) w`` is ``w[pair] * u[k]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .exact_arith import Number, ReferenceFrame, SurdSum, product_sets, reference_frame
from .lattice import (
    LatticeDescription,
    clear_denominators,
    fundamental_volume,
    lattice_from_basis,
    lattice_from_generators,
    rank_mod2,
)


def num_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


def pair_position(i: int, j: int, n: int) -> int:
    """0-based position of the pair ``{i, j}`` (1-based vertices)."""
    if i > j:
        i, j = j, i
    if not 1 <= i < j <= n:
        raise ValueError(f"invalid pair ({i}, {j}) for n={n}")
    return (i - 1) * n - (i - 1) * i // 2 + (j - i - 1)


def unit(i: int, j: int, n: int, scale: int = 1) -> tuple[int, ...]:
    v = [0] * num_pairs(n)
    v[pair_position(i, j, n)] = scale
    return tuple(v)


def interval(i: int, j: int) -> set[int]:
    return set(range(i, j + 1))


def overlap_H(subset: Iterable[int], n: int) -> tuple[int, ...]:
    """Indicator of the pairs split by ``subset``."""
    s = set(subset)
    if not s <= set(range(1, n + 1)):
        raise ValueError(f"subset {sorted(s)} is not inside 1..{n}")
    return tuple(int((i in s) != (j in s)) for i, j in pairs(n))


def inclusion_exclusion_check(a: Iterable[int], b: Iterable[int], n: int) -> tuple[int, ...]:
    """Return ``H(A) + H(B) - H(A | B)``, checked against ``2 * sum e_ij`` over ``A x B``."""
    a, b = set(a), set(b)
    if a & b:
        raise ValueError(f"sets overlap in {sorted(a & b)}")
    ha, hb, hab = overlap_H(a, n), overlap_H(b, n), overlap_H(a | b, n)
    got = tuple(x + y - z for x, y, z in zip(ha, hb, hab))
    expected = [0] * num_pairs(n)
    for i in a:
        for j in b:
            expected[pair_position(i, j, n)] += 2
    if got != tuple(expected):
        raise AssertionError("inclusion-exclusion identity failed")
    return got


def H_star(subset: Iterable[int], n: int) -> tuple[int, ...]:
    """``H(I)`` minus its (1,2) coordinate on every pair, with (1,2) dropped."""
    h = overlap_H(subset, n)
    return tuple(x - h[0] for x in h[1:])


def bits_to_subset(bits: Sequence[int]) -> set[int]:
    return {k + 1 for k, b in enumerate(bits) if b}


def image_H(n: int) -> list[tuple[int, ...]]:
    return [overlap_H(bits_to_subset(b), n) for b in itertools.product((0, 1), repeat=n)]


def image_H_star(n: int) -> list[tuple[int, ...]]:
    return [H_star(bits_to_subset(b), n) for b in itertools.product((0, 1), repeat=n)]


def basis_H_rows(n: int, substitute: tuple[int, int] | None = None) -> list[tuple[int, ...]]:
    """Basis of the lattice of ``Im H``: the prefix images and ``2e_ij`` for ``j < n``.

    With ``substitute=(i, j)`` the vector ``2e_ij`` is replaced by ``2 * 1``.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    m = num_pairs(n)
    rows = [overlap_H(interval(1, k), n) for k in range(1, n)]
    for i, j in pairs(n - 1):
        if (i, j) == substitute:
            rows.append((2,) * m)
        else:
            rows.append(unit(i, j, n, 2))
    if substitute is not None and (substitute[1] >= n or substitute[0] >= substitute[1]):
        raise ValueError(f"{substitute} is not one of the 2e_ij basis vectors")
    return rows


def basis_lat_H(n: int, substitute: tuple[int, int] | None = None) -> LatticeDescription:
    return lattice_from_basis(basis_H_rows(n, substitute))


def basis_V_binary_rows(n: int) -> list[tuple[int, ...]]:
    """Basis of the lattice of the binary increment vector (length ``m - 1``)."""
    if n < 3:
        raise ValueError("need n >= 3")
    rows = [H_star(interval(1, k), n) for k in range(1, n)]
    for i, j in pairs(n - 1):
        if j > 2:
            rows.append(unit(i, j, n, 2)[1:])
    return rows


def basis_lat_V_binary(n: int) -> LatticeDescription:
    return lattice_from_basis(basis_V_binary_rows(n))


# ---------------------------------------------------------------------------
# General finite supports


def anchor_at_zero(support: Iterable[Number]) -> tuple[SurdSum, ...]:
    """Translate the support so that it contains 0 (a no-op if it already does)."""
    xs = tuple(SurdSum.coerce(x) for x in support)
    if any(x.is_zero() for x in xs):
        return xs
    low = min(xs, key=lambda x: x.to_float())
    return tuple(x - low for x in xs)


def support_frame(support: Iterable[Number]) -> ReferenceFrame:
    """Reference frame of the span of the squares and doubled products."""
    _, x2 = product_sets(anchor_at_zero(support))
    return reference_frame(x2)


def H_X(x: Sequence[Number], frame: ReferenceFrame) -> list[tuple[Fraction, ...]]:
    """Per pair, the coordinates of ``(x_i - x_j)^2``."""
    xs = [SurdSum.coerce(v) for v in x]
    n = len(xs)
    return [frame.coords((xs[i - 1] - xs[j - 1]) * (xs[i - 1] - xs[j - 1])) for i, j in pairs(n)]


def H_star_X(x: Sequence[Number], frame: ReferenceFrame) -> list[tuple[Fraction, ...]]:
    """Per pair other than (1,2), coordinates of ``(x_i - x_j)^2 - (x_1 - x_2)^2``."""
    blocks = H_X(x, frame)
    ref = blocks[0]
    return [tuple(a - b for a, b in zip(blk, ref)) for blk in blocks[1:]]


def flatten(blocks: Sequence[Sequence[Fraction]]) -> tuple[Fraction, ...]:
    return tuple(c for blk in blocks for c in blk)


def tensor(u: Sequence, w: Sequence) -> tuple:
    return tuple(wi * uk for wi in w for uk in u)


@dataclass(frozen=True)
class ProductLattices:
    """Lattices of the doubled products ``X1`` and of ``X2`` on a common frame."""

    support: tuple[SurdSum, ...]
    frame: ReferenceFrame
    lat_x1: LatticeDescription
    lat_x2: LatticeDescription

    @property
    def ell(self) -> int:
        return self.frame.dim

    @property
    def ratio(self) -> Fraction:
        return self.lat_x1.fundamental_volume / self.lat_x2.fundamental_volume


def product_lattices(support: Iterable[Number]) -> ProductLattices:
    xs = anchor_at_zero(support)
    x1, x2 = product_sets(xs)
    frame = reference_frame(x2)
    lat1 = lattice_from_generators([frame.coords(v) for v in x1])
    lat2 = lattice_from_generators([frame.coords(v) for v in x2])
    if lat1.rank != frame.dim or lat2.rank != frame.dim:
        raise ValueError("support spans a degenerate product space (is it a single point?)")
    return ProductLattices(xs, frame, lat1, lat2)


def basis_H_X_rows(support: Iterable[Number], n: int) -> list[tuple[Fraction, ...]]:
    pl = product_lattices(support)
    rows = []
    for k in range(1, n):
        h = overlap_H(interval(1, k), n)
        rows += [tensor(u, h) for u in pl.lat_x2.rational_rows()]
    for i, j in pairs(n - 1):
        e = unit(i, j, n)
        rows += [tensor(v, e) for v in pl.lat_x1.rational_rows()]
    return rows


def basis_lat_H_X(support: Iterable[Number], n: int) -> LatticeDescription:
    return lattice_from_basis(basis_H_X_rows(support, n))


def basis_V_general_rows(support: Iterable[Number], n: int) -> list[tuple[Fraction, ...]]:
    """Tensor basis of the lattice of the embedded increment vector."""
    pl = product_lattices(support)
    rows = []
    for k in range(1, n):
        h = H_star(interval(1, k), n)
        rows += [tensor(u, h) for u in pl.lat_x2.rational_rows()]
    for i, j in pairs(n - 1):
        if j > 2:
            e = unit(i, j, n)[1:]
            rows += [tensor(v, e) for v in pl.lat_x1.rational_rows()]
    return rows


def image_H_X(support: Iterable[Number], n: int) -> list[tuple[Fraction, ...]]:
    xs = anchor_at_zero(support)
    frame = support_frame(xs)
    return sorted({flatten(H_X(x, frame)) for x in itertools.product(xs, repeat=n)})


def image_V_general(support: Iterable[Number], n: int) -> list[tuple[Fraction, ...]]:
    xs = anchor_at_zero(support)
    frame = support_frame(xs)
    return sorted({flatten(H_star_X(x, frame)) for x in itertools.product(xs, repeat=n)})


def volume_lat_V_general(support: Iterable[Number], n: int) -> Fraction:
    """``|Lat X1|^(m-n) * |Lat X2|^(n-1)`` on the support's reference frame."""
    pl = product_lattices(support)
    m = num_pairs(n)
    return pl.lat_x1.fundamental_volume ** (m - n) * pl.lat_x2.fundamental_volume ** (n - 1)


def direct_volume_lat_V(support: Iterable[Number], n: int) -> Fraction:
    """Fundamental volume of the lattice spanned by every increment-vector value."""
    return Fraction(fundamental_volume(image_V_general(support, n)))


@dataclass(frozen=True)
class Z2Ratio:
    ell: int
    r: int | None
    hypothesis_met: bool
    ratio: int | None


def volume_ratio_z2(support: Iterable[Number]) -> Z2Ratio:
    """Volume ratio ``|Lat X1| / |Lat X2|`` from ranks modulo 2.

    Rows of the matrix are the frame coordinates of the squares ``x_i^2`` and
    of the products ``2 x_i x_j`` for ``i != j`` (zero support value left out);
    it is cleared to integers and each column divided by its largest common
    power of two.  When the result has full rank modulo 2 the ratio is
    ``2 ** (ell - r)`` with ``r`` the rank of the product rows modulo 2;
    otherwise no ratio is reported.
    """
    xs = [x for x in anchor_at_zero(support) if not x.is_zero()]
    frame = support_frame(xs + [SurdSum()])
    ell = frame.dim
    u_rows = [frame.coords(x * x) for x in xs]
    v_rows = [frame.coords(2 * (x * y)) for x, y in itertools.permutations(xs, 2)]
    ints, _ = clear_denominators(u_rows + v_rows)
    for col in range(ell):
        nonzero = [r[col] for r in ints if r[col]]
        rho = min((x & -x).bit_length() - 1 for x in nonzero)
        for r in ints:
            r[col] >>= rho
    if rank_mod2(ints) != ell:
        return Z2Ratio(ell, None, False, None)
    r = rank_mod2(ints[len(u_rows):])
    return Z2Ratio(ell, r, True, 2 ** (ell - r))
