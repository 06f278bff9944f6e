"""Integer lattices: Hermite and Smith normal forms, fundamental volumes.

Matrices are plain lists of rows.  Lattices are always the row lattices
(all integer combinations of the rows).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Matrix = list[list[int]]


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``x*a + y*b == g == gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


class _EchelonBuilder:
    """Integer row echelon form maintained under insertion of generators."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: dict[int, list[int]] = {}

    def add(self, vec: Sequence[int]) -> None:
        v = [int(a) for a in vec]
        if len(v) != self.ncols:
            raise ValueError(f"expected length {self.ncols}, got {len(v)}")
        rows = self.rows
        for col in range(self.ncols):
            b = v[col]
            if not b:
                continue
            r = rows.get(col)
            if r is None:
                rows[col] = v if b > 0 else [-a for a in v]
                return
            a = r[col]
            if b % a == 0:
                q = b // a
                v[col:] = [vi - q * ri for vi, ri in zip(v[col:], r[col:])]
                continue
            g, x, y = xgcd(a, b)
            ag, bg = a // g, b // g
            tail_r, tail_v = r[col:], v[col:]
            r[col:] = [x * ri + y * vi for ri, vi in zip(tail_r, tail_v)]
            v[col:] = [ag * vi - bg * ri for ri, vi in zip(tail_r, tail_v)]

    def hnf(self) -> Matrix:
        pivots = sorted(self.rows)
        out = [list(self.rows[p]) for p in pivots]
        for i, p in enumerate(pivots):
            piv = out[i][p]
            for j in range(i):
                q = out[j][p] // piv
                if q:
                    out[j][p:] = [a - q * b for a, b in zip(out[j][p:], out[i][p:])]
        return out


def hermite_normal_form(rows: Iterable[Sequence[int]], ncols: int | None = None) -> tuple[Matrix, int]:
    """Row-style HNF of the lattice spanned by ``rows``.

    Pivots are positive and strictly increase by column; entries above a
    pivot lie in ``[0, pivot)``.  Returns the nonzero HNF rows and the rank.
    """
    rows = [list(r) for r in rows]
    if ncols is None:
        if not rows:
            raise ValueError("cannot infer the dimension of an empty generator set")
        ncols = len(rows[0])
    builder = _EchelonBuilder(ncols)
    seen = set()
    for r in rows:
        key = tuple(r)
        if key in seen:
            continue
        seen.add(key)
        builder.add(r)
    h = builder.hnf()
    return h, len(h)


@dataclass(frozen=True)
class SmithForm:
    invariants: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.invariants)


def smith_normal_form(rows: Iterable[Sequence[int]]) -> SmithForm:
    """Invariant factors by repeated gcd extraction.

    At each round the smallest nonzero entry in absolute value is moved to the
    corner and used to clear its row and column; once it divides the whole
    remaining block it is the next invariant and the block recurses.
    """
    a = [list(map(int, r)) for r in rows]
    invariants = []
    while True:
        a = [r for r in a if any(r)]
        if not a:
            break
        live = [j for j in range(len(a[0])) if any(r[j] for r in a)]
        a = [[r[j] for j in live] for r in a]
        while True:
            _, pi, pj = min(
                (abs(x), i, j) for i, r in enumerate(a) for j, x in enumerate(r) if x
            )
            a[0], a[pi] = a[pi], a[0]
            for r in a:
                r[0], r[pj] = r[pj], r[0]
            p = a[0][0]
            clean = True
            for r in a[1:]:
                q = r[0] // p
                if q:
                    for j, x in enumerate(a[0]):
                        r[j] -= q * x
                if r[0]:
                    clean = False
            for j in range(1, len(a[0])):
                q = a[0][j] // p
                if q:
                    for r in a:
                        r[j] -= q * r[0]
                if a[0][j]:
                    clean = False
            if not clean:
                continue
            bad = next((r for r in a[1:] if any(x % p for x in r[1:])), None)
            if bad is None:
                break
            a[0] = [x + y for x, y in zip(a[0], bad)]
        invariants.append(abs(p))
        a = [r[1:] for r in a[1:]]
        if not a or not a[0]:
            break
    return SmithForm(tuple(invariants))


def bareiss_det(matrix: Sequence[Sequence]) -> int | Fraction:
    """Fraction-free exact determinant (integer or Fraction entries)."""
    a = [list(r) for r in matrix]
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return 1
    integral = all(isinstance(x, int) for r in a for x in r)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                num = row_i[j] * akk - aik * row_k[j]
                row_i[j] = num // prev if integral else num / prev
        prev = akk
    return sign * a[-1][-1]


def rank_over_q(rows: Sequence[Sequence]) -> int:
    a = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    ncols = len(a[0]) if a else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(a)) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(rank + 1, len(a)):
            f = a[i][col] / a[rank][col]
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def rank_mod2(rows: Iterable[Sequence[int]]) -> int:
    """Rank over the field with two elements."""
    basis: dict[int, int] = {}
    for r in rows:
        v = 0
        for j, x in enumerate(r):
            if x % 2:
                v |= 1 << j
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def clear_denominators(rows: Iterable[Sequence]) -> tuple[Matrix, int]:
    """Scale rational rows by the lcm of all denominators."""
    rows = [[Fraction(x) for x in r] for r in rows]
    den = 1
    for r in rows:
        for x in r:
            den = math.lcm(den, x.denominator)
    return [[int(x * den) for x in r] for r in rows], den


@dataclass(frozen=True)
class LatticeDescription:
    """A lattice given by linearly independent basis rows ``basis / denominator``."""

    basis: tuple[tuple[int, ...], ...]
    denominator: int
    fundamental_volume: Fraction

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def dim(self) -> int:
        return len(self.basis[0]) if self.basis else 0

    def rational_rows(self) -> list[list[Fraction]]:
        return [[Fraction(x, self.denominator) for x in r] for r in self.basis]


def _volume_of_integer_rows(rows: Matrix) -> int:
    h, _ = hermite_normal_form(rows)
    if not h:
        raise ValueError("the zero lattice has no fundamental volume")
    return math.prod(smith_normal_form(h).invariants)


def fundamental_volume(generators: Iterable[Sequence]) -> int | Fraction:
    """Volume of the lattice generated by ``generators`` inside its own span.

    This is the product of the Smith invariants, i.e. |det B| for any basis
    ``B`` when the lattice has full rank.  Rational generators are rescaled to
    integers and the result is divided by ``lcm ** rank``.
    """
    gens = [list(g) for g in generators]
    if not gens:
        raise ValueError("fundamental volume of an empty generator set")
    if all(isinstance(x, int) for g in gens for x in g):
        return _volume_of_integer_rows(gens)
    ints, den = clear_denominators(gens)
    h, rank = hermite_normal_form(ints)
    if not h:
        raise ValueError("the zero lattice has no fundamental volume")
    return Fraction(math.prod(smith_normal_form(h).invariants), den**rank)


def lattice_from_basis(rows: Iterable[Sequence]) -> LatticeDescription:
    """Wrap explicit basis rows; raises if they are linearly dependent."""
    rows = [list(r) for r in rows]
    if not rows:
        raise ValueError("empty basis")
    if rank_over_q(rows) != len(rows):
        raise ValueError("basis rows are linearly dependent")
    ints, den = clear_denominators(rows)
    vol = Fraction(math.prod(smith_normal_form(ints).invariants), den ** len(rows))
    return LatticeDescription(tuple(map(tuple, ints)), den, vol)


def lattice_from_generators(generators: Iterable[Sequence]) -> LatticeDescription:
    """Reduce arbitrary generators to an HNF basis."""
    ints, den = clear_denominators(generators)
    h, rank = hermite_normal_form(ints)
    if not h:
        raise ValueError("the zero lattice has no basis")
    vol = Fraction(math.prod(smith_normal_form(h).invariants), den**rank)
    return LatticeDescription(tuple(map(tuple, h)), den, vol)


def lattice_member(v: Sequence, lattice: LatticeDescription) -> tuple[bool, list[int] | None]:
    """Decide whether ``v`` is an integer combination of the basis rows.

    Returns ``(True, coefficients)`` or ``(False, None)``.
    """
    if len(v) != lattice.dim:
        raise ValueError(f"dimension mismatch: {len(v)} vs {lattice.dim}")
    target = [Fraction(x) * lattice.denominator for x in v]
    r = lattice.rank
    # Solve basis^T c = target over Q by elimination on the augmented columns.
    aug = [[Fraction(lattice.basis[i][j]) for i in range(r)] + [target[j]] for j in range(lattice.dim)]
    row = 0
    pivots = []
    for col in range(r):
        piv = next((i for i in range(row, len(aug)) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = 1 / aug[row][col]
        aug[row] = [x * inv for x in aug[row]]
        for i in range(len(aug)):
            if i != row and aug[i][col]:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[row])]
        pivots.append(col)
        row += 1
    if any(aug[i][r] for i in range(row, len(aug))):
        return False, None
    coeffs = [Fraction(0)] * r
    for i, col in enumerate(pivots):
        coeffs[col] = aug[i][r]
    if any(c.denominator != 1 for c in coeffs):
        return False, None
    return True, [int(c) for c in coeffs]


def lattice_equal(gens1: Iterable[Sequence], gens2: Iterable[Sequence]) -> bool:
    g1 = [list(g) for g in gens1]
    g2 = [list(g) for g in gens2]
    if g1 and g2 and len(g1[0]) != len(g2[0]):
        raise ValueError("generators live in different dimensions")
    a, da = clear_denominators(g1)
    b, db = clear_denominators(g2)
    den = math.lcm(da, db)
    a = [[x * (den // da) for x in r] for r in a]
    b = [[x * (den // db) for x in r] for r in b]
    ncols = len((g1 or g2)[0])
    return hermite_normal_form(a, ncols)[0] == hermite_normal_form(b, ncols)[0]


def to_tsv(rows: Iterable[Sequence]) -> str:
    return "\n".join("\t".join(str(x) for x in r) for r in rows)
