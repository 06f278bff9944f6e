"""Exact eigenstructure of the triangular graph L(K_n).

The adjacency matrix is indexed by pairs in the lexicographic order of
:mod:`equidistance.overlap`; two pairs are adjacent when they share exactly one
vertex.  Eigenvectors are exact rational vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .lattice import rank_over_q
from .overlap import num_pairs, overlap_H, pair_position, pairs

Vector = tuple[Fraction, ...]


def adjacency(n: int) -> list[list[int]]:
    if n < 3:
        raise ValueError("need n >= 3")
    ps = pairs(n)
    return [[int(len(set(a) & set(b)) == 1) for b in ps] for a in ps]


def incidence(n: int) -> list[list[int]]:
    """Vertex-by-edge incidence matrix of K_n."""
    return [[int(v in e) for e in pairs(n)] for v in range(1, n + 1)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a: Sequence[Sequence], v: Sequence) -> list:
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(c) for c in zip(*a)]


def star_vector(i: int, n: int) -> tuple[int, ...]:
    """``H_i``: indicator of the pairs containing vertex ``i``."""
    return overlap_H({i}, n)


def even_cycle_vector(cycle: Sequence[int], n: int) -> Vector:
    """Alternating +-1 vector along a closed walk of even length.

    ``cycle`` lists the vertices ``(i1, ..., i2k)``; the closing edge back to
    ``i1`` is implicit.  Vertices may repeat (spliced walks) but consecutive
    ones must differ.
    """
    k = len(cycle)
    if k < 4 or k % 2:
        raise ValueError(f"closed walk of length {k}: need an even length >= 4")
    v = [Fraction(0)] * num_pairs(n)
    for step in range(k):
        a, b = cycle[step], cycle[(step + 1) % k]
        if a == b:
            raise ValueError(f"repeated consecutive vertex {a}")
        v[pair_position(a, b, n)] += 1 if step % 2 == 0 else -1
    return tuple(v)


def even_cycle_walks(n: int) -> list[tuple[int, ...]]:
    """Closed even walks whose vectors span the (-2)-eigenspace.

    With the star spanning tree at vertex 1 every fundamental cycle is a
    triangle ``(1, i, j)``.  Each triangle other than ``(1, 2, 3)`` is spliced
    to that reference triangle through vertex 1, giving the walk
    ``1, 2, 3, 1, i, j``.  The non-tree edge ``{i, j}`` occurs only in its own
    walk, which makes the ``m - n`` vectors independent.
    """
    if n < 4:
        return []
    return [(1, 2, 3, 1, i, j) for i, j in pairs(n) if i >= 2 and (i, j) != (2, 3)]


def even_cycle_basis(n: int) -> list[Vector]:
    return [even_cycle_vector(w, n) for w in even_cycle_walks(n)]


def e12_adapted_basis(n: int) -> list[Vector]:
    """(-2)-eigenbasis holding the 4-cycle (1,2,3,4) first, the rest with no (1,2) entry."""
    if n < 4:
        return []
    first = even_cycle_vector((1, 2, 3, 4), n)
    out = [first]
    for w in even_cycle_basis(n):
        c = w[0] / first[0]
        cand = tuple(a - c * b for a, b in zip(w, first))
        if rank_over_q(out + [cand]) == len(out) + 1:
            out.append(cand)
    return out


@dataclass(frozen=True)
class EigenComponent:
    eigenvalue: int
    basis: tuple[Vector, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.basis)


def eigen_structure(n: int) -> list[EigenComponent]:
    """The three eigenspaces ``2n-4``, ``n-4`` and ``-2`` with exact bases.

    For ``n = 3`` the last one is empty and omitted.
    """
    m = num_pairs(n)
    ones = tuple(Fraction(1) for _ in range(m))
    comps = [EigenComponent(2 * n - 4, (ones,))]
    shifted = tuple(
        tuple(Fraction(h) - Fraction(2, n) for h in star_vector(i, n)) for i in range(2, n + 1)
    )
    comps.append(EigenComponent(n - 4, shifted))
    cycles = tuple(even_cycle_basis(n))
    if cycles:
        comps.append(EigenComponent(-2, cycles))
    return comps


@dataclass(frozen=True)
class SpectrumCheck:
    n: int
    eigen_equations: bool
    independent: bool
    multiplicity_sum: int
    incidence_identities: bool

    @property
    def ok(self) -> bool:
        return (
            self.eigen_equations
            and self.independent
            and self.multiplicity_sum == num_pairs(self.n)
            and self.incidence_identities
        )


def verify_spectrum(n: int, components: list[EigenComponent] | None = None) -> SpectrumCheck:
    comps = eigen_structure(n) if components is None else components
    a = adjacency(n)
    eig_ok = all(
        matvec(a, v) == [c.eigenvalue * x for x in v] for c in comps for v in c.basis
    )
    indep = rank_over_q([v for c in comps for v in c.basis]) == sum(c.multiplicity for c in comps)
    inc = incidence(n)
    m = num_pairs(n)
    mmt = matmul(inc, transpose(inc))
    mtm = matmul(transpose(inc), inc)
    # J_n + (n - 2) I_n
    kn_plus = [[1 + (n - 2) * int(i == j) for j in range(n)] for i in range(n)]
    h_plus = [[a[i][j] + 2 * int(i == j) for j in range(m)] for i in range(m)]
    return SpectrumCheck(
        n=n,
        eigen_equations=eig_ok,
        independent=indep,
        multiplicity_sum=sum(c.multiplicity for c in comps),
        incidence_identities=(mmt == kn_plus and mtm == h_plus),
    )
