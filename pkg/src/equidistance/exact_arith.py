"""Exact arithmetic over the rationals and sums of quadratic surds.

Every value handled here lives in a multiquadratic field Q(sqrt(t1), sqrt(t2), ...)
and is stored as a finite map ``radicand -> rational coefficient`` over
square-free radicands.  Square roots of distinct square-free integers are
linearly independent over Q, so this representation is canonical and equality
is decided exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

MAX_RADICAND = 10**6


class BasisIncompleteError(ValueError):
    """A value has a radical component outside the chosen Hamel basis."""


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, an integer string, an int or a Fraction.

    Floats are refused: they would silently inject rounding error.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise ValueError(f"not an exact rational: {value!r}")
        return Fraction(text)
    raise TypeError(f"cannot read {value!r} as an exact rational")


@lru_cache(maxsize=4096)
def square_free_decompose(n: int) -> tuple[int, int]:
    """Return ``(g, u)`` with ``n == g*g*u`` and ``u`` square-free."""
    if not isinstance(n, int) or n <= 0:
        raise ValueError(f"square_free_decompose needs a positive integer, got {n!r}")
    g, u = 1, 1
    rest = n
    p = 2
    while p * p <= rest:
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        if e:
            g *= p ** (e // 2)
            if e % 2:
                u *= p
        p += 1 if p == 2 else 2
    u *= rest
    return g, u


def _check_radicand(t: int) -> None:
    if t > MAX_RADICAND:
        raise ValueError(f"radicand {t} exceeds the supported bound {MAX_RADICAND}")


@dataclass(frozen=True)
class Surd:
    """The number ``coeff * sqrt(radicand)`` in canonical form."""

    coeff: Fraction
    radicand: int = 1

    def __post_init__(self):
        coeff = parse_rational(self.coeff)
        t = self.radicand
        if not isinstance(t, int) or t <= 0:
            raise ValueError(f"radicand must be a positive integer, got {t!r}")
        _check_radicand(t)
        g, u = square_free_decompose(t)
        coeff *= g
        if coeff == 0:
            u = 1
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "radicand", u)

    @property
    def is_rational(self) -> bool:
        return self.radicand == 1

    def __mul__(self, other):
        if isinstance(other, Surd):
            return surd_mul(self, other)
        if isinstance(other, (int, Fraction)):
            return Surd(self.coeff * other, self.radicand)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return Surd(-self.coeff, self.radicand)

    def __add__(self, other):
        return SurdSum.coerce(self) + other

    __radd__ = __add__

    def __sub__(self, other):
        return SurdSum.coerce(self) - other

    def __rsub__(self, other):
        return SurdSum.coerce(other) - SurdSum.coerce(self)

    def to_float(self) -> float:
        return float(self.coeff) * math.sqrt(self.radicand)

    def __str__(self):
        if self.radicand == 1:
            return str(self.coeff)
        return f"{self.coeff}*sqrt({self.radicand})"


def surd_mul(a: Surd, b: Surd) -> Surd:
    g, u = square_free_decompose(a.radicand * b.radicand)
    return Surd(a.coeff * b.coeff * g, u)


Number = Union["SurdSum", Surd, Fraction, int]


class SurdSum:
    """A finite sum of surds, i.e. an element of a multiquadratic field.

    Immutable and hashable.  Terms with zero coefficient are never stored.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, Fraction] | None = None):
        clean = {}
        for t, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                clean[t] = c
        self._terms = dict(sorted(clean.items()))
        self._hash = None

    @classmethod
    def coerce(cls, value: Number) -> "SurdSum":
        if isinstance(value, SurdSum):
            return value
        if isinstance(value, Surd):
            return cls({value.radicand: value.coeff})
        if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
            return cls({1: Fraction(value)})
        raise TypeError(f"cannot interpret {value!r} as a surd sum")

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    @property
    def radicands(self) -> tuple[int, ...]:
        return tuple(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return all(t == 1 for t in self._terms)

    def rational_part(self) -> Fraction:
        return self._terms.get(1, Fraction(0))

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return self.rational_part()

    def surds(self) -> list[Surd]:
        return [Surd(c, t) for t, c in self._terms.items()]

    def __add__(self, other):
        try:
            other = SurdSum.coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for t, c in other._terms.items():
            out[t] = out.get(t, 0) + c
        return SurdSum(out)

    __radd__ = __add__

    def __neg__(self):
        return SurdSum({t: -c for t, c in self._terms.items()})

    def __sub__(self, other):
        try:
            other = SurdSum.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return SurdSum.coerce(other) - self

    def __mul__(self, other):
        try:
            other = SurdSum.coerce(other)
        except TypeError:
            return NotImplemented
        out: dict[int, Fraction] = {}
        for s, a in self._terms.items():
            for t, b in other._terms.items():
                g, u = square_free_decompose(s * t)
                out[u] = out.get(u, 0) + a * b * g
        return SurdSum(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if other == 0:
                raise ZeroDivisionError("division of a surd sum by zero")
            return SurdSum({t: c / other for t, c in self._terms.items()})
        return NotImplemented

    def __eq__(self, other):
        try:
            other = SurdSum.coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def to_float(self) -> float:
        return math.fsum(float(c) * math.sqrt(t) for t, c in self._terms.items())

    def __repr__(self):
        return f"SurdSum({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for t, c in self._terms.items():
            parts.append(str(c) if t == 1 else f"{c}*sqrt({t})")
        return " + ".join(parts).replace("+ -", "- ")


def parse_number(value) -> SurdSum:
    """Read the JSON surd forms ``"p/q"``, ``7`` or ``{"s": "p/q", "t": 2}``.

    A list of such objects is read as their sum.
    """
    if isinstance(value, dict):
        unknown = set(value) - {"s", "t"}
        if unknown:
            raise ValueError(f"unexpected surd keys {sorted(unknown)}")
        t = value.get("t", 1)
        if isinstance(t, str):
            t = int(t)
        return SurdSum.coerce(Surd(parse_rational(value.get("s", 1)), t))
    if isinstance(value, list):
        total = SurdSum()
        for part in value:
            total = total + parse_number(part)
        return total
    return SurdSum.coerce(parse_rational(value))


def number_to_json(x: Number):
    """Inverse of :func:`parse_number` (a plain string when rational)."""
    x = SurdSum.coerce(x)
    if x.is_rational():
        return str(x.rational_part())
    out = [{"s": str(c), "t": t} for t, c in x.terms.items()]
    return out[0] if len(out) == 1 else out


@dataclass(frozen=True)
class HamelBasis:
    """Square roots of distinct square-free radicands, ascending, 1 first."""

    radicands: tuple[int, ...]

    def __post_init__(self):
        rads = tuple(self.radicands)
        if not rads or rads[0] != 1:
            raise ValueError("a Hamel basis must start with the rational direction 1")
        if len(set(rads)) != len(rads):
            raise ValueError("Hamel basis radicands must be distinct")
        for t in rads:
            if square_free_decompose(t)[1] != t:
                raise ValueError(f"radicand {t} is not square-free")
        object.__setattr__(self, "radicands", rads)

    def __len__(self):
        return len(self.radicands)

    def index(self, radicand: int) -> int:
        try:
            return self.radicands.index(radicand)
        except ValueError:
            raise BasisIncompleteError(
                f"sqrt({radicand}) is not in the basis {self.radicands}"
            ) from None


def build_hamel_basis(values: Iterable[Number]) -> HamelBasis:
    rads = {1}
    for v in values:
        rads.update(SurdSum.coerce(v).radicands)
    return HamelBasis(tuple(sorted(rads)))


def product_sets(support: Iterable[Number]) -> tuple[set[SurdSum], set[SurdSum]]:
    """Return ``(X1, X2)``: all ``2xy`` over the support, and those plus all ``x*x``."""
    xs = [SurdSum.coerce(x) for x in support]
    x1 = {2 * (x * y) for x in xs for y in xs}
    x2 = x1 | {x * x for x in xs}
    return x1, x2


@dataclass(frozen=True)
class QSpanVector:
    basis: HamelBasis
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        coords = tuple(Fraction(c) for c in self.coords)
        if len(coords) != len(self.basis):
            raise ValueError("coordinate count does not match the basis")
        object.__setattr__(self, "coords", coords)

    def _same_basis(self, other: "QSpanVector"):
        if other.basis != self.basis:
            raise ValueError("QSpan vectors over different bases")

    def __add__(self, other: "QSpanVector") -> "QSpanVector":
        self._same_basis(other)
        return QSpanVector(self.basis, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "QSpanVector") -> "QSpanVector":
        self._same_basis(other)
        return QSpanVector(self.basis, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __mul__(self, scalar) -> "QSpanVector":
        return QSpanVector(self.basis, tuple(scalar * a for a in self.coords))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)

    def to_surd_sum(self) -> SurdSum:
        return SurdSum(dict(zip(self.basis.radicands, self.coords)))


def to_qspan(x: Number, basis: HamelBasis) -> QSpanVector:
    coords = [Fraction(0)] * len(basis)
    for t, c in SurdSum.coerce(x).terms.items():
        coords[basis.index(t)] += c
    return QSpanVector(basis, tuple(coords))


@dataclass(frozen=True)
class ReferenceFrame:
    """Coordinates on the Q-span of a finite set of field elements.

    The span is row-reduced inside the radicand coordinates of ``hamel``; the
    coordinates of a span element are its entries at the pivot radicands.  When
    the set spans every radicand direction this is the identity embedding.
    """

    hamel: HamelBasis
    pivots: tuple[int, ...]
    rows: tuple[tuple[Fraction, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.pivots)

    @property
    def is_full(self) -> bool:
        return self.dim == len(self.hamel)

    def coords(self, x: Number) -> tuple[Fraction, ...]:
        full = to_qspan(x, self.hamel).coords
        c = tuple(full[p] for p in self.pivots)
        back = [Fraction(0)] * len(full)
        for ci, row in zip(c, self.rows):
            if ci:
                for j, r in enumerate(row):
                    back[j] += ci * r
        if tuple(back) != full:
            raise BasisIncompleteError(f"{x} is outside the span of the reference frame")
        return c


def reference_frame(values: Iterable[Number]) -> ReferenceFrame:
    values = [SurdSum.coerce(v) for v in values]
    hamel = build_hamel_basis(values)
    mat = [list(to_qspan(v, hamel).coords) for v in values]
    pivots = []
    rank = 0
    for col in range(len(hamel)):
        piv = next((i for i in range(rank, len(mat)) if mat[i][col] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = 1 / mat[rank][col]
        mat[rank] = [x * inv for x in mat[rank]]
        for i in range(len(mat)):
            if i != rank and mat[i][col]:
                f = mat[i][col]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[rank])]
        pivots.append(col)
        rank += 1
    if not pivots:
        # The zero space: keep the rational direction so coordinates are defined.
        return ReferenceFrame(hamel, (0,), ((Fraction(1),) + (Fraction(0),) * (len(hamel) - 1),))
    return ReferenceFrame(hamel, tuple(pivots), tuple(tuple(r) for r in mat[:rank]))
