"""Moments, the covariance of the increment vector and the asymptotic constant.

Two squared differences ``A_ij = (X_i - X_j)^2`` are uncorrelated when the
pairs are disjoint, have covariance ``C1`` when they share one index, and
variance ``C0``.  Everything about ``Cov(V)`` follows from these two numbers
(two ``ell x ell`` matrices for irrational supports) and the adjacency of the
line graph of ``K_n``.

The local limit prediction is ``p_d ~ C * d ** (-D/2)`` with ``D = ell (m-1)``
and ``C = vol / sqrt((2 pi)^D det)``.  ``C`` is stored exactly as
``sqrt(q) * pi ** (-D/2)`` with a rational ``q = vol^2 / (2^D det)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .distribution import DistributionSpec, Normalization, normalize
from .exact_arith import ReferenceFrame
from .lattice import bareiss_det
from .overlap import H_star_X, flatten, num_pairs, pairs, product_lattices, support_frame

Matrix = list[list[Fraction]]


class DegenerateDistributionError(ValueError):
    """Var(X) = 0: all vectors coincide and p_d = 1 for every d."""


class SingularCovarianceError(ValueError):
    pass


@dataclass(frozen=True)
class MomentSet:
    m1: Fraction
    m2: Fraction
    m3: Fraction
    m4: Fraction

    @property
    def var(self) -> Fraction:
        return self.m2 - self.m1**2

    @property
    def mu4(self) -> Fraction:
        m1, m2, m3, m4 = self.m1, self.m2, self.m3, self.m4
        return m4 - 4 * m3 * m1 + 6 * m2 * m1**2 - 3 * m1**4


def _rational_law(dist: DistributionSpec) -> list[tuple[Fraction, Fraction]]:
    dist = dist.trimmed()
    if not dist.is_rational:
        raise ValueError("moments need a rational support; use the matrix constants instead")
    return [(x.as_fraction(), p) for x, p in zip(dist.support, dist.probs)]


def moments(dist: DistributionSpec) -> MomentSet:
    law = _rational_law(dist)
    return MomentSet(*(sum(p * x**k for x, p in law) for k in range(1, 5)))


@dataclass(frozen=True)
class CovConstants:
    c0: Fraction
    c1: Fraction
    var: Fraction


def c_constants(dist: DistributionSpec) -> CovConstants:
    """Scalar ``C0 = Var(A12)`` and ``C1 = Cov(A12, A13)`` from raw moments."""
    mo = moments(dist)
    m1, m2, m3, m4 = mo.m1, mo.m2, mo.m3, mo.m4
    if mo.var == 0:
        raise DegenerateDistributionError("Var(X) = 0")
    c0 = 2 * m4 - 8 * m3 * m1 + 2 * m2**2 + 8 * m1**2 * m2 - 4 * m1**4
    c1 = m4 - 4 * m3 * m1 - m2**2 + 8 * m1**2 * m2 - 4 * m1**4
    assert c0 - 2 * c1 == 4 * mo.var**2
    assert c1 == mo.mu4 - mo.var**2 >= 0
    return CovConstants(c0, c1, mo.var)


def c_constants_by_enumeration(dist: DistributionSpec) -> CovConstants:
    """Same constants from the joint law of three independent copies."""
    law = _rational_law(dist)
    e_a = e_aa = e_ab = Fraction(0)
    for (x1, p1), (x2, p2), (x3, p3) in itertools.product(law, repeat=3):
        w = p1 * p2 * p3
        a, b = (x1 - x2) ** 2, (x1 - x3) ** 2
        e_a += w * a
        e_aa += w * a * a
        e_ab += w * a * b
    var = sum(p * x * x for x, p in law) - sum(p * x for x, p in law) ** 2
    return CovConstants(e_aa - e_a**2, e_ab - e_a**2, var)


# ---------------------------------------------------------------------------
# Matrix constants on a reference frame


def _frame_law(dist: DistributionSpec, frame: ReferenceFrame | None = None):
    # no rescaling: the covariance belongs to X as given
    dist = dist.trimmed()
    if frame is None:
        frame = support_frame(dist.support)
    return dist, frame


def _outer(u: Sequence[Fraction], v: Sequence[Fraction]) -> Matrix:
    return [[a * b for b in v] for a in u]


def _madd(a: Matrix, b: Matrix, s: Fraction | int = 1) -> Matrix:
    return [[x + s * y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _zeros(k: int) -> Matrix:
    return [[Fraction(0)] * k for _ in range(k)]


@dataclass(frozen=True)
class MatrixConstants:
    """``ell x ell`` constants in the coordinates of ``frame``."""

    c0: Matrix
    c1: Matrix
    centered_product_cov: Matrix  # Cov of (X1 - EX)(X2 - EX) in frame coordinates
    frame: ReferenceFrame

    @property
    def ell(self) -> int:
        return self.frame.dim


def matrix_constants(dist: DistributionSpec, frame: ReferenceFrame | None = None) -> MatrixConstants:
    dist, frame = _frame_law(dist, frame)
    if dist.is_degenerate():
        raise DegenerateDistributionError("Var(X) = 0")
    k = frame.dim
    law = list(zip(dist.support, dist.probs))
    mean = dist.mean()
    sq = {(x, y): frame.coords((x - y) * (x - y)) for x, _ in law for y, _ in law}
    e_a = [Fraction(0)] * k
    e_aa, e_ab = _zeros(k), _zeros(k)
    for (x1, p1), (x2, p2), (x3, p3) in itertools.product(law, repeat=3):
        w = p1 * p2 * p3
        a, b = sq[x1, x2], sq[x1, x3]
        e_a = [s + w * t for s, t in zip(e_a, a)]
        e_aa = _madd(e_aa, _outer(a, a), w)
        e_ab = _madd(e_ab, _outer(a, b), w)
    mm = _outer(e_a, e_a)
    c0, c1 = _madd(e_aa, mm, -1), _madd(e_ab, mm, -1)
    y_mean, y_sec = [Fraction(0)] * k, _zeros(k)
    for (x1, p1), (x2, p2) in itertools.product(law, repeat=2):
        y = frame.coords((x1 - mean) * (x2 - mean))
        y_mean = [s + p1 * p2 * t for s, t in zip(y_mean, y)]
        y_sec = _madd(y_sec, _outer(y, y), p1 * p2)
    ycov = _madd(y_sec, _outer(y_mean, y_mean), -1)
    return MatrixConstants(c0, c1, ycov, frame)


def is_positive_definite(a: Matrix) -> bool:
    """Symmetric positive definiteness via an exact LDL^T."""
    a = [list(r) for r in a]
    k = len(a)
    for i in range(k):
        if any(a[i][j] != a[j][i] for j in range(k)):
            return False
    for i in range(k):
        piv = a[i][i]
        if piv <= 0:
            return False
        for r in range(i + 1, k):
            f = a[r][i] / piv
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[i])]
    return True


# ---------------------------------------------------------------------------
# Covariance matrices of V


def _pair_structure(n: int):
    ps = pairs(n)
    ref = set(ps[0])
    rest = ps[1:]
    shares = lambda a, b: int(len(set(a) & set(b)) == 1)  # noqa: E731
    h12 = [shares(ref, a) for a in rest]
    return rest, h12, shares


def cov_matrix_V(dist: DistributionSpec, n: int) -> Matrix:
    """Exact ``(m-1) x (m-1)`` covariance of V for a rational support."""
    cc = c_constants(dist)
    rest, h12, shares = _pair_structure(n)
    c0, c1 = cc.c0, cc.c1
    return [
        [
            c0 * int(a == b) + c1 * shares(a, b) * int(a != b) - c1 * h12[i] - c1 * h12[j] + c0
            for j, b in enumerate(rest)
        ]
        for i, a in enumerate(rest)
    ]


def cov_matrix_V_general(dist: DistributionSpec, n: int, constants: MatrixConstants | None = None) -> Matrix:
    """Covariance of V in frame coordinates, flattened pair-major, size ``ell (m-1)``."""
    mc = constants or matrix_constants(dist)
    k = mc.ell
    rest, h12, shares = _pair_structure(n)
    size = k * len(rest)
    out = _zeros(size)
    for i, a in enumerate(rest):
        for j, b in enumerate(rest):
            s0 = int(a == b) + 1
            s1 = shares(a, b) * int(a != b) - h12[i] - h12[j]
            for r in range(k):
                for c in range(k):
                    out[i * k + r][j * k + c] = s0 * mc.c0[r][c] + s1 * mc.c1[r][c]
    return out


def cov_by_enumeration(dist: DistributionSpec, n: int, frame: ReferenceFrame | None = None) -> Matrix:
    """Covariance of V from the full law of ``n`` independent copies."""
    dist, frame = _frame_law(dist, frame)
    law = list(zip(dist.support, dist.probs))
    size = frame.dim * (num_pairs(n) - 1)
    mean = [Fraction(0)] * size
    second = _zeros(size)
    for combo in itertools.product(law, repeat=n):
        w = math.prod(p for _, p in combo)
        v = flatten(H_star_X([x for x, _ in combo], frame))
        mean = [s + w * t for s, t in zip(mean, v)]
        nz = [(i, t) for i, t in enumerate(v) if t]
        for i, a in nz:
            row = second[i]
            wa = w * a
            for j, b in nz:
                row[j] += wa * b
    return _madd(second, _outer(mean, mean), -1)


# ---------------------------------------------------------------------------
# Determinants


def structured_det(a, b, k: int):
    """Determinant of the ``k x k`` matrix with ``a`` on the diagonal and ``b`` elsewhere."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return (a + (k - 1) * b) * (a - b) ** (k - 1)


def det_cov_closed(n: int, c0, c1) -> Fraction:
    m = num_pairs(n)
    return Fraction(m) * Fraction(c0 - 2 * c1) ** (m - n) * Fraction(c0 + (n - 4) * c1) ** (n - 1)


def det_cov_general_closed(n: int, c0: Matrix, c1: Matrix) -> Fraction:
    if not is_positive_definite(c0):
        raise SingularCovarianceError("C0 is not positive definite")
    k = len(c0)
    m = num_pairs(n)
    d_minus = Fraction(bareiss_det(_madd(c0, c1, -2)))
    d_plus = Fraction(bareiss_det(_madd(c0, c1, n - 4)))
    return Fraction(m) ** k * d_minus ** (m - n) * d_plus ** (n - 1)


# ---------------------------------------------------------------------------
# Asymptotic constant


@dataclass(frozen=True)
class ExactConstant:
    """``sqrt(q) * pi ** pi_power``."""

    q: Fraction
    pi_power: Fraction

    @property
    def value(self) -> float:
        return math.sqrt(self.q) * math.pi ** float(self.pi_power)

    def __str__(self):
        return f"sqrt({self.q}) * pi^({self.pi_power})"

    def to_json(self) -> dict:
        return {"q": str(self.q), "pi_power": str(self.pi_power), "value": self.value}


def binary_q(n: int) -> Fraction:
    """``q`` for fair Bernoulli entries: ``2^(3m-2n-1) / m``."""
    m = num_pairs(n)
    return Fraction(2) ** (3 * m - 2 * n - 1) / m


def lattice_q(n: int, var, c1) -> Fraction:
    """``q`` for a gcd-1 integer support written with Var(X) and C1."""
    m = num_pairs(n)
    var, c1 = Fraction(var), Fraction(c1)
    return 1 / (m * Fraction(2) ** (m - 1) * var ** (2 * (m - n)) * (4 * var**2 + (n - 2) * c1) ** (n - 1))


def constant_from_parts(volume, det, dim: int) -> ExactConstant:
    return ExactConstant(Fraction(volume) ** 2 / (Fraction(2) ** dim * Fraction(det)), Fraction(-dim, 2))


def _matrix_json(a):
    if isinstance(a, list):
        return [[str(x) for x in r] for r in a]
    return str(a)


@dataclass(frozen=True)
class AsymptoticPrediction:
    n: int
    m: int
    ell: int
    method: str
    normalization: Normalization
    degenerate: bool = False
    exponent: Fraction | None = None
    lattice_volume: Fraction | None = None
    volume_x1: Fraction | None = None
    volume_x2: Fraction | None = None
    cov_det: Fraction | None = None
    c0: object = None
    c1: object = None
    constant: ExactConstant | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ratio(self) -> Fraction | None:
        if self.volume_x1 is None:
            return None
        return self.volume_x1 / self.volume_x2

    def predict(self, d: int) -> float:
        if self.degenerate:
            return 1.0
        return self.constant.value * d ** -float(self.exponent)

    def to_json(self) -> dict:
        if self.degenerate:
            return {
                "n": self.n,
                "m": self.m,
                "degenerate": True,
                "p_d": 1,
                "normalization": self.normalization.to_json(),
            }
        return {
            "n": self.n,
            "m": self.m,
            "ell": self.ell,
            "method": self.method,
            "degenerate": False,
            "exponent": str(self.exponent),
            "lattice_volume": str(self.lattice_volume),
            "volume_x1": str(self.volume_x1),
            "volume_x2": str(self.volume_x2),
            "ratio": str(self.ratio),
            "C0": _matrix_json(self.c0),
            "C1": _matrix_json(self.c1),
            "cov_det": str(self.cov_det),
            "constant": self.constant.to_json(),
            "normalization": self.normalization.to_json(),
            "notes": list(self.notes),
        }


def asymptotic_constant(dist: DistributionSpec, n: int, method: str = "auto") -> AsymptoticPrediction:
    """Exponent and constant of the local limit prediction for ``p_d``.

    ``method`` is ``"lattice"`` (rational supports, scalar constants),
    ``"general"`` (frame coordinates, matrix constants; any support) or
    ``"auto"`` (lattice when the support is rational).
    """
    if n < 3:
        raise ValueError("need n >= 3")
    if method not in ("auto", "lattice", "general"):
        raise ValueError(f"unknown method {method!r}")
    m = num_pairs(n)
    norm_dist, norm = normalize(dist)
    if norm_dist.is_degenerate():
        return AsymptoticPrediction(n, m, 0, "degenerate", norm, degenerate=True)
    if method == "auto":
        method = "lattice" if norm_dist.is_rational else "general"
    if method == "lattice" and not norm_dist.is_rational:
        raise ValueError("the lattice method needs a rational support")

    pl = product_lattices(norm_dist.support)
    v1, v2 = pl.lat_x1.fundamental_volume, pl.lat_x2.fundamental_volume
    volume = v1 ** (m - n) * v2 ** (n - 1)
    notes = []
    if method == "lattice":
        cc = c_constants(norm_dist)
        det = det_cov_closed(n, cc.c0, cc.c1)
        if volume != 2 ** (m - n):
            notes.append(f"lattice volume {volume} differs from 2^(m-n)")
        ell, c0, c1 = 1, cc.c0, cc.c1
    else:
        mc = matrix_constants(norm_dist, pl.frame)
        det = det_cov_general_closed(n, mc.c0, mc.c1)
        ell, c0, c1 = mc.ell, mc.c0, mc.c1
    dim = ell * (m - 1)
    return AsymptoticPrediction(
        n=n,
        m=m,
        ell=ell,
        method=method,
        normalization=norm,
        exponent=Fraction(dim, 2),
        lattice_volume=volume,
        volume_x1=v1,
        volume_x2=v2,
        cov_det=det,
        c0=c0,
        c1=c1,
        constant=constant_from_parts(volume, det, dim),
        notes=tuple(notes),
    )

