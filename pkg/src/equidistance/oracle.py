"""Ground truth for p_d: sparse DP convolution, brute force and Monte Carlo.

``p_d`` is the probability that ``n`` random vectors in ``R^d`` with iid
entries are pairwise equidistant, i.e. that the ``d`` iid columns of the
increment vector sum to zero.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .covariance import DegenerateDistributionError, asymptotic_constant
from .distribution import DistributionSpec, normalize
from .lattice import clear_denominators
from .overlap import H_X, H_star_X, flatten, num_pairs, support_frame

DEFAULT_EXACT_BUDGET = 2_000_000
DEFAULT_FLOAT_BUDGET = 20_000_000
BRUTE_LIMIT = 2**24
AUTO_BRUTE_LIMIT = 2**12
DEFAULT_SHARD = 2**16


class BudgetExceeded(RuntimeError):
    """A computation would exceed its configured size budget."""


# ---------------------------------------------------------------------------
# Column law


@dataclass(frozen=True)
class ColumnLaw:
    """Exact law of one column of V on an integer lattice.

    ``atoms[v] = weights[v] / denominator``.  Coordinates are frame coordinates
    multiplied by ``scale`` so that every atom is an integer vector.
    """

    dimension: int
    ell: int
    weights: dict[tuple[int, ...], int]
    denominator: int
    scale: int

    @property
    def atoms(self) -> dict[tuple[int, ...], Fraction]:
        return {v: Fraction(w, self.denominator) for v, w in self.weights.items()}

    def max_abs(self) -> int:
        return max((abs(c) for v in self.weights for c in v), default=0)


def column_law(dist: DistributionSpec, n: int) -> ColumnLaw:
    if n < 2:
        raise ValueError("need n >= 2")
    norm, _ = normalize(dist)
    frame = support_frame(norm.support)
    law = list(zip(norm.support, norm.probs))
    # squared differences per value pair, computed once
    agg: dict[tuple, Fraction] = {}
    for combo in itertools.product(law, repeat=n):
        v = flatten(H_star_X([x for x, _ in combo], frame))
        p = math.prod(q for _, q in combo)
        agg[v] = agg.get(v, Fraction(0)) + p
    keys = list(agg)
    ints, scale = clear_denominators(keys) if keys[0] else ([list(k) for k in keys], 1)
    den = math.lcm(*(p.denominator for p in agg.values()))
    weights = {tuple(iv): int(agg[k] * den) for iv, k in zip(ints, keys)}
    return ColumnLaw(len(keys[0]), frame.dim, weights, den, scale)


# ---------------------------------------------------------------------------
# Sparse DP


class _Codec:
    """Balanced mixed-radix packing of bounded integer vectors into one int."""

    def __init__(self, dim: int, reach: int):
        self.dim = dim
        self.base = 2 * reach + 1
        self.reach = reach

    def encode(self, v: Sequence[int]) -> int:
        key = 0
        for c in reversed(v):
            key = key * self.base + c
        return key

    def decode(self, key: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.dim):
            r = key % self.base
            if r > self.reach:
                r -= self.base
            out.append(r)
            key = (key - r) // self.base
        return tuple(out)


@dataclass
class DPTable:
    """Law of the sum of ``step`` columns: ``counts[key] / denominator ** step``."""

    step: int
    counts: dict[int, int | float]
    denominator: int
    codec: _Codec

    def points(self) -> dict[tuple[int, ...], int | float]:
        return {self.codec.decode(k): c for k, c in self.counts.items()}

    def total(self):
        return sum(self.counts.values())


def _halves(ds: Iterable[int]) -> dict[int, tuple[int, int]]:
    return {d: (d // 2, d - d // 2) for d in ds}


def _run_dict_dp(law: ColumnLaw, targets: set[int], codec: _Codec, exact: bool, budget: int):
    shifts = [(codec.encode(v), w if exact else w / law.denominator) for v, w in law.weights.items()]
    table: dict[int, int | float] = {0: 1 if exact else 1.0}
    snaps = {}
    top = max(targets)
    if 0 in targets:
        snaps[0] = dict(table)
    for step in range(1, top + 1):
        nxt: dict[int, int | float] = {}
        get = nxt.get
        for s, w in shifts:
            for k, c in table.items():
                key = k + s
                nxt[key] = get(key, 0) + c * w
        table = nxt
        if len(table) > budget:
            return snaps, step
        if step in targets:
            snaps[step] = table
    return snaps, None


def _run_numpy_dp(law: ColumnLaw, targets: set[int], codec: _Codec, budget: int):
    shifts = np.array([codec.encode(v) for v in law.weights], dtype=np.int64)
    probs = np.array([w / law.denominator for w in law.weights.values()], dtype=np.float64)
    keys = np.zeros(1, dtype=np.int64)
    vals = np.ones(1, dtype=np.float64)
    snaps = {}
    top = max(targets)
    if 0 in targets:
        snaps[0] = {0: 1.0}
    for step in range(1, top + 1):
        allk = (keys[None, :] + shifts[:, None]).ravel()
        allv = (probs[:, None] * vals[None, :]).ravel()
        keys, inv = np.unique(allk, return_inverse=True)
        vals = np.bincount(inv.ravel(), weights=allv, minlength=len(keys))
        if len(keys) > budget:
            return snaps, step
        if step in targets:
            snaps[step] = dict(zip(keys.tolist(), vals.tolist()))
    return snaps, None


@dataclass(frozen=True)
class DPResult:
    values: dict[int, Fraction | float]
    refused: tuple[int, ...]
    refused_at_step: int | None


def dp_p_d(
    dist: DistributionSpec,
    n: int,
    ds: Iterable[int],
    mode: str = "exact",
    budget: int | None = None,
    law: ColumnLaw | None = None,
) -> DPResult:
    """``p_d`` for every ``d`` in ``ds`` by meet-in-the-middle convolution.

    The column law is convolved up to ``ceil(max d / 2)`` steps; ``p_d`` is
    ``sum_x P_a(x) P_b(-x)`` with ``a + b = d``.  Values whose half-tables did
    not fit in ``budget`` stored states are listed in ``refused``.
    """
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    ds = sorted(set(int(d) for d in ds))
    if not ds or ds[0] < 0:
        raise ValueError("d values must be >= 0")
    if budget is None:
        budget = DEFAULT_EXACT_BUDGET if mode == "exact" else DEFAULT_FLOAT_BUDGET
    law = law or column_law(dist, n)
    halves = _halves(ds)
    targets = {h for pair in halves.values() for h in pair}
    reach = max(1, max(targets) * max(1, law.max_abs()))
    codec = _Codec(law.dimension, reach)
    exact = mode == "exact"
    if not exact and codec.base ** law.dimension < 2**62:
        snaps, stop = _run_numpy_dp(law, targets, codec, budget)
    else:
        snaps, stop = _run_dict_dp(law, targets, codec, exact, budget)
    values, refused = {}, []
    for d, (a, b) in halves.items():
        if a not in snaps or b not in snaps:
            refused.append(d)
            continue
        pa, pb = snaps[a], snaps[b]
        if len(pa) > len(pb):
            pa, pb = pb, pa
        tot = sum(c * pb.get(-k, 0) for k, c in pa.items())
        values[d] = Fraction(tot, law.denominator**d) if exact else float(tot)
    return DPResult(values, tuple(refused), stop)


def dp_tables(dist: DistributionSpec, n: int, steps: int) -> list[DPTable]:
    """Every exact table up to ``steps`` (small inputs; used to check mass conservation)."""
    law = column_law(dist, n)
    codec = _Codec(law.dimension, max(1, steps * max(1, law.max_abs())))
    snaps, _ = _run_dict_dp(law, set(range(steps + 1)), codec, True, budget=10**9)
    return [DPTable(s, snaps[s], law.denominator, codec) for s in range(steps + 1)]


def exact_p_d(
    dist: DistributionSpec, n: int, d: int, mode: str = "exact", budget: int | None = None
) -> Fraction | float:
    res = dp_p_d(dist, n, [d], mode=mode, budget=budget)
    if d in res.refused:
        hint = "float mode or Monte Carlo" if mode == "exact" else "Monte Carlo"
        raise BudgetExceeded(
            f"DP state budget exceeded at step {res.refused_at_step} (d={d}); try {hint}"
        )
    return res.values[d]


# ---------------------------------------------------------------------------
# Brute force


def brute_p_d(dist: DistributionSpec, n: int, d: int, limit: int = BRUTE_LIMIT) -> Fraction:
    """Enumerate every ``n x d`` matrix over the support; exact surd arithmetic.

    Works on the raw support (no normalization, no coordinates): squared
    distances are accumulated as surd sums and compared for equality.
    """
    dist = dist.trimmed()
    k = len(dist.support)
    if k ** (n * d) > limit:
        raise BudgetExceeded(f"{k}^{n * d} configurations exceed the brute-force limit {limit}")
    law = list(zip(dist.support, dist.probs))
    cols = []
    for combo in itertools.product(law, repeat=n):
        xs = [x for x, _ in combo]
        sq = tuple((xs[i] - xs[j]) * (xs[i] - xs[j]) for i in range(n) for j in range(i + 1, n))
        cols.append((sq, math.prod(p for _, p in combo)))
    total = Fraction(0)

    def walk(depth: int, acc: tuple, w: Fraction):
        nonlocal total
        if depth == d:
            if all(a == acc[0] for a in acc[1:]):
                total += w
            return
        for sq, p in cols:
            walk(depth + 1, tuple(a + b for a, b in zip(acc, sq)), w * p)

    walk(0, tuple(sq * 0 for sq in cols[0][0]), Fraction(1))
    return total


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class MCResult:
    samples: int
    hits: int
    seed: int

    @property
    def estimate(self) -> float:
        return self.hits / self.samples

    @property
    def standard_error(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1 - p) / self.samples)

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "hits": self.hits,
            "estimate": self.estimate,
            "standard_error": self.standard_error,
            "seed": self.seed,
        }


def _distance_table(dist: DistributionSpec, n: int):
    """Column tuples, their float probabilities and integer squared distances."""
    norm, _ = normalize(dist)
    frame = support_frame(norm.support)
    law = list(zip(norm.support, norm.probs))
    tuples = list(itertools.product(law, repeat=n))
    rows = [flatten(H_X([x for x, _ in t], frame)) for t in tuples]
    ints, _ = clear_denominators(rows)
    probs = np.array([float(math.prod(p for _, p in t)) for t in tuples])
    uniform = len({math.prod(p for _, p in t) for t in tuples}) == 1
    sq = np.array(ints, dtype=np.int64).reshape(len(tuples), num_pairs(n), frame.dim)
    return sq, probs / probs.sum(), uniform


def _shard_hits(sq: np.ndarray, probs: np.ndarray, uniform: bool, d: int, size: int, seed: int, shard: int) -> int:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(shard,))))
    k = len(probs)
    if uniform:
        idx = rng.integers(0, k, size=(size, d))
    else:
        idx = rng.choice(k, size=(size, d), p=probs)
    # total squared distance per sample, pair and frame coordinate
    ok = np.ones(size, dtype=bool)
    ref = sq[idx, 0, :].sum(axis=1)
    for pair in range(1, sq.shape[1]):
        ok &= (sq[idx, pair, :].sum(axis=1) == ref).all(axis=1)
    return int(ok.sum())


def mc_estimate(
    dist: DistributionSpec,
    n: int,
    d: int,
    samples: int,
    seed: int,
    workers: int = 1,
    shard_size: int = DEFAULT_SHARD,
) -> MCResult:
    """Seeded estimate of ``p_d``; identical for any ``workers``.

    Samples are split into fixed shards, each with its own Philox stream keyed
    by ``(seed, shard index)``.  Equidistance is tested on exact integer
    coordinates of the squared distances.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if d < 0:
        raise ValueError("d must be >= 0")
    if d == 0:
        return MCResult(samples, samples, seed)
    sq, probs, uniform = _distance_table(dist, n)
    if np.abs(sq).max() * d >= 2**62:
        raise BudgetExceeded("squared distances overflow 64-bit accumulation")
    sizes = [shard_size] * (samples // shard_size)
    if samples % shard_size:
        sizes.append(samples % shard_size)
    jobs = [(s, size) for s, size in enumerate(sizes)]

    def run(job):
        return _shard_hits(sq, probs, uniform, d, job[1], seed, job[0])

    if workers <= 1:
        hits = sum(map(run, jobs))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(run, jobs))
    return MCResult(samples, hits, seed)


# ---------------------------------------------------------------------------
# Convergence table


@dataclass(frozen=True)
class TableRow:
    d: int
    p: Fraction | float | None
    method: str
    scaled: float | None
    ratio: float | None
    standard_error: float | None = None
    note: str = ""


def convergence_table(
    dist: DistributionSpec,
    n: int,
    d_list: Iterable[int],
    samples: int = 0,
    seed: int = 0,
    workers: int = 1,
    exact_budget: int = DEFAULT_EXACT_BUDGET,
    float_budget: int = DEFAULT_FLOAT_BUDGET,
    modes: Sequence[str] = ("brute", "exact", "float", "mc"),
) -> list[TableRow]:
    """``p_d`` against the prediction ``C d^(-exponent)``, method chosen per ``d``.

    Order of preference: brute force (tiny), exact DP, float DP, Monte Carlo
    (only when ``samples > 0``).  A ``d`` nothing can reach gets a row with
    ``p = None`` and a note.
    """
    pred = asymptotic_constant(dist, n)
    if pred.degenerate:
        raise DegenerateDistributionError("Var(X) = 0: p_d = 1 for every d, no table")
    ds = sorted(set(int(d) for d in d_list))
    k = len(dist.trimmed().support)
    got: dict[int, tuple] = {}
    left = list(ds)
    if "brute" in modes:
        for d in list(left):
            if k ** (n * d) <= AUTO_BRUTE_LIMIT:
                got[d] = (brute_p_d(dist, n, d), "brute", None)
                left.remove(d)
    law = column_law(dist, n) if left and ("exact" in modes or "float" in modes) else None
    for mode, budget in (("exact", exact_budget), ("float", float_budget)):
        if left and mode in modes:
            res = dp_p_d(dist, n, left, mode=mode, budget=budget, law=law)
            for d, v in res.values.items():
                got[d] = (v, f"{mode}-dp", None)
            left = list(res.refused)
    if left and "mc" in modes and samples > 0:
        for d in left:
            r = mc_estimate(dist, n, d, samples, seed, workers)
            got[d] = (r.estimate, "mc", r.standard_error)
        left = []
    rows = []
    c = pred.constant.value
    expo = float(pred.exponent)
    for d in ds:
        if d not in got:
            rows.append(TableRow(d, None, "none", None, None, note="refused: over every budget"))
            continue
        p, method, se = got[d]
        scaled = float(p) * d**expo if d > 0 else None
        ratio = scaled / c if scaled is not None else None
        rows.append(TableRow(d, p, method, scaled, ratio, se))
    return rows
