"""Finite distributions with exact (rational or surd) support."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .exact_arith import Number, SurdSum, number_to_json, parse_number, parse_rational


class DistributionSpecError(ValueError):
    """Invalid distribution input; ``field`` points at the offending entry."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


@dataclass(frozen=True)
class DistributionSpec:
    support: tuple[SurdSum, ...]
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        support = tuple(SurdSum.coerce(x) for x in self.support)
        probs = tuple(Fraction(p) for p in self.probs)
        if not support:
            raise DistributionSpecError("support is empty", "support")
        if len(probs) != len(support):
            raise DistributionSpecError(
                f"{len(probs)} probabilities for {len(support)} support values", "probs"
            )
        seen = {}
        for i, x in enumerate(support):
            if x in seen:
                raise DistributionSpecError(
                    f"value {x} repeats support[{seen[x]}]", f"support[{i}]"
                )
            seen[x] = i
        for i, p in enumerate(probs):
            if p < 0:
                raise DistributionSpecError("negative probability", f"probs[{i}]")
        if sum(probs) != 1:
            raise DistributionSpecError(f"probabilities sum to {sum(probs)}, not 1", "probs")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, support: Iterable[Number]) -> "DistributionSpec":
        support = tuple(support)
        return cls(support, (Fraction(1, len(support)),) * len(support))

    @classmethod
    def bernoulli(cls, p=Fraction(1, 2)) -> "DistributionSpec":
        p = Fraction(p)
        return cls((0, 1), (1 - p, p))

    @classmethod
    def from_json(cls, obj) -> "DistributionSpec":
        if not isinstance(obj, dict):
            raise DistributionSpecError("expected a JSON object")
        if "support" not in obj:
            raise DistributionSpecError("missing", "support")
        raw = obj["support"]
        if not isinstance(raw, list) or not raw:
            raise DistributionSpecError("must be a non-empty list", "support")
        support = []
        for i, v in enumerate(raw):
            try:
                support.append(parse_number(v))
            except (ValueError, TypeError, ZeroDivisionError) as exc:
                raise DistributionSpecError(str(exc), f"support[{i}]") from None
        if obj.get("probs") is None:
            return cls.uniform(support)
        raw_p = obj["probs"]
        if not isinstance(raw_p, list):
            raise DistributionSpecError("must be a list", "probs")
        probs = []
        for i, v in enumerate(raw_p):
            try:
                probs.append(parse_rational(v))
            except (ValueError, TypeError, ZeroDivisionError) as exc:
                raise DistributionSpecError(str(exc), f"probs[{i}]") from None
        return cls(tuple(support), tuple(probs))

    @classmethod
    def load(cls, path: str | Path) -> "DistributionSpec":
        try:
            obj = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise DistributionSpecError(f"invalid JSON ({exc})") from None
        return cls.from_json(obj)

    def to_json(self) -> dict:
        return {
            "support": [number_to_json(x) for x in self.support],
            "probs": [str(p) for p in self.probs],
        }

    def trimmed(self) -> "DistributionSpec":
        """Drop zero-probability atoms; the support proper."""
        if all(self.probs):
            return self
        keep = [(x, p) for x, p in zip(self.support, self.probs) if p]
        return DistributionSpec(tuple(x for x, _ in keep), tuple(p for _, p in keep))

    @property
    def is_rational(self) -> bool:
        return all(x.is_rational() for x in self.support)

    def mean(self) -> SurdSum:
        return sum((p * x for x, p in zip(self.support, self.probs)), SurdSum())

    def is_degenerate(self) -> bool:
        return len(self.trimmed().support) == 1

    def map(self, f) -> "DistributionSpec":
        return DistributionSpec(tuple(f(x) for x in self.support), self.probs)


@dataclass(frozen=True)
class Normalization:
    """The affine map ``x -> (x - shift) * scale`` applied to the support."""

    shift: SurdSum
    scale: Fraction

    def apply(self, x: Number) -> SurdSum:
        return (SurdSum.coerce(x) - self.shift) * self.scale

    def to_json(self) -> dict:
        return {"shift": number_to_json(self.shift), "scale": str(self.scale)}


def _min_by_value(values: Sequence[SurdSum]) -> SurdSum:
    return min(values, key=lambda x: x.to_float())


def normalize(dist: DistributionSpec) -> tuple[DistributionSpec, Normalization]:
    """Translate (and for rational supports, rescale) so the support contains 0.

    Rational supports become integers with gcd 1 and minimum 0.  Irrational
    supports are only translated, by the smallest support value, unless they
    already contain 0.  Equidistance is invariant under both operations.
    """
    dist = dist.trimmed()
    if dist.is_rational:
        values = [x.as_fraction() for x in dist.support]
        low = min(values)
        diffs = [v - low for v in values]
        den = 1
        for v in diffs:
            den = math.lcm(den, v.denominator)
        g = math.gcd(*(int(v * den) for v in diffs)) or 1
        norm = Normalization(SurdSum.coerce(low), Fraction(den, g))
    elif any(x.is_zero() for x in dist.support):
        norm = Normalization(SurdSum(), Fraction(1))
    else:
        norm = Normalization(_min_by_value(dist.support), Fraction(1))
    return dist.map(norm.apply), norm
