"""Probability distributions over maps between finite universes."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .arith import format_ext, parse_ext
from .errors import MalformedDistribution

FRACTIONAL_HOM = "fractional-hom"
DUAL_FRACTIONAL_HOM = "dual-fractional-hom"


@dataclass(frozen=True)
class MapDistribution:
    """A finitely supported distribution over maps ``source -> target``.

    Each map is a tuple of target indices, one per source element (in
    source universe order).
    """

    source: tuple
    target: tuple
    support: tuple  # ((map_table, probability), ...)
    direction: str = FRACTIONAL_HOM
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        object.__setattr__(
            self, "support", tuple((tuple(f), Fraction(p)) for f, p in self.support)
        )
        self.validate()

    def validate(self):
        if not self.support:
            raise MalformedDistribution("empty support")
        n, t = len(self.source), len(self.target)
        total = Fraction(0)
        seen = set()
        for f, p in self.support:
            if p <= 0:
                raise MalformedDistribution(f"non-positive probability {p}")
            if len(f) != n:
                raise MalformedDistribution("map table is not total on the source universe")
            if any(not 0 <= b < t for b in f):
                raise MalformedDistribution("map table leaves the target universe")
            if f in seen:
                raise MalformedDistribution("map listed twice in the support")
            seen.add(f)
            total += p
        if total != 1:
            raise MalformedDistribution(f"probabilities sum to {total}, not 1")

    @classmethod
    def point_mass(cls, source, target, table, direction=FRACTIONAL_HOM):
        return cls(source, target, [(tuple(table), Fraction(1))], direction)

    @classmethod
    def uniform(cls, source, target, tables, direction=FRACTIONAL_HOM):
        tables = [tuple(t) for t in tables]
        p = Fraction(1, len(tables))
        return cls(source, target, [(t, p) for t in tables], direction)

    def named_support(self):
        """Support with maps spelled as ``{source name: target name}``."""
        return [
            ({self.source[i]: self.target[b] for i, b in enumerate(f)}, p)
            for f, p in self.support
        ]

    def to_json(self):
        return {
            "direction": self.direction,
            "source": list(self.source),
            "target": list(self.target),
            "support": [[table, format_ext(p)] for table, p in self.named_support()],
        }

    @classmethod
    def from_json(cls, data):
        source, target = data["source"], data["target"]
        sidx = {a: i for i, a in enumerate(source)}
        tidx = {b: i for i, b in enumerate(target)}
        support = []
        for table, p in data["support"]:
            f = [None] * len(source)
            for a, b in table.items():
                f[sidx[a]] = tidx[b]
            if None in f:
                raise MalformedDistribution("map table is not total on the source universe")
            support.append((tuple(f), parse_ext(p)))
        return cls(source, target, support, data.get("direction", FRACTIONAL_HOM))
