"""Decomposition of an optimal SA1 solution.

From an optimal point with common denominator ``m`` we build

* ``copies``: ``m`` disjoint copies of ``I`` with weights divided by ``m``;
* ``twisted``: the same copies, rewired constraint by constraint so that a
  single assignment reads the point off as an integral solution;

together with the uniform dual fractional homomorphism from ``I`` to the copies.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field

from .arith import INF, format_ext
from .errors import InternalError
from .maps import DUAL_FRACTIONAL_HOM, MapDistribution
from .model import (
    ValuedStructure,
    _require_instance,
    check_similar,
    instance,
    lcm_of_denominators,
    serialize_structure,
    val,
)
from .morph import verify_dual_frac_hom
from .relax import SA1, constraint_class_name, solve_relaxation
from .wl import equiv1


@dataclass
class Decomposition:
    m: int
    copies: ValuedStructure
    twisted: ValuedStructure
    assignment: tuple | None  # index tuple over the twisted universe
    permutations: dict  # (symbol, names) -> list of per-position tables [m] -> [m]
    witness: MapDistribution  # uniform over the copy embeddings
    columns: dict = field(default_factory=dict)  # variable name -> p_v as element names
    rows: dict = field(default_factory=dict)  # (symbol, names) -> list of a-tuples
    sa1_value: object = None
    feasible: bool = True
    target: tuple = ()  # universe of A, for naming h

    def to_json(self):
        def key(k):
            return constraint_class_name(*k)

        return {
            "m": self.m,
            "feasible": self.feasible,
            "sa1": format_ext(self.sa1_value),
            "permutations": {key(k): [list(p) for p in v] for k, v in sorted(self.permutations.items())},
            "h": None
            if self.assignment is None
            else {u: self.target[b] for u, b in zip(self.twisted.universe, self.assignment)},
            "p": {v: list(col) for v, col in self.columns.items()},
        }

    def sidecar(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    def files(self):
        """``{filename: text}`` for the two structures and the JSON sidecar."""
        return {
            "copies.vcsp": serialize_structure(self.copies),
            "twisted.vcsp": serialize_structure(self.twisted),
            "decomposition.json": self.sidecar(),
        }


def copy_name(k, v):
    return f"{k}:{v}"


def _copy_maps(n, m):
    return [tuple(k * n + v for v in range(n)) for k in range(m)]


def _trivial(I, A):
    ident = MapDistribution.point_mass(
        I.universe, I.universe, range(len(I.universe)), DUAL_FRACTIONAL_HOM
    )
    return Decomposition(
        1, I, I, None, {}, ident, sa1_value=INF, feasible=False, target=A.universe
    )


def _occurrence_matching(column, target):
    """Map position ``k`` of ``column`` to the matching occurrence in ``target``."""
    slots = {}
    for j, a in enumerate(target):
        slots.setdefault(a, []).append(j)
    used = Counter()
    out = []
    for a in column:
        out.append(slots[a][used[a]])
        used[a] += 1
    return tuple(out)


def decompose(I, A) -> Decomposition:
    _require_instance(I)
    check_similar(I, A)
    sol = solve_relaxation(I, A, SA1)
    if not sol.feasible:
        return _trivial(I, A)

    m = lcm_of_denominators(sol.point.values())
    n = len(I.universe)
    universe = [copy_name(k, v) for k in range(m) for v in I.universe]

    # p_v: elements in universe order, a repeated m * p_v(a) times
    p = []
    for v in I.universe:
        col = []
        for a_idx, a in enumerate(A.universe):
            col.extend([a_idx] * int(m * sol.var(v, a)))
        if len(col) != m:
            raise InternalError(f"marginals of {v} do not sum to one")
        p.append(tuple(col))

    copy_w = {r: {} for r in I.signature.names}
    twist_w = {r: {} for r in I.signature.names}
    perms, rows = {}, {}
    for r, scope, w in I.constraints():
        names = I.names(scope)
        cls = constraint_class_name(r, names)
        q = []
        for t in itertools.product(range(len(A.universe)), repeat=len(scope)):
            q.extend([t] * int(m * sol.con(cls, A.names(t))))
        if len(q) != m:
            raise InternalError(f"constraint {cls} has {len(q)} rows, expected {m}")
        tables = []
        for i, v in enumerate(scope):
            column = [row[i] for row in q]
            if Counter(column) != Counter(p[v]):
                raise InternalError(f"column {i + 1} of {cls} disagrees with its marginal")
            tables.append(_occurrence_matching(column, p[v]))
        for i, j in itertools.combinations(range(len(scope)), 2):
            if scope[i] == scope[j] and tables[i] != tables[j]:
                raise InternalError(f"repeated variable in {cls} got different permutations")
        share = w / m
        for k in range(m):
            for table, u in (
                (copy_w, tuple(k * n + v for v in scope)),
                (twist_w, tuple(tables[i][k] * n + v for i, v in enumerate(scope))),
            ):
                if u in table[r]:
                    raise InternalError(f"weight collision at {r}{u}")
                table[r][u] = share
        perms[(r, names)] = [list(x) for x in tables]
        rows[(r, names)] = [A.names(t) for t in q]

    base = I.name or "I"
    copies = instance(I.signature, universe, copy_w, name=f"copies({base})")
    twisted = instance(I.signature, universe, twist_w, name=f"twisted({base})")
    h = tuple(p[v][k] for k in range(m) for v in range(n))
    witness = MapDistribution.uniform(I.universe, universe, _copy_maps(n, m), DUAL_FRACTIONAL_HOM)
    return Decomposition(
        m,
        copies,
        twisted,
        h,
        perms,
        witness,
        {v: A.names(p[i]) for i, v in enumerate(I.universe)},
        rows,
        sol.value,
        target=A.universe,
    )


@dataclass
class DecompositionReport:
    dual_hom: bool
    equivalent: bool
    value_matches: bool
    value: object = None
    sa1_value: object = None

    @property
    def ok(self):
        return self.dual_hom and self.equivalent and self.value_matches

    @property
    def first_failure(self):
        for name, flag in (("a", self.dual_hom), ("b", self.equivalent), ("c", self.value_matches)):
            if not flag:
                return name
        return None

    def to_json(self):
        return {
            "ok": self.ok,
            "dual_frac_hom": self.dual_hom,
            "equiv1": self.equivalent,
            "value_matches": self.value_matches,
            "value": format_ext(self.value) if self.value is not None else None,
            "sa1": format_ext(self.sa1_value) if self.sa1_value is not None else None,
            "first_failure": self.first_failure,
        }


def verify_decomposition(I, A, d: Decomposition) -> DecompositionReport:
    """Check (a) ``I ->df copies``, (b) ``equiv1(copies, twisted)`` and (c) that the
assignment on ``twisted`` costs exactly ``Opt^SA1(I, A)``.

    The SA1 optimum is recomputed here rather than taken from ``d``.
    """
    sa1 = solve_relaxation(I, A, SA1).value
    a = verify_dual_frac_hom(I, d.copies, d.witness)
    b = equiv1(d.copies, d.twisted)
    if d.assignment is None:
        value = INF
        c = sa1 is INF
    else:
        value = val(d.twisted, A, d.assignment)
        c = value == sa1
    return DecompositionReport(a, b, c, value, sa1)
