"""Valued structures, instances, the brute-force optimum, and structure generators.

A :class:`ValuedStructure` stores each valued relation sparsely: explicit
tuples plus an optional per-symbol default.  Tuples are kept as tuples of
element *indices* into the universe; element names are strings.
"""

from __future__ import annotations

import itertools
import math
import re
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .arith import INF, Ext, format_ext, parse_ext, to_ext
from .errors import (
    ArityMismatch,
    BudgetExceeded,
    Disconnected,
    InvalidParameter,
    ParseError,
    RoleViolation,
    SignatureMismatch,
    TooSmall,
    UnknownSymbol,
)
from .maps import DUAL_FRACTIONAL_HOM, MapDistribution

TEMPLATE = "template"
INSTANCE = "instance"

DEFAULT_OPT_BUDGET = 10**7


class Signature:
    """Ordered collection of relation symbols with arities."""

    __slots__ = ("symbols", "_arity")

    def __init__(self, symbols):
        if isinstance(symbols, Signature):
            symbols = symbols.symbols
        elif isinstance(symbols, Mapping):
            symbols = list(symbols.items())
        pairs = tuple((str(r), int(k)) for r, k in symbols)
        arity = {}
        for r, k in pairs:
            if r in arity:
                raise InvalidParameter(f"duplicate relation symbol {r!r}")
            if k < 1:
                raise InvalidParameter(f"arity of {r!r} must be at least 1")
            arity[r] = k
        self.symbols = pairs
        self._arity = arity

    def arity(self, symbol):
        try:
            return self._arity[symbol]
        except KeyError:
            raise UnknownSymbol(f"unknown relation symbol {symbol!r}") from None

    @property
    def names(self):
        return [r for r, _ in self.symbols]

    def __contains__(self, symbol):
        return symbol in self._arity

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __eq__(self, other):
        return isinstance(other, Signature) and self._arity == other._arity

    def __hash__(self):
        return hash(frozenset(self._arity.items()))

    def __repr__(self):
        return f"Signature({list(self.symbols)!r})"


class Constraint(NamedTuple):
    symbol: str
    scope: tuple  # variable indices
    weight: Fraction


class ValuedStructure:
    """Finite universe plus one total valued relation per symbol.

    ``relations`` maps each symbol to ``{tuple: value}``; tuples may be given
    by element name or by index.  ``defaults`` gives the value of tuples not
    listed.  Instances default to 0; templates must be total or carry a
    default.
    """

    def __init__(
        self,
        signature,
        universe,
        relations=None,
        *,
        role=TEMPLATE,
        defaults=None,
        name=None,
        threshold=None,
    ):
        if role not in (TEMPLATE, INSTANCE):
            raise InvalidParameter(f"unknown role {role!r}")
        self.signature = Signature(signature)
        self.universe = tuple(str(a) for a in universe)
        if len(set(self.universe)) != len(self.universe):
            raise InvalidParameter("universe elements must be distinct")
        self.index = {a: i for i, a in enumerate(self.universe)}
        self.role = role
        self.name = name
        relations = relations or {}
        defaults = dict(defaults or {})
        for r in list(relations) + list(defaults):
            self.signature.arity(r)

        self._tables = {}
        self._defaults = {}
        n = len(self.universe)
        for r, k in self.signature:
            table = {}
            for tup, value in dict(relations.get(r, {})).items():
                if isinstance(tup, (str, int)):
                    tup = (tup,)
                if len(tup) != k:
                    raise ArityMismatch(f"{r} has arity {k}, got tuple {tup!r}")
                table[self._to_index(tup)] = to_ext(value)
            if r in defaults:
                default = to_ext(defaults[r])
            elif role == INSTANCE:
                default = Fraction(0)
            else:
                default = None
                if len(table) != n**k:
                    raise InvalidParameter(
                        f"template relation {r} is not total and has no default"
                    )
            self._tables[r] = table
            self._defaults[r] = default

        if threshold is not None:
            if role != INSTANCE:
                raise InvalidParameter("only instances carry a threshold")
            threshold = to_ext(threshold)
            if threshold is INF:
                raise InvalidParameter("threshold must be finite")
        self.threshold = threshold
        if role == INSTANCE:
            self._check_instance()

    def _to_index(self, tup):
        out = []
        for a in tup:
            if isinstance(a, int) and not isinstance(a, bool):
                if not 0 <= a < len(self.universe):
                    raise InvalidParameter(f"element index {a} out of range")
                out.append(a)
            else:
                try:
                    out.append(self.index[str(a)])
                except KeyError:
                    raise InvalidParameter(f"unknown element {a!r}") from None
        return tuple(out)

    def _check_instance(self):
        for r in self._tables:
            values = list(self._tables[r].values()) + [self._defaults[r]]
            for v in values:
                if v is INF or v < 0:
                    raise RoleViolation(
                        f"instance weights must be finite and non-negative, got {format_ext(v)} in {r}"
                    )

    # -- access ---------------------------------------------------------

    @property
    def is_instance(self):
        return self.role == INSTANCE

    def __len__(self):
        return len(self.universe)

    def arity(self, symbol):
        return self.signature.arity(symbol)

    def value(self, symbol, tup) -> Ext:
        """Value of ``symbol`` at a tuple of element indices."""
        table = self._tables[symbol]
        v = table.get(tup)
        if v is None:
            v = self._defaults[symbol]
            if v is None:
                raise KeyError((symbol, tup))
        return v

    def value_of(self, symbol, names) -> Ext:
        return self.value(symbol, self._to_index(names))

    def default(self, symbol):
        return self._defaults[symbol]

    def explicit(self, symbol):
        """Explicitly stored ``(tuple, value)`` pairs, in lexicographic index order."""
        return sorted(self._tables[symbol].items())

    def tuples(self, symbol):
        return itertools.product(range(len(self.universe)), repeat=self.arity(symbol))

    def table(self, symbol):
        """Fully materialized ``{tuple: value}``."""
        return {t: self.value(symbol, t) for t in self.tuples(symbol)}

    def names(self, tup):
        return tuple(self.universe[i] for i in tup)

    def constraints(self):
        """Positive-weight tuples of an instance, ordered by symbol then tuple."""
        if not self.is_instance:
            raise RoleViolation("constraints are defined for instances only")
        out = []
        for r, _ in self.signature:
            if self._defaults[r] > 0:
                items = [(t, self.value(r, t)) for t in self.tuples(r)]
            else:
                items = self.explicit(r)
            out.extend(Constraint(r, t, w) for t, w in items if w > 0)
        return out

    # -- derived structures ---------------------------------------------

    def with_threshold(self, threshold):
        return self._rebuild(threshold=threshold)

    def renamed(self, name):
        return self._rebuild(name=name)

    def scaled(self, factor):
        """Instance with every weight multiplied by a non-negative rational."""
        factor = to_ext(factor)
        rel = {r: {t: factor * v for t, v in self._tables[r].items()} for r in self._tables}
        dfl = {r: factor * d for r, d in self._defaults.items()}
        return ValuedStructure(
            self.signature, self.universe, rel, role=self.role, defaults=dfl, name=self.name
        )

    def _rebuild(self, **changes):
        kw = dict(
            role=self.role,
            defaults={r: d for r, d in self._defaults.items() if d is not None},
            name=self.name,
            threshold=self.threshold,
        )
        kw.update(changes)
        return ValuedStructure(self.signature, self.universe, self._tables, **kw)

    def __eq__(self, other):
        if not isinstance(other, ValuedStructure):
            return NotImplemented
        if (
            self.signature != other.signature
            or self.universe != other.universe
            or self.role != other.role
            or self.threshold != other.threshold
        ):
            return False
        return all(self._normal(r) == other._normal(r) for r in self._tables)

    def _normal(self, r):
        d = self._defaults[r]
        if d is None:
            return (None, dict(self._tables[r]))
        return (d, {t: v for t, v in self._tables[r].items() if v != d})

    __hash__ = None

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<ValuedStructure {self.role}{label} |U|={len(self.universe)} {self.signature.names}>"


def template(signature, universe, relations, *, defaults=None, name=None):
    return ValuedStructure(signature, universe, relations, role=TEMPLATE, defaults=defaults, name=name)


def instance(signature, universe, weights=None, *, threshold=None, name=None):
    return ValuedStructure(
        signature, universe, weights or {}, role=INSTANCE, threshold=threshold, name=name
    )


def check_similar(a, b):
    if a.signature != b.signature:
        raise SignatureMismatch(f"{a.signature} vs {b.signature}")


def _require_instance(I):
    if not I.is_instance:
        raise RoleViolation("expected an instance (non-negative finite-valued structure)")


def constraints(I):
    _require_instance(I)
    return I.constraints()


# -- value and optimum -----------------------------------------------------


def _as_assignment(I, A, h):
    if isinstance(h, Mapping):
        return tuple(A.index[str(h[v])] for v in I.universe)
    h = tuple(h)
    if len(h) != len(I.universe):
        raise InvalidParameter("assignment is not total")
    return h


def val(I, A, h) -> Ext:
    """Weighted cost of the assignment ``h`` (index tuple or name mapping)."""
    _require_instance(I)
    check_similar(I, A)
    h = _as_assignment(I, A, h)
    total = Fraction(0)
    for r, scope, w in I.constraints():
        total = total + w * A.value(r, tuple(h[v] for v in scope))
    return total


def opt(I, A, budget=DEFAULT_OPT_BUDGET):
    """Exact minimum of :func:`val` by exhaustive enumeration.

    Returns ``(value, witness)`` where the witness is the lexicographically
    least minimizing index tuple.
    """
    _require_instance(I)
    check_similar(I, A)
    n, d = len(I.universe), len(A.universe)
    count = d**n
    if count > budget:
        raise BudgetExceeded(f"{count} assignments exceed the budget of {budget}")
    cons = I.constraints()
    if not cons:
        return Fraction(0), tuple([0] * n) if d else ()
    if d == 0:
        raise InvalidParameter("empty template universe admits no assignment")
    tables = {r: A.table(r) for r in {c.symbol for c in cons}}
    best, witness = None, None
    for h in itertools.product(range(d), repeat=n):
        total = Fraction(0)
        for r, scope, w in cons:
            total = total + w * tables[r][tuple(h[v] for v in scope)]
            if total is INF:
                break
        if best is None or total < best:
            best, witness = total, h
    return best, witness


def opt_value(I, A, budget=DEFAULT_OPT_BUDGET) -> Ext:
    return opt(I, A, budget)[0]


# -- connectivity ----------------------------------------------------------


def components(I):
    """Connected components of the factor graph, as sorted lists of variable indices."""
    parent = list(range(len(I.universe)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in I.constraints():
        first = find(c.scope[0])
        for v in c.scope[1:]:
            rv = find(v)
            if rv != first:
                parent[rv] = first
    groups = {}
    for v in range(len(I.universe)):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values())


def is_connected(I):
    return len(components(I)) <= 1


def substructure(I, variables, name=None):
    """Induced sub-instance on the given variable indices (constraints fully inside)."""
    keep = sorted(variables)
    pos = {v: i for i, v in enumerate(keep)}
    rel = {r: {} for r in I.signature.names}
    for r, scope, w in I.constraints():
        if all(v in pos for v in scope):
            rel[r][tuple(pos[v] for v in scope)] = w
    return instance(I.signature, [I.universe[v] for v in keep], rel, name=name)


def disjoint_union(*parts, name=None):
    """Disjoint union of similar instances; element ``a`` of part ``i`` becomes ``i:a``."""
    sig = parts[0].signature
    universe, rel = [], {r: {} for r in sig.names}
    for i, P in enumerate(parts):
        check_similar(parts[0], P)
        offset = len(universe)
        universe.extend(f"{i}:{a}" for a in P.universe)
        for r, scope, w in P.constraints():
            rel[r][tuple(offset + v for v in scope)] = w
    return instance(sig, universe, rel, name=name)


# -- generators ------------------------------------------------------------


@dataclass(frozen=True)
class CrispStructure:
    """Ordinary relational structure: each symbol names a set of tuples."""

    signature: Signature
    universe: tuple
    relations: dict

    def __post_init__(self):
        object.__setattr__(self, "signature", Signature(self.signature))
        object.__setattr__(self, "universe", tuple(str(a) for a in self.universe))
        rels = {}
        for r, k in self.signature:
            tuples = set()
            for t in self.relations.get(r, ()):
                t = (t,) if isinstance(t, str) else tuple(str(a) for a in t)
                if len(t) != k:
                    raise ArityMismatch(f"{r} has arity {k}, got {t!r}")
                if any(a not in self.universe for a in t):
                    raise InvalidParameter(f"tuple {t!r} leaves the universe")
                tuples.add(t)
            rels[r] = frozenset(tuples)
        object.__setattr__(self, "relations", rels)

    @classmethod
    def from_zero_inf(cls, S):
        """Read a {0, inf}-valued template: zero-cost tuples are the members."""
        rels = {}
        for r, _ in S.signature:
            members = []
            for t, v in S.table(r).items():
                if v == 0:
                    members.append(S.names(t))
                elif v is not INF:
                    raise InvalidParameter("crisp structures must be {0, inf}-valued")
            rels[r] = members
        return cls(S.signature, S.universe, rels)

    def count(self):
        return sum(len(t) for t in self.relations.values())


def _check_unit_interval(x, what):
    x = to_ext(x)
    if x is INF or not 0 < x <= 1:
        raise InvalidParameter(f"{what} must lie in (0, 1], got {format_ext(x)}")
    return x


def maxcsp_encode(A: CrispStructure, c):
    """Templates ``(A', B')`` modelling a ``c``-approximation of MaxCSP(A)."""
    c = _check_unit_interval(c, "approximation ratio c")
    rel_a, rel_b = {}, {}
    for r, _ in A.signature:
        rel_a[r] = {t: Fraction(-1) for t in A.relations[r]}
        rel_b[r] = {t: Fraction(-1) / c for t in A.relations[r]}
    zeros = {r: 0 for r in A.signature.names}
    a2 = template(A.signature, A.universe, rel_a, defaults=zeros, name="maxcsp-low")
    b2 = template(A.signature, A.universe, rel_b, defaults=zeros, name="maxcsp-high")
    return a2, b2


def maxcsp_instance(I: CrispStructure, share):
    """0-1 valued instance with threshold ``-share * m`` (``m`` constraints)."""
    share = _check_unit_interval(share, "share")
    rel = {r: {t: 1 for t in I.relations[r]} for r in I.signature.names}
    m = I.count()
    return instance(I.signature, I.universe, rel, threshold=-share * m, name="maxcsp")


@dataclass(frozen=True)
class Twist:
    """Output of :func:`k_fold_twist`.

    ``scaled`` carries the equality-solution weights; ``twisted`` is
    ``scaled`` multiplied by ``2k``.  ``embedding`` is a dual fractional
    homomorphism ``I -> scaled`` and ``projection`` one ``scaled -> I``.
    """

    k: int
    twisted: ValuedStructure
    scaled: ValuedStructure
    embedding: MapDistribution
    projection: MapDistribution


def k_fold_twist(I, k, order=None):
    """Connected ``2k``-fold cover of ``I`` on the universe ``{0..k-1} x I``.

    The 2k maps are ``f_j(v_i) = (j, v_i)`` and ``g_j(v_i) = ((i + j) mod k, v_i)``
    where ``i`` is the position of ``v_i`` in ``order`` (default: universe order).
    Different orders give different, generally non-isomorphic, results.
    """
    _require_instance(I)
    if not isinstance(k, int) or k < 1:
        raise InvalidParameter("k must be a positive integer")
    n = len(I.universe)
    if n < 2:
        raise TooSmall("the twist needs at least two variables")
    if not is_connected(I):
        raise Disconnected("the twist is defined for connected instances")
    if order is None:
        rank = list(range(n))
    else:
        order = [I.index[str(v)] if not isinstance(v, int) else v for v in order]
        if sorted(order) != list(range(n)):
            raise InvalidParameter("order must be a permutation of the universe")
        rank = [0] * n
        for i, v in enumerate(order):
            rank[v] = i

    universe = [f"{j}:{v}" for j in range(k) for v in I.universe]
    if len(set(universe)) != len(universe):
        raise InvalidParameter("element names collide in the twisted universe")

    def elem(j, v):
        return j * n + v

    maps = [tuple(elem(j, v) for v in range(n)) for j in range(k)]
    maps += [tuple(elem((rank[v] + j) % k, v) for v in range(n)) for j in range(k)]

    acc = {r: {} for r in I.signature.names}
    for r, scope, w in I.constraints():
        for f in maps:
            u = tuple(f[v] for v in scope)
            acc[r][u] = acc[r].get(u, Fraction(0)) + w
    twisted = instance(I.signature, universe, acc, name=f"{I.name or 'I'}-twist{k}")
    scaled = twisted.scaled(Fraction(1, 2 * k)).renamed(f"{I.name or 'I'}'^({k})")

    # as distributions: duplicates (possible when k == 1) are merged
    weights = {}
    for f in maps:
        weights[f] = weights.get(f, Fraction(0)) + Fraction(1, 2 * k)
    embedding = MapDistribution(
        I.universe, universe, list(weights.items()), DUAL_FRACTIONAL_HOM
    )
    projection = MapDistribution.point_mass(
        universe, I.universe, [u % n for u in range(k * n)], DUAL_FRACTIONAL_HOM
    )
    return Twist(k, twisted, scaled, embedding, projection)


# -- file format -----------------------------------------------------------

_TUPLE_RE = re.compile(r"^(\S+)\s*\(([^()]*)\)\s*(\S+)$")


def _parse_value(tok, lineno):
    try:
        return parse_ext(tok)
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None


def parse_structure(text: str) -> ValuedStructure:
    """Parse the line-oriented structure format (see ``docs/format.md``)."""
    symbols = []
    section = None
    role = name = None
    universe = None
    relations = {}
    defaults = {}
    threshold = None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0]
        if head == "signature" and len(words) == 1:
            if section is not None:
                raise ParseError("signature must come first", lineno)
            section = "signature"
            continue
        if head in (TEMPLATE, INSTANCE) and len(words) <= 2:
            if section != "signature":
                raise ParseError(f"'{head}' before signature or repeated", lineno)
            section, role = "body", head
            name = words[1] if len(words) == 2 else None
            continue
        if section == "signature":
            if len(words) != 2:
                raise ParseError(f"expected '<symbol> <arity>', got {line!r}", lineno)
            try:
                symbols.append((words[0], int(words[1])))
            except ValueError:
                raise ParseError(f"bad arity in {line!r}", lineno) from None
            continue
        if section != "body":
            raise ParseError(f"unexpected line {line!r}", lineno)

        sig = dict(symbols)
        if head == "universe":
            if universe is not None:
                raise ParseError("universe given twice", lineno)
            universe = words[1:]
            if len(set(universe)) != len(universe):
                raise ParseError("repeated universe element", lineno)
            continue
        if head == "default":
            if len(words) != 3:
                raise ParseError("expected 'default <symbol> <value>'", lineno)
            if words[1] not in sig:
                raise UnknownSymbol(f"unknown symbol {words[1]!r}", lineno)
            defaults[words[1]] = _parse_value(words[2], lineno)
            continue
        if head == "threshold":
            if role != INSTANCE:
                raise ParseError("threshold is only allowed in instances", lineno)
            if len(words) != 2:
                raise ParseError("expected 'threshold <value>'", lineno)
            threshold = _parse_value(words[1], lineno)
            if threshold is INF:
                raise ParseError("threshold must be finite", lineno)
            continue
        m = _TUPLE_RE.match(line)
        if not m:
            raise ParseError(f"cannot parse {line!r}", lineno)
        r, body, value = m.groups()
        if r not in sig:
            raise UnknownSymbol(f"unknown symbol {r!r}", lineno)
        if universe is None:
            raise ParseError("tuple before universe", lineno)
        elems = [e.strip() for e in body.split(",")] if body.strip() else []
        if len(elems) != sig[r]:
            raise ArityMismatch(f"{r} has arity {sig[r]}, got {len(elems)} entries", lineno)
        for e in elems:
            if e not in universe:
                raise ParseError(f"unknown element {e!r}", lineno)
        table = relations.setdefault(r, {})
        key = tuple(elems)
        if key in table:
            raise ParseError(f"tuple {r}({body}) given twice", lineno)
        table[key] = _parse_value(value, lineno)

    if role is None:
        raise ParseError("missing 'template' or 'instance' section")
    if universe is None:
        raise ParseError("missing universe")
    try:
        return ValuedStructure(
            symbols,
            universe,
            relations,
            role=role,
            defaults=defaults,
            name=name,
            threshold=threshold,
        )
    except RoleViolation:
        raise
    except InvalidParameter as exc:
        raise ParseError(str(exc)) from None


def serialize_structure(S: ValuedStructure) -> str:
    """Canonical text form; ``parse_structure`` inverts it exactly."""
    lines = ["signature"]
    lines += [f"  {r} {k}" for r, k in S.signature]
    lines.append(f"{S.role} {S.name}" if S.name else S.role)
    lines.append("  universe " + " ".join(S.universe))
    for r, _ in S.signature:
        d = S.default(r)
        for t, v in S.explicit(r):
            if d is not None and v == d:
                continue
            lines.append(f"  {r} ({','.join(S.names(t))}) {format_ext(v)}")
        if d is not None and not (S.is_instance and d == 0):
            lines.append(f"  default {r} {format_ext(d)}")
    if S.threshold is not None:
        lines.append(f"  threshold {format_ext(S.threshold)}")
    return "\n".join(lines) + "\n"


def load_structure(path) -> ValuedStructure:
    with open(path, encoding="utf-8") as fh:
        return parse_structure(fh.read())


def save_structure(S, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_structure(S))


def lcm_of_denominators(values):
    m = 1
    for v in values:
        m = math.lcm(m, Fraction(v).denominator)
    return m
