"""Fractional and dual fractional homomorphisms, and the multiset power structure.

``frac_hom`` either finds a fractional homomorphism ``A -> B`` or turns the
Farkas certificate of the infeasible system into a separating instance on the
universe of ``A`` whose optimum over ``B`` exceeds its optimum over ``A``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .arith import INF
from .errors import BudgetExceeded, InternalError, InvalidParameter, MalformedDistribution
from .lpcore import EQ, LE, LinearProgram, Optimal, solve_lp, verify_certificate
from .maps import DUAL_FRACTIONAL_HOM, FRACTIONAL_HOM, MapDistribution
from .model import (
    DEFAULT_OPT_BUDGET,
    ValuedStructure,
    _require_instance,
    check_similar,
    instance,
    lcm_of_denominators,
    opt_value,
    template,
)
from .relax import BLP, solve_relaxation

DEFAULT_MAP_BUDGET = 2**20
DEFAULT_POWER_BUDGET = 20
DEFAULT_ARRANGEMENT_BUDGET = 10**6


@dataclass(frozen=True)
class Counterexample:
    """Instance separating two templates: ``opt_target > opt_source``."""

    instance: ValuedStructure
    opt_source: object
    opt_target: object
    certificate: tuple = ()
    perturbed: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def gap(self):
        return self.opt_target > self.opt_source


def _map_count(n_target, n_source, budget):
    count = n_target**n_source
    if count > budget:
        raise BudgetExceeded(f"{count} maps exceed the budget of {budget}")
    return count


def _apply(f, t):
    return tuple(f[a] for a in t)


def _identity_table(A, B):
    if all(a in B.index for a in A.universe):
        return tuple(B.index[a] for a in A.universe)
    return None


def verify_frac_hom(A, B, dist: MapDistribution) -> bool:
    """Exact check of ``sum_f dist(f) R^B(f(a)) <= R^A(a)`` for every symbol and tuple."""
    check_similar(A, B)
    if len(dist.source) != len(A.universe) or len(dist.target) != len(B.universe):
        raise MalformedDistribution("distribution does not map A into B")
    for r, _ in A.signature:
        for t in A.tuples(r):
            lhs = Fraction(0)
            for f, p in dist.support:
                lhs = lhs + p * B.value(r, _apply(f, t))
                if lhs is INF:
                    break
            if not lhs <= A.value(r, t):
                return False
    return True


def frac_hom(A, B, budget=DEFAULT_MAP_BUDGET, opt_budget=DEFAULT_OPT_BUDGET):
    """Fractional homomorphism ``A -> B`` or a verified :class:`Counterexample`."""
    check_similar(A, B)
    nA, nB = len(A.universe), len(B.universe)
    _map_count(nB, nA, budget)

    ident = _identity_table(A, B)
    if ident is not None:
        dist = MapDistribution.point_mass(A.universe, B.universe, ident, FRACTIONAL_HOM)
        if verify_frac_hom(A, B, dist):
            return dist

    finite_rows = [
        (r, t, A.value(r, t))
        for r, _ in A.signature
        for t in A.tuples(r)
        if A.value(r, t) is not INF
    ]

    def admissible(f):
        return all(B.value(r, _apply(f, t)) is not INF for r, t, _ in finite_rows)

    maps = [f for f in itertools.product(range(nB), repeat=nA) if admissible(f)]

    lp = LinearProgram()
    names = [lp.add_variable(f"w[{i}]") for i in range(len(maps))]
    for r, t, cost in finite_rows:
        lp.add_row(
            {names[j]: B.value(r, _apply(f, t)) for j, f in enumerate(maps)},
            LE,
            cost,
            name=f"{r}{A.names(t)}",
        )
    lp.add_row({n: 1 for n in names}, EQ, 1, name="total")
    out = solve_lp(lp)

    if isinstance(out, Optimal):
        support = [(maps[j], out.point[n]) for j, n in enumerate(names) if out.point[n] > 0]
        dist = MapDistribution(A.universe, B.universe, support, FRACTIONAL_HOM)
        if not verify_frac_hom(A, B, dist):
            raise InternalError("solver returned a distribution that fails verification")
        return dist

    cert = out.certificate
    if not verify_certificate(lp, cert):
        raise InternalError("solver returned an invalid Farkas certificate")
    return _extract_counterexample(A, B, finite_rows, cert, opt_budget)


def _extract_counterexample(A, B, finite_rows, cert, opt_budget):
    weights = {r: {} for r in A.signature.names}
    for (r, t, _), mult in zip(finite_rows, cert):
        if mult:
            weights[r][t] = mult
    star = instance(A.signature, A.universe, weights, name="separator")

    # Maps outside the admissible set are only excluded if the instance puts
    # weight on a tuple they send to infinity; otherwise add a small uniform
    # weight on every finite tuple, small enough to keep the admissible gap.
    perturbed = False
    nA, nB = len(A.universe), len(B.universe)
    cons = star.constraints()
    for f in itertools.product(range(nB), repeat=nA):
        if any(B.value(r, _apply(f, s)) is INF for r, s, _ in cons):
            continue
        if all(B.value(r, _apply(f, t)) is not INF for r, t, _ in finite_rows):
            continue
        perturbed = True
        break
    if perturbed:
        base = sum((c for _, _, c in finite_rows), Fraction(0))
        spread = Fraction(0)
        for f in itertools.product(range(nB), repeat=nA):
            vals = [B.value(r, _apply(f, t)) for r, t, _ in finite_rows]
            if INF in vals:
                continue
            spread = max(spread, base - sum(vals, Fraction(0)))
        gap = -sum((mult * c for (_, _, c), mult in zip(finite_rows, cert)), Fraction(0))
        gap -= cert[-1]  # multiplier of the normalisation row
        bump = gap / (spread + 1)
        for r, t, _ in finite_rows:
            weights[r][t] = weights[r].get(t, Fraction(0)) + bump
        star = instance(A.signature, A.universe, weights, name="separator")

    oa = opt_value(star, A, opt_budget)
    ob = opt_value(star, B, opt_budget)
    if not ob > oa:
        raise InternalError("extracted instance does not separate the templates")
    return Counterexample(star, oa, ob, tuple(cert), perturbed)


# -- dual fractional homomorphisms -----------------------------------------


def _pushforward(I, f):
    """``{(symbol, u): sum of R^I(v) over v with f(v) = u}``."""
    out = {}
    for r, scope, w in I.constraints():
        key = (r, _apply(f, scope))
        out[key] = out.get(key, Fraction(0)) + w
    return out


def verify_dual_frac_hom(I, J, dist: MapDistribution) -> bool:
    """Exact check of ``R^J(u) >= sum_f dist(f) sum_{f(v)=u} R^I(v)``."""
    _require_instance(I)
    _require_instance(J)
    check_similar(I, J)
    if len(dist.source) != len(I.universe) or len(dist.target) != len(J.universe):
        raise MalformedDistribution("distribution does not map I into J")
    total = {}
    for f, p in dist.support:
        for key, w in _pushforward(I, f).items():
            total[key] = total.get(key, Fraction(0)) + p * w
    return all(J.value(r, u) >= s for (r, u), s in total.items())


def dual_frac_hom(I, J, budget=DEFAULT_MAP_BUDGET):
    """Dual fractional homomorphism ``I -> J`` found by LP, or ``None``."""
    _require_instance(I)
    _require_instance(J)
    check_similar(I, J)
    _map_count(len(J.universe), len(I.universe), budget)
    maps = list(itertools.product(range(len(J.universe)), repeat=len(I.universe)))
    lp = LinearProgram()
    names = [lp.add_variable(f"w[{i}]") for i in range(len(maps))]
    rows = {}
    for j, f in enumerate(maps):
        for key, w in _pushforward(I, f).items():
            rows.setdefault(key, {})[names[j]] = w
    for (r, u), coeffs in sorted(rows.items()):
        lp.add_row(coeffs, LE, J.value(r, u))
    lp.add_row({n: 1 for n in names}, EQ, 1)
    out = solve_lp(lp)
    if not isinstance(out, Optimal):
        return None
    support = [(maps[j], out.point[n]) for j, n in enumerate(names) if out.point[n] > 0]
    dist = MapDistribution(I.universe, J.universe, support, DUAL_FRACTIONAL_HOM)
    if not verify_dual_frac_hom(I, J, dist):
        raise InternalError("solver returned a distribution that fails verification")
    return dist


# -- power structure -------------------------------------------------------


@dataclass(frozen=True)
class PowerStructure:
    structure: ValuedStructure
    m: int
    base: ValuedStructure
    multisets: tuple  # sorted index tuples, aligned with the universe

    def multiset_of(self, elem_index):
        return self.multisets[elem_index]

    def index_of(self, multiset):
        return self.multisets.index(tuple(sorted(multiset)))


def _arrangements(s):
    return sorted(set(itertools.permutations(s)))


def power_lp(A, m, budget=DEFAULT_POWER_BUDGET, arrangement_budget=DEFAULT_ARRANGEMENT_BUDGET):
    """Structure on size-``m`` multisets of ``A``.

    ``R(s_1..s_r)`` is ``1/m`` times the least total cost over ways of lining
    up the multisets column by column.
    """
    if m < 1:
        raise InvalidParameter("m must be positive")
    n = len(A.universe)
    size = math.comb(n + m - 1, m)
    if size > budget:
        raise BudgetExceeded(f"power universe of {size} elements exceeds the budget of {budget}")
    multisets = list(itertools.combinations_with_replacement(range(n), m))
    names = ["+".join(A.universe[a] for a in s) for s in multisets]
    arr = {s: _arrangements(s) for s in multisets}
    relations = {}
    work = 0
    for r, k in A.signature:
        table = {}
        for combo in itertools.product(range(len(multisets)), repeat=k):
            first = multisets[combo[0]]
            rest = [arr[multisets[c]] for c in combo[1:]]
            best = None
            for tail in itertools.product(*rest):
                work += 1
                if work > arrangement_budget:
                    raise BudgetExceeded("arrangement search exceeds its budget")
                total = Fraction(0)
                for i in range(m):
                    total = total + A.value(r, (first[i],) + tuple(t[i] for t in tail))
                    if total is INF:
                        break
                if best is None or total < best:
                    best = total
            table[combo] = best / m
        relations[r] = table
    S = template(A.signature, names, relations, name=f"power{m}({A.name or 'A'})")
    return PowerStructure(S, m, A, tuple(multisets))


def expand_operation(power: PowerStructure, table):
    """The ``m``-ary operation ``A^m -> B`` induced by a map on multisets."""
    n = len(power.base.universe)
    pos = {s: i for i, s in enumerate(power.multisets)}
    return {
        args: table[pos[tuple(sorted(args))]]
        for args in itertools.product(range(n), repeat=power.m)
    }


def sym_frac_polymorphism(A, B, m, budget=DEFAULT_MAP_BUDGET, power_budget=DEFAULT_POWER_BUDGET):
    """``m``-ary symmetric fractional polymorphism of ``(A, B)``, or a counterexample.

    The distribution returned maps the multiset universe of the power structure to
    ``B``; :func:`expand_operation` spells out each support map as an
    operation on ``A^m``.  A counterexample additionally records
    its BLP optimum over ``A`` in ``meta['opt_blp']``.
    """
    check_similar(A, B)
    P = power_lp(A, m, power_budget)
    out = frac_hom(P.structure, B, budget)
    if isinstance(out, MapDistribution):
        out.meta["m"] = m
        return out
    blp = solve_relaxation(out.instance, A, BLP).value
    out.meta.update(m=m, opt_blp=blp)
    if not (out.opt_target > out.opt_source >= blp):
        raise InternalError("counterexample violates Opt(target) > Opt(power) >= Opt^BLP")
    return out


@dataclass
class PowerReport:
    opt_blp: object
    m_star: int | None
    opt_power: dict  # m -> Opt(I, power_lp(A, m))
    status: str  # "ok", "skipped", "infeasible", "failed"

    @property
    def consistent(self):
        return self.status in ("ok", "infeasible")


def blp_power_consistency(I, A, power_budget=DEFAULT_POWER_BUDGET, opt_budget=DEFAULT_OPT_BUDGET):
    """Check ``Opt^BLP(I,A) = Opt(I, power_lp(A, m_star))`` and the lower bound for smaller ``m``.

    ``m_star`` is the least common denominator of the optimal BLP point.
    """
    sol = solve_relaxation(I, A, BLP)
    if not sol.feasible:
        try:
            value = opt_value(I, power_lp(A, 1, power_budget).structure, opt_budget)
        except BudgetExceeded:
            return PowerReport(INF, None, {}, "skipped")
        return PowerReport(INF, None, {1: value}, "infeasible" if value is INF else "failed")
    m_star = lcm_of_denominators(sol.point.values())
    values = {}
    for m in range(1, m_star + 1):
        try:
            values[m] = opt_value(I, power_lp(A, m, power_budget).structure, opt_budget)
        except BudgetExceeded:
            if m == m_star:
                return PowerReport(sol.value, m_star, values, "skipped")
            continue
    ok = values[m_star] == sol.value and all(v >= sol.value for v in values.values())
    return PowerReport(sol.value, m_star, values, "ok" if ok else "failed")
