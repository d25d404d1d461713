"""BLP, SA1 and the class-reduced SA1 program, plus the LP decision rule.

Programs are assembled from *fragments*: a variable contributes its
normalisation row, a constraint contributes its marginal rows and objective
summand.  Tuples with infinite template cost, and (for SA1) tuples that
disagree on repeated variables, never get an LP variable; they are recorded
in ``fixed_zero`` instead.  The distributed simulator builds the reduced
program from the very same fragment functions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .arith import INF, format_ext, to_ext
from .errors import InternalError, InvalidParameter
from .lpcore import EQ, LinearProgram, Optimal, Unbounded, solve_lp
from .model import _require_instance, check_similar, opt_value
from .wl import color_classes

BLP = "blp"
SA1 = "sa1"
SA1_REDUCED = "sa1-reduced"
ORACLE = "oracle"


class Verdict(str, Enum):
    YES = "Yes"
    NO = "No"

    def __str__(self):
        return self.value


# -- fragments -------------------------------------------------------------


def var_name(cls, a):
    return f"p[{cls}]({a})"


def con_name(cls, atuple):
    return f"p[{cls}]({','.join(atuple)})"


def _row_key(coeffs, rel, rhs):
    items = tuple(sorted(coeffs.items()))
    return (items, rel, rhs)


def row_text(row):
    items, rel, rhs = row
    body = " ".join(f"{format_ext(c)}*{v}" for v, c in items)
    return f"{body} {rel} {format_ext(rhs)}"


@dataclass(frozen=True)
class Fragment:
    """LP pieces contributed by one factor-graph vertex."""

    variables: tuple  # LP variable names
    rows: tuple  # canonical rows ((var, coeff), ...), rel, rhs)
    objective: tuple  # ((var, coeff), ...) before class multiplicity
    fixed_zero: tuple = ()
    cls: str | None = None  # constraint class the objective belongs to


def variable_fragment(cls, A):
    names = tuple(var_name(cls, a) for a in A.universe)
    row = _row_key({v: Fraction(1) for v in names}, EQ, Fraction(1))
    return Fragment(names, (row,), ())


def constraint_fragment(cls, symbol, weight, groups, A, flavor):
    """Fragment of constraint class ``cls`` with label ``(symbol, weight)``.

    ``groups`` lists ``(S, variable class)`` with ``S`` the 1-based positions
    occupied by one variable; under SA1 tuples must agree inside each ``S``.
    """
    r = A.arity(symbol)
    live, dead = [], []
    for t in itertools.product(range(len(A.universe)), repeat=r):
        cost = A.value(symbol, t)
        ok = cost is not INF
        if ok and flavor != BLP:
            ok = all(len({t[i - 1] for i in s}) == 1 for s, _ in groups)
        (live if ok else dead).append(t)
    name = {t: con_name(cls, A.names(t)) for t in live}
    rows = []
    for s, vcls in groups:
        for i in sorted(s):
            for a_idx, a in enumerate(A.universe):
                coeffs = {var_name(vcls, a): Fraction(1)}
                for t in live:
                    if t[i - 1] == a_idx:
                        coeffs[name[t]] = coeffs.get(name[t], Fraction(0)) - 1
                rows.append(_row_key(coeffs, EQ, Fraction(0)))
    objective = tuple(
        (name[t], weight * A.value(symbol, t)) for t in live if weight * A.value(symbol, t) != 0
    )
    fixed = tuple(con_name(cls, A.names(t)) for t in dead)
    return Fragment(tuple(name[t] for t in live), tuple(rows), objective, fixed, cls)


def assemble(fragments, multiplicity=None):
    """Deterministic LP from fragments: sorted variables, deduplicated sorted rows.

    ``multiplicity`` maps a constraint class to its objective coefficient
    (default 1); one summand per class is used.
    """
    variables, rows, fixed = set(), set(), set()
    summands = {}
    for f in fragments:
        variables.update(f.variables)
        rows.update(f.rows)
        fixed.update(f.fixed_zero)
        if f.cls is not None:
            prev = summands.setdefault(f.cls, f.objective)
            if prev != f.objective:
                raise InternalError(f"class {f.cls} has inconsistent objective summands")
    lp = LinearProgram()
    for v in sorted(variables):
        lp.add_variable(v)
    for items, rel, rhs in sorted(rows, key=row_text):
        lp.add_row(items, rel, rhs)
    objective = {}
    for cls in sorted(summands):
        k = 1 if multiplicity is None else multiplicity[cls]
        for v, c in summands[cls]:
            objective[v] = objective.get(v, Fraction(0)) + k * c
    lp.set_objective(objective)
    return lp, fixed


# -- programs --------------------------------------------------------------


@dataclass
class RelaxationProgram:
    lp: LinearProgram
    flavor: str
    var_index: dict  # (variable class, a) -> LP name
    con_index: dict  # (constraint class, a-tuple) -> LP name
    fixed_zero: set
    var_class: dict = field(default_factory=dict)  # element name -> class
    con_class: dict = field(default_factory=dict)  # (symbol, names) -> class
    k: dict = field(default_factory=dict)  # constraint class -> multiplicity

    @property
    def n_variables(self):
        return len(self.var_index) + len(self.con_index)

    def rows_text(self):
        return [row_text(_row_key(r.as_dict(), r.rel, r.rhs)) for r in self.lp.rows]

    def to_json(self):
        return {
            "flavor": self.flavor,
            "variables": list(self.lp.variables),
            "fixed_zero": sorted(self.fixed_zero),
            "objective": {v: format_ext(c) for v, c in self.lp.objective.items()},
            "rows": self.rows_text(),
            "k": {c: n for c, n in sorted(self.k.items())},
        }


def constraint_class_name(symbol, names):
    return f"{symbol}({','.join(names)})"


def _groups(scope):
    pos = {}
    for i, v in enumerate(scope, 1):
        pos.setdefault(v, []).append(i)
    return [(frozenset(p), v) for v, p in pos.items()]


def _indexes(fragments_meta, A):
    var_index, con_index = {}, {}
    for kind, cls, symbol in fragments_meta:
        if kind == "var":
            for a in A.universe:
                var_index[(cls, a)] = var_name(cls, a)
        else:
            for t in itertools.product(A.universe, repeat=A.arity(symbol)):
                con_index[(cls, t)] = con_name(cls, t)
    return var_index, con_index


def build_relaxation(I, A, flavor=SA1) -> RelaxationProgram:
    """BLP(I, A) or SA1(I, A) with one class per variable and per constraint."""
    if flavor not in (BLP, SA1):
        raise InvalidParameter(f"unknown flavour {flavor!r}")
    _require_instance(I)
    check_similar(I, A)
    fragments, meta = [], []
    for v in I.universe:
        fragments.append(variable_fragment(v, A))
        meta.append(("var", v, None))
    con_class = {}
    for r, scope, w in I.constraints():
        cls = constraint_class_name(r, I.names(scope))
        con_class[(r, I.names(scope))] = cls
        groups = [(s, I.universe[v]) for s, v in _groups(scope)]
        fragments.append(constraint_fragment(cls, r, w, groups, A, flavor))
        meta.append(("con", cls, r))
    lp, fixed = assemble(fragments)
    var_index, con_index = _indexes(meta, A)
    return RelaxationProgram(
        lp,
        flavor,
        var_index,
        con_index,
        fixed,
        {v: v for v in I.universe},
        con_class,
        {c: 1 for c in con_class.values()},
    )


def reduced_classes(I):
    """Class names for variables and constraints from the stabilised colouring."""
    G, P = color_classes(I)
    var_class, con_class, k = {}, {}, {}
    for x, key in enumerate(G.keys):
        enc = P.encoding(x)
        if G.is_variable(x):
            var_class[key[1]] = enc
        else:
            con_class[(key[1], key[2])] = enc
            k[enc] = k.get(enc, 0) + 1
    return var_class, con_class, k


def build_reduced(I, A) -> RelaxationProgram:
    """SA1 with one LP variable block per iterated-degree class, objective scaled by class sizes."""
    _require_instance(I)
    check_similar(I, A)
    var_class, con_class, k = reduced_classes(I)
    fragments, meta, seen = [], [], set()
    for v in I.universe:
        fragments.append(variable_fragment(var_class[v], A))
        if var_class[v] not in seen:
            seen.add(var_class[v])
            meta.append(("var", var_class[v], None))
    for r, scope, w in I.constraints():
        cls = con_class[(r, I.names(scope))]
        groups = [(s, var_class[I.universe[v]]) for s, v in _groups(scope)]
        fragments.append(constraint_fragment(cls, r, w, groups, A, SA1))
        if cls not in seen:
            seen.add(cls)
            meta.append(("con", cls, r))
    lp, fixed = assemble(fragments, k)
    var_index, con_index = _indexes(meta, A)
    return RelaxationProgram(lp, SA1_REDUCED, var_index, con_index, fixed, var_class, con_class, k)


def build(I, A, flavor):
    if flavor == SA1_REDUCED:
        return build_reduced(I, A)
    return build_relaxation(I, A, flavor)


@dataclass
class RelaxationSolution:
    value: object  # Fraction or INF
    point: dict | None  # LP name -> Fraction, fixed-zero names included
    program: RelaxationProgram

    @property
    def feasible(self):
        return self.value is not INF

    def var(self, cls, a):
        return self.point[self.program.var_index[(cls, a)]]

    def con(self, cls, atuple):
        return self.point[self.program.con_index[(cls, tuple(atuple))]]


def solve_program(prog: RelaxationProgram) -> RelaxationSolution:
    out = solve_lp(prog.lp)
    if isinstance(out, Unbounded):
        raise InternalError("relaxation reported unbounded; feasible region must be a polytope")
    if not isinstance(out, Optimal):
        return RelaxationSolution(INF, None, prog)
    point = dict(out.point)
    for v in prog.fixed_zero:
        point[v] = Fraction(0)
    return RelaxationSolution(out.value, point, prog)


def solve_relaxation(I, A, flavor=SA1) -> RelaxationSolution:
    return solve_program(build(I, A, flavor))


def opt_relaxation(I, A, flavor=SA1):
    """``Opt^L(I, A)`` exactly; ``INF`` when the program is infeasible."""
    return solve_relaxation(I, A, flavor).value


def opt_blp(I, A):
    return opt_relaxation(I, A, BLP)


def opt_sa1(I, A):
    return opt_relaxation(I, A, SA1)


def opt_sa1_reduced(I, A):
    return opt_relaxation(I, A, SA1_REDUCED)


def decide(A, B, I, threshold=None, method=SA1) -> Verdict:
    """Answer Yes iff the chosen optimum is at most ``threshold`` (default: the instance threshold)."""
    check_similar(A, B)
    check_similar(I, A)
    if threshold is None:
        threshold = I.threshold
    if threshold is None:
        raise InvalidParameter("no threshold given")
    threshold = to_ext(threshold)
    if threshold is INF:
        raise InvalidParameter("threshold must be finite")
    if method == ORACLE:
        value = opt_value(I, A)
    elif method in (BLP, SA1, SA1_REDUCED):
        value = opt_relaxation(I, A, method)
    else:
        raise InvalidParameter(f"unknown method {method!r}")
    return Verdict.YES if value <= threshold else Verdict.NO


# -- moving points between the full and reduced programs -------------------


def average_to_reduced(full: RelaxationSolution, reduced: RelaxationProgram):
    """Average a full SA1 point over iterated-degree classes."""
    point = {}
    members = {}
    for v, cls in reduced.var_class.items():
        members.setdefault(("var", cls), []).append(v)
    for key, cls in reduced.con_class.items():
        members.setdefault(("con", cls), []).append(constraint_class_name(*key))
    for (cls, a), name in reduced.var_index.items():
        vs = members[("var", cls)]
        point[name] = sum((full.var(v, a) for v in vs), Fraction(0)) / len(vs)
    for (cls, t), name in reduced.con_index.items():
        cs = members[("con", cls)]
        point[name] = sum((full.con(c, t) for c in cs), Fraction(0)) / len(cs)
    return point


def lift_reduced(reduced_point, reduced: RelaxationProgram, full: RelaxationProgram):
    """Copy each class value to every member, giving a point of the full program."""
    point = {}
    for (v, a), name in full.var_index.items():
        point[name] = reduced_point[reduced.var_index[(reduced.var_class[v], a)]]
    inverse = {cls: key for key, cls in full.con_class.items()}
    for (c, t), name in full.con_index.items():
        rcls = reduced.con_class[inverse[c]]
        point[name] = reduced_point[reduced.con_index[(rcls, t)]]
    return point
