"""Exact rational linear programming.

Two-phase primal simplex over :class:`fractions.Fraction` with Bland's rule
(lowest column index enters, lowest basic index breaks ratio ties), on a
sparse tableau.  Infeasible programs come with a Farkas certificate read off
the phase-one duals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .arith import INF, format_ext, to_ext
from .errors import DimensionMismatch, MalformedProgram

LE, EQ, GE = "<=", "=", ">="
_RELATIONS = (LE, EQ, GE)

__all__ = [
    "EQ",
    "GE",
    "LE",
    "Infeasible",
    "LinearProgram",
    "Optimal",
    "Row",
    "Unbounded",
    "solve_lp",
    "verify_certificate",
    "verify_point",
]


@dataclass(frozen=True)
class Row:
    coeffs: tuple  # ((variable, Fraction), ...) in insertion order, no zeros
    rel: str
    rhs: Fraction
    name: str | None = None

    def as_dict(self):
        return dict(self.coeffs)


@dataclass
class LinearProgram:
    """Variables are non-negative unless declared free."""

    variables: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)
    sense: str = "min"
    free: set = field(default_factory=set)

    def add_variable(self, name, nonneg=True):
        if name in self._names():
            raise MalformedProgram(f"duplicate variable {name!r}")
        self.variables.append(name)
        self._index[name] = len(self.variables) - 1
        if not nonneg:
            self.free.add(name)
        return name

    def _names(self):
        if not hasattr(self, "_index") or len(self._index) != len(self.variables):
            self._index = {v: i for i, v in enumerate(self.variables)}
        return self._index

    def add_row(self, coeffs, rel, rhs, name=None):
        if rel not in _RELATIONS:
            raise MalformedProgram(f"unknown relation {rel!r}")
        names = self._names()
        merged = {}
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        for v, c in items:
            if v not in names:
                raise MalformedProgram(f"unknown variable {v!r}")
            c = _finite(c)
            merged[v] = merged.get(v, Fraction(0)) + c
        row = Row(tuple((v, c) for v, c in merged.items() if c != 0), rel, _finite(rhs), name)
        self.rows.append(row)
        return row

    def set_objective(self, coeffs, sense="min"):
        if sense not in ("min", "max"):
            raise MalformedProgram(f"unknown sense {sense!r}")
        names = self._names()
        obj = {}
        for v, c in dict(coeffs).items():
            if v not in names:
                raise MalformedProgram(f"unknown variable {v!r}")
            c = _finite(c)
            if c != 0:
                obj[v] = obj.get(v, Fraction(0)) + c
        self.objective = obj
        self.sense = sense

    def validate(self):
        names = self._names()
        if len(names) != len(self.variables):
            raise MalformedProgram("duplicate variable names")
        for row in self.rows:
            if row.rel not in _RELATIONS:
                raise MalformedProgram(f"unknown relation {row.rel!r}")
            for v, _ in row.coeffs:
                if v not in names:
                    raise MalformedProgram(f"unknown variable {v!r}")
        for v in self.objective:
            if v not in names:
                raise MalformedProgram(f"unknown variable {v!r}")
        for v in self.free:
            if v not in names:
                raise MalformedProgram(f"unknown variable {v!r}")

    def objective_value(self, point):
        return sum((c * point[v] for v, c in self.objective.items()), Fraction(0))

    def to_text(self):
        """Plain inequality dump, one row per line, for cross-checking elsewhere."""

        def expr(items):
            parts = []
            for v, c in items:
                sign = "-" if c < 0 else "+"
                mag = abs(c)
                term = v if mag == 1 else f"{format_ext(mag)} {v}"
                parts.append(f"{sign} {term}")
            if not parts:
                return "0"
            s = " ".join(parts)
            return s[2:] if s.startswith("+ ") else "-" + s[2:]

        out = [f"{self.sense}: {expr(self.objective.items())}", "subject to"]
        for i, row in enumerate(self.rows):
            label = row.name or f"r{i}"
            out.append(f"  {label}: {expr(row.coeffs)} {row.rel} {format_ext(row.rhs)}")
        out.append("bounds")
        for v in self.variables:
            out.append(f"  {v} free" if v in self.free else f"  {v} >= 0")
        return "\n".join(out) + "\n"


def _finite(x):
    x = to_ext(x)
    if x is INF:
        raise MalformedProgram("infinite coefficients cannot enter a linear program")
    return x


@dataclass(frozen=True)
class Optimal:
    value: Fraction
    point: dict
    status: str = "optimal"


@dataclass(frozen=True)
class Infeasible:
    certificate: tuple  # one multiplier per row
    status: str = "infeasible"


@dataclass(frozen=True)
class Unbounded:
    status: str = "unbounded"


# -- simplex ---------------------------------------------------------------


class _Tableau:
    """Sparse tableau: each row is ``{column: coefficient}`` with a basic column."""

    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols
        self.cost = {}
        self.zval = Fraction(0)

    def set_cost(self, cost):
        self.cost = {j: c for j, c in cost.items() if c != 0}
        self.zval = Fraction(0)
        for r, b in enumerate(self.basis):
            f = self.cost.get(b)
            if f:
                self._eliminate_cost(r, f)

    def _eliminate_cost(self, r, f):
        for j, a in self.rows[r].items():
            c = self.cost.get(j, 0) - f * a
            if c:
                self.cost[j] = c
            else:
                self.cost.pop(j, None)
        self.zval += f * self.rhs[r]

    def pivot(self, r, col):
        row = self.rows[r]
        piv = row[col]
        if piv != 1:
            inv = 1 / piv
            for j in row:
                row[j] *= inv
            self.rhs[r] *= inv
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other.get(col)
            if not f:
                continue
            for j, a in row.items():
                c = other.get(j, 0) - f * a
                if c:
                    other[j] = c
                else:
                    other.pop(j, None)
            self.rhs[i] -= f * self.rhs[r]
        f = self.cost.get(col)
        if f:
            self._eliminate_cost(r, f)
        self.basis[r] = col

    def run(self, allowed):
        """Bland's-rule minimisation; returns False when unbounded."""
        while True:
            entering = None
            for j in sorted(j for j, c in self.cost.items() if c < 0):
                if j < allowed:
                    entering = j
                    break
            if entering is None:
                return True
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is None or a <= 0:
                    continue
                ratio = self.rhs[i] / a
                key = (ratio, self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], entering)


def solve_lp(lp: LinearProgram):
    """Solve exactly; returns :class:`Optimal`, :class:`Infeasible` or :class:`Unbounded`."""
    lp.validate()
    names = lp.variables

    # column layout: x+ per variable, x- per free variable, slacks, artificials
    col_of = {}
    neg_col = {}
    ncols = 0
    for v in names:
        col_of[v] = ncols
        ncols += 1
    for v in names:
        if v in lp.free:
            neg_col[v] = ncols
            ncols += 1

    m = len(lp.rows)
    rows, rhs, signs = [], [], []
    slack_cols = []
    for row in lp.rows:
        d = {}
        for v, c in row.coeffs:
            d[col_of[v]] = c
            if v in neg_col:
                d[neg_col[v]] = -c
        if row.rel != EQ:
            d[ncols] = Fraction(1) if row.rel == LE else Fraction(-1)
            slack_cols.append(ncols)
            ncols += 1
        else:
            slack_cols.append(None)
        s = -1 if row.rhs < 0 else 1
        if s < 0:
            d = {j: -a for j, a in d.items()}
        rows.append(d)
        rhs.append(s * row.rhs)
        signs.append(s)

    n_real = ncols
    art = list(range(ncols, ncols + m))
    for i in range(m):
        rows[i][art[i]] = Fraction(1)
    tab = _Tableau(rows, rhs, list(art), ncols + m)

    # phase one
    tab.set_cost({j: Fraction(1) for j in art})
    tab.run(allowed=tab.ncols)
    if tab.zval > 0:
        t = tab.zval
        y = [1 - tab.cost.get(art[i], Fraction(0)) for i in range(m)]
        cert = tuple(-signs[i] * y[i] / t for i in range(m))
        return Infeasible(cert)

    # drive artificials out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if tab.basis[r] >= n_real:
            col = next((j for j in sorted(tab.rows[r]) if j < n_real), None)
            if col is None:
                continue
            tab.pivot(r, col)
        keep.append(r)
    tab.rows = [{j: a for j, a in tab.rows[r].items() if j < n_real} for r in keep]
    tab.rhs = [tab.rhs[r] for r in keep]
    tab.basis = [tab.basis[r] for r in keep]

    # phase two
    flip = -1 if lp.sense == "max" else 1
    cost = {}
    for v, c in lp.objective.items():
        cost[col_of[v]] = flip * c
        if v in neg_col:
            cost[neg_col[v]] = -flip * c
    tab.set_cost(cost)
    if not tab.run(allowed=n_real):
        return Unbounded()

    values = [Fraction(0)] * n_real
    for r, b in enumerate(tab.basis):
        values[b] = tab.rhs[r]
    point = {}
    for v in names:
        x = values[col_of[v]]
        if v in neg_col:
            x -= values[neg_col[v]]
        point[v] = x
    value = lp.objective_value(point)
    assert value == flip * tab.zval, "objective bookkeeping drifted"
    return Optimal(value, point)


# -- verification ----------------------------------------------------------


def verify_point(lp: LinearProgram, point) -> bool:
    """Independent exact feasibility check of ``point``."""
    if set(point) != set(lp.variables):
        raise DimensionMismatch("point does not assign exactly the program's variables")
    for v in lp.variables:
        if v not in lp.free and point[v] < 0:
            return False
    for row in lp.rows:
        lhs = sum((c * point[v] for v, c in row.coeffs), Fraction(0))
        if row.rel == LE and not lhs <= row.rhs:
            return False
        if row.rel == GE and not lhs >= row.rhs:
            return False
        if row.rel == EQ and lhs != row.rhs:
            return False
    return True


def verify_certificate(lp: LinearProgram, certificate) -> bool:
    """Check a Farkas certificate of infeasibility.

    Multipliers must be >= 0 on ``<=`` rows and <= 0 on ``>=`` rows.  The
    combined row must have zero coefficients on free variables and
    non-negative ones on the rest, while the combined right-hand side is
    negative: together these derive ``0 <= negative``.
    """
    certificate = list(certificate)
    if len(certificate) != len(lp.rows):
        raise DimensionMismatch("one multiplier per row is required")
    combined = {v: Fraction(0) for v in lp.variables}
    rhs = Fraction(0)
    for mult, row in zip(certificate, lp.rows):
        mult = Fraction(mult)
        if row.rel == LE and mult < 0:
            return False
        if row.rel == GE and mult > 0:
            return False
        for v, c in row.coeffs:
            combined[v] += mult * c
        rhs += mult * row.rhs
    for v, c in combined.items():
        if v in lp.free and c != 0:
            return False
        if c < 0:
            return False
    return rhs < 0
