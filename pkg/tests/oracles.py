"""Independent reference implementations used only by the tests.

Nothing here calls into the solver or the relaxation code: optima come
from plain enumeration, LP optima from enumerating vertices and extreme rays.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import gmpy2

from pvcsp.arith import INF

# the enumeration below does a lot of small exact eliminations; mpq keeps it quick
Q = gmpy2.mpq
ZERO, ONE = Q(0), Q(1)


def _q(x):
    return Q(x.numerator, x.denominator)


def _fraction(x):
    return Fraction(int(x.numerator), int(x.denominator))


def brute_opt(I, A):
    """Minimum total cost over all assignments, by name."""
    best = None
    cons = [(r, I.names(scope), w) for r, scope, w in I.constraints()]
    for values in itertools.product(A.universe, repeat=len(I.universe)):
        h = dict(zip(I.universe, values))
        total = Fraction(0)
        for r, names, w in cons:
            total = total + w * A.value_of(r, tuple(h[v] for v in names))
            if total is INF:
                break
        if best is None or total < best:
            best = total
    return Fraction(0) if best is None else best


# -- exact linear algebra --------------------------------------------------


def _rref(rows, ncols):
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def solve_square(M, b):
    """Unique solution of ``M x = b`` or ``None`` when ``M`` is singular."""
    n = len(M)
    aug = [list(row) + [bi] for row, bi in zip(M, b)]
    rows, piv = _rref(aug, n)
    if len(piv) < n:
        return None
    return [rows[i][n] for i in range(n)]


def nullspace(M, n):
    if not M:
        return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    rows, piv = _rref(M, n)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for row, p in zip(rows, piv):
            v[p] = -row[f]
        basis.append(v)
    return basis


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b)), ZERO)


# -- LP by enumeration -----------------------------------------------------


def lp_oracle(lp):
    """``("optimal", value)``, ``("infeasible", None)`` or ``("unbounded", None)``."""
    names = lp.variables
    n = len(names)
    pos = {v: i for i, v in enumerate(names)}
    cons = []  # (normal, rel, rhs) with rel in {"<=", "="}
    for row in lp.rows:
        a = [ZERO] * n
        for v, c in row.coeffs:
            a[pos[v]] += _q(c)
        if row.rel == ">=":
            cons.append(([-x for x in a], "<=", -_q(row.rhs)))
        else:
            cons.append((a, row.rel, _q(row.rhs)))
    for v in names:
        if v not in lp.free:
            a = [ZERO] * n
            a[pos[v]] = -ONE
            cons.append((a, "<=", ZERO))
    c = [ZERO] * n
    for v, x in lp.objective.items():
        c[pos[v]] = _q(x) if lp.sense == "min" else -_q(x)

    # lineality space: directions along which every constraint is flat
    lineal = nullspace([a for a, _, _ in cons], n)
    unbounded_line = any(_dot(c, d) != 0 for d in lineal)
    for d in lineal:
        cons.append((d, "=", ZERO))

    def feasible(x):
        for a, rel, b in cons:
            lhs = _dot(a, x)
            if rel == "=" and lhs != b:
                return False
            if rel == "<=" and lhs > b:
                return False
        return True

    vertices = []
    for subset in itertools.combinations(range(len(cons)), n):
        M = [cons[i][0] for i in subset]
        x = solve_square(M, [cons[i][2] for i in subset])
        if x is not None and feasible(x):
            vertices.append(x)
    if n == 0:
        vertices = [[]] if feasible([]) else []
    if not vertices:
        return ("infeasible", None)
    if unbounded_line:
        return ("unbounded", None)

    # extreme rays of the (pointed) recession cone
    def in_cone(d):
        for a, rel, _ in cons:
            lhs = _dot(a, d)
            if rel == "=" and lhs != 0:
                return False
            if rel == "<=" and lhs > 0:
                return False
        return True

    for subset in itertools.combinations(range(len(cons)), max(n - 1, 0)):
        ns = nullspace([cons[i][0] for i in subset], n)
        if len(ns) != 1:
            continue
        d = ns[0]
        for s in (d, [-x for x in d]):
            if in_cone(s) and _dot(c, s) < 0:
                return ("unbounded", None)

    best = _fraction(min(_dot(c, x) for x in vertices))
    return ("optimal", best if lp.sense == "min" else -best)


def sa1_point_from_decomposition(I, A, d):
    """Read an SA1 point back off the twisted cover and its assignment with permutation-matrix products.

    For each constraint and position ``i``, ``P_i @ H_v`` is the ``m x |A|``
    one-hot matrix of the values that copy ``k`` of the constraint sees;
    averaging the row-wise products over copies gives the tuple distribution.
    Returns ``{(var, a): Fraction}`` and ``{(symbol, names, a-tuple): Fraction}``.
    """
    import numpy as np

    m, n, na = d.m, len(I.universe), len(A.universe)
    onehot = {}
    for v in range(n):
        H = np.full((m, na), Fraction(0), dtype=object)
        for k in range(m):
            H[k, d.assignment[k * n + v]] = Fraction(1)
        onehot[v] = H
    marginals = {
        (I.universe[v], A.universe[a]): sum(onehot[v][:, a], Fraction(0)) / m
        for v in range(n)
        for a in range(na)
    }
    tuples = {}
    for r, scope, _ in I.constraints():
        names = I.names(scope)
        seen = []
        for i, v in enumerate(scope):
            P = np.full((m, m), Fraction(0), dtype=object)
            for k, j in enumerate(d.permutations[(r, names)][i]):
                P[k, j] = Fraction(1)
            seen.append(P.dot(onehot[v]))
        for t in itertools.product(range(na), repeat=len(scope)):
            col = np.full(m, Fraction(1), dtype=object)
            for i, a in enumerate(t):
                col = col * seen[i][:, a]
            tuples[(r, names, A.names(t))] = sum(col, Fraction(0)) / m
    return marginals, tuples
