"""Seeded random fixtures: templates, instances, linear programs, equiv1 pairs."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .arith import INF
from .lpcore import EQ, GE, LE, LinearProgram
from .model import components, instance, is_connected, k_fold_twist, template
from .wl import equiv1

TEMPLATE_VALUES = [Fraction(0), Fraction(1), Fraction(2), Fraction(3), Fraction(1, 2), Fraction(-1)]
WEIGHTS = [Fraction(1), Fraction(2), Fraction(1, 2), Fraction(3)]


def rng_of(seed):
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_signature(rng, max_symbols=2, max_arity=2):
    rng = rng_of(rng)
    n = rng.randint(1, max_symbols)
    return [(f"R{i}" if n > 1 else "R", rng.randint(1, max_arity)) for i in range(n)]


def random_template(rng, signature, size, p_inf=0.1, values=TEMPLATE_VALUES, name=None):
    rng = rng_of(rng)
    universe = [str(a) for a in range(size)]
    rel = {}
    for r, k in signature:
        rel[r] = {
            t: INF if rng.random() < p_inf else rng.choice(values)
            for t in itertools.product(range(size), repeat=k)
        }
    return template(signature, universe, rel, name=name)


def random_instance(rng, signature, size, max_constraints=4, repeats=True, name=None):
    """Instance with up to ``max_constraints`` weighted tuples.

    With ``repeats=False`` no scope mentions a variable twice (where the
    universe is large enough to allow it).
    """
    rng = rng_of(rng)
    universe = [f"v{i}" for i in range(size)]
    rel = {r: {} for r, _ in signature}
    for _ in range(rng.randint(1, max_constraints)):
        r, k = rng.choice(signature)
        if not repeats and k <= size:
            scope = tuple(rng.sample(range(size), k))
        elif not repeats:
            continue
        else:
            scope = tuple(rng.randrange(size) for _ in range(k))
        rel[r][scope] = rng.choice(WEIGHTS)
    return instance(signature, universe, rel, name=name)


def random_connected_instance(rng, signature, size, extra=2, name=None):
    """Connected instance: a random spanning chain of constraints plus a few extras."""
    rng = rng_of(rng)
    wide = [(r, k) for r, k in signature if k >= 2]
    if size > 1 and not wide:
        raise ValueError("connecting several variables needs a symbol of arity >= 2")
    universe = [f"v{i}" for i in range(size)]
    rel = {r: {} for r, _ in signature}
    order = list(range(size))
    rng.shuffle(order)
    for a, b in zip(order, order[1:]):
        r, k = rng.choice(wide)
        scope = [rng.randrange(size) for _ in range(k)]
        i, j = rng.sample(range(k), 2)
        scope[i], scope[j] = a, b
        rel[r][tuple(scope)] = rng.choice(WEIGHTS)
    for _ in range(rng.randint(0 if size > 1 else 1, extra)):
        r, k = rng.choice(signature)
        rel[r][tuple(rng.randrange(size) for _ in range(k))] = rng.choice(WEIGHTS)
    I = instance(signature, universe, rel, name=name)
    assert is_connected(I), components(I)
    return I


def is_repetition_free(I):
    return all(len(set(scope)) == len(scope) for _, scope, _ in I.constraints())


def random_lp(rng, max_vars=6, max_rows=8, p_free=0.15, p_planted=0.8):
    """Random program; most rows are made to hold at a hidden point so that
    feasible, infeasible and unbounded outcomes all show up."""
    rng = rng_of(rng)
    n = rng.randint(1, max_vars)
    m = rng.randint(1, max_rows)
    lp = LinearProgram()
    names = [lp.add_variable(f"x{i}", nonneg=rng.random() >= p_free) for i in range(n)]
    point = {
        v: Fraction(rng.randint(-2 if v in lp.free else 0, 3)) for v in names
    }

    def coeff(spread=3):
        c = Fraction(rng.randint(-spread, spread))
        if rng.random() < 0.2:
            c /= rng.randint(2, 3)
        return c

    for _ in range(m):
        coeffs = {v: coeff() for v in names if rng.random() < 0.7}
        rel = rng.choice([LE, LE, GE, EQ])
        if rng.random() < p_planted:
            at = sum((c * point[v] for v, c in coeffs.items()), Fraction(0))
            slack = Fraction(rng.randint(0, 2))
            rhs = at if rel == EQ else at + slack if rel == LE else at - slack
        else:
            rhs = coeff(5)
        lp.add_row(coeffs, rel, rhs)
    lp.set_objective({v: coeff() for v in names}, rng.choice(["min", "max"]))
    return lp


def equiv_pairs(rng, count, signature=(("R", 2),), sizes=(3, 4), ks=(3, 4), tries=2000):
    """Connected pairs with ``equiv1(I, J)`` with ``I != J``, from twists with different orders."""
    rng = rng_of(rng)
    out = []
    for _ in range(tries):
        if len(out) >= count:
            break
        n = rng.choice(sizes)
        base = random_connected_instance(rng, list(signature), n, extra=1)
        k = rng.choice(ks)
        o1 = list(range(n))
        o2 = o1[:]
        rng.shuffle(o2)
        I = k_fold_twist(base, k, o1).twisted
        J = k_fold_twist(base, k, o2).twisted
        if I != J and is_connected(I) and is_connected(J) and equiv1(I, J):
            out.append((I, J))
    return out
