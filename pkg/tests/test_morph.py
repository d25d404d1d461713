import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_opt

from pvcsp.arith import INF
from pvcsp.errors import BudgetExceeded, InvalidParameter, MalformedDistribution
from pvcsp.generate import random_instance, random_template
from pvcsp.maps import MapDistribution
from pvcsp.model import instance, template
from pvcsp.morph import (
    Counterexample,
    blp_power_consistency,
    dual_frac_hom,
    expand_operation,
    frac_hom,
    power_lp,
    sym_frac_polymorphism,
    verify_dual_frac_hom,
    verify_frac_hom,
)
from pvcsp.relax import opt_blp

SIG = [("R", 2)]
MIXED = [("R", 2), ("U", 1)]


def brute_power_value(A, r, multisets, m):
    """Least average cost over every column arrangement of every argument."""
    best = None
    for cols in itertools.product(*(set(itertools.permutations(s)) for s in multisets)):
        total = Fraction(0)
        for i in range(m):
            total = total + A.value(r, tuple(c[i] for c in cols))
        if best is None or total < best:
            best = total
    return best / m


def test_ex1_forward_is_identity(ex1):
    A, B, _ = ex1
    dist = frac_hom(A, B)
    assert dist.support == (((0, 1), Fraction(1)),)
    assert verify_frac_hom(A, B, dist)


def test_ex1_backward_counterexample(ex1):
    A, B, _ = ex1
    cx = frac_hom(B, A)
    assert isinstance(cx, Counterexample)
    assert cx.opt_source == brute_opt(cx.instance, B) == 0
    assert cx.opt_target == brute_opt(cx.instance, A) == 1
    assert cx.gap and not cx.perturbed


def test_verify_rejects_bad_distribution(ex1):
    A, B, _ = ex1
    swap = MapDistribution.point_mass(A.universe, B.universe, (1, 0))
    assert verify_frac_hom(A, B, swap)  # symmetric zero template
    const = MapDistribution.point_mass(B.universe, A.universe, (0, 0))
    assert not verify_frac_hom(B, A, const)
    with pytest.raises(MalformedDistribution):
        MapDistribution(("a",), ("b",), [((0,), Fraction(1, 2))])
    with pytest.raises(MalformedDistribution):
        verify_frac_hom(A, B, MapDistribution.point_mass(("x",), B.universe, (0,)))


def test_no_admissible_map_counterexample():
    A = template(SIG, ["0"], {"R": {("0", "0"): 5}})
    B = template(SIG, ["0"], {"R": {("0", "0"): INF}})
    cx = frac_hom(A, B)
    assert cx.opt_target is INF and cx.opt_source == brute_opt(cx.instance, A)


def test_budget(ex1):
    A, B, _ = ex1
    with pytest.raises(BudgetExceeded):
        frac_hom(A, B, budget=1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_frac_hom_forward_property(seed):
    rng = random.Random(seed)
    A = random_template(rng, MIXED, rng.randint(1, 3))
    B = random_template(rng, MIXED, rng.randint(1, 3))
    out = frac_hom(A, B)
    if isinstance(out, MapDistribution):
        assert verify_frac_hom(A, B, out)
        # any fractional homomorphism caps the target optimum by the source one
        for _ in range(3):
            I = random_instance(rng, MIXED, rng.randint(1, 3))
            assert brute_opt(I, B) <= brute_opt(I, A)
    else:
        assert brute_opt(out.instance, B) == out.opt_target
        assert brute_opt(out.instance, A) == out.opt_source
        assert out.opt_target > out.opt_source


def test_dual_frac_hom_weights():
    heavy = instance(SIG, ["u", "v"], {"R": {("u", "v"): 2}})
    light = instance(SIG, ["u", "v"], {"R": {("u", "v"): 1}})
    dist = dual_frac_hom(light, heavy)
    assert dist is not None and verify_dual_frac_hom(light, heavy, dist)
    assert dual_frac_hom(heavy, light) is None


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_dual_frac_hom_forward_property(seed):
    rng = random.Random(seed)
    I = random_instance(rng, SIG, rng.randint(1, 3))
    J = random_instance(rng, SIG, rng.randint(1, 3))
    dist = dual_frac_hom(I, J)
    if dist is None:
        return
    assert verify_dual_frac_hom(I, J, dist)
    # I -> J dual-fractionally forces Opt(I, C) <= Opt(J, C) on non-negative C
    for _ in range(3):
        C = random_template(rng, SIG, rng.randint(1, 3), values=(0, 1, 2, Fraction(1, 2)))
        assert brute_opt(I, C) <= brute_opt(J, C)


def test_power_of_one_is_base(ex1):
    A = ex1[0]
    P = power_lp(A, 1)
    assert P.structure.table("R") == A.table("R")
    with pytest.raises(InvalidParameter):
        power_lp(A, 0)


def test_ex1_square(ex1):
    A = ex1[0]
    P = power_lp(A, 2)
    S = P.structure
    assert S.universe == ("0+0", "0+1", "1+1")
    assert S.value_of("R", ("0+1", "0+1")) == 2
    assert S.value_of("R", ("0+0", "0+0")) == 3
    assert P.index_of((1, 0)) == 1 and P.multiset_of(2) == (1, 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**9))
def test_power_matches_brute_force(seed):
    rng = random.Random(seed)
    A = random_template(rng, MIXED, rng.randint(1, 3))
    m = rng.randint(1, 3)
    P = power_lp(A, m)
    for r, k in MIXED:
        for combo in itertools.product(range(len(P.multisets)), repeat=k):
            ms = [P.multisets[c] for c in combo]
            assert P.structure.value(r, combo) == brute_power_value(A, r, ms, m)


def test_power_budget(ex1):
    with pytest.raises(BudgetExceeded):
        power_lp(ex1[0], 30)


def test_sympoly_ex1(ex1):
    A, B, _ = ex1
    dist = sym_frac_polymorphism(A, B, 1)
    assert isinstance(dist, MapDistribution) and dist.meta["m"] == 1
    cx = sym_frac_polymorphism(A, B, 2)
    assert isinstance(cx, Counterexample)
    assert brute_opt(cx.instance, B) == cx.opt_target
    assert cx.opt_target > cx.opt_source >= cx.meta["opt_blp"]
    assert opt_blp(cx.instance, A) == cx.meta["opt_blp"]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**9))
def test_expanded_operations_are_symmetric(seed):
    rng = random.Random(seed)
    A = random_template(rng, SIG, rng.randint(1, 2))
    B = random_template(rng, SIG, rng.randint(1, 2))
    m = rng.randint(1, 3)
    out = sym_frac_polymorphism(A, B, m)
    if not isinstance(out, MapDistribution):
        assert out.opt_target > out.opt_source
        return
    P = power_lp(A, m)
    for table, _ in out.support:
        op = expand_operation(P, table)
        for args, b in op.items():
            for perm in itertools.permutations(args):
                assert op[perm] == b


def test_blp_power_consistency_ex1(ex1):
    A, _, I = ex1
    rep = blp_power_consistency(I, A)
    assert rep.status == "ok" and rep.consistent
    assert rep.m_star == 2 and rep.opt_blp == 2
    assert rep.opt_power == {1: 3, 2: 2}
