import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_opt

from pvcsp.arith import INF
from pvcsp.errors import (
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
from pvcsp.generate import random_connected_instance, random_instance, random_template
from pvcsp.model import (
    CrispStructure,
    components,
    constraints,
    disjoint_union,
    instance,
    is_connected,
    k_fold_twist,
    maxcsp_encode,
    maxcsp_instance,
    opt,
    parse_structure,
    serialize_structure,
    template,
    val,
)
from pvcsp.morph import verify_dual_frac_hom

SIG = [("R", 2)]


def test_ex1_parses(ex1):
    A, B, I = ex1
    assert A.value_of("R", ("0", "1")) == 2
    assert B.value_of("R", ("0", "1")) == 0
    assert I.threshold == 2
    assert constraints(I) == [("R", (0, 0), Fraction(1))]


def test_roundtrip_is_exact(ex1):
    for S in ex1:
        text = serialize_structure(S)
        T = parse_structure(text)
        assert T == S
        assert serialize_structure(T) == text


def test_default_lines():
    text = """signature
  R 2
template T
  universe a b
  R (a,a) 1
  default R inf
"""
    T = parse_structure(text)
    assert T.value_of("R", ("b", "a")) is INF
    assert T.value_of("R", ("a", "a")) == 1
    assert parse_structure(serialize_structure(T)) == T


@pytest.mark.parametrize(
    "body,err",
    [
        ("instance I\n  universe v\n  R (v,v) -1\n", RoleViolation),
        ("instance I\n  universe v\n  R (v,v) inf\n", RoleViolation),
        ("instance I\n  universe v\n  R (v) 1\n", ArityMismatch),
        ("instance I\n  universe v\n  S (v,v) 1\n", UnknownSymbol),
        ("instance I\n  universe v\n  R (v,w) 1\n", ParseError),
        ("template T\n  universe a b\n  R (a,a) 1\n", ParseError),
        ("instance I\n  universe v\n  R (v,v) 1/0\n", ParseError),
        ("template T\n  universe a\n  R (a,a) 1\n  threshold 2\n", ParseError),
    ],
)
def test_parse_errors(body, err):
    with pytest.raises(err):
        parse_structure("signature\n  R 2\n" + body)


def test_parse_error_carries_line():
    with pytest.raises(ParseError) as info:
        parse_structure("signature\n  R 2\ninstance I\n  universe v\n  R (v,v) x\n")
    assert info.value.line == 5


def test_constraints_exclude_zero_weights():
    I = instance(SIG, ["u", "v"], {"R": {("u", "v"): Fraction(1, 2), ("v", "u"): 0}})
    assert constraints(I) == [("R", (0, 1), Fraction(1, 2))]
    assert constraints(instance(SIG, ["u"])) == []


def test_constraints_need_instance(ex1):
    with pytest.raises(RoleViolation):
        constraints(ex1[0])


def test_val_and_opt(ex1):
    A, B, I = ex1
    assert val(I, A, (0,)) == 3
    assert val(I, B, {"v": "1"}) == 3
    assert opt(I, A) == (3, (0,))
    assert opt(I, B)[0] == 3
    assert opt(instance(SIG, ["u", "v"]), A)[0] == 0


def test_val_with_inf_and_zero_weight():
    T = template(SIG, ["0", "1"], {"R": {}}, defaults={"R": INF})
    I = instance(SIG, ["u"], {"R": {("u", "u"): 0}})
    assert val(I, T, (0,)) == 0  # 0 * inf


def test_signature_mismatch(ex1):
    A, _, _ = ex1
    J = instance([("S", 1)], ["u"], {"S": {("u",): 1}})
    with pytest.raises(SignatureMismatch):
        opt(J, A)


def test_opt_budget(ex1):
    A = ex1[0]
    I = instance(SIG, [f"v{i}" for i in range(10)])
    with pytest.raises(BudgetExceeded):
        opt(I, A, budget=100)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_opt_matches_enumeration(seed):
    rng = random.Random(seed)
    sig = [("R", 2), ("U", 1)]
    A = random_template(rng, sig, rng.randint(1, 3))
    I = random_instance(rng, sig, rng.randint(1, 3))
    value, witness = opt(I, A)
    assert value == brute_opt(I, A)
    assert val(I, A, witness) == value
    # witness is the lexicographically least minimiser
    for h in itertools.product(range(len(A.universe)), repeat=len(I.universe)):
        if h == witness:
            break
        assert val(I, A, h) > value


def test_maxcsp_encoding():
    A = CrispStructure(SIG, ["0", "1"], {"R": [("0", "1"), ("1", "0")]})
    a2, b2 = maxcsp_encode(A, Fraction(1, 2))
    assert a2.value_of("R", ("0", "1")) == -1
    assert a2.value_of("R", ("0", "0")) == 0
    assert b2.value_of("R", ("0", "1")) == -2
    a1, b1 = maxcsp_encode(A, 1)
    assert a1.table("R") == b1.table("R")
    with pytest.raises(InvalidParameter):
        maxcsp_encode(A, 0)
    with pytest.raises(InvalidParameter):
        maxcsp_encode(A, Fraction(3, 2))


def test_maxcsp_instance_thresholds():
    I = CrispStructure(SIG, ["a", "b", "c"], {"R": [("a", "b"), ("b", "c"), ("c", "a")]})
    assert maxcsp_instance(I, 1).threshold == -3
    assert maxcsp_instance(I, Fraction(1, 3)).threshold == -1
    assert maxcsp_instance(CrispStructure(SIG, ["a"], {}), 1).threshold == 0


def test_maxcsp_counts_satisfied():
    rng = random.Random(7)
    for _ in range(30):
        n = 3
        A = CrispStructure(SIG, ["0", "1"], {"R": [t for t in itertools.product("01", repeat=2) if rng.random() < 0.5]})
        cons = {tuple(rng.choice("abc") for _ in range(2)) for _ in range(rng.randint(1, 4))}
        I = CrispStructure(SIG, ["a", "b", "c"][:n], {"R": list(cons)})
        a2, _ = maxcsp_encode(A, 1)
        I2 = maxcsp_instance(I, 1)
        for h in itertools.product("01", repeat=n):
            hm = dict(zip("abc", h))
            sat = sum(1 for t in I.relations["R"] if (hm[t[0]], hm[t[1]]) in A.relations["R"])
            assert val(I2, a2, hm) == -sat


def test_components_and_union(ex1):
    I = ex1[2]
    U = disjoint_union(I, I)
    assert U.universe == ("0:v", "1:v")
    assert len(components(U)) == 2 and not is_connected(U)
    assert is_connected(I)


def test_twist_preconditions(ex1):
    with pytest.raises(TooSmall):
        k_fold_twist(ex1[2], 2)
    U = instance(SIG, ["a", "b"])
    with pytest.raises(Disconnected):
        k_fold_twist(U, 2)


def test_twist_k1_doubles_weights():
    I = instance(SIG, ["a", "b"], {"R": {("a", "b"): 1, ("b", "b"): Fraction(1, 2)}})
    tw = k_fold_twist(I, 1)
    assert tw.twisted.universe == ("0:a", "0:b")
    assert tw.twisted.value_of("R", ("0:a", "0:b")) == 2
    assert tw.twisted.value_of("R", ("0:b", "0:b")) == 1


def test_twist_witnesses_and_connectivity():
    rng = random.Random(11)
    for n in (2, 3, 4):
        for _ in range(3):
            I = random_connected_instance(rng, [("R", 2)], n)
            for k in range(1, 4):
                tw = k_fold_twist(I, k)
                assert len(tw.twisted.universe) == k * n
                assert verify_dual_frac_hom(I, tw.scaled, tw.embedding)
                assert verify_dual_frac_hom(tw.scaled, I, tw.projection)
                assert tw.scaled.scaled(2 * k) == tw.twisted.renamed(tw.scaled.name)
            tw = k_fold_twist(I, n)
            assert is_connected(tw.twisted)
