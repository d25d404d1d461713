import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pvcsp.distsim import (
    FULL,
    HALTED,
    build_network,
    run,
    simulate,
    step,
)
from pvcsp.errors import Disconnected, InvalidParameter, ScheduleExceeded
from pvcsp.generate import equiv_pairs, random_connected_instance, random_template
from pvcsp.model import instance, template
from pvcsp.relax import Verdict, opt_sa1
from pvcsp.wl import color_classes

SIG = [("R", 2)]


def cycle(n):
    names = [f"x{i}" for i in range(n)]
    I = instance(SIG, names, {"R": {(names[i], names[(i + 1) % n]): 1 for i in range(n)}})
    A = template(SIG, ["0", "1"], {"R": {("0", "0"): 1, ("0", "1"): 0, ("1", "0"): 0, ("1", "1"): 1}})
    return I, A


def test_ex1_verdicts(ex1):
    A, B, I = ex1
    no = simulate(I, A, B, 2)
    yes = simulate(I, A, B, 3)
    assert no.verdict is Verdict.NO and yes.verdict is Verdict.YES
    assert no.value == 3 and no.rounds == 5


def test_cycle_is_one_class():
    I, A = cycle(3)
    res = simulate(I, A, A, 0)
    assert res.verdict is Verdict.YES and res.value == 0
    assert res.rounds == 2 * 6 + 1
    assert len({json.dumps(t) for t in res.traces[:3]}) == 1
    assert len({json.dumps(t) for t in res.traces[3:]}) == 1


def test_full_encoding_agrees(ex1):
    A, B, I = ex1
    a = simulate(I, A, B, 2, encoding=FULL)
    b = simulate(I, A, B, 2)
    assert a.verdict == b.verdict and a.value == b.value


def test_preconditions(ex1):
    A, B, _ = ex1
    with pytest.raises(Disconnected):
        build_network(instance(SIG, ["u", "v"]), A, B, 1)
    I = ex1[2]
    with pytest.raises(InvalidParameter):
        build_network(I, A, B, 1, encoding="nope")
    with pytest.raises(InvalidParameter):
        build_network(I.with_threshold(None), A, B)


def test_schedule_is_bounded(ex1):
    A, B, I = ex1
    net = build_network(I, A, B, 2)
    with pytest.raises(InvalidParameter):
        step(net, 3)
    run(net)
    assert all(a.phase == HALTED for a in net.agents)
    with pytest.raises(ScheduleExceeded):
        step(net)


def test_trace_lines_are_json(ex1):
    A, B, I = ex1
    lines = simulate(I, A, B, 2).trace_lines()
    recs = [json.loads(x) for x in lines]
    assert len(recs) == 5 * 2
    assert recs[-1]["verdict"] == "No"
    assert {r["agent"] for r in recs} == {0, 1}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**9))
def test_random_connected(seed):
    rng = random.Random(seed)
    I = random_connected_instance(rng, SIG, rng.randint(1, 4))
    A = random_template(rng, SIG, rng.randint(1, 2), p_inf=0)
    s = opt_sa1(I, A)
    net = build_network(I, A, A, s)
    res = run(net)  # run() checks agreement and the reconstruction
    assert res.verdict is Verdict.YES and res.value == s
    assert res.rounds <= 3 * net.size
    G, P = color_classes(I)
    by_class = {}
    for x, trace in enumerate(res.traces):
        by_class.setdefault(P.encoding(x), set()).add(json.dumps(trace, sort_keys=True))
    assert all(len(v) == 1 for v in by_class.values())
    assert simulate(I, A, A, s - 1).verdict is Verdict.NO


def test_blind_to_equivalent_pairs():
    rng = random.Random(3)
    A = random_template(rng, SIG, 2, p_inf=0)
    for I, J in equiv_pairs(rng, 3):
        assert I != J
        for threshold in (0, 1, 2, 3):
            a, b = simulate(I, A, A, threshold), simulate(J, A, A, threshold)
            assert a.verdict == b.verdict and a.value == b.value
