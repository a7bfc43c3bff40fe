import math

import pytest

from dyncover.combiner import GENERAL, BucketRouter, bucket_count, combiner_factor
from dyncover.dynamic import Event
from dyncover.functions import Coverage, GroundSet, Junta
from dyncover.traces import gen_trace


def test_bucket_count():
    assert bucket_count(2, 1) == 0
    assert bucket_count(16, 1) == 2  # log2 log2 16 = 2
    assert bucket_count(17, 1) == 3
    assert bucket_count(2 ** 16, 1) == 4


def test_factor():
    assert combiner_factor(math.e ** 2, 3, 2 ** 10, 1) == pytest.approx((8 + 2 * math.e ** 2) * 3)
    assert combiner_factor(5, 100, 4, 1) == pytest.approx((8 + 10) * 2)


def test_small_arity_never_uses_general_child():
    ground = GroundSet([1] * 8)
    router = BucketRouter(ground, total=2 ** 16, seed=1)
    for t, supp in enumerate([(0, 1, 2), (3, 4), (5, 6, 7), (1, 5)]):
        router.route(Event(t, "insert", t, Junta.indicator(supp, elements=range(8))))
    router.route(Event(4, "delete", 0))
    assert not router.general_used
    assert {router.level_of(Junta.indicator(s, elements=range(8))) for s in [(0,), (0, 1), (0, 1, 2)]} == {0, 1}


def test_non_juntas_go_to_general():
    router = BucketRouter(GroundSet([1, 1]), total=16)
    g = Coverage({0: {1}, 1: {2}})
    assert router.level_of(g) == GENERAL
    router.route(Event(0, "insert", "g", g))
    assert router.general_used and router.solution() == {0, 1}


def test_disjoint_children_cost_adds_up():
    ground = GroundSet([1, 2, 3, 4, 5, 6, 7, 8])
    router = BucketRouter(ground, total=2 ** 16, seed=3)
    router.route(Event(0, "insert", "one", Junta.indicator([0], elements=range(8))))
    router.route(Event(1, "insert", "two", Junta.indicator([1, 2], elements=range(8))))
    router.route(Event(2, "insert", "four", Junta.indicator([3, 4, 5, 6], elements=range(8))))
    child_cost = sum(ground.cost(router.buckets[l].solution) for l in router.buckets)
    assert router.steps[-1].cost == child_cost


def test_mixed_trace_recourse_and_feasibility():
    tr = gen_trace("junta", seed=5, n=8, r=3, ops=40, cost_spread=5)
    router = BucketRouter(tr.ground(), total=tr.volume(), seed=5, oracle="brute")
    for ev in tr.cover_events():
        s = router.route(ev)
        assert s.competitive_ok
    last = router.steps[-1]
    assert last.cumulative_recourse <= last.cumulative_child_recourse


def test_unknown_ids():
    router = BucketRouter(GroundSet([1]), total=4)
    with pytest.raises(KeyError):
        router.route(Event(0, "delete", "x"))
    g = Junta.indicator([0], elements=range(1))
    router.route(Event(0, "insert", "x", g))
    with pytest.raises(KeyError):
        router.route(Event(1, "insert", "x", g))
