import itertools
import math
import random

import pytest

from dyncover.oracles import exact_mst, exact_steiner
from dyncover.potentials import GeneralH, PowerLaw, evaluate
from dyncover.trees import (FullyDynamicMST, FullyDynamicSteiner, MetricError, MetricInstance,
                            tree_recourse_budget)

E2 = math.e ** 2


def line(*xs):
    return MetricInstance(coords={i: (x,) for i, x in enumerate(xs)})


def pairs(*ps):
    return frozenset(frozenset(p) for p in ps)


def test_metric_validation():
    with pytest.raises(MetricError):
        MetricInstance()
    with pytest.raises(MetricError):
        MetricInstance(matrix={0: {1: 5, 2: 1}, 1: {0: 5, 2: 1}, 2: {0: 1, 1: 1}})
    with pytest.raises(MetricError):
        MetricInstance(coords={0: (0, 0), 1: (0, 0)})
    m = line(0, 1, 4)
    assert m.extent() == (1, 4) and m.aspect_ratio == 4


def test_second_vertex_gives_single_edge():
    t = FullyDynamicMST(line(0, 2))
    t.arrive(0)
    s = t.arrive(1)
    assert s.edges == pairs((0, 1)) and s.recourse == 1


def middle_path():
    # vertex 0 sits between 1 and 2, and its edges are appended first
    t = FullyDynamicSteiner(line(1, 0, 2))
    for v in (0, 1, 2):
        t.arrive(v)
    assert t.steps[-1].edges == pairs((0, 1), (0, 2))
    return t


def test_path_shortcut_on_degree_two_departure():
    t = middle_path()
    s = t.depart(0)
    # the shortcut edge replaces both edges through 0: length 2 = 1 + 1
    assert s.edges == pairs((1, 2))
    assert t.cost() == t.metric.dist(0, 1) + t.metric.dist(0, 2)
    assert 0 not in t.live


def test_leaf_departure_deletes_vertex():
    t = middle_path()
    s = t.depart(1)
    assert 1 not in t.live and s.edges == pairs((0, 2)) and s.recourse == 1


def test_greedy_keeps_a_path_within_gamma():
    # (0,2) precedes the shorter (1,2); halving the value is not a gamma-move
    t = FullyDynamicMST(line(0, 1, 2), oracle=True)
    for v in (0, 1, 2):
        s = t.arrive(v)
    assert s.edges == pairs((0, 1), (0, 2)) and s.cost == 3 and s.opt_cost == 2


def test_chain_of_two_steiner_vertices_collapses():
    # labels decrease along the line, so each arrival attaches to its neighbour
    t = FullyDynamicSteiner(line(3, 2, 1, 0))
    for v in (3, 2, 1, 0):
        t.arrive(v)
    assert t.steps[-1].edges == pairs((3, 2), (2, 1), (1, 0))
    spec = GeneralH(PowerLaw.for_costs(t.dmax, t.dmin))
    phi = evaluate(spec, t.engine.state())
    t.depart(2)
    assert t.steps[-1].edges == pairs((3, 1), (1, 0))
    t.depart(1)
    assert t.steps[-1].edges == pairs((0, 3))
    assert evaluate(spec, t.engine.state()) <= phi * (1 + 1e-9)
    assert all(a.passed for a in t.ledger.audits if a.event == "cleanup")


def test_no_steiner_vertices_means_noop_cleanup():
    t = FullyDynamicSteiner(line(0, 1))
    t.arrive(0)
    t.arrive(1)
    assert t.clean_steiner() == 0


def test_star_steiner_point_retained():
    # centre "0" is sorted first so every leaf's edge to it is appended first
    d = {p: {} for p in "0abc"}
    for p, q in itertools.combinations("0abc", 2):
        w = 1 if "0" in (p, q) else 2
        d[p][q] = d[q][p] = w
    t = FullyDynamicSteiner(MetricInstance(matrix=d), oracle=True)
    for v in "0abc":
        t.arrive(v)
    s = t.depart("0")
    # the centre keeps degree 3 and stays as a Steiner vertex
    assert "0" in t.steiner_vertices and s.cost == 3 == s.opt_cost


def test_bad_events():
    t = FullyDynamicSteiner(line(0, 1))
    t.arrive(0)
    with pytest.raises(ValueError):
        t.arrive(0)
    with pytest.raises(ValueError):
        t.arrive(7)
    with pytest.raises(ValueError):
        t.depart(1)


@pytest.mark.parametrize("seed", range(6))
def test_random_mst_is_gamma_competitive(seed):
    rnd = random.Random(seed)
    m = MetricInstance(coords={i: (rnd.random(), rnd.random()) for i in range(7)})
    t = FullyDynamicMST(m, oracle=True)
    for v in range(7):
        s = t.arrive(v)
        assert s.cost <= E2 * s.opt_cost
        assert s.opt_cost == exact_mst(m.dist, t.live).cost
    assert t.upfront_recourse <= t.recourse_budget()
    assert t.ledger.passed


@pytest.mark.parametrize("seed", range(6))
def test_random_steiner_is_4gamma_competitive(seed):
    rnd = random.Random(100 + seed)
    m = MetricInstance(coords={i: (rnd.random(), rnd.random()) for i in range(7)})
    t = FullyDynamicSteiner(m, oracle=True)
    live = []
    for step in range(14):
        arrivable = [v for v in range(7) if v not in t.live]
        if live and (not arrivable or rnd.random() < 0.4):
            v = live.pop(rnd.randrange(len(live)))
            s = t.depart(v)
        else:
            v = rnd.choice(arrivable)
            live.append(v)
            s = t.arrive(v)
        assert s.cost <= 4 * E2 * exact_steiner(m.dist, t.terminals, m.points).cost
        for v in t.steiner_vertices:
            assert t.degree(v) >= 3
    assert t.ledger.passed


def test_budget_formula():
    h = PowerLaw.for_costs(10, 1)
    eps = E2 ** h.delta * (1 - h.delta) - 1
    moves = 5 * 10 * h(0.1) / (eps * 1 * h(1))
    assert tree_recourse_budget(5, 2, E2, 1, 10) == pytest.approx(2 * (moves + 7))
