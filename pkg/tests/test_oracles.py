import itertools
import math
import random

import pytest

from dyncover.functions import Coverage, Junta, Modular, Oracle, Sum
from dyncover.oracles import (CapExceeded, brute_force_cover, enumerate_cover, exact_mst,
                              exact_steiner, greedy_ratio_bound, offline_greedy)
from dyncover.trees import MetricInstance

from conftest import random_coverage


def test_zero_function():
    r = brute_force_cover(Oracle(range(3), lambda S: 0), {0: 1, 1: 1, 2: 1})
    assert r.set == frozenset() and r.cost == 0


def test_triangle_hvc():
    edges = [(0, 1), (1, 2), (0, 2)]
    f = Sum([Junta.indicator(e, elements=range(3)) for e in edges], range(3))
    unit = {e: 1 for e in range(3)}
    # by hand: no single vertex touches all three edges, any pair does
    assert brute_force_cover(f, unit).cost == 2
    assert enumerate_cover(f, unit).cost == 2


def test_modular_greedy_is_optimal():
    f = Modular({0: 3, 1: 1, 2: 2})
    costs = {0: 2, 1: 5, 2: 1}
    assert offline_greedy(f, costs).cost == brute_force_cover(f, costs).cost == 8


def test_branch_and_bound_matches_enumeration():
    rnd = random.Random(21)
    for _ in range(150):
        n = rnd.randint(1, 9)
        f = random_coverage(rnd, n, weighted=rnd.random() < 0.5)
        costs = {e: rnd.randint(1, 9) for e in range(n)}
        bb, en = brute_force_cover(f, costs), enumerate_cover(f, costs)
        assert bb.cost == en.cost
        assert f.value(bb.set) == f.total


def test_greedy_within_log_factor():
    rnd = random.Random(22)
    for _ in range(100):
        n = rnd.randint(1, 8)
        f = random_coverage(rnd, n, items=8)
        costs = {e: rnd.randint(1, 5) for e in range(n)}
        if f.total == 0:
            continue
        fmax = max(f.value({e}) for e in range(n))
        opt = brute_force_cover(f, costs).cost
        gr = offline_greedy(f, costs).cost
        assert opt <= gr <= greedy_ratio_bound(fmax, 1) * opt


def test_nested_family_is_tight():
    # two rows of 15 items; four column blocks of 16, 8, 4, 2 items
    row = [set(range(15)), set(range(15, 30))]
    blocks, start = [], 0
    for w in (8, 4, 2, 1):
        blocks.append(set(range(start, start + w)) | set(range(15 + start, 15 + start + w)))
        start += w
    f = Coverage(dict(enumerate(row + blocks)))
    unit = {e: 1 for e in range(6)}
    opt = brute_force_cover(f, unit)
    greedy = offline_greedy(f, unit)
    assert opt.set == {0, 1} and greedy.cost == 4
    assert greedy.cost / opt.cost >= 2


def test_greedy_tie_break_lowest_id():
    f = Coverage({0: {1}, 1: {1}, 2: {1}})
    assert offline_greedy(f, {0: 1, 1: 1, 2: 1}).set == {0}


def test_brute_cap():
    f = Modular({e: 1 for e in range(25)})
    with pytest.raises(CapExceeded):
        brute_force_cover(f, {e: 1 for e in range(25)})


def line(*xs):
    return MetricInstance(coords={i: (x,) for i, x in enumerate(xs)})


def test_two_points():
    m = line(0, 3)
    r = exact_mst(m.dist, [0, 1])
    assert r.cost == 3 and r.set == {frozenset((0, 1))}


def test_collinear_span():
    m = line(0, 1, 5)
    assert exact_mst(m.dist, [0, 1, 2]).cost == 5
    assert exact_steiner(m.dist, [0, 2], [1]).cost == 5


def star_metric():
    # centre c at distance 1 from three leaves pairwise 2 apart
    pts = ["a", "b", "c", "z"]
    d = {p: {} for p in pts}
    for p, q in itertools.combinations(pts, 2):
        w = 1 if "z" in (p, q) else 2
        d[p][q] = d[q][p] = w
    return MetricInstance(matrix=d)


def test_star_metric_steiner_beats_mst():
    m = star_metric()
    T = ["a", "b", "c"]
    st = exact_steiner(m.dist, T, ["z"])
    mst = exact_mst(m.dist, T)
    assert st.cost == 3 < mst.cost == 4


def test_steiner_without_extras_is_mst():
    rnd = random.Random(2)
    for _ in range(20):
        m = MetricInstance(coords={i: (rnd.random(), rnd.random()) for i in range(6)})
        assert exact_steiner(m.dist, range(6)).cost == exact_mst(m.dist, range(6)).cost


def test_mst_against_kruskal_enumeration():
    rnd = random.Random(3)
    m = MetricInstance(coords={i: (rnd.random(), rnd.random()) for i in range(5)})
    pairs = list(itertools.combinations(range(5), 2))
    best = math.inf
    for T in itertools.combinations(pairs, 4):
        parent = list(range(5))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x
        ok = True
        for a, b in T:
            ra, rb = find(a), find(b)
            if ra == rb:
                ok = False
                break
            parent[ra] = rb
        if ok:
            best = min(best, sum(m.dist(a, b) for a, b in T))
    assert exact_mst(m.dist, range(5)).cost == best


def test_steiner_cap():
    m = MetricInstance(coords={i: (i, 0) for i in range(12)})
    with pytest.raises(CapExceeded):
        exact_steiner(m.dist, range(12))
