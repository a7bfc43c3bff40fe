"""Ground-truth baselines: exhaustive optimal submodular cover, offline
greedy, exact MST and exact Steiner tree."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .functions import SubmodularFunction, as_rational

BRUTE_CAP = 20
STEINER_CAP = 10


class CapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class OptResult:
    set: frozenset
    cost: object
    method: str


def _costs(costs: Mapping, elements):
    return {e: as_rational(costs[e]) for e in elements}


def brute_force_cover(f: SubmodularFunction, costs, cap: int = BRUTE_CAP) -> OptResult:
    """Minimum-cost ``S`` with ``f(S) = f(N)``.

    Depth-first branch and bound over elements in increasing cost order,
    seeded with the greedy solution.  Elements of zero singleton value are
    never needed and are dropped up front.
    """
    target = f.total
    if target == 0:
        return OptResult(frozenset(), 0, "exhaustive")
    useful = [e for e in f.elements if f.value((e,)) > 0]
    if len(useful) > cap:
        raise CapExceeded(f"brute-force cover cap exceeded: {len(useful)} useful elements > {cap}")
    c = _costs(costs, useful)
    order = sorted(useful, key=lambda e: (c[e], e))
    greedy = offline_greedy(f, costs)
    best = [greedy.cost, greedy.set]
    # suffix unions decide whether the remaining elements can still finish
    suffix = [frozenset(order[k:]) for k in range(len(order) + 1)]

    def dfs(k, chosen, cost, val):
        if val == target:
            if cost < best[0]:
                best[0], best[1] = cost, frozenset(chosen)
            return
        if k == len(order) or cost + c[order[k]] >= best[0]:
            return
        if f.value(frozenset(chosen) | suffix[k]) < target:
            return
        e = order[k]
        nv = f.value(frozenset(chosen) | {e})
        if nv > val:
            chosen.append(e)
            dfs(k + 1, chosen, cost + c[e], nv)
            chosen.pop()
        dfs(k + 1, chosen, cost, val)

    dfs(0, [], 0, 0)
    return OptResult(best[1], best[0], "exhaustive")


def enumerate_cover(f: SubmodularFunction, costs, cap: int = 16) -> OptResult:
    """Plain subset enumeration; the reference for :func:`brute_force_cover`."""
    elems = sorted(f.elements)
    if len(elems) > cap:
        raise CapExceeded(f"enumeration cap exceeded: {len(elems)} > {cap}")
    c = _costs(costs, elems)
    target = f.total
    best = None
    for k in range(len(elems) + 1):
        for S in itertools.combinations(elems, k):
            cost = sum((c[e] for e in S), 0)
            if best is not None and cost >= best[0]:
                continue
            if f.value(S) == target:
                best = (cost, frozenset(S))
    return OptResult(best[1], best[0], "exhaustive")


def offline_greedy(f: SubmodularFunction, costs) -> OptResult:
    """Wolsey's greedy: repeatedly take the element maximising marginal/cost,
    ties to the lowest id, until ``f`` is covered."""
    c = _costs(costs, f.elements)
    target = f.total
    S = set()
    val = f.value(frozenset())
    cost = 0
    while val < target:
        best, best_r = None, None
        for e in sorted(f.elements - S):
            m = f.value(frozenset(S | {e})) - val
            if m <= 0:
                continue
            r = Fraction(m) / c[e]
            if best_r is None or r > best_r:
                best, best_r = e, r
        S.add(best)
        cost += c[best]
        val = f.value(frozenset(S))
    return OptResult(frozenset(S), cost, "greedy")


def greedy_ratio_bound(fmax, fmin) -> float:
    """``1 + ln(fmax/fmin)``."""
    return 1 + math.log(float(fmax) / float(fmin))


# --------------------------------------------------------------------------
# trees
# --------------------------------------------------------------------------

Dist = Callable[[Hashable, Hashable], object]


def _mst(vertices: Sequence[Hashable], dist: Dist):
    vertices = list(vertices)
    if len(vertices) <= 1:
        return 0, frozenset()
    inside = {vertices[0]}
    best = {v: (dist(vertices[0], v), vertices[0]) for v in vertices[1:]}
    total = 0
    edges = []
    while best:
        v = min(best, key=lambda x: (best[x][0], repr(x)))
        d, u = best.pop(v)
        total += d
        edges.append(frozenset((u, v)))
        inside.add(v)
        for w in best:
            dw = dist(v, w)
            if dw < best[w][0]:
                best[w] = (dw, v)
    return total, frozenset(edges)


def exact_mst(dist: Dist, vertices: Iterable[Hashable]) -> OptResult:
    """Minimum spanning tree of the complete metric graph on ``vertices``."""
    total, edges = _mst(sorted(vertices, key=repr), dist)
    return OptResult(edges, total, "exhaustive")


def exact_steiner(dist: Dist, terminals: Iterable[Hashable], candidates: Iterable[Hashable] = (),
                  cap: int = STEINER_CAP) -> OptResult:
    """Optimal Steiner tree in a metric: min over subsets of Steiner
    candidates of the MST on terminals plus the subset."""
    terminals = sorted(set(terminals), key=repr)
    extra = sorted(set(candidates) - set(terminals), key=repr)
    if len(terminals) + len(extra) > cap:
        raise CapExceeded(f"Steiner enumeration cap exceeded: {len(terminals) + len(extra)} > {cap}")
    if len(terminals) <= 1:
        return OptResult(frozenset(), 0, "exhaustive")
    best = None
    # a Steiner point of degree <= 2 never helps in a metric, so at most |T|-2 are needed
    for k in range(min(len(extra), max(len(terminals) - 2, 0)) + 1):
        for sub in itertools.combinations(extra, k):
            total, edges = _mst(terminals + list(sub), dist)
            if best is None or total < best[0]:
                best = (total, edges)
    return OptResult(best[1], best[0], "exhaustive")
