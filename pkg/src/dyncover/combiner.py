"""Best-of-both combiner: junta functions are bucketed by arity in powers of
two and handled by one randomized junta instance per bucket; every other
function goes to a single deterministic general instance.  The output is
the union of the children's solutions."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Hashable, List, Optional

import numpy as np

from .dynamic import CoverConfig, DynamicCover, E2, Event
from .engine import Mode
from .functions import ActiveSet, GroundSet, Junta, SubmodularFunction, as_rational
from .oracles import brute_force_cover, offline_greedy
from .rjunta import JuntaCover

GENERAL = "general"


def bucket_count(total, fmin) -> int:
    """Number of junta buckets: ``ceil(log2 log2 (f(N)/fmin))`` (0 when the
    ratio is at most 2)."""
    x = float(total) / float(fmin)
    if x <= 2:
        return 0
    return max(0, math.ceil(math.log2(math.log2(x))))


def combiner_factor(gamma, r, total, fmin) -> float:
    """``(8 + 2 gamma) * max(1, min(r, log2(f(N)/fmin)))``.

    A bucket of arity below ``2^(l+1)`` costs at most ``2^(l+1) OPT`` in
    expectation; the buckets in use sum to at most ``8 min(r, log2(F/fmin))``.
    The general child only receives arity ``>= log2(F/fmin)`` functions and
    costs at most ``gamma (ln(fmax/fmin) + 1) <= 2 gamma log2(F/fmin)`` times OPT.
    """
    lg = math.log2(max(float(total) / float(fmin), 1.0))
    return (8 + 2 * gamma) * max(1.0, min(float(r), lg))


@dataclass
class CombinerStep:
    t: int
    action: str
    fid: Hashable
    child: object
    solution: frozenset
    cost: object
    recourse: int
    child_recourse: int
    cumulative_recourse: int
    cumulative_child_recourse: int
    opt_cost: Optional[object] = None
    factor: Optional[float] = None

    @property
    def competitive_ok(self) -> Optional[bool]:
        if self.opt_cost is None:
            return None
        return Fraction(self.cost) <= Fraction(self.factor) * Fraction(self.opt_cost)


class BucketRouter:
    """Routes every event to exactly one child.

    Parameters
    ----------
    ground : GroundSet
    total : declared upper bound on ``f(N)`` used to size the buckets
    fmin : declared lower bound on nonzero marginals
    gamma : float, for the general child (cost mode)
    seed : int, seeds the junta children (one spawned stream per bucket)
    oracle : "none" | "greedy" | "brute"
    """

    def __init__(self, ground: GroundSet, total, fmin=1, gamma=E2, seed=0, oracle="none"):
        self.ground = ground
        self.total = as_rational(total)
        self.fmin = as_rational(fmin)
        self.gamma = gamma
        self.levels = bucket_count(self.total, self.fmin)
        streams = np.random.SeedSequence(seed).spawn(max(self.levels, 1))
        self.buckets: Dict[int, JuntaCover] = {
            l: JuntaCover(ground, np.random.default_rng(streams[l])) for l in range(self.levels)}
        self.general = DynamicCover(ground, CoverConfig(Mode.COST, gamma, fmin, potentials=("h",)))
        self.general_used = False
        self.assignment: Dict[Hashable, object] = {}
        self.active = ActiveSet(ground.elements)
        self.oracle = oracle
        self.steps: List[CombinerStep] = []
        self._union = Counter()
        self._cum = 0
        self._child_cum = 0
        self._t = 0

    def level_of(self, g: SubmodularFunction):
        """Bucket index for ``g``: ``floor(log2 arity)`` for juntas below the
        top bucket, otherwise the general child."""
        if not isinstance(g, Junta):
            return GENERAL
        k = len(g.influencers)
        l = 0 if k <= 1 else int(math.floor(math.log2(k)))
        return l if l < self.levels else GENERAL

    def _child_solution(self, child) -> frozenset:
        if child == GENERAL:
            return self.general.solution()
        return frozenset(self.buckets[child].solution)

    def route(self, ev: Event) -> CombinerStep:
        if ev.action == "insert":
            if ev.fid in self.assignment:
                raise KeyError(f"function id {ev.fid!r} is already live")
            child = self.level_of(ev.function)
        else:
            if ev.fid not in self.assignment:
                raise KeyError(f"function id {ev.fid!r} is not live")
            child = self.assignment[ev.fid]
        before = self._child_solution(child)
        if child == GENERAL:
            self.general_used = True
            self.general.step(ev)
        elif ev.action == "insert":
            self.buckets[child].on_arrival(ev.fid, ev.function)
        else:
            self.buckets[child].on_departure(ev.fid)
        after = self._child_solution(child)
        if ev.action == "insert":
            self.assignment[ev.fid] = child
            self.active.insert(ev.fid, ev.function)
        else:
            del self.assignment[ev.fid]
            self.active.delete(ev.fid)

        old_union = frozenset(self._union)
        self._union.subtract(before)
        self._union.update(after)
        self._union = +self._union
        S = frozenset(self._union)
        rec = len(S ^ old_union)
        child_rec = len(before ^ after)
        self._cum += rec
        self._child_cum += child_rec
        row = CombinerStep(self._t, ev.action, ev.fid, child, S, self.ground.cost(S), rec, child_rec,
                           self._cum, self._child_cum)
        f = self.active.function()
        if f.value(S) != f.total:
            raise RuntimeError(f"union infeasible at t={self._t}")
        if self.oracle != "none":
            costs = self.ground.cost_map()
            opt = brute_force_cover(f, costs) if self.oracle == "brute" else offline_greedy(f, costs)
            row.opt_cost = opt.cost
            row.factor = combiner_factor(self.gamma, self.max_arity(), f.total, self.fmin)
        self.steps.append(row)
        self._t += 1
        return row

    def max_arity(self):
        """Largest live junta arity (``inf`` if a non-junta function is live)."""
        r = 1
        for g in self.active.live.values():
            if not isinstance(g, Junta):
                return math.inf
            r = max(r, len(g.influencers))
        return r

    def solution(self) -> frozenset:
        return frozenset(self._union)
