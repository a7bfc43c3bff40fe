"""Randomized fully-dynamic cover for r-junta functions.

Each live function ``g`` owns a set ``U_g`` of elements it paid for.  While
``g`` is uncovered it is *probed*: one uncovered element of its influencer
set ``V_g`` is sampled with probability proportional to ``1/c`` and charged
to ``g``.  On departure ``U_g`` is dropped and the functions left uncovered
are re-probed in arrival order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Sequence

import numpy as np

from .functions import GroundSet, Junta, SubmodularFunction


class InfeasibleJunta(RuntimeError):
    pass


@dataclass
class JuntaStep:
    t: int
    action: str
    fid: Hashable
    solution: frozenset
    cost: object
    recourse: int
    probes: int


def probe_distribution(candidates: Sequence[int], costs) -> Dict[int, Fraction]:
    """Exact sampling law: ``P(u) = (1/c(u)) / sum_v 1/c(v)``."""
    inv = {u: 1 / Fraction(costs[u]) for u in candidates}
    z = sum(inv.values())
    return {u: w / z for u, w in inv.items()}


class JuntaCover:
    """State of the randomized algorithm (one seeded stream per instance).

    Parameters
    ----------
    ground : GroundSet
    seed : int or numpy Generator
    """

    def __init__(self, ground: GroundSet, seed=0):
        self.ground = ground
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        self.solution: set = set()
        self.responsibility: Dict[Hashable, List[int]] = {}
        self.live: Dict[Hashable, Junta] = {}
        self.arrival_order: List[Hashable] = []
        self.probes = 0
        self.volume = 0
        self.steps: List[JuntaStep] = []
        self._t = 0

    # ------------------------------------------------------------------

    def _covered(self, g: Junta) -> bool:
        return g.restricted_value(self.solution) == g.total

    def probe(self, fid) -> int:
        g = self.live[fid]
        cand = [u for u in g.influencers if u not in self.solution]
        if not cand:
            raise InfeasibleJunta(f"function {fid!r} is uncovered but all its influencers are selected")
        if len(cand) == 1:
            u = cand[0]
        else:
            w = np.array([1.0 / float(self.ground.costs[u]) for u in cand])
            u = cand[int(self.rng.choice(len(cand), p=w / w.sum()))]
        self.solution.add(u)
        self.responsibility[fid].append(u)
        self.probes += 1
        return u

    def _cover(self, fid) -> int:
        added = 0
        g = self.live[fid]
        while not self._covered(g):
            self.probe(fid)
            added += 1
        return added

    def on_arrival(self, fid, g: SubmodularFunction) -> int:
        if not isinstance(g, Junta):
            raise TypeError("the randomized junta algorithm only accepts junta functions")
        if fid in self.live:
            raise KeyError(f"function id {fid!r} is already live")
        if not g.elements <= frozenset(self.ground.elements):
            raise ValueError(f"function {fid!r} refers to elements outside the ground set")
        self.live[fid] = g
        self.responsibility[fid] = []
        self.arrival_order.append(fid)
        self.volume += g.total
        return self._cover(fid)

    def on_departure(self, fid) -> int:
        if fid not in self.live:
            raise KeyError(f"function id {fid!r} is not live")
        before = frozenset(self.solution)
        dropped = self.responsibility.pop(fid)
        del self.live[fid]
        self.arrival_order.remove(fid)
        self.solution.difference_update(dropped)
        if dropped:
            for h in self.arrival_order:
                self._cover(h)
        # a re-probe may pick an element that was just dropped
        return len(before ^ self.solution)

    def step(self, action: str, fid, g: Optional[SubmodularFunction] = None) -> JuntaStep:
        before = frozenset(self.solution)
        n0 = self.probes
        if action == "insert":
            self.on_arrival(fid, g)
        elif action == "delete":
            self.on_departure(fid)
        else:
            raise ValueError(f"unknown action {action!r}")
        S = frozenset(self.solution)
        row = JuntaStep(self._t, action, fid, S, self.ground.cost(S), len(S ^ before), self.probes - n0)
        self.steps.append(row)
        self._t += 1
        return row

    # ------------------------------------------------------------------

    def responsibility_cost(self, u: int):
        """``sum over live g with u in V_g of c(U_g)``."""
        c = self.ground.costs
        return sum((sum((c[v] for v in self.responsibility[fid]), 0)
                    for fid, g in self.live.items() if u in g.influencers), 0)

    def check_invariants(self) -> bool:
        union = set()
        for fid, U in self.responsibility.items():
            if not set(U) <= set(self.live[fid].influencers):
                return False
            union |= set(U)
        return union == self.solution and all(self._covered(g) for g in self.live.values())

    @property
    def cost(self):
        return self.ground.cost(self.solution)
