"""Dynamic metric spanning and Steiner trees on top of the permutation engine.

The ground set is the edge set of the complete graph on the live vertices,
each edge costing its metric length; the function is the graphic-matroid
rank over the live vertices, so an edge has nonzero value exactly when it is
in the tree.  Arriving vertices append their incident edges to the tail of
the permutation.  In the Steiner variant a departing terminal becomes a
Steiner vertex, which is shortcut when it reaches degree two and deleted at
degree one (or zero).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

from .dynamic import E2
from .engine import Mode, PermutationEngine
from .functions import GraphicMatroidRank, as_rational
from .oracles import exact_mst, exact_steiner
from .potentials import (AuditParams, GeneralH, PotentialLedger, PowerLaw, audit_event,
                         epsilon_gamma, evaluate, insertion_budget, per_move_decrease)

TRIANGLE_RTOL = 1e-12


class MetricError(ValueError):
    pass


class MetricInstance:
    """Point set with exact (rational) pairwise distances.

    Either ``coords`` (Euclidean; float distances are converted exactly) or
    an explicit symmetric ``matrix`` keyed by point id.
    """

    def __init__(self, coords: Optional[Mapping[Hashable, Sequence[float]]] = None,
                 matrix: Optional[Mapping[Hashable, Mapping[Hashable, object]]] = None,
                 check: bool = True):
        if (coords is None) == (matrix is None):
            raise MetricError("give exactly one of coords or matrix")
        self.coords = {p: tuple(float(x) for x in c) for p, c in coords.items()} if coords else None
        self._d: Dict[Tuple, object] = {}
        if matrix is not None:
            pts = list(matrix)
            for p, q in itertools.combinations(pts, 2):
                a, b = as_rational(matrix[p][q]), as_rational(matrix[q][p])
                if a != b:
                    raise MetricError(f"asymmetric distance between {p} and {q}")
                self._d[self._key(p, q)] = a
            self.points = pts
        else:
            self.points = list(self.coords)
        for p, q in itertools.combinations(self.points, 2):
            if not self.dist(p, q) > 0:
                raise MetricError(f"distance between {p} and {q} must be positive")
        if check and len(self.points) <= 60:
            self.check_triangle()

    @staticmethod
    def _key(p, q):
        return (p, q) if repr(p) <= repr(q) else (q, p)

    def dist(self, p, q):
        if p == q:
            return 0
        k = self._key(p, q)
        d = self._d.get(k)
        if d is None:
            if self.coords is None:
                raise MetricError(f"unknown pair {p}, {q}")
            d = as_rational(math.dist(self.coords[p], self.coords[q]))
            self._d[k] = d
        return d

    __call__ = dist

    def check_triangle(self):
        for a, b, c in itertools.permutations(self.points, 3):
            lhs, rhs = float(self.dist(a, c)), float(self.dist(a, b)) + float(self.dist(b, c))
            if lhs > rhs * (1 + TRIANGLE_RTOL):
                raise MetricError(f"triangle inequality fails on {a}, {b}, {c}")

    def extent(self) -> Tuple[object, object]:
        ds = [self.dist(p, q) for p, q in itertools.combinations(self.points, 2)]
        return (min(ds), max(ds)) if ds else (1, 1)

    @property
    def aspect_ratio(self) -> float:
        lo, hi = self.extent()
        return float(Fraction(hi) / Fraction(lo))


def tree_recourse_budget(arrivals: int, departures: int, gamma, dmin, dmax) -> float:
    """Upfront recourse allowed by the power-law potential.

    Each arrival raises the potential by at most ``cmax h(1/cmax)`` and each
    gamma-move lowers it by ``eps cmin h(1/cmin)``; every move and every
    arrival or cleanup adds at most one edge, paid twice.
    """
    h = PowerLaw.for_costs(dmax, dmin)
    dmin, dmax = float(dmin), float(dmax)
    eps = epsilon_gamma(gamma, h.delta)
    moves = arrivals * dmax * h(1 / dmax) / (eps * dmin * h(1 / dmin))
    return 2 * (moves + arrivals + departures)


@dataclass
class TreeStep:
    t: int
    action: str
    vertex: Hashable
    edges: frozenset
    cost: object
    recourse: int
    cumulative_recourse: int
    upfront_recourse: int
    gamma_moves: int
    cleanups: int
    opt_cost: Optional[object] = None


class DynamicTree:
    """Shared machinery; :class:`FullyDynamicMST` and
    :class:`FullyDynamicSteiner` fix the allowed events.

    Parameters
    ----------
    metric : MetricInstance
        all points that may ever arrive (fixes ``dmin``/``dmax``).
    gamma : float
    audit : bool
        audit the power-law potential on every event.
    """

    steiner = False

    def __init__(self, metric: MetricInstance, gamma=E2, audit: bool = True, oracle: bool = False):
        self.metric = metric
        self.gamma = gamma
        self.dmin, self.dmax = metric.extent()
        self.terminals: set = set()
        self.steiner_vertices: set = set()
        self.edges: Dict[int, Tuple[Hashable, Hashable]] = {}
        self._next_edge = 0
        self.engine = PermutationEngine(self._function(), {}, Mode.COST, gamma, fmin=1)
        self.spec = GeneralH(PowerLaw.for_costs(self.dmax, self.dmin))
        self.params = AuditParams(gamma=float(gamma), fmin=1.0, cmax=float(self.dmax),
                                  cmin=float(self.dmin))
        self.ledger = PotentialLedger(self.spec, self.params) if audit else None
        self.oracle = oracle
        self.steps: List[TreeStep] = []
        self.arrivals = 0
        self.departures = 0
        self._tree = frozenset()
        self._cum = 0
        self._upfront = 0
        self._cleanups = 0
        self._t = 0

    # ------------------------------------------------------------------

    @property
    def live(self) -> set:
        return self.terminals | self.steiner_vertices

    def _function(self, live=None) -> GraphicMatroidRank:
        live = self.live if live is None else live
        return GraphicMatroidRank(self.edges, vertices=live, elements=self.edges.keys())

    def _audit(self, kind, before, after, g_total=0):
        if self.ledger is not None:
            self.ledger.record(audit_event(self.spec, before, after, kind, self.params, g_total), g_total)

    def tree_edges(self) -> frozenset:
        return self.engine.solution()

    def tree_pairs(self) -> frozenset:
        return frozenset(frozenset(self.edges[e]) for e in self.tree_edges())

    def degree(self, v) -> int:
        return sum(1 for e in self.tree_edges() if v in self.edges[e])

    def cost(self):
        return sum((self.metric.dist(*self.edges[e]) for e in self.tree_edges()), 0)

    # ------------------------------------------------------------------

    def _arrive(self, v):
        if v in self.live:
            raise ValueError(f"vertex {v!r} is already live")
        if v not in self.metric.points:
            raise ValueError(f"vertex {v!r} is not a point of the metric")
        new = {}
        for u in sorted(self.live, key=repr):
            eid = self._next_edge
            self._next_edge += 1
            self.edges[eid] = (u, v)
            new[eid] = self.metric.dist(u, v)
        self.terminals.add(v)
        self.arrivals += 1
        before = self.engine.state() if self.ledger else None
        self.engine.add_elements(new, self._function())
        if self.ledger:
            self._audit("insert", before, self.engine.state(), g_total=1)

    def _remove_vertex(self, v):
        incident = [e for e, (a, b) in self.edges.items() if v in (a, b)]
        self.steiner_vertices.discard(v)
        self.terminals.discard(v)
        for e in incident:
            del self.edges[e]
        self.engine.remove_elements(incident, self._function())

    def clean_steiner(self) -> int:
        """Shortcut degree-2 Steiner vertices, then delete degree <= 1 ones,
        until neither applies.  Returns the number of vertices removed."""
        removed = 0
        while True:
            done = True
            for v in sorted(self.steiner_vertices, key=repr):
                if self.degree(v) == 2:
                    self._shortcut(v)
                    removed += 1
                    done = False
                    break
            if not done:
                continue
            for v in sorted(self.steiner_vertices, key=repr):
                if self.degree(v) <= 1:
                    before = self.engine.state() if self.ledger else None
                    self._remove_vertex(v)
                    if self.ledger:
                        self._audit("cleanup", before, self.engine.state())
                    removed += 1
                    done = False
                    break
            if done:
                self._cleanups += removed
                return removed

    def _shortcut(self, v):
        eng = self.engine
        before = eng.state() if self.ledger else None
        tree = [e for e in eng.pi if eng.mff[e] > 0 and v in self.edges[e]]
        e1, e2 = tree  # in permutation order
        u1 = next(x for x in self.edges[e1] if x != v)
        u2 = next(x for x in self.edges[e2] if x != v)
        short = next(e for e, p in self.edges.items() if set(p) == {u1, u2})
        eng.move_element(short, eng.position(e1))
        self._remove_vertex(v)
        if self.ledger:
            self._audit("cleanup", before, eng.state())

    def _stabilize(self):
        budget = evaluate(self.spec, self.engine.state()) + insertion_budget(self.spec, 1, self.params)
        cap = int(10 * budget / per_move_decrease(self.spec, self.params)) + 10

        def observer(kind, b, a, detail):
            self._audit(kind, b, a)

        after = self.clean_steiner if self.steiner else None
        return self.engine.stabilize(observer if self.ledger else None, cap=cap, after_move=after)

    def _record(self, action, v, moves) -> TreeStep:
        T = self.tree_edges()
        pairs = frozenset(frozenset(self.edges[e]) for e in T)
        old_pairs = frozenset(frozenset(p) for p in self._tree)
        rec = len(pairs ^ old_pairs)
        self._cum += rec
        self._upfront += 2 * len(pairs - old_pairs)
        self._tree = frozenset(tuple(p) for p in pairs)
        self._check_tree()
        row = TreeStep(self._t, action, v, pairs, self.cost(), rec, self._cum, self._upfront,
                       moves, self._cleanups)
        if self.oracle:
            row.opt_cost = self.optimum()
        self.steps.append(row)
        self._t += 1
        return row

    def _check_tree(self):
        live = self.live
        T = [self.edges[e] for e in self.tree_edges()]
        if len(live) and len(T) != len(live) - 1:
            raise RuntimeError("output is not a spanning tree of the live vertices")
        parent = {v: v for v in live}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in T:
            ra, rb = find(a), find(b)
            if ra == rb:
                raise RuntimeError("output contains a cycle")
            parent[ra] = rb

    def optimum(self):
        raise NotImplementedError

    # ------------------------------------------------------------------

    def recourse_budget(self) -> float:
        return tree_recourse_budget(self.arrivals, self.departures, self.gamma, self.dmin, self.dmax)

    @property
    def upfront_recourse(self) -> int:
        return self._upfront

    @property
    def total_recourse(self) -> int:
        return self._cum


class FullyDynamicMST(DynamicTree):
    """Vertices only arrive; the output spans every arrived vertex."""

    def arrive(self, v) -> TreeStep:
        self._arrive(v)
        res = self._stabilize()
        return self._record("arrive", v, res.gamma_moves)

    def competitive_factor(self) -> float:
        return float(self.gamma)

    def optimum(self):
        return exact_mst(self.metric.dist, self.live).cost


class FullyDynamicSteiner(DynamicTree):
    """Vertices arrive and depart; departed vertices linger as Steiner
    vertices while they have degree three or more."""

    steiner = True

    def arrive(self, v) -> TreeStep:
        self._arrive(v)
        self.clean_steiner()
        res = self._stabilize()
        return self._record("arrive", v, res.gamma_moves)

    def depart(self, v) -> TreeStep:
        if v not in self.terminals:
            raise ValueError(f"vertex {v!r} is not a live terminal")
        self.terminals.discard(v)
        self.steiner_vertices.add(v)
        self.departures += 1
        self.clean_steiner()
        res = self._stabilize()
        return self._record("depart", v, res.gamma_moves)

    def competitive_factor(self) -> float:
        return 4 * float(self.gamma)

    def optimum(self):
        return exact_steiner(self.metric.dist, self.terminals, self.metric.points).cost
