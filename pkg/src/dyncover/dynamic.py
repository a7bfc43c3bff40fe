"""Fully-dynamic submodular cover driver.

Insert/delete events update the active set; the permutation engine is
rebuilt and re-stabilized after each one.  Every step records the solution,
its cost, true and upfront recourse, potential values and audit results,
and (optionally) the optimal cost from an oracle together with the
competitive bound that applies to the mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Optional, Sequence

from .engine import ContractViolation, Mode, PermutationEngine, StabilizeResult
from .functions import ActiveSet, GroundSet, SubmodularFunction, as_rational
from .oracles import brute_force_cover, offline_greedy
from .potentials import (AuditParams, PotentialLedger, PowerLaw, affinity_recourse_bound,
                         audit_event, evaluate, h_recourse_bound, insertion_budget,
                         per_move_decrease, shannon_move_bound, spec_by_name,
                         unit_recourse_bound)

E2 = math.e ** 2


@dataclass(frozen=True)
class Event:
    seq: int
    action: str  # "insert" | "delete"
    fid: Hashable
    function: Optional[SubmodularFunction] = None

    def __post_init__(self):
        if self.action not in ("insert", "delete"):
            raise ValueError(f"unknown action {self.action!r}")
        if self.action == "insert" and self.function is None:
            raise ValueError("insert events carry a function")


@dataclass
class CoverConfig:
    mode: Mode = Mode.UNIT
    gamma: float = E2
    fmin: object = 1
    fmax: Optional[object] = None
    potentials: Sequence[str] = ("all",)
    oracle: str = "none"  # none | greedy | brute

    def __post_init__(self):
        self.mode = Mode.parse(self.mode)
        self.fmin = as_rational(self.fmin)
        if self.fmax is not None:
            self.fmax = as_rational(self.fmax)
        if self.oracle not in ("none", "greedy", "brute"):
            raise ValueError(f"unknown oracle {self.oracle!r}")


@dataclass
class StepRecord:
    t: int
    action: str
    fid: Hashable
    solution: frozenset
    cost: object
    recourse: int
    cumulative_recourse: int
    upfront_recourse: int
    swaps: int
    gamma_moves: int
    fmax: object
    fmin: object
    potentials: Dict[str, float] = field(default_factory=dict)
    audits_passed: bool = True
    opt_cost: Optional[object] = None
    competitive_factor: Optional[float] = None

    @property
    def ratio(self) -> Optional[float]:
        if self.opt_cost is None:
            return None
        if self.opt_cost == 0:
            return 1.0 if self.cost == 0 else math.inf
        return float(Fraction(self.cost) / Fraction(self.opt_cost))

    @property
    def competitive_ok(self) -> Optional[bool]:
        """``cost <= factor * OPT`` in exact arithmetic (the float factor is
        converted exactly)."""
        if self.opt_cost is None or self.competitive_factor is None:
            return None
        return Fraction(self.cost) <= Fraction(self.competitive_factor) * Fraction(self.opt_cost)


@dataclass
class RunRecord:
    config: CoverConfig
    steps: List[StepRecord] = field(default_factory=list)
    ledgers: Dict[str, PotentialLedger] = field(default_factory=dict)
    volume: object = 0  # sum of g(N) over inserted functions
    params: Optional[AuditParams] = None

    @property
    def total_recourse(self) -> int:
        return self.steps[-1].cumulative_recourse if self.steps else 0

    @property
    def upfront_recourse(self) -> int:
        return self.steps[-1].upfront_recourse if self.steps else 0

    @property
    def gamma_moves(self) -> int:
        return sum(s.gamma_moves for s in self.steps)

    @property
    def audits_passed(self) -> bool:
        return all(l.passed for l in self.ledgers.values())

    def recourse_bound(self) -> float:
        return recourse_bound(self.config.mode, self.volume, self.params)

    def competitive_failures(self) -> List[StepRecord]:
        return [s for s in self.steps if s.competitive_ok is False]


def recourse_bound(mode: Mode, volume, p: AuditParams) -> float:
    """Total recourse guaranteed by the mode's potential argument."""
    mode = Mode.parse(mode)
    if mode is Mode.UNIT:
        return unit_recourse_bound(volume, p.fmin, p.gamma)
    if mode is Mode.COST:
        return h_recourse_bound(volume, p.fmin, p.gamma, p.cmax, p.cmin,
                                PowerLaw.for_costs(p.cmax, p.cmin))
    return affinity_recourse_bound(volume, p.fmin, p.gamma)


def shannon_recourse_bound(volume, p: AuditParams) -> float:
    """Upfront recourse allowed by the Shannon potential (two per move)."""
    return 2 * shannon_move_bound(volume, p.fmin, p.gamma, p.cmax, p.cmin, p.fmax)


def competitive_factor(mode: Mode, gamma, fmax, fmin, total=None) -> float:
    """Factor ``C`` with ``cost <= C * OPT``.

    Unit and cost modes: ``gamma * (ln(fmax/fmin) + 1)``.  Affinity mode:
    ``gamma^2 * (2 ln(f(N)/fmin) / ln gamma + 3) + sqrt(gamma)``, i.e.
    ``gamma^2`` per value level times the number of levels between
    ``fmin / gamma`` and ``f(N)^2 / fmin`` (per unit ``OPT^2``) plus the
    ``sqrt(gamma)`` extremes term.
    """
    mode = Mode.parse(mode)
    if mode is Mode.AFFINITY:
        F = float(total if total is not None else fmax)
        return gamma ** 2 * (2 * math.log(max(F / float(fmin), 1.0)) / math.log(gamma) + 3) \
            + math.sqrt(gamma)
    return gamma * (math.log(float(fmax) / float(fmin)) + 1)


class DynamicCover:
    """Algorithm driver over a fixed ground set.

    Parameters
    ----------
    ground : GroundSet
    config : CoverConfig
    """

    def __init__(self, ground: GroundSet, config: Optional[CoverConfig] = None):
        self.ground = ground
        self.config = config or CoverConfig()
        cfg = self.config
        costs = ground.cost_map()
        if cfg.mode is Mode.UNIT and any(c != 1 for c in costs.values()):
            raise ValueError("unit mode requires unit costs")
        self.active = ActiveSet(ground.elements)
        self.engine = PermutationEngine(self.active.function(), costs, cfg.mode, cfg.gamma,
                                        fmin=cfg.fmin)
        fmax = cfg.fmax if cfg.fmax is not None else cfg.fmin
        self.params = AuditParams(gamma=float(cfg.gamma), fmin=float(cfg.fmin),
                                  cmax=float(ground.cmax), cmin=float(ground.cmin),
                                  fmax=float(fmax))
        specs = []
        for name in cfg.potentials:
            for s in spec_by_name(name, cfg.mode, cfg.gamma, ground.cmax, ground.cmin, fmax):
                if s not in specs:
                    specs.append(s)
        self.specs = specs
        self.record = RunRecord(cfg, params=self.params)
        self.record.ledgers = {s.name: PotentialLedger(s, self.params) for s in specs}
        self._t = 0
        self._solution = frozenset()
        self._cum = 0
        self._upfront = 0

    # ------------------------------------------------------------------

    def _audit(self, kind, before, after, g_total=0) -> bool:
        ok = True
        for s in self.specs:
            a = audit_event(s, before, after, kind, self.params, g_total)
            self.record.ledgers[s.name].record(a, g_total)
            ok &= a.passed
        return ok

    def _move_cap(self, phi_before: float, g_total) -> Optional[int]:
        """Ten times the number of gamma-moves the primary potential allows."""
        if not self.specs:
            return None
        s = self.specs[0]
        dec = per_move_decrease(s, self.params)
        if not dec > 0:
            return None
        budget = phi_before + insertion_budget(s, g_total, self.params)
        return int(10 * budget / dec) + 10

    def step(self, ev: Event) -> StepRecord:
        """Apply one event, restabilize and record the result.  Invalid
        events raise before any state changes."""
        eng = self.engine
        if ev.action == "insert":
            g_total = as_rational(ev.function.total)
            before = eng.state() if self.specs else None
            self.active.insert(ev.fid, ev.function)
            self.record.volume += g_total
        else:
            g_total = 0
            before = eng.state() if self.specs else None
            self.active.delete(ev.fid)
        joins0 = eng.joins
        f = self.active.function()
        eng.rebuild(f)
        ok = True
        if self.specs:
            after = eng.state()
            ok &= self._audit(ev.action, before, after, g_total)
            phi = evaluate(self.specs[0], after)
            cap = self._move_cap(phi, g_total)
        else:
            cap = None

        flags = []

        def observer(kind, b, a, detail):
            flags.append(self._audit(kind, b, a))

        res: StabilizeResult = eng.stabilize(observer if self.specs else None, cap=cap)
        ok &= all(flags)

        S = eng.solution()
        if f.value(S) != f.total:
            raise ContractViolation(f"infeasible solution at t={self._t}: f(S)={f.value(S)} < {f.total}")
        rec = len(S ^ self._solution)
        self._cum += rec
        self._solution = S
        self._upfront += 2 * (eng.joins - joins0)

        fmax = max((f.value((e,)) for e in f.elements), default=0)
        state = eng.state()
        pots = {s.name: evaluate(s, state) for s in self.specs}
        row = StepRecord(
            t=self._t, action=ev.action, fid=ev.fid, solution=S,
            cost=self.ground.cost(S), recourse=rec, cumulative_recourse=self._cum,
            upfront_recourse=self._upfront, swaps=res.swaps, gamma_moves=res.gamma_moves,
            fmax=fmax, fmin=self.config.fmin, potentials=pots, audits_passed=ok)
        if self.config.oracle != "none" and f.total > 0:
            self._attach_opt(row, f)
        elif f.total == 0:
            row.opt_cost = 0
            row.competitive_factor = 1.0
        self.record.steps.append(row)
        self._t += 1
        return row

    def _attach_opt(self, row: StepRecord, f: SubmodularFunction):
        costs = self.ground.cost_map()
        if self.config.oracle == "brute":
            opt = brute_force_cover(f, costs)
        else:
            opt = offline_greedy(f, costs)
        row.opt_cost = opt.cost
        row.competitive_factor = competitive_factor(self.config.mode, self.config.gamma,
                                                    row.fmax, row.fmin, f.total)

    def solution(self) -> frozenset:
        return self._solution


def trace_fmax(events: Iterable[Event], elements) -> object:
    """Largest singleton value of ``f(t)`` over all ``t`` of a trace."""
    active = ActiveSet(elements)
    best = 0
    for ev in events:
        if ev.action == "insert":
            active.insert(ev.fid, ev.function)
        else:
            active.delete(ev.fid)
        f = active.function()
        best = max([best] + [f.value((e,)) for e in f.elements])
    return best


def run_trace(ground: GroundSet, events: Sequence[Event], config: Optional[CoverConfig] = None) -> RunRecord:
    """Run every event in order.  When no ``fmax`` is declared it is taken
    from the whole trace (the Shannon potential needs a global value)."""
    config = config or CoverConfig()
    if config.fmax is None:
        fm = trace_fmax(events, ground.elements)
        config = CoverConfig(config.mode, config.gamma, config.fmin, fm or config.fmin,
                             config.potentials, config.oracle)
    dc = DynamicCover(ground, config)
    for ev in events:
        dc.step(ev)
    return dc.record
