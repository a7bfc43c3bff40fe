import math
import random
from fractions import Fraction

import pytest

from dyncover.dynamic import (CoverConfig, DynamicCover, Event, competitive_factor, run_trace,
                              trace_fmax)
from dyncover.engine import FminViolation, Mode
from dyncover.functions import Coverage, GroundSet, Junta, Oracle
from dyncover.traces import gen_trace

E2 = math.e ** 2


def hvc_events(rnd, n, T, arity=2):
    """Adversarial-ish HVC stream: random edges, deletions biased to the
    edges most recently covered by a single endpoint."""
    live, events, k = [], [], 0
    for t in range(T):
        if live and rnd.random() < 0.35:
            fid = live.pop(rnd.randrange(len(live)))
            events.append(Event(t, "delete", fid))
        else:
            edge = rnd.sample(range(n), arity)
            events.append(Event(t, "insert", k, Junta.indicator(edge, elements=range(n))))
            live.append(k)
            k += 1
    return events


def test_zero_function_insert():
    dc = DynamicCover(GroundSet([1, 1, 1]))
    s = dc.step(Event(0, "insert", "z", Oracle(range(3), lambda S: 0)))
    assert s.solution == frozenset() and s.recourse == 0


def test_insert_then_delete_restores_function():
    dc = DynamicCover(GroundSet([1, 1, 1]))
    g = Junta.indicator([0, 1], elements=range(3))
    dc.step(Event(0, "insert", "g", g))
    assert dc.solution() & {0, 1}
    s = dc.step(Event(1, "delete", "g"))
    assert s.solution == frozenset() and dc.active.function().total == 0


def test_adversarial_hvc_feasible_every_step():
    rnd = random.Random(8)
    events = hvc_events(rnd, 8, 30)
    dc = DynamicCover(GroundSet([1] * 8))
    live = {}
    for ev in events:
        if ev.action == "insert":
            live[ev.fid] = ev.function
        else:
            del live[ev.fid]
        s = dc.step(ev)
        for g in live.values():
            assert set(g.support) & s.solution


def test_invalid_events_leave_state_unchanged():
    dc = DynamicCover(GroundSet([1, 1]))
    g = Junta.indicator([0, 1], elements=range(2))
    dc.step(Event(0, "insert", "g", g))
    snap = (dc.solution(), list(dc.engine.pi), dc.record.volume, len(dc.record.steps))
    with pytest.raises(KeyError):
        dc.step(Event(1, "delete", "nope"))
    with pytest.raises(KeyError):
        dc.step(Event(1, "insert", "g", g))
    assert snap == (dc.solution(), list(dc.engine.pi), dc.record.volume, len(dc.record.steps))
    with pytest.raises(ValueError):
        Event(2, "insert", "h")
    with pytest.raises(ValueError):
        Event(2, "upsert", "h", g)


def test_unit_mode_rejects_costs():
    with pytest.raises(ValueError):
        DynamicCover(GroundSet([1, 2]), CoverConfig(Mode.UNIT))


def test_declared_fmin_violation():
    g = Coverage({0: {1}, 1: {2}}, weights={1: Fraction(1, 3), 2: 1})
    dc = DynamicCover(GroundSet([1, 1]), CoverConfig(fmin=1))
    with pytest.raises(FminViolation) as err:
        dc.step(Event(0, "insert", "g", g))
    assert err.value.marginal == Fraction(1, 3)


def test_cumulative_recourse_and_upfront():
    rnd = random.Random(4)
    rec = run_trace(GroundSet([1] * 8), hvc_events(rnd, 8, 40))
    assert rec.total_recourse == sum(s.recourse for s in rec.steps)
    assert rec.total_recourse <= rec.upfront_recourse
    assert rec.audits_passed


def test_determinism():
    tr = gen_trace("coverage", seed=3, n=7, ops=25, cost_spread=20)
    cfg = CoverConfig(Mode.COST, oracle="greedy")
    a = run_trace(tr.ground(), tr.cover_events(), cfg)
    b = run_trace(tr.ground(), tr.cover_events(), cfg)
    key = lambda r: [(s.solution, s.cost, s.recourse, s.potentials, s.opt_cost) for s in r.steps]
    assert key(a) == key(b)


def test_competitive_factor_formulas():
    assert competitive_factor(Mode.UNIT, E2, 4, 1) == pytest.approx(E2 * (math.log(4) + 1))
    assert competitive_factor(Mode.COST, E2, 1, 1) == pytest.approx(E2)
    aff = competitive_factor(Mode.AFFINITY, 5, 1, 1, total=8)
    assert aff == pytest.approx(25 * (2 * math.log(8) / math.log(5) + 3) + math.sqrt(5))


def test_trace_fmax():
    ev = [Event(0, "insert", 0, Coverage({0: {1, 2}, 1: {3}})),
          Event(1, "insert", 1, Coverage({0: {5}, 1: {4}})),
          Event(2, "delete", 0)]
    assert trace_fmax(ev, range(2)) == 3


@pytest.mark.parametrize("mode", ["unit", "cost", "affinity"])
def test_runs_with_brute_oracle_are_competitive(mode):
    spread = 1 if mode == "unit" else 10
    tr = gen_trace("coverage", seed=11, n=7, ops=20, cost_spread=spread)
    gamma = 5 if mode == "affinity" else E2
    rec = run_trace(tr.ground(), tr.cover_events(), CoverConfig(mode, gamma, oracle="brute"))
    assert not rec.competitive_failures()
    for s in rec.steps:
        assert s.opt_cost is not None
