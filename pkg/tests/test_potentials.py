import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dyncover.engine import Mode, PermutationEngine, PermutationState
from dyncover.potentials import (AuditParams, GeneralH, IncompatibleMode, PotentialLedger, PowerLaw,
                                 Shannon, Sqrt, Tsallis, audit_event, check_h_properties,
                                 default_specs, epsilon_gamma, evaluate, insertion_budget,
                                 min_gamma_for_delta, per_move_decrease, spec_by_name)

from conftest import random_coverage

E2 = math.e ** 2


def state(mff, costs=None, mode=Mode.UNIT, marginal=None):
    n = len(mff)
    costs = costs or [1] * n
    return PermutationState(pi=tuple(range(n)), mff=dict(enumerate(mff)),
                            marginal=dict(enumerate(marginal or mff)),
                            costs=dict(enumerate(costs)), mode=mode)


def test_tsallis_half_example():
    assert evaluate(Tsallis(0.5), state([4, 1, 0])) == 3


def test_empty_state_is_zero():
    assert evaluate(Tsallis(0.3), state([])) == 0
    assert evaluate(GeneralH(PowerLaw(0.5)), state([], mode=Mode.COST)) == 0


def test_incompatible_mode():
    with pytest.raises(IncompatibleMode):
        evaluate(Sqrt(), state([1]))
    with pytest.raises(IncompatibleMode):
        evaluate(Tsallis(0.5), state([1], mode=Mode.COST))


def test_power_law_h_against_second_implementation():
    rnd = random.Random(3)
    for _ in range(200):
        n = rnd.randint(1, 6)
        costs = [rnd.randint(1, 100) for _ in range(n)]
        marg = [rnd.choice([0, rnd.randint(1, 20)]) for _ in range(n)]
        mff = [Fraction(m, c) for m, c in zip(marg, costs)]
        d = rnd.uniform(0.05, 0.5)
        got = evaluate(GeneralH(PowerLaw(d)), state(mff, costs, Mode.COST, marg))
        # Phi_h = sum c * (m/c)^(1-d) / (1-d)
        want = sum(c * (m / c) ** (1 - d) / (1 - d) for m, c in zip(marg, costs) if m)
        assert got == pytest.approx(want, rel=1e-12)


def test_shannon_against_second_implementation():
    costs, marg = [2, 5, 10], [3, 1, 0]
    mff = [Fraction(m, c) for m, c in zip(marg, costs)]
    st_ = state(mff, costs, Mode.COST, marg)
    got = evaluate(Shannon(2.0, 3.0), st_)
    want = sum((m / (math.e * 3)) * math.log((c / 2) / (m / (math.e * 3))) for m, c in zip(marg, costs) if m)
    assert got == pytest.approx(want, rel=1e-12)
    assert got >= 0


def test_delete_audit_nonincrease():
    p = AuditParams(E2, 1)
    spec = Tsallis.for_gamma(E2)
    ok = audit_event(spec, state([2, 1]), state([1, 1]), "delete", p)
    bad = audit_event(spec, state([1, 1]), state([2, 1]), "delete", p)
    assert ok.passed and not bad.passed and ok.bound == 0


def test_unit_gamma_move_decrease_constant():
    spec = Tsallis.for_gamma(E2)
    p = AuditParams(E2, 1)
    # (gamma / (e ln gamma) - 1) * fmin^alpha with fmin = 1
    assert per_move_decrease(spec, p) == pytest.approx(E2 / (math.e * 2) - 1)


def test_insert_budget_example():
    p = AuditParams(E2, 1)
    assert insertion_budget(Tsallis(0.5), 5, p) == 5
    a = audit_event(Tsallis(0.5), state([0, 0]), state([4, 1]), "insert", p, g_total=5)
    assert a.passed and a.delta == 3
    a = audit_event(Tsallis(0.5), state([0, 0]), state([4, 1]), "insert", p, g_total=2)
    assert not a.passed


def test_unknown_event_kind():
    with pytest.raises(ValueError):
        audit_event(Tsallis(0.5), state([1]), state([1]), "teleport", AuditParams(E2, 1))


def test_tolerance_is_relative():
    p = AuditParams(E2, 1)
    big = 1e12
    a = audit_event(Tsallis(0.5), state([big]), state([big * (1 + 1e-12)]), "swap", p)
    assert a.passed


# --- h properties and the epsilon constant -------------------------------

@pytest.mark.parametrize("ratio", [1, 2, 10, 100, 1000])
def test_power_law_properties_at_e_squared(ratio):
    h = PowerLaw.for_costs(ratio, 1)
    assert h.delta <= 0.5
    assert check_h_properties(h, E2) == {"i": True, "ii": True, "iii": True, "iv": True}


def test_default_delta():
    assert PowerLaw.for_costs(1000, 1).delta == pytest.approx(1 / (math.log(1000) + 1))
    assert PowerLaw.for_costs(1, 1).delta == 0.5


@given(st.floats(0.01, 0.9))
def test_epsilon_reaches_delta_at_threshold_gamma(delta):
    g = min_gamma_for_delta(delta)
    assert epsilon_gamma(g, delta) >= delta * (1 - 1e-9)
    assert epsilon_gamma(g * 1.01, delta) > delta


@given(st.floats(0.01, 0.5))
def test_epsilon_positive_at_e_squared(delta):
    # at gamma = e^2 the slack is positive, though it can fall short of delta
    assert epsilon_gamma(E2, delta) > 0


def test_epsilon_below_delta_at_e_squared():
    d = 1 / (math.log(1000) + 1)
    assert epsilon_gamma(E2, d) < d


def test_ledger_budget_identity():
    spec = Tsallis(0.5)
    led = PotentialLedger(spec, AuditParams(E2, 1))
    led.record(audit_event(spec, state([0]), state([4]), "insert", led.params, 4), 4)
    assert led.passed and led.budget_identity_ok()
    led.gamma_moves = 100
    assert not led.budget_identity_ok()


def test_spec_selection():
    assert [s.name for s in default_specs(Mode.UNIT, E2)] == ["tsallis"]
    assert [s.name for s in default_specs(Mode.COST, E2, 10, 1, 3)] == ["h", "shannon"]
    assert [s.name for s in default_specs(Mode.AFFINITY, 5)] == ["sqrt"]
    assert spec_by_name("none", Mode.UNIT, E2) == []


@pytest.mark.parametrize("mode,spec_of", [
    (Mode.UNIT, lambda c: Tsallis.for_gamma(E2)),
    (Mode.COST, lambda c: GeneralH(PowerLaw.for_costs(max(c.values()), min(c.values())))),
])
def test_swaps_and_moves_pass_audits(mode, spec_of):
    rnd = random.Random(5)
    for _ in range(25):
        n = rnd.randint(3, 7)
        f = random_coverage(rnd, n)
        costs = {e: 1 if mode is Mode.UNIT else rnd.randint(1, 30) for e in range(n)}
        spec = spec_of(costs)
        p = AuditParams(E2, 1, max(costs.values()), min(costs.values()))
        eng = PermutationEngine(f, costs, mode, E2, order=rnd.sample(range(n), n))
        log = []
        eng.stabilize(lambda kind, b, a, d: log.append(audit_event(spec, b, a, kind, p)))
        assert all(a.passed for a in log), [a for a in log if not a.passed]
