"""Potential functions over permutation states and the per-event property
auditors that certify the recourse accounting at runtime.

Four potentials are provided::

    Tsallis(alpha)   sum_i mff_i ** alpha                   (unit mode)
    GeneralH(h)      sum_i c_i * h(mff_i)                   (cost mode)
    Sqrt()           sum_i c_i * sqrt(mff_i)                (affinity mode)
    Shannon(..)      sum_i m_i * ln(c_i / m_i), rescaled    (cost mode)

Potentials are evaluated in double precision over the exact marginal values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Union

from .engine import Mode, PermutationState

RTOL = 1e-9
E = math.e


class IncompatibleMode(ValueError):
    pass


# --------------------------------------------------------------------------
# specs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerLaw:
    """``h(x) = x**(1-delta) / (1-delta)``."""

    delta: float

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    def __call__(self, x: float) -> float:
        return x ** (1 - self.delta) / (1 - self.delta) if x > 0 else 0.0

    def deriv(self, x: float) -> float:
        return x ** (-self.delta)

    @classmethod
    def for_costs(cls, cmax, cmin, cap: float = 0.5) -> "PowerLaw":
        """``delta = 1 / (ln(cmax/cmin) + 1)``, clamped to ``cap`` so that ``h``
        stays well defined (and property iii holds at ``gamma = e^2``) when
        the cost spread is small."""
        d = 1.0 / (math.log(float(cmax) / float(cmin)) + 1.0)
        return cls(min(d, cap))


@dataclass(frozen=True)
class Tsallis:
    alpha: float
    name = "tsallis"
    mode = Mode.UNIT

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    @classmethod
    def for_gamma(cls, gamma) -> "Tsallis":
        return cls(1.0 / math.log(gamma))


@dataclass(frozen=True)
class GeneralH:
    h: PowerLaw
    name = "h"
    mode = Mode.COST


@dataclass(frozen=True)
class Sqrt:
    name = "sqrt"
    mode = Mode.AFFINITY


@dataclass(frozen=True)
class Shannon:
    """Shannon potential with costs scaled by ``1/cmin`` and values by
    ``1/(e*fmax)``; ``cmin`` and ``fmax`` are fixed once per run."""

    cmin: float
    fmax: float
    name = "shannon"
    mode = Mode.COST


PotentialSpec = Union[Tsallis, GeneralH, Sqrt, Shannon]


@dataclass(frozen=True)
class AuditParams:
    gamma: float
    fmin: float
    cmax: float = 1.0
    cmin: float = 1.0
    fmax: float = 1.0


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------


def _check_mode(spec, state: PermutationState):
    if state.mode is not spec.mode:
        raise IncompatibleMode(f"{spec.name} potential requires {spec.mode.value} mode, "
                               f"state is in {state.mode.value} mode")


def evaluate(spec: PotentialSpec, state: PermutationState) -> float:
    _check_mode(spec, state)
    terms = []
    if isinstance(spec, Tsallis):
        for e in state.pi:
            v = state.mff[e]
            if v > 0:
                terms.append(float(v) ** spec.alpha)
    elif isinstance(spec, GeneralH):
        for e in state.pi:
            v = state.mff[e]
            if v > 0:
                terms.append(float(state.costs[e]) * spec.h(float(v)))
    elif isinstance(spec, Sqrt):
        for e in state.pi:
            v = state.mff[e]
            if v > 0:
                terms.append(float(state.costs[e]) * math.sqrt(float(v)))
    elif isinstance(spec, Shannon):
        for e in state.pi:
            m = state.marginal[e]
            if m > 0:
                ms = float(m) / (E * spec.fmax)
                cs = float(state.costs[e]) / spec.cmin
                terms.append(ms * math.log(cs / ms))
    else:
        raise TypeError(f"unknown potential {spec!r}")
    return math.fsum(terms)


def shannon_scaling_ok(spec: Shannon, state: PermutationState) -> bool:
    """Scaled costs >= 1 and scaled values <= 1/e for every element."""
    for e in state.pi:
        if float(state.costs[e]) < spec.cmin * (1 - RTOL):
            return False
        if float(state.marginal[e]) > spec.fmax * (1 + RTOL):
            return False
    return True


# --------------------------------------------------------------------------
# budgets
# --------------------------------------------------------------------------


def epsilon_gamma(gamma: float, delta: float) -> float:
    """Slack in ``x h'(x/gamma) >= (1 + eps) h(x)`` for the power law ``h``."""
    return gamma ** delta * (1 - delta) - 1


def min_gamma_for_delta(delta: float) -> float:
    """Smallest ``gamma`` with ``epsilon_gamma(gamma, delta) >= delta``."""
    return ((1 + delta) / (1 - delta)) ** (1 / delta)


def insertion_budget(spec: PotentialSpec, g_total, p: AuditParams) -> float:
    """Largest allowed potential increase when a function of total value
    ``g_total`` is inserted."""
    g = float(g_total)
    if isinstance(spec, Tsallis):
        return g * p.fmin ** (spec.alpha - 1)
    if isinstance(spec, GeneralH):
        return g / p.fmin * p.cmax * spec.h(p.fmin / p.cmax)
    if isinstance(spec, Sqrt):
        return g / math.sqrt(p.fmin)
    if isinstance(spec, Shannon):
        gs = g / (E * spec.fmax)
        return gs * math.log((p.cmax / spec.cmin) / (p.fmin / (E * spec.fmax)))
    raise TypeError(spec)


def per_move_decrease(spec: PotentialSpec, p: AuditParams) -> float:
    """Guaranteed potential drop of every gamma-move."""
    if isinstance(spec, Tsallis):
        return (p.gamma / (E * math.log(p.gamma)) - 1) * p.fmin ** spec.alpha
    if isinstance(spec, GeneralH):
        return epsilon_gamma(p.gamma, spec.h.delta) * p.cmin * spec.h(p.fmin / p.cmin)
    if isinstance(spec, Sqrt):
        return (math.sqrt(p.gamma) / 2 - 1) * math.sqrt(p.fmin)
    if isinstance(spec, Shannon):
        return p.fmin / (E * spec.fmax) * math.log(p.gamma / E)
    raise TypeError(spec)


def unit_recourse_bound(volume, fmin, gamma) -> float:
    """``2 * (e ln g) / (g - e ln g) * volume / fmin``."""
    el = E * math.log(gamma)
    return 2 * el / (gamma - el) * float(volume) / float(fmin)


def h_recourse_bound(volume, fmin, gamma, cmax, cmin, h: PowerLaw) -> float:
    """``volume / (eps fmin) * (cmax/cmin) * h(fmin/cmax) / h(fmin/cmin)``."""
    fmin, cmax, cmin = float(fmin), float(cmax), float(cmin)
    eps = epsilon_gamma(gamma, h.delta)
    return float(volume) / (eps * fmin) * (cmax / cmin) * h(fmin / cmax) / h(fmin / cmin)


def affinity_recourse_bound(volume, fmin, gamma) -> float:
    """``2 * volume / sqrt(fmin) * 2 / (sqrt(fmin) (sqrt(g) - 2))``."""
    s = math.sqrt(float(fmin))
    return 2 * float(volume) / s * 2 / (s * (math.sqrt(gamma) - 2))


def shannon_move_bound(volume, fmin, gamma, cmax, cmin, fmax) -> float:
    """Number of gamma-moves the Shannon potential allows."""
    fmin = float(fmin)
    return float(volume) / fmin * math.log(float(cmax) / float(cmin) * E * float(fmax) / fmin) \
        / math.log(gamma / E)


# --------------------------------------------------------------------------
# audits
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PropertyAudit:
    potential: str
    event: str
    before: float
    after: float
    bound: float
    passed: bool
    note: str = ""

    @property
    def delta(self) -> float:
        return self.after - self.before


def _within(delta, bound, *scale) -> bool:
    tol = RTOL * max([abs(s) for s in scale] + [abs(bound), 0.0])
    return delta <= bound + tol


def audit_event(spec: PotentialSpec, before: PermutationState, after: PermutationState,
                event: str, params: AuditParams, g_total=0) -> PropertyAudit:
    """Check one atomic event against the matching property.

    ``insert``: increase at most the insertion budget; ``delete``, ``swap``,
    ``reorder``, ``cleanup``: no increase; ``gamma``: decrease at least the
    per-move amount.  Failures are recorded, not raised.
    """
    a = evaluate(spec, before)
    b = evaluate(spec, after)
    if event == "insert":
        bound = insertion_budget(spec, g_total, params)
    elif event == "gamma":
        bound = -per_move_decrease(spec, params)
    elif event in ("delete", "swap", "reorder", "cleanup"):
        bound = 0.0
    else:
        raise ValueError(f"unknown event kind {event!r}")
    ok = _within(b - a, bound, a, b)
    note = ""
    if isinstance(spec, Shannon) and not (shannon_scaling_ok(spec, before) and shannon_scaling_ok(spec, after)):
        ok = False
        note = "scaling preconditions violated (costs below cmin or values above fmax)"
    return PropertyAudit(spec.name, event, a, b, bound, ok, note)


@dataclass
class PotentialLedger:
    """Running audit log for one potential over a run."""

    spec: PotentialSpec
    params: AuditParams
    audits: List[PropertyAudit] = field(default_factory=list)
    insertion_budget_total: float = 0.0
    gamma_moves: int = 0
    initial: float = 0.0

    def record(self, audit: PropertyAudit, g_total=0):
        self.audits.append(audit)
        if audit.event == "insert":
            self.insertion_budget_total += insertion_budget(self.spec, g_total, self.params)
        elif audit.event == "gamma":
            self.gamma_moves += 1

    @property
    def failures(self) -> List[PropertyAudit]:
        return [a for a in self.audits if not a.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def budget_identity_ok(self) -> bool:
        """gamma-moves x per-move decrease <= initial potential + insertion budgets."""
        spent = self.gamma_moves * per_move_decrease(self.spec, self.params)
        avail = self.initial + self.insertion_budget_total
        return spent <= avail * (1 + RTOL) + RTOL


# --------------------------------------------------------------------------
# h property checks
# --------------------------------------------------------------------------


def check_h_properties(h: PowerLaw, gamma: float, lo: float = 1e-6, hi: float = 1e6,
                       points: int = 200) -> Dict[str, bool]:
    """Numerical grid check of the four properties required of ``h``:
    (i) monotone and concave, (ii) ``h(0) = 0``,
    (iii) ``x h'(x/gamma) >= (1 + eps) h(x)`` with ``eps > 0``,
    (iv) ``y h(x/y)`` nondecreasing in ``y``."""
    xs = [lo * (hi / lo) ** (k / (points - 1)) for k in range(points)]
    vals = [h(x) for x in xs]
    mono = all(b >= a for a, b in zip(vals, vals[1:]))
    slopes = [(b - a) / (y - x) for (x, a), (y, b) in zip(zip(xs, vals), zip(xs[1:], vals[1:]))]
    concave = all(s2 <= s1 * (1 + 1e-9) for s1, s2 in zip(slopes, slopes[1:]))
    eps = epsilon_gamma(gamma, h.delta)
    prop3 = eps > 0 and all(x * h.deriv(x / gamma) >= (1 + eps) * h(x) * (1 - 1e-12) for x in xs)
    prop4 = all(
        ys * h(x / ys) <= yb * h(x / yb) * (1 + 1e-12)
        for x in xs[:: points // 10]
        for ys, yb in zip(xs, xs[1:]))
    return {"i": mono and concave, "ii": h(0.0) == 0.0, "iii": prop3, "iv": prop4}


def default_specs(mode: Mode, gamma, cmax=1, cmin=1, fmax=1) -> List[PotentialSpec]:
    """The potentials audited by default for each mode."""
    mode = Mode.parse(mode)
    if mode is Mode.UNIT:
        return [Tsallis.for_gamma(gamma)]
    if mode is Mode.COST:
        return [GeneralH(PowerLaw.for_costs(cmax, cmin)), Shannon(float(cmin), float(fmax))]
    return [Sqrt()]


def spec_by_name(name: str, mode: Mode, gamma, cmax=1, cmin=1, fmax=1) -> List[PotentialSpec]:
    name = name.lower()
    if name == "all":
        return default_specs(mode, gamma, cmax, cmin, fmax)
    if name == "tsallis":
        return [Tsallis.for_gamma(gamma)]
    if name == "h":
        return [GeneralH(PowerLaw.for_costs(cmax, cmin))]
    if name == "sqrt":
        return [Sqrt()]
    if name == "shannon":
        return [Shannon(float(cmin), float(fmax))]
    if name == "none":
        return []
    raise ValueError(f"unknown potential {name!r}")
