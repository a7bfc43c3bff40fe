"""Permutation local search: the ordering ``pi``, its cached marginal values
under a selectable mode, swaps and gamma-moves.

Positions are 0-based throughout.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .functions import SubmodularFunction, as_rational

MOVE_CAP_ENV = "DYNCOVER_MOVE_CAP"
DEFAULT_MOVE_CAP = 100_000


class Mode(str, enum.Enum):
    UNIT = "unit"          # mff = f(x | prefix)
    COST = "cost"          # mff = f(x | prefix) / c(x)
    AFFINITY = "affinity"  # mff = sum_j I(x, psi_j | prefix u psi_<j) / (c(x) c(psi_j))

    @classmethod
    def parse(cls, m) -> "Mode":
        return m if isinstance(m, cls) else cls(str(m).lower())


class ContractViolation(RuntimeError):
    pass


class NonTermination(RuntimeError):
    """Circuit breaker tripped: more moves than the potential argument allows."""

    def __init__(self, msg, dump=None):
        super().__init__(msg)
        self.dump = dump or {}


class FminViolation(RuntimeError):
    def __init__(self, element, marginal, fmin):
        super().__init__(f"declared fmin={fmin} violated: element {element} has marginal {marginal}")
        self.element = element
        self.marginal = marginal
        self.fmin = fmin


def _div(a, b):
    if b == 1:
        return a
    q = Fraction(a) / b
    return q.numerator if q.denominator == 1 else q


@dataclass(frozen=True)
class GammaMove:
    element: int
    from_pos: int
    to_pos: int
    new_mff: object


@dataclass(frozen=True)
class PermutationState:
    """Immutable snapshot of an engine, as consumed by the potentials."""

    pi: Tuple[int, ...]
    mff: Mapping[int, object]
    marginal: Mapping[int, object]
    costs: Mapping[int, object]
    mode: Mode
    psi: Optional[Tuple[int, ...]] = None
    affinity: Optional[Mapping[int, Tuple]] = None

    def solution(self) -> frozenset:
        return frozenset(e for e in self.pi if self.mff[e] > 0)

    def mff_vector(self) -> Tuple:
        return tuple(self.mff[e] for e in self.pi)


@dataclass
class StabilizeResult:
    moves: List[tuple] = field(default_factory=list)
    swaps: int = 0
    gamma_moves: int = 0
    reorders: int = 0
    recourse: int = 0


Observer = Callable[[str, PermutationState, PermutationState, object], None]


class PermutationEngine:
    """Maintains ``pi`` and ``mff_pi`` for a monotone submodular ``f``.

    Parameters
    ----------
    f : SubmodularFunction
        current function; replace it with :meth:`rebuild`.
    costs : mapping element -> positive rational
    mode : Mode or str
    gamma : number > 1
    order : optional initial permutation (default: element ids ascending;
        cost order for the affinity mode)
    fmin : optional declared lower bound on nonzero marginals; every marginal
        the engine computes is checked against it.
    """

    def __init__(self, f: SubmodularFunction, costs: Mapping[int, object], mode=Mode.UNIT,
                 gamma=7.38905609893065, order: Optional[Sequence[int]] = None, fmin=None):
        self.mode = Mode.parse(mode)
        if not gamma > 1:
            raise ValueError("gamma must exceed 1")
        self.gamma = gamma
        self.costs: Dict[int, object] = {int(e): as_rational(c) for e, c in costs.items()}
        if any(c <= 0 for c in self.costs.values()):
            raise ValueError("costs must be positive")
        self.fmin = None if fmin is None else as_rational(fmin)
        self.f = f
        self._refresh_psi()
        if order is None:
            order = self.psi if self.mode is Mode.AFFINITY else sorted(self.costs)
        order = [int(e) for e in order]
        if sorted(order) != sorted(self.costs):
            raise ValueError("initial order must be a permutation of the costed elements")
        self.pi: List[int] = order
        self.mff: Dict[int, object] = {}
        self.marg: Dict[int, object] = {}
        self.aff: Dict[int, Tuple] = {}
        self.joins = 0
        self.leaves = 0
        self._recompute(0, len(self.pi) - 1)

    # ------------------------------------------------------------------
    # bookkeeping
    # ------------------------------------------------------------------

    def _refresh_psi(self):
        self.psi = tuple(sorted(self.costs, key=lambda e: (self.costs[e], e)))
        self._psi_cost = tuple(self.costs[e] for e in self.psi)

    @property
    def n(self) -> int:
        return len(self.pi)

    def position(self, e: int) -> int:
        return self.pi.index(e)

    def _check_fmin(self, e, m):
        if self.fmin is not None and m and m < self.fmin:
            raise FminViolation(e, m, self.fmin)

    def _row(self, x: int, prefix: frozenset) -> Tuple:
        """Affinity row ``I(x, psi_j | prefix u psi_<j)`` for all ``j``."""
        f = self.f
        acc = set(prefix)
        A = [f.value(frozenset(acc))]
        B = [f.value(frozenset(acc | {x}))]
        for y in self.psi:
            acc.add(y)
            A.append(f.value(frozenset(acc)))
            B.append(f.value(frozenset(acc | {x})))
        return tuple(B[j] + A[j + 1] - A[j] - B[j + 1] for j in range(len(self.psi)))

    def _mff_from(self, x: int, m, prefix: frozenset):
        if self.mode is Mode.UNIT:
            return m, None
        if self.mode is Mode.COST:
            return _div(m, self.costs[x]), None
        if not m:
            return 0, (0,) * len(self.psi)
        row = self._row(x, prefix)
        cx = self.costs[x]
        total = sum((_div(v, cx * c) for v, c in zip(row, self._psi_cost) if v), 0)
        return (total.numerator if isinstance(total, Fraction) and total.denominator == 1 else total), row

    def _recompute(self, lo: int, hi: int) -> int:
        """Recompute cached values at positions ``lo..hi``; return the number
        of elements crossing the zero boundary."""
        if self.n == 0 or hi < lo:
            return 0
        prefix = set(self.pi[:lo])
        fp = self.f.value(frozenset(prefix))
        changed = 0
        for i in range(lo, hi + 1):
            x = self.pi[i]
            fx = self.f.value(frozenset(prefix | {x}))
            m = fx - fp
            self._check_fmin(x, m)
            old = self.mff.get(x, 0)
            mff, row = self._mff_from(x, m, frozenset(prefix))
            self.marg[x] = m
            self.mff[x] = mff
            if row is not None:
                self.aff[x] = row
            if (old > 0) != (mff > 0):
                changed += 1
                if mff > 0:
                    self.joins += 1
                else:
                    self.leaves += 1
            prefix.add(x)
            fp = fx
        return changed

    # ------------------------------------------------------------------
    # public operations
    # ------------------------------------------------------------------

    def rebuild(self, f: Optional[SubmodularFunction] = None) -> int:
        """Recompute every cached value (optionally for a new function)."""
        if f is not None:
            self.f = f
        return self._recompute(0, self.n - 1)

    def solution(self) -> frozenset:
        return frozenset(e for e in self.pi if self.mff[e] > 0)

    def state(self) -> PermutationState:
        return PermutationState(
            pi=tuple(self.pi), mff=dict(self.mff), marginal=dict(self.marg),
            costs=dict(self.costs), mode=self.mode,
            psi=self.psi if self.mode is Mode.AFFINITY else None,
            affinity=dict(self.aff) if self.mode is Mode.AFFINITY else None)

    def find_swap(self) -> Optional[int]:
        """First position ``i`` with ``mff(pi[i]) > mff(pi[i-1])``."""
        mff, pi = self.mff, self.pi
        for i in range(1, len(pi)):
            if mff[pi[i]] > mff[pi[i - 1]]:
                return i
        return None

    def apply_swap(self, i: int) -> int:
        if not (1 <= i < self.n) or not self.mff[self.pi[i]] > self.mff[self.pi[i - 1]]:
            raise ContractViolation(f"illegal swap at position {i}")
        self.pi[i - 1], self.pi[i] = self.pi[i], self.pi[i - 1]
        return self._recompute(i - 1, i)

    def candidate_mff(self, u: int, p: int):
        """Value ``u`` would get if moved to position ``p`` (ahead of its
        current position)."""
        prefix = frozenset(self.pi[:p])
        m = self.f.value(prefix | {u}) - self.f.value(prefix)
        self._check_fmin(u, m)
        return self._mff_from(u, m, prefix)[0]

    def _upper(self, u):
        top = self.f.value((u,))
        if self.mode is Mode.UNIT:
            return top
        if self.mode is Mode.COST:
            return _div(top, self.costs[u])
        return _div(top, self.costs[u] * self._psi_cost[0])

    def _legal(self, new, worst) -> bool:
        if not new > 0:
            return False
        if worst == 0:
            return True
        return Fraction(new) / Fraction(worst) >= self.gamma

    def find_gamma_move(self) -> Optional[GammaMove]:
        """Exhaustive scan: movers from tail to head, targets from head to
        tail; returns the first legal move."""
        pi, mff, f = self.pi, self.mff, self.f
        n = len(pi)
        prefix_vals = None
        for q in range(n - 1, 0, -1):
            u = pi[q]
            # worst[p] = max mff over positions p..q-1
            worst = [0] * q
            run = 0
            for p in range(q - 1, -1, -1):
                v = mff[pi[p]]
                if v > run:
                    run = v
                worst[p] = run
            ub = self._upper(u)
            if not ub > 0:
                continue
            if prefix_vals is None:
                prefix_vals = [f.value(frozenset(pi[:k])) for k in range(n + 1)]
            for p in range(q):
                if worst[p] and Fraction(ub) / Fraction(worst[p]) < self.gamma:
                    continue
                prefix = frozenset(pi[:p])
                m = f.value(prefix | {u}) - prefix_vals[p]
                self._check_fmin(u, m)
                if not m:
                    break  # marginals only shrink further back
                new = self._mff_from(u, m, prefix)[0]
                if self._legal(new, worst[p]):
                    return GammaMove(u, q, p, new)
        return None

    def apply_gamma_move(self, mv: GammaMove) -> int:
        q, p, u = mv.from_pos, mv.to_pos, mv.element
        if not (0 <= p < q < self.n) or self.pi[q] != u:
            raise ContractViolation(f"stale or malformed move {mv}")
        new = self.candidate_mff(u, p)
        worst = max(self.mff[self.pi[k]] for k in range(p, q))
        if new != mv.new_mff or not self._legal(new, worst):
            raise ContractViolation(f"illegal gamma-move {mv}")
        del self.pi[q]
        self.pi.insert(p, u)
        return self._recompute(p, q)

    def normalize_tail(self) -> bool:
        """Reorder the zero-valued suffix of ``pi`` into cost order.

        Zero-valued elements are not in the solution and do not affect the
        values of the positive ones, so this is free; it keeps expensive
        zero elements from preceding cheaper ones, which the affinity
        potential's insertion bound relies on.
        """
        k = self.n
        while k > 0 and self.mff[self.pi[k - 1]] == 0:
            k -= 1
        rank = {e: r for r, e in enumerate(self.psi)}
        tail = sorted(self.pi[k:], key=rank.__getitem__)
        if tail == self.pi[k:]:
            return False
        self.pi[k:] = tail
        self._recompute(k, self.n - 1)
        return True

    def stabilize(self, observer: Optional[Observer] = None, cap: Optional[int] = None,
                  after_move: Optional[Callable[[], None]] = None) -> StabilizeResult:
        """Apply swaps (first) and gamma-moves until neither exists.

        ``observer(kind, before, after, detail)`` is called around every move
        when given.  ``after_move`` runs after each move (used by the Steiner
        tree cleanup).  ``cap`` bounds the number of gamma-moves; the
        environment variable ``DYNCOVER_MOVE_CAP`` overrides it.
        """
        env = os.environ.get(MOVE_CAP_ENV)
        if env:
            cap = int(env)
        elif cap is None:
            cap = DEFAULT_MOVE_CAP
        swap_cap = (cap + 1) * max(self.n, 2) ** 2 * 4
        res = StabilizeResult()
        while True:
            i = self.find_swap()
            if i is not None:
                before = self.state() if observer else None
                detail = (self.pi[i], i)
                res.recourse += self.apply_swap(i)
                res.swaps += 1
                res.moves.append(("swap",) + detail)
                if observer:
                    observer("swap", before, self.state(), detail)
                if after_move:
                    after_move()
                if res.swaps > swap_cap:
                    self._trip(res, "swap")
                continue
            mv = self.find_gamma_move()
            if mv is not None:
                before = self.state() if observer else None
                res.recourse += self.apply_gamma_move(mv)
                res.gamma_moves += 1
                res.moves.append(("gamma", mv.element, mv.from_pos, mv.to_pos))
                if observer:
                    observer("gamma", before, self.state(), mv)
                if after_move:
                    after_move()
                if res.gamma_moves > cap:
                    self._trip(res, "gamma-move")
                continue
            if self.mode is Mode.AFFINITY:
                before = self.state() if observer else None
                if self.normalize_tail():
                    res.reorders += 1
                    if observer:
                        observer("reorder", before, self.state(), None)
                    continue
            return res

    def _trip(self, res, what):
        dump = {"pi": list(self.pi), "mff": {e: str(v) for e, v in self.mff.items()},
                "recent_moves": res.moves[-20:], "swaps": res.swaps, "gamma_moves": res.gamma_moves}
        raise NonTermination(f"non-termination suspected: {what} cap exceeded", dump)

    # ------------------------------------------------------------------
    # ground-set changes (tree applications)
    # ------------------------------------------------------------------

    def add_elements(self, costs: Mapping[int, object], f: SubmodularFunction) -> int:
        """Append new elements at the tail (in the given order) and switch to ``f``."""
        for e, c in costs.items():
            if e in self.costs:
                raise ValueError(f"element {e} already present")
            c = as_rational(c)
            if c <= 0:
                raise ValueError("costs must be positive")
            self.costs[int(e)] = c
            self.pi.append(int(e))
        self._refresh_psi()
        return self.rebuild(f)

    def remove_elements(self, elems: Iterable[int], f: SubmodularFunction) -> int:
        elems = set(elems)
        changed = 0
        for e in elems:
            if self.mff.get(e, 0) > 0:
                changed += 1
                self.leaves += 1
            self.pi.remove(e)
            del self.costs[e]
            self.mff.pop(e, None)
            self.marg.pop(e, None)
            self.aff.pop(e, None)
        self._refresh_psi()
        return changed + self.rebuild(f)

    def move_element(self, e: int, pos: int):
        """Place ``e`` at ``pos`` without recomputing (caller rebuilds)."""
        self.pi.remove(e)
        self.pi.insert(pos, e)

    # ------------------------------------------------------------------
    # audits
    # ------------------------------------------------------------------

    def fresh_copy(self) -> "PermutationEngine":
        return PermutationEngine(self.f, self.costs, self.mode, self.gamma, order=list(self.pi))

    def audit(self) -> bool:
        """True iff every cached value equals a from-scratch recomputation."""
        ref = self.fresh_copy()
        if ref.mff != self.mff or ref.marg != self.marg:
            return False
        if self.mode is Mode.AFFINITY:
            return all(ref.aff[e] == self.aff[e] for e in self.pi if self.mff[e] > 0)
        return True

    def is_sorted(self) -> bool:
        return self.find_swap() is None


def stable_greedy_violations(engine: PermutationEngine) -> List[Tuple[int, int]]:
    """Exhaustive check of the approximate-greedy condition at a fixed point:
    for every position ``i`` with positive value and every ``j > i``, moving
    ``pi[j]`` to ``i`` must give a value strictly below ``gamma * mff(pi[i])``.
    Returns the violating ``(i, j)`` pairs."""
    bad = []
    pi, mff = engine.pi, engine.mff
    for i in range(len(pi)):
        if not mff[pi[i]] > 0:
            continue
        for j in range(i + 1, len(pi)):
            new = engine.candidate_mff(pi[j], i)
            if Fraction(new) / Fraction(mff[pi[i]]) >= engine.gamma:
                bad.append((i, j))
    return bad
