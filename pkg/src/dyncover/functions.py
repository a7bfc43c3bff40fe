"""Value-oracle layer: ground sets, the function library, mutual coverage
and exhaustive structural verifiers.

All values are exact rationals (``int`` or :class:`fractions.Fraction`).
Functions are immutable after construction.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Dict, Hashable, Iterable, Mapping, Optional, Sequence, Tuple

VERIFY_CAP = 12


class DomainError(ValueError):
    """Raised when a set refers to elements outside a function's ground set."""


class VerificationCapExceeded(ValueError):
    pass


class DegenerateFunction(ValueError):
    pass


def as_rational(x) -> Rational:
    """Coerce ``x`` to an exact rational (``int`` when integral)."""
    if isinstance(x, bool):
        raise TypeError("booleans are not values")
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        x = Fraction(x)
    elif not isinstance(x, Fraction):
        x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


def _norm(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


# --------------------------------------------------------------------------
# ground set
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GroundSet:
    """Elements ``0..n-1`` with strictly positive rational costs."""

    costs: Tuple[Rational, ...]

    def __post_init__(self):
        raw = self.costs
        if isinstance(raw, Mapping):
            if sorted(raw) != list(range(len(raw))):
                raise ValueError("element ids must be dense integers 0..n-1")
            raw = [raw[e] for e in range(len(raw))]
        costs = tuple(as_rational(c) for c in raw)
        if any(c <= 0 for c in costs):
            raise ValueError("all costs must be strictly positive")
        object.__setattr__(self, "costs", costs)

    @classmethod
    def unit(cls, n: int) -> "GroundSet":
        return cls((1,) * n)

    @property
    def n(self) -> int:
        return len(self.costs)

    @property
    def elements(self) -> range:
        return range(len(self.costs))

    @property
    def cmax(self):
        return max(self.costs)

    @property
    def cmin(self):
        return min(self.costs)

    def cost(self, S: Iterable[int]):
        return sum((self.costs[e] for e in S), 0)

    def cost_map(self) -> Dict[int, Rational]:
        return dict(enumerate(self.costs))


# --------------------------------------------------------------------------
# function library
# --------------------------------------------------------------------------


class SubmodularFunction:
    """Base class for set functions over a finite set of element ids.

    Subclasses implement :meth:`_value` on a frozenset already checked
    against :attr:`elements`.
    """

    kind = "oracle"

    def __init__(self, elements: Iterable[int]):
        self.elements = frozenset(elements)
        self._total = None

    def value(self, S: Iterable[int]) -> Rational:
        S = S if isinstance(S, frozenset) else frozenset(S)
        if not S <= self.elements:
            raise DomainError(f"unknown element ids: {sorted(S - self.elements)}")
        return self._value(S)

    def _value(self, S: frozenset) -> Rational:
        raise NotImplementedError

    __call__ = value

    @property
    def total(self) -> Rational:
        """``f(N)``, cached."""
        if self._total is None:
            self._total = self._value(self.elements)
        return self._total

    def marginal(self, e: int, T: Iterable[int] = ()) -> Rational:
        return marginal(self, e, T)

    def coverage_form(self):
        """Return ``{element: [(item, weight), ...]}`` if this function is a
        weighted coverage function, else ``None``.  Used by :class:`Sum` to
        compile a fast bitmask evaluator."""
        return None

    def is_integer_valued(self) -> bool:
        return False

    def __repr__(self):
        return f"{type(self).__name__}(n={len(self.elements)})"


class Oracle(SubmodularFunction):
    """Wrap an arbitrary callable ``fn(frozenset) -> value``, shifted so the
    empty set has value zero."""

    kind = "oracle"

    def __init__(self, elements: Iterable[int], fn: Callable[[frozenset], object]):
        super().__init__(elements)
        self._fn = fn
        self._offset = as_rational(fn(frozenset()))

    def _value(self, S):
        return _norm(as_rational(self._fn(S)) - self._offset)


class Coverage(SubmodularFunction):
    """``f(S)`` = total weight of the union of the item sets of ``S``.

    Parameters
    ----------
    sets : mapping element -> iterable of items
    weights : optional mapping item -> positive weight (default 1)
    elements : optional ground set; defaults to the keys of ``sets``
    """

    def __init__(self, sets: Mapping[int, Iterable[Hashable]], weights=None, elements=None):
        sets = {int(e): frozenset(items) for e, items in sets.items()}
        super().__init__(elements if elements is not None else sets.keys())
        missing = set(sets) - self.elements
        if missing:
            raise DomainError(f"sets given for unknown elements {sorted(missing)}")
        self.sets = sets
        items = sorted(set().union(*sets.values()), key=repr) if sets else []
        weights = dict(weights or {})
        self.weights = {it: as_rational(weights.get(it, 1)) for it in items}
        if any(w < 0 for w in self.weights.values()):
            raise ValueError("coverage weights must be nonnegative")
        self._index = {it: k for k, it in enumerate(items)}
        self._masks = {e: _mask_of(self._index[it] for it in its) for e, its in sets.items()}
        self._wlist = [self.weights[it] for it in items]
        self._uniform = len(set(self._wlist)) <= 1

    @property
    def kind(self):
        return "coverage" if all(w == 1 for w in self.weights.values()) else "weighted_coverage"

    def _value(self, S):
        m = 0
        for e in S:
            m |= self._masks.get(e, 0)
        return _weigh(m, self._wlist, self._uniform)

    def coverage_form(self):
        return {e: [(it, self.weights[it]) for it in items] for e, items in self.sets.items()}

    def is_integer_valued(self):
        return all(isinstance(w, int) for w in self.weights.values())


class Modular(SubmodularFunction):
    kind = "modular"

    def __init__(self, weights: Mapping[int, object], elements=None):
        self.weights = {int(e): as_rational(w) for e, w in weights.items()}
        if any(w < 0 for w in self.weights.values()):
            raise ValueError("modular weights must be nonnegative")
        super().__init__(elements if elements is not None else self.weights.keys())

    def _value(self, S):
        return _norm(sum((self.weights.get(e, 0) for e in S), 0))

    def coverage_form(self):
        return {e: [(("m", e), w)] for e, w in self.weights.items() if w}

    def is_integer_valued(self):
        return all(isinstance(w, int) for w in self.weights.values())


class GraphicMatroidRank(SubmodularFunction):
    """Rank of an edge set in a graph: ``|V| - #components`` of ``(V, S)``.

    ``edges`` maps element id -> ``(u, v)``.  Only edges with both endpoints
    in ``vertices`` contribute (the rank is taken on the vertex set given).
    """

    kind = "matroid"

    def __init__(self, edges: Mapping[int, Tuple[Hashable, Hashable]], vertices=None, elements=None):
        self.edges = {int(e): tuple(uv) for e, uv in edges.items()}
        super().__init__(elements if elements is not None else self.edges.keys())
        if vertices is None:
            vertices = {x for uv in self.edges.values() for x in uv}
        self.vertices = frozenset(vertices)

    def _value(self, S):
        parent = {}

        def find(x):
            root = x
            while parent.get(root, root) != root:
                root = parent[root]
            while x != root:
                parent[x], x = root, parent.get(x, x)
            return root

        rank = 0
        for e in S:
            uv = self.edges.get(e)
            if uv is None:
                continue
            u, v = uv
            if u not in self.vertices or v not in self.vertices:
                continue
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                rank += 1
        return rank

    def is_integer_valued(self):
        return True


class Junta(SubmodularFunction):
    """A function that depends only on the elements of ``support``.

    ``table`` is either a mapping ``frozenset(subset of support) -> value``
    or a callable on such subsets.  Values are shifted so ``g(empty) = 0``.
    """

    kind = "junta"

    def __init__(self, support: Sequence[int], table, elements=None):
        self.support = tuple(int(u) for u in support)
        if len(set(self.support)) != len(self.support):
            raise ValueError("junta support has repeated elements")
        super().__init__(elements if elements is not None else self.support)
        if not set(self.support) <= self.elements:
            raise DomainError("junta support outside ground set")
        sup = frozenset(self.support)
        self._sup = sup
        raw = {}
        for k in range(len(self.support) + 1):
            for sub in itertools.combinations(self.support, k):
                key = frozenset(sub)
                raw[key] = as_rational(table[key] if isinstance(table, Mapping) else table(key))
        off = raw[frozenset()]
        self.table = {k: _norm(v - off) for k, v in raw.items()}
        self._hitting = None

    @classmethod
    def indicator(cls, support: Sequence[int], elements=None) -> "Junta":
        """``g(S) = 1`` iff ``S`` hits ``support`` (a hyperedge)."""
        j = cls(support, lambda s: 1 if s else 0, elements=elements)
        j._hitting = True
        return j

    @classmethod
    def from_function(cls, f: SubmodularFunction, support: Sequence[int]) -> "Junta":
        return cls(support, lambda s: f.value(s), elements=f.elements)

    @property
    def arity(self) -> int:
        return len(self.support)

    @property
    def influencers(self) -> Tuple[int, ...]:
        """``V_g``: support elements with a nonzero singleton value."""
        return tuple(u for u in self.support if self.table[frozenset((u,))] != 0)

    def _value(self, S):
        return self.table[S & self._sup]

    def restricted_value(self, S: Iterable[int]):
        return self.table[frozenset(S) & self._sup]

    @property
    def is_indicator(self) -> bool:
        if self._hitting is None:
            self._hitting = all(v == (1 if k else 0) for k, v in self.table.items())
        return self._hitting

    def coverage_form(self):
        if self.is_indicator:
            item = ("hit",) + tuple(sorted(self.support))
            return {u: [(item, 1)] for u in self.support}
        return None

    def is_integer_valued(self):
        return all(isinstance(v, int) for v in self.table.values())


class Contraction(SubmodularFunction):
    """``f_T(S) = f(S | T) = f(S u T) - f(T)``."""

    kind = "contraction"

    def __init__(self, f: SubmodularFunction, T: Iterable[int]):
        super().__init__(f.elements)
        self.base = f
        self.T = frozenset(T)
        self._fT = f.value(self.T)

    def _value(self, S):
        return _norm(self.base._value(S | self.T) - self._fT)

    def is_integer_valued(self):
        return self.base.is_integer_valued()


class Sum(SubmodularFunction):
    """Pointwise sum of functions over a common ground set.

    Coverage-like members (coverage, modular, hitting juntas) are compiled
    into one bitmask evaluator; the rest are summed directly.  Values are
    memoised (thread-safe) since engines query the same prefixes repeatedly.
    """

    kind = "sum"
    _MEMO_CAP = 1 << 16

    def __init__(self, functions: Iterable[SubmodularFunction], elements: Iterable[int]):
        super().__init__(elements)
        self.functions = tuple(functions)
        for g in self.functions:
            if not g.elements <= self.elements:
                raise DomainError("summand defined outside the ground set")
        masks: Dict[int, int] = {}
        wlist = []
        index = {}
        rest = []
        for k, g in enumerate(self.functions):
            form = g.coverage_form()
            if form is None:
                rest.append(g)
                continue
            for e, items in form.items():
                for it, w in items:
                    key = (k, it)
                    if key not in index:
                        index[key] = len(wlist)
                        wlist.append(w)
                    masks[e] = masks.get(e, 0) | (1 << index[key])
        self._masks = masks
        self._wlist = wlist
        self._uniform = len(set(wlist)) <= 1
        self._rest = tuple(rest)
        self._memo = {}
        self._lock = threading.Lock()

    def _value(self, S):
        v = self._memo.get(S)
        if v is not None:
            return v
        m = 0
        for e in S:
            m |= self._masks.get(e, 0)
        v = _weigh(m, self._wlist, self._uniform)
        for g in self._rest:
            v += g._value(S & g.elements) if g.elements != self.elements else g._value(S)
        v = _norm(v)
        with self._lock:
            if len(self._memo) < self._MEMO_CAP:
                self._memo[S] = v
        return v

    def is_integer_valued(self):
        return all(g.is_integer_valued() for g in self.functions)


def _mask_of(bits: Iterable[int]) -> int:
    m = 0
    for b in bits:
        m |= 1 << b
    return m


def _weigh(mask: int, wlist, uniform: bool):
    if not mask:
        return 0
    if uniform:
        return _norm(wlist[0] * mask.bit_count())
    total = 0
    k = 0
    while mask:
        if mask & 1:
            total += wlist[k]
        mask >>= 1
        k += 1
    return _norm(total)


# --------------------------------------------------------------------------
# active set
# --------------------------------------------------------------------------


class ActiveSet:
    """The live functions ``G(t)``; :meth:`function` is their sum ``f(t)``."""

    def __init__(self, elements: Iterable[int]):
        self.elements = frozenset(elements)
        self.live: Dict[Hashable, SubmodularFunction] = {}
        self.insertion_order: list = []
        self._sum: Optional[Sum] = None

    def insert(self, fid, g: SubmodularFunction):
        if fid in self.live:
            raise KeyError(f"function id {fid!r} is already live")
        if not g.elements <= self.elements:
            raise DomainError(f"function {fid!r} refers to elements outside the ground set")
        self.live[fid] = g
        self.insertion_order.append(fid)
        self._sum = None

    def delete(self, fid) -> SubmodularFunction:
        if fid not in self.live:
            raise KeyError(f"function id {fid!r} is not live")
        g = self.live.pop(fid)
        self.insertion_order.remove(fid)
        self._sum = None
        return g

    def __contains__(self, fid):
        return fid in self.live

    def __len__(self):
        return len(self.live)

    def function(self) -> Sum:
        if self._sum is None:
            self._sum = Sum((self.live[k] for k in self.insertion_order), self.elements)
        return self._sum

    @property
    def total(self):
        return self.function().total


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------


def value(f: SubmodularFunction, S: Iterable[int]):
    return f.value(S)


def marginal(f: SubmodularFunction, e: int, T: Iterable[int] = ()):
    """``f(e | T) = f(T + e) - f(T)``."""
    T = frozenset(T)
    if e not in f.elements:
        raise DomainError(f"unknown element id {e}")
    return _norm(f.value(T | {e}) - f.value(T))


def mutual_coverage(f: SubmodularFunction, A: Iterable[int], B: Iterable[int], C: Iterable[int] = ()):
    """``I_f(A; B | C) = f_C(A) + f_C(B) - f_C(A u B)``."""
    A, B, C = frozenset(A), frozenset(B), frozenset(C)
    return _norm(f.value(A | C) + f.value(B | C) - f.value(A | B | C) - f.value(C))


@dataclass(frozen=True)
class ValueBounds:
    fmax: Rational
    fmin: Rational

    def __post_init__(self):
        if not (0 < self.fmin <= self.fmax):
            raise ValueError(f"need 0 < fmin <= fmax, got fmin={self.fmin}, fmax={self.fmax}")


def exact_fmin(f: SubmodularFunction, cap: int = VERIFY_CAP):
    """Smallest nonzero marginal ``f(e | S)`` over all ``e`` and ``S``; ``None``
    if every marginal is zero.  Exponential: restricted to small ground sets."""
    vals, elems = _value_table(f, cap)
    best = None
    for mask, fv in enumerate(vals):
        for k in range(len(elems)):
            if mask >> k & 1:
                continue
            d = vals[mask | 1 << k] - fv
            if d and (best is None or d < best):
                best = d
    return None if best is None else _norm(best)


def bounds_of(active, fmin=None) -> ValueBounds:
    """``fmax`` = largest singleton value of ``f(t)``.  ``fmin`` is taken from
    ``fmin`` when given, by exhaustive search on small ground sets, and as 1
    for integer-valued functions otherwise."""
    f = active.function() if isinstance(active, ActiveSet) else active
    fmax = max((f.value((e,)) for e in f.elements), default=0)
    if fmax == 0:
        raise DegenerateFunction("degenerate function: all singleton values are zero")
    if fmin is None:
        if len(f.elements) <= VERIFY_CAP:
            fmin = exact_fmin(f)
        elif f.is_integer_valued():
            fmin = 1
        else:
            raise ValueError("fmin must be declared for large real-valued instances")
    return ValueBounds(_norm(as_rational(fmax)), _norm(as_rational(fmin)))


# --------------------------------------------------------------------------
# verifiers
# --------------------------------------------------------------------------


def _value_table(f: SubmodularFunction, cap: int):
    elems = sorted(f.elements)
    if len(elems) > cap:
        raise VerificationCapExceeded(
            f"verification cap exceeded: {len(elems)} elements > cap {cap}")
    vals = []
    for mask in range(1 << len(elems)):
        vals.append(f.value(frozenset(e for k, e in enumerate(elems) if mask >> k & 1)))
    return vals, elems


def verify_submodular(f: SubmodularFunction, cap: int = VERIFY_CAP) -> bool:
    """Exhaustive check of normalization, monotonicity and submodularity.

    Uses the equivalent local forms ``f(S+e) >= f(S)`` and
    ``f(S+a) + f(S+b) >= f(S+a+b) + f(S)`` over all ``S`` and ``a, b``.
    """
    vals, elems = _value_table(f, cap)
    n = len(elems)
    if vals[0] != 0:
        return False
    for mask in range(1 << n):
        fs = vals[mask]
        free = [k for k in range(n) if not mask >> k & 1]
        for k in free:
            if vals[mask | 1 << k] < fs:
                return False
        for a, b in itertools.combinations(free, 2):
            if vals[mask | 1 << a] + vals[mask | 1 << b] < vals[mask | 1 << a | 1 << b] + fs:
                return False
    return True


def verify_3increasing(f: SubmodularFunction, cap: int = VERIFY_CAP) -> bool:
    """Exhaustive check that every third-order derivative is nonnegative,
    i.e. ``I(x;y|S) - I(x;y|S+z) >= 0`` for distinct ``x, y, z`` not in ``S``."""
    vals, elems = _value_table(f, cap)
    n = len(elems)
    for x, y, z in itertools.combinations(range(n), 3):
        bx, by, bz = 1 << x, 1 << y, 1 << z
        xyz = bx | by | bz
        for mask in range(1 << n):
            if mask & xyz:
                continue
            d = (vals[mask | xyz] - vals[mask | bx | by] - vals[mask | bx | bz] - vals[mask | by | bz]
                 + vals[mask | bx] + vals[mask | by] + vals[mask | bz] - vals[mask])
            if d < 0:
                return False
    return True


def log_ratio(a, b) -> float:
    return math.log(a / b) if a > 0 and b > 0 else 0.0
