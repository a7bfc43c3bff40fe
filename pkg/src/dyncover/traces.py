"""JSON-lines trace files and seeded trace generators.

The first line is a header object; every further line is one event::

    {"type": "header", "kind": "cover", "n": 4, "costs": [1, 1, 2, 3], "fmin": 1}
    {"t": 0, "op": "insert", "id": "g0", "function": {"kind": "junta", "support": [0, 2], "table": "hit"}}
    {"t": 1, "op": "delete", "id": "g0"}

Metric traces use ``"kind": "metric"`` and events ``{"arrive": v, "coords": [x, y]}``
(or ``"row": {u: d}``) and ``{"depart": v}``.  Rationals are written as
integers or ``"p/q"`` strings.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

import numpy as np

from .dynamic import Event
from .functions import (Coverage, GraphicMatroidRank, GroundSet, Junta, Modular,
                        SubmodularFunction, as_rational)
from .trees import MetricInstance


class TraceError(ValueError):
    def __init__(self, msg, line: Optional[int] = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


def rat_to_json(x):
    x = as_rational(x)
    return x if isinstance(x, int) else f"{x.numerator}/{x.denominator}"


# --------------------------------------------------------------------------
# functions <-> JSON
# --------------------------------------------------------------------------


def function_to_json(g: SubmodularFunction) -> dict:
    if isinstance(g, Junta):
        if g.is_indicator:
            return {"kind": "junta", "support": list(g.support), "table": "hit"}
        rows = [[sorted(k), rat_to_json(v)] for k, v in sorted(g.table.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))]
        return {"kind": "junta", "support": list(g.support), "table": rows}
    if isinstance(g, Coverage):
        out = {"kind": "coverage", "sets": {str(e): sorted(items, key=repr) for e, items in sorted(g.sets.items())}}
        if g.kind == "weighted_coverage":
            out["weights"] = [[it, rat_to_json(w)] for it, w in g.weights.items()]
        return out
    if isinstance(g, Modular):
        return {"kind": "modular", "weights": {str(e): rat_to_json(w) for e, w in sorted(g.weights.items())}}
    if isinstance(g, GraphicMatroidRank):
        return {"kind": "matroid", "edges": {str(e): list(uv) for e, uv in sorted(g.edges.items())},
                "vertices": sorted(g.vertices, key=repr)}
    raise TypeError(f"cannot serialize {type(g).__name__}")


def function_from_json(d: dict, elements=None) -> SubmodularFunction:
    kind = d.get("kind")
    if kind == "coverage":
        w = {it if not isinstance(it, list) else tuple(it): x for it, x in d.get("weights", [])}
        sets = {int(e): [it if not isinstance(it, list) else tuple(it) for it in items]
                for e, items in d["sets"].items()}
        return Coverage(sets, w, elements=elements)
    if kind == "modular":
        return Modular({int(e): w for e, w in d["weights"].items()}, elements=elements)
    if kind == "matroid":
        return GraphicMatroidRank({int(e): tuple(uv) for e, uv in d["edges"].items()},
                                  vertices=d.get("vertices"), elements=elements)
    if kind == "junta":
        support = [int(u) for u in d["support"]]
        if d["table"] == "hit":
            return Junta.indicator(support, elements=elements)
        table = {frozenset(int(u) for u in k): v for k, v in d["table"]}
        return Junta(support, table, elements=elements)
    raise ValueError(f"unknown function kind {kind!r}")


# --------------------------------------------------------------------------
# trace files
# --------------------------------------------------------------------------


@dataclass
class Trace:
    header: dict
    events: List[dict] = field(default_factory=list)

    @property
    def kind(self) -> str:
        return self.header.get("kind", "cover")

    def ground(self) -> GroundSet:
        if "costs" in self.header:
            return GroundSet(self.header["costs"])
        return GroundSet.unit(int(self.header["n"]))

    def cover_events(self) -> List[Event]:
        g = self.ground()
        out = []
        for k, ev in enumerate(self.events):
            if ev["op"] == "insert":
                out.append(Event(ev.get("t", k), "insert", ev["id"], function_from_json(ev["function"], g.elements)))
            else:
                out.append(Event(ev.get("t", k), "delete", ev["id"]))
        return out

    def metric(self) -> MetricInstance:
        h = self.header
        if "coords" in h:
            return MetricInstance(coords={int(p): c for p, c in h["coords"].items()})
        if "matrix" in h:
            return MetricInstance(matrix={int(p): {int(q): d for q, d in row.items()}
                                          for p, row in h["matrix"].items()})
        coords, rows = {}, {}
        for ev in self.events:
            if "arrive" in ev:
                v = int(ev["arrive"])
                if "coords" in ev:
                    coords[v] = ev["coords"]
                elif "row" in ev:
                    rows[v] = {int(u): d for u, d in ev["row"].items()}
        if coords:
            return MetricInstance(coords=coords)
        matrix = {v: {} for v in rows}
        for v, row in rows.items():
            for u, d in row.items():
                matrix[v][u] = d
                matrix.setdefault(u, {})[v] = d
        return MetricInstance(matrix=matrix)

    def volume(self):
        """Sum of ``g(N)`` over inserted functions."""
        return sum((f.function.total for f in self.cover_events() if f.action == "insert"), 0)

    # ------------------------------------------------------------------

    def dumps(self) -> str:
        lines = [json.dumps(self.header, sort_keys=True)]
        lines += [json.dumps(ev, sort_keys=True) for ev in self.events]
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "Trace":
        return cls.read_lines(text.splitlines())

    @classmethod
    def read(cls, path) -> "Trace":
        with open(path) as fh:
            return cls.read_lines(fh)

    @classmethod
    def read_lines(cls, lines: Iterable[str]) -> "Trace":
        header = None
        events = []
        for no, line in enumerate(lines, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceError(f"malformed JSON: {exc.msg}", no) from None
            if not isinstance(obj, dict):
                raise TraceError("expected a JSON object", no)
            if header is None:
                if obj.get("type") != "header":
                    raise TraceError("first line must be the header", no)
                header = obj
                continue
            _validate_event(obj, header, no)
            events.append(obj)
        if header is None:
            raise TraceError("empty trace")
        trace = cls(header, events)
        if trace.kind == "cover":
            _validate_cover(trace)
        return trace


def _validate_event(ev: dict, header: dict, no: int):
    if header.get("kind", "cover") == "metric":
        if ("arrive" in ev) == ("depart" in ev):
            raise TraceError("metric events need exactly one of 'arrive' or 'depart'", no)
        return
    op = ev.get("op")
    if op not in ("insert", "delete"):
        raise TraceError(f"unknown op {op!r}", no)
    if "id" not in ev:
        raise TraceError("event without id", no)
    if op == "insert":
        if not isinstance(ev.get("function"), dict):
            raise TraceError("insert without function object", no)
        n = len(header["costs"]) if "costs" in header else int(header.get("n", 0))
        try:
            function_from_json(ev["function"], range(n))
        except Exception as exc:  # report any payload problem with its line
            raise TraceError(f"bad function: {exc}", no) from None


def _validate_cover(trace: Trace):
    live = set()
    for k, ev in enumerate(trace.events):
        no = k + 2
        if ev["op"] == "insert":
            if ev["id"] in live:
                raise TraceError(f"insert of live id {ev['id']!r}", no)
            live.add(ev["id"])
        else:
            if ev["id"] not in live:
                raise TraceError(f"delete of non-live id {ev['id']!r}", no)
            live.remove(ev["id"])


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------


def _costs(rng, n, spread):
    if not spread or spread <= 1:
        return [1] * n
    # log-uniform integers in [1, spread]
    return [int(round(math.exp(rng.uniform(0, math.log(spread))))) for _ in range(n)]


def _ops(rng, ops, make, delete_p=0.35, pattern="random"):
    events, live, k = [], [], 0
    for t in range(ops):
        if live and rng.random() < delete_p:
            fid = live.pop() if pattern == "lifo" else live.pop(int(rng.integers(len(live))))
            events.append({"t": t, "op": "delete", "id": fid})
        else:
            fid = f"g{k}"
            k += 1
            live.append(fid)
            events.append({"t": t, "op": "insert", "id": fid, "function": make()})
    return events


def gen_trace(kind: str, seed: int = 0, **p) -> Trace:
    """Seeded trace generator.

    kinds and parameters (defaults in parentheses):

    ``hvc``: n (10), edges (40, the hyperedge pool), ops (60), arity (2),
    batch (1, hyperedges per function), pattern ("random" or "lifo"),
    cost_spread (1).
    ``coverage``: n (8), ops (40), items (4), per (3 elements per function),
    cost_spread (1).
    ``junta``: n (10), r (3), ops (40), items (3), cost_spread (1).
    ``metric-mst``: points (8).
    ``metric-steiner``: points (8), ops (16).
    """
    rng = np.random.default_rng(seed)
    if kind == "hvc":
        n, E, ops = p.get("n", 10), p.get("edges", 40), p.get("ops", 60)
        arity, batch = p.get("arity", 2), p.get("batch", 1)
        pool = [sorted(int(x) for x in rng.choice(n, size=arity, replace=False)) for _ in range(E)]

        def make():
            picks = [pool[int(i)] for i in rng.choice(E, size=batch, replace=False)]
            if batch == 1:
                return {"kind": "junta", "support": picks[0], "table": "hit"}
            sets = {}
            for j, edge in enumerate(picks):
                for v in edge:
                    sets.setdefault(str(v), []).append(j)
            return {"kind": "coverage", "sets": sets}

        header = {"type": "header", "kind": "cover", "family": "hvc", "n": n,
                  "costs": _costs(rng, n, p.get("cost_spread", 1)), "fmin": 1, "seed": seed}
        events = _ops(rng, ops, make, pattern=p.get("pattern", "random"))
        return Trace(header, events)

    if kind == "coverage":
        n, ops, items, per = p.get("n", 8), p.get("ops", 40), p.get("items", 4), p.get("per", 3)

        def make():
            els = rng.choice(n, size=min(per, n), replace=False)
            k = int(rng.integers(1, items + 1))
            sets = {str(int(e)): [j for j in range(k) if rng.random() < 0.5] for e in els}
            if not any(sets.values()):
                sets[str(int(els[0]))] = [0]
            return {"kind": "coverage", "sets": sets}

        header = {"type": "header", "kind": "cover", "family": "coverage", "n": n,
                  "costs": _costs(rng, n, p.get("cost_spread", 1)), "fmin": 1, "seed": seed}
        return Trace(header, _ops(rng, ops, make))

    if kind == "junta":
        n, r, ops, items = p.get("n", 10), p.get("r", 3), p.get("ops", 40), p.get("items", 3)

        def make():
            support = sorted(int(x) for x in rng.choice(n, size=int(rng.integers(1, r + 1)), replace=False))
            sets = {u: [j for j in range(items) if rng.random() < 0.6] for u in support}
            if not any(sets.values()):
                sets[support[0]] = [0]
            cov = Coverage(sets)
            table = [[list(sub), rat_to_json(cov.value(sub))]
                     for k in range(len(support) + 1) for sub in itertools.combinations(support, k)]
            return {"kind": "junta", "support": support, "table": table}

        header = {"type": "header", "kind": "cover", "family": "junta", "n": n, "r": r,
                  "costs": _costs(rng, n, p.get("cost_spread", 1)), "fmin": 1, "seed": seed}
        return Trace(header, _ops(rng, ops, make))

    if kind in ("metric-mst", "metric-steiner"):
        m = p.get("points", 8)
        coords = {v: [float(x), float(y)] for v, (x, y) in enumerate(rng.random((m, 2)))}
        metric = MetricInstance(coords=coords)
        events = []
        if kind == "metric-mst":
            events = [{"t": v, "arrive": v, "coords": coords[v]} for v in range(m)]
        else:
            pending, live = list(range(m)), []
            for t in range(p.get("ops", 2 * m)):
                if live and (not pending or rng.random() < 0.4):
                    v = live.pop(int(rng.integers(len(live))))
                    events.append({"t": t, "depart": v})
                elif pending:
                    v = pending.pop(0)
                    live.append(v)
                    events.append({"t": t, "arrive": v, "coords": coords[v]})
        header = {"type": "header", "kind": "metric", "family": kind, "points": m,
                  "aspect_ratio": metric.aspect_ratio, "seed": seed}
        return Trace(header, events)

    raise ValueError(f"unknown trace kind {kind!r}")
