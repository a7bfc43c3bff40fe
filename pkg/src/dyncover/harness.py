"""Run orchestration: trace in, metrics rows and a JSON summary out."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence

from .combiner import BucketRouter
from .dynamic import CoverConfig, DynamicCover, Event, shannon_recourse_bound, trace_fmax
from .engine import Mode
from .functions import as_rational
from .rjunta import JuntaCover
from .traces import Trace
from .trees import FullyDynamicMST, FullyDynamicSteiner

MODES = ("unit", "cost", "affinity", "rjunta", "combiner", "mst", "steiner")


def parse_gamma(s) -> float:
    """``"e"``, ``"e2"`` or a decimal."""
    if isinstance(s, (int, float)):
        return float(s)
    s = str(s).strip().lower()
    if s == "e":
        return math.e
    if s in ("e2", "e^2"):
        return math.e ** 2
    return float(s)


def default_gamma(mode: str) -> float:
    return 5.0 if mode == "affinity" else math.e ** 2


@dataclass
class RunResult:
    mode: str
    rows: List[Dict] = field(default_factory=list)
    summary: Dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return bool(self.summary.get("ok", False))

    def csv(self) -> str:
        if not self.rows:
            return ""
        cols = list(self.rows[0])
        for r in self.rows[1:]:
            cols += [c for c in r if c not in cols]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: _cell(v) for k, v in r.items()})
        return buf.getvalue()


def _cell(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, bool) or v is None:
        return "" if v is None else int(v)
    return v


def _ratio(cost, opt):
    if opt is None:
        return None
    if opt == 0:
        return 1.0 if cost == 0 else math.inf
    return float(Fraction(cost) / Fraction(opt))


def run(trace: Trace, mode: str, gamma=None, audit: Sequence[str] = ("all",), oracle: str = "none",
        seed: int = 0, fmin=None, fmax=None) -> RunResult:
    """Execute ``trace`` with the selected algorithm."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    gamma = default_gamma(mode) if gamma is None else parse_gamma(gamma)
    if mode in ("mst", "steiner"):
        return _run_tree(trace, mode, gamma, oracle)
    if trace.kind != "cover":
        raise ValueError(f"mode {mode} needs a cover trace")
    fmin = as_rational(fmin if fmin is not None else trace.header.get("fmin", 1))
    if fmax is None and "fmax" in trace.header:
        fmax = trace.header["fmax"]
    events = trace.cover_events()
    ground = trace.ground()
    if mode == "rjunta":
        return _run_junta(ground, events, fmin, seed)
    if mode == "combiner":
        return _run_combiner(trace, ground, events, fmin, gamma, seed, oracle)
    if fmax is None:
        fmax = trace_fmax(events, ground.elements) or fmin
    audit = [a for a in audit if a != "none"]
    cfg = CoverConfig(Mode.parse(mode), gamma, fmin, fmax, audit, oracle)
    dc = DynamicCover(ground, cfg)
    rows = []
    volume = 0
    for ev in events:
        s = dc.step(ev)
        volume += ev.function.total if ev.action == "insert" else 0
        row = {"t": s.t, "event": s.action, "id": s.fid, "cost": s.cost, "opt_cost": s.opt_cost,
               "ratio": s.ratio, "bound_factor": s.competitive_factor, "competitive_ok": s.competitive_ok,
               "recourse": s.recourse, "cumulative_recourse": s.cumulative_recourse,
               "upfront_recourse": s.upfront_recourse, "volume": volume,
               "swaps": s.swaps, "gamma_moves": s.gamma_moves}
        for name, v in s.potentials.items():
            row[f"phi_{name}"] = v
        row["audit_ok"] = s.audits_passed
        rows.append(row)
    rec = dc.record
    bound = rec.recourse_bound()
    summary = {
        "mode": mode, "gamma": gamma, "events": len(events), "volume": float(rec.volume),
        "fmin": float(fmin), "fmax": float(fmax), "cmax": float(ground.cmax), "cmin": float(ground.cmin),
        "total_recourse": rec.total_recourse, "upfront_recourse": rec.upfront_recourse,
        "gamma_moves": rec.gamma_moves, "recourse_bound": bound,
        "recourse_ok": rec.upfront_recourse <= bound,
        "audits": {k: {"events": len(l.audits), "failures": len(l.failures),
                       "budget_identity_ok": l.budget_identity_ok()} for k, l in rec.ledgers.items()},
        "competitive_failures": len(rec.competitive_failures()),
    }
    if mode == "cost":
        summary["shannon_recourse_bound"] = shannon_recourse_bound(rec.volume, rec.params)
        summary["h_recourse_bound"] = bound
    ok = summary["recourse_ok"] and rec.audits_passed and not summary["competitive_failures"] \
        and all(a["budget_identity_ok"] for a in summary["audits"].values())
    summary["ok"] = bool(ok)
    return RunResult(mode, rows, summary)


def _run_junta(ground, events: List[Event], fmin, seed) -> RunResult:
    jc = JuntaCover(ground, seed)
    rows, cum = [], 0
    for ev in events:
        s = jc.step(ev.action, ev.fid, ev.function)
        cum += s.recourse
        rows.append({"t": s.t, "event": s.action, "id": s.fid, "cost": s.cost, "recourse": s.recourse,
                     "cumulative_recourse": cum, "probes": s.probes, "invariants_ok": jc.check_invariants()})
    budget = float(jc.volume) / float(fmin)
    summary = {"mode": "rjunta", "seed": seed, "events": len(events), "probes": jc.probes,
               "probe_budget": budget, "total_recourse": cum,
               "ok": jc.probes <= budget and all(r["invariants_ok"] for r in rows)}
    return RunResult("rjunta", rows, summary)


def _run_combiner(trace, ground, events, fmin, gamma, seed, oracle) -> RunResult:
    total = trace.header.get("total")
    if total is None:
        total = sum((ev.function.total for ev in events if ev.action == "insert"), 0) or 1
    router = BucketRouter(ground, total, fmin, gamma, seed, oracle)
    rows = []
    for ev in events:
        s = router.route(ev)
        rows.append({"t": s.t, "event": s.action, "id": s.fid, "child": s.child, "cost": s.cost,
                     "opt_cost": s.opt_cost, "ratio": _ratio(s.cost, s.opt_cost), "bound_factor": s.factor,
                     "competitive_ok": s.competitive_ok, "recourse": s.recourse,
                     "cumulative_recourse": s.cumulative_recourse,
                     "child_recourse": s.child_recourse,
                     "cumulative_child_recourse": s.cumulative_child_recourse})
    last = router.steps[-1] if router.steps else None
    rec = last.cumulative_recourse if last else 0
    child = last.cumulative_child_recourse if last else 0
    comp_fail = sum(1 for s in router.steps if s.competitive_ok is False)
    summary = {"mode": "combiner", "buckets": router.levels, "general_used": router.general_used,
               "total_recourse": rec, "child_recourse": child, "competitive_failures": comp_fail,
               "ok": rec <= child and comp_fail == 0 and router.general.record.audits_passed}
    return RunResult("combiner", rows, summary)


def _run_tree(trace: Trace, mode, gamma, oracle) -> RunResult:
    if trace.kind != "metric":
        raise ValueError(f"mode {mode} needs a metric trace")
    metric = trace.metric()
    cls = FullyDynamicMST if mode == "mst" else FullyDynamicSteiner
    tree = cls(metric, gamma, audit=True, oracle=oracle != "none")
    factor = tree.competitive_factor()
    rows = []
    for ev in trace.events:
        if "arrive" in ev:
            s = tree.arrive(int(ev["arrive"]))
        else:
            if mode == "mst":
                raise ValueError("the spanning-tree mode only supports arrivals")
            s = tree.depart(int(ev["depart"]))
        ok = None if s.opt_cost is None else Fraction(s.cost) <= Fraction(factor) * Fraction(s.opt_cost)
        rows.append({"t": s.t, "event": s.action, "vertex": s.vertex, "cost": s.cost, "opt_cost": s.opt_cost,
                     "ratio": _ratio(s.cost, s.opt_cost), "bound_factor": factor if oracle != "none" else None,
                     "competitive_ok": ok, "recourse": s.recourse,
                     "cumulative_recourse": s.cumulative_recourse, "upfront_recourse": s.upfront_recourse,
                     "gamma_moves": s.gamma_moves})
    budget = tree.recourse_budget()
    events = max(len(trace.events), 1)
    lnD = math.log(max(metric.aspect_ratio, math.e))
    summary = {"mode": mode, "gamma": gamma, "aspect_ratio": metric.aspect_ratio,
               "upfront_recourse": tree.upfront_recourse, "total_recourse": tree.total_recourse,
               "recourse_budget": budget, "per_event_constant": budget / (events * lnD),
               "competitive_factor": factor, "audited_events": len(tree.ledger.audits),
               "cleanup_events": sum(1 for a in tree.ledger.audits if a.event == "cleanup"),
               "audit_failures": len(tree.ledger.failures),
               "competitive_failures": sum(1 for r in rows if r["competitive_ok"] is False)}
    summary["ok"] = (tree.upfront_recourse <= budget and not summary["audit_failures"]
                     and not summary["competitive_failures"])
    return RunResult(mode, rows, summary)


def sweep(trace: Trace, configs: Sequence[Dict], workers: int = 4) -> List[RunResult]:
    """Run several configurations of one trace in parallel threads."""
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: run(trace, **c), configs))


def series(rows: Sequence[Dict]) -> Dict[str, List]:
    """Figure data: recourse against inserted volume, and ratio against t."""
    out = {"recourse_vs_volume": [], "ratio_vs_t": []}
    for r in rows:
        if r.get("volume") not in (None, ""):
            out["recourse_vs_volume"].append((float(r["volume"]), float(r["cumulative_recourse"])))
        if r.get("ratio") not in (None, ""):
            out["ratio_vs_t"].append((int(r["t"]), float(r["ratio"])))
    return out
