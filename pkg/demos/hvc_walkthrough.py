"""Vertex cover under edge insertions and deletions.

Edges arrive and leave; the maintained cover is compared with the exact
optimum after every event, and the recourse spent is set against its
closed-form budget.

    python3 demos/hvc_walkthrough.py
"""

from dyncover import CoverConfig, Mode, run_trace
from dyncover.traces import gen_trace

trace = gen_trace("hvc", seed=7, n=10, edges=30, ops=40)
record = run_trace(trace.ground(), trace.cover_events(), CoverConfig(Mode.UNIT, oracle="brute"))

print(" t  event   id    cover                   cost  opt  recourse")
for ev, s in zip(trace.events, record.steps):
    cover = ",".join(str(v) for v in sorted(s.solution))
    print(f"{s.t:2d}  {s.action:6s}  {ev['id']:4s}  {cover:22s}  {s.cost:4}  {s.opt_cost:3}  {s.recourse}")

print()
print(f"worst cost/OPT:        {max(s.ratio for s in record.steps if s.opt_cost):.2f}")
print(f"guaranteed factor:     {record.steps[-1].competitive_factor:.2f}")
print(f"upfront recourse:      {record.upfront_recourse}  (true {record.total_recourse})")
print(f"recourse budget:       {record.recourse_bound():.1f}")
print(f"potential audits pass: {record.audits_passed}")
