"""General costs: two potentials, two recourse budgets.

Costs span three orders of magnitude.  The power-law potential and the
Shannon potential are audited on every event of the same run, and the two
recourse budgets they imply are printed next to the recourse actually spent.

    python3 demos/cost_budgets.py
"""

from dyncover.harness import run
from dyncover.traces import gen_trace

print("seed  cmax/cmin  volume  upfront  h-budget  shannon-budget  audits")
for seed in range(5):
    trace = gen_trace("coverage", seed=seed, n=9, ops=40, items=5, cost_spread=1000)
    s = run(trace, "cost").summary
    audits = " ".join(f"{k}:{v['failures']}/{v['events']}" for k, v in s["audits"].items())
    print(f"{seed:4d}  {s['cmax'] / s['cmin']:9.0f}  {s['volume']:6.0f}  {s['upfront_recourse']:7d}  "
          f"{s['h_recourse_bound']:8.0f}  {s['shannon_recourse_bound']:14.0f}  {audits}")
print("\naudits column: failures/events per potential")
