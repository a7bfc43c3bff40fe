"""A Steiner tree that survives departures.

Terminals on a plus-shaped layout arrive, then the centre leaves.  With three
or more tree neighbours it stays on as a Steiner point; once enough leaves
depart it is shortcut or dropped.

    python3 demos/steiner_tree.py
"""

from dyncover.oracles import exact_steiner
from dyncover.trees import FullyDynamicSteiner, MetricInstance

coords = {0: (0, 0), 1: (1, 0), 2: (-1, 0), 3: (0, 1), 4: (0, -1), 5: (2.2, 0)}
tree = FullyDynamicSteiner(MetricInstance(coords=coords))


def show(step):
    edges = " ".join(f"{min(p)}-{max(p)}" for p in sorted(tuple(sorted(e)) for e in step.edges))
    opt = exact_steiner(tree.metric.dist, tree.terminals, tree.metric.points).cost
    print(f"{step.action:6s} {step.vertex}: tree [{edges}]  cost {float(step.cost):.2f}  "
          f"OPT {float(opt):.2f}  steiner {sorted(tree.steiner_vertices)}  recourse {step.recourse}")


for v in (0, 1, 2, 3, 4, 5):
    show(tree.arrive(v))
for v in (0, 3, 4, 2):
    show(tree.depart(v))
print(f"\ncleanup audits: {sum(a.event == 'cleanup' for a in tree.ledger.audits)}, "
      f"failures: {len(tree.ledger.failures)}")
