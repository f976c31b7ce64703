"""
A full seeded sweep
===================

Runs every subroutine, budget and grid step on a 217-node synthetic
graph and writes CSV tables into a temporary directory.  Setting
``VISPRICER_SEED`` changes the seed without editing the config.
"""

import csv
import os
import tempfile
from pathlib import Path

from vispricer.experiment import ExperimentConfig, run_experiment
from vispricer.generators import residence_like_graph, write_edge_list

out = Path(tempfile.mkdtemp(prefix="vispricer_"))
write_edge_list(residence_like_graph(seed=0), out / "residence_like.txt")

# Beta(3,6) requesters against Beta(6,3) suppliers often leave no
# profitable price at all; seed 13 is one that does.
cfg = ExperimentConfig(
    graph_path=str(out / "residence_like.txt"),
    seed=int(os.environ.get("VISPRICER_SEED", 13)),
    output_dir=str(out / "results"),
    candidate_prices=True,
)
records = run_experiment(cfg)

###############################################################################
# Best revenue per subroutine and budget.

best = {}
for r in records:
    key = (r.subroutine, r.budget)
    best[key] = max(best.get(key, 0.0), r.revenue)
for (sub, b), rev in sorted(best.items()):
    print(f"{sub:>7} b={b}: {rev:.4f}")

print("outputs:", sorted(p.name for p in (out / "results").iterdir()))
with open(out / "results" / "runs.csv", newline="") as fh:
    print(len(list(csv.DictReader(fh))), "rows in runs.csv")
