"""
Choosing a price and a set of suppliers
=======================================

The platform posts a price ``p`` to requesters and pays ``alpha * p``
per unit of improvement to suppliers.  Its own revenue is
``(1 - alpha) * p * I``.  This script runs the grid search at a few
step sizes and the candidate-price search on a random market.
"""

import numpy as np

from vispricer import (
    Subroutine,
    candidate_price_search,
    discretized_price_search,
    lipschitz_gap_report,
    market_from_valuations,
)
from vispricer.generators import two_community_graph

rng = np.random.default_rng(3)
g = two_community_graph(60, 0.2, 0.02, seed=3)
nodes = rng.permutation(g.node_count)
req = {int(u): float(rng.beta(6, 3)) for u in nodes[:8]}
sup = {int(u): float(rng.beta(3, 6)) for u in nodes[8:18]}
inst = market_from_valuations(g, req, sup, tau=2, budget=3, alpha=0.6)

###############################################################################
# Coarse to fine grids.  Nested grids never lose revenue with the
# exhaustive subroutine.

for row in lipschitz_gap_report(inst, [0.2, 0.1, 0.05, 0.025], Subroutine.BRUTE):
    print(f"eps={row.epsilon:<6} revenue={row.revenue:.4f} gap={row.gap:.4f}")

###############################################################################
# Revenue only changes where a requester drops out or a supplier joins,
# so scanning those breakpoints is exact.

best = candidate_price_search(inst, Subroutine.BRUTE)
print("candidate search:", round(best.price.p, 6), round(best.revenue, 4),
      [g.label(u) for u in best.selection.chosen])

for sub in Subroutine:
    sol = discretized_price_search(inst, 0.05, sub)
    print(f"{sub.value:>7}: p={sol.price.p:.3f} revenue={sol.revenue:.4f}")
