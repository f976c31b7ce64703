"""
Splitting the supplier payment
==============================

Chosen suppliers share ``alpha * p * I``.  Each gets a Shapley share of
the improvement, computed exactly for small coalitions and by permutation
sampling otherwise, with a Hoeffding error bar.
"""

from vispricer import (
    CoalitionGame,
    DirectedGraph,
    PermutationSampler,
    market_from_valuations,
    shapley_exact,
    shapley_sampled,
    standalone_check,
)

# suppliers 0..4 fed by overlapping sets of users, requesters 20 and 21
feeds = {0: [5, 6, 7, 8], 1: [7, 8, 9], 2: [5, 9, 10, 11], 3: [11, 12], 4: [6, 12, 13, 14]}
g = DirectedGraph(22, [(u, s) for s, ins in feeds.items() for u in ins])
inst = market_from_valuations(g, {20: 0.9, 21: 0.9}, {s: 0.1 for s in feeds}, 2, 5, 0.6)
price = inst.price(0.5)
game = CoalitionGame.from_market(inst, price.p, sorted(feeds))

exact = shapley_exact(game, q=price.q)
print("grand coalition improvement:", game.grand_value)
print("exact shares:", {u: str(v) for u, v in exact.exact_shares.items()})
print("rewards:", {u: round(v, 4) for u, v in exact.rewards.items()})
print("no supplier earns less than alone:", standalone_check(game, exact))

###############################################################################
# Sampling.  Error shrinks like 1 / sqrt(K).

for K in (50, 200, 800):
    est = shapley_sampled(game, PermutationSampler(seed=0, rounds=K), q=price.q, delta=0.05)
    err = max(abs(est.shares[u] - exact.shares[u]) for u in game.players)
    print(f"K={K:<4} max error {err:.3f}  bound {est.error_bound:.3f}")
