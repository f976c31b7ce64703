"""
Bounded-hop visibility on a small graph
=======================================

A user ``u`` sees the posts of everyone within ``d`` hops upstream of
it.  Here we build a four-node chain, compute the visible sets and show
how a single supplier link widens what a requester can see.
"""

from vispricer import DirectedGraph, market_from_valuations, visible_set
from vispricer.market import augmented_graph, improvement_closed_form, improvement_exact

# b -> a -> s, and a lone requester r
r, s, a, b = 0, 1, 2, 3
g = DirectedGraph(4, [(a, s), (b, a)], labels=["r", "s", "a", "b"])

for d in range(3):
    print(f"V(s, {d}) =", sorted(g.label(x) for x in visible_set(g, s, d).members))

###############################################################################
# A market with one requester and one supplier.  ``tau`` is the hop
# horizon that counts as visibility.

inst = market_from_valuations(g, {r: 0.5}, {s: 0.1}, tau=2, budget=1, alpha=0.6)
aug = augmented_graph(inst, 0.4, [s])
print("new edge s -> r present:", aug.has_edge(s, r))

###############################################################################
# With s linking to r, r now sees s and a within two hops.  The closed
# form and a fresh BFS on the augmented graph agree.

print("closed form:", improvement_closed_form(inst, 0.4, [s]).total)
print("exact BFS:  ", improvement_exact(inst, 0.4, [s]).total)
