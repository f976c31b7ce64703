"""Instance builders and networkx-based oracles shared by the tests.

The oracles deliberately avoid vispricer's own traversal code: distances
come from networkx all-pairs BFS.
"""

import itertools
import math

import networkx as nx
import numpy as np

from vispricer.graph import DirectedGraph
from vispricer.market import market_from_valuations


def to_nx(g, extra=()):
    h = nx.DiGraph()
    h.add_nodes_from(range(g.node_count))
    h.add_edges_from(g.edges())
    h.add_edges_from(extra)
    return h


def nx_visible(h, u, d):
    """All v with dist(v -> u) <= d, from a full all-pairs BFS."""
    if d < 0:
        return set()
    dist = dict(nx.all_pairs_shortest_path_length(h))
    return {v for v in h.nodes if dist[v].get(u, math.inf) <= d}


def nx_improvement(inst, p, chosen):
    """Exact improvement per active requester using networkx distances."""
    active = [r for r in inst.requesters if inst.requester_valuations[r] >= p]
    h0 = to_nx(inst.graph)
    h1 = to_nx(inst.graph, [(s, r) for s in chosen for r in active])
    d0 = dict(nx.all_pairs_shortest_path_length(h0))
    d1 = dict(nx.all_pairs_shortest_path_length(h1))
    tau = inst.tau
    out = {}
    for r in active:
        before = {v for v in h0.nodes if d0[v].get(r, math.inf) <= tau}
        after = {v for v in h1.nodes if d1[v].get(r, math.inf) <= tau}
        out[r] = len(after - before)
    return out


def four_node_instance(tau=2, budget=1, clones=0):
    """r=0, s=1, a=2, b=3 with a -> s, b -> a; optional clones of s (also fed by a)."""
    n = 4 + clones
    edges = [(2, 1), (3, 2)] + [(2, 4 + i) for i in range(clones)]
    g = DirectedGraph(n, edges, ["r", "s", "a", "b"] + [f"s{i + 2}" for i in range(clones)])
    sup = {1: 0.1}
    sup.update({4 + i: 0.1 for i in range(clones)})
    return market_from_valuations(g, {0: 0.5}, sup, tau, budget, 0.6)


def random_instance(rng, n=None, edge_prob=0.15, n_req=None, n_sup=None, tau=2, budget=2,
                    alpha=0.6, lattice=False):
    """Random digraph with disjoint random roles and uniform valuations.

    With ``lattice=True`` requester valuations are multiples of 1/1000 and
    supplier valuations are ``alpha * k/1000``, so every candidate price lies
    on the 1e-3 grid.
    """
    if n is None:
        n = int(rng.integers(4, 16))
    mask = rng.random((n, n)) < edge_prob
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    g = DirectedGraph(n, zip(src.tolist(), dst.tolist()))
    if n_req is None:
        n_req = int(rng.integers(1, max(2, n // 2)))
    if n_sup is None:
        n_sup = int(rng.integers(1, max(2, n - n_req)))
    n_sup = min(n_sup, n - n_req)
    perm = rng.permutation(n).tolist()
    req, sup = perm[:n_req], perm[n_req:n_req + n_sup]
    if lattice:
        pv = {r: int(rng.integers(0, 1001)) / 1000 for r in req}
        qv = {s: alpha * (int(rng.integers(0, 1001)) / 1000) for s in sup}
    else:
        pv = {r: float(rng.random()) for r in req}
        qv = {s: float(rng.random()) for s in sup}
    return market_from_valuations(g, pv, qv, tau, budget, alpha)


def all_subsets(items, max_size=None):
    items = sorted(items)
    top = len(items) if max_size is None else min(max_size, len(items))
    for k in range(top + 1):
        yield from itertools.combinations(items, k)
