"""Small synthetic graphs for tests, demos and desk-scale experiments."""

from __future__ import annotations

from os import PathLike

import numpy as np

from .graph import DirectedGraph


def path_graph(n: int) -> DirectedGraph:
    """``0 -> 1 -> ... -> n-1``."""
    return DirectedGraph(n, ((i, i + 1) for i in range(n - 1)))


def star_graph(leaves: int) -> DirectedGraph:
    """Hub 0 with ``leaves`` nodes each pointing at it."""
    return DirectedGraph(leaves + 1, ((i, 0) for i in range(1, leaves + 1)))


def random_digraph(n: int, edge_prob: float, seed: int | None = None) -> DirectedGraph:
    """Directed Erdos-Renyi graph: each ordered pair is an edge with ``edge_prob``."""
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < edge_prob
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    return DirectedGraph(n, zip(src.tolist(), dst.tolist()))


def two_community_graph(
    n: int, p_in: float, p_out: float, seed: int | None = None
) -> DirectedGraph:
    """Two equal blocks, dense inside and sparse across."""
    rng = np.random.default_rng(seed)
    block = np.arange(n) >= n // 2
    same = block[:, None] == block[None, :]
    probs = np.where(same, p_in, p_out)
    mask = rng.random((n, n)) < probs
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    return DirectedGraph(n, zip(src.tolist(), dst.tolist()))


def residence_like_graph(seed: int | None = 0, n: int = 217, arcs: int = 2672) -> DirectedGraph:
    """Random digraph with the size and density of a small friendship network.

    Two communities, with the edge probability tuned so the expected arc
    count is ``arcs``; 80% of arcs fall inside a community.
    """
    half = n // 2
    inside_pairs = half * (half - 1) + (n - half) * (n - half - 1)
    across_pairs = 2 * half * (n - half)
    p_in = 0.8 * arcs / inside_pairs
    p_out = 0.2 * arcs / across_pairs
    return two_community_graph(n, p_in, p_out, seed)


def write_edge_list(g: DirectedGraph, path: str | PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {g.node_count} nodes, {g.edge_count} arcs\n")
        for u, v in g.edges():
            fh.write(f"{g.label(u)} {g.label(v)}\n")
