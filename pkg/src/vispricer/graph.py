"""Directed graph storage and bounded-hop reachability.

Nodes are dense integers ``0..n-1``; original string labels are kept in a
side table and only matter when reading or writing files.  Every traversal
here is depth-capped, since visibility never looks further than ``tau``
hops.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from os import PathLike
from typing import Iterable, Iterator, Sequence

logger = logging.getLogger(__name__)

INFINITE = math.inf

__all__ = [
    "INFINITE",
    "DirectedGraph",
    "EdgeListParseError",
    "OverlayGraph",
    "VisibleSet",
    "bounded_distance",
    "forward_distances",
    "leveled_visible_sets",
    "load_edge_list",
    "reverse_distances",
    "visibility_score",
    "visible_set",
]


class EdgeListParseError(ValueError):
    """Raised for a malformed line in an edge-list file."""

    def __init__(self, path, lineno: int, line: str):
        self.path = path
        self.lineno = lineno
        self.line = line
        super().__init__(f"{path}:{lineno}: expected two node tokens, got {line!r}")


class DirectedGraph:
    """Immutable unweighted digraph without self-loops or parallel edges.

    Parameters
    ----------
    node_count : int
        Number of nodes; ids are ``0..node_count-1``.
    edges : iterable of (int, int)
        Directed edges ``(source, target)``.  Duplicates are collapsed and
        self-loops are dropped (their count is kept in ``dropped_self_loops``).
    labels : sequence of str, optional
        Original label for each dense id.
    """

    __slots__ = ("_n", "_fwd", "_rev", "_labels", "_index", "_m", "dropped_self_loops")

    def __init__(
        self,
        node_count: int,
        edges: Iterable[tuple[int, int]] = (),
        labels: Sequence[str] | None = None,
    ):
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        fwd: list[set[int]] = [set() for _ in range(node_count)]
        dropped = 0
        for u, v in edges:
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValueError(f"edge ({u}, {v}) out of range for {node_count} nodes")
            if u == v:
                dropped += 1
                continue
            fwd[u].add(v)
        rev: list[list[int]] = [[] for _ in range(node_count)]
        for u, outs in enumerate(fwd):
            for v in outs:
                rev[v].append(u)
        self._n = node_count
        self._fwd = tuple(tuple(sorted(outs)) for outs in fwd)
        self._rev = tuple(tuple(sorted(ins)) for ins in rev)
        self._m = sum(len(outs) for outs in self._fwd)
        self.dropped_self_loops = dropped
        if labels is not None:
            if len(labels) != node_count:
                raise ValueError("labels must have one entry per node")
            self._labels = tuple(str(x) for x in labels)
            self._index = {lab: i for i, lab in enumerate(self._labels)}
            if len(self._index) != node_count:
                raise ValueError("labels must be unique")
        else:
            self._labels = None
            self._index = None

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return self._m

    @property
    def forward_adjacency(self) -> tuple[tuple[int, ...], ...]:
        return self._fwd

    @property
    def reverse_adjacency(self) -> tuple[tuple[int, ...], ...]:
        return self._rev

    @property
    def node_labels(self) -> tuple[str, ...] | None:
        return self._labels

    def successors(self, u: int) -> Sequence[int]:
        return self._fwd[u]

    def predecessors(self, u: int) -> Sequence[int]:
        return self._rev[u]

    def has_edge(self, u: int, v: int) -> bool:
        outs = self._fwd[u]
        # adjacency tuples are sorted
        lo, hi = 0, len(outs)
        while lo < hi:
            mid = (lo + hi) // 2
            if outs[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(outs) and outs[lo] == v

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, outs in enumerate(self._fwd):
            for v in outs:
                yield u, v

    def label(self, u: int) -> str:
        return self._labels[u] if self._labels is not None else str(u)

    def node_id(self, label: str) -> int:
        """Dense id for ``label``; unlabeled graphs accept the decimal id."""
        if self._index is not None:
            try:
                return self._index[label]
            except KeyError:
                raise KeyError(f"unknown node label {label!r}") from None
        u = int(label)
        self.check_node(u)
        return u

    def check_node(self, u: int) -> None:
        if not (isinstance(u, (int,)) and 0 <= u < self._n):
            raise ValueError(f"invalid node id {u!r} (graph has {self._n} nodes)")

    def __repr__(self) -> str:
        return f"DirectedGraph(nodes={self._n}, edges={self._m})"


class OverlayGraph:
    """A base graph plus extra edges, queried as a single graph.

    Extra edges that already exist in ``base`` are ignored, as are
    self-loops.
    """

    __slots__ = ("base", "extra_edges", "_xfwd", "_xrev")

    def __init__(self, base: DirectedGraph, extra_edges: Iterable[tuple[int, int]] = ()):
        self.base = base
        xfwd: dict[int, list[int]] = {}
        xrev: dict[int, list[int]] = {}
        kept = set()
        for u, v in extra_edges:
            base.check_node(u)
            base.check_node(v)
            if u == v or (u, v) in kept or base.has_edge(u, v):
                continue
            kept.add((u, v))
            xfwd.setdefault(u, []).append(v)
            xrev.setdefault(v, []).append(u)
        self.extra_edges = frozenset(kept)
        self._xfwd = xfwd
        self._xrev = xrev

    @property
    def node_count(self) -> int:
        return self.base.node_count

    @property
    def edge_count(self) -> int:
        return self.base.edge_count + len(self.extra_edges)

    def successors(self, u: int) -> Sequence[int]:
        extra = self._xfwd.get(u)
        return self.base.successors(u) if extra is None else (*self.base.successors(u), *extra)

    def predecessors(self, u: int) -> Sequence[int]:
        extra = self._xrev.get(u)
        return self.base.predecessors(u) if extra is None else (*self.base.predecessors(u), *extra)

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.extra_edges or self.base.has_edge(u, v)

    def check_node(self, u: int) -> None:
        self.base.check_node(u)

    def __repr__(self) -> str:
        return f"OverlayGraph(base={self.base!r}, extra={len(self.extra_edges)})"


Graph = DirectedGraph | OverlayGraph


@dataclass(frozen=True)
class VisibleSet:
    """Nodes within ``radius`` hops of reaching ``anchor``."""

    anchor: int
    radius: int
    members: frozenset[int]

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v: object) -> bool:
        return v in self.members


def _bfs_levels(neighbors, source: int, cap: int) -> dict[int, int]:
    dist = {source: 0}
    if cap <= 0:
        return dist
    frontier = deque([source])
    while frontier:
        u = frontier.popleft()
        du = dist[u]
        if du >= cap:
            continue
        for v in neighbors(u):
            if v not in dist:
                dist[v] = du + 1
                frontier.append(v)
    return dist


def forward_distances(g: Graph, source: int, cap: int) -> dict[int, int]:
    """Hop distance from ``source`` to every node reachable within ``cap``."""
    g.check_node(source)
    if cap < 0:
        return {}
    return _bfs_levels(g.successors, source, cap)


def reverse_distances(g: Graph, target: int, cap: int) -> dict[int, int]:
    """Hop distance to ``target`` from every node that reaches it within ``cap``."""
    g.check_node(target)
    if cap < 0:
        return {}
    return _bfs_levels(g.predecessors, target, cap)


def bounded_distance(g: Graph, source: int, target: int, cap: int) -> float:
    """Shortest-path length from ``source`` to ``target``, or INFINITE beyond ``cap``."""
    g.check_node(target)
    if cap < 0:
        raise ValueError("cap must be non-negative")
    return forward_distances(g, source, cap).get(target, INFINITE)


def visible_set(g: Graph, anchor: int, radius: int) -> VisibleSet:
    """Users to whom ``anchor`` is ``radius``-visible, ``anchor`` included.

    A negative radius yields the empty set.
    """
    return VisibleSet(anchor, radius, frozenset(reverse_distances(g, anchor, radius)))


def leveled_visible_sets(g: Graph, anchor: int, max_radius: int) -> list[VisibleSet]:
    """``[visible_set(g, anchor, k) for k in 0..max_radius]`` from one BFS."""
    if max_radius < 0:
        raise ValueError("max_radius must be non-negative")
    dist = reverse_distances(g, anchor, max_radius)
    by_level: list[list[int]] = [[] for _ in range(max_radius + 1)]
    for v, d in dist.items():
        by_level[d].append(v)
    out = []
    acc: set[int] = set()
    for k, level in enumerate(by_level):
        acc.update(level)
        out.append(VisibleSet(anchor, k, frozenset(acc)))
    return out


def visibility_score(g: Graph, u: int, tau: int) -> int:
    """Number of other users to whom ``u`` is ``tau``-visible."""
    if tau < 1:
        raise ValueError("tau must be a positive integer")
    return len(reverse_distances(g, u, tau)) - 1


def load_edge_list(path: str | PathLike, undirected: bool = False) -> DirectedGraph:
    """Read a whitespace-separated edge list.

    Lines starting with ``#`` or ``%`` are comments.  Node ids are assigned
    in order of first appearance.  With ``undirected=True`` every line adds
    both directions.
    """
    index: dict[str, int] = {}
    labels: list[str] = []
    edges: list[tuple[int, int]] = []

    def node(tok: str) -> int:
        i = index.get(tok)
        if i is None:
            i = index[tok] = len(labels)
            labels.append(tok)
        return i

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line[0] in "#%":
                continue
            toks = line.split()
            if len(toks) != 2:
                raise EdgeListParseError(path, lineno, raw.rstrip("\n"))
            u, v = node(toks[0]), node(toks[1])
            edges.append((u, v))
            if undirected:
                edges.append((v, u))

    g = DirectedGraph(len(labels), edges, labels)
    if g.dropped_self_loops:
        if undirected:
            # each self-loop line was inserted twice
            g.dropped_self_loops //= 2
        logger.warning("%s: dropped %d self-loop line(s)", path, g.dropped_self_loops)
    return g
