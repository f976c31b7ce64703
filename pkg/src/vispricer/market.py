"""Market model: valuations, participation, visibility improvement, revenue.

Two ways of computing the improvement are provided.  ``EXACT_BFS`` runs a
bounded BFS on the graph with the new supplier -> requester edges added.
``CLOSED_FORM`` uses only original-graph visible sets and is a coverage
function of the chosen suppliers; the optimizers work with this one.

For the closed form, each supplier ``s`` linked to requester ``r`` covers
``V(s, tau-1)``; links to other requesters ``r'`` only add the smaller sets
``V(s, tau-1-D(r', r))``, so the union over all links collapses to
``union_s V(s, tau-1)``.  :class:`CoverageTables` stores these sets as
integer bitmasks.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from os import PathLike
from typing import Iterable, Mapping

from .graph import (
    DirectedGraph,
    OverlayGraph,
    forward_distances,
    leveled_visible_sets,
    reverse_distances,
)

PRICE_TOL = 1e-12


class ImprovementMethod(enum.Enum):
    EXACT_BFS = "exact_bfs"
    CLOSED_FORM = "closed_form"


class PriceError(ValueError):
    pass


@dataclass(frozen=True)
class PricePoint:
    """Posted price pair: ``p`` charged to requesters, ``q`` paid to suppliers."""

    p: float
    q: float

    def __post_init__(self):
        for name in ("p", "q"):
            x = getattr(self, name)
            if not (0.0 <= x <= 1.0):
                raise PriceError(f"{name}={x!r} outside [0, 1]")

    @classmethod
    def from_alpha(cls, p: float, alpha: float) -> "PricePoint":
        return cls(float(p), alpha * p)

    def check_alpha(self, alpha: float) -> None:
        if abs(self.q - alpha * self.p) > PRICE_TOL:
            raise PriceError(f"q={self.q!r} != alpha*p={alpha * self.p!r}")


@dataclass(frozen=True, eq=False)
class MarketInstance:
    graph: DirectedGraph
    requesters: frozenset[int]
    suppliers: frozenset[int]
    requester_valuations: Mapping[int, float]
    supplier_valuations: Mapping[int, float]
    tau: int
    budget: int
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "requesters", frozenset(self.requesters))
        object.__setattr__(self, "suppliers", frozenset(self.suppliers))
        object.__setattr__(self, "requester_valuations", dict(self.requester_valuations))
        object.__setattr__(self, "supplier_valuations", dict(self.supplier_valuations))
        n = self.graph.node_count
        if self.requesters & self.suppliers:
            raise ValueError("a user cannot be both requester and supplier")
        for u in self.requesters | self.suppliers:
            if not (isinstance(u, int) and 0 <= u < n):
                raise ValueError(f"role member {u!r} is not a node id")
        for role, ids, vals in (
            ("requester", self.requesters, self.requester_valuations),
            ("supplier", self.suppliers, self.supplier_valuations),
        ):
            missing = ids - vals.keys()
            if missing:
                raise ValueError(f"{role}s without valuation: {sorted(missing)[:5]}")
            for u in ids:
                if not (0.0 <= vals[u] <= 1.0):
                    raise ValueError(f"{role} {u} valuation {vals[u]!r} outside [0, 1]")
        if not (isinstance(self.tau, int) and self.tau >= 1):
            raise ValueError("tau must be a positive integer")
        if not (isinstance(self.budget, int) and self.budget >= 1):
            raise ValueError("budget must be a positive integer")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie in (0, 1)")

    def price(self, p: float) -> PricePoint:
        return PricePoint.from_alpha(p, self.alpha)

    def with_budget(self, budget: int) -> "MarketInstance":
        # shares the coverage tables, which do not depend on the budget
        inst = MarketInstance(
            self.graph,
            self.requesters,
            self.suppliers,
            self.requester_valuations,
            self.supplier_valuations,
            self.tau,
            budget,
            self.alpha,
        )
        if "tables" in self.__dict__:
            inst.__dict__["tables"] = self.__dict__["tables"]
        return inst

    @cached_property
    def tables(self) -> "CoverageTables":
        return CoverageTables(self)


class CoverageTables:
    """Bitmask visible sets used by the closed-form objective.

    ``supplier_cover[s]`` is ``V(s, tau-1)`` and ``requester_seen[r]`` is
    ``V(r, tau)``, both on the original graph.
    """

    def __init__(self, inst: MarketInstance):
        g = inst.graph
        self.supplier_cover = {
            s: _mask(reverse_distances(g, s, inst.tau - 1)) for s in inst.suppliers
        }
        self.requester_seen = {
            r: _mask(reverse_distances(g, r, inst.tau)) for r in inst.requesters
        }

    def union(self, chosen: Iterable[int]) -> int:
        acc = 0
        for s in chosen:
            acc |= self.supplier_cover[s]
        return acc

    def per_requester(self, active: Iterable[int], covered: int) -> dict[int, int]:
        seen = self.requester_seen
        return {r: (covered & ~seen[r]).bit_count() for r in active}

    def total(self, active: Iterable[int], covered: int) -> int:
        seen = self.requester_seen
        return sum((covered & ~seen[r]).bit_count() for r in active)


def _mask(nodes: Iterable[int]) -> int:
    m = 0
    for v in nodes:
        m |= 1 << v
    return m


@dataclass(frozen=True)
class ParticipationProfile:
    price: PricePoint
    active_requesters: frozenset[int]
    potential_suppliers: frozenset[int]


@dataclass(frozen=True)
class ImprovementReport:
    per_requester: dict[int, int]
    total: int
    method: ImprovementMethod = field(default=ImprovementMethod.CLOSED_FORM)


def participating_requesters(inst: MarketInstance, p: float) -> frozenset[int]:
    """Requesters willing to pay ``p`` (ties included)."""
    vals = inst.requester_valuations
    return frozenset(u for u in inst.requesters if vals[u] >= p)


def potential_suppliers(inst: MarketInstance, q: float) -> frozenset[int]:
    """Suppliers willing to accept ``q`` (ties included)."""
    vals = inst.supplier_valuations
    return frozenset(u for u in inst.suppliers if vals[u] <= q)


def participation(inst: MarketInstance, price: PricePoint) -> ParticipationProfile:
    return ParticipationProfile(
        price,
        participating_requesters(inst, price.p),
        potential_suppliers(inst, price.q),
    )


def _check_chosen(inst: MarketInstance, chosen: Iterable[int]) -> frozenset[int]:
    chosen = frozenset(chosen)
    bad = chosen - inst.suppliers
    if bad:
        raise ValueError(f"not suppliers: {sorted(bad)}")
    return chosen


def augmented_graph(inst: MarketInstance, p: float, chosen: Iterable[int]) -> OverlayGraph:
    """Base graph plus an edge ``s -> r`` per chosen supplier and active requester."""
    chosen = _check_chosen(inst, chosen)
    active = participating_requesters(inst, p)
    return OverlayGraph(inst.graph, ((s, r) for s in chosen for r in active))


def improvement_exact(inst: MarketInstance, p: float, chosen: Iterable[int]) -> ImprovementReport:
    """Newly visible users per active requester, by BFS on the augmented graph."""
    chosen = _check_chosen(inst, chosen)
    active = participating_requesters(inst, p)
    per: dict[int, int] = {r: 0 for r in active}
    if chosen and active:
        g2 = augmented_graph(inst, p, chosen)
        for r in active:
            after = reverse_distances(g2, r, inst.tau).keys()
            before = reverse_distances(inst.graph, r, inst.tau).keys()
            per[r] = len(after - before)
    return ImprovementReport(per, sum(per.values()), ImprovementMethod.EXACT_BFS)


def improvement_closed_form(
    inst: MarketInstance,
    p: float,
    chosen: Iterable[int],
    collapsed: bool = True,
) -> ImprovementReport:
    """Closed-form improvement from original-graph distances.

    With ``collapsed=False`` the union runs literally over every link
    ``(s, r')`` with radius ``tau - 1 - D(r', r)``; the default uses the
    equivalent per-supplier cover ``V(s, tau-1)``.
    """
    chosen = _check_chosen(inst, chosen)
    active = participating_requesters(inst, p)
    if collapsed:
        t = inst.tables
        per = t.per_requester(active, t.union(chosen))
    else:
        per = _closed_form_literal(inst, active, chosen)
    return ImprovementReport(per, sum(per.values()), ImprovementMethod.CLOSED_FORM)


def _closed_form_literal(inst, active, chosen) -> dict[int, int]:
    g, tau = inst.graph, inst.tau
    levels = {s: leveled_visible_sets(g, s, tau - 1) for s in chosen}
    # dist_from[r'][r] = D(r', r), only needed up to tau - 1
    dist_from = {rp: forward_distances(g, rp, tau - 1) for rp in active}
    per = {}
    for r in active:
        union: set[int] = set()
        for s in chosen:
            for rp in active:
                d = dist_from[rp].get(r)
                if d is None:
                    continue
                radius = tau - 1 - d
                if radius >= 0:
                    union |= levels[s][radius].members
        base = reverse_distances(g, r, tau).keys()
        per[r] = len(union - base)
    return per


def improvement(
    inst: MarketInstance,
    p: float,
    chosen: Iterable[int],
    method: ImprovementMethod = ImprovementMethod.CLOSED_FORM,
) -> ImprovementReport:
    if method is ImprovementMethod.EXACT_BFS:
        return improvement_exact(inst, p, chosen)
    return improvement_closed_form(inst, p, chosen)


def revenue_from_improvement(alpha: float, p: float, total: int) -> float:
    """Operator revenue ``(1 - alpha) * p * I``."""
    return (1.0 - alpha) * p * total


def revenue(
    inst: MarketInstance,
    price: PricePoint,
    chosen: Iterable[int],
    method: ImprovementMethod = ImprovementMethod.CLOSED_FORM,
) -> float:
    price.check_alpha(inst.alpha)
    total = improvement(inst, price.p, chosen, method).total
    return revenue_from_improvement(inst.alpha, price.p, total)


def payments(
    inst: MarketInstance,
    price: PricePoint,
    chosen: Iterable[int],
    method: ImprovementMethod = ImprovementMethod.CLOSED_FORM,
) -> tuple[float, float]:
    """``(requester_total, supplier_pool)`` = ``(p*I, q*I)``."""
    price.check_alpha(inst.alpha)
    total = improvement(inst, price.p, chosen, method).total
    return price.p * total, price.q * total


def supplier_rationality(inst: MarketInstance, price: PricePoint, u: int) -> bool:
    """Whether supplier ``u`` would accept the reward rate ``alpha * p``."""
    if u not in inst.suppliers:
        raise ValueError(f"{u} is not a supplier")
    return inst.supplier_valuations[u] <= inst.alpha * price.p


def load_valuations(
    path: str | PathLike, graph: DirectedGraph
) -> tuple[dict[int, float], dict[int, float]]:
    """Read a ``node,role,valuation`` CSV into requester and supplier maps."""
    req: dict[int, float] = {}
    sup: dict[int, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != [
            "node",
            "role",
            "valuation",
        ]:
            raise ValueError(f"{path}: header must be node,role,valuation")
        for lineno, row in enumerate(reader, 2):
            u = graph.node_id(row["node"].strip())
            role = row["role"].strip().lower()
            val = float(row["valuation"])
            if not (0.0 <= val <= 1.0) or math.isnan(val):
                raise ValueError(f"{path}:{lineno}: valuation {val!r} outside [0, 1]")
            if role == "requester":
                req[u] = val
            elif role == "supplier":
                sup[u] = val
            else:
                raise ValueError(f"{path}:{lineno}: unknown role {role!r}")
    return req, sup


def market_from_valuations(
    graph: DirectedGraph,
    requester_valuations: Mapping[int, float],
    supplier_valuations: Mapping[int, float],
    tau: int,
    budget: int,
    alpha: float,
) -> MarketInstance:
    return MarketInstance(
        graph,
        frozenset(requester_valuations),
        frozenset(supplier_valuations),
        requester_valuations,
        supplier_valuations,
        tau,
        budget,
        alpha,
    )
