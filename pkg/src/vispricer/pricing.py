"""Supplier selection and posted-price search.

Supplier selection at a fixed price pair (greedy, exhaustive, top-visibility)
and price search over a uniform grid or over the finite set of candidate
prices where participation changes.  All solvers use the closed-form
improvement as objective.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .graph import visibility_score
from .market import (
    MarketInstance,
    PricePoint,
    participating_requesters,
    potential_suppliers,
    revenue_from_improvement,
)

DEFAULT_BRUTE_LIMIT = 20


class Subroutine(enum.Enum):
    GREEDY = "greedy"
    BRUTE = "brute"
    TOPVIS = "topvis"

    @classmethod
    def parse(cls, name: "str | Subroutine") -> "Subroutine":
        if isinstance(name, cls):
            return name
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown subroutine {name!r}; expected one of "
                             f"{[s.value for s in cls]}") from None


class PoolTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class SupplierSelection:
    chosen: tuple[int, ...]
    marginal_gains: tuple[float, ...]
    final_revenue: float
    price: PricePoint
    improvement: int = 0


@dataclass(frozen=True)
class PriceGrid:
    step: float
    points: tuple[float, ...]


@dataclass(frozen=True)
class PricingSolution:
    price: PricePoint
    selection: SupplierSelection
    revenue: float
    search_trace: tuple[tuple[float, float], ...]
    subroutine: Subroutine
    epsilon: float | None = None
    # per-point selections, aligned with search_trace
    selections: tuple[SupplierSelection, ...] = field(default=(), repr=False, compare=False)

    def to_dict(self, inst: MarketInstance | None = None) -> dict:
        label = inst.graph.label if inst is not None else str
        return {
            "price_p": self.price.p,
            "price_q": self.price.q,
            "chosen_suppliers": [label(s) for s in self.selection.chosen],
            "marginal_gains": list(self.selection.marginal_gains),
            "revenue": self.revenue,
            "improvement": self.selection.improvement,
            "trace": [[p, r] for p, r in self.search_trace],
            "subroutine": self.subroutine.value,
            "epsilon": self.epsilon,
        }


class _Objective:
    """Closed-form improvement restricted to the requesters active at ``p``."""

    def __init__(self, inst: MarketInstance, price: PricePoint):
        price.check_alpha(inst.alpha)
        self.inst = inst
        self.price = price
        self.tables = inst.tables
        self.active = sorted(participating_requesters(inst, price.p))
        self.pool = sorted(potential_suppliers(inst, price.q))
        self.scale = 1.0 - inst.alpha

    def value(self, covered: int) -> int:
        return self.tables.total(self.active, covered)

    def revenue(self, total: int) -> float:
        return revenue_from_improvement(self.inst.alpha, self.price.p, total)

    def gain(self, total: int) -> float:
        # marginal revenue of an integer improvement increment
        return self.scale * self.price.p * total

    def selection(self, chosen: Sequence[int]) -> SupplierSelection:
        """Record ``chosen`` in order with per-step revenue increments."""
        cover = self.tables.supplier_cover
        covered, prev, gains = 0, 0, []
        for s in chosen:
            covered |= cover[s]
            cur = self.value(covered)
            gains.append(self.gain(cur - prev))
            prev = cur
        return SupplierSelection(tuple(chosen), tuple(gains), self.revenue(prev), self.price, prev)


def greedy_supplier_set(
    inst: MarketInstance, price: PricePoint, lazy: bool = False
) -> SupplierSelection:
    """Pick up to ``budget`` suppliers, each with the largest marginal revenue.

    Ties go to the smallest node id.  Zero-gain suppliers are still added
    until the budget or the pool runs out.  ``lazy=True`` uses stale upper
    bounds in a heap and returns the same selection.
    """
    obj = _Objective(inst, price)
    if lazy:
        chosen = _lazy_greedy(obj, inst.budget)
    else:
        chosen = _naive_greedy(obj, inst.budget)
    return obj.selection(chosen)


def _naive_greedy(obj: _Objective, budget: int) -> list[int]:
    cover = obj.tables.supplier_cover
    remaining = list(obj.pool)
    chosen: list[int] = []
    covered, current = 0, 0
    for _ in range(min(budget, len(remaining))):
        best, best_gain = None, -1.0
        for u in remaining:
            g = obj.gain(obj.value(covered | cover[u]) - current)
            if g > best_gain:
                best, best_gain = u, g
        chosen.append(best)
        remaining.remove(best)
        covered |= cover[best]
        current = obj.value(covered)
    return chosen


def _lazy_greedy(obj: _Objective, budget: int) -> list[int]:
    cover = obj.tables.supplier_cover
    # heap of (-gain, id, round evaluated); stale gains are upper bounds
    heap = [(-obj.gain(obj.value(cover[u])), u, 0) for u in obj.pool]
    heapq.heapify(heap)
    chosen: list[int] = []
    covered, current = 0, 0
    for t in range(min(budget, len(heap))):
        while True:
            neg, u, stamp = heapq.heappop(heap)
            if stamp == t:
                break
            g = obj.gain(obj.value(covered | cover[u]) - current)
            heapq.heappush(heap, (-g, u, t))
        chosen.append(u)
        covered |= cover[u]
        current = obj.value(covered)
    return chosen


def brute_supplier_set(
    inst: MarketInstance, price: PricePoint, max_pool: int = DEFAULT_BRUTE_LIMIT
) -> SupplierSelection:
    """Exhaustive search over all subsets of the pool with at most ``budget`` members.

    Among equal revenues the lexicographically smallest sorted id tuple wins,
    so the empty set beats any zero-gain selection.
    """
    obj = _Objective(inst, price)
    if len(obj.pool) > max_pool:
        raise PoolTooLargeError(
            f"{len(obj.pool)} potential suppliers exceeds the brute-force limit {max_pool}"
        )
    cover = obj.tables.supplier_cover
    best: tuple[int, ...] = ()
    best_rev = obj.revenue(0)
    for k in range(1, min(inst.budget, len(obj.pool)) + 1):
        # combinations() yields sorted tuples in lexicographic order
        for combo in itertools.combinations(obj.pool, k):
            covered = 0
            for s in combo:
                covered |= cover[s]
            rev = obj.revenue(obj.value(covered))
            if rev > best_rev or (rev == best_rev and combo < best):
                best, best_rev = combo, rev
    return obj.selection(best)


def topvis_supplier_set(inst: MarketInstance, price: PricePoint) -> SupplierSelection:
    """The ``budget`` potential suppliers with the highest visibility score."""
    obj = _Objective(inst, price)
    ranked = sorted(obj.pool, key=lambda s: (-visibility_score(inst.graph, s, inst.tau), s))
    return obj.selection(ranked[: inst.budget])


_SOLVERS: dict[Subroutine, Callable[..., SupplierSelection]] = {
    Subroutine.GREEDY: greedy_supplier_set,
    Subroutine.BRUTE: brute_supplier_set,
    Subroutine.TOPVIS: topvis_supplier_set,
}


def select_suppliers(
    inst: MarketInstance, price: PricePoint, subroutine: Subroutine | str, **kwargs
) -> SupplierSelection:
    return _SOLVERS[Subroutine.parse(subroutine)](inst, price, **kwargs)


def price_grid(epsilon: float) -> PriceGrid:
    """Uniform grid ``{0, eps, 2*eps, ..., floor(1/eps)*eps, 1}``.

    Points are rounded to 12 decimals so grids with nested steps (0.1 and
    0.05, say) share their common points exactly.
    """
    if not (0.0 < epsilon <= 1.0) or math.isnan(epsilon):
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon!r}")
    top = math.floor(1.0 / epsilon + 1e-9)
    pts = {round(k * epsilon, 12) for k in range(top + 1)}
    pts = {x for x in pts if x < 1.0 - 1e-12}
    pts.add(1.0)
    return PriceGrid(epsilon, tuple(sorted(pts)))


def search_prices(
    inst: MarketInstance,
    prices: Iterable[PricePoint],
    subroutine: Subroutine | str = Subroutine.GREEDY,
    epsilon: float | None = None,
    **kwargs,
) -> PricingSolution:
    """Evaluate ``prices`` in order; a later price wins revenue ties."""
    sub = Subroutine.parse(subroutine)
    solve = _SOLVERS[sub]
    best: SupplierSelection | None = None
    best_rev = 0.0
    trace, sels = [], []
    for price in prices:
        sel = solve(inst, price, **kwargs)
        trace.append((price.p, sel.final_revenue))
        sels.append(sel)
        if sel.final_revenue >= best_rev:
            best, best_rev = sel, sel.final_revenue
    if best is None:
        raise ValueError("no prices to search")
    return PricingSolution(best.price, best, best_rev, tuple(trace), sub, epsilon, tuple(sels))


def discretized_price_search(
    inst: MarketInstance,
    epsilon: float,
    subroutine: Subroutine | str = Subroutine.GREEDY,
    **kwargs,
) -> PricingSolution:
    grid = price_grid(epsilon)
    return search_prices(inst, (inst.price(p) for p in grid.points), subroutine, epsilon, **kwargs)


def candidate_prices(inst: MarketInstance) -> list[PricePoint]:
    """Prices at which a requester leaves or a supplier joins, plus ``p = 1``.

    A supplier threshold ``q_u / alpha`` is nudged up by an ulp or two when
    floating-point rounding would otherwise leave ``alpha * p`` just below
    ``q_u``.
    """
    a = inst.alpha
    ps = {inst.requester_valuations[u] for u in inst.requesters}
    for u in inst.suppliers:
        q = inst.supplier_valuations[u]
        p = q / a
        while a * p < q and p <= 1.0:
            p = math.nextafter(p, math.inf)
        if p <= 1.0:
            ps.add(p)
    ps.add(1.0)
    return [inst.price(p) for p in sorted(ps)]


def candidate_price_search(
    inst: MarketInstance, subroutine: Subroutine | str = Subroutine.GREEDY, **kwargs
) -> PricingSolution:
    return search_prices(inst, candidate_prices(inst), subroutine, None, **kwargs)


@dataclass(frozen=True)
class GapRow:
    epsilon: float
    revenue: float
    gap: float


def lipschitz_gap_report(
    inst: MarketInstance,
    epsilons: Sequence[float],
    subroutine: Subroutine | str = Subroutine.GREEDY,
    **kwargs,
) -> list[GapRow]:
    """Best revenue per search step and its shortfall against the best step."""
    if not epsilons:
        raise ValueError("need at least one epsilon")
    revs = [discretized_price_search(inst, e, subroutine, **kwargs).revenue for e in epsilons]
    top = max(revs)
    return [GapRow(e, r, top - r) for e, r in zip(epsilons, revs)]
