"""Brute-force cross-checks of the solvers on a concrete market."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .market import (
    MarketInstance,
    improvement_closed_form,
    improvement_exact,
    potential_suppliers,
)
from .pricing import (
    DEFAULT_BRUTE_LIMIT,
    Subroutine,
    brute_supplier_set,
    candidate_price_search,
    discretized_price_search,
    greedy_supplier_set,
    price_grid,
)
from .shapley import CoalitionGame, shapley_exact, standalone_check

GREEDY_RATIO = 1.0 - 1.0 / math.e
REL_TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _rel_ge(a: float, b: float, tol: float = REL_TOL) -> bool:
    return a >= b - tol * max(1.0, abs(b))


def run_checks(
    inst: MarketInstance,
    epsilon: float,
    budgets: list[int],
    brute_limit: int = DEFAULT_BRUTE_LIMIT,
) -> list[CheckResult]:
    grid = price_grid(epsilon).points
    results = []

    worst, checked, skipped = math.inf, 0, 0
    lazy_ok = True
    for b in budgets:
        cell = inst.with_budget(b)
        for p in grid:
            price = cell.price(p)
            g = greedy_supplier_set(cell, price)
            lazy_ok &= greedy_supplier_set(cell, price, lazy=True) == g
            if len(potential_suppliers(cell, price.q)) > brute_limit:
                skipped += 1
                continue
            br = brute_supplier_set(cell, price, brute_limit)
            checked += 1
            if br.final_revenue > 0:
                worst = min(worst, g.final_revenue / br.final_revenue)
            if not (_rel_ge(g.final_revenue, GREEDY_RATIO * br.final_revenue)
                    and _rel_ge(br.final_revenue, g.final_revenue)):
                results.append(CheckResult("greedy_ratio", False, f"b={b} p={p}"))
                break
        else:
            continue
        break
    else:
        results.append(CheckResult(
            "greedy_ratio", True,
            f"{checked} prices checked, {skipped} skipped, worst ratio "
            f"{'n/a' if worst == math.inf else f'{worst:.4f}'}"))
    results.append(CheckResult("lazy_greedy_identical", lazy_ok))

    bad = []
    for p in grid:
        chosen = greedy_supplier_set(inst, inst.price(p)).chosen
        cf = improvement_closed_form(inst, p, chosen)
        lit = improvement_closed_form(inst, p, chosen, collapsed=False)
        ex = improvement_exact(inst, p, chosen)
        ok = cf.total == lit.total and (
            cf.total == ex.total if inst.tau == 2 else cf.total <= ex.total)
        if not ok:
            bad.append(p)
    results.append(CheckResult(
        "closed_form_vs_exact", not bad,
        f"{len(grid)} prices" if not bad else f"mismatch at p={bad[:3]}"))

    pool = potential_suppliers(inst, inst.alpha)
    if len(pool) <= brute_limit:
        cand = candidate_price_search(inst, Subroutine.BRUTE, max_pool=brute_limit)
        gridsol = discretized_price_search(inst, epsilon, Subroutine.BRUTE, max_pool=brute_limit)
        results.append(CheckResult(
            "candidate_dominates_grid", _rel_ge(cand.revenue, gridsol.revenue),
            f"candidate {cand.revenue:.6g} vs grid {gridsol.revenue:.6g}"))

    sol = discretized_price_search(inst, epsilon, Subroutine.GREEDY)
    chosen = sol.selection.chosen
    if chosen:
        game = CoalitionGame.from_market(inst, sol.price.p, chosen)
        alloc = shapley_exact(game, sol.price.q)
        eff = sum(alloc.exact_shares.values()) == game.grand_value
        results.append(CheckResult("shapley_efficiency", eff, f"I={game.grand_value}"))
        results.append(CheckResult("shapley_standalone", standalone_check(game, alloc)))
    return results
