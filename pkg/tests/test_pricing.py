import json
import math

import numpy as np
import pytest

from helpers import all_subsets, four_node_instance, random_instance
from vispricer.generators import star_graph
from vispricer.graph import DirectedGraph
from vispricer.market import (
    improvement_closed_form,
    market_from_valuations,
    potential_suppliers,
    revenue,
)
from vispricer.pricing import (
    PoolTooLargeError,
    Subroutine,
    brute_supplier_set,
    candidate_price_search,
    candidate_prices,
    discretized_price_search,
    greedy_supplier_set,
    lipschitz_gap_report,
    price_grid,
    search_prices,
    topvis_supplier_set,
)

RATIO = 1 - 1 / math.e


def oracle_best(inst, price):
    """Max closed-form revenue over all feasible subsets, via the literal formula."""
    pool = potential_suppliers(inst, price.q)
    best = 0.0
    for combo in all_subsets(pool, inst.budget):
        tot = improvement_closed_form(inst, price.p, combo, collapsed=False).total
        best = max(best, (1 - inst.alpha) * price.p * tot)
    return best


class TestPriceGrid:
    def test_examples(self):
        assert price_grid(0.2).points == (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
        assert price_grid(0.3).points == (0.0, 0.3, 0.6, 0.9, 1.0)
        assert price_grid(1.0).points == (0.0, 1.0)

    @pytest.mark.parametrize("eps", [0.2, 0.1, 0.05, 0.025, 0.0125, 0.3, 0.07])
    def test_invariants(self, eps):
        pts = price_grid(eps).points
        assert pts[0] == 0.0 and pts[-1] == 1.0
        assert all(a < b for a, b in zip(pts, pts[1:]))
        assert len(pts) == math.floor(1 / eps + 1e-9) + 1 + (abs(1 / eps - round(1 / eps)) > 1e-9)

    @pytest.mark.parametrize("coarse,fine", [(0.2, 0.1), (0.1, 0.05), (0.05, 0.025),
                                             (0.025, 0.0125)])
    def test_nested(self, coarse, fine):
        assert set(price_grid(coarse).points) <= set(price_grid(fine).points)

    @pytest.mark.parametrize("eps", [0.0, -0.1, 1.5, float("nan")])
    def test_range(self, eps):
        with pytest.raises(ValueError):
            price_grid(eps)


class TestGreedy:
    def test_empty_pool(self, four_node):
        sel = greedy_supplier_set(four_node, four_node.price(0.1))  # q=0.06 < q_s
        assert sel.chosen == () and sel.final_revenue == 0.0

    def test_budget_one_is_best_single(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            m = random_instance(rng, n=12, budget=1, edge_prob=0.2)
            price = m.price(float(rng.random()) * 0.6 + 0.1)
            pool = sorted(potential_suppliers(m, price.q))
            sel = greedy_supplier_set(m, price)
            if not pool:
                assert sel.chosen == ()
                continue
            vals = {u: improvement_closed_form(m, price.p, [u]).total for u in pool}
            top = max(vals.values())
            assert sel.chosen == (min(u for u in pool if vals[u] == top),)
            assert sel == brute_supplier_set(m, price) or vals[sel.chosen[0]] == 0

    def test_fills_budget_with_zero_gains(self):
        g = DirectedGraph(5)
        m = market_from_valuations(g, {0: 0.9}, {1: 0.1, 2: 0.1, 3: 0.1}, 2, 2, 0.6)
        sel = greedy_supplier_set(m, m.price(0.5))
        # each supplier only adds itself; ties resolved by id
        assert sel.chosen == (1, 2)
        assert sel.improvement == 2

    def test_gains_non_increasing_and_sum(self):
        rng = np.random.default_rng(12)
        for _ in range(40):
            m = random_instance(rng, n=15, budget=4, n_sup=7, edge_prob=0.2)
            price = m.price(0.3)
            sel = greedy_supplier_set(m, price)
            assert all(a >= b for a, b in zip(sel.marginal_gains, sel.marginal_gains[1:]))
            assert sum(sel.marginal_gains) == pytest.approx(sel.final_revenue, abs=1e-12)
            assert sel.final_revenue == revenue(m, price, sel.chosen)
            assert len(sel.chosen) <= m.budget
            assert set(sel.chosen) <= potential_suppliers(m, price.q)

    def test_lazy_identical(self):
        rng = np.random.default_rng(13)
        for _ in range(80):
            m = random_instance(rng, n=int(rng.integers(6, 25)), budget=int(rng.integers(1, 6)),
                                edge_prob=float(rng.choice([0.05, 0.15, 0.3])))
            price = m.price(float(rng.random()))
            assert greedy_supplier_set(m, price, lazy=True) == greedy_supplier_set(m, price)

    def test_ratio_against_oracle(self):
        rng = np.random.default_rng(14)
        for _ in range(60):
            m = random_instance(rng, n=int(rng.integers(6, 21)), n_sup=int(rng.integers(1, 9)),
                                budget=int(rng.integers(1, 4)))
            price = m.price(float(rng.random()))
            best = oracle_best(m, price)
            assert brute_supplier_set(m, price).final_revenue == pytest.approx(best, abs=1e-12)
            assert greedy_supplier_set(m, price).final_revenue >= RATIO * best - 1e-12


class TestBrute:
    def test_singleton_pool(self):
        m = market_from_valuations(DirectedGraph(3), {0: 0.9}, {1: 0.1}, 2, 2, 0.6)
        assert brute_supplier_set(m, m.price(0.5)).chosen == (1,)
        # at p=0 every set earns 0, so the empty set wins the tie
        assert brute_supplier_set(m, m.price(0.0)).chosen == ()

    def test_zero_improvement_prefers_empty(self):
        # supplier already links to the requester: adding it changes nothing
        g = DirectedGraph(2, [(1, 0)])
        m = market_from_valuations(g, {0: 0.9}, {1: 0.1}, 2, 2, 0.6)
        assert brute_supplier_set(m, m.price(0.5)).chosen == ()

    def test_clones(self):
        m = four_node_instance(clones=1, budget=2)
        sel = brute_supplier_set(m, m.price(0.5))
        assert sel.chosen == (1, 4) and sel.improvement == 3
        m1 = m.with_budget(1)
        assert brute_supplier_set(m1, m1.price(0.5)).chosen == (1,)

    def test_budget_monotone(self):
        rng = np.random.default_rng(15)
        for _ in range(20):
            m = random_instance(rng, n=12, n_sup=6, budget=1)
            price = m.price(0.4)
            revs = [brute_supplier_set(m.with_budget(b), price).final_revenue for b in (1, 2, 3)]
            assert revs[0] <= revs[1] <= revs[2]

    def test_guard(self):
        n = 30
        m = market_from_valuations(DirectedGraph(n), {0: 0.9}, {i: 0.0 for i in range(1, n)},
                                   2, 2, 0.6)
        with pytest.raises(PoolTooLargeError):
            brute_supplier_set(m, m.price(0.5))
        assert len(brute_supplier_set(m, m.price(0.5), max_pool=40).chosen) == 2


class TestTopVis:
    def test_equal_visibility(self):
        m = market_from_valuations(DirectedGraph(6), {0: 0.9}, {i: 0.1 for i in range(1, 6)},
                                   2, 2, 0.6)
        assert topvis_supplier_set(m, m.price(0.5)).chosen == (1, 2)

    def test_budget_covers_pool(self):
        m = market_from_valuations(DirectedGraph(4), {0: 0.9}, {1: 0.1, 2: 0.1}, 2, 5, 0.6)
        assert topvis_supplier_set(m, m.price(0.5)).chosen == (1, 2)

    def test_hub_beats_leaf(self):
        g = star_graph(5)  # hub 0, leaves 1..5
        extra = DirectedGraph(7, list(g.edges()))
        m = market_from_valuations(extra, {6: 0.9}, {0: 0.1, 1: 0.1}, 2, 1, 0.6)
        assert topvis_supplier_set(m, m.price(0.5)).chosen == (0,)


class TestPriceSearch:
    def test_all_below_epsilon(self):
        g = star_graph(3)
        m = market_from_valuations(g, {1: 0.05, 2: 0.1}, {0: 0.0}, 2, 1, 0.6)
        sol = discretized_price_search(m, 0.2, Subroutine.GREEDY)
        assert sol.revenue == 0.0
        assert all(r == 0.0 for _, r in sol.search_trace)
        assert sol.price.p == 1.0  # tie rule: last grid point

    def test_epsilon_one(self):
        rng = np.random.default_rng(16)
        m = random_instance(rng, n=10)
        for v in m.requester_valuations.values():
            assert 0 < v < 1
        sol = discretized_price_search(m, 1.0)
        assert [p for p, _ in sol.search_trace] == [0.0, 1.0]
        assert sol.revenue == 0.0 and sol.price.p == 1.0

    def test_tie_goes_to_largest_p(self, four_node):
        prices = [four_node.price(p) for p in (0.0, 0.3, 0.5)]
        sol = search_prices(four_node, prices, Subroutine.GREEDY)
        assert sol.price.p == 0.5
        flat = search_prices(four_node, [four_node.price(p) for p in (0.7, 0.8)])
        assert flat.price.p == 0.8 and flat.revenue == 0.0

    def test_revenue_is_trace_max(self):
        rng = np.random.default_rng(17)
        for sub in Subroutine:
            m = random_instance(rng, n=14, budget=2)
            sol = discretized_price_search(m, 0.05, sub)
            assert sol.revenue == max(r for _, r in sol.search_trace)
            best_ps = [p for p, r in sol.search_trace if r == sol.revenue]
            assert sol.price.p == max(best_ps)
            assert sol.price.q == m.alpha * sol.price.p

    def test_refinement_dominance(self):
        rng = np.random.default_rng(18)
        for _ in range(25):
            m = random_instance(rng, n=12, budget=2)
            r2 = discretized_price_search(m, 0.2, Subroutine.BRUTE).revenue
            r1 = discretized_price_search(m, 0.1, Subroutine.BRUTE).revenue
            assert r1 >= r2

    def test_candidates_example(self):
        m = market_from_valuations(DirectedGraph(2), {0: 0.6}, {1: 0.3}, 2, 1, 0.6)
        assert [c.p for c in candidate_prices(m)] == pytest.approx([0.5, 0.6, 1.0], abs=1e-15)

    def test_candidates_clamp(self):
        m = market_from_valuations(DirectedGraph(3), {0: 0.4}, {1: 0.9, 2: 0.7}, 2, 1, 0.6)
        assert [c.p for c in candidate_prices(m)] == [0.4, 1.0]

    def test_candidate_threshold_includes_supplier(self):
        rng = np.random.default_rng(19)
        for _ in range(300):
            q, a = float(rng.random()), float(rng.uniform(0.05, 0.95))
            m = market_from_valuations(DirectedGraph(2), {0: 0.9}, {1: q}, 2, 1, a)
            for c in candidate_prices(m):
                if c.p == pytest.approx(q / a, rel=1e-12):
                    assert potential_suppliers(m, c.q) == {1}

    def test_candidate_matches_full_brute(self):
        rng = np.random.default_rng(20)
        for _ in range(30):
            m = random_instance(rng, n=int(rng.integers(5, 12)), n_req=int(rng.integers(1, 5)),
                                n_sup=int(rng.integers(1, 5)), budget=int(rng.integers(1, 4)),
                                edge_prob=0.25)
            sol = candidate_price_search(m, Subroutine.BRUTE)
            best = max(oracle_best(m, c) for c in candidate_prices(m))
            assert sol.revenue == pytest.approx(best, rel=1e-12, abs=1e-15)


class TestGapReport:
    def test_single(self, four_node):
        rows = lipschitz_gap_report(four_node, [0.1])
        assert len(rows) == 1 and rows[0].gap == 0.0

    def test_nested(self):
        rng = np.random.default_rng(21)
        m = random_instance(rng, n=12, budget=2)
        rows = lipschitz_gap_report(m, [0.2, 0.1], Subroutine.BRUTE)
        assert rows[1].revenue >= rows[0].revenue and rows[1].gap == 0.0

    def test_full_epsilon_sweep(self):
        rng = np.random.default_rng(22)
        m = random_instance(rng, n=15, budget=2)
        eps = [0.2, 0.1, 0.05, 0.025, 0.0125]
        rows = lipschitz_gap_report(m, eps, Subroutine.GREEDY)
        assert [r.epsilon for r in rows] == eps
        assert min(r.gap for r in rows) == 0.0
        assert all(r.gap >= 0 for r in rows)

    def test_empty(self, four_node):
        with pytest.raises(ValueError):
            lipschitz_gap_report(four_node, [])


def test_solution_json(four_node):
    sol = discretized_price_search(four_node, 0.25)
    d = json.loads(json.dumps(sol.to_dict(four_node)))
    assert set(d) >= {"price_p", "price_q", "chosen_suppliers", "marginal_gains", "revenue",
                      "trace", "subroutine", "epsilon"}
    assert d["chosen_suppliers"] == ["s"] and d["price_p"] == 0.5
    assert d["subroutine"] == "greedy" and d["epsilon"] == 0.25


def test_deterministic():
    rng = np.random.default_rng(23)
    m = random_instance(rng, n=16, budget=3)
    for sub in Subroutine:
        a = discretized_price_search(m, 0.05, sub)
        b = discretized_price_search(m, 0.05, sub)
        assert a == b and a.selections == b.selections


def test_subroutine_parse():
    assert Subroutine.parse("BRUTE") is Subroutine.BRUTE
    with pytest.raises(ValueError):
        Subroutine.parse("celf")
