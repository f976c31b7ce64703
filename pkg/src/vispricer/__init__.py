"""Pricing a social-visibility boosting service on directed social graphs.

Bounded-hop visibility (:mod:`vispricer.graph`), the requester/supplier
market (:mod:`vispricer.market`), supplier selection and price search
(:mod:`vispricer.pricing`), Shapley division of the improvement
(:mod:`vispricer.shapley`) and a seeded experiment harness
(:mod:`vispricer.experiment`).
"""

from .graph import (
    INFINITE,
    DirectedGraph,
    OverlayGraph,
    VisibleSet,
    bounded_distance,
    leveled_visible_sets,
    load_edge_list,
    visibility_score,
    visible_set,
)
from .market import (
    ImprovementMethod,
    ImprovementReport,
    MarketInstance,
    ParticipationProfile,
    PricePoint,
    augmented_graph,
    improvement_closed_form,
    improvement_exact,
    market_from_valuations,
    participating_requesters,
    payments,
    potential_suppliers,
    revenue,
    supplier_rationality,
)
from .pricing import (
    PriceGrid,
    PricingSolution,
    Subroutine,
    SupplierSelection,
    brute_supplier_set,
    candidate_price_search,
    discretized_price_search,
    greedy_supplier_set,
    lipschitz_gap_report,
    price_grid,
    topvis_supplier_set,
)
from .shapley import (
    CoalitionGame,
    PermutationSampler,
    ShapleyAllocation,
    hoeffding_bound,
    reward_allocation,
    shapley_exact,
    shapley_sampled,
    standalone_check,
)

__all__ = [
    "INFINITE",
    "DirectedGraph",
    "OverlayGraph",
    "VisibleSet",
    "bounded_distance",
    "leveled_visible_sets",
    "load_edge_list",
    "visibility_score",
    "visible_set",
    "ImprovementMethod",
    "ImprovementReport",
    "MarketInstance",
    "ParticipationProfile",
    "PricePoint",
    "augmented_graph",
    "improvement_closed_form",
    "improvement_exact",
    "market_from_valuations",
    "participating_requesters",
    "payments",
    "potential_suppliers",
    "revenue",
    "supplier_rationality",
    "PriceGrid",
    "PricingSolution",
    "Subroutine",
    "SupplierSelection",
    "brute_supplier_set",
    "candidate_price_search",
    "discretized_price_search",
    "greedy_supplier_set",
    "lipschitz_gap_report",
    "price_grid",
    "topvis_supplier_set",
    "CoalitionGame",
    "PermutationSampler",
    "ShapleyAllocation",
    "hoeffding_bound",
    "reward_allocation",
    "shapley_exact",
    "shapley_sampled",
    "standalone_check",
]

__version__ = "0.1.0"
