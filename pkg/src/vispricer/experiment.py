"""Seeded experiment harness: market sampling, solver sweeps and CSV output.

One market instance is sampled per seed and reused for every budget.
Result rows come out in the fixed order subroutine x epsilon x budget, so
two runs with the same seed write identical CSVs apart from the
``wall_time_ms`` column.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .graph import DirectedGraph, load_edge_list
from .market import MarketInstance, load_valuations, market_from_valuations
from .pricing import (
    DEFAULT_BRUTE_LIMIT,
    PricingSolution,
    Subroutine,
    candidate_price_search,
    discretized_price_search,
)
from .shapley import (
    EXACT_PLAYER_LIMIT,
    CoalitionGame,
    PermutationSampler,
    shapley_exact,
    shapley_sampled,
)

logger = logging.getLogger(__name__)

SEED_ENV = "VISPRICER_SEED"

RUN_COLUMNS = (
    "dataset", "subroutine", "search", "epsilon", "budget", "price_p", "price_q",
    "revenue", "improvement", "chosen_suppliers", "status", "wall_time_ms",
)
TRACE_COLUMNS = (
    "dataset", "subroutine", "search", "epsilon", "budget", "p", "revenue",
    "improvement", "chosen_suppliers",
)
SHAPLEY_COLUMNS = (
    "dataset", "subroutine", "search", "epsilon", "budget", "method", "supplier",
    "share", "share_exact", "reward", "K", "delta", "error_bound",
)
PLOT_COLUMNS = ("epsilon", "subroutine", "revenue", "wall_time_ms")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    graph_path: str
    undirected: bool = False
    tau: int = 2
    alpha: float = 0.6
    budget_list: list[int] = field(default_factory=lambda: [1, 2, 3, 4])
    epsilon_list: list[float] = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025, 0.0125])
    gamma: float = 0.05
    requester_beta: tuple[float, float] = (3.0, 6.0)
    supplier_beta: tuple[float, float] = (6.0, 3.0)
    seed: int = 0
    subroutines: list[str] = field(default_factory=lambda: ["greedy", "topvis", "brute"])
    shapley_rounds: int = 200
    shapley_delta: float = 0.05
    output_dir: str = "results"
    # extensions beyond the core protocol
    candidate_prices: bool = False
    valuations_path: str | None = None
    dataset: str | None = None
    brute_limit: int = DEFAULT_BRUTE_LIMIT

    def __post_init__(self):
        self.requester_beta = tuple(self.requester_beta)
        self.supplier_beta = tuple(self.supplier_beta)
        self.budget_list = list(self.budget_list)
        self.epsilon_list = list(self.epsilon_list)
        self.subroutines = list(self.subroutines)

    @property
    def dataset_name(self) -> str:
        return self.dataset or Path(self.graph_path).stem

    def validate(self, node_count: int | None = None) -> None:
        if not (self.budget_list and self.epsilon_list and self.subroutines):
            raise ConfigError("budget_list, epsilon_list and subroutines must be non-empty")
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError("alpha must lie in (0, 1)")
        if not isinstance(self.tau, int) or self.tau < 1:
            raise ConfigError("tau must be a positive integer")
        if any(not isinstance(b, int) or b < 1 for b in self.budget_list):
            raise ConfigError("budgets must be positive integers")
        if any(not (0.0 < e <= 1.0) for e in self.epsilon_list):
            raise ConfigError("every epsilon must lie in (0, 1]")
        for s in self.subroutines:
            try:
                Subroutine.parse(s)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.shapley_rounds < 1 or not (0.0 < self.shapley_delta <= 1.0):
            raise ConfigError("need shapley_rounds >= 1 and shapley_delta in (0, 1]")
        for name in ("requester_beta", "supplier_beta"):
            ab = getattr(self, name)
            if len(ab) != 2 or min(ab) <= 0:
                raise ConfigError(f"{name} needs two positive shape parameters")
        if self.valuations_path is None:
            if not (0.0 < self.gamma < 1.0):
                raise ConfigError("gamma must lie in (0, 1)")
            if node_count is not None:
                k = role_count(self.gamma, node_count)
                if k < 1 or 2 * k > node_count:
                    raise ConfigError(
                        f"gamma={self.gamma} gives {k} users per role on {node_count} nodes")

    @classmethod
    def from_dict(cls, data: Mapping) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["requester_beta"] = list(self.requester_beta)
        d["supplier_beta"] = list(self.supplier_beta)
        return d


def load_config(path: str | PathLike, env: Mapping[str, str] | None = None) -> ExperimentConfig:
    """Read a JSON config; ``VISPRICER_SEED`` in ``env`` overrides the seed.

    Relative ``graph_path``/``valuations_path`` entries resolve against the
    config file's directory.
    """
    env = os.environ if env is None else env
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    cfg = ExperimentConfig.from_dict(data)
    base = Path(path).resolve().parent
    for name in ("graph_path", "valuations_path"):
        val = getattr(cfg, name)
        if val is not None and not Path(val).is_absolute():
            setattr(cfg, name, str(base / val))
    if env.get(SEED_ENV):
        try:
            cfg.seed = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
    return cfg


def role_count(gamma: float, n: int) -> int:
    # tolerance keeps e.g. 0.29 * 100 from flooring to 28
    return math.floor(gamma * n + 1e-9)


def sample_market(g: DirectedGraph, cfg: ExperimentConfig) -> MarketInstance:
    """Draw disjoint requester/supplier sets and Beta valuations from one seeded stream.

    Requesters are drawn first, then suppliers from the remaining users,
    then requester valuations, then supplier valuations.
    """
    n = g.node_count
    k = role_count(cfg.gamma, n)
    if k < 1 or 2 * k > n:
        raise ConfigError(f"cannot draw 2 x {k} distinct users from {n} nodes")
    rng = np.random.default_rng(cfg.seed)
    requesters = rng.choice(n, size=k, replace=False)
    rest = np.setdiff1d(np.arange(n), requesters)
    suppliers = rng.choice(rest, size=k, replace=False)
    p = rng.beta(*cfg.requester_beta, size=k)
    q = rng.beta(*cfg.supplier_beta, size=k)
    return market_from_valuations(
        g,
        dict(zip(requesters.tolist(), p.tolist())),
        dict(zip(suppliers.tolist(), q.tolist())),
        cfg.tau,
        cfg.budget_list[0],
        cfg.alpha,
    )


def build_market(cfg: ExperimentConfig, g: DirectedGraph | None = None) -> MarketInstance:
    """Load the graph and valuations named by ``cfg`` (or sample valuations)."""
    if g is None:
        g = load_edge_list(cfg.graph_path, cfg.undirected)
    cfg.validate(g.node_count)
    if cfg.valuations_path is not None:
        req, sup = load_valuations(cfg.valuations_path, g)
        return market_from_valuations(g, req, sup, cfg.tau, cfg.budget_list[0], cfg.alpha)
    return sample_market(g, cfg)


@dataclass(frozen=True)
class DatasetStats:
    nodes: int
    arcs: int
    node_pairs: int
    reciprocity: float
    looks_undirected: bool
    dropped_self_loops: int


def dataset_stats(g: DirectedGraph) -> DatasetStats:
    """Size counts after dedup and self-loop removal.

    ``node_pairs`` counts unordered linked pairs, which equals the line count
    of an undirected edge list; ``reciprocity`` is the fraction of arcs whose
    reverse arc exists.
    """
    arcs = g.edge_count
    mutual = sum(1 for u, v in g.edges() if g.has_edge(v, u))
    pairs = arcs - mutual // 2
    recip = mutual / arcs if arcs else 0.0
    return DatasetStats(g.node_count, arcs, pairs, recip, arcs > 0 and mutual == arcs,
                        g.dropped_self_loops)


@dataclass(frozen=True)
class RunRecord:
    dataset: str
    subroutine: str
    epsilon: float | None
    budget: int
    price_p: float
    price_q: float
    revenue: float
    improvement: int
    wall_time_ms: int
    chosen_suppliers: tuple[str, ...]
    search: str = "grid"
    status: str = "ok"

    def row(self) -> dict:
        return {
            "dataset": self.dataset,
            "subroutine": self.subroutine,
            "search": self.search,
            "epsilon": "" if self.epsilon is None else repr(self.epsilon),
            "budget": self.budget,
            "price_p": repr(self.price_p),
            "price_q": repr(self.price_q),
            "revenue": repr(self.revenue),
            "improvement": self.improvement,
            "chosen_suppliers": " ".join(self.chosen_suppliers),
            "status": self.status,
            "wall_time_ms": self.wall_time_ms,
        }


def _cells(cfg: ExperimentConfig):
    for sub in cfg.subroutines:
        for eps in cfg.epsilon_list:
            for b in cfg.budget_list:
                yield Subroutine.parse(sub), "grid", eps, b
        if cfg.candidate_prices:
            for b in cfg.budget_list:
                yield Subroutine.parse(sub), "candidate", None, b


def _solve(inst, sub, search, eps, brute_limit) -> PricingSolution:
    kwargs = {"max_pool": brute_limit} if sub is Subroutine.BRUTE else {}
    if search == "candidate":
        return candidate_price_search(inst, sub, **kwargs)
    return discretized_price_search(inst, eps, sub, **kwargs)


def _write_csv(path: Path, columns: Sequence[str], rows: Sequence[Mapping]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def run_experiment(
    cfg: ExperimentConfig, graph: DirectedGraph | None = None
) -> list[RunRecord]:
    """Run every subroutine x epsilon x budget cell and write the result files.

    Writes ``runs.csv``, ``traces.csv`` (every evaluated price),
    ``shapley.csv``, ``summary.json`` and per-budget plot tables under
    ``output_dir``.  If a cell raises, the rows so far plus a failure row are
    written before the error propagates.
    """
    inst = build_market(cfg, graph)
    g = inst.graph
    label = g.label
    name = cfg.dataset_name
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    records: list[RunRecord] = []
    traces: list[dict] = []
    shap_rows: list[dict] = []
    failure: BaseException | None = None
    for idx, (sub, search, eps, b) in enumerate(_cells(cfg)):
        cell = inst.with_budget(b)
        key = {"dataset": name, "subroutine": sub.value, "search": search,
               "epsilon": "" if eps is None else repr(eps), "budget": b}
        t0 = time.perf_counter()
        try:
            sol = _solve(cell, sub, search, eps, cfg.brute_limit)
        except Exception as exc:  # noqa: BLE001 - recorded, then re-raised below
            logger.error("cell %s failed: %s", key, exc)
            records.append(RunRecord(name, sub.value, eps, b, math.nan, math.nan, math.nan, 0,
                                     0, (), search, f"error: {type(exc).__name__}: {exc}"))
            failure = exc
            break
        ms = int(round((time.perf_counter() - t0) * 1000))
        sel = sol.selection
        records.append(RunRecord(name, sub.value, eps, b, sol.price.p, sol.price.q, sol.revenue,
                                 sel.improvement, ms, tuple(label(s) for s in sel.chosen),
                                 search))
        for (p, rev), s in zip(sol.search_trace, sol.selections):
            traces.append({**key, "p": repr(p), "revenue": repr(rev),
                           "improvement": s.improvement,
                           "chosen_suppliers": " ".join(label(u) for u in s.chosen)})
        shap_rows.extend(_shapley_rows(cell, sol, cfg, idx, key, label))

    _write_csv(out / "runs.csv", RUN_COLUMNS, [r.row() for r in records])
    _write_csv(out / "traces.csv", TRACE_COLUMNS, traces)
    _write_csv(out / "shapley.csv", SHAPLEY_COLUMNS, shap_rows)
    ok = [r for r in records if r.status == "ok"]
    if ok:
        emit_plot_data(ok, out / "plot_data")
    _write_summary(out / "summary.json", cfg, g, inst, records, failure)
    if failure is not None:
        raise failure
    return records


def _shapley_rows(inst, sol, cfg, idx, key, label) -> list[dict]:
    chosen = sol.selection.chosen
    if not chosen:
        return []
    game = CoalitionGame.from_market(inst, sol.price.p, chosen)
    q = sol.price.q
    rows = []
    if len(chosen) <= EXACT_PLAYER_LIMIT:
        ex = shapley_exact(game, q)
        for u in chosen:
            f = ex.exact_shares[u]
            rows.append({**key, "method": "exact", "supplier": label(u),
                         "share": repr(ex.shares[u]), "share_exact": str(f),
                         "reward": repr(ex.rewards[u]), "K": 0, "delta": "",
                         "error_bound": ""})
    sampler = PermutationSampler((cfg.seed * 1_000_003 + idx) & 0xFFFFFFFFFFFFFFFF,
                                 cfg.shapley_rounds)
    sm = shapley_sampled(game, sampler, q, cfg.shapley_delta)
    for u in chosen:
        rows.append({**key, "method": "sampled", "supplier": label(u),
                     "share": repr(sm.shares[u]), "share_exact": "",
                     "reward": repr(sm.rewards[u]), "K": sm.sample_count,
                     "delta": repr(cfg.shapley_delta), "error_bound": repr(sm.error_bounds[u])})
    return rows


def _write_summary(path, cfg, g, inst, records, failure) -> None:
    stats = dataset_stats(g)
    best: dict[str, dict] = {}
    for r in records:
        if r.status != "ok":
            continue
        cur = best.setdefault(r.subroutine, {"mean_revenue": 0.0, "runs": 0, "best_revenue": 0.0})
        cur["runs"] += 1
        cur["mean_revenue"] += r.revenue
        cur["best_revenue"] = max(cur["best_revenue"], r.revenue)
    for cur in best.values():
        cur["mean_revenue"] /= cur["runs"]
    summary = {
        "dataset": cfg.dataset_name,
        "config": cfg.to_dict(),
        "stats": dataclasses.asdict(stats),
        "requesters": len(inst.requesters),
        "suppliers": len(inst.suppliers),
        "by_subroutine": best,
        "runs": len(records),
        "failed": None if failure is None else f"{type(failure).__name__}: {failure}",
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit_plot_data(records: Sequence[RunRecord], output_dir: str | PathLike) -> list[Path]:
    """One CSV per (dataset, budget) with columns epsilon, subroutine, revenue, wall_time_ms.

    Rows are sorted by decreasing epsilon (candidate search last), then
    subroutine name.
    """
    if not records:
        raise ValueError("no records to write")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    groups: dict[tuple[str, int], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.dataset, r.budget), []).append(r)
    paths = []
    for (dataset, budget), rows in sorted(groups.items()):
        rows = sorted(rows, key=lambda r: (r.epsilon is None, -(r.epsilon or 0.0), r.subroutine))
        path = out / f"{dataset}_b{budget}.csv"
        _write_csv(path, PLOT_COLUMNS, [
            {"epsilon": "exh" if r.epsilon is None else repr(r.epsilon),
             "subroutine": r.subroutine, "revenue": repr(r.revenue),
             "wall_time_ms": r.wall_time_ms}
            for r in rows
        ])
        paths.append(path)
    return paths
