"""Shapley-value division of the visibility improvement among suppliers."""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .market import MarketInstance, participating_requesters

EXACT_PLAYER_LIMIT = 20


class ShapleyMethod(enum.Enum):
    EXACT = "exact"
    SAMPLED = "sampled"


class CoalitionGame:
    """Cooperative game over ``players`` with a memoized characteristic.

    ``characteristic`` maps a frozenset of players to a non-negative integer
    and must return 0 for the empty coalition.
    """

    def __init__(self, players: Iterable[int], characteristic: Callable[[frozenset], int]):
        self.players = tuple(players)
        if len(set(self.players)) != len(self.players):
            raise ValueError("duplicate players")
        self.characteristic = characteristic
        self.cached_values: dict[frozenset, int] = {}
        self._lock = threading.Lock()

    def value(self, coalition: Iterable[int]) -> int:
        key = frozenset(coalition)
        v = self.cached_values.get(key)
        if v is None:
            v = self.characteristic(key)
            with self._lock:
                self.cached_values[key] = v
        return v

    @property
    def grand_value(self) -> int:
        return self.value(self.players)

    @classmethod
    def from_market(cls, inst: MarketInstance, p: float, players: Iterable[int]) -> "CoalitionGame":
        """Game whose value is the closed-form improvement ``I(p, M)``."""
        players = tuple(players)
        bad = set(players) - inst.suppliers
        if bad:
            raise ValueError(f"not suppliers: {sorted(bad)}")
        tables = inst.tables
        active = sorted(participating_requesters(inst, p))

        def characteristic(coalition: frozenset) -> int:
            return tables.total(active, tables.union(coalition))

        return cls(players, characteristic)


@dataclass(frozen=True)
class ShapleyAllocation:
    shares: dict[int, float]
    rewards: dict[int, float]
    method: ShapleyMethod
    sample_count: int = 0
    error_bound: float | None = None
    confidence: float | None = None
    # exact rational shares (EXACT only); floats in ``shares`` are derived from these
    exact_shares: dict[int, Fraction] | None = field(default=None, repr=False)
    # per-player bounds from each player's largest observed marginal (SAMPLED only)
    error_bounds: dict[int, float] | None = field(default=None, repr=False)
    max_marginals: dict[int, int] | None = field(default=None, repr=False)

    def to_dict(self, label: Callable[[int], str] = str, total_improvement: int | None = None,
                delta: float | None = None) -> dict:
        return {
            "method": self.method.value,
            "K": self.sample_count,
            "delta": delta if delta is not None else (
                None if self.confidence is None else 1.0 - self.confidence),
            "error_bound": self.error_bound,
            "error_bound_basis": None if self.method is ShapleyMethod.EXACT
            else "max observed marginal",
            "shares": {label(u): v for u, v in self.shares.items()},
            "rewards": {label(u): v for u, v in self.rewards.items()},
            "total_improvement": total_improvement,
        }


@dataclass(frozen=True)
class PermutationSampler:
    """Seeded source of uniform permutations.

    Round ``k`` draws from its own generator seeded by ``(seed, k)``, so the
    sequence does not depend on evaluation order.
    """

    seed: int
    rounds: int

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")

    def permutation(self, players: Sequence[int], k: int) -> list[int]:
        rng = np.random.default_rng([self.seed & 0xFFFFFFFFFFFFFFFF, k])
        order = list(players)
        # Fisher-Yates
        for i in range(len(order) - 1, 0, -1):
            j = int(rng.integers(0, i + 1))
            order[i], order[j] = order[j], order[i]
        return order

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.rounds))


def shapley_exact(game: CoalitionGame, q: float = 0.0, limit: int = EXACT_PLAYER_LIMIT
                  ) -> ShapleyAllocation:
    """Shapley values by enumerating every coalition.

    Weighted marginals are accumulated as integers over the common
    denominator ``n!``, so the rational shares sum exactly to the grand
    coalition's value.
    """
    players = game.players
    n = len(players)
    if n > limit:
        raise ValueError(f"{n} players exceeds the exact Shapley limit {limit}")
    if n == 0:
        return ShapleyAllocation({}, {}, ShapleyMethod.EXACT, exact_shares={})
    values = [0] * (1 << n)
    for mask in range(1, 1 << n):
        values[mask] = game.value(players[i] for i in range(n) if mask >> i & 1)
    weight = [math.factorial(k) * math.factorial(n - k - 1) for k in range(n)]
    denom = math.factorial(n)
    exact = {}
    for i, u in enumerate(players):
        bit = 1 << i
        num = 0
        for mask in range(1 << n):
            if mask & bit:
                continue
            num += weight[mask.bit_count()] * (values[mask | bit] - values[mask])
        exact[u] = Fraction(num, denom)
    shares = {u: float(f) for u, f in exact.items()}
    return ShapleyAllocation(
        shares, reward_allocation(shares, q), ShapleyMethod.EXACT, exact_shares=exact
    )


def hoeffding_bound(max_marginal: float, K: int, delta: float) -> float:
    """Half-width ``max_marginal / sqrt(K) * sqrt(ln(2/delta) / 2)``.

    Holds with probability at least ``1 - delta`` for a single player's
    K-round permutation estimate.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if not (0.0 < delta <= 1.0):
        raise ValueError("delta must lie in (0, 1]")
    if max_marginal < 0:
        raise ValueError("max_marginal must be non-negative")
    return max_marginal / math.sqrt(K) * math.sqrt(0.5 * math.log(2.0 / delta))


def shapley_sampled(
    game: CoalitionGame, sampler: PermutationSampler, q: float = 0.0, delta: float = 0.05
) -> ShapleyAllocation:
    """Permutation-sampling estimate of the Shapley values.

    Each round draws one permutation and updates every player's running
    mean with its marginal against the players ahead of it.
    """
    players = game.players
    est = {u: 0.0 for u in players}
    seen_max = {u: 0 for u in players}
    for k in sampler:
        prefix: list[int] = []
        prev = 0
        for u in sampler.permutation(players, k):
            prefix.append(u)
            cur = game.value(prefix)
            m = cur - prev
            prev = cur
            est[u] = (k * est[u] + m) / (k + 1)
            if m > seen_max[u]:
                seen_max[u] = m
    K = sampler.rounds
    bounds = {u: hoeffding_bound(seen_max[u], K, delta) for u in players}
    return ShapleyAllocation(
        est,
        reward_allocation(est, q),
        ShapleyMethod.SAMPLED,
        sample_count=K,
        error_bound=max(bounds.values(), default=0.0),
        confidence=1.0 - delta,
        error_bounds=bounds,
        max_marginals=seen_max,
    )


def reward_allocation(shares: "ShapleyAllocation | dict[int, float]", q: float) -> dict[int, float]:
    """Monetary reward ``q * phi_u`` per supplier."""
    if isinstance(shares, ShapleyAllocation):
        shares = shares.shares
    return {u: q * phi for u, phi in shares.items()}


def standalone_check(game: CoalitionGame, alloc: ShapleyAllocation) -> bool:
    """True iff no player's share exceeds what it earns alone."""
    if alloc.method is not ShapleyMethod.EXACT:
        raise ValueError("stand-alone check needs an exact allocation")
    shares = alloc.exact_shares if alloc.exact_shares is not None else alloc.shares
    return all(shares[u] <= game.value((u,)) for u in game.players)
