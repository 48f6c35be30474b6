"""Firm growth driven by competition for a scarce market quantity.

The economy holds ``n_firms`` firms and ``n_workers`` workers, both constant.
Every iteration is one production cycle: firms post claims (job offers or
goods for sale), a market matches the scarce supply to the claims uniformly
at random, and firms that die out are replaced by small entrants. Growth is
reported as (size before, size after) pairs, the raw material for all
distribution statistics.

Two scarcity regimes are implemented. When firms spend their profits
(``Scenario.FIRMS_CONSUME``) demand always suffices and the workforce is the
scarce side: firms offer ``size * (1 + margin)`` jobs but only ``n_workers``
workers exist. When only wages are spent (``Scenario.WORKERS_ONLY_CONSUME``)
firms always find the workers they ask for but compete for purchasing power:
only a fraction ``1 / (1 + margin)`` of produced goods can be sold on
average, and realized profits feed back into the next production plan.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .rng import substream

log = logging.getLogger(__name__)

# Stream ids for per-iteration substreams. Fixed so that switching the
# allocation mode or the rounding scheme cannot shift the draws that the
# other stages of an iteration consume.
OFFER_STREAM = 0
JOB_MARKET_STREAM = 1
GOODS_ROUND_STREAM = 2
GOODS_MARKET_STREAM = 3
REPLACE_STREAM = 4


class Scenario(enum.Enum):
    """Which side of the economy is scarce."""

    FIRMS_CONSUME = "FirmsConsume"
    WORKERS_ONLY_CONSUME = "WorkersOnlyConsume"


class Rounding(enum.Enum):
    """How fractional claims are discretized."""

    PROBABILISTIC = "Probabilistic"  # round the aggregate claim, unbiased
    PER_UNIT = "PerUnit"             # each existing unit doubles with prob. margin


class Allocation(enum.Enum):
    """How the scarce supply is split among claims."""

    EXACT_MATCHING = "ExactMatching"             # without replacement, conserves supply
    INDEPENDENT_BINOMIAL = "IndependentBinomial"  # conserves supply on average only


class Metric(enum.Enum):
    EMPLOYEES = "employees"
    SALES = "sales"


@dataclass(frozen=True)
class ModelConfig:
    """All global parameters of one simulation run."""

    n_firms: int = 100
    n_workers: int = 5000
    margin: float = 0.1
    wage: float = 1.0
    price: float = 1.0
    scenario: Scenario = Scenario.FIRMS_CONSUME
    rounding: Rounding = Rounding.PROBABILISTIC
    allocation: Allocation = Allocation.EXACT_MATCHING
    replacement_low: float = 1.0
    replacement_high: float = 2.0
    seed: int = 1
    iterations: int = 500

    def __post_init__(self):
        if self.n_firms < 1:
            raise ValueError("n_firms must be at least 1")
        if self.n_workers < self.n_firms:
            raise ValueError("n_workers must be at least n_firms")
        if not self.margin > 0:
            raise ValueError("margin must be positive")
        if self.wage <= 0 or self.price <= 0:
            raise ValueError("wage and price must be positive")
        if self.rounding is Rounding.PER_UNIT and not 0.0 <= self.margin <= 1.0:
            raise ValueError("per-unit rounding requires margin in [0, 1]")
        if self.replacement_low < 1.0:
            raise ValueError("replacement_low must be at least 1")
        if self.replacement_high < self.replacement_low:
            raise ValueError("replacement_high must be >= replacement_low")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit an unsigned 64-bit integer")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")


@dataclass
class FirmState:
    """Snapshot of one firm's dynamic quantities.

    ``output`` is the exact production ``size * (wage/price) * (1 + margin)``.
    Goods trade in units of one, so ``sold`` is an integer count and can
    exceed ``output`` by less than one unit when the unbiased discretization
    rounded the firm's production up; the same sub-unit granularity is what
    lets small firms occasionally realize more than the expected margin.
    """

    size: int
    job_offer: int
    planned_output: float
    output: float
    sold: float
    realized_margin: float


@dataclass(frozen=True)
class MarketProbabilities:
    """Realized matching probabilities of the last cleared iteration.

    ``aggregate_demand`` and ``aggregate_output`` are in goods units, so
    ``sell_prob == aggregate_demand / aggregate_output`` (clamped to 1).
    """

    fill_prob: float
    sell_prob: float
    aggregate_demand: float
    aggregate_output: float


@dataclass(frozen=True)
class GrowthRecord:
    """One firm's (size before, size after) pair for one iteration."""

    size_before: float
    size_after: float
    metric: Metric = Metric.EMPLOYEES

    def __post_init__(self):
        if not self.size_before > 0:
            raise ValueError("size_before must be positive, growth is size_after/size_before")

    @property
    def growth_rate(self) -> float:
        return self.size_after / self.size_before


class GrowthBatch:
    """Columnar batch of growth records for one iteration and one metric.

    Equivalent to a list of :class:`GrowthRecord` but keeps the values as
    arrays so long runs stay cheap; iterate or call :meth:`to_records` when
    object views are wanted.
    """

    __slots__ = ("metric", "size_before", "size_after")

    def __init__(self, metric: Metric, size_before, size_after):
        before = np.asarray(size_before, dtype=float)
        after = np.asarray(size_after, dtype=float)
        if before.shape != after.shape:
            raise ValueError("size_before and size_after must have matching shapes")
        if before.size and before.min() <= 0:
            raise ValueError("size_before entries must be positive")
        self.metric = metric
        self.size_before = before
        self.size_after = after

    def __len__(self) -> int:
        return self.size_before.size

    def __iter__(self):
        return iter(self.to_records())

    def growth_rates(self) -> np.ndarray:
        return self.size_after / self.size_before

    def to_records(self) -> list[GrowthRecord]:
        return [
            GrowthRecord(float(b), float(a), self.metric)
            for b, a in zip(self.size_before, self.size_after)
        ]


def expected_margin(output: float, size: int, wage: float = 1.0, price: float = 1.0) -> float:
    """Expected profit margin of a firm: (sales - expenses) / expenses."""
    if size < 1:
        raise ValueError("margin is undefined for a firm with no employees")
    return (output * price - size * wage) / (size * wage)


def required_workers(planned_output: float, margin: float, wage: float = 1.0,
                     price: float = 1.0) -> float:
    """Workers needed to produce ``planned_output`` goods at the expected margin.

    Inverse of :func:`production`; may be fractional, callers round it.
    """
    if planned_output < 0:
        raise ValueError("planned_output must be non-negative")
    if margin <= -1.0:
        raise ValueError("margin must exceed -1")
    return planned_output * (price / wage) / (1.0 + margin)


def production(size: int, margin: float, wage: float = 1.0, price: float = 1.0) -> float:
    """Goods a firm with ``size`` workers produces in one iteration."""
    return size * (wage / price) * (1.0 + margin)


def plan_production(prev_output: float, prev_realized_margin: float) -> float:
    """Next production target: last output scaled by realized profitability."""
    if prev_output < 0:
        raise ValueError("prev_output must be non-negative")
    return max(prev_output * (1.0 + prev_realized_margin), 0.0)


def probabilistic_round(x: float, rng: np.random.Generator) -> int:
    """Round up with probability frac(x), down otherwise. Unbiased: E[result] = x."""
    if x < 0:
        raise ValueError("cannot round a negative quantity")
    lo = math.floor(x)
    return int(lo) + int(rng.random() < x - lo)


def round_array(x, rng: np.random.Generator) -> np.ndarray:
    """Vectorized :func:`probabilistic_round`."""
    x = np.asarray(x, dtype=float)
    if x.size and x.min() < 0:
        raise ValueError("cannot round negative quantities")
    lo = np.floor(x)
    return (lo + (rng.random(x.shape) < x - lo)).astype(np.int64)


def per_unit_offer(size: int, margin: float, rng: np.random.Generator) -> int:
    """Job offer when every existing position doubles independently.

    Each of the firm's ``size`` positions is offered twice with probability
    ``margin`` and once otherwise, so the result lies in [size, 2*size] with
    expectation ``size * (1 + margin)``.
    """
    if size < 0:
        raise ValueError("size must be non-negative")
    return int(per_unit_offer_array(np.asarray([size], dtype=np.int64), margin, rng)[0])


def per_unit_offer_array(sizes, margin: float, rng: np.random.Generator) -> np.ndarray:
    if not 0.0 <= margin <= 1.0:
        raise ValueError("per-unit doubling requires margin in [0, 1]")
    sizes = np.asarray(sizes, dtype=np.int64)
    return sizes + rng.binomial(sizes, margin)


def allocate_market(demands, supply: int, mode: Allocation,
                    rng: np.random.Generator) -> np.ndarray:
    """Split a scarce integer supply among integer claims uniformly at random.

    If the claims sum to at most ``supply`` everyone is served in full.
    Otherwise ``ExactMatching`` picks ``supply`` claim-slots without
    replacement (multivariate hypergeometric, total conserved exactly), while
    ``IndependentBinomial`` serves each claim binomially with the average fill
    probability (total conserved only on average). In both modes
    ``E[k_i] = demand_i * supply / sum(demands)``.
    """
    d = np.asarray(demands, dtype=np.int64)
    if d.size == 0:
        raise ValueError("demands must be non-empty")
    if d.min() < 0:
        raise ValueError("demands must be non-negative")
    if supply < 0:
        raise ValueError("supply must be non-negative")
    total = int(d.sum())
    if total <= supply:
        return d.copy()
    if mode is Allocation.EXACT_MATCHING:
        return rng.multivariate_hypergeometric(d, int(supply)).astype(np.int64)
    return rng.binomial(d, supply / total).astype(np.int64)


class Economy:
    """Mutable simulation state: one fixed-length firm population.

    Firm quantities are stored as parallel arrays for speed;
    :attr:`firms` / :meth:`firm` expose per-firm :class:`FirmState` views.
    Randomness is derived from ``config.seed`` and the iteration counter, so
    a trajectory is a pure function of the configuration.
    """

    def __init__(self, config: ModelConfig, initial_sizes=None):
        self.config = config
        n = config.n_firms
        if initial_sizes is None:
            # Equal split of the workforce; remainder goes to the first firms.
            base, extra = divmod(config.n_workers, n)
            sizes = np.full(n, base, dtype=np.int64)
            sizes[:extra] += 1
        else:
            sizes = np.asarray(initial_sizes, dtype=np.int64).copy()
            if sizes.shape != (n,):
                raise ValueError(f"initial_sizes must have length {n}")
            if sizes.size and sizes.min() < 0:
                raise ValueError("initial sizes must be non-negative")
        w, p = config.wage, config.price
        self.size = sizes
        self.job_offer = np.zeros(n, dtype=np.int64)
        self.output = sizes * (w / p) * (1.0 + config.margin)
        self.planned_output = self.output.copy()
        # Prior-period sales at their no-shortage expectation; only used to
        # seed the first planning step and the first sales growth record.
        self.sold = sizes * (w / p)
        self.realized_margin = np.zeros(n)
        self.time = 0
        self.employed = int(sizes.sum())
        self.replaced_last = 0
        self.last_replaced = np.empty(0, dtype=np.int64)
        self.market: MarketProbabilities | None = None

    @property
    def rng_state(self) -> tuple[int, int]:
        """Derivation state of the deterministic stream: (seed, iteration)."""
        return (self.config.seed, self.time)

    @property
    def firms(self) -> list[FirmState]:
        return [self.firm(i) for i in range(self.config.n_firms)]

    def firm(self, i: int) -> FirmState:
        return FirmState(
            size=int(self.size[i]),
            job_offer=int(self.job_offer[i]),
            planned_output=float(self.planned_output[i]),
            output=float(self.output[i]),
            sold=float(self.sold[i]),
            realized_margin=float(self.realized_margin[i]),
        )

    def step(self) -> list[GrowthBatch]:
        """Advance one iteration; returns the growth records it generated."""
        if self.config.scenario is Scenario.FIRMS_CONSUME:
            return step_scenario_i(self)
        return step_scenario_ii(self)


def step_scenario_i(economy: Economy) -> list[GrowthBatch]:
    """One production cycle when firms spend their profits (scarce workforce).

    Firms post ``size * (1 + margin)`` job offers (rounded by the configured
    scheme), the ``n_workers`` workers are matched to open positions uniformly
    at random, and everyone's production sells in full. Firms that received no
    worker are replaced by entrants whose offers enter the next job market.
    """
    cfg = economy.config
    if cfg.scenario is not Scenario.FIRMS_CONSUME:
        raise ValueError("economy is not in the firms-consume scenario")
    t = economy.time
    w, p, mu = cfg.wage, cfg.price, cfg.margin

    size_before = economy.size.copy()
    offer_rng = substream(cfg.seed, OFFER_STREAM, t)
    if cfg.rounding is Rounding.PER_UNIT:
        offers = per_unit_offer_array(size_before, mu, offer_rng)
    else:
        offers = round_array(size_before * (1.0 + mu), offer_rng)
    economy.job_offer = offers
    total_offers = int(offers.sum())

    hired = allocate_market(offers, cfg.n_workers, cfg.allocation,
                            substream(cfg.seed, JOB_MARKET_STREAM, t))
    economy.size = hired
    economy.employed = int(hired.sum())
    fill = min(1.0, cfg.n_workers / total_offers) if total_offers > 0 else 1.0

    # Demand always suffices here: the whole production is sold.
    economy.output = economy.size * (w / p) * (1.0 + mu)
    economy.planned_output = economy.output.copy()
    economy.sold = economy.output.copy()
    economy.realized_margin = np.where(economy.size > 0, mu, 0.0)
    q_total = float(economy.output.sum())
    economy.market = MarketProbabilities(fill, 1.0, q_total, q_total)

    mask = size_before > 0
    batch = GrowthBatch(Metric.EMPLOYEES,
                        size_before[mask].astype(float),
                        economy.size[mask].astype(float))

    economy.replaced_last = replace_extinct(economy, substream(cfg.seed, REPLACE_STREAM, t))
    economy.time += 1
    return [batch]


def step_scenario_ii(economy: Economy) -> list[GrowthBatch]:
    """One production cycle when only wages are spent (scarce demand).

    Firms plan from last realized profits, hire accordingly (the job market
    rarely binds), produce, and then compete for the wage bill in the goods
    market where each produced good has the same chance of being sold. Unsold
    goods are lost. Firms whose plan collapses to zero workers are replaced,
    with the entrants' job offers taken uniformly from the survivors so the
    aggregate offer is unchanged.
    """
    cfg = economy.config
    if cfg.scenario is not Scenario.WORKERS_ONLY_CONSUME:
        raise ValueError("economy is not in the workers-only-consume scenario")
    t = economy.time
    w, p, mu = cfg.wage, cfg.price, cfg.margin

    size_before = economy.size.copy()
    sold_before = economy.sold.copy()

    plan_rng = substream(cfg.seed, OFFER_STREAM, t)
    if cfg.rounding is Rounding.PER_UNIT:
        # Each previously sold good respawns as one or two goods to produce.
        prev_units = np.rint(economy.sold).astype(np.int64)
        planned = (prev_units + plan_rng.binomial(prev_units, mu)).astype(float)
    else:
        planned = np.maximum(economy.output * (1.0 + economy.realized_margin), 0.0)
    economy.planned_output = planned
    economy.job_offer = round_array(planned * (p / w) / (1.0 + mu), plan_rng)

    replaced = replace_extinct(economy, substream(cfg.seed, REPLACE_STREAM, t))

    offers = economy.job_offer
    total_offers = int(offers.sum())
    if total_offers > cfg.n_workers:
        hired = allocate_market(offers, cfg.n_workers, cfg.allocation,
                                substream(cfg.seed, JOB_MARKET_STREAM, t))
    else:
        hired = offers.copy()
    economy.size = hired
    economy.employed = int(hired.sum())
    fill = min(1.0, cfg.n_workers / total_offers) if total_offers > 0 else 1.0

    economy.output = economy.size * (w / p) * (1.0 + mu)
    # Goods are traded in units of one: the fractional production is rounded
    # unbiasedly for the market, while planning keeps the exact quantity
    # (otherwise the aggregate job offer, hence employment, would drift).
    goods_rng = substream(cfg.seed, GOODS_ROUND_STREAM, t)
    units = round_array(economy.output, goods_rng)
    demand_units = int(round_array(
        np.asarray([economy.size.sum() * w / p]), goods_rng)[0])
    supply_units = int(units.sum())
    sold = allocate_market(units, demand_units, cfg.allocation,
                           substream(cfg.seed, GOODS_MARKET_STREAM, t))
    economy.sold = sold.astype(float)
    sell = min(1.0, demand_units / supply_units) if supply_units > 0 else 1.0
    economy.realized_margin = np.where(
        economy.size > 0,
        (economy.sold * p - economy.size * w) / (np.maximum(economy.size, 1) * w),
        0.0,
    )
    economy.market = MarketProbabilities(fill, sell, float(demand_units), float(supply_units))

    # A replaced firm's employee trajectory ends at zero; its fresh start is
    # not a growth observation (the rebirth record would have size_before 0).
    emp_after = economy.size.astype(float)
    if replaced:
        emp_after = emp_after.copy()
        emp_after[economy.last_replaced] = 0.0
    emp_mask = size_before > 0
    sales_mask = sold_before > 0
    batches = [
        GrowthBatch(Metric.EMPLOYEES, size_before[emp_mask].astype(float), emp_after[emp_mask]),
        GrowthBatch(Metric.SALES, sold_before[sales_mask], economy.sold[sales_mask]),
    ]

    economy.replaced_last = replaced
    economy.time += 1
    return batches


def replace_extinct(economy: Economy, rng: np.random.Generator) -> int:
    """Replace dead firms with entrants; returns the number replaced.

    Entrant sizes are drawn uniformly from the replacement interval and
    rounded probabilistically (default [1, 2]: sizes in {1, 2}, mean 1.5).
    In the firms-consume scenario a firm is dead when its size reached zero
    and the entrant's offer simply joins the next job market. In the
    workers-only-consume scenario a firm is dead when its job offer collapsed
    to zero (it sold nothing); the entrant posts its size as its offer and an
    equal number of offer slots is removed uniformly at random from the
    surviving firms, leaving the aggregate job offer unchanged.
    """
    cfg = economy.config
    lo, hi = cfg.replacement_low, cfg.replacement_high

    if cfg.scenario is Scenario.FIRMS_CONSUME:
        idx = np.flatnonzero(economy.size == 0)
        economy.last_replaced = idx
        if idx.size == 0:
            return 0
        economy.size[idx] = round_array(rng.uniform(lo, hi, idx.size), rng)
        economy.output[idx] = 0.0
        economy.planned_output[idx] = 0.0
        economy.sold[idx] = 0.0
        economy.realized_margin[idx] = 0.0
        return int(idx.size)

    idx = np.flatnonzero(economy.job_offer == 0)
    economy.last_replaced = idx
    if idx.size == 0:
        return 0
    entrant_sizes = round_array(rng.uniform(lo, hi, idx.size), rng)
    added = int(entrant_sizes.sum())
    surviving = economy.job_offer.copy()
    surviving[idx] = 0
    available = int(surviving.sum())
    removed_total = min(added, available)
    if removed_total < added:
        log.warning(
            "entrant offers (%d) exceed surviving job offers (%d); removal clamped",
            added, available,
        )
    if removed_total > 0:
        removed = rng.multivariate_hypergeometric(surviving, removed_total)
        economy.job_offer = economy.job_offer - removed
    economy.job_offer[idx] = entrant_sizes
    return int(idx.size)
