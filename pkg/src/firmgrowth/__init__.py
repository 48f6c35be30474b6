"""Firm growth under scarce-resource competition, with distribution analytics."""

from .model import (
    Allocation,
    Economy,
    FirmState,
    GrowthBatch,
    GrowthRecord,
    MarketProbabilities,
    Metric,
    ModelConfig,
    Rounding,
    Scenario,
    allocate_market,
    expected_margin,
    per_unit_offer,
    plan_production,
    probabilistic_round,
    production,
    replace_extinct,
    required_workers,
    round_array,
    step_scenario_i,
    step_scenario_ii,
)
from .baselines import (
    BaselineConfig,
    marsili_rank_prediction,
    step_additive,
    step_marsili_sequential,
    step_multiplicative,
    step_scaled_beta,
)
from .analytics import (
    BinScheme,
    DeviationAccumulator,
    FitMethod,
    FitResult,
    GrowthAccumulator,
    Histogram,
    SizeBinStats,
    SizeSnapshot,
    bin_by_size,
    ccdf,
    central_tent_slope,
    default_tail_range,
    deviation_histogram,
    fit_beta,
    fit_power_law_tail,
    growth_histogram,
)
from .theory import (
    TheoryParams,
    job_count_pmf_oracle,
    theoretical_growth_curve,
    theoretical_growth_density,
)
from .rng import substream

__version__ = "0.1.0"
