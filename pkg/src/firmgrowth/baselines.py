"""Reference stochastic growth processes the market model is compared against.

Four processes with known noise taxonomy: purely additive Gaussian noise
(Gaussian stationary sizes), purely multiplicative noise (Zipf-like power-law
tail), multiplicative noise whose dispersion scales as ``size**-beta``, and a
sequential one-worker-at-a-time relocation model where the destination is
chosen proportionally to current size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import GrowthBatch, Metric, round_array


@dataclass(frozen=True)
class BaselineConfig:
    """Parameters of one baseline trajectory.

    ``sigma`` is the noise scale: the standard deviation of the additive or
    multiplicative noise, or the growth-rate dispersion at size 1 for the
    scaled process (``sigma(n) = sigma * n**-beta``).
    """

    n_units: int = 1000
    n_workers: int = 100_000
    sigma: float = 0.2
    beta: float = 0.0
    replacement_mean: float = 1.5
    seed: int = 1
    iterations: int = 1000
    move_fraction: float = 0.05  # sequential model: workers moved per batch

    def __post_init__(self):
        if self.n_units < 1:
            raise ValueError("n_units must be at least 1")
        if self.n_workers < self.n_units:
            raise ValueError("n_workers must be at least n_units")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.replacement_mean < 1.0:
            raise ValueError("replacement_mean must be at least 1")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not 0.0 < self.move_fraction <= 1.0:
            raise ValueError("move_fraction must lie in (0, 1]")

    def initial_sizes(self, integer: bool = True) -> np.ndarray:
        base, extra = divmod(self.n_workers, self.n_units)
        if integer:
            sizes = np.full(self.n_units, base, dtype=np.int64)
            sizes[:extra] += 1
            return sizes
        return np.full(self.n_units, self.n_workers / self.n_units, dtype=float)


def _replacement_draw(count: int, mean: float, rng: np.random.Generator) -> np.ndarray:
    # Uniform on [mean - 1/2, mean + 1/2], probabilistically rounded; for the
    # default mean 1.5 this gives sizes in {1, 2}. Entrants are at least 1.
    sizes = round_array(rng.uniform(mean - 0.5, mean + 0.5, count), rng)
    return np.maximum(sizes, 1)


def step_additive(sizes, sigma: float, rng: np.random.Generator,
                  replacement_mean: float = 1.5) -> np.ndarray:
    """One step of purely additive Gaussian noise at constant global size.

    Each size gains an independent Normal(0, sigma^2) increment; units pushed
    to zero or below restart at ``replacement_mean`` and everything is
    rescaled so the total matches the input total exactly.
    """
    x = np.asarray(sizes, dtype=float)
    if x.size == 0:
        raise ValueError("sizes must be non-empty")
    total = x.sum()
    out = x + rng.normal(0.0, sigma, x.size)
    out[out <= 0] = replacement_mean
    out *= total / out.sum()
    return out


def step_multiplicative(sizes, sigma: float, rng: np.random.Generator,
                        replacement_mean: float = 1.5) -> np.ndarray:
    """One step of purely multiplicative Gaussian noise, g ~ Normal(1, sigma^2).

    Sizes are discrete; the probabilistic rounding of ``g * n`` plays the role
    of the small additive term that keeps a stationary state, and units that
    reach zero are replaced at ``replacement_mean``.
    """
    return step_scaled_beta(sizes, sigma * sigma, 0.0, rng, replacement_mean)


def step_scaled_beta(sizes, c: float, beta: float, rng: np.random.Generator,
                     replacement_mean: float = 1.5) -> np.ndarray:
    """Multiplicative noise with size-dependent dispersion sigma(n) = sqrt(c) * n**-beta.

    With ``beta = 0`` this is plain multiplicative noise; with ``beta = 0.5``
    the post-step variance is ``c * n``, the same scaling the market model
    produces without any market mechanics.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    if not 0.0 <= beta <= 0.5:
        raise ValueError("beta must lie in [0, 0.5]")
    n = np.asarray(sizes, dtype=np.int64)
    if n.size == 0:
        raise ValueError("sizes must be non-empty")
    if n.min() <= 0:
        raise ValueError("sizes must be positive")
    sigma_n = math.sqrt(c) * n.astype(float) ** (-beta)
    g = 1.0 + rng.standard_normal(n.size) * sigma_n
    out = round_array(np.maximum(g, 0.0) * n, rng)
    dead = np.flatnonzero(out == 0)
    if dead.size:
        out[dead] = _replacement_draw(dead.size, replacement_mean, rng)
    return out


def step_marsili_sequential(city_sizes, n_moves: int, rng: np.random.Generator,
                            replacement_mean: float = 1.5,
                            allow_self_move: bool = True
                            ) -> tuple[np.ndarray, GrowthBatch]:
    """Sequential relocation dynamics: one worker moves at a time.

    Each elementary move picks a worker uniformly at random, removes it from
    its city, and reassigns it to a city with probability proportional to the
    current (already updated) sizes. A city emptied by a move is refilled
    immediately with a small entrant population taken uniformly from the
    other cities' workers, so the total is conserved exactly. Growth records
    compare the sizes before and after the whole batch of moves.
    """
    sizes = np.asarray(city_sizes, dtype=np.int64).copy()
    if sizes.size == 0:
        raise ValueError("city_sizes must be non-empty")
    if sizes.min() < 0:
        raise ValueError("city_sizes must be non-negative")
    total = int(sizes.sum())
    if total <= 0:
        raise ValueError("total population must be positive")
    if n_moves > total:
        raise ValueError(f"cannot move {n_moves} workers, only {total} exist")
    before = sizes.astype(float).copy()

    for _ in range(n_moves):
        # Uniform worker pick == city pick proportional to size.
        origin = int(np.searchsorted(np.cumsum(sizes), rng.integers(total), side="right"))
        sizes[origin] -= 1
        weights = sizes if allow_self_move else np.where(
            np.arange(sizes.size) == origin, 0, sizes)
        pool = int(weights.sum())
        dest = int(np.searchsorted(np.cumsum(weights), rng.integers(pool), side="right"))
        sizes[dest] += 1
        if sizes[origin] == 0:
            # Refill from the other cities, worker by worker: every worker has
            # the same chance of being shifted, total unchanged.
            entrant = int(_replacement_draw(1, replacement_mean, rng)[0])
            entrant = min(entrant, total - 1)
            for _ in range(entrant):
                donor = int(np.searchsorted(np.cumsum(sizes), rng.integers(total), side="right"))
                sizes[donor] -= 1
                sizes[origin] += 1

    mask = before > 0
    batch = GrowthBatch(Metric.EMPLOYEES, before[mask], sizes.astype(float)[mask])
    return sizes, batch


def marsili_rank_prediction(rank: int, m: float) -> float:
    """Closed-form size of the rank-th largest city in the sequential linear case."""
    if rank < 1:
        raise ValueError("rank starts at 1")
    return m * math.exp(-rank + 1)
