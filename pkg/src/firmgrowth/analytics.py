"""Distribution statistics: CCDF/rank-size curves, growth-rate histograms,
power-law tail fits and the scaling exponent of growth-rate dispersion.

All estimators work on plain arrays or on the growth batches emitted by the
simulators. ``GrowthAccumulator`` ingests batches one iteration at a time so
long runs never hold their full record stream in memory.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import GrowthBatch


@dataclass(frozen=True)
class SizeSnapshot:
    """Sorted positive sizes of the population at one iteration."""

    time: int
    sizes: np.ndarray  # descending, all > 0

    @classmethod
    def from_values(cls, time: int, values) -> "SizeSnapshot":
        arr = np.asarray(values, dtype=float)
        arr = arr[arr > 0]
        return cls(time=time, sizes=np.sort(arr)[::-1])

    def __len__(self) -> int:
        return self.sizes.size


class BinScheme(enum.Enum):
    LINEAR = "linear"
    LOGARITHMIC = "logarithmic"


@dataclass(frozen=True)
class Histogram:
    """Normalized density histogram; integrates to 1 over its bins."""

    bin_edges: np.ndarray
    densities: np.ndarray
    bin_scheme: BinScheme
    count: int

    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def log_densities(self) -> np.ndarray:
        """log10 density with half-count smoothing so empty bins stay finite."""
        return np.log10(self.densities + 1.0 / (2.0 * self.count * self.widths()))


class FitMethod(enum.Enum):
    LOG_LOG_OLS = "LogLogOLS"
    DISCRETE_MLE = "DiscreteMLE"


@dataclass(frozen=True)
class FitResult:
    exponent: float
    std_error: float
    fit_range: tuple[float, float]
    method: FitMethod
    n_points: int

    def __post_init__(self):
        if not self.fit_range[0] < self.fit_range[1]:
            raise ValueError("fit_range must be an increasing interval")
        if self.n_points < 3:
            raise ValueError("a fit needs at least 3 points")


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least squares line fit; returns (slope, intercept, slope std error)."""
    n = x.size
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise ValueError("degenerate fit: all abscissae identical")
    slope = float(dx @ (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    se = math.sqrt(float(resid @ resid) / (n - 2) / sxx) if n > 2 else float("nan")
    return slope, intercept, se


def _batch_arrays(records) -> tuple[np.ndarray, np.ndarray]:
    """Normalize record containers to (size_before, size_after) arrays."""
    if isinstance(records, GrowthBatch):
        return records.size_before, records.size_after
    if isinstance(records, tuple) and len(records) == 2:
        return np.asarray(records[0], float), np.asarray(records[1], float)
    records = list(records)
    if records and isinstance(records[0], GrowthBatch):
        before = np.concatenate([b.size_before for b in records])
        after = np.concatenate([b.size_after for b in records])
        return before, after
    before = np.asarray([r.size_before for r in records], dtype=float)
    after = np.asarray([r.size_after for r in records], dtype=float)
    return before, after


def ccdf(snapshot: SizeSnapshot) -> np.ndarray:
    """Counter-cumulative distribution: rows of (size, P(n >= size)).

    Sizes ascend, probabilities are inclusive, so the first row carries
    probability 1 and the largest size maps to (count of maxima) / N.
    """
    if len(snapshot) == 0:
        raise ValueError("cannot build a CCDF from an empty snapshot")
    values, counts = np.unique(snapshot.sizes, return_counts=True)
    at_least = counts[::-1].cumsum()[::-1]
    return np.column_stack([values, at_least / snapshot.sizes.size])


def default_tail_range(sizes: np.ndarray, floor: float = 10.0) -> tuple[float, float]:
    """Fit window for tail exponents: one decade starting just above the
    small-size discreteness threshold.

    Sizes below ``floor`` take too few distinct values for a meaningful
    power-law reading, while at desk scale the largest decade sits in the
    finite-size cutoff and measures the cutoff rather than the scaling
    region. The window therefore starts at ``max(floor, 25th percentile)``
    and spans one decade.
    """
    arr = np.asarray(sizes, dtype=float)
    arr = arr[arr > 0]
    if arr.size < 8:
        raise ValueError("too few sizes to place a tail window")
    low = max(floor, float(np.percentile(arr, 25.0)))
    return (low, 10.0 * low)


def fit_power_law_tail(ccdf_points, fit_range: tuple[float, float],
                       n_total: int | None = None) -> tuple[FitResult, FitResult]:
    """Tail exponent of a CCDF by two routes: log-log OLS and a Hill-type MLE.

    OLS regresses log P on log size over ``fit_range``; the reported exponent
    is minus the slope. The MLE treats every observation above
    ``fit_range[0]`` as tail data: alpha = 1 / mean(log(x / x_min)), weighted
    by the point masses recovered from the CCDF, with standard error
    alpha / sqrt(n_tail). Pass ``n_total`` (the population size behind the
    CCDF) so the tail count and the MLE error are exact.
    """
    pts = np.asarray(ccdf_points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("ccdf points must be rows of (size, probability)")
    low, high = float(fit_range[0]), float(fit_range[1])
    if not 0 < low < high:
        raise ValueError("fit_range must be positive and increasing")
    x, prob = pts[:, 0], pts[:, 1]
    if x.min() <= 0:
        raise ValueError("sizes must be positive")

    window = (x >= low) & (x <= high) & (prob > 0)
    if window.sum() < 3:
        raise ValueError("fewer than 3 CCDF points inside the fit range")
    slope, _, se = _ols(np.log(x[window]), np.log(prob[window]))
    ols = FitResult(-slope, se, (low, high), FitMethod.LOG_LOG_OLS, int(window.sum()))

    tail = x >= low
    if tail.sum() < 3:
        raise ValueError("fewer than 3 CCDF points above the tail cutoff")
    x_tail, p_tail = x[tail], prob[tail]
    mass = np.empty_like(p_tail)
    mass[:-1] = p_tail[:-1] - p_tail[1:]
    mass[-1] = p_tail[-1]
    total_mass = mass.sum()
    mean_log = float(mass @ np.log(x_tail / low)) / total_mass
    if mean_log <= 0:
        raise ValueError("tail has no spread above the cutoff")
    alpha = 1.0 / mean_log
    n_tail = int(round(total_mass * n_total)) if n_total else int(tail.sum())
    mle = FitResult(alpha, alpha / math.sqrt(n_tail),
                    (low, float(x_tail.max())), FitMethod.DISCRETE_MLE, n_tail)
    return ols, mle


@dataclass(frozen=True)
class SizeBinStats:
    """Growth-rate dispersion of one logarithmic size bin."""

    bin_low: float
    bin_high: float
    sigma_g: float
    tent_slope: float
    count: int
    geo_mean_size: float


class _BinAcc:
    __slots__ = ("count", "sum_g", "sum_g2", "sum_log_n", "hist")

    def __init__(self, n_hist_bins: int):
        self.count = 0
        self.sum_g = 0.0
        self.sum_g2 = 0.0
        self.sum_log_n = 0.0
        self.hist = np.zeros(n_hist_bins, dtype=np.int64)


class GrowthAccumulator:
    """Streaming growth statistics: aggregate histogram plus per-size-bin
    dispersion, with memory independent of the number of records.

    ``min_size`` drops records of firms below the threshold; their growth
    rates only take a handful of discrete values and would distort both the
    histogram and the dispersion estimates.
    """

    def __init__(self, min_size: float | None = 10, g_bins: int = 101,
                 g_range: tuple[float, float] = (0.0, 2.0),
                 bins_per_decade: float = 1.0,
                 tent_window: tuple[float, float] = (0.02, 0.5),
                 min_count: int = 30):
        self.min_size = min_size
        self.edges = np.linspace(g_range[0], g_range[1], g_bins + 1)
        self.counts = np.zeros(g_bins, dtype=np.int64)
        self.overflow = 0
        self.g_max = float(g_range[1])
        self.total = 0
        self.bins_per_decade = float(bins_per_decade)
        self.tent_window = tent_window
        self.min_count = min_count
        self._size_bins: dict[int, _BinAcc] = {}

    def update(self, records) -> None:
        before, after = _batch_arrays(records)
        keep = before >= (self.min_size if self.min_size is not None else 0)
        keep &= before > 0  # growth undefined for empty firms
        before, after = before[keep], after[keep]
        if before.size == 0:
            return
        g = after / before
        self.total += g.size
        over = g > self.edges[-1]
        if over.any():
            self.overflow += int(over.sum())
            self.g_max = max(self.g_max, float(g[over].max()))
        self.counts += np.histogram(g[~over], bins=self.edges)[0]

        ks = np.floor(self.bins_per_decade * np.log10(before)).astype(int)
        for k in np.unique(ks):
            acc = self._size_bins.get(int(k))
            if acc is None:
                acc = self._size_bins[int(k)] = _BinAcc(self.edges.size - 1)
            sel = ks == k
            gk = g[sel]
            acc.count += gk.size
            acc.sum_g += float(gk.sum())
            acc.sum_g2 += float((gk * gk).sum())
            acc.sum_log_n += float(np.log(before[sel]).sum())
            acc.hist += np.histogram(np.minimum(gk, self.edges[-1]), bins=self.edges)[0]

    def histogram(self) -> Histogram:
        if self.total == 0:
            raise ValueError("no growth records survive the size filter")
        edges, counts = self.edges, self.counts
        if self.overflow:
            edges = np.append(edges, max(self.g_max, edges[-1] + edges[-1] - edges[-2]))
            counts = np.append(counts, self.overflow)
        densities = counts / (self.total * np.diff(edges))
        return Histogram(edges, densities, BinScheme.LINEAR, self.total)

    def _tent_slope(self, hist_counts: np.ndarray, count: int) -> float:
        # Log density against |g - 1| inside the tent window; the slope is the
        # Laplacian-style decay rate used to read off sigma(n) from plots.
        centers = 0.5 * (self.edges[:-1] + self.edges[1:])
        dev = np.abs(centers - 1.0)
        widths = np.diff(self.edges)
        lo, hi = self.tent_window
        sel = (dev >= lo) & (dev <= hi) & (hist_counts > 0)
        if sel.sum() < 3:
            return float("nan")
        dens = hist_counts[sel] / (count * widths[sel])
        slope, _, _ = _ols(dev[sel], np.log(dens))
        return slope

    def binned(self) -> list[SizeBinStats]:
        out = []
        bpd = self.bins_per_decade
        for k in sorted(self._size_bins):
            acc = self._size_bins[k]
            if acc.count < self.min_count:
                continue
            var = (acc.sum_g2 - acc.sum_g * acc.sum_g / acc.count) / (acc.count - 1)
            out.append(SizeBinStats(
                bin_low=10.0 ** (k / bpd),
                bin_high=10.0 ** ((k + 1) / bpd),
                sigma_g=math.sqrt(max(var, 0.0)),
                tent_slope=self._tent_slope(acc.hist, acc.count),
                count=acc.count,
                geo_mean_size=math.exp(acc.sum_log_n / acc.count),
            ))
        return out


def growth_histogram(records, bins: int = 101, min_size: float | None = 10,
                     g_range: tuple[float, float] = (0.0, 2.0)) -> Histogram:
    """Normalized density of growth rates g = size_after / size_before.

    Linear bins over ``g_range`` plus one overflow bin when rates exceed the
    range; records with size_before below ``min_size`` are dropped first.
    """
    acc = GrowthAccumulator(min_size=min_size, g_bins=bins, g_range=g_range)
    acc.update(records)
    return acc.histogram()


def bin_by_size(records, bins_per_decade: float = 1.0,
                min_size: float | None = None, min_count: int = 30,
                tent_window: tuple[float, float] = (0.02, 0.5)) -> list[SizeBinStats]:
    """Growth dispersion per logarithmic size bin.

    Each bin with at least ``min_count`` records reports the standard
    deviation of g and the fitted tent slope of its growth histogram; bins
    below the count threshold are dropped.
    """
    acc = GrowthAccumulator(min_size=min_size, bins_per_decade=bins_per_decade,
                            min_count=min_count, tent_window=tent_window)
    acc.update(records)
    out = acc.binned()
    if not out:
        raise ValueError(f"no size bin reaches {min_count} records")
    return out


def fit_beta(binned: Sequence[SizeBinStats]) -> FitResult:
    """Scaling exponent of growth dispersion: sigma(n) ~ n**-beta.

    Log-log OLS of the per-bin standard deviation against the bin's geometric
    mean size; beta is minus the slope.
    """
    if len(binned) < 3:
        raise ValueError("need at least 3 size bins to fit beta")
    x = np.log([b.geo_mean_size for b in binned])
    y = np.log([b.sigma_g for b in binned])
    slope, _, se = _ols(x, y)
    lo = min(b.bin_low for b in binned)
    hi = max(b.bin_high for b in binned)
    return FitResult(-slope, se, (lo, hi), FitMethod.LOG_LOG_OLS, len(binned))


class DeviationAccumulator:
    """Streaming histogram of the growth deviation |g - 1| on logarithmic bins.

    The estimator of choice for reading the tent's log-log slope: the growth
    rates of discrete firms live on lattices of spacing 1/size, and
    logarithmic deviation bins absorb those atoms into a consistent density
    where fixed-width bins around g = 1 alias them.
    """

    def __init__(self, n_bins: int = 24, d_range: tuple[float, float] = (0.02, 0.45),
                 min_size: float | None = None):
        self.min_size = min_size
        self.edges = np.logspace(math.log10(d_range[0]), math.log10(d_range[1]),
                                 n_bins + 1)
        self.counts = np.zeros(n_bins, dtype=np.int64)

    def update(self, records) -> None:
        before, after = _batch_arrays(records)
        keep = before >= (self.min_size if self.min_size is not None else 0)
        keep &= before > 0
        before, after = before[keep], after[keep]
        if before.size == 0:
            return
        dev = np.abs(after / before - 1.0)
        self.counts += np.histogram(dev, bins=self.edges)[0]

    def histogram(self) -> Histogram:
        total = int(self.counts.sum())
        if total == 0:
            raise ValueError("no growth deviations inside the histogram range")
        return Histogram(self.edges, self.counts / (total * np.diff(self.edges)),
                         BinScheme.LOGARITHMIC, total)


def deviation_histogram(records, n_bins: int = 24,
                        d_range: tuple[float, float] = (0.02, 0.45),
                        min_size: float | None = None) -> Histogram:
    """One-shot :class:`DeviationAccumulator` over a record collection."""
    acc = DeviationAccumulator(n_bins=n_bins, d_range=d_range, min_size=min_size)
    acc.update(records)
    return acc.histogram()


def central_tent_slope(hist: Histogram, window: tuple[float, float] = (0.02, 0.3)
                       ) -> tuple[float, float, int]:
    """Log-log slope of density against |g - 1| near the peak.

    A value of -1 is the hallmark of the 1/|g-1| tent produced by mixing
    Gaussian growth over a broad size distribution. Accepts either a growth
    histogram (bins in g, deviations measured from 1) or a deviation
    histogram (logarithmic bins directly in |g - 1|). Returns
    (slope, std error, points used).
    """
    if hist.bin_scheme is BinScheme.LOGARITHMIC:
        dev = np.sqrt(hist.bin_edges[:-1] * hist.bin_edges[1:])
    else:
        dev = np.abs(hist.centers() - 1.0)
    sel = (dev >= window[0]) & (dev <= window[1]) & (hist.densities > 0)
    if sel.sum() < 3:
        raise ValueError("fewer than 3 populated bins inside the slope window")
    slope, _, se = _ols(np.log(dev[sel]), np.log(hist.densities[sel]))
    return slope, se, int(sel.sum())
