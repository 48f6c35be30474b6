"""CSV emission with stable formatting, plus content hashing for manifests.

Every float is rendered with 9 significant digits and files always use LF
line endings, so identical runs produce byte-identical outputs on any
platform.
"""
from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analytics import FitResult, Histogram, SizeBinStats


def fmt(x) -> str:
    """Render a number with 9 significant digits."""
    return format(float(x), ".9g")


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_snapshot(path: Path, t: int, sizes, outputs, solds) -> None:
    sizes = np.asarray(sizes)
    outputs = np.asarray(outputs, dtype=float)
    solds = np.asarray(solds, dtype=float)
    rows = (
        (str(t), str(i), fmt(sizes[i]), fmt(outputs[i]), fmt(solds[i]))
        for i in range(sizes.size)
    )
    write_rows(path, ("t", "firm_id", "size", "output", "sold"), rows)


def read_snapshot_sizes(path: Path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, usecols=2, ndmin=1)
    return np.asarray(data, dtype=float)


def write_ccdf(path: Path, points: np.ndarray) -> None:
    write_rows(path, ("size", "prob"), ((fmt(x), fmt(p)) for x, p in points))


def write_growth_hist(path: Path, hist: Histogram) -> None:
    log_d = hist.log_densities()
    rows = (
        (fmt(hist.bin_edges[i]), fmt(hist.bin_edges[i + 1]),
         fmt(hist.densities[i]), fmt(log_d[i]))
        for i in range(hist.densities.size)
    )
    write_rows(path, ("bin_low", "bin_high", "density", "log_density"), rows)


def write_binned_sigma(path: Path, stats: Sequence[SizeBinStats]) -> None:
    rows = (
        (fmt(s.bin_low), fmt(s.bin_high), fmt(s.sigma_g), fmt(s.tent_slope), str(s.count))
        for s in stats
    )
    write_rows(path, ("bin_low", "bin_high", "sigma", "tent_slope", "count"), rows)


def write_fits(path: Path, fits: Sequence[FitResult]) -> None:
    rows = (
        (f.method.value, fmt(f.exponent), fmt(f.std_error),
         fmt(f.fit_range[0]), fmt(f.fit_range[1]), str(f.n_points))
        for f in fits
    )
    write_rows(path, ("method", "exponent", "std_error", "range_low", "range_high",
                      "n_points"), rows)


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(path: Path, config_rows: Sequence[tuple[str, str, str, str]],
                   file_rows: Sequence[tuple[str, str, str, str]]) -> str:
    """Write the run manifest and return its own content hash."""
    write_rows(path, ("seed", "kind", "name", "value"),
               list(config_rows) + list(file_rows))
    return sha256_file(path)
