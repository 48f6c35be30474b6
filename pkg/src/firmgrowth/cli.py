"""Command line harness: presets, deterministic runs, CSV emission.

Subcommands: ``run`` simulates a preset for one or more seeds and writes
snapshot, distribution and fit CSVs plus a content-hash manifest; ``analyze``
recomputes size-distribution analytics from existing snapshot CSVs;
``oracle`` prints the exact next-size pmf and the theoretical growth-density
tables.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import math
import sys
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import numpy as np

from . import analytics, io, theory
from .baselines import (BaselineConfig, step_additive, step_marsili_sequential,
                        step_scaled_beta)
from .model import (Allocation, Economy, Metric, ModelConfig, Rounding, Scenario)
from .rng import substream


class ConfigError(ValueError):
    """Invalid configuration input; maps to exit code 1."""


# Growth dispersion at size 1 that matches a 10% margin market.
_SCALED_SIGMA = math.sqrt(0.1) / 1.1

_MODEL_KEYS = frozenset({
    "n_firms", "n_workers", "margin", "wage", "price", "scenario", "rounding",
    "allocation", "replacement_low", "replacement_high", "iterations",
})
_BASELINE_KEYS = frozenset({
    "n_units", "n_workers", "sigma", "replacement_mean", "iterations",
})
_COMMON_KEYS = frozenset({
    "preset", "output_dir", "seed", "seeds", "snapshot_times", "workers", "min_size",
})


@dataclass(frozen=True)
class Preset:
    kind: str  # "model", "additive", "multiplicative", "scaled", "marsili"
    defaults: dict
    keys: frozenset


PRESETS: dict[str, Preset] = {
    "ScenarioI": Preset("model", dict(
        scenario=Scenario.FIRMS_CONSUME, rounding=Rounding.PER_UNIT,
        n_firms=10_000, n_workers=1_000_000, margin=0.2, iterations=4000,
    ), _MODEL_KEYS - {"scenario"}),
    "ScenarioII": Preset("model", dict(
        scenario=Scenario.WORKERS_ONLY_CONSUME, rounding=Rounding.PROBABILISTIC,
        n_firms=2000, n_workers=90_000, margin=0.1, iterations=5000,
    ), _MODEL_KEYS - {"scenario"}),
    "Custom": Preset("model", dict(
        n_firms=100, n_workers=5000, iterations=500,
    ), _MODEL_KEYS),
    "Additive": Preset("additive", dict(
        n_units=1000, n_workers=100_000, sigma=1.0, iterations=2000,
    ), _BASELINE_KEYS),
    "Multiplicative": Preset("multiplicative", dict(
        n_units=10_000, n_workers=500_000, sigma=0.2, iterations=4000,
    ), _BASELINE_KEYS),
    "ScaledBeta": Preset("scaled", dict(
        n_units=10_000, n_workers=1_000_000, sigma=_SCALED_SIGMA, beta=0.25,
        iterations=3000,
    ), _BASELINE_KEYS | {"beta"}),
    "MarsiliSequential": Preset("marsili", dict(
        n_units=500, n_workers=50_000, move_fraction=0.05, iterations=300,
    ), frozenset({"n_units", "n_workers", "replacement_mean", "iterations",
                  "move_fraction"})),
}


@dataclass
class RunSpec:
    """One resolved run request: a preset plus overrides, seeds and outputs."""

    preset: str = "Custom"
    overrides: dict = field(default_factory=dict)
    output_dir: Path = Path("out")
    snapshot_times: list[int] | None = None
    seeds: list[int] = field(default_factory=lambda: [1])
    workers: int = 1
    min_size: float = 10.0


def _parse_enum(enum_cls):
    def parse(raw: str):
        for member in enum_cls:
            if raw.lower() in (member.value.lower(), member.name.lower()):
                return member
        options = ", ".join(m.value for m in enum_cls)
        raise ValueError(f"expected one of {options}")
    return parse


def _parse_int(raw: str) -> int:
    return int(raw)


def _parse_float(raw: str) -> float:
    return float(raw)


def _parse_int_list(raw: str) -> list[int]:
    return [int(part) for part in raw.replace(" ", "").split(",") if part]


_PARSERS = {
    "preset": str,
    "output_dir": str,
    "seed": _parse_int,
    "seeds": _parse_int_list,
    "snapshot_times": _parse_int_list,
    "workers": _parse_int,
    "min_size": _parse_float,
    "n_firms": _parse_int,
    "n_workers": _parse_int,
    "n_units": _parse_int,
    "iterations": _parse_int,
    "margin": _parse_float,
    "wage": _parse_float,
    "price": _parse_float,
    "sigma": _parse_float,
    "beta": _parse_float,
    "replacement_low": _parse_float,
    "replacement_high": _parse_float,
    "replacement_mean": _parse_float,
    "move_fraction": _parse_float,
    "scenario": _parse_enum(Scenario),
    "rounding": _parse_enum(Rounding),
    "allocation": _parse_enum(Allocation),
}


def _parse_lines(text: str) -> dict[str, tuple[str, int]]:
    """`key = value` lines with `#` comments; returns raw values with line numbers."""
    mapping: dict[str, tuple[str, int]] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        mapping[key] = (value, lineno)
    return mapping


def _resolve(mapping: dict[str, tuple[str, int]]) -> RunSpec:
    values: dict[str, object] = {}
    for key, (raw, lineno) in mapping.items():
        where = f"line {lineno}: " if lineno else ""
        parser = _PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"{where}unknown key '{key}'")
        try:
            values[key] = parser(raw)
        except ValueError as exc:
            raise ConfigError(f"{where}bad value for '{key}': {exc}") from None

    preset = values.pop("preset", "Custom")
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset '{preset}'; options: {', '.join(PRESETS)}")
    seeds = values.pop("seeds", None)
    seed = values.pop("seed", None)
    if seeds is None:
        seeds = [seed if seed is not None else 1]
    elif seed is not None:
        raise ConfigError("give either 'seed' or 'seeds', not both")
    if not seeds:
        raise ConfigError("at least one seed is required")
    spec = RunSpec(
        preset=preset,
        output_dir=Path(values.pop("output_dir", "out")),
        snapshot_times=values.pop("snapshot_times", None),
        seeds=seeds,
        workers=int(values.pop("workers", 1)),
        min_size=float(values.pop("min_size", 10.0)),
    )
    spec.overrides = values
    if spec.workers < 1:
        raise ConfigError("workers must be at least 1")
    if spec.min_size < 1:
        raise ConfigError("min_size must be at least 1")
    materialize(spec, spec.seeds[0])  # fail early on invalid combinations
    return spec


def parse_config(text: str) -> RunSpec:
    """Parse a `key = value` config file into a validated RunSpec."""
    return _resolve(_parse_lines(text))


def materialize(spec: RunSpec, seed: int):
    """Build the concrete simulator config for one seed.

    Returns (kind, config) where kind names the simulator flavor.
    """
    preset = PRESETS[spec.preset]
    for key in spec.overrides:
        if key not in preset.keys:
            raise ConfigError(f"key '{key}' is not valid for preset {spec.preset}")
    merged = {**preset.defaults, **spec.overrides, "seed": seed}
    try:
        if preset.kind == "model":
            cfg = ModelConfig(**merged)
            if cfg.n_firms < 2:
                raise ValueError("n_firms must be at least 2")
        else:
            cfg = BaselineConfig(**merged)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    iters = cfg.iterations
    times = spec.snapshot_times if spec.snapshot_times is not None else [iters]
    if sorted(times) != list(times) or any(t < 1 for t in times):
        raise ConfigError("snapshot_times must be ascending positive iterations")
    if times and times[-1] > iters:
        raise ConfigError("snapshot_times may not exceed iterations")
    return preset.kind, cfg


def _write_analytics(outdir: Path, snap: analytics.SizeSnapshot,
                     acc: analytics.GrowthAccumulator) -> list[Path]:
    files: list[Path] = []

    points = analytics.ccdf(snap)
    path = outdir / "ccdf.csv"
    io.write_ccdf(path, points)
    files.append(path)

    try:
        window = analytics.default_tail_range(snap.sizes)
        ols, mle = analytics.fit_power_law_tail(points, window, n_total=len(snap))
        path = outdir / "fit.csv"
        io.write_fits(path, [ols, mle])
        files.append(path)
    except ValueError:
        pass  # too few firms in the tail window, nothing to report

    try:
        hist = acc.histogram()
    except ValueError:
        hist = None
    if hist is not None:
        path = outdir / "growth_hist.csv"
        io.write_growth_hist(path, hist)
        files.append(path)

    binned = acc.binned()
    if binned:
        path = outdir / "binned_sigma.csv"
        io.write_binned_sigma(path, binned)
        files.append(path)
    if len(binned) >= 3:
        path = outdir / "beta_fit.csv"
        io.write_fits(path, [analytics.fit_beta(binned)])
        files.append(path)
    return files


def _simulate_model(cfg: ModelConfig, outdir: Path, snapshot_times: list[int],
                    min_size: float) -> list[Path]:
    economy = Economy(cfg)
    metric = (Metric.EMPLOYEES if cfg.scenario is Scenario.FIRMS_CONSUME
              else Metric.SALES)
    acc = analytics.GrowthAccumulator(min_size=min_size)
    snap_at = set(snapshot_times)
    files: list[Path] = []
    for _ in range(cfg.iterations):
        for batch in economy.step():
            if batch.metric is metric:
                acc.update(batch)
        if economy.time in snap_at:
            path = outdir / f"snapshot_t{economy.time}.csv"
            io.write_snapshot(path, economy.time, economy.size,
                              economy.output, economy.sold)
            files.append(path)
    snap = analytics.SizeSnapshot.from_values(economy.time, economy.size)
    return files + _write_analytics(outdir, snap, acc)


def _simulate_baseline(kind: str, cfg: BaselineConfig, outdir: Path,
                       snapshot_times: list[int], min_size: float) -> list[Path]:
    acc = analytics.GrowthAccumulator(min_size=min_size)
    snap_at = set(snapshot_times)
    files: list[Path] = []
    zeros = np.zeros(cfg.n_units)

    if kind == "marsili":
        sizes = cfg.initial_sizes()
        n_moves = max(1, round(cfg.move_fraction * cfg.n_workers))
        for t in range(cfg.iterations):
            sizes, batch = step_marsili_sequential(
                sizes, n_moves, substream(cfg.seed, 0, t), cfg.replacement_mean)
            acc.update(batch)
            if t + 1 in snap_at:
                path = outdir / f"snapshot_t{t + 1}.csv"
                io.write_snapshot(path, t + 1, sizes, zeros, zeros)
                files.append(path)
    else:
        integer = kind != "additive"
        sizes = cfg.initial_sizes(integer=integer)
        for t in range(cfg.iterations):
            rng = substream(cfg.seed, 0, t)
            before = np.asarray(sizes, dtype=float)
            if kind == "additive":
                sizes = step_additive(sizes, cfg.sigma, rng, cfg.replacement_mean)
            else:
                beta = cfg.beta if kind == "scaled" else 0.0
                sizes = step_scaled_beta(sizes, cfg.sigma ** 2, beta, rng,
                                         cfg.replacement_mean)
            mask = before > 0
            acc.update((before[mask], np.asarray(sizes, dtype=float)[mask]))
            if t + 1 in snap_at:
                path = outdir / f"snapshot_t{t + 1}.csv"
                io.write_snapshot(path, t + 1, sizes, zeros, zeros)
                files.append(path)

    snap = analytics.SizeSnapshot.from_values(cfg.iterations, sizes)
    return files + _write_analytics(outdir, snap, acc)


def _seed_job(spec: RunSpec, seed: int) -> list[tuple[str, str]]:
    """Simulate one seed; returns (relative path, sha256) pairs."""
    kind, cfg = materialize(spec, seed)
    times = spec.snapshot_times if spec.snapshot_times is not None else [cfg.iterations]
    seed_dir = spec.output_dir / f"seed_{seed:05d}"
    seed_dir.mkdir(parents=True, exist_ok=True)
    if kind == "model":
        paths = _simulate_model(cfg, seed_dir, times, spec.min_size)
    else:
        paths = _simulate_baseline(kind, cfg, seed_dir, times, spec.min_size)
    return [(p.relative_to(spec.output_dir).as_posix(), io.sha256_file(p))
            for p in sorted(paths)]


def run(spec: RunSpec) -> int:
    """Simulate every seed of the spec and write the output manifest."""
    spec.output_dir.mkdir(parents=True, exist_ok=True)
    results: dict[int, list[tuple[str, str]]] = {}
    if spec.workers > 1 and len(spec.seeds) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=spec.workers) as pool:
            futures = {pool.submit(_seed_job, spec, s): s for s in spec.seeds}
            for fut, seed in futures.items():
                results[seed] = fut.result()
    else:
        for seed in spec.seeds:
            results[seed] = _seed_job(spec, seed)

    config_rows: list[tuple[str, str, str, str]] = [
        ("", "run", "preset", spec.preset),
        ("", "run", "min_size", io.fmt(spec.min_size)),
    ]
    file_rows: list[tuple[str, str, str, str]] = []
    for seed in spec.seeds:  # deterministic order regardless of pool scheduling
        _, cfg = materialize(spec, seed)
        for f in dc_fields(cfg):
            value = getattr(cfg, f.name)
            text = value.value if hasattr(value, "value") else str(value)
            config_rows.append((str(seed), "config", f.name, text))
        file_rows.extend((str(seed), "file", rel, digest)
                         for rel, digest in results[seed])
    manifest = spec.output_dir / "manifest.csv"
    digest = io.write_manifest(manifest, config_rows, file_rows)
    print(f"wrote {manifest} (sha256 {digest})")
    return 0


def analyze(input_dir: Path, output_dir: Path | None = None) -> int:
    """Recompute CCDF and tail fits from the latest snapshot CSV in a directory."""
    snapshots = sorted(input_dir.glob("snapshot_t*.csv"),
                       key=lambda p: int(p.stem.split("_t")[1]))
    if not snapshots:
        raise ConfigError(f"no snapshot CSVs found in {input_dir}")
    latest = snapshots[-1]
    t = int(latest.stem.split("_t")[1])
    sizes = io.read_snapshot_sizes(latest)
    snap = analytics.SizeSnapshot.from_values(t, sizes)
    outdir = output_dir if output_dir is not None else input_dir
    outdir.mkdir(parents=True, exist_ok=True)

    points = analytics.ccdf(snap)
    io.write_ccdf(outdir / "ccdf.csv", points)
    print(f"wrote {outdir / 'ccdf.csv'} ({len(snap)} firms at t={t})")
    try:
        window = analytics.default_tail_range(snap.sizes)
        ols, mle = analytics.fit_power_law_tail(points, window, n_total=len(snap))
        io.write_fits(outdir / "fit.csv", [ols, mle])
        print(f"wrote {outdir / 'fit.csv'} "
              f"(alpha OLS {ols.exponent:.3f}, MLE {mle.exponent:.3f})")
    except ValueError as exc:
        print(f"tail fit skipped: {exc}")
    return 0


def oracle(what: str, args: argparse.Namespace) -> int:
    """Print oracle tables as CSV on stdout."""
    if what == "pmf":
        pmf = theory.job_count_pmf_oracle(args.size, args.margin)
        print("k,probability")
        for k, p in enumerate(pmf):
            print(f"{k},{io.fmt(p)}")
        return 0
    params = theory.TheoryParams(alpha=args.alpha, beta=args.beta,
                                 cutoff_n0=args.cutoff, c=args.scale)
    grid = theory.default_growth_grid(args.g_min, args.g_max, args.points)
    curve = theory.theoretical_growth_curve(params, grid)
    print("g,density")
    for g, d in zip(grid, curve):
        print(f"{io.fmt(g)},{io.fmt(d)}")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are config errors, exit code 1
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="firmgrowth",
                     description="Firm growth simulations and distribution analytics")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate a preset and write CSV outputs")
    run_p.add_argument("--config", type=Path, help="key = value config file")
    mirror = sorted(set(_PARSERS) - {"output_dir"})
    for key in mirror:
        run_p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=str,
                           help=f"override config key '{key}'")
    run_p.add_argument("--output-dir", "-o", dest="output_dir", type=str,
                       help="directory for run outputs (default: out)")

    an_p = sub.add_parser("analyze", help="re-run size analytics on snapshot CSVs")
    an_p.add_argument("--input", type=Path, required=True,
                      help="directory holding snapshot_t*.csv files")
    an_p.add_argument("--out", type=Path, default=None,
                      help="output directory (default: the input directory)")

    or_p = sub.add_parser("oracle", help="print exact reference tables")
    or_sub = or_p.add_subparsers(dest="what", required=True)
    pmf_p = or_sub.add_parser("pmf", help="exact next-size pmf for one firm")
    pmf_p.add_argument("--size", type=int, required=True)
    pmf_p.add_argument("--margin", type=float, default=0.1)
    den_p = or_sub.add_parser("density", help="theoretical aggregate growth density")
    den_p.add_argument("--alpha", type=float, required=True)
    den_p.add_argument("--beta", type=float, required=True)
    den_p.add_argument("--cutoff", type=float, default=0.0,
                       help="lower size cutoff of the size distribution")
    den_p.add_argument("--scale", type=float, default=0.1,
                       help="growth variance at size 1")
    den_p.add_argument("--g-min", type=float, default=0.0)
    den_p.add_argument("--g-max", type=float, default=2.0)
    den_p.add_argument("--points", type=int, default=402)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.command == "run":
            mapping: dict[str, tuple[str, int]] = {}
            if args.config is not None:
                mapping.update(_parse_lines(Path(args.config).read_text()))
            for key in _PARSERS:
                value = getattr(args, key, None)
                if value is not None:
                    mapping[key] = (value, 0)
            return run(_resolve(mapping))
        if args.command == "analyze":
            return analyze(args.input, args.out)
        return oracle(args.what, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - deliberate catch-all boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
