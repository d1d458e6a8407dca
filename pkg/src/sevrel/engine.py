"""Limit state models and the chunked Monte Carlo engine.

A limit state is a linear combination of independent input variables,
g = sum(coefficient_i * X_i) + shift, with failure defined as g < 0.
Simulation is chunked: chunk i draws from an independent substream
derived from (master_seed, i), partial statistics are merged in
ascending chunk order with the pairwise update, and the result is
bit-identical for a fixed (master seed, chunk size) no matter how many
worker threads executed the chunks. Changing the chunk size changes the
substream layout and therefore the sample.

Per-run bookkeeping kept exactly: failure count, failure deficit sum and
extrema, and global min/max of g. Two bounded samples are retained for
robust diagnostics: the first `failure_reservoir_cap` failure deficits
(failures are exchangeable, so a prefix is an unbiased sample) and a
uniform reservoir subsample of g driven by a dedicated substream inside
the sequential merge, hence equally reproducible.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping

import numpy as np

from .distributions import Distribution, MomentReport

__all__ = [
    "Term",
    "LimitStateModel",
    "SimulationConfig",
    "SimulationSummary",
    "RobustScales",
    "model_moments",
    "simulate",
    "g_chunks",
    "calibrate_shift",
    "robust_scales",
]

# Substream lanes, kept disjoint by the leading spawn-key coordinate.
_LANE_MAIN = 0
_LANE_RESERVOIR = 1
_LANE_BOOTSTRAP = 2
_LANE_CALIBRATION = 3


def _lane_rng(master_seed: int, lane: int, index: int = 0) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(lane, index))
    return np.random.default_rng(seq)


def bootstrap_rng(master_seed: int) -> np.random.Generator:
    """Dedicated substream for resampling diagnostics tied to a run."""
    return _lane_rng(master_seed, _LANE_BOOTSTRAP)


@dataclass(frozen=True)
class Term:
    name: str
    coefficient: float
    distribution: Distribution


@dataclass(frozen=True)
class LimitStateModel:
    """g = sum(coefficient * X) + shift; failure is g < 0."""

    terms: tuple[Term, ...]
    shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("limit state needs at least one term")
        names = [t.name for t in self.terms]
        if len(set(names)) != len(names):
            raise ValueError(f"term names must be unique, got {names!r}")

    def evaluate(self, values: Mapping[str, float]) -> float:
        """Evaluate g at one point; raises KeyError on a missing name."""
        total = self.shift
        for t in self.terms:
            if t.name not in values:
                raise KeyError(f"no value supplied for term {t.name!r}")
            total += t.coefficient * values[t.name]
        return total

    def with_shift(self, shift: float) -> "LimitStateModel":
        return replace(self, shift=float(shift))


def model_moments(model: LimitStateModel) -> MomentReport:
    """Analytic mean/variance of g from the term moments (independence)."""
    mean = model.shift
    variance = 0.0
    for t in model.terms:
        m = t.distribution.moments()
        mean += t.coefficient * m.mean
        variance += t.coefficient * t.coefficient * m.variance
    return MomentReport(mean, variance)


@dataclass(frozen=True)
class SimulationConfig:
    sample_count: int
    master_seed: int
    chunk_size: int
    failure_reservoir_cap: int = 1_000_000
    robust_subsample_cap: int = 100_000

    def __post_init__(self):
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be at least 1")
        if self.sample_count < 1:
            raise ValueError("sample_count must be at least 1")
        if self.failure_reservoir_cap < 1 or self.robust_subsample_cap < 1:
            raise ValueError("reservoir caps must be at least 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")


@dataclass
class SimulationSummary:
    """Streaming statistics of one simulate() run."""

    n: int
    mean_g: float
    var_g: float
    min_g: float
    max_g: float
    failure_count: int
    deficit_sum: float
    deficit_min: float | None
    deficit_max: float | None
    failure_deficits: np.ndarray
    robust_subsample: np.ndarray
    config: SimulationConfig

    @property
    def pf(self) -> float:
        return self.failure_count / self.n


@dataclass(frozen=True)
class RobustScales:
    mad: float
    iqr: float
    conditional_std: float | None


def _chunk_layout(config: SimulationConfig) -> list[tuple[int, int]]:
    sizes = []
    remaining = config.sample_count
    idx = 0
    while remaining > 0:
        size = min(config.chunk_size, remaining)
        sizes.append((idx, size))
        remaining -= size
        idx += 1
    return sizes


def _chunk_g(model: LimitStateModel, master_seed: int, lane: int, idx: int, size: int) -> np.ndarray:
    rng = _lane_rng(master_seed, lane, idx)
    g = np.full(size, model.shift)
    # Terms are sampled in declaration order; the per-chunk stream layout
    # is part of the reproducibility contract.
    for t in model.terms:
        g += t.coefficient * t.distribution.sample(rng, size)
    return g


def g_chunks(model: LimitStateModel, config: SimulationConfig) -> Iterator[np.ndarray]:
    """Regenerate the exact g stream of simulate(), chunk by chunk.

    Useful for second passes (histogram binning) that need the full
    sample without retaining it in the summary.
    """
    for idx, size in _chunk_layout(config):
        yield _chunk_g(model, config.master_seed, _LANE_MAIN, idx, size)


@dataclass
class _ChunkPartial:
    idx: int
    n: int
    mean: float
    m2: float
    min_g: float
    max_g: float
    deficits: np.ndarray
    g: np.ndarray


def _summarize_chunk(model: LimitStateModel, master_seed: int, idx: int, size: int) -> _ChunkPartial:
    g = _chunk_g(model, master_seed, _LANE_MAIN, idx, size)
    mean = float(g.mean())
    m2 = float(np.square(g - mean).sum())
    deficits = -g[g < 0.0]
    return _ChunkPartial(
        idx=idx,
        n=size,
        mean=mean,
        m2=m2,
        min_g=float(g.min()),
        max_g=float(g.max()),
        deficits=deficits,
        g=g,
    )


class _Accumulator:
    """Sequential fold over chunk partials in ascending index order."""

    def __init__(self, config: SimulationConfig):
        self.config = config
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.min_g = math.inf
        self.max_g = -math.inf
        self.failure_count = 0
        self.deficit_sum = 0.0
        self.deficit_min = math.inf
        self.deficit_max = -math.inf
        self.deficit_store: list[np.ndarray] = []
        self.deficit_stored = 0
        self.reservoir = np.empty(config.robust_subsample_cap)
        self.reservoir_seen = 0
        self.reservoir_rng = _lane_rng(config.master_seed, _LANE_RESERVOIR)

    def fold(self, p: _ChunkPartial) -> None:
        n = self.n + p.n
        delta = p.mean - self.mean
        self.mean += delta * (p.n / n)
        self.m2 += p.m2 + delta * delta * (self.n * p.n / n)
        self.n = n

        self.min_g = min(self.min_g, p.min_g)
        self.max_g = max(self.max_g, p.max_g)

        d = p.deficits
        self.failure_count += d.size
        if d.size:
            self.deficit_sum += float(d.sum())
            self.deficit_min = min(self.deficit_min, float(d.min()))
            self.deficit_max = max(self.deficit_max, float(d.max()))
            room = self.config.failure_reservoir_cap - self.deficit_stored
            if room > 0:
                kept = d[:room]
                self.deficit_store.append(kept)
                self.deficit_stored += kept.size

        self._reservoir_fold(p.g)

    def _reservoir_fold(self, values: np.ndarray) -> None:
        # Vectorized Algorithm R; last-wins fancy assignment reproduces
        # the element-by-element update exactly.
        cap = self.config.robust_subsample_cap
        pos = 0
        if self.reservoir_seen < cap:
            take = min(cap - self.reservoir_seen, values.size)
            self.reservoir[self.reservoir_seen : self.reservoir_seen + take] = values[:take]
            self.reservoir_seen += take
            pos = take
        rest = values[pos:]
        if rest.size == 0:
            return
        t = self.reservoir_seen + np.arange(1, rest.size + 1, dtype=float)
        accept = self.reservoir_rng.random(rest.size) < cap / t
        hits = int(accept.sum())
        if hits:
            slots = self.reservoir_rng.integers(0, cap, size=hits)
            self.reservoir[slots] = rest[accept]
        self.reservoir_seen += rest.size

    def finish(self) -> SimulationSummary:
        has_fail = self.failure_count > 0
        stored = (
            np.concatenate(self.deficit_store) if self.deficit_store else np.empty(0)
        )
        return SimulationSummary(
            n=self.n,
            mean_g=self.mean,
            var_g=self.m2 / (self.n - 1) if self.n > 1 else math.nan,
            min_g=self.min_g,
            max_g=self.max_g,
            failure_count=self.failure_count,
            deficit_sum=self.deficit_sum,
            deficit_min=self.deficit_min if has_fail else None,
            deficit_max=self.deficit_max if has_fail else None,
            failure_deficits=stored,
            robust_subsample=self.reservoir[: min(self.reservoir_seen, self.config.robust_subsample_cap)].copy(),
            config=self.config,
        )


def _thread_budget(requested: int | None) -> int:
    threads = 1 if requested is None else max(1, int(requested))
    cap = os.environ.get("SEVREL_THREADS")
    if cap is not None:
        try:
            threads = min(threads, max(1, int(cap)))
        except ValueError:
            pass
    return threads


def simulate(
    model: LimitStateModel,
    config: SimulationConfig,
    threads: int | None = None,
) -> SimulationSummary:
    """Run the chunked Monte Carlo estimate of the g distribution.

    `threads` is an upper bound on concurrent chunk evaluation, further
    capped by the SEVREL_THREADS environment variable. The answer does
    not depend on it: chunks are folded strictly in index order.
    """
    layout = _chunk_layout(config)
    acc = _Accumulator(config)
    threads = _thread_budget(threads)

    if threads == 1:
        for idx, size in layout:
            acc.fold(_summarize_chunk(model, config.master_seed, idx, size))
        return acc.finish()

    # Fold greedily as contiguous indices become available so memory stays
    # bounded by thread-pool lag, not by the run length.
    pending: dict[int, _ChunkPartial] = {}
    next_idx = 0
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {
            pool.submit(_summarize_chunk, model, config.master_seed, idx, size)
            for idx, size in layout
        }
        while futures:
            done, futures = wait(futures, return_when=FIRST_COMPLETED)
            for fut in done:
                p = fut.result()
                pending[p.idx] = p
            while next_idx in pending:
                acc.fold(pending.pop(next_idx))
                next_idx += 1
    return acc.finish()


def calibrate_shift(
    model: LimitStateModel,
    target_pf: float,
    config: SimulationConfig,
) -> float:
    """Shift c such that the model with shift c hits target_pf empirically.

    Draws one calibration sample of g with shift forced to zero on a
    dedicated substream lane, then returns c = -(k-th smallest g) with
    k = ceil(target_pf * n). On the calibration sample itself the shifted
    failure fraction then matches target_pf to within 1/n.

    Refuses targets that would rest on fewer than 10 expected failures.
    """
    if not 0.0 < target_pf < 1.0:
        raise ValueError(f"target_pf must be inside (0, 1), got {target_pf!r}")
    expected_failures = target_pf * config.sample_count
    if expected_failures < 10.0:
        raise ValueError(
            f"target_pf * sample_count = {expected_failures:.3g} is below 10; "
            "the order statistic would be too noisy to calibrate against"
        )
    base = model.with_shift(0.0)
    parts = [
        _chunk_g(base, config.master_seed, _LANE_CALIBRATION, idx, size)
        for idx, size in _chunk_layout(config)
    ]
    g = np.concatenate(parts)
    k = math.ceil(expected_failures - 1e-9)
    kth = float(np.partition(g, k - 1)[k - 1])
    return -kth


def robust_scales(summary: SimulationSummary) -> RobustScales:
    """MAD and IQR of the robust g subsample, plus the deficit spread.

    conditional_std is the sample standard deviation of the stored
    failure deficits, or None when fewer than two are stored.
    """
    sub = summary.robust_subsample
    if sub.size < 2:
        raise ValueError("robust scales need at least two retained samples")
    med = float(np.median(sub))
    mad = float(np.median(np.abs(sub - med)))
    q25, q75 = np.percentile(sub, [25.0, 75.0])
    stored = summary.failure_deficits
    conditional_std = float(np.std(stored, ddof=1)) if stored.size >= 2 else None
    return RobustScales(mad=mad, iqr=float(q75 - q25), conditional_std=conditional_std)
