"""Seeded Poisson simulation of coincidence counts.

Random numbers come from numpy's PCG64 bit generator.  The generator for
trial ``t`` of a run with master seed ``s`` is::

    Generator(PCG64(SeedSequence(s, spawn_key=(t,))))

which is exactly what ``SeedSequence(s).spawn(...)`` would hand to the
``t``-th child.  Each trial draws one Poisson variate per table cell, in
the table's canonical cell order.  Changing any of this invalidates stored
count fixtures.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .experiment import CoincidenceTable

Cell = Tuple[str, str]

DEFAULT_PAIRS = 100_000
DEFAULT_TRIALS = 100
DEFAULT_SEED = 1
RNG_ALGORITHM = "PCG64"


@dataclass(frozen=True)
class RunConfig:
    expected_pairs: int = DEFAULT_PAIRS
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if int(self.expected_pairs) != self.expected_pairs or self.expected_pairs < 1:
            raise ValueError("expected_pairs must be a positive integer")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError("trials must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class CountSample:
    counts: Dict[Cell, int]
    total: int
    seed_used: int
    trial: int = 0


@dataclass(frozen=True)
class ErrorBarEstimate:
    """Per-cell mean and sample standard deviation of count/total across trials."""

    cells: Tuple[Cell, ...]
    mean: Dict[Cell, float]
    std: Dict[Cell, float]
    trials_used: int
    excluded: int


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    pvalue: float

    def passes(self, level: float = 1e-3) -> bool:
        return self.pvalue > level


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,)))
    )


def _means(table: CoincidenceTable, pairs: int) -> np.ndarray:
    # analytic zeros can come out as -1e-17
    return np.array([max(0.0, pairs * table[c]) for c in table.cells])


def sample_counts(table: CoincidenceTable, cfg: RunConfig, trial: int = 0) -> CountSample:
    """Independent Poisson count per cell with mean ``expected_pairs * p``."""
    draws = trial_rng(cfg.seed, trial).poisson(_means(table, cfg.expected_pairs))
    counts = {c: int(n) for c, n in zip(table.cells, draws)}
    return CountSample(counts=counts, total=int(draws.sum()), seed_used=cfg.seed, trial=trial)


def run_trials(
    table: CoincidenceTable, cfg: RunConfig, workers: int = 1
) -> List[CountSample]:
    """All trials of a run, ordered by trial index whatever the scheduling."""
    indices = range(cfg.trials)
    if workers <= 1:
        return [sample_counts(table, cfg, t) for t in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: sample_counts(table, cfg, t), indices))


def estimate_errorbars(
    table: CoincidenceTable,
    cfg: RunConfig,
    workers: int = 1,
    samples: Optional[Sequence[CountSample]] = None,
) -> ErrorBarEstimate:
    if cfg.trials < 2:
        raise ValueError("error bars need at least two trials")
    if samples is None:
        samples = run_trials(table, cfg, workers)
    cells = tuple(table.cells)
    used = [s for s in samples if s.total > 0]
    excluded = len(samples) - len(used)
    if len(used) < 2:
        raise ValueError(f"only {len(used)} trials with nonzero counts")
    freqs = np.array([[s.counts[c] / s.total for c in cells] for s in used])
    mean = freqs.mean(axis=0)
    std = freqs.std(axis=0, ddof=1)
    return ErrorBarEstimate(
        cells=cells,
        mean={c: float(m) for c, m in zip(cells, mean)},
        std={c: float(s) for c, s in zip(cells, std)},
        trials_used=len(used),
        excluded=excluded,
    )


def chi_square_test(
    table: CoincidenceTable, cfg: RunConfig, samples: Optional[Sequence[CountSample]] = None
) -> ChiSquareResult:
    """Goodness of fit of pooled counts against the Poisson means of the table.

    The means are fixed in advance (not fitted to the total), so the
    statistic over the cells with nonzero probability has one degree of
    freedom per such cell.  A count in a zero-probability cell is an
    outright failure.
    """
    if samples is None:
        samples = run_trials(table, cfg)
    n = len(samples)
    stat = 0.0
    dof = 0
    for c in table.cells:
        observed = sum(s.counts[c] for s in samples)
        expected = n * cfg.expected_pairs * max(0.0, table[c])
        if expected == 0.0:
            if observed:
                return ChiSquareResult(math.inf, max(dof, 1), 0.0)
            continue
        stat += (observed - expected) ** 2 / expected
        dof += 1
    if dof == 0:
        return ChiSquareResult(0.0, 0, 1.0)
    return ChiSquareResult(stat, dof, float(stats.chi2.sf(stat, dof)))
