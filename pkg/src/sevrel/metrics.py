"""Severity metrics, classification, and the two-stage design check.

The classical reliability index beta answers "how often does the design
fail"; the severity-aware index answers "and how badly". From a
simulation summary we estimate

* pf and beta = -quantile(pf),
* the expected failure deficit, the mean of -g over failures,
* its normalized form, deficit / sigma_g, which requires a finite
  variance, and
* the severity-aware index: the Gaussian reliability index whose margin
  would produce the same normalized deficit.

Deficits too deep for any Gaussian margin, or models whose variance is
infinite (or empirically unstable), are reported through an extreme
flag instead of a number. Classification buckets the normalized deficit
against the Gaussian benchmarks at indices 3, 2 and 1; any flag lands in
the extreme class. The two-stage check mirrors standards practice:
frequency gate first, severity gate second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from . import gaussian
from .distributions import MomentReport
from .engine import SimulationSummary, bootstrap_rng

__all__ = [
    "ExtremeFlag",
    "SeverityLevel",
    "Verdict",
    "SeverityReport",
    "WorkflowDecision",
    "NoFailuresObserved",
    "LEVEL_THRESHOLDS",
    "DEFAULT_MAX_LEVEL",
    "DEFAULT_MAX_LEVEL_CRITICAL",
    "reliability_index",
    "expected_failure_deficit",
    "variance_unstable",
    "normalized_deficit",
    "severity_index",
    "gaussian_benchmark_deficit",
    "classify",
    "classify_index",
    "build_report",
    "assess",
]


class NoFailuresObserved(ValueError):
    """Raised when a deficit statistic is requested but no g < 0 occurred."""


class ExtremeFlag(Enum):
    """Reasons the severity index cannot be a finite number."""

    DEFICIT_BEYOND_ENDPOINT = "deficit-beyond-endpoint"
    VARIANCE_INFINITE_OR_UNSTABLE = "variance-infinite-or-unstable"


class SeverityLevel(IntEnum):
    MILD = 1
    MODERATE = 2
    HIGH = 3
    CRITICAL = 4
    EXTREME = 5

    @property
    def label(self) -> str:
        return _LEVEL_LABELS[self]

    @property
    def recommendation(self) -> str:
        return _LEVEL_ADVICE[self]


_LEVEL_LABELS = {
    SeverityLevel.MILD: "I: Mild",
    SeverityLevel.MODERATE: "II: Moderate",
    SeverityLevel.HIGH: "III: High",
    SeverityLevel.CRITICAL: "IV: Critical",
    SeverityLevel.EXTREME: "V: Extreme",
}

_LEVEL_ADVICE = {
    SeverityLevel.MILD: "failures stay shallow; standard margins and routine checks suffice",
    SeverityLevel.MODERATE: "failure depth is noticeable; tighten quality assurance and consider monitoring",
    SeverityLevel.HIGH: "failures run deep; add monitoring and plan mitigation for overload paths",
    SeverityLevel.CRITICAL: "failure depth approaches the Gaussian limit; redesign unless secondary defenses are strong",
    SeverityLevel.EXTREME: "failure depth is beyond any Gaussian comparison; redesign the limit state",
}

# Benchmarks computed from the kernel at import, never hard-coded.
LEVEL_THRESHOLDS = (
    gaussian.deficit(3.0),
    gaussian.deficit(2.0),
    gaussian.deficit(1.0),
    gaussian.DEFICIT_ENDPOINT,
)


class Verdict(Enum):
    REJECT_FREQUENCY = "RejectFrequency"
    EXTREME_REDESIGN = "ExtremeRedesign"
    ACCEPT_WITH_LEVEL = "AcceptWithLevel"


#: Severity ceiling for ordinary structures; use the critical default for
#: consequence-class-critical ones.
DEFAULT_MAX_LEVEL = SeverityLevel.HIGH
DEFAULT_MAX_LEVEL_CRITICAL = SeverityLevel.MODERATE


def reliability_index(pf: float) -> float:
    """Classical index beta = -quantile(pf) for pf inside (0, 1)."""
    pf = float(pf)
    if pf == 0.0:
        raise NoFailuresObserved(
            "pf is 0: no failures observed, beta is undefined and only a "
            "lower bound (from pf < 1/n) is available"
        )
    if not 0.0 < pf < 1.0:
        raise ValueError(f"pf must be inside (0, 1), got {pf!r}")
    return -gaussian.norm_quantile(pf)


def expected_failure_deficit(summary: SimulationSummary) -> float:
    """Mean of -g over failures, from the exact running sum."""
    if summary.failure_count == 0:
        raise NoFailuresObserved("no failures in this run, the deficit is undefined")
    return summary.deficit_sum / summary.failure_count


def variance_unstable(summary: SimulationSummary) -> bool:
    """Heuristic screen for variance that exists on paper only.

    Splits the robust subsample into stream-order halves and compares the
    std/MAD ratio between them; a drift beyond 50 percent means the
    sample standard deviation never settled. Purely a backstop behind the
    analytic finiteness flags; needs at least 200 retained points to vote.
    """
    sub = summary.robust_subsample
    if sub.size < 200:
        return False
    half = sub.size // 2
    ratios = []
    for part in (sub[:half], sub[half : 2 * half]):
        med = np.median(part)
        mad = np.median(np.abs(part - med))
        if mad == 0.0:
            return False
        ratios.append(float(np.std(part, ddof=1)) / float(mad))
    lo, hi = sorted(ratios)
    return hi / lo - 1.0 > 0.5


def normalized_deficit(
    summary: SimulationSummary, moments: MomentReport
) -> float | ExtremeFlag:
    """Expected failure deficit over sigma_g, or the instability flag.

    The analytic moment report decides whether sigma_g exists at all;
    the empirical stability screen can veto it as well. When either test
    fails the value is meaningless and the flag is returned instead.
    """
    if not moments.variance_finite or variance_unstable(summary):
        return ExtremeFlag.VARIANCE_INFINITE_OR_UNSTABLE
    sigma = math.sqrt(summary.var_g)
    return expected_failure_deficit(summary) / sigma


def severity_index(ef_star: float) -> float | ExtremeFlag:
    """Invert the Gaussian deficit map, or flag a deficit beyond it."""
    ef_star = float(ef_star)
    if ef_star <= 0.0:
        raise ValueError(f"normalized deficit must be positive, got {ef_star!r}")
    if ef_star >= gaussian.DEFICIT_ENDPOINT:
        return ExtremeFlag.DEFICIT_BEYOND_ENDPOINT
    return gaussian.invert_deficit(ef_star)


def gaussian_benchmark_deficit(beta: float) -> float:
    """Normalized deficit a Gaussian margin at index beta would show."""
    return gaussian.deficit(beta)


def classify(value: float | ExtremeFlag) -> SeverityLevel:
    """Severity level for a normalized deficit (or an extreme flag).

    Thresholds are the Gaussian benchmarks at indices 3, 2, 1 and the
    endpoint; each bucket includes its lower bound.
    """
    if isinstance(value, ExtremeFlag):
        return SeverityLevel.EXTREME
    value = float(value)
    if value <= 0.0:
        raise ValueError(f"normalized deficit must be positive, got {value!r}")
    t1, t2, t3, t4 = LEVEL_THRESHOLDS
    if value < t1:
        return SeverityLevel.MILD
    if value < t2:
        return SeverityLevel.MODERATE
    if value < t3:
        return SeverityLevel.HIGH
    if value < t4:
        return SeverityLevel.CRITICAL
    return SeverityLevel.EXTREME


def classify_index(beta_s: float) -> SeverityLevel:
    """Severity level straight from a severity-aware index."""
    beta_s = float(beta_s)
    if beta_s <= 0.0:
        raise ValueError(f"severity index must be positive, got {beta_s!r}")
    if beta_s >= 3.0:
        return SeverityLevel.MILD
    if beta_s >= 2.0:
        return SeverityLevel.MODERATE
    if beta_s >= 1.0:
        return SeverityLevel.HIGH
    return SeverityLevel.CRITICAL


@dataclass(frozen=True)
class SeverityReport:
    n: int
    failure_count: int
    pf: float
    pf_se: float
    beta: float | None
    beta_moment: float | None
    ef: float | None
    ef_star: float | None
    ef_star_ci: tuple[float, float] | None
    beta_s: float | None
    extreme_flag: ExtremeFlag | None
    level: SeverityLevel | None
    gaussian_benchmark: float | None
    notes: tuple[str, ...] = ()


def _bootstrap_ci(
    deficits: np.ndarray,
    sigma: float,
    master_seed: int,
    resamples: int,
) -> tuple[float, float] | None:
    if deficits.size < 2 or resamples < 1:
        return None
    rng = bootstrap_rng(master_seed)
    means = np.empty(resamples)
    for i in range(resamples):
        idx = rng.integers(0, deficits.size, deficits.size)
        means[i] = deficits[idx].mean()
    lo, hi = np.percentile(means, [2.5, 97.5])
    return (float(lo) / sigma, float(hi) / sigma)


def build_report(
    summary: SimulationSummary,
    moments: MomentReport,
    bootstrap_resamples: int = 200,
) -> SeverityReport:
    """Assemble the full severity report for one run.

    The normalized-deficit confidence interval is a nonparametric
    bootstrap over the stored failure deficits, driven by a substream of
    the run's master seed so reports are reproducible byte for byte.
    """
    n = summary.n
    pf = summary.failure_count / n
    pf_se = math.sqrt(pf * (1.0 - pf) / n)
    beta_moment = None
    if summary.n > 1 and summary.var_g > 0.0:
        beta_moment = summary.mean_g / math.sqrt(summary.var_g)

    if summary.failure_count == 0:
        note = f"no failures at N={n}; p_f < {1.0 / n:.6g} (1/N bound)"
        return SeverityReport(
            n=n,
            failure_count=0,
            pf=0.0,
            pf_se=0.0,
            beta=None,
            beta_moment=beta_moment,
            ef=None,
            ef_star=None,
            ef_star_ci=None,
            beta_s=None,
            extreme_flag=None,
            level=None,
            gaussian_benchmark=None,
            notes=(note,),
        )

    beta = reliability_index(pf)
    benchmark = gaussian.deficit(beta) if beta > 0.0 else None
    ef = expected_failure_deficit(summary)

    notes: list[str] = []
    nd = normalized_deficit(summary, moments)
    if isinstance(nd, ExtremeFlag):
        if not moments.variance_finite:
            notes.append("analytic variance of g is infinite; sigma-normalized metrics withheld")
        else:
            notes.append("variance estimate is unstable across the run; sigma-normalized metrics withheld")
        return SeverityReport(
            n=n,
            failure_count=summary.failure_count,
            pf=pf,
            pf_se=pf_se,
            beta=beta,
            beta_moment=beta_moment,
            ef=ef,
            ef_star=None,
            ef_star_ci=None,
            beta_s=None,
            extreme_flag=nd,
            level=SeverityLevel.EXTREME,
            gaussian_benchmark=benchmark,
            notes=tuple(notes),
        )

    ef_star = nd
    level = classify(ef_star)
    si = severity_index(ef_star)
    if isinstance(si, ExtremeFlag):
        flag: ExtremeFlag | None = si
        beta_s = None
        notes.append("normalized deficit is at or beyond the Gaussian endpoint")
    else:
        flag = None
        beta_s = si
    sigma = math.sqrt(summary.var_g)
    ci = _bootstrap_ci(
        summary.failure_deficits, sigma, summary.config.master_seed, bootstrap_resamples
    )
    return SeverityReport(
        n=n,
        failure_count=summary.failure_count,
        pf=pf,
        pf_se=pf_se,
        beta=beta,
        beta_moment=beta_moment,
        ef=ef,
        ef_star=ef_star,
        ef_star_ci=ci,
        beta_s=beta_s,
        extreme_flag=flag,
        level=level,
        gaussian_benchmark=benchmark,
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class WorkflowDecision:
    frequency_pass: bool
    severity_level: SeverityLevel | None
    verdict: Verdict
    advisory: str | None = None


def assess(
    report: SeverityReport,
    beta_target: float,
    max_acceptable_level: SeverityLevel = DEFAULT_MAX_LEVEL,
) -> WorkflowDecision:
    """Two-stage acceptance: frequency gate first, then severity gate.

    A design failing the frequency gate is rejected outright and its
    severity is not consulted. Extreme severity forces redesign. Anything
    else is accepted at its level, with an advisory when the level
    exceeds the caller's ceiling.
    """
    if report.beta is None:
        raise ValueError(
            "frequency check needs a defined beta; a zero-failure run only "
            "bounds it from below"
        )
    if report.beta < beta_target:
        return WorkflowDecision(False, None, Verdict.REJECT_FREQUENCY)
    level = report.level
    if level is None:
        raise ValueError("severity stage needs a classified report")
    if level is SeverityLevel.EXTREME:
        return WorkflowDecision(True, level, Verdict.EXTREME_REDESIGN)
    advisory = None
    if level > max_acceptable_level:
        advisory = (
            f"severity {level.label} exceeds the acceptable ceiling "
            f"{max_acceptable_level.label}; review before release"
        )
    return WorkflowDecision(True, level, Verdict.ACCEPT_WITH_LEVEL, advisory)
