"""Canned reliability studies with reference expectations.

Each study bundles a limit-state model, simulation defaults, and the
values its result is checked against: reported reference numbers,
closed-form values of the chosen parameterization, or calibration
targets. Running a study executes the full pipeline (optional shift
calibration, simulation, severity metrics, classification), bins the
limit-state samples and the failure deficits for plotting, and grades
every expectation.

The three "figure-grid" studies exist to emit histogram data for the
classic three-row picture (Gaussian, mild non-Gaussian, heavy-tailed);
their expectations are by-construction values, not reported ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import (
    Gumbel,
    Lognormal,
    Mixture,
    Normal,
    Pareto,
    lognormal_from_median_cov,
)
from .engine import (
    LimitStateModel,
    SimulationConfig,
    SimulationSummary,
    Term,
    calibrate_shift,
    g_chunks,
    model_moments,
    simulate,
)
from .gaussian import deficit, invert_deficit, norm_cdf
from .metrics import (
    MomentReport,
    SeverityLevel,
    SeverityReport,
    WorkflowDecision,
    assess,
    build_report,
)

__all__ = [
    "Expectation",
    "ExpectationCheck",
    "Histogram",
    "Scenario",
    "ScenarioResult",
    "SCENARIO_IDS",
    "builtin",
    "run",
    "collect_histograms",
    "export_result",
]

HISTOGRAM_BINS = 200
# switch the deficit histogram to logarithmic bins past this spread
LOG_BIN_RATIO = 1e3


@dataclass(frozen=True)
class Expectation:
    """One graded check: a metric, its expected value, and a tolerance.

    tolerance=None means exact equality (labels, flags, booleans).
    provenance says where the expected value comes from: "reference"
    (reported result), "analytic" (closed form of this very model),
    "target" (calibration goal), or "construction" (holds by design).
    """

    metric: str
    expected: float | str | bool
    tolerance: float | None
    provenance: str


@dataclass(frozen=True)
class ExpectationCheck:
    metric: str
    expected: float | str | bool
    computed: float | str | bool | None
    tolerance: float | None
    passed: bool
    provenance: str


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    log_bins: bool = False


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    title: str
    description: str
    model: LimitStateModel
    sample_count: int
    chunk_size: int
    expectations: tuple[Expectation, ...]
    calibrate_pf: float | None = None
    beta_target: float | None = None
    default_seed: int = 0

    def config(
        self, master_seed: int | None = None, sample_count: int | None = None
    ) -> SimulationConfig:
        return SimulationConfig(
            sample_count=self.sample_count if sample_count is None else sample_count,
            master_seed=self.default_seed if master_seed is None else master_seed,
            chunk_size=self.chunk_size,
        )


@dataclass(frozen=True)
class ScenarioResult:
    scenario: Scenario
    model: LimitStateModel
    config: SimulationConfig
    moments: MomentReport
    summary: SimulationSummary
    report: SeverityReport
    decision: WorkflowDecision | None
    calibrated_shift: float | None
    g_histogram: Histogram
    deficit_histogram: Histogram | None
    checks: tuple[ExpectationCheck, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _expectation_value(name: str, report: SeverityReport, moments: MomentReport):
    if name == "pf":
        return report.pf
    if name == "beta":
        return report.beta
    if name == "efStar":
        return report.ef_star
    if name == "betaS":
        return report.beta_s
    if name == "betaSDefined":
        return report.beta_s is not None
    if name == "betaSAboveBeta":
        if report.beta_s is None or report.beta is None:
            return False
        return report.beta_s > report.beta
    if name == "betaSNearBeta":
        if report.beta_s is None or report.beta is None:
            return None
        return abs(report.beta_s - report.beta)
    if name == "level":
        return report.level.label if report.level is not None else None
    if name == "extremeFlag":
        return report.extreme_flag.value if report.extreme_flag is not None else "none"
    if name == "analyticVarianceFinite":
        return moments.variance_finite
    raise ValueError(f"unknown expectation metric {name!r}")


def _grade(exp: Expectation, report: SeverityReport, moments: MomentReport) -> ExpectationCheck:
    value = _expectation_value(exp.metric, report, moments)
    if exp.tolerance is None:
        passed = value == exp.expected
    else:
        passed = value is not None and abs(value - exp.expected) <= exp.tolerance
    return ExpectationCheck(exp.metric, exp.expected, value, exp.tolerance, passed, exp.provenance)


def collect_histograms(
    model: LimitStateModel, config: SimulationConfig, summary: SimulationSummary
) -> tuple[Histogram, Histogram | None]:
    """Bin g and the failure deficits in one extra pass over the stream."""
    lo, hi = summary.min_g, summary.max_g
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    g_edges = np.linspace(lo, hi, HISTOGRAM_BINS + 1)
    g_counts = np.zeros(HISTOGRAM_BINS, dtype=np.int64)

    d_edges = None
    d_log = False
    d_counts = None
    if summary.failure_count > 0:
        dlo, dhi = summary.deficit_min, summary.deficit_max
        if dlo == dhi:
            d_edges = np.linspace(0.5 * dlo, 1.5 * dhi, HISTOGRAM_BINS + 1)
        elif dhi / dlo > LOG_BIN_RATIO:
            d_edges = np.geomspace(dlo, dhi, HISTOGRAM_BINS + 1)
            d_log = True
        else:
            d_edges = np.linspace(dlo, dhi, HISTOGRAM_BINS + 1)
        d_counts = np.zeros(HISTOGRAM_BINS, dtype=np.int64)

    for chunk in g_chunks(model, config):
        g_counts += np.histogram(chunk, bins=g_edges)[0]
        if d_edges is not None:
            failed = chunk[chunk < 0.0]
            if failed.size:
                d_counts += np.histogram(-failed, bins=d_edges)[0]

    g_hist = Histogram(edges=g_edges, counts=g_counts)
    d_hist = Histogram(edges=d_edges, counts=d_counts, log_bins=d_log) if d_edges is not None else None
    return g_hist, d_hist


def run(
    scenario: Scenario,
    master_seed: int | None = None,
    sample_count: int | None = None,
    threads: int | None = None,
) -> ScenarioResult:
    config = scenario.config(master_seed=master_seed, sample_count=sample_count)
    model = scenario.model
    shift = None
    if scenario.calibrate_pf is not None:
        shift = calibrate_shift(model, scenario.calibrate_pf, config)
        model = model.with_shift(shift)
    summary = simulate(model, config, threads=threads)
    moments = model_moments(model)
    report = build_report(summary, moments)
    decision = None
    if scenario.beta_target is not None and report.beta is not None:
        decision = assess(report, scenario.beta_target)
    g_hist, d_hist = collect_histograms(model, config, summary)
    checks = tuple(_grade(e, report, moments) for e in scenario.expectations)
    return ScenarioResult(
        scenario=scenario,
        model=model,
        config=config,
        moments=moments,
        summary=summary,
        report=report,
        decision=decision,
        calibrated_shift=shift,
        g_histogram=g_hist,
        deficit_histogram=d_hist,
        checks=checks,
    )


def export_result(result: ScenarioResult, fmt: str, path: str) -> None:
    """Write one artifact: report-json, histogram-csv, deficit-csv, or fcurve-csv."""
    from . import report as rep

    if fmt == "report-json":
        doc = rep.simulation_document(
            result.model,
            result.config,
            result.moments,
            result.summary,
            result.report,
            decision=result.decision,
            beta_target=result.scenario.beta_target,
            scenario_id=result.scenario.scenario_id,
            calibrated_shift=result.calibrated_shift,
        )
        rep.write_text(path, rep.render_json(doc))
    elif fmt == "histogram-csv":
        rep.write_text(path, rep.histogram_csv(result.g_histogram.edges, result.g_histogram.counts))
    elif fmt == "deficit-csv":
        if result.deficit_histogram is None:
            rep.write_text(path, rep.histogram_csv(np.array([0.0, 1.0]), np.array([0])))
        else:
            rep.write_text(
                path,
                rep.histogram_csv(result.deficit_histogram.edges, result.deficit_histogram.counts),
            )
    elif fmt == "fcurve-csv":
        rep.write_text(path, rep.fcurve_csv())
    else:
        raise ValueError(f"unknown export format {fmt!r}")


# ---------------------------------------------------------------------------
# builtin studies

# two-Gaussian case: every quantity has a closed form
_EX1_BETA = 5.0 / math.sqrt(1.0 + 1.5 * 1.5)
_EX1_EF_STAR = deficit(_EX1_BETA)

# single-lognormal grid row: exact failure stats of R - cut via the
# truncated-lognormal mean E[R | R < cut]
_MILD_MU, _MILD_SIG, _MILD_CUT = 2.3, 0.2, 6.78
_MILD_BETA = (_MILD_MU - math.log(_MILD_CUT)) / _MILD_SIG
_MILD_MEAN = math.exp(_MILD_MU + _MILD_SIG * _MILD_SIG / 2.0)
_MILD_SD = math.sqrt(math.expm1(_MILD_SIG * _MILD_SIG)) * _MILD_MEAN
_MILD_EF_STAR = (
    _MILD_CUT
    - _MILD_MEAN * norm_cdf(-_MILD_BETA - _MILD_SIG) / norm_cdf(-_MILD_BETA)
) / _MILD_SD
_MILD_BETA_S = invert_deficit(_MILD_EF_STAR)

# heavy grid row: exact values of this parameterization via the Pareto
# tail integrals (finite variance, deficit far beyond the endpoint)
_HEAVY_BETA = 3.5718985944265498
_HEAVY_EF_STAR = 1.7083217827648667

# matched-rate pair: one-in-a-hundred failures by construction
_AB_PF = 0.01
_AB_N = 1_000_000
_AB_PF_TOL = 4.0 * math.sqrt(_AB_PF * (1.0 - _AB_PF) / _AB_N)

_CHUNK = 1_000_000


def _scenarios() -> dict[str, Scenario]:
    entries = [
        Scenario(
            scenario_id="example1-gaussian",
            title="Two-Gaussian closed-form check",
            description=(
                "Capacity N(10,1) against demand N(5,1.5). Everything has a "
                "closed form, so the estimates are graded against exact values."
            ),
            model=LimitStateModel(
                terms=(
                    Term("capacity", 1.0, Normal(10.0, 1.0)),
                    Term("demand", -1.0, Normal(5.0, 1.5)),
                )
            ),
            sample_count=5_000_000,
            chunk_size=_CHUNK,
            expectations=(
                Expectation("beta", _EX1_BETA, 0.03, "analytic"),
                Expectation("efStar", _EX1_EF_STAR, 0.01, "analytic"),
                Expectation("betaS", _EX1_BETA, 0.12, "analytic"),
                Expectation("level", "II: Moderate", None, "analytic"),
            ),
        ),
        Scenario(
            scenario_id="example2-mild",
            title="Lognormal capacity, Gumbel demand",
            description=(
                "The failure rate looks poor, but failures are shallow: the "
                "severity-aware index comes out far above the frequency index."
            ),
            model=LimitStateModel(
                terms=(
                    Term("capacity", 1.0, Lognormal(2.3, 0.2)),
                    Term("demand", -1.0, Gumbel(8.0, 1.2)),
                )
            ),
            sample_count=5_000_000,
            chunk_size=_CHUNK,
            expectations=(
                Expectation("beta", 1.5236, 0.02, "reference"),
                Expectation("efStar", 0.3040, 0.01, "reference"),
                Expectation("betaS", 2.722, 0.06, "reference"),
                Expectation("betaSAboveBeta", True, None, "reference"),
                Expectation("level", "II: Moderate", None, "reference"),
            ),
        ),
        Scenario(
            scenario_id="example3-extreme",
            title="Heavy tail outside the valid domain",
            description=(
                "A Pareto demand component with infinite variance. The "
                "normalized deficit is undefined, so the run must raise the "
                "extreme flag instead of reporting a number."
            ),
            model=LimitStateModel(
                terms=(
                    Term("capacity", 1.0, Normal(20.0, 1.5)),
                    Term(
                        "demand",
                        -1.0,
                        Mixture(
                            (
                                (0.999, Normal(5.0, 2.0)),
                                (0.001, Pareto(10.0, 1.5)),
                            )
                        ),
                    ),
                )
            ),
            sample_count=5_000_000,
            chunk_size=_CHUNK,
            expectations=(
                Expectation("beta", 3.388, 0.08, "reference"),
                Expectation("extremeFlag", "variance-infinite-or-unstable", None, "analytic"),
                Expectation("level", "V: Extreme", None, "analytic"),
                Expectation("betaSDefined", False, None, "analytic"),
            ),
        ),
        Scenario(
            scenario_id="case-study",
            title="Factored load combination",
            description=(
                "Design check R - (1.2 D + 1.6 L) with a rare-overload live "
                "load. Failures are rare but deep."
            ),
            model=LimitStateModel(
                terms=(
                    Term("resistance", 1.0, lognormal_from_median_cov(1520.0, 0.10)),
                    Term("dead", -1.2, Normal(500.0, 50.0)),
                    Term(
                        "live",
                        -1.6,
                        Mixture(
                            (
                                (0.9995, Gumbel(150.0, 30.0)),
                                (0.0005, Gumbel(500.0, 30.0)),
                            )
                        ),
                    ),
                )
            ),
            sample_count=2_000_000,
            chunk_size=_CHUNK,
            expectations=(
                Expectation("pf", 9.1e-5, 2.7e-5, "reference"),
                Expectation("beta", 3.744, 0.08, "reference"),
                Expectation("efStar", 0.4741, 0.12, "reference"),
                Expectation("betaS", 1.278, 0.72, "reference"),
                Expectation("level", "III: High", None, "reference"),
            ),
        ),
        Scenario(
            scenario_id="scenarioA",
            title="Matched failure rate, shallow deficits",
            description=(
                "Lognormal capacity against a single Gumbel demand, shifted "
                "so one sample in a hundred fails."
            ),
            model=LimitStateModel(
                terms=(
                    Term("capacity", 1.0, Lognormal(1.6, 0.15)),
                    Term("demand", -1.0, Gumbel(2.0, 0.6)),
                )
            ),
            sample_count=_AB_N,
            chunk_size=_CHUNK,
            calibrate_pf=_AB_PF,
            expectations=(
                Expectation("pf", _AB_PF, _AB_PF_TOL, "target"),
                Expectation("betaSDefined", True, None, "construction"),
            ),
        ),
        Scenario(
            scenario_id="scenarioB",
            title="Matched failure rate, heavy deficits",
            description=(
                "Same capacity and failure rate as its shallow twin, but a "
                "rare far-out Gumbel component deepens the failures."
            ),
            model=LimitStateModel(
                terms=(
                    Term("capacity", 1.0, Lognormal(1.6, 0.15)),
                    Term(
                        "demand",
                        -1.0,
                        Mixture(
                            (
                                (0.995, Gumbel(2.0, 0.6)),
                                (0.005, Gumbel(6.0, 0.6)),
                            )
                        ),
                    ),
                )
            ),
            sample_count=_AB_N,
            chunk_size=_CHUNK,
            calibrate_pf=_AB_PF,
            expectations=(
                Expectation("pf", _AB_PF, _AB_PF_TOL, "target"),
            ),
        ),
        Scenario(
            scenario_id="figure-grid-gaussian",
            title="Histogram grid, Gaussian row",
            description=(
                "Single Gaussian limit state at reliability index 3.5; the "
                "severity-aware index must agree with the frequency index."
            ),
            model=LimitStateModel(terms=(Term("margin", 1.0, Normal(3.5, 1.0)),)),
            sample_count=5_000_000,
            chunk_size=_CHUNK,
            expectations=(
                Expectation("beta", 3.5, 0.05, "construction"),
                Expectation("efStar", deficit(3.5), 0.025, "construction"),
                Expectation("betaSNearBeta", 0.0, 0.45, "construction"),
                Expectation("level", "I: Mild", None, "construction"),
            ),
        ),
        Scenario(
            scenario_id="figure-grid-mild",
            title="Histogram grid, mild row",
            description=(
                "Lognormal capacity against a fixed threshold: bounded, "
                "shallow deficits, so severity reads milder than frequency."
            ),
            model=LimitStateModel(
                terms=(Term("capacity", 1.0, Lognormal(_MILD_MU, _MILD_SIG)),),
                shift=-_MILD_CUT,
            ),
            sample_count=5_000_000,
            chunk_size=_CHUNK,
            expectations=(
                Expectation("beta", _MILD_BETA, 0.01, "analytic"),
                Expectation("efStar", _MILD_EF_STAR, 0.005, "analytic"),
                Expectation("betaS", _MILD_BETA_S, 0.06, "analytic"),
                Expectation("betaSAboveBeta", True, None, "construction"),
                Expectation("level", "I: Mild", None, "construction"),
            ),
        ),
        Scenario(
            scenario_id="figure-grid-heavy",
            title="Histogram grid, heavy row",
            description=(
                "A rare Pareto demand with finite variance but deficits far "
                "beyond the Gaussian endpoint."
            ),
            model=LimitStateModel(
                terms=(
                    Term("capacity", 1.0, Normal(18.0, 1.5)),
                    Term(
                        "demand",
                        -1.0,
                        Mixture(
                            (
                                (0.997, Normal(5.0, 2.0)),
                                (0.003, Pareto(10.0, 5.0)),
                            )
                        ),
                    ),
                )
            ),
            sample_count=5_000_000,
            chunk_size=_CHUNK,
            expectations=(
                Expectation("beta", _HEAVY_BETA, 0.05, "analytic"),
                Expectation("efStar", _HEAVY_EF_STAR, 0.3, "analytic"),
                Expectation("extremeFlag", "deficit-beyond-endpoint", None, "construction"),
                Expectation("level", "V: Extreme", None, "construction"),
                Expectation("analyticVarianceFinite", True, None, "analytic"),
            ),
        ),
    ]
    return {s.scenario_id: s for s in entries}


_REGISTRY = _scenarios()
SCENARIO_IDS = tuple(_REGISTRY)


def builtin(scenario_id: str) -> Scenario:
    try:
        return _REGISTRY[scenario_id]
    except KeyError:
        known = ", ".join(SCENARIO_IDS)
        raise ValueError(f"unknown scenario id {scenario_id!r}; known ids: {known}") from None
