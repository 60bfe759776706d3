"""Simulation scenarios, detection experiments, and accuracy metrics.

Scenarios plant cumulative shifts into Gaussian noise or negative binomial
counts.  The named multi-change layouts put changes at 600, 783 and 926
(for n = 1000; positions scale with n), optionally with a short surge on
variate 3 at 280/320 that reverts to the original level.  Accuracy uses a
matching window of ceil(ln n) points: a true change with no estimate inside
the window is missed, an estimate with no true change inside the window is
a false alarm.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .core import (
    KIND_SPARSE,
    InputDataError,
    RandomSource,
    SegmentationResult,
    TimeSeriesMatrix,
)
from .costs import GAUSSIAN, NEGBIN, CostModel, gaussian_model, negbin_model
from .penalties import (
    NullModel,
    PenaltyConfig,
    calibrate_baseline_threshold,
    calibrate_beta,
)
from .postprocess import postprocess
from .wbs import draw_intervals, subset_wbs

AMOC_GAUSS = "amoc_gauss"
MULTI_GAUSS = "multi_gauss"
SMALL_GAUSS = "small_gauss"
SMALL_NEGBIN = "small_negbin"
_GAUSS_KINDS = (AMOC_GAUSS, MULTI_GAUSS, SMALL_GAUSS)

# Change times for the named multi-change layouts, on the n=1000 scale.
_MULTI_TIMES = (600, 783, 926)
_SURGE_TIMES = (280, 320)
_SURGE_VARIATE = 3
DEFAULT_SURGE_SHIFT = 5.0

# Fraction of variates affected by each of the three changes.
_DENSITY_SCENARIOS = {
    "A": (1.0, 1.0, 1.0),
    "B": (1.0, 0.005, 1.0),
    "C": (0.005, 1.0, 0.005),
    "D": (0.01, 0.01, 0.01),
    "E": (0.005, 0.01, 0.05),
}
# Explicit affected sets for the 12-variate layouts; "all" means every variate.
_SMALL_SCENARIOS = {
    "Aprime": ("all", "all", "all"),
    "Bprime": ("all", (1, 7), "all"),
    "Cprime": ((1, 7), "all", (1, 7)),
    "Dprime": ((1, 7), (1, 7), (1, 7)),
}
SCENARIO_NAMES = tuple(_DENSITY_SCENARIOS) + tuple(_SMALL_SCENARIOS)


@dataclass(frozen=True)
class ChangeSpec:
    """One planted change: position, 1-based affected variates, signed shift.

    For Gaussian kinds ``delta`` adds to the mean from ``tau + 1`` on; for
    count kinds it adds to the success probability (negative values raise
    the mean).
    """

    tau: int
    affected: tuple[int, ...]
    delta: float

    def __post_init__(self) -> None:
        if not self.affected:
            raise InputDataError("a change must affect at least one variate")
        if self.delta == 0:
            raise InputDataError("a change must have a non-zero shift")
        object.__setattr__(self, "affected", tuple(sorted(set(self.affected))))


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    n: int
    d: int
    changes: tuple[ChangeSpec, ...]
    surge: bool = False
    negbin_r: float = 20.0
    negbin_p: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in (*_GAUSS_KINDS, SMALL_NEGBIN):
            raise InputDataError(f"unknown scenario kind {self.kind!r}")
        if self.n < 2 or self.d < 1:
            raise InputDataError("scenario needs n >= 2 and d >= 1")
        taus = [ch.tau for ch in self.changes]
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise InputDataError(f"change times must be strictly increasing, got {taus}")
        if taus and (taus[0] < 1 or taus[-1] > self.n - 1):
            raise InputDataError(f"change times {taus} outside 1..{self.n - 1}")
        for ch in self.changes:
            if ch.affected[-1] > self.d:
                raise InputDataError(
                    f"change at {ch.tau} names variate {ch.affected[-1]} but d={self.d}"
                )
        if self.negbin_r <= 0 or not 0 < self.negbin_p < 1:
            raise InputDataError("count scenarios need r > 0 and base p in (0, 1)")


def _density_set(density: float, d: int) -> tuple[int, ...]:
    if not 0 < density <= 1:
        raise InputDataError(f"density must be in (0, 1], got {density}")
    return tuple(range(1, max(1, round(density * d)) + 1))


def _resolve_set(spec, d: int) -> tuple[int, ...]:
    if spec == "all":
        return tuple(range(1, d + 1))
    return tuple(spec)


def scenario(
    name: str,
    model: str = "gaussian",
    n: int = 1000,
    d: int | None = None,
    delta: float = 1.0,
    dp: float = 0.1,
    r: float = 20.0,
    base_p: float = 0.5,
    surge: bool = False,
    surge_shift: float = DEFAULT_SURGE_SHIFT,
) -> ScenarioSpec:
    """Build a named multi-change scenario.

    Names A..E choose affected variates by density (d defaults to 1000);
    Aprime..Dprime use explicit 12-variate layouts.  ``delta`` is the
    Gaussian mean shift per change, ``dp`` the count probability shift
    (each change lowers p by dp, raising the mean).  Change times scale
    proportionally when n differs from 1000.
    """
    if name not in SCENARIO_NAMES:
        raise InputDataError(
            f"unknown scenario {name!r}; choose from {', '.join(SCENARIO_NAMES)}"
        )
    if model not in ("gaussian", "negbin"):
        raise InputDataError(f"model must be 'gaussian' or 'negbin', got {model!r}")
    if name in _DENSITY_SCENARIOS:
        if model != "gaussian":
            raise InputDataError("density scenarios A..E are Gaussian layouts")
        d = 1000 if d is None else d
        sets = [_density_set(f, d) for f in _DENSITY_SCENARIOS[name]]
        kind = MULTI_GAUSS
    else:
        d = 12 if d is None else d
        sets = [_resolve_set(s, d) for s in _SMALL_SCENARIOS[name]]
        kind = SMALL_GAUSS if model == "gaussian" else SMALL_NEGBIN
    times = [round(t * n / 1000) for t in _MULTI_TIMES]
    if any(b <= a for a, b in zip(times, times[1:])) or times[0] < 1 or times[-1] > n - 1:
        raise InputDataError(f"n={n} too small for the three-change layout")

    shift = -dp if kind == SMALL_NEGBIN else delta
    changes = [
        ChangeSpec(tau=t, affected=s, delta=shift)
        for t, s in zip(times, sets)
        if shift != 0
    ]
    if surge:
        s_times = [round(t * n / 1000) for t in _SURGE_TIMES]
        s_shift = -dp if kind == SMALL_NEGBIN else surge_shift
        changes = [
            ChangeSpec(tau=s_times[0], affected=(_SURGE_VARIATE,), delta=s_shift),
            ChangeSpec(tau=s_times[1], affected=(_SURGE_VARIATE,), delta=-s_shift),
            *changes,
        ]
    return ScenarioSpec(
        kind=kind,
        n=n,
        d=d,
        changes=tuple(changes),
        surge=surge,
        negbin_r=r,
        negbin_p=base_p,
    )


def amoc_scenario(
    n: int,
    d: int,
    delta: float,
    density: float | None = None,
    affected: tuple[int, ...] | None = None,
    tau: int | None = None,
) -> ScenarioSpec:
    """Single Gaussian change at ``tau`` (default n // 2)."""
    if (density is None) == (affected is None):
        raise InputDataError("give exactly one of density or affected")
    chosen = _density_set(density, d) if density is not None else tuple(affected)
    tau = n // 2 if tau is None else tau
    changes = (ChangeSpec(tau=tau, affected=chosen, delta=delta),) if delta != 0 else ()
    return ScenarioSpec(kind=AMOC_GAUSS, n=n, d=d, changes=changes)


def signal_matrix(spec: ScenarioSpec) -> np.ndarray:
    """Noise-free parameter matrix: means for Gaussian kinds, p for counts."""
    base = 0.0 if spec.kind in _GAUSS_KINDS else spec.negbin_p
    signal = np.full((spec.d, spec.n), base)
    for ch in spec.changes:
        rows = [i - 1 for i in ch.affected]
        signal[rows, ch.tau :] += ch.delta
    return signal


def generate(
    spec: ScenarioSpec, rng: RandomSource
) -> tuple[TimeSeriesMatrix, tuple[ChangeSpec, ...]]:
    """Draw one dataset; returns the matrix and the ground-truth changes.

    Surge changes are ordinary entries of the truth (two changes that
    cancel); metrics count them like any others.
    """
    signal = signal_matrix(spec)
    g = rng.generator()
    if spec.kind in _GAUSS_KINDS:
        values = signal + g.standard_normal((spec.d, spec.n))
    else:
        if np.any(signal <= 0) or np.any(signal >= 1):
            raise InputDataError("planted shifts push success probability outside (0, 1)")
        values = g.negative_binomial(spec.negbin_r, signal).astype(float)
    names = tuple(f"x{i}" for i in range(1, spec.d + 1))
    return TimeSeriesMatrix(values, names), spec.changes


def fit_model(matrix: TimeSeriesMatrix, spec: ScenarioSpec) -> CostModel:
    """Cost model matching the scenario: unit variance is known for Gaussian
    draws; count dispersion is re-estimated from the data as in production."""
    if spec.kind in _GAUSS_KINDS:
        return gaussian_model(matrix, sigma=1.0)
    return negbin_model(matrix)


def null_model(spec: ScenarioSpec) -> NullModel:
    if spec.kind in _GAUSS_KINDS:
        return NullModel(kind=GAUSSIAN, sigma=1.0)
    return NullModel(kind=NEGBIN, r=spec.negbin_r, p=spec.negbin_p)


def matching_window(n: int) -> int:
    return math.ceil(math.log(n))


@dataclass(frozen=True)
class MetricsReport:
    """Accuracy summary; for multi-replicate runs the counts are averages."""

    avg_missed: float
    avg_false_alarms: float
    type2_rate: float
    affected_tpr: float
    affected_fpr: float
    location_histogram: dict[int, int]
    n_reps: int = 1
    surge_in_truth: bool = False
    replicates: tuple["ReplicateRow", ...] = field(default=())


@dataclass(frozen=True)
class ReplicateRow:
    seed: int
    missed: int
    false_alarms: int
    tpr: float
    fpr: float


def _affected_rates(
    result: SegmentationResult, truth: tuple[ChangeSpec, ...], n: int, d: int
) -> tuple[list[float], list[float]]:
    """Per-change recovery rates from sparse-labelled matched detections."""
    tol = matching_window(n)
    tpr_values: list[float] = []
    fpr_values: list[float] = []
    for ch in truth:
        matches = [det for det in result.detections if abs(det.tau - ch.tau) <= tol]
        if not matches:
            continue
        nearest = min(matches, key=lambda det: (abs(det.tau - ch.tau), det.tau))
        if nearest.kind != KIND_SPARSE:
            continue
        true_set = set(ch.affected)
        est_set = set(nearest.affected)
        tpr_values.append(len(est_set & true_set) / len(true_set))
        if len(true_set) < d:
            fpr_values.append(len(est_set - true_set) / (d - len(true_set)))
    return tpr_values, fpr_values


def evaluate(
    result: SegmentationResult,
    truth: tuple[ChangeSpec, ...],
    n: int,
    d: int,
    surge: bool = False,
) -> MetricsReport:
    """Score one detection run against the planted changes.

    Affected-set rates follow the sparse-recovery convention: each true
    change is matched to its nearest estimate inside the window, and only
    sparse-labelled matches contribute.  TPR is the fraction of truly
    affected variates recovered; FPR the fraction of unaffected variates
    falsely included.
    """
    tol = matching_window(n)
    estimates = [det.tau for det in result.detections]
    true_taus = [ch.tau for ch in truth]

    missed = sum(
        1
        for tau in true_taus
        if not any(abs(est - tau) <= tol for est in estimates)
    )
    false_alarms = sum(
        1
        for est in estimates
        if not any(abs(est - tau) <= tol for tau in true_taus)
    )
    type2 = 1.0 if (true_taus and missed > 0) else 0.0
    tpr_values, fpr_values = _affected_rates(result, truth, n, d)

    return MetricsReport(
        avg_missed=float(missed),
        avg_false_alarms=float(false_alarms),
        type2_rate=type2,
        affected_tpr=float(np.mean(tpr_values)) if tpr_values else 0.0,
        affected_fpr=float(np.mean(fpr_values)) if fpr_values else 0.0,
        location_histogram=dict(Counter(estimates)),
        surge_in_truth=surge,
    )


@dataclass(frozen=True)
class DetectorConfig:
    """How to run detection inside an experiment.

    ``method`` is "subset" or a baseline name; thresholds left at None are
    calibrated once per experiment on the scenario's null model.
    """

    method: str = "subset"
    intervals: int = 1000
    target_fp: float = 0.05
    calib_reps: int = 200
    penalties: PenaltyConfig | None = None
    threshold: float | None = None
    binweight_alpha: float | None = None
    run_postprocess: bool = True


def run_experiment(
    spec: ScenarioSpec,
    detector: DetectorConfig,
    reps: int,
    rng: RandomSource,
) -> MetricsReport:
    """Repeat generate-detect-evaluate and aggregate the metrics.

    Calibration happens once (stream 0); replicate ``k`` draws its data and
    intervals from sub-streams of (1, k).  Affected-set rates average over
    the replicate-level contributing pairs, so replicates without a sparse
    match do not dilute them.
    """
    from .baselines import BaselineConfig, baseline_wbs, default_binweight_alpha

    if reps < 1:
        raise InputDataError("need at least one replicate")

    bw_alpha = detector.binweight_alpha
    if detector.method == "binweight" and bw_alpha is None:
        bw_alpha = default_binweight_alpha(spec.n)

    penalties = detector.penalties
    threshold = detector.threshold
    if detector.method == "subset":
        if penalties is None:
            penalties = calibrate_beta(
                spec.n,
                spec.d,
                null_model(spec),
                rng.child(0),
                target_fp=detector.target_fp,
                reps=detector.calib_reps,
                intervals=detector.intervals,
            )
    elif threshold is None:
        threshold = calibrate_baseline_threshold(
            spec.n,
            spec.d,
            detector.method,
            null_model(spec),
            rng.child(0),
            target_fp=detector.target_fp,
            reps=detector.calib_reps,
            intervals=detector.intervals,
            binweight_alpha=bw_alpha,
        )

    rows: list[ReplicateRow] = []
    histogram: Counter[int] = Counter()
    missed_total = 0.0
    fa_total = 0.0
    type2_total = 0.0
    tpr_values: list[float] = []
    fpr_values: list[float] = []

    for rep in range(reps):
        matrix, truth = generate(spec, rng.child(1, rep, 0))
        model = fit_model(matrix, spec)
        interval_set = draw_intervals(spec.n, detector.intervals, rng.child(1, rep, 1))
        if detector.method == "subset":
            result = subset_wbs(matrix, model, penalties, interval_set, seed=rep)
            if detector.run_postprocess:
                result = postprocess(model, result)
        else:
            config = BaselineConfig(
                method=detector.method, threshold=threshold, binweight_alpha=bw_alpha
            )
            result = baseline_wbs(model, config, interval_set, seed=rep)
        metrics = evaluate(result, truth, spec.n, spec.d, surge=spec.surge)
        missed_total += metrics.avg_missed
        fa_total += metrics.avg_false_alarms
        type2_total += metrics.type2_rate
        if metrics.location_histogram:
            histogram.update(metrics.location_histogram)
        rep_tpr, rep_fpr = _affected_rates(result, truth, spec.n, spec.d)
        tpr_values.extend(rep_tpr)
        fpr_values.extend(rep_fpr)
        rows.append(
            ReplicateRow(
                seed=rep,
                missed=int(metrics.avg_missed),
                false_alarms=int(metrics.avg_false_alarms),
                tpr=metrics.affected_tpr,
                fpr=metrics.affected_fpr,
            )
        )

    return MetricsReport(
        avg_missed=missed_total / reps,
        avg_false_alarms=fa_total / reps,
        type2_rate=type2_total / reps,
        affected_tpr=float(np.mean(tpr_values)) if tpr_values else 0.0,
        affected_fpr=float(np.mean(fpr_values)) if fpr_values else 0.0,
        location_histogram=dict(histogram),
        n_reps=reps,
        surge_in_truth=spec.surge,
        replicates=tuple(rows),
    )


def replicate_table(report: MetricsReport) -> str:
    """Plain-text table: one row per replicate plus a summary row."""
    lines = ["seed\tmissed\tfalse_alarms\ttpr\tfpr"]
    for row in report.replicates:
        lines.append(
            f"{row.seed}\t{row.missed}\t{row.false_alarms}\t{row.tpr:.4f}\t{row.fpr:.4f}"
        )
    lines.append(
        "summary\t"
        f"{report.avg_missed:.4f}\t{report.avg_false_alarms:.4f}\t"
        f"{report.affected_tpr:.4f}\t{report.affected_fpr:.4f}"
    )
    if report.surge_in_truth:
        lines.append("# surge counted as two true changes")
    return "\n".join(lines)
