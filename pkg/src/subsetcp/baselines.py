"""CUSUM aggregation baselines: mean, max, and thresholded-sum statistics.

These Gaussian-only competitors aggregate the per-variate CUSUM row at each
split and compare against a calibrated threshold.  They report a location
only; there is no affected-set estimation and no post-processing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import KIND_DENSE, Detection, InputDataError, SegmentationResult
from .costs import GAUSSIAN, CostModel
from .wbs import IntervalSet, segmentation_driver

METHOD_MEAN = "mean"
METHOD_MAX = "max"
METHOD_BINWEIGHT = "binweight"
BASELINE_METHODS = (METHOD_MEAN, METHOD_MAX, METHOD_BINWEIGHT)


def default_binweight_alpha(n: int) -> float:
    """Per-variate inclusion threshold sqrt(2 ln n); sqrt(2 ln d) is the
    common alternative for wide matrices."""
    return math.sqrt(2.0 * math.log(n))


@dataclass(frozen=True)
class BaselineConfig:
    """Aggregation method, detection threshold, and the binweight cut-off."""

    method: str
    threshold: float
    binweight_alpha: float | None = None

    def __post_init__(self) -> None:
        if self.method not in BASELINE_METHODS:
            raise InputDataError(
                f"unknown baseline {self.method!r}; choose from {BASELINE_METHODS}"
            )
        if self.method == METHOD_BINWEIGHT and self.binweight_alpha is None:
            raise InputDataError("binweight needs binweight_alpha")


def _require_gaussian(model: CostModel) -> None:
    if model.kind != GAUSSIAN:
        raise InputDataError("CUSUM baselines are defined for the Gaussian model only")


def cusum(model: CostModel, i: int, l: int, u: int, t: int) -> float:
    """Absolute CUSUM of variate ``i`` at split ``t`` within (l, u).

    Equals sqrt(left*right/total) * |mean difference| / sigma, computed
    interval-locally; its square is the Gaussian D statistic.
    """
    _require_gaussian(model)
    if not l <= t < u:
        raise ValueError(f"split {t} outside {l}..{u - 1}")
    k = i - 1
    left = t - l + 1
    right = u - t
    sum_left = model.cum_y[k, t] - model.cum_y[k, l - 1]
    sum_right = model.cum_y[k, u] - model.cum_y[k, t]
    diff = sum_right / right - sum_left / left
    return float(
        math.sqrt(left * right / (left + right)) * abs(diff) / model.sigma[k]
    )


def cusum_matrix(model: CostModel, l: int, u: int) -> np.ndarray:
    """CUSUM rows for all variates and every split of (l, u); shape (d, u-l)."""
    _require_gaussian(model)
    if not (1 <= l < u <= model.n):
        raise ValueError(f"interval ({l}, {u}) not inside 1..{model.n}")
    length = u - l + 1
    len_left = np.arange(1, u - l + 1, dtype=float)
    len_right = length - len_left
    sum_full = model.cum_y[:, u] - model.cum_y[:, l - 1]
    sum_left = model.cum_y[:, l:u] - model.cum_y[:, l - 1 : l]
    sum_right = sum_full[:, None] - sum_left
    diff = sum_right / len_right - sum_left / len_left
    scale = np.sqrt(len_left * len_right / length)
    return scale * np.abs(diff) / model.sigma[:, None]


def aggregate_cusum(method: str, w: np.ndarray, binweight_alpha: float | None = None) -> np.ndarray:
    """Collapse a (d, T) CUSUM block across variates, before thresholding."""
    if method == METHOD_MEAN:
        return w.mean(axis=0)
    if method == METHOD_MAX:
        return w.max(axis=0)
    if method == METHOD_BINWEIGHT:
        if binweight_alpha is None:
            raise InputDataError("binweight needs binweight_alpha")
        return np.where(w > binweight_alpha, w, 0.0).sum(axis=0)
    raise InputDataError(f"unknown baseline {method!r}; choose from {BASELINE_METHODS}")


def baseline_statistic(config: BaselineConfig, w_row: np.ndarray) -> float:
    """Aggregated statistic minus the threshold, for one split's CUSUM row."""
    w = np.asarray(w_row, dtype=float)[:, None]
    return float(aggregate_cusum(config.method, w, config.binweight_alpha)[0] - config.threshold)


def scan_interval_baseline(
    model: CostModel, config: BaselineConfig, l: int, u: int
) -> Detection | None:
    """Best baseline candidate on (l, u); smallest t wins ties."""
    if u - l <= 1:
        raise ValueError(f"interval ({l}, {u}) has no interior split")
    w = cusum_matrix(model, l, u)
    s = aggregate_cusum(config.method, w, config.binweight_alpha) - config.threshold
    best = int(np.argmax(s))
    if s[best] <= 0.0:
        return None
    return Detection(
        tau=l + best,
        kind=KIND_DENSE,
        affected=frozenset(range(1, model.d + 1)),
        statistic=float(s[best]),
        interval=(l, u),
    )


def baseline_wbs(
    model: CostModel,
    config: BaselineConfig,
    intervals: IntervalSet,
    seed: int | None = None,
) -> SegmentationResult:
    """Wild binary segmentation driven by a baseline statistic.

    Same recursion as the subset detector; every detection is reported with
    all variates affected since these statistics do not localize variates.
    """
    from .penalties import PenaltyConfig

    if intervals.n != model.n:
        raise InputDataError(
            f"interval set drawn for n={intervals.n}, model has n={model.n}"
        )
    detections = segmentation_driver(
        model.n, intervals, lambda l, u: scan_interval_baseline(model, config, l, u)
    )
    placeholder = PenaltyConfig(
        alpha=0.0, beta=config.threshold, K=config.threshold, source=f"baseline:{config.method}"
    )
    return SegmentationResult(
        detections=tuple(detections),
        penalties=placeholder,
        model=model.kind,
        n=model.n,
        d=model.d,
        seed=seed,
        n_intervals=intervals.m,
    )
