"""File formats: input CSV, the JSON analysis report, and a flat pairs CSV.

Input CSV: header ``time,<name1>,...,<named>``; one row per time point with
a label in the first column and one numeric value per variate.  Outputs are
written atomically (temp file in the target directory, then rename).
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import Detection, InputDataError, SegmentationResult, TimeSeriesMatrix
from .penalties import PenaltyConfig


def read_csv(path: str | os.PathLike) -> TimeSeriesMatrix:
    """Load a matrix from CSV, reporting the exact cell on parse failures."""
    path = Path(path)
    try:
        handle = path.open(newline="")
    except OSError as exc:
        raise InputDataError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise InputDataError(f"{path}: file is empty") from None
        if len(header) < 2:
            raise InputDataError(f"{path}: header needs a time column and at least one variate")
        names = [h.strip() for h in header[1:]]
        if len(set(names)) != len(names):
            dupes = sorted({x for x in names if names.count(x) > 1})
            raise InputDataError(f"{path}: duplicate variate names {dupes}")
        labels: list[str] = []
        columns: list[list[float]] = [[] for _ in names]
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise InputDataError(
                    f"{path}: row {row_num} has {len(row)} fields, expected {len(header)}"
                )
            labels.append(row[0].strip())
            for col, cell in enumerate(row[1:]):
                try:
                    columns[col].append(float(cell))
                except ValueError:
                    raise InputDataError(
                        f"{path}: row {row_num}, column {names[col]!r}: "
                        f"cannot parse {cell!r} as a number"
                    ) from None
    if len(labels) < 2:
        raise InputDataError(f"{path}: need at least 2 data rows, got {len(labels)}")
    return TimeSeriesMatrix(
        values=np.array(columns, dtype=float),
        variate_names=tuple(names),
        time_labels=tuple(labels),
    )


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- serialization of core types ------------------------------------------


def matrix_to_dict(matrix: TimeSeriesMatrix) -> dict:
    return {
        "values": matrix.values.tolist(),
        "variate_names": list(matrix.variate_names),
        "time_labels": list(matrix.time_labels) if matrix.time_labels else None,
    }


def matrix_from_dict(data: dict) -> TimeSeriesMatrix:
    return TimeSeriesMatrix(
        values=np.array(data["values"], dtype=float),
        variate_names=tuple(data["variate_names"]),
        time_labels=tuple(data["time_labels"]) if data.get("time_labels") else None,
    )


def penalties_to_dict(penalties: PenaltyConfig) -> dict:
    return asdict(penalties)


def penalties_from_dict(data: dict) -> PenaltyConfig:
    return PenaltyConfig(**data)


def detection_to_dict(det: Detection) -> dict:
    return {
        "tau": det.tau,
        "kind": det.kind,
        "affected": sorted(det.affected),
        "statistic": det.statistic,
        "interval": list(det.interval),
    }


def detection_from_dict(data: dict) -> Detection:
    return Detection(
        tau=int(data["tau"]),
        kind=data["kind"],
        affected=frozenset(int(i) for i in data["affected"]),
        statistic=float(data["statistic"]),
        interval=(int(data["interval"][0]), int(data["interval"][1])),
    )


def result_to_dict(result: SegmentationResult) -> dict:
    return {
        "detections": [detection_to_dict(det) for det in result.detections],
        "penalties": penalties_to_dict(result.penalties),
        "model": result.model,
        "n": result.n,
        "d": result.d,
        "seed": result.seed,
        "n_intervals": result.n_intervals,
    }


def result_from_dict(data: dict) -> SegmentationResult:
    return SegmentationResult(
        detections=tuple(detection_from_dict(x) for x in data["detections"]),
        penalties=penalties_from_dict(data["penalties"]),
        model=data["model"],
        n=int(data["n"]),
        d=int(data["d"]),
        seed=data["seed"],
        n_intervals=int(data["n_intervals"]),
    )


# --- the analysis report ----------------------------------------------------


@dataclass(frozen=True)
class DetectionRecord:
    """File-facing view of one detection: names instead of indices."""

    tau: int
    time_label: str | None
    kind: str
    affected: tuple[str, ...]
    statistic: float


@dataclass(frozen=True)
class AnalysisReport:
    n: int
    d: int
    model: str
    penalties: PenaltyConfig
    seed: int
    intervals: int
    detections: tuple[DetectionRecord, ...]
    mean_residual_correlation: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "model": self.model,
            "penalties": {
                "alpha": self.penalties.alpha,
                "beta": self.penalties.beta,
                "K": self.penalties.K,
                "source": self.penalties.source,
            },
            "seed": self.seed,
            "intervals": self.intervals,
            "detections": [
                {
                    "tau": rec.tau,
                    "time_label": rec.time_label,
                    "kind": rec.kind,
                    "affected": list(rec.affected),
                    "statistic": rec.statistic,
                }
                for rec in self.detections
            ],
            "diagnostics": {"mean_residual_correlation": self.mean_residual_correlation},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisReport":
        pen = data["penalties"]
        return cls(
            n=int(data["n"]),
            d=int(data["d"]),
            model=data["model"],
            penalties=PenaltyConfig(
                alpha=float(pen["alpha"]),
                beta=float(pen["beta"]),
                K=float(pen["K"]),
                source=pen["source"],
            ),
            seed=int(data["seed"]),
            intervals=int(data["intervals"]),
            detections=tuple(
                DetectionRecord(
                    tau=int(rec["tau"]),
                    time_label=rec["time_label"],
                    kind=rec["kind"],
                    affected=tuple(rec["affected"]),
                    statistic=float(rec["statistic"]),
                )
                for rec in data["detections"]
            ),
            mean_residual_correlation=float(
                data["diagnostics"]["mean_residual_correlation"]
            ),
        )


def build_report(
    matrix: TimeSeriesMatrix,
    result: SegmentationResult,
    model_name: str,
    seed: int,
    mean_residual_correlation: float,
) -> AnalysisReport:
    records = []
    for det in result.detections:
        label = matrix.time_labels[det.tau - 1] if matrix.time_labels else None
        records.append(
            DetectionRecord(
                tau=det.tau,
                time_label=label,
                kind=det.kind,
                affected=tuple(matrix.variate_names[i - 1] for i in sorted(det.affected)),
                statistic=det.statistic,
            )
        )
    return AnalysisReport(
        n=matrix.n,
        d=matrix.d,
        model=model_name,
        penalties=result.penalties,
        seed=seed,
        intervals=result.n_intervals,
        detections=tuple(records),
        mean_residual_correlation=mean_residual_correlation,
    )


def write_report(report: AnalysisReport, path: str | os.PathLike) -> None:
    atomic_write_text(path, json.dumps(report.to_dict(), indent=2) + "\n")


def parse_report(path: str | os.PathLike) -> AnalysisReport:
    with open(path) as handle:
        return AnalysisReport.from_dict(json.load(handle))


def write_pairs_csv(
    result: SegmentationResult, matrix: TimeSeriesMatrix, path: str | os.PathLike
) -> None:
    """Flat (tau, variate) rows, one per changepoint-variate assignment."""
    lines = ["tau,variate"]
    for det in result.detections:
        for i in sorted(det.affected):
            lines.append(f"{det.tau},{matrix.variate_names[i - 1]}")
    atomic_write_text(path, "\n".join(lines) + "\n")
