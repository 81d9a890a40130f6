"""Evaluation reports: per-method cross-validation results, tables, JSON files.

The JSON document written to disk is fully deterministic for a fixed seed
(timings are kept out of the file and shown on standard output only, so two
identical runs produce byte-identical report files).
"""

import json
from dataclasses import dataclass, field

from ._version import __version__
from .classify import CvResult
from .exceptions import MalformedFileError

__all__ = [
    "MethodResult",
    "EvaluationReport",
    "render_table",
    "report_document",
    "write_report",
    "read_report",
    "merge_documents",
]


@dataclass
class MethodResult:
    name: str
    cv: CvResult


@dataclass
class EvaluationReport:
    """One experiment run: every requested method exactly once, plus provenance."""

    config: dict
    seeds: dict
    methods: list
    timings: dict = field(default_factory=dict)
    version: str = __version__

    def method(self, name) -> MethodResult:
        for entry in self.methods:
            if entry.name == name:
                return entry
        raise KeyError(f"no method {name!r} in report")

    def mean_accuracy(self, name) -> float:
        return self.method(name).cv.mean_accuracy


def render_table(report: EvaluationReport, show_timings=True) -> str:
    """Human-readable aligned table: method, mean accuracy, per-fold detail."""
    width = max([len(m.name) for m in report.methods] + [len("method")])
    lines = [f"{'method'.ljust(width)}  {'mean':>6}  folds"]
    for entry in report.methods:
        folds = " ".join(f"{a:.4f}" for a in entry.cv.fold_accuracies)
        lines.append(f"{entry.name.ljust(width)}  {entry.cv.mean_accuracy:.4f}  {folds}")
    if show_timings and report.timings:
        lines.append("")
        for name, seconds in report.timings.items():
            lines.append(f"[timing] {name}: {seconds:.2f}s")
    return "\n".join(lines)


def report_document(report: EvaluationReport) -> dict:
    """Deterministic JSON-ready document (timings intentionally excluded)."""
    return {
        "format": "gcae-report-v1",
        "version": report.version,
        "config": report.config,
        "seeds": report.seeds,
        "methods": [
            {
                "name": m.name,
                "mean_accuracy": m.cv.mean_accuracy,
                "fold_accuracies": list(m.cv.fold_accuracies),
                "cv_seed": m.cv.seed,
            }
            for m in report.methods
        ],
    }


def write_report(path, report: EvaluationReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_document(report), fh, indent=1)
        fh.write("\n")


def read_report(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedFileError(f"{path}: not a valid report document") from exc
    if doc.get("format") not in ("gcae-report-v1", "gcae-merged-report-v1"):
        raise MalformedFileError(f"{path}: unrecognized report format")
    return doc


def merge_documents(docs) -> dict:
    """Bundle prior report documents into one merged document."""
    flattened = []
    for doc in docs:
        if doc.get("format") == "gcae-merged-report-v1":
            flattened.extend(doc["reports"])
        else:
            flattened.append(doc)
    return {
        "format": "gcae-merged-report-v1",
        "version": __version__,
        "reports": flattened,
    }
