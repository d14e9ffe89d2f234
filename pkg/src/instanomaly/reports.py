"""Deterministic JSON / CSV serialization of metric reports.

Both formats round every float to 12 significant digits through the same
helper before writing, so the JSON and CSV views of one report agree to
full printed precision.  None (the "not computable" marker) serializes as
JSON null and as "*" in CSV.  Reports carry no paths or timestamps: a
rerun on identical inputs is byte-identical.
"""

from __future__ import annotations

import io
import json
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from .matching import MatchLabel
from .metrics import MetricReport

CSV_COLUMNS = ("method", "detector", "delta", "fpr95tpr", "auroc", "aupr",
               "map", "positives", "negatives", "excluded", "missed_positives")


def round12(x: Optional[float]) -> Optional[float]:
    """Round to 12 significant digits; passes None through."""
    if x is None:
        return None
    return float(f"{float(x):.12g}")


def _cell(x) -> str:
    if x is None:
        return "*"
    if isinstance(x, float):
        return f"{round12(x):.12g}"
    return str(x)


def report_to_dict(report: MetricReport, method: str, detector: str) -> dict:
    d = {
        "method": method,
        "detector": detector,
        "fpr95tpr": round12(report.fpr95tpr),
        "auroc": round12(report.auroc),
        "aupr": round12(report.aupr),
        "counts": dict(report.counts),
    }
    if report.map_by_delta:
        d["map"] = {str(k): round12(v) for k, v in report.map_by_delta.items()}
    return d


def json_text(payload: Mapping) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def csv_text(report: MetricReport, method: str, detector: str) -> str:
    """One CSV row per size threshold (a single blank-delta row for pixel
    reports, which have no size axis)."""
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    c = report.counts
    base = [method, detector]
    tail = [_cell(c.get(k, 0)) for k in
            ("positives", "negatives", "excluded", "missed_positives")]
    shared = [_cell(report.fpr95tpr), _cell(report.auroc), _cell(report.aupr)]
    if report.map_by_delta:
        for delta, ap in report.map_by_delta.items():
            row = base + [str(delta)] + shared + [_cell(ap)] + tail
            buf.write(",".join(row) + "\n")
    else:
        row = base + [""] + shared + [""] + tail
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def histogram_text(hist: Dict[MatchLabel, np.ndarray]) -> str:
    """Histogram CSV over matched records: in-distribution vs OOD counts
    per uniform score bin."""
    count_in = hist[MatchLabel.IN_DIST]
    count_ood = hist[MatchLabel.OOD]
    bins = len(count_in)
    edges = np.linspace(0.0, 1.0, bins + 1)
    buf = io.StringIO()
    buf.write("bin_lo,bin_hi,count_in,count_ood\n")
    for i in range(bins):
        buf.write(f"{_cell(float(edges[i]))},{_cell(float(edges[i + 1]))},"
                  f"{int(count_in[i])},{int(count_ood[i])}\n")
    return buf.getvalue()


def not_computable(report: MetricReport) -> bool:
    """True when any metric in the report carries the None marker."""
    if report.fpr95tpr is None or report.auroc is None or report.aupr is None:
        return True
    return any(v is None for v in report.map_by_delta.values())
