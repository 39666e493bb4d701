"""Render evaluation reports as aligned text tables and CSV.

Two table shapes: an overall metrics table (precision / recall / F1, each
with its bracketed 95% CI when bootstrap results are present) and a
NON-MATH vs MATH split. A per-type false-positive table is also available.
"""

from __future__ import annotations

import csv
import io

from .evaluation import EvalReport, MetricSet
from .segmentation import MATH, NON_MATH


def _fmt_metric(value: float, ci=None) -> str:
    text = f"{value:.3f}"
    if ci is not None:
        text += f" [{ci.lower:.3f}, {ci.upper:.3f}]"
    return text


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    def fmt_row(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    lines = [fmt_row(headers), fmt_row(["-" * w for w in widths])]
    lines.extend(fmt_row(r) for r in rows)
    return "\n".join(lines)


def render_metrics_table(reports: list[tuple[str, EvalReport]]) -> str:
    """Overall precision/recall/F1 per engine, CIs bracketed when available."""
    rows = []
    for name, report in reports:
        cis = report.cis or {}
        m = report.overall
        rows.append(
            [
                name,
                _fmt_metric(m.precision, cis.get("precision")),
                _fmt_metric(m.recall, cis.get("recall")),
                _fmt_metric(m.f1, cis.get("f1")),
            ]
        )
    return _table(["Model", "Precision", "Recall", "F1"], rows)


def render_segment_table(reports: list[tuple[str, EvalReport]]) -> str:
    """NON-MATH vs MATH precision/recall/F1 per engine."""
    rows = []
    for name, report in reports:
        if not report.per_segment:
            continue
        nm = report.per_segment.get(NON_MATH, MetricSet())
        ma = report.per_segment.get(MATH, MetricSet())
        rows.append(
            [
                name,
                f"{nm.precision:.3f}", f"{nm.recall:.3f}", f"{nm.f1:.3f}",
                f"{ma.precision:.3f}", f"{ma.recall:.3f}", f"{ma.f1:.3f}",
            ]
        )
    headers = [
        "Model",
        "NON-MATH Prec", "NON-MATH Rec", "NON-MATH F1",
        "MATH Prec", "MATH Rec", "MATH F1",
    ]
    return _table(headers, rows)


def render_type_table(report: EvalReport) -> str:
    """Per-type gold totals, false positives, and precision, worst FP first."""
    rows = []
    for code, m in sorted(report.per_type.items(), key=lambda kv: (-kv[1].fp, kv[0])):
        total_gold = m.tp + m.fn
        prec = f"{m.precision:.3f}" if (m.tp + m.fp) else "-"
        rows.append([code, str(total_gold), str(m.fp), prec])
    return _table(["PII Type", "Total", "FP", "Prec"], rows)


def strata_csv(report: EvalReport) -> str:
    """All strata (overall, per type, per segment) as one flat CSV."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["stratum", "key", "tp", "fp", "fn", "precision", "recall", "f1"])

    def emit(stratum: str, key: str, m: MetricSet):
        writer.writerow(
            [stratum, key, m.tp, m.fp, m.fn,
             f"{m.precision:.6f}", f"{m.recall:.6f}", f"{m.f1:.6f}"]
        )

    emit("overall", "all", report.overall)
    for code, m in sorted(report.per_type.items()):
        emit("type", code, m)
    if report.per_segment:
        for key, m in sorted(report.per_segment.items()):
            emit("segment", key, m)
    return buf.getvalue()
