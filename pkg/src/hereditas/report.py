"""Plot-ready tables from campaign reports.

TSV values are printed with 4 decimals (the tables' convention); the JSON
report keeps full precision.
"""

from __future__ import annotations

from .simulate import AGGREGATED_METRICS, CampaignReport

_STATS = ("mean", "median", "se")

_CLASS_METRICS = tuple(
    f"{base}_{kind}" for base in ("sensitivity", "specificity")
    for kind in ("main", "inter", "quad")
)


def _fmt(v) -> str:
    return "" if v is None else f"{v:.4f}"


def campaign_tsv(report: CampaignReport, include_classes: bool = True) -> str:
    """Cells as columns; metric-by-stat rows."""
    names = [c.name for c in report.cells]
    lines = ["\t".join(["metric", "stat"] + names)]
    metric_names = AGGREGATED_METRICS + (_CLASS_METRICS if include_classes else ())
    for metric in metric_names:
        for stat in _STATS:
            row = [metric, stat]
            for cell in report.cells:
                agg = cell.aggregates.get(metric)
                row.append(_fmt(None if agg is None else getattr(agg, stat)))
            lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def multi_report_tsv(docs: list[dict]) -> str:
    """Rebuild the table from serialized reports.

    With several reports the columns become setting-by-cell pairs, the
    settings-as-columns layout of the experiment tables.
    """
    columns = []
    for doc in docs:
        setting = doc["config"]["name"]
        for cell in doc["cells"]:
            name = f"{cell['method']}/{cell['scheme']}"
            label = f"{setting}:{name}" if len(docs) > 1 else name
            columns.append((label, cell["aggregates"]))
    lines = ["\t".join(["metric", "stat"] + [label for label, _ in columns])]
    metric_names = list(AGGREGATED_METRICS) + list(_CLASS_METRICS)
    for metric in metric_names:
        for stat in _STATS:
            row = [metric, stat]
            for _, aggs in columns:
                agg = aggs.get(metric)
                row.append(_fmt(None if agg is None else agg[stat]))
            lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def snr_summary(report: CampaignReport) -> str:
    s = report.snr
    printed = report.config.printed_snr
    parts = [f"snr[{s.method}] = {s.value:.6g}"]
    if s.se is not None:
        parts.append(f"(mc se {s.se:.3g})")
    if printed is not None:
        parts.append(f"tabulated {printed:g}")
    if report.snr_flagged:
        parts.append("FLAG: analytic value disagrees with the tabulated one by > 0.01")
    return " ".join(parts)
