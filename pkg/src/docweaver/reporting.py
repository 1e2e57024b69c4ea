"""Aggregation of per-component evaluation reports into one summary.

Means are unweighted over the components actually evaluated on each axis;
incomplete or unscored reports are excluded from that axis. Truthfulness
additionally gets a pooled corpus ratio (sum of verified over sum of
extracted) alongside the per-component mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .catalog import ComponentCatalog
from .completeness import CompletenessReport, SectionKind
from .judging import HelpfulnessReport
from .truthfulness import TruthfulnessReport

AXES = ("completeness", "helpfulness", "truthfulness")
KINDS = ("function", "method", "class")
_ROW_ORDER = ("overall",) + KINDS


@dataclass
class EvaluationSummary:
    means: dict[str, dict[str, float | None]]  # axis -> row -> mean
    counts: dict[str, dict[str, int]]  # axis -> row -> components evaluated
    pooled_verified: int = 0
    pooled_extracted: int = 0
    pooled_existence_ratio: float | None = None
    warnings: list[str] = field(default_factory=list)


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def aggregate(
    catalog: ComponentCatalog,
    completeness: list[CompletenessReport] | None = None,
    helpfulness: list[HelpfulnessReport] | None = None,
    truthfulness: list[TruthfulnessReport] | None = None,
) -> EvaluationSummary:
    kind_of = {c.qualified_name: c.kind for c in catalog.components}

    def scored(reports, value_of) -> list[tuple[str, float]]:
        out = []
        for report in reports or []:
            value = value_of(report)
            if value is None:
                continue
            kind = kind_of.get(report.component_name)
            if kind is None:
                continue  # stale report for a component no longer present
            out.append((kind, value))
        return out

    per_axis = {
        "completeness": scored(completeness, lambda r: r.score),
        "helpfulness": scored(
            helpfulness, lambda r: None if r.incomplete else r.overall
        ),
        "truthfulness": scored(
            truthfulness, lambda r: None if r.incomplete else r.existence_ratio
        ),
    }

    means: dict[str, dict[str, float | None]] = {}
    counts: dict[str, dict[str, int]] = {}
    for axis, pairs in per_axis.items():
        means[axis] = {"overall": _mean([v for _k, v in pairs])}
        counts[axis] = {"overall": len(pairs)}
        for kind in KINDS:
            values = [v for k, v in pairs if k == kind]
            means[axis][kind] = _mean(values)
            counts[axis][kind] = len(values)

    pooled_verified = sum(
        len(r.verified) for r in truthfulness or [] if not r.incomplete
    )
    pooled_extracted = sum(
        len(r.extracted) for r in truthfulness or [] if not r.incomplete
    )
    pooled_ratio = (
        pooled_verified / pooled_extracted if pooled_extracted else None
    )

    warnings = []
    for report in (helpfulness or []) + (truthfulness or []):
        for message in report.warnings:
            warnings.append(f"{report.component_name}: {message}")

    return EvaluationSummary(
        means=means,
        counts=counts,
        pooled_verified=pooled_verified,
        pooled_extracted=pooled_extracted,
        pooled_existence_ratio=pooled_ratio,
        warnings=warnings,
    )


def render_table(summary: EvaluationSummary) -> str:
    """Plain-text table: rows Overall/Function/Method/Class, one column
    per axis. Unevaluated cells render as a dash."""

    def cell(axis: str, row: str) -> str:
        value = summary.means[axis][row]
        if value is None:
            return "-"
        if axis == "helpfulness":
            return f"{value:.2f}"
        return f"{value:.3f}"

    headers = ["", "Completeness", "Helpfulness", "Truthfulness", "N"]
    rows = []
    for row in _ROW_ORDER:
        n = max(summary.counts[axis][row] for axis in AXES)
        rows.append(
            [
                row.capitalize(),
                cell("completeness", row),
                cell("helpfulness", row),
                cell("truthfulness", row),
                str(n),
            ]
        )
    widths = [
        max(len(headers[i]), *(len(r[i]) for r in rows)) for i in range(len(headers))
    ]
    lines = [
        "  ".join(headers[i].ljust(widths[i]) for i in range(len(headers))).rstrip()
    ]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append(
            "  ".join(row[i].ljust(widths[i]) for i in range(len(headers))).rstrip()
        )
    if summary.pooled_extracted:
        lines.append("")
        lines.append(
            f"pooled existence ratio: {summary.pooled_verified}/"
            f"{summary.pooled_extracted} = {summary.pooled_existence_ratio:.3f}"
        )
    return "\n".join(lines)


# -- JSON shapes for the report file -------------------------------------------


def completeness_to_dict(report: CompletenessReport) -> dict:
    return {
        "component": report.component_name,
        "required": sorted(k.value for k in report.required),
        "present": sorted(k.value for k in report.present),
        "score": report.score,
    }


def helpfulness_to_dict(report: HelpfulnessReport) -> dict:
    return {
        "component": report.component_name,
        "facet_scores": dict(report.facet_scores),
        "reasonings": dict(report.reasonings),
        "overall": report.overall,
        "incomplete": report.incomplete,
        "warnings": list(report.warnings),
    }


def truthfulness_to_dict(report: TruthfulnessReport) -> dict:
    return {
        "component": report.component_name,
        "extracted": list(report.extracted),
        "verified": list(report.verified),
        "existence_ratio": report.existence_ratio,
        "incomplete": report.incomplete,
        "warnings": list(report.warnings),
    }


def summary_to_dict(summary: EvaluationSummary) -> dict:
    return {
        "means": summary.means,
        "counts": summary.counts,
        "pooled_verified": summary.pooled_verified,
        "pooled_extracted": summary.pooled_extracted,
        "pooled_existence_ratio": summary.pooled_existence_ratio,
        "warnings": list(summary.warnings),
    }


def report_payload(
    completeness: list[CompletenessReport] | None = None,
    helpfulness: list[HelpfulnessReport] | None = None,
    truthfulness: list[TruthfulnessReport] | None = None,
    summary: EvaluationSummary | None = None,
) -> dict:
    payload: dict = {"components": {}}
    for report in completeness or []:
        payload["components"].setdefault(report.component_name, {})[
            "completeness"
        ] = completeness_to_dict(report)
    for report in helpfulness or []:
        payload["components"].setdefault(report.component_name, {})[
            "helpfulness"
        ] = helpfulness_to_dict(report)
    for report in truthfulness or []:
        payload["components"].setdefault(report.component_name, {})[
            "truthfulness"
        ] = truthfulness_to_dict(report)
    if summary is not None:
        payload["summary"] = summary_to_dict(summary)
        payload["table"] = render_table(summary)
    return payload


__all__ = [
    "AXES",
    "EvaluationSummary",
    "aggregate",
    "render_table",
    "completeness_to_dict",
    "helpfulness_to_dict",
    "truthfulness_to_dict",
    "summary_to_dict",
    "report_payload",
    "SectionKind",
]
