"""Render an :class:`AnalysisReport` as JSON, Markdown and per-table CSV files."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .analysis import AnalysisReport
from .metrics import format_real

METRIC_LABELS = {
    "in_degree": "In Degree",
    "out_degree": "Out Degree",
    "betweenness": "Betweenness Centrality",
    "help_providing": "Help Providing Score",
    "help_receiving": "Help Receiving Score",
}

TABLE_FILES = (
    "table1_course_stats.csv",
    "table2_group_comparison.csv",
    "table3_correlations.csv",
    "figure1_role_top_scores.csv",
)


def format_p(p: float) -> str:
    return f"{p:.2e}" if p < 1e-3 else f"{p:.4f}"


def _md_p(p: float, significant: bool) -> str:
    text = format_p(p)
    return f"**{text}**" if significant else text


def report_json(report: AnalysisReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def load_report_json(text: str) -> AnalysisReport:
    return AnalysisReport.from_dict(json.loads(text))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _opt(x) -> str:
    return "" if x is None else format_real(x)


def table1_csv(report: AnalysisReport) -> str:
    return _csv(
        ("course_id", "n_students", "average_grade", "participation_rate", "average_posts_per_student"),
        [(
            report.course_id,
            report.n_students,
            _opt(report.average_grade),
            _opt(report.participation_rate),
            _opt(report.average_posts_per_student),
        )],
    )


def table2_csv(report: AnalysisReport) -> str:
    header = (
        "course_id", "mean_active", "mean_non_active", "n_active", "n_non_active",
        "t_statistic", "degrees_of_freedom", "p_value",
    )
    gc = report.group_comparison
    if gc is None:
        return _csv(header, [])
    return _csv(header, [(
        report.course_id,
        format_real(gc.mean_active),
        format_real(gc.mean_non_active),
        gc.n_active,
        gc.n_non_active,
        format_real(gc.ttest.t_statistic),
        format_real(gc.ttest.degrees_of_freedom),
        format_real(gc.ttest.p_value),
    )])


def table3_csv(report: AnalysisReport) -> str:
    header = ("course_id", "metric", "rho", "p_value", "n", "method", "significant")
    rows = []
    for row in report.correlations or []:
        r = row.result
        if r is None:
            rows.append((report.course_id, row.metric_name, "", "", "", "undefined", "false"))
        else:
            rows.append((
                report.course_id, row.metric_name, format_real(r.rho), format_real(r.p_value),
                r.n, r.method, "true" if row.significant else "false",
            ))
    return _csv(header, rows)


def figure1_csv(report: AnalysisReport) -> str:
    rts = report.role_top_scores
    rows = [] if rts is None else [
        (e.role, e.user_id, format_real(e.normalized_score)) for e in rts.per_role
    ]
    return _csv(("role", "user_id", "normalized_score"), rows)


def report_tables(report: AnalysisReport) -> dict[str, str]:
    return dict(zip(TABLE_FILES, (
        table1_csv(report), table2_csv(report), table3_csv(report), figure1_csv(report),
    )))


def _unavailable(report: AnalysisReport, key: str) -> str:
    return f"_Unavailable: {report.errors.get(key, 'not computed')}_"


def report_markdown(report: AnalysisReport) -> str:
    cid = report.course_id
    out = [f"# Forum social network analysis: {cid}", ""]

    out += ["## Table 1: Course statistics", "", f"| Class | {cid} |", "|---|---|"]
    out.append(f"| Total Students | {report.n_students} |")
    out.append(
        "| Average Grade | "
        + ("n/a" if report.average_grade is None else f"{report.average_grade:.1f}")
        + " |"
    )
    out.append(
        "| Participation Rate | "
        + ("n/a" if report.participation_rate is None else f"{100 * report.participation_rate:.1f}%")
        + " |"
    )
    out.append(
        "| Average Forum Actions | "
        + ("n/a" if report.average_posts_per_student is None else f"{report.average_posts_per_student:.2f}")
        + " |"
    )
    out.append("")

    out += ["## Table 2: Average grades for active and non-active students", ""]
    gc = report.group_comparison
    if gc is None:
        out.append(_unavailable(report, "group_comparison"))
    else:
        p = gc.ttest.p_value
        out += [
            "| Class | active | non-active | p-value |",
            "|---|---|---|---|",
            f"| {cid} | {gc.mean_active:.2f} | {gc.mean_non_active:.2f} | {_md_p(p, p <= 0.05)} |",
            "",
            f"n active = {gc.n_active}, n non-active = {gc.n_non_active}, "
            f"Welch t = {gc.ttest.t_statistic:.4f}, df = {gc.ttest.degrees_of_freedom:.2f}",
        ]
    out.append("")

    out += ["## Table 3: Spearman correlation between grades and graph metrics", ""]
    if report.correlations is None:
        out.append(_unavailable(report, "correlations"))
    else:
        out += ["| Metric | correlation | p-value |", "|---|---|---|"]
        for row in report.correlations:
            label = METRIC_LABELS[row.metric_name]
            if row.result is None:
                out.append(f"| {label} | undefined | undefined |")
            else:
                out.append(
                    f"| {label} | {row.result.rho:.2f} | {_md_p(row.result.p_value, row.significant)} |"
                )
        out += ["", "Bold p-values are significant at p <= 0.05."]
    out.append("")

    out += ["## Figure 1: Top help-providing score per role", ""]
    rts = report.role_top_scores
    if rts is None:
        out.append(_unavailable(report, "role_top_scores"))
    else:
        out += ["| Role | User | Score (share of top) | Raw score |", "|---|---|---|---|"]
        for e in rts.per_role:
            out.append(f"| {e.role} | {e.user_id} | {e.normalized_score:.2f} | {e.raw_score:.3f} |")
    out.append("")

    if report.hits_convergence is not None and not report.hits_convergence.converged:
        out += [f"Warning: {report.errors.get('hits', 'HITS did not converge')}", ""]
    return "\n".join(out)


def write_report(report: AnalysisReport, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    tables = out_dir / "tables"
    tables.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in (("report.json", report_json(report)), ("report.md", report_markdown(report))):
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    for name, text in report_tables(report).items():
        path = tables / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written
