"""Per-course study: active vs non-active grades, metric/grade correlations,
and the top help-providing score for each role.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

from .graph import BuildOptions, SocialGraph, active_partition, build_graph
from .metrics import METRIC_NAMES, HitsConfig, MetricTable, compute_metric_table
from .model import Course, Role
from .stats import CorrelationResult, TTestResult, UndefinedCorrelation, spearman, welch_ttest

logger = logging.getLogger(__name__)

SIGNIFICANCE = 0.05

# Graph used by the correlation and role studies: non-active students and
# anonymous users removed, staff kept.
STUDY_OPTIONS = BuildOptions(drop_unknown=True, restrict_to_active_students=True, include_staff=True)


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class GroupComparison:
    mean_active: float
    mean_non_active: float
    ttest: TTestResult
    n_active: int
    n_non_active: int
    n_ungraded: int = 0


@dataclass(frozen=True)
class CorrelationRow:
    metric_name: str
    result: CorrelationResult | None
    significant: bool
    undefined_reason: str | None = None


@dataclass(frozen=True)
class RoleTopScore:
    role: str
    user_id: str
    normalized_score: float
    raw_score: float


@dataclass(frozen=True)
class RoleTopScores:
    per_role: list[RoleTopScore]
    top_raw_score: float


@dataclass(frozen=True)
class HitsConvergence:
    iterations: int
    converged: bool


@dataclass
class AnalysisReport:
    course_id: str
    n_students: int
    participation_rate: float | None
    average_grade: float | None
    average_posts_per_student: float | None
    group_comparison: GroupComparison | None
    correlations: list[CorrelationRow] | None
    role_top_scores: RoleTopScores | None
    hits_convergence: HitsConvergence | None
    errors: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisReport":
        gc = data.get("group_comparison")
        if gc is not None:
            gc = GroupComparison(**{**gc, "ttest": TTestResult(**gc["ttest"])})
        rows = data.get("correlations")
        if rows is not None:
            rows = [
                CorrelationRow(
                    **{**r, "result": CorrelationResult(**r["result"]) if r["result"] else None}
                )
                for r in rows
            ]
        rts = data.get("role_top_scores")
        if rts is not None:
            rts = RoleTopScores([RoleTopScore(**e) for e in rts["per_role"]], rts["top_raw_score"])
        hc = data.get("hits_convergence")
        return cls(
            course_id=data["course_id"],
            n_students=data["n_students"],
            participation_rate=data.get("participation_rate"),
            average_grade=data.get("average_grade"),
            average_posts_per_student=data.get("average_posts_per_student"),
            group_comparison=gc,
            correlations=rows,
            role_top_scores=rts,
            hits_convergence=HitsConvergence(**hc) if hc is not None else None,
            errors=dict(data.get("errors", {})),
        )


def run_group_comparison(course: Course) -> GroupComparison:
    active, non_active = active_partition(course)
    grades = course.gradebook
    a = [grades[u] for u in sorted(active) if u in grades]
    b = [grades[u] for u in sorted(non_active) if u in grades]
    ungraded = len(active) + len(non_active) - len(a) - len(b)
    if ungraded:
        logger.info("%d students without a grade excluded from group comparison", ungraded)
    if len(a) < 2 or len(b) < 2:
        raise AnalysisError(
            f"insufficient group size: {len(a)} active and {len(b)} non-active graded students"
        )
    tt = welch_ttest(a, b)
    return GroupComparison(tt.mean_a, tt.mean_b, tt, len(a), len(b), ungraded)


def study_graph(course: Course) -> SocialGraph:
    return build_graph(course, STUDY_OPTIONS)


def correlations_from_table(
    course: Course, table: MetricTable, seed: int = 0, alpha: float = SIGNIFICANCE
) -> list[CorrelationRow]:
    active, _ = active_partition(course)
    sample = [u for u in sorted(active) if u in course.gradebook and u in table.rows]
    if len(sample) < 3:
        raise AnalysisError(f"insufficient sample: {len(sample)} active students with grades")
    grades = [course.gradebook[u] for u in sample]
    rows = []
    for name in METRIC_NAMES:
        values = table.column(name, sample)
        try:
            res = spearman(values, grades, seed=seed)
        except UndefinedCorrelation as exc:
            rows.append(CorrelationRow(name, None, False, str(exc)))
            continue
        rows.append(CorrelationRow(name, res, res.p_value <= alpha))
    return rows


def run_correlation_study(
    course: Course, hits_config: HitsConfig = HitsConfig(), seed: int = 0
) -> list[CorrelationRow]:
    table = compute_metric_table(study_graph(course), hits_config)
    return correlations_from_table(course, table, seed)


def role_scores_from_table(graph: SocialGraph, table: MetricTable) -> RoleTopScores:
    if not graph.edges:
        raise AnalysisError("no interactions: graph has no edges")
    best: dict[Role, tuple[float, str]] = {}
    for user, role in graph.nodes.items():
        score = table.rows[user].help_providing
        # ties keep the lexicographically smallest user id (nodes iterate sorted)
        if role not in best or score > best[role][0]:
            best[role] = (score, user)
    top = max(score for score, _ in best.values())
    entries = [
        RoleTopScore(role.label, user, score / top, score)
        for role, (score, user) in sorted(best.items(), key=lambda kv: list(Role).index(kv[0]))
    ]
    return RoleTopScores(entries, top)


def run_role_report(course: Course, hits_config: HitsConfig = HitsConfig()) -> RoleTopScores:
    graph = study_graph(course)
    return role_scores_from_table(graph, compute_metric_table(graph, hits_config))


def run_full_analysis(
    course: Course, hits_config: HitsConfig = HitsConfig(), seed: int = 0
) -> AnalysisReport:
    """Run every study; a failing section is recorded in ``errors`` and left empty."""
    errors: dict[str, str] = {}
    students = course.students()
    active, _ = active_partition(course)
    n = len(students)
    student_set = set(students)
    posts_by_students = sum(1 for t in course.threads for p in t.posts if p.author in student_set)
    grades = list(course.gradebook.values())

    report = AnalysisReport(
        course_id=course.course_id,
        n_students=n,
        participation_rate=len(active) / n if n else None,
        average_grade=math.fsum(grades) / len(grades) if grades else None,
        average_posts_per_student=posts_by_students / n if n else None,
        group_comparison=None,
        correlations=None,
        role_top_scores=None,
        hits_convergence=None,
        errors=errors,
    )

    try:
        report.group_comparison = run_group_comparison(course)
    except ValueError as exc:
        errors["group_comparison"] = str(exc)

    graph = study_graph(course)
    table = compute_metric_table(graph, hits_config)
    report.hits_convergence = HitsConvergence(table.hits_iterations, table.hits_converged)
    if not table.hits_converged:
        errors["hits"] = f"HITS did not converge within {table.hits_iterations} iterations"

    try:
        report.correlations = correlations_from_table(course, table, seed)
    except ValueError as exc:
        errors["correlations"] = str(exc)

    try:
        report.role_top_scores = role_scores_from_table(graph, table)
    except ValueError as exc:
        errors["role_top_scores"] = str(exc)

    return report
