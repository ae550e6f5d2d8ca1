"""Social network analysis of course discussion forums.

Builds directed reply graphs from forum threads, computes degree,
betweenness and HITS scores per user, and relates them to final grades.
"""

__version__ = "0.1.0"

from .analysis import (
    AnalysisReport,
    run_correlation_study,
    run_full_analysis,
    run_group_comparison,
    run_role_report,
)
from .graph import BuildOptions, CountMode, ReplyEvent, SocialGraph, active_partition, build_graph, extract_reply_events
from .metrics import HitsConfig, MetricTable, betweenness, compute_metric_table, degrees, hits
from .model import Course, Post, Role, Thread, parse_course, validate_course
from .stats import rank_average_ties, spearman, t_tail_two_sided, welch_ttest
from .synth import SynthParams, generate_course
