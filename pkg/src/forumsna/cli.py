"""Command-line driver.

    forumsna ingest   --threads t.json --roster r.csv --grades g.csv [--out DIR]
    forumsna graph    ... [--format graphml|dot] [--out FILE]
    forumsna metrics  ... [--out FILE]
    forumsna analyze  ... --out DIR
    forumsna synth    --seed 42 --students 200 --coupling 0.4 --out DIR
    forumsna oracle   --max-nodes 10 --trials 200 --seed 7

``--course DIR`` is shorthand for DIR/threads.json, DIR/roster.csv and
DIR/grades.csv. ``--config FILE`` reads ``key = value`` lines whose keys are
the long flag names (``students = 200``); explicit flags win. Log level comes
from ``FORUMSNA_LOG_LEVEL`` (default INFO, written to stderr).

Exit status: 0 success, 1 bad input or usage, 2 internal error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import run_full_analysis
from .graph import BuildOptions, CountMode, build_graph, to_dot, to_graphml
from .metrics import HitsConfig, compute_metric_table, metric_table_csv
from .model import ForumDataError, parse_course, serialize_course, validate_course
from .oracle import run_oracle_suite
from .report import write_report
from .synth import GenerationError, SynthParams, generate_course

logger = logging.getLogger("forumsna")

LOG_ENV = "FORUMSNA_LOG_LEVEL"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_inputs(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input files")
    g.add_argument("--course", type=Path, help="directory holding threads.json, roster.csv, grades.csv")
    g.add_argument("--threads", type=Path)
    g.add_argument("--roster", type=Path)
    g.add_argument("--grades", type=Path)
    g.add_argument("--course-id", help="label used in reports (default: course directory name)")


def _add_build(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("graph construction")
    g.add_argument("--keep-unknown", action="store_true", help="keep anonymous/unknown users")
    g.add_argument("--active-only", action="store_true", help="drop students who never posted")
    g.add_argument("--no-staff", action="store_true", help="drop TA and instructor nodes")
    g.add_argument(
        "--count-mode",
        choices=[m.value for m in CountMode],
        default=CountMode.DISTINCT_PARTICIPANTS.value,
    )


def _add_hits(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("HITS")
    g.add_argument("--tolerance", type=float, default=1e-12)
    g.add_argument("--max-iterations", type=int, default=1000)
    g.add_argument("--unweighted-hits", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="forumsna", description="Forum reply-graph social network analysis")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", type=Path, help="key = value file mirroring the long flags")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and normalize input files")
    _add_inputs(p)
    p.add_argument("--out", type=Path, help="write normalized files to this directory")

    p = sub.add_parser("graph", help="build the social graph and export it")
    _add_inputs(p)
    _add_build(p)
    p.add_argument("--format", choices=["graphml", "dot"], default="graphml")
    p.add_argument("--out", type=Path, help="output file (default stdout)")

    p = sub.add_parser("metrics", help="per-node metric table as CSV")
    _add_inputs(p)
    _add_build(p)
    _add_hits(p)
    p.add_argument("--out", type=Path, help="output file (default stdout)")

    p = sub.add_parser("analyze", help="full analysis report")
    _add_inputs(p)
    _add_hits(p)
    p.add_argument("--seed", type=int, default=0, help="seed for permutation p-values")
    p.add_argument("--out", type=Path, required=True)

    d = SynthParams()
    p = sub.add_parser("synth", help="generate a synthetic course")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--students", type=int, default=d.n_students)
    p.add_argument("--staff", type=int, default=d.n_staff)
    p.add_argument("--peer-tutors", type=int, default=d.n_peer_tutors)
    p.add_argument("--n-threads", type=int, default=d.n_threads)
    p.add_argument("--mean-posts", type=float, default=d.mean_posts_per_thread)
    p.add_argument("--coupling", type=float, default=d.activity_grade_coupling)
    p.add_argument("--inactive-fraction", type=float, default=d.inactive_fraction)
    p.add_argument("--staff-share", type=float, default=d.staff_answer_share)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("oracle", help="cross-check metrics against brute-force oracles")
    p.add_argument("--max-nodes", type=int, default=10)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--edge-probability", type=float, default=0.3)
    return parser


def read_config(path: Path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value.strip('"').strip("'")
    return values


def _apply_config(parser: argparse.ArgumentParser, command: str, config: dict[str, str]) -> None:
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    subparser = sub_action.choices[command]
    known = {a.dest: a for a in subparser._actions}
    for key, value in config.items():
        action = known.get(key)
        if action is None:
            raise UsageError(f"config key {key!r} is not an option of {command!r}")
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key!r} expects a boolean, got {value!r}")
            action.default = value.lower() in ("true", "1", "yes")
        else:
            # argparse applies ``type`` to string defaults
            action.default = value
            action.required = False


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    pre.add_argument("command", nargs="?")
    known, _ = pre.parse_known_args(argv)
    if known.config is not None and known.command:
        _apply_config(parser, known.command, read_config(known.config))
    return parser.parse_args(argv)


def _input_paths(args) -> tuple[Path, Path, Path]:
    base = args.course
    paths = []
    for name, default in (("threads", "threads.json"), ("roster", "roster.csv"), ("grades", "grades.csv")):
        given = getattr(args, name)
        if given is None:
            if base is None:
                raise UsageError(f"--{name} (or --course) is required")
            given = base / default
        paths.append(given)
    return tuple(paths)


def load_course(args):
    threads, roster, grades = _input_paths(args)
    course_id = args.course_id or (args.course.name if args.course else "course")
    return parse_course(threads.read_bytes(), roster.read_bytes(), grades.read_bytes(), course_id=course_id)


def _build_options(args) -> BuildOptions:
    return BuildOptions(
        drop_unknown=not args.keep_unknown,
        restrict_to_active_students=args.active_only,
        include_staff=not args.no_staff,
        count_mode=CountMode(args.count_mode),
    )


def _hits_config(args) -> HitsConfig:
    return HitsConfig(args.tolerance, args.max_iterations, not args.unweighted_hits)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def cmd_ingest(args) -> int:
    course = load_course(args)
    issues = validate_course(course)
    for issue in issues:
        print(f"issue: {issue}", file=sys.stderr)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        for name, text in zip(("threads.json", "roster.csv", "grades.csv"), serialize_course(course)):
            (args.out / name).write_text(text, encoding="utf-8")
    print(
        f"{course.course_id}: {len(course.users)} users, {len(course.threads)} threads, "
        f"{course.post_count()} posts, {len(course.gradebook)} grades, {len(issues)} issues"
    )
    return 1 if issues else 0


def cmd_graph(args) -> int:
    graph = build_graph(load_course(args), _build_options(args))
    _emit(to_graphml(graph) if args.format == "graphml" else to_dot(graph), args.out)
    return 0


def cmd_metrics(args) -> int:
    graph = build_graph(load_course(args), _build_options(args))
    table = compute_metric_table(graph, _hits_config(args))
    if not table.hits_converged:
        logger.warning("HITS did not converge within %d iterations", table.hits_iterations)
    _emit(metric_table_csv(table), args.out)
    return 0


def cmd_analyze(args) -> int:
    course = load_course(args)
    report = run_full_analysis(course, _hits_config(args), seed=args.seed)
    for section, message in sorted(report.errors.items()):
        logger.warning("%s: %s", section, message)
    for path in write_report(report, args.out):
        print(path.relative_to(args.out).as_posix())
    return 0


def cmd_synth(args) -> int:
    params = SynthParams(
        seed=args.seed,
        n_students=args.students,
        n_staff=args.staff,
        n_peer_tutors=args.peer_tutors,
        n_threads=args.n_threads,
        mean_posts_per_thread=args.mean_posts,
        activity_grade_coupling=args.coupling,
        inactive_fraction=args.inactive_fraction,
        staff_answer_share=args.staff_share,
    )
    course = generate_course(params)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, text in zip(("threads.json", "roster.csv", "grades.csv"), serialize_course(course)):
        (args.out / name).write_text(text, encoding="utf-8")
    print(
        f"{course.course_id}: {len(course.users)} users, {len(course.threads)} threads, "
        f"{course.post_count()} posts"
    )
    return 0


def cmd_oracle(args) -> int:
    failures = run_oracle_suite(args.max_nodes, args.trials, args.seed, args.edge_probability)
    for failure in failures:
        print(failure)
    if failures:
        print(f"{len(failures)} checks failed")
        return 2
    print(f"all checks passed ({args.trials} graphs, max {args.max_nodes} nodes, seed {args.seed})")
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "graph": cmd_graph,
    "metrics": cmd_metrics,
    "analyze": cmd_analyze,
    "synth": cmd_synth,
    "oracle": cmd_oracle,
}


def _configure_logging() -> None:
    level = os.environ.get(LOG_ENV, "INFO").upper()
    root = logging.getLogger("forumsna")
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        root.addHandler(handler)
    root.setLevel(getattr(logging, level, logging.INFO))


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _configure_logging()
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"forumsna: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        return int(exc.code or 0)
    effective = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())}
    logger.info("effective configuration: %s", effective)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ForumDataError, GenerationError, OSError) as exc:
        print(f"forumsna: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # parameter validation in dataclasses (SynthParams, HitsConfig)
        print(f"forumsna: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        logger.exception("internal error: %s", exc)
        return 2


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
