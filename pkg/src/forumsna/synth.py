"""Deterministic synthetic courses with a planted activity/grade coupling.

Per-student post counts are heavy tailed (Pareto propensities). Grades are
assigned by blending the normal scores of each student's activity rank with
Gaussian noise; the blend weight is tuned by bisection so that the realized
Spearman rho between post count and grade matches the requested coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .model import Course, Role, make_thread
from .stats import rank_average_ties, spearman_rho

BASE_TIME = 1_693_526_400  # 2023-09-01T00:00:00Z
TERM_SECONDS = 100 * 86_400


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class SynthParams:
    seed: int = 0
    n_students: int = 200
    n_staff: int = 3
    n_peer_tutors: int = 0
    n_threads: int = 400
    mean_posts_per_thread: float = 6.0
    activity_grade_coupling: float = 0.4
    inactive_fraction: float = 0.3
    staff_answer_share: float = 0.3

    def __post_init__(self):
        if self.n_students < 1:
            raise ValueError("n_students must be positive")
        if self.n_staff < 1:
            raise ValueError("n_staff must be positive")
        if not 0 <= self.n_peer_tutors <= self.n_students:
            raise ValueError("n_peer_tutors must be in [0, n_students]")
        if self.n_threads < 1:
            raise ValueError("n_threads must be positive")
        if not self.mean_posts_per_thread > 0:
            raise ValueError("mean_posts_per_thread must be positive")
        if not -1.0 <= self.activity_grade_coupling <= 1.0:
            raise ValueError("activity_grade_coupling must be in [-1, 1]")
        if not 0.0 <= self.inactive_fraction < 1.0:
            raise ValueError("inactive_fraction must be in [0, 1)")
        if not 0.0 <= self.staff_answer_share <= 1.0:
            raise ValueError("staff_answer_share must be in [0, 1]")

    @property
    def n_inactive(self) -> int:
        # round() guards against products like 0.7 * 10 = 7.000000000000001
        return math.ceil(round(self.inactive_fraction * self.n_students, 9))


def _ids(prefix: str, n: int) -> list[str]:
    width = max(3, len(str(n)))
    return [f"{prefix}{i:0{width}d}" for i in range(1, n + 1)]


def _blend_grades(activity: list[float], target: float, rng: np.random.Generator) -> list[float]:
    n = len(activity)
    nd = NormalDist()
    ranks = rank_average_ties(activity)
    z_activity = np.array([nd.inv_cdf((r - 0.5) / n) for r in ranks])
    noise = rng.standard_normal(n)
    base = np.sort(np.clip(rng.normal(80.0, 12.0, n), 0.0, 100.0))

    def latent(w: float) -> np.ndarray:
        return w * z_activity + math.sqrt(max(0.0, 1.0 - w * w)) * noise

    def rho(w: float) -> float:
        if n < 3 or len(set(activity)) < 2:
            return 0.0
        return spearman_rho(activity, latent(w).tolist())

    lo, hi = -1.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if rho(mid) < target:
            lo = mid
        else:
            hi = mid
    w = 0.5 * (lo + hi)

    order = np.argsort(latent(w), kind="stable")
    grades = np.empty(n)
    grades[order] = base
    return [round(float(g), 2) for g in grades]


def generate_course(params: SynthParams) -> Course:
    rng = np.random.default_rng(params.seed)
    students = _ids("s", params.n_students)
    staff = _ids("staff", params.n_staff)

    users: dict[str, Role] = {u: Role.STUDENT for u in students}
    users[staff[0]] = Role.INSTRUCTOR
    for u in staff[1:]:
        users[u] = Role.TA

    idx = rng.permutation(params.n_students)
    tutors = sorted(students[i] for i in idx[: params.n_peer_tutors])
    for u in tutors:
        users[u] = Role.PEER_TUTOR
    k = params.n_inactive
    pool = [students[i] for i in idx[params.n_peer_tutors:]]
    if k > len(pool):
        raise GenerationError(
            f"{k} inactive students requested but only {len(pool)} non-tutor students exist"
        )
    inactive = set(pool[:k])
    active = [u for u in students if u not in inactive]
    if not active:
        raise GenerationError("no active students available to start threads")

    total_posts = max(params.n_threads, round(params.n_threads * params.mean_posts_per_thread))
    replies_per_thread = rng.multinomial(
        total_posts - params.n_threads, [1.0 / params.n_threads] * params.n_threads
    )
    reply_is_staff = [
        rng.random(int(r)) < params.staff_answer_share for r in replies_per_thread
    ]
    n_student_slots = params.n_threads + sum(int((~s).sum()) for s in reply_is_staff)
    if n_student_slots < len(active):
        raise GenerationError(
            f"only {n_student_slots} student posts for {len(active)} active students; "
            "raise n_threads or mean_posts_per_thread"
        )

    propensity = rng.pareto(1.5, len(active)) + 1.0
    tutor_set = set(tutors)
    propensity *= np.array([4.0 if u in tutor_set else 1.0 for u in active])
    extra = rng.multinomial(n_student_slots - len(active), propensity / propensity.sum())
    counts = {u: 1 + int(c) for u, c in zip(active, extra)}
    tokens = [u for u in active for _ in range(counts[u])]
    tokens = [tokens[i] for i in rng.permutation(len(tokens))]

    staff_weights = np.array([2.0] + [1.0] * (len(staff) - 1))
    staff_weights /= staff_weights.sum()

    starters, student_replies = tokens[: params.n_threads], iter(tokens[params.n_threads:])
    thread_ids = _ids("t", params.n_threads)
    threads = []
    for tid, starter, staff_flags in zip(thread_ids, starters, reply_is_staff):
        ts = BASE_TIME + int(rng.integers(0, TERM_SECONDS))
        authors = [starter]
        for is_staff in staff_flags:
            authors.append(staff[int(rng.choice(len(staff), p=staff_weights))] if is_staff
                           else next(student_replies))
        posts = []
        for j, author in enumerate(authors):
            posts.append((f"{tid}-p{j:03d}", author, ts))
            ts += int(rng.integers(1, 7200))
        threads.append(make_thread(tid, posts))

    activity = [float(counts.get(u, 0)) for u in students]
    grades = _blend_grades(activity, params.activity_grade_coupling, rng)
    gradebook = dict(zip(students, grades))

    return Course(
        f"synth-{params.seed}",
        dict(sorted(users.items())),
        tuple(threads),
        dict(sorted(gradebook.items())),
    )
