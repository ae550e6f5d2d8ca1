"""Course, thread, post and grade types, plus reading/writing the input files.

Three documents describe a course:

* threads (JSON): ``{"threads": [{"thread_id", "posts": [{"post_id", "author", "timestamp"}]}]}``
* roster (CSV): ``user_id,role``
* grades (CSV): ``user_id,grade``

Authors that do not appear in the roster, and posts with an empty/null author,
are kept as users with the ``Unknown`` role so nothing is silently dropped at
ingestion time. Filtering happens in the graph builder.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

logger = logging.getLogger(__name__)

ANONYMOUS_USER = "__anonymous__"
GRADE_MIN = 0.0
GRADE_MAX = 100.0


class Role(str, Enum):
    STUDENT = "student"
    PEER_TUTOR = "peer_tutor"
    TA = "ta"
    INSTRUCTOR = "instructor"
    UNKNOWN = "unknown"

    @property
    def is_student(self) -> bool:
        return self in (Role.STUDENT, Role.PEER_TUTOR)

    @property
    def is_staff(self) -> bool:
        return self in (Role.TA, Role.INSTRUCTOR)

    @property
    def label(self) -> str:
        return _ROLE_LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "Role":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown role {text!r}") from None


_ROLE_LABELS = {
    Role.STUDENT: "Student",
    Role.PEER_TUTOR: "PeerTutor",
    Role.TA: "TA",
    Role.INSTRUCTOR: "Instructor",
    Role.UNKNOWN: "Unknown",
}


class ForumDataError(ValueError):
    """Base class for problems with course input data."""


class ParseError(ForumDataError):
    """A document could not be read. ``locus`` names the file and line/record."""

    def __init__(self, message: str, locus: str):
        super().__init__(f"{locus}: {message}")
        self.locus = locus


class StructuralError(ForumDataError):
    """Records are individually well formed but inconsistent with each other."""


class CourseValidationError(ForumDataError):
    def __init__(self, issues: list["Issue"]):
        self.issues = issues
        super().__init__("; ".join(str(i) for i in issues))


@dataclass(frozen=True)
class Post:
    post_id: str
    thread_id: str
    author: str
    timestamp: int
    position: int


@dataclass(frozen=True)
class Thread:
    thread_id: str
    posts: tuple[Post, ...]

    @property
    def starter(self) -> Post:
        return self.posts[0]


@dataclass(frozen=True)
class Course:
    course_id: str
    users: Mapping[str, Role]
    threads: tuple[Thread, ...]
    gradebook: Mapping[str, float] = field(default_factory=dict)

    def students(self) -> list[str]:
        return sorted(u for u, r in self.users.items() if r.is_student)

    def post_count(self) -> int:
        return sum(len(t.posts) for t in self.threads)


@dataclass(frozen=True)
class Issue:
    invariant: str
    record: str

    def __str__(self) -> str:
        return f"{self.invariant} ({self.record})"


def _post_sort_key(post: Post) -> tuple[int, str]:
    return (post.timestamp, post.post_id)


def make_thread(thread_id: str, posts: list[tuple[str, str, int]]) -> Thread:
    """Build a thread from ``(post_id, author, timestamp)`` triples.

    Posts are ordered by (timestamp, post_id) and positions assigned from
    that order.
    """
    ordered = sorted(posts, key=lambda p: (p[2], p[0]))
    return Thread(
        thread_id,
        tuple(
            Post(pid, thread_id, author, ts, i)
            for i, (pid, author, ts) in enumerate(ordered)
        ),
    )


def validate_course(course: Course) -> list[Issue]:
    issues: list[Issue] = []
    seen_posts: set[str] = set()
    seen_threads: set[str] = set()
    for thread in course.threads:
        tid = thread.thread_id
        if tid in seen_threads:
            issues.append(Issue("duplicate thread id", f"thread {tid}"))
        seen_threads.add(tid)
        if not thread.posts:
            issues.append(Issue("empty thread", f"thread {tid}"))
            continue
        positions = [p.position for p in thread.posts]
        if positions != list(range(len(positions))):
            issues.append(Issue("non-contiguous positions", f"thread {tid}: {positions}"))
        keys = [_post_sort_key(p) for p in thread.posts]
        if keys != sorted(keys):
            issues.append(Issue("posts not in (timestamp, post_id) order", f"thread {tid}"))
        for post in thread.posts:
            if post.thread_id != tid:
                issues.append(
                    Issue("post thread id mismatch", f"post {post.post_id} in thread {tid}")
                )
            if post.post_id in seen_posts:
                issues.append(Issue("duplicate post id", f"post {post.post_id}"))
            seen_posts.add(post.post_id)
            if post.author not in course.users:
                issues.append(Issue("post author not in users", f"post {post.post_id}"))
    for user in course.users:
        if not user:
            issues.append(Issue("empty user id", "users"))
    for user, grade in course.gradebook.items():
        role = course.users.get(user)
        if role is None:
            issues.append(Issue("grade for unknown user", f"user {user}"))
        elif not role.is_student:
            issues.append(Issue("grade assigned to non-student", f"user {user} ({role.value})"))
        if not (isinstance(grade, (int, float)) and GRADE_MIN <= grade <= GRADE_MAX):
            issues.append(Issue("grade out of range", f"user {user}: {grade}"))
    return issues


def _decode(doc: bytes | str, name: str) -> str:
    if isinstance(doc, str):
        return doc
    try:
        return doc.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8 ({exc.reason})", f"{name}@byte {exc.start}") from None


def _read_csv(text: str, name: str, header: tuple[str, str]) -> list[tuple[int, list[str]]]:
    reader = csv.reader(io.StringIO(text, newline=""))
    rows = []
    try:
        first = next(reader, None)
        if first is None:
            raise ParseError(f"missing header {','.join(header)}", f"{name}:1")
        if tuple(c.strip().lower() for c in first) != header:
            raise ParseError(
                f"expected header {','.join(header)}, got {','.join(first)}", f"{name}:1"
            )
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", f"{name}:{reader.line_num}")
            rows.append((reader.line_num, [c.strip() for c in row]))
    except csv.Error as exc:
        raise ParseError(str(exc), f"{name}:{reader.line_num}") from None
    return rows


def parse_roster(doc: bytes | str) -> dict[str, Role]:
    users: dict[str, Role] = {}
    for line, (user, role_text) in _read_csv(_decode(doc, "roster"), "roster", ("user_id", "role")):
        locus = f"roster:{line}"
        if not user:
            raise ParseError("empty user_id", locus)
        try:
            role = Role.parse(role_text)
        except ValueError as exc:
            raise ParseError(str(exc), locus) from None
        if user in users:
            raise StructuralError(f"{locus}: duplicate user_id {user!r}")
        users[user] = role
    return users


def parse_grades(doc: bytes | str) -> dict[str, float]:
    grades: dict[str, float] = {}
    for line, (user, grade_text) in _read_csv(_decode(doc, "grades"), "grades", ("user_id", "grade")):
        locus = f"grades:{line}"
        if not user:
            raise ParseError("empty user_id", locus)
        try:
            grade = float(grade_text)
        except ValueError:
            raise ParseError(f"grade {grade_text!r} is not a decimal number", locus) from None
        if not math.isfinite(grade) or not GRADE_MIN <= grade <= GRADE_MAX:
            raise CourseValidationError([Issue("grade out of range", f"{locus}: {grade_text}")])
        if user in grades:
            raise StructuralError(f"{locus}: duplicate grade for {user!r}")
        grades[user] = grade
    return grades


def parse_threads(doc: bytes | str) -> list[Thread]:
    text = _decode(doc, "threads")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"threads:{exc.lineno}:{exc.colno}") from None
    if not isinstance(data, dict) or not isinstance(data.get("threads"), list):
        raise ParseError('top level must be an object with a "threads" list', "threads")

    threads = []
    seen_threads: set[str] = set()
    seen_posts: set[str] = set()
    for ti, raw in enumerate(data["threads"]):
        locus = f"threads[{ti}]"
        if not isinstance(raw, dict):
            raise ParseError("thread record must be an object", locus)
        tid = raw.get("thread_id")
        posts = raw.get("posts")
        if not isinstance(tid, str) or not tid:
            raise ParseError("thread_id must be a non-empty string", locus)
        if not isinstance(posts, list) or not posts:
            raise ParseError("posts must be a non-empty list", locus)
        if tid in seen_threads:
            raise StructuralError(f"{locus}: duplicate thread_id {tid!r}")
        seen_threads.add(tid)

        triples = []
        for pi, rp in enumerate(posts):
            plocus = f"{locus}.posts[{pi}]"
            if not isinstance(rp, dict):
                raise ParseError("post record must be an object", plocus)
            pid = rp.get("post_id")
            author = rp.get("author")
            ts = rp.get("timestamp")
            if not isinstance(pid, str) or not pid:
                raise ParseError("post_id must be a non-empty string", plocus)
            if author is None or author == "":
                author = ANONYMOUS_USER
            elif not isinstance(author, str):
                raise ParseError("author must be a string", plocus)
            if isinstance(ts, bool) or not isinstance(ts, int):
                raise ParseError("timestamp must be an integer", plocus)
            if "thread_id" in rp and rp["thread_id"] != tid:
                raise StructuralError(
                    f"{plocus}: post {pid!r} references thread {rp['thread_id']!r}"
                )
            if pid in seen_posts:
                raise StructuralError(f"{plocus}: duplicate post_id {pid!r}")
            seen_posts.add(pid)
            triples.append((pid, author, ts))
        threads.append(make_thread(tid, triples))
    return threads


def parse_course(
    threads_document: bytes | str,
    roster_document: bytes | str,
    grades_document: bytes | str,
    course_id: str = "course",
) -> Course:
    threads = parse_threads(threads_document)
    users = parse_roster(roster_document)
    grades = parse_grades(grades_document)

    added = 0
    for thread in threads:
        for post in thread.posts:
            if post.author not in users:
                users[post.author] = Role.UNKNOWN
                added += 1
    if added:
        logger.info("%d post authors missing from roster recorded as unknown users", added)
    for user in grades:
        if user not in users:
            raise StructuralError(f"grades: user {user!r} not in roster")

    course = Course(course_id, dict(sorted(users.items())), tuple(threads), dict(sorted(grades.items())))
    issues = validate_course(course)
    if issues:
        raise CourseValidationError(issues)
    return course


def serialize_threads(course: Course) -> str:
    doc = {
        "threads": [
            {
                "thread_id": t.thread_id,
                "posts": [
                    {"post_id": p.post_id, "author": p.author, "timestamp": p.timestamp}
                    for p in t.posts
                ],
            }
            for t in course.threads
        ]
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _write_csv(header: tuple[str, str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def serialize_roster(course: Course) -> str:
    return _write_csv(("user_id", "role"), ((u, r.value) for u, r in sorted(course.users.items())))


def serialize_grades(course: Course) -> str:
    return _write_csv(("user_id", "grade"), ((u, repr(g)) for u, g in sorted(course.gradebook.items())))


def serialize_course(course: Course) -> tuple[str, str, str]:
    """Return (threads, roster, grades) document texts that parse back to ``course``."""
    return serialize_threads(course), serialize_roster(course), serialize_grades(course)
