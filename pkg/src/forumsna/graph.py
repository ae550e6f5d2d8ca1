"""Reply-event extraction and the aggregated, directed social graph.

A user posting in a thread is taken to reply to everyone who posted before
them in that thread. Each such (replier, earlier participant) pair is a
:class:`ReplyEvent`; events are then grouped into one weighted edge per
ordered pair of users.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping
from xml.sax.saxutils import escape, quoteattr

from .model import Course, Role, Thread


class CountMode(str, Enum):
    DISTINCT_PARTICIPANTS = "distinct_participants"
    PRIOR_POSTS = "prior_posts"


@dataclass(frozen=True)
class ReplyEvent:
    source: str
    target: str
    thread_id: str
    post_id: str


@dataclass(frozen=True)
class BuildOptions:
    drop_unknown: bool = True
    restrict_to_active_students: bool = False
    include_staff: bool = True
    count_mode: CountMode = CountMode.DISTINCT_PARTICIPANTS


@dataclass(frozen=True)
class SocialGraph:
    """Directed graph with integer edge weights.

    ``nodes`` maps user id to role; ``edges`` maps ``(source, target)`` to the
    number of reply events aggregated into that edge. Both are kept in sorted
    key order so iteration is deterministic.
    """

    nodes: Mapping[str, Role]
    edges: Mapping[tuple[str, str], int]

    @classmethod
    def from_edges(
        cls, edges: Mapping[tuple[str, str], int], nodes: Mapping[str, Role] | None = None
    ) -> "SocialGraph":
        all_nodes = dict(nodes or {})
        for u, v in edges:
            all_nodes.setdefault(u, Role.STUDENT)
            all_nodes.setdefault(v, Role.STUDENT)
        for (u, v), w in edges.items():
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if not isinstance(w, int) or w < 1:
                raise ValueError(f"edge {u!r}->{v!r} has non-positive weight {w!r}")
        return cls(dict(sorted(all_nodes.items())), dict(sorted(edges.items())))

    def node_ids(self) -> list[str]:
        return list(self.nodes)

    def successors(self) -> dict[str, list[tuple[str, int]]]:
        adj: dict[str, list[tuple[str, int]]] = {v: [] for v in self.nodes}
        for (u, v), w in self.edges.items():
            adj[u].append((v, w))
        return adj

    def total_weight(self) -> int:
        return sum(self.edges.values())


def extract_reply_events(
    thread: Thread, count_mode: CountMode = CountMode.DISTINCT_PARTICIPANTS
) -> list[ReplyEvent]:
    """Reply events for one thread, ordered by replying post then target id.

    In ``distinct_participants`` mode a post yields one event per distinct
    earlier author. ``prior_posts`` mode yields one event per earlier post
    (so repeated earlier authors produce repeated events). Self-replies are
    never emitted.
    """
    events: list[ReplyEvent] = []
    prior: Counter[str] = Counter()
    for post in thread.posts:
        targets = sorted(a for a in prior if a != post.author)
        for target in targets:
            repeat = prior[target] if count_mode is CountMode.PRIOR_POSTS else 1
            events.extend(
                [ReplyEvent(post.author, target, thread.thread_id, post.post_id)] * repeat
            )
        prior[post.author] += 1
    return events


def active_partition(course: Course) -> tuple[set[str], set[str]]:
    """Split students (incl. peer tutors) into (active, non-active) by authorship."""
    authors = {p.author for t in course.threads for p in t.posts}
    students = {u for u, r in course.users.items() if r.is_student}
    active = students & authors
    return active, students - active


def _surviving_nodes(course: Course, options: BuildOptions) -> dict[str, Role]:
    active = active_partition(course)[0] if options.restrict_to_active_students else None
    kept = {}
    for user, role in course.users.items():
        if role is Role.UNKNOWN and options.drop_unknown:
            continue
        if role.is_staff and not options.include_staff:
            continue
        if role.is_student and active is not None and user not in active:
            continue
        kept[user] = role
    return kept


def aggregate(events: Iterable[ReplyEvent], keep: Mapping[str, Role]) -> dict[tuple[str, str], int]:
    weights: Counter[tuple[str, str]] = Counter()
    for ev in events:
        if ev.source in keep and ev.target in keep:
            weights[(ev.source, ev.target)] += 1
    return dict(weights)


def build_graph(course: Course, options: BuildOptions = BuildOptions()) -> SocialGraph:
    nodes = _surviving_nodes(course, options)
    weights: Counter[tuple[str, str]] = Counter()
    for thread in course.threads:
        weights.update(aggregate(extract_reply_events(thread, options.count_mode), nodes))
    return SocialGraph(dict(sorted(nodes.items())), dict(sorted(weights.items())))


def to_graphml(graph: SocialGraph) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="role" for="node" attr.name="role" attr.type="string"/>',
        '  <key id="weight" for="edge" attr.name="weight" attr.type="int"/>',
        '  <graph id="G" edgedefault="directed">',
    ]
    for node, role in graph.nodes.items():
        lines.append(f"    <node id={quoteattr(node)}>")
        lines.append(f'      <data key="role">{escape(role.value)}</data>')
        lines.append("    </node>")
    for (u, v), w in graph.edges.items():
        lines.append(f"    <edge source={quoteattr(u)} target={quoteattr(v)}>")
        lines.append(f'      <data key="weight">{w}</data>')
        lines.append("    </edge>")
    lines += ["  </graph>", "</graphml>", ""]
    return "\n".join(lines)


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph: SocialGraph) -> str:
    lines = ["digraph social {"]
    for node, role in graph.nodes.items():
        lines.append(f"  {_dot_id(node)} [role={_dot_id(role.value)}];")
    for (u, v), w in graph.edges.items():
        lines.append(f"  {_dot_id(u)} -> {_dot_id(v)} [weight={w}];")
    lines += ["}", ""]
    return "\n".join(lines)
