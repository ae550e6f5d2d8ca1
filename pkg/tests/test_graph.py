import io
import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import course_from_authors
from forumsna.graph import (
    BuildOptions,
    CountMode,
    active_partition,
    build_graph,
    extract_reply_events,
    to_dot,
    to_graphml,
)
from forumsna.model import Course, Role, make_thread
from forumsna.oracle import naive_build


def pairs(events):
    return [(e.source, e.target) for e in events]


def single_thread(authors):
    return course_from_authors([authors]).threads[0]


@pytest.mark.parametrize(
    "authors, expected",
    [
        (["v"], []),
        (["v", "u"], [("u", "v")]),
        (["v", "u", "v"], [("u", "v"), ("v", "u")]),
        (["a", "b", "c"], [("b", "a"), ("c", "a"), ("c", "b")]),
        (["a", "a", "a"], []),
        (["a", "b", "a", "b"], [("b", "a"), ("a", "b"), ("b", "a")]),
    ],
)
def test_extract_reply_events(authors, expected):
    assert pairs(extract_reply_events(single_thread(authors))) == expected


def test_prior_posts_mode_counts_each_earlier_post():
    th = single_thread(["a", "a", "b"])
    assert pairs(extract_reply_events(th)) == [("b", "a")]
    assert pairs(extract_reply_events(th, CountMode.PRIOR_POSTS)) == [("b", "a"), ("b", "a")]


def test_events_carry_replying_post():
    th = single_thread(["a", "b"])
    (ev,) = extract_reply_events(th)
    assert ev.thread_id == th.thread_id
    assert ev.post_id == th.posts[1].post_id


def test_empty_course_gives_isolated_nodes():
    c = Course("c", {"a": Role.STUDENT, "b": Role.TA, "x": Role.UNKNOWN}, (), {})
    g = build_graph(c)
    assert list(g.nodes) == ["a", "b"]
    assert g.edges == {}


def test_single_reply_edge():
    g = build_graph(course_from_authors([["v", "u"]]))
    assert set(g.nodes) == {"u", "v"}
    assert g.edges == {("u", "v"): 1}


def test_aggregation_over_threads():
    g = build_graph(course_from_authors([["v", "u"], ["v", "u"]]))
    assert g.edges == {("u", "v"): 2}


def test_unknown_users_dropped_or_kept():
    c = course_from_authors([["a", "anon", "b"]], roles={"anon": Role.UNKNOWN})
    assert "anon" not in build_graph(c).nodes
    kept = build_graph(c, BuildOptions(drop_unknown=False))
    assert kept.edges[("b", "anon")] == 1


def test_staff_filter_and_active_restriction():
    roles = {"prof": Role.INSTRUCTOR, "lurker": Role.STUDENT, "idle_ta": Role.TA}
    c = course_from_authors([["s1", "prof", "s2"]], roles=roles)
    g = build_graph(c, BuildOptions(restrict_to_active_students=True))
    assert set(g.nodes) == {"s1", "s2", "prof", "idle_ta"}
    g = build_graph(c, BuildOptions(include_staff=False))
    assert set(g.nodes) == {"s1", "s2", "lurker"}
    assert g.edges == {("s2", "s1"): 1}


def test_active_partition():
    roles = {"ta": Role.TA, "quiet": Role.STUDENT, "tutor": Role.PEER_TUTOR, "anon": Role.UNKNOWN}
    c = course_from_authors([["starter"], ["ta"] * 50, ["tutor", "anon"]], roles=roles)
    active, non_active = active_partition(c)
    assert active == {"starter", "tutor"}
    assert non_active == {"quiet"}


def test_nobody_posted():
    c = Course("c", {"a": Role.STUDENT, "b": Role.STUDENT}, (), {})
    assert active_partition(c) == (set(), {"a", "b"})


# random courses for properties

names = st.sampled_from(["a", "b", "c", "d", "e", "ta", "prof", "anon", "tutor"])
ROLES = {"ta": Role.TA, "prof": Role.INSTRUCTOR, "anon": Role.UNKNOWN, "tutor": Role.PEER_TUTOR,
         "quiet": Role.STUDENT}
options = st.builds(BuildOptions, st.booleans(), st.booleans(), st.booleans(), st.sampled_from(list(CountMode)))


@given(st.lists(st.lists(names, min_size=1, max_size=7), max_size=6), options)
@settings(max_examples=150, deadline=None)
def test_build_matches_naive_and_conserves_events(threads, opts):
    c = course_from_authors(threads, roles=ROLES)
    g = build_graph(c, opts)
    nodes, edges = naive_build(c, opts)
    assert dict(g.nodes) == nodes
    assert dict(g.edges) == edges
    assert all(u != v for u, v in g.edges)
    assert all(w >= 1 for w in g.edges.values())
    assert all(u in g.nodes and v in g.nodes for u, v in g.edges)
    events = [e for t in c.threads for e in extract_reply_events(t, opts.count_mode)
              if e.source in g.nodes and e.target in g.nodes]
    assert g.total_weight() == len(events)
    if opts.restrict_to_active_students:
        authors = {p.author for t in c.threads for p in t.posts}
        assert all(u in authors for u, r in g.nodes.items() if r.is_student)


@given(st.lists(st.lists(names, min_size=1, max_size=7), max_size=6), st.randoms())
@settings(max_examples=60, deadline=None)
def test_permutation_invariance(threads, rnd):
    c = course_from_authors(threads, roles=ROLES)
    shuffled_threads = []
    for t in c.threads:
        posts = [(p.post_id, p.author, p.timestamp) for p in t.posts]
        rnd.shuffle(posts)
        shuffled_threads.append(make_thread(t.thread_id, posts))
    rnd.shuffle(shuffled_threads)
    c2 = Course(c.course_id, c.users, tuple(shuffled_threads), c.gradebook)
    assert build_graph(c2) == build_graph(c)


def test_graphml_readable_by_networkx():
    c = course_from_authors([["a", "b", "a"], ["a", "b"], ["b", "prof"]], roles={"prof": Role.INSTRUCTOR})
    g = build_graph(c)
    parsed = nx.read_graphml(io.BytesIO(to_graphml(g).encode()))
    assert parsed.is_directed()
    assert {(u, v): d["weight"] for u, v, d in parsed.edges(data=True)} == dict(g.edges)
    assert parsed.nodes["prof"]["role"] == "instructor"


def test_graphml_escapes_ids():
    c = course_from_authors([['x<&"y', "z"]])
    parsed = nx.read_graphml(io.BytesIO(to_graphml(build_graph(c)).encode()))
    assert ("z", 'x<&"y') in parsed.edges


def test_dot_export():
    g = build_graph(course_from_authors([["v", "u"], ["v", "u"]]))
    assert to_dot(g) == (
        "digraph social {\n"
        '  "u" [role="student"];\n'
        '  "v" [role="student"];\n'
        '  "u" -> "v" [weight=2];\n'
        "}\n"
    )
