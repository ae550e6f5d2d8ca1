"""Brute-force reference computations used to cross-check the fast paths.

Everything here is deliberately naive: exhaustive shortest-path enumeration
for betweenness, dense matrix power iteration for HITS, nested loops for
reply-event extraction. None of it shares code with the implementations it
checks.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import BuildOptions, CountMode, SocialGraph
from .metrics import HitsConfig, betweenness, degrees, hits
from .model import Course, Role


def enumerate_betweenness(graph: SocialGraph) -> dict[str, Fraction]:
    nodes = list(graph.nodes)
    succ: dict[str, list[str]] = {v: [] for v in nodes}
    for u, v in graph.edges:
        succ[u].append(v)

    def distances(s):
        dist = {s: 0}
        q = deque([s])
        while q:
            v = q.popleft()
            for w in succ[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    q.append(w)
        return dist

    bc = {v: Fraction(0) for v in nodes}
    for s in nodes:
        dist = distances(s)
        for t in nodes:
            if t == s or t not in dist:
                continue
            paths = []

            def walk(path):
                v = path[-1]
                if v == t:
                    paths.append(list(path))
                    return
                for w in succ[v]:
                    if dist.get(w) == dist[v] + 1 and dist[w] <= dist[t]:
                        path.append(w)
                        walk(path)
                        path.pop()

            walk([s])
            for w in nodes:
                if w in (s, t):
                    continue
                through = sum(1 for p in paths if w in p[1:-1])
                if through:
                    bc[w] += Fraction(through, len(paths))
    return bc


def dense_hits(
    graph: SocialGraph, use_weights: bool = True, tolerance: float = 1e-15, max_iterations: int = 100_000
) -> tuple[dict[str, float], dict[str, float]]:
    nodes = list(graph.nodes)
    index = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    W = np.zeros((n, n))
    for (u, v), w in graph.edges.items():
        W[index[u], index[v]] = w if use_weights else 1.0
    if not graph.edges:
        return dict.fromkeys(nodes, 0.0), dict.fromkeys(nodes, 0.0)
    h = np.full(n, 1.0 / np.sqrt(n))
    a = h.copy()
    for _ in range(max_iterations):
        a_new = W.T @ h
        a_new /= np.linalg.norm(a_new)
        h_new = W @ a_new
        h_new /= np.linalg.norm(h_new)
        change = max(np.linalg.norm(a_new - a), np.linalg.norm(h_new - h))
        a, h = a_new, h_new
        if change < tolerance:
            break
    return dict(zip(nodes, h.tolist())), dict(zip(nodes, a.tolist()))


def hits_residuals(graph: SocialGraph, hub: dict, auth: dict, use_weights: bool = True) -> tuple[float, float]:
    """(||a - normalize(W^T h)||, ||h - normalize(W a)||)."""
    nodes = list(graph.nodes)
    index = {v: i for i, v in enumerate(nodes)}
    W = np.zeros((len(nodes), len(nodes)))
    for (u, v), w in graph.edges.items():
        W[index[u], index[v]] = w if use_weights else 1.0
    h = np.array([hub[v] for v in nodes])
    a = np.array([auth[v] for v in nodes])
    ah = W.T @ h
    ha = W @ a
    return (
        float(np.linalg.norm(a - ah / np.linalg.norm(ah))),
        float(np.linalg.norm(h - ha / np.linalg.norm(ha))),
    )


def naive_degrees(graph: SocialGraph) -> dict[str, tuple[int, int]]:
    out = {}
    for v in graph.nodes:
        in_d = sum(w for (a, b), w in graph.edges.items() if b == v)
        out_d = sum(w for (a, b), w in graph.edges.items() if a == v)
        out[v] = (in_d, out_d)
    return out


def naive_build(course: Course, options: BuildOptions = BuildOptions()) -> tuple[dict, dict]:
    """Return (nodes, edges) computed by direct enumeration."""
    posted = set()
    for thread in course.threads:
        for post in thread.posts:
            posted.add(post.author)
    nodes = {}
    for user, role in course.users.items():
        if options.drop_unknown and role == Role.UNKNOWN:
            continue
        if not options.include_staff and role in (Role.TA, Role.INSTRUCTOR):
            continue
        if (
            options.restrict_to_active_students
            and role in (Role.STUDENT, Role.PEER_TUTOR)
            and user not in posted
        ):
            continue
        nodes[user] = role

    events = []
    for thread in course.threads:
        posts = thread.posts
        for i in range(len(posts)):
            replier = posts[i].author
            if options.count_mode == CountMode.PRIOR_POSTS:
                targets = [posts[j].author for j in range(i) if posts[j].author != replier]
            else:
                targets = []
                for j in range(i):
                    if posts[j].author != replier and posts[j].author not in targets:
                        targets.append(posts[j].author)
            for target in targets:
                events.append((replier, target))

    edges: dict[tuple[str, str], int] = {}
    for u, v in events:
        if u in nodes and v in nodes:
            edges[(u, v)] = edges.get((u, v), 0) + 1
    return nodes, edges


def random_graph(graph_seed: int, max_nodes: int, edge_probability: float = 0.3, max_weight: int = 5) -> SocialGraph:
    rng = random.Random(graph_seed)
    n = rng.randint(1, max_nodes)
    names = [f"n{i:02d}" for i in range(n)]
    edges = {}
    for u in names:
        for v in names:
            if u != v and rng.random() < edge_probability:
                edges[(u, v)] = rng.randint(1, max_weight)
    return SocialGraph.from_edges(edges, {v: Role.STUDENT for v in names})


@dataclass
class OracleFailure:
    graph_seed: int
    metric: str
    node: str
    got: float
    expected: float

    def __str__(self) -> str:
        return (
            f"FAIL graph_seed={self.graph_seed} metric={self.metric} node={self.node} "
            f"got={self.got!r} expected={self.expected!r}"
        )


def check_graph(graph_seed: int, graph: SocialGraph, config: HitsConfig = HitsConfig()) -> list[OracleFailure]:
    fails = []
    bc = betweenness(graph)
    for v, exact in enumerate_betweenness(graph).items():
        if abs(bc[v] - float(exact)) > 1e-9:
            fails.append(OracleFailure(graph_seed, "betweenness", v, bc[v], float(exact)))
    deg = degrees(graph)
    for v, expected in naive_degrees(graph).items():
        if deg[v] != expected:
            fails.append(OracleFailure(graph_seed, "degrees", v, deg[v], expected))
    res = hits(graph, config)
    hub_ref, auth_ref = dense_hits(graph, config.use_weights)
    for v in graph.nodes:
        if abs(res.help_providing[v] - hub_ref[v]) > 1e-8:
            fails.append(OracleFailure(graph_seed, "help_providing", v, res.help_providing[v], hub_ref[v]))
        if abs(res.help_receiving[v] - auth_ref[v]) > 1e-8:
            fails.append(OracleFailure(graph_seed, "help_receiving", v, res.help_receiving[v], auth_ref[v]))
    if graph.edges:
        ra, rh = hits_residuals(graph, res.help_providing, res.help_receiving, config.use_weights)
        bound = 10 * config.tolerance
        if ra >= bound:
            fails.append(OracleFailure(graph_seed, "hits_residual_authority", "*", ra, bound))
        if rh >= bound:
            fails.append(OracleFailure(graph_seed, "hits_residual_hub", "*", rh, bound))
    return fails


def run_oracle_suite(max_nodes: int, trials: int, seed: int, edge_probability: float = 0.3) -> list[OracleFailure]:
    failures = []
    for trial in range(trials):
        graph_seed = seed * 1_000_003 + trial
        graph = random_graph(graph_seed, max_nodes, edge_probability)
        failures.extend(check_graph(graph_seed, graph))
    return failures
