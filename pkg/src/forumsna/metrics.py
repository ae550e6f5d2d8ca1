"""Node metrics on a :class:`SocialGraph`.

* in/out degree: weighted counts of replies received/given
* betweenness: Brandes' algorithm on the unweighted directed graph, unnormalized
* HITS hub ("help providing") and authority ("help receiving") scores
"""

from __future__ import annotations

import csv
import io
import logging
import math
from collections import deque
from dataclasses import dataclass, field

from .graph import SocialGraph

logger = logging.getLogger(__name__)

METRIC_NAMES = ("in_degree", "out_degree", "betweenness", "help_providing", "help_receiving")


@dataclass(frozen=True)
class HitsConfig:
    tolerance: float = 1e-12
    max_iterations: int = 1000
    use_weights: bool = True

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class HitsResult:
    help_providing: dict[str, float]
    help_receiving: dict[str, float]
    iterations: int
    converged: bool = True

    @property
    def warning(self) -> str | None:
        if self.converged:
            return None
        return f"HITS did not converge within {self.iterations} iterations"


@dataclass(frozen=True)
class MetricRow:
    in_degree: int
    out_degree: int
    betweenness: float
    help_providing: float
    help_receiving: float

    def get(self, name: str) -> float:
        return getattr(self, name)


@dataclass(frozen=True)
class MetricTable:
    rows: dict[str, MetricRow]
    hits_iterations: int = 0
    hits_converged: bool = True
    roles: dict[str, str] = field(default_factory=dict)

    def column(self, name: str, users) -> list[float]:
        return [self.rows[u].get(name) for u in users]


def degrees(graph: SocialGraph) -> dict[str, tuple[int, int]]:
    ins = dict.fromkeys(graph.nodes, 0)
    outs = dict.fromkeys(graph.nodes, 0)
    for (u, v), w in graph.edges.items():
        outs[u] += w
        ins[v] += w
    return {v: (ins[v], outs[v]) for v in graph.nodes}


def distinct_partner_degrees(graph: SocialGraph) -> dict[str, tuple[int, int]]:
    """Diagnostic: number of distinct in/out neighbours, ignoring weights."""
    ins = dict.fromkeys(graph.nodes, 0)
    outs = dict.fromkeys(graph.nodes, 0)
    for u, v in graph.edges:
        outs[u] += 1
        ins[v] += 1
    return {v: (ins[v], outs[v]) for v in graph.nodes}


def betweenness(graph: SocialGraph) -> dict[str, float]:
    nodes = graph.node_ids()
    adj = {v: [w for w, _ in nbrs] for v, nbrs in graph.successors().items()}
    bc = dict.fromkeys(nodes, 0.0)
    for s in nodes:
        stack = []
        preds: dict[str, list[str]] = {v: [] for v in nodes}
        sigma = dict.fromkeys(nodes, 0)
        sigma[s] = 1
        dist = dict.fromkeys(nodes, -1)
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = dict.fromkeys(nodes, 0.0)
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    return bc


def _normalize(vec: dict[str, float]) -> dict[str, float]:
    norm = math.sqrt(math.fsum(x * x for x in vec.values()))
    if norm == 0.0:
        return vec
    return {k: x / norm for k, x in vec.items()}


def _distance(a: dict[str, float], b: dict[str, float]) -> float:
    return math.sqrt(math.fsum((a[k] - b[k]) ** 2 for k in a))


def hits(graph: SocialGraph, config: HitsConfig = HitsConfig()) -> HitsResult:
    """HITS power iteration: authority <- W^T hub, hub <- W authority, L2-normalized.

    Starts from uniform vectors and stops once neither vector moves by more
    than ``config.tolerance`` (L2) in one iteration. A graph without edges
    gets all-zero scores and zero iterations.
    """
    nodes = graph.node_ids()
    if not graph.edges:
        zeros = dict.fromkeys(nodes, 0.0)
        return HitsResult(zeros, dict(zeros), 0, True)

    edges = [(u, v, float(w) if config.use_weights else 1.0) for (u, v), w in graph.edges.items()]
    start = 1.0 / math.sqrt(len(nodes))
    hub = dict.fromkeys(nodes, start)
    auth = dict.fromkeys(nodes, start)
    converged = False
    iterations = 0
    while iterations < config.max_iterations:
        iterations += 1
        new_auth = dict.fromkeys(nodes, 0.0)
        for u, v, w in edges:
            new_auth[v] += w * hub[u]
        new_auth = _normalize(new_auth)
        new_hub = dict.fromkeys(nodes, 0.0)
        for u, v, w in edges:
            new_hub[u] += w * new_auth[v]
        new_hub = _normalize(new_hub)
        change = max(_distance(new_auth, auth), _distance(new_hub, hub))
        hub, auth = new_hub, new_auth
        if change < config.tolerance:
            converged = True
            break
    result = HitsResult(hub, auth, iterations, converged)
    if not converged:
        logger.warning(result.warning)
    return result


def compute_metric_table(graph: SocialGraph, config: HitsConfig = HitsConfig()) -> MetricTable:
    deg = degrees(graph)
    bc = betweenness(graph)
    h = hits(graph, config)
    rows = {
        v: MetricRow(deg[v][0], deg[v][1], bc[v], h.help_providing[v], h.help_receiving[v])
        for v in graph.nodes
    }
    roles = {v: r.value for v, r in graph.nodes.items()}
    return MetricTable(rows, h.iterations, h.converged, roles)


def format_real(x: float) -> str:
    """Six significant digits; negative zero printed as 0."""
    text = f"{x:.6g}"
    return "0" if text == "-0" else text


def metric_table_csv(table: MetricTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("user_id", "role") + METRIC_NAMES)
    for user, row in table.rows.items():
        writer.writerow(
            (
                user,
                table.roles.get(user, ""),
                row.in_degree,
                row.out_degree,
                format_real(row.betweenness),
                format_real(row.help_providing),
                format_real(row.help_receiving),
            )
        )
    return buf.getvalue()
