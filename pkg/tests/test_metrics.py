import logging
import math
import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forumsna.graph import SocialGraph
from forumsna.metrics import (
    HitsConfig,
    betweenness,
    compute_metric_table,
    degrees,
    distinct_partner_degrees,
    format_real,
    hits,
    metric_table_csv,
)
from forumsna.model import Role
from forumsna.oracle import dense_hits, enumerate_betweenness, hits_residuals, naive_degrees, random_graph

R2 = 1 / math.sqrt(2)


def G(edges, nodes=()):
    return SocialGraph.from_edges(edges, {v: Role.STUDENT for v in nodes})


def test_degrees_examples():
    assert degrees(G({})) == {}
    assert degrees(G({("u", "v"): 3})) == {"u": (0, 3), "v": (3, 0)}
    g = G({("a", "b"): 1, ("c", "b"): 2, ("b", "a"): 1})
    # weighted: c's single edge carries weight 2
    assert degrees(g) == {"a": (1, 1), "b": (3, 1), "c": (0, 2)} == naive_degrees(g)


def test_distinct_partner_degrees():
    g = G({("a", "b"): 4, ("c", "b"): 2})
    assert distinct_partner_degrees(g) == {"a": (0, 1), "b": (2, 0), "c": (0, 1)}


@pytest.mark.parametrize(
    "edges, expected",
    [
        ({("a", "b"): 1, ("b", "c"): 1}, {"a": 0, "b": 1, "c": 0}),
        ({("a", "x"): 1, ("b", "x"): 1, ("c", "x"): 1}, {"a": 0, "b": 0, "c": 0, "x": 0}),
        # each node is interior to 3 of the 12 ordered pairs' unique shortest paths
        ({("a", "b"): 1, ("b", "c"): 1, ("c", "d"): 1, ("d", "a"): 1}, {v: 3 for v in "abcd"}),
        # two equal-length routes a->{b,c}->d split the credit
        ({("a", "b"): 1, ("a", "c"): 1, ("b", "d"): 1, ("c", "d"): 1}, {"a": 0, "b": 0.5, "c": 0.5, "d": 0}),
    ],
)
def test_betweenness_examples(edges, expected):
    g = G(edges)
    assert betweenness(g) == pytest.approx(expected, abs=1e-12)
    assert {v: float(x) for v, x in enumerate_betweenness(g).items()} == pytest.approx(expected, abs=1e-12)


def test_betweenness_ignores_weights():
    light = G({("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 1})
    heavy = G({("a", "b"): 9, ("b", "c"): 9, ("a", "c"): 9})
    assert betweenness(light) == betweenness(heavy) == {"a": 0, "b": 0, "c": 0}


def test_enumeration_oracle_is_exact_rational():
    g = G({("a", "b"): 1, ("a", "c"): 1, ("a", "d"): 1, ("b", "e"): 1, ("c", "e"): 1, ("d", "e"): 1})
    bc = enumerate_betweenness(g)
    assert bc["b"] == Fraction(1, 3)


@pytest.mark.parametrize("seed", range(40))
def test_betweenness_against_networkx(seed):
    g = random_graph(seed, 15, 0.25)
    nxg = nx.DiGraph()
    nxg.add_nodes_from(g.nodes)
    nxg.add_edges_from(g.edges)
    ref = nx.betweenness_centrality(nxg, normalized=False)
    assert betweenness(g) == pytest.approx(ref, abs=1e-9)


def test_hits_zero_edges():
    res = hits(G({}, nodes=["a", "b"]))
    assert res.help_providing == {"a": 0.0, "b": 0.0}
    assert res.help_receiving == {"a": 0.0, "b": 0.0}
    assert res.iterations == 0 and res.converged


def test_hits_in_star():
    res = hits(G({("a", "b"): 1, ("c", "b"): 1}))
    assert res.help_receiving == pytest.approx({"a": 0, "b": 1, "c": 0}, abs=1e-12)
    assert res.help_providing == pytest.approx({"a": R2, "b": 0, "c": R2}, abs=1e-12)
    assert res.converged and res.iterations <= 2


def test_hits_weighted():
    res = hits(G({("a", "b"): 2, ("c", "b"): 1}))
    assert res.help_providing["a"] == pytest.approx(2 / math.sqrt(5), abs=1e-12)
    assert res.help_providing["c"] == pytest.approx(1 / math.sqrt(5), abs=1e-12)
    assert res.help_receiving["b"] == pytest.approx(1.0, abs=1e-12)
    unweighted = hits(G({("a", "b"): 2, ("c", "b"): 1}), HitsConfig(use_weights=False))
    assert unweighted.help_providing["a"] == pytest.approx(R2, abs=1e-12)


def test_hits_config_validation():
    with pytest.raises(ValueError):
        HitsConfig(tolerance=0)
    with pytest.raises(ValueError):
        HitsConfig(max_iterations=0)


def test_hits_nonconvergence_is_reported(caplog):
    g = random_graph(5, 30, 0.3)
    with caplog.at_level(logging.WARNING):
        res = hits(g, HitsConfig(tolerance=1e-300, max_iterations=3))
    assert not res.converged
    assert res.iterations == 3
    assert "did not converge" in res.warning
    assert "did not converge" in caplog.text
    table = compute_metric_table(g, HitsConfig(tolerance=1e-300, max_iterations=3))
    assert table.hits_converged is False


@pytest.mark.parametrize("seed", range(30))
def test_hits_against_networkx(seed):
    g = random_graph(100 + seed, 25, 0.3)
    if not g.edges:
        return
    nxg = nx.DiGraph()
    nxg.add_nodes_from(g.nodes)
    nxg.add_weighted_edges_from((u, v, w) for (u, v), w in g.edges.items())
    h_ref, a_ref = nx.hits(nxg, max_iter=10_000, tol=1e-14)

    def l2(d):
        norm = math.sqrt(sum(x * x for x in d.values()))
        return {k: x / norm for k, x in d.items()}

    res = hits(g)
    assert res.help_providing == pytest.approx(l2(h_ref), abs=1e-7)
    assert res.help_receiving == pytest.approx(l2(a_ref), abs=1e-7)


weighted_graphs = st.builds(
    lambda seed, n, p: random_graph(seed, n, p),
    st.integers(0, 10**6), st.integers(2, 20), st.sampled_from([0.2, 0.3, 0.5]),
)


@given(weighted_graphs)
@settings(max_examples=60, deadline=None)
def test_hits_fixed_point_and_norms(g):
    res = hits(g)
    if not g.edges:
        return
    if res.converged:
        ra, rh = hits_residuals(g, res.help_providing, res.help_receiving)
        assert ra < 1e-11 and rh < 1e-11
    for vec in (res.help_providing, res.help_receiving):
        assert min(vec.values()) >= 0
        assert math.sqrt(sum(x * x for x in vec.values())) == pytest.approx(1, abs=1e-9)


@given(weighted_graphs, st.integers(2, 7))
@settings(max_examples=40, deadline=None)
def test_weight_scaling(g, k):
    scaled = SocialGraph.from_edges({e: w * k for e, w in g.edges.items()}, g.nodes)
    a, b = hits(g), hits(scaled)
    assert b.help_providing == pytest.approx(a.help_providing, abs=1e-9)
    assert b.help_receiving == pytest.approx(a.help_receiving, abs=1e-9)
    da, db = degrees(g), degrees(scaled)
    assert db == {v: (i * k, o * k) for v, (i, o) in da.items()}


@given(weighted_graphs, st.randoms())
@settings(max_examples=40, deadline=None)
def test_relabeling_permutes_metrics(g, rnd):
    old = list(g.nodes)
    new = [f"z{i:03d}" for i in range(len(old))]
    rnd.shuffle(new)
    m = dict(zip(old, new))
    h = SocialGraph.from_edges({(m[u], m[v]): w for (u, v), w in g.edges.items()}, {m[v]: r for v, r in g.nodes.items()})
    ta, tb = compute_metric_table(g), compute_metric_table(h)
    for v in old:
        ra, rb = ta.rows[v], tb.rows[m[v]]
        assert (ra.in_degree, ra.out_degree) == (rb.in_degree, rb.out_degree)
        assert rb.betweenness == pytest.approx(ra.betweenness, abs=1e-9)
        assert rb.help_providing == pytest.approx(ra.help_providing, abs=1e-8)
        assert rb.help_receiving == pytest.approx(ra.help_receiving, abs=1e-8)


@given(weighted_graphs)
@settings(max_examples=40, deadline=None)
def test_degree_sums(g):
    deg = degrees(g)
    assert sum(i for i, _ in deg.values()) == sum(o for _, o in deg.values()) == g.total_weight()


def test_metric_table_examples():
    assert compute_metric_table(G({})).rows == {}
    t = compute_metric_table(G({("u", "v"): 1}))
    u, v = t.rows["u"], t.rows["v"]
    assert (u.in_degree, u.out_degree, u.betweenness) == (0, 1, 0)
    assert (v.in_degree, v.out_degree, v.betweenness) == (1, 0, 0)
    assert u.help_providing == pytest.approx(1) and u.help_receiving == pytest.approx(0)
    assert v.help_providing == pytest.approx(0) and v.help_receiving == pytest.approx(1)


def test_metric_table_matches_oracles_on_20_nodes():
    g = random_graph(2024, 20, 0.2)
    while len(g.nodes) < 20:
        g = random_graph(random.randrange(10**6), 20, 0.2)
    t = compute_metric_table(g)
    exact = enumerate_betweenness(g)
    hub, auth = dense_hits(g)
    deg = naive_degrees(g)
    for v, row in t.rows.items():
        assert (row.in_degree, row.out_degree) == deg[v]
        assert row.betweenness == pytest.approx(float(exact[v]), abs=1e-9)
        assert row.help_providing == pytest.approx(hub[v], abs=1e-8)
        assert row.help_receiving == pytest.approx(auth[v], abs=1e-8)


def test_metric_csv():
    g = SocialGraph.from_edges({("a", "b"): 2, ("c", "b"): 1}, {"a": Role.TA, "b": Role.STUDENT, "c": Role.STUDENT})
    assert metric_table_csv(compute_metric_table(g)) == (
        "user_id,role,in_degree,out_degree,betweenness,help_providing,help_receiving\n"
        "a,ta,0,2,0,0.894427,0\n"
        "b,student,3,0,0,0,1\n"
        "c,student,0,1,0,0.447214,0\n"
    )


def test_format_real():
    assert format_real(1 / 3) == "0.333333"
    assert format_real(-0.0) == "0"
    assert format_real(123456789.0) == "1.23457e+08"
