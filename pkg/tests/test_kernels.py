"""Both kernel backends against independent brute-force oracles."""

import random

import pytest

from ontoforge._kernels import _pure

BACKENDS = [pytest.param(_pure, id="pure")]
try:
    from ontoforge._kernels import _speed

    BACKENDS.append(pytest.param(_speed, id="compiled"))
except ImportError:
    _speed = None


# --------------------------------------------------------------------------
# Oracles


def dense_pagerank_oracle(out_edges, damping, iterations=500):
    """Full transition-matrix power iteration, no sparsity tricks."""
    n = len(out_edges)
    matrix = [[0.0] * n for _ in range(n)]
    for i, targets in enumerate(out_edges):
        if targets:
            share = 1.0 / len(targets)
            for t in targets:
                matrix[i][t] += share
        else:
            for t in range(n):
                matrix[i][t] = 1.0 / n
    score = [1.0 / n] * n
    for _ in range(iterations):
        nxt = [
            (1.0 - damping) / n + damping * sum(score[i] * matrix[i][j] for i in range(n))
            for j in range(n)
        ]
        score = nxt
    return score


def brute_force_maximal_cliques(neighbors):
    """Exhaustive subset enumeration with bitmask adjacency."""
    n = len(neighbors)
    adj = [0] * n
    for i, targets in enumerate(neighbors):
        for t in targets:
            if t != i:
                adj[i] |= 1 << t
                adj[t] |= 1 << i
    cliques = []
    for subset in range(1, 1 << n):
        members = [v for v in range(n) if subset >> v & 1]
        if any(subset & ~(adj[v] | (1 << v)) for v in members):
            continue
        extendable = False
        for w in range(n):
            if not subset >> w & 1 and subset & adj[w] == subset:
                extendable = True
                break
        if not extendable:
            cliques.append(tuple(members))
    return sorted(cliques)


def random_digraph(rng, n, p):
    return [
        sorted({t for t in range(n) if t != i and rng.random() < p})
        for i in range(n)
    ]


def random_undirected(rng, n, p):
    neighbors = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                neighbors[i].add(j)
                neighbors[j].add(i)
    return [sorted(s) for s in neighbors]


# --------------------------------------------------------------------------


@pytest.mark.parametrize("kernel", BACKENDS)
def test_pagerank_two_mutual_nodes(kernel):
    scores, _, converged = kernel.pagerank([[1], [0]], 0.85, 1e-12, 100)
    assert converged
    assert scores[0] == pytest.approx(0.5, abs=1e-12)
    assert scores[1] == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("kernel", BACKENDS)
def test_pagerank_matches_dense_oracle(kernel):
    rng = random.Random(7)
    for trial in range(10):
        n = rng.randint(2, 20)
        out_edges = random_digraph(rng, n, 0.25)
        scores, _, converged = kernel.pagerank(out_edges, 0.85, 1e-14, 1000)
        assert converged
        expected = dense_pagerank_oracle(out_edges, 0.85)
        for got, want in zip(scores, expected):
            assert got == pytest.approx(want, abs=1e-8)


@pytest.mark.parametrize("kernel", BACKENDS)
def test_pagerank_scores_sum_to_one(kernel):
    rng = random.Random(11)
    for trial in range(10):
        n = rng.randint(1, 30)
        scores, _, _ = kernel.pagerank(random_digraph(rng, n, 0.2), 0.9, 1e-12, 300)
        assert sum(scores) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("kernel", BACKENDS)
def test_pagerank_empty_graph_rejected(kernel):
    with pytest.raises(ValueError):
        kernel.pagerank([], 0.85, 1e-10, 100)


@pytest.mark.parametrize("kernel", BACKENDS)
def test_pagerank_unconverged_flag(kernel):
    out_edges = random_digraph(random.Random(3), 15, 0.3)
    scores, iterations, converged = kernel.pagerank(out_edges, 0.85, 1e-30, 5)
    assert not converged
    assert iterations == 5
    assert sum(scores) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("kernel", BACKENDS)
def test_cliques_triangle_plus_isolated(kernel):
    cliques = sorted(kernel.maximal_cliques([[1, 2], [0, 2], [0, 1], []]))
    assert cliques == [(0, 1, 2), (3,)]


@pytest.mark.parametrize("kernel", BACKENDS)
def test_cliques_match_bruteforce(kernel):
    rng = random.Random(23)
    for trial in range(40):
        n = rng.randint(1, 11)
        neighbors = random_undirected(rng, n, rng.choice([0.2, 0.5, 0.8]))
        got = sorted(kernel.maximal_cliques(neighbors))
        assert got == brute_force_maximal_cliques(neighbors)


@pytest.mark.skipif(_speed is None, reason="compiled kernels unavailable")
def test_backends_agree():
    rng = random.Random(99)
    for trial in range(20):
        n = rng.randint(1, 40)
        neighbors = random_undirected(rng, n, 0.3)
        assert sorted(_pure.maximal_cliques(neighbors)) == sorted(
            _speed.maximal_cliques(neighbors)
        )
        out_edges = random_digraph(rng, n, 0.2)
        pure_scores, _, _ = _pure.pagerank(out_edges, 0.85, 1e-13, 500)
        fast_scores, _, _ = _speed.pagerank(out_edges, 0.85, 1e-13, 500)
        for a, b in zip(pure_scores, fast_scores):
            assert a == pytest.approx(b, abs=1e-10)
