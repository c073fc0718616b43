"""Pure-Python implementations of the two hot kernels.

Used when the compiled extension is unavailable (or forced via
ONTOFORGE_KERNELS=pure). Semantics are identical to ontoforge._kernels._speed;
only the constant factor differs.
"""

from __future__ import annotations

from typing import Sequence


def pagerank(
    out_edges: Sequence[Sequence[int]],
    damping: float,
    tolerance: float,
    max_iterations: int,
) -> tuple[list[float], int, bool]:
    """Power iteration with uniform teleport and uniform dangling mass.

    ``out_edges[i]`` lists the distinct targets of node ``i``. Returns
    ``(scores, iterations, converged)`` where convergence means the L1 change
    of an iteration dropped below ``tolerance``.
    """
    n = len(out_edges)
    if n == 0:
        raise ValueError("pagerank kernel requires a non-empty graph")
    score = [1.0 / n] * n
    out_degree = [len(targets) for targets in out_edges]
    teleport = (1.0 - damping) / n
    iterations = 0
    converged = False
    while iterations < max_iterations:
        iterations += 1
        dangling = 0.0
        for i in range(n):
            if out_degree[i] == 0:
                dangling += score[i]
        base = teleport + damping * dangling / n
        nxt = [base] * n
        for i, targets in enumerate(out_edges):
            if targets:
                share = damping * score[i] / out_degree[i]
                for t in targets:
                    nxt[t] += share
        delta = 0.0
        for i in range(n):
            delta += abs(nxt[i] - score[i])
        score = nxt
        if delta < tolerance:
            converged = True
            break
    total = sum(score)
    return [s / total for s in score], iterations, converged


def maximal_cliques(neighbors: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """All maximal cliques (singletons included) via Bron-Kerbosch with pivot.

    ``neighbors[i]`` lists the neighbors of vertex ``i`` in a simple
    undirected graph. Each clique is returned once as a sorted vertex tuple;
    the list order is unspecified (callers sort).
    """
    n = len(neighbors)
    adj = [frozenset(targets) for targets in neighbors]
    found: list[tuple[int, ...]] = []

    def expand(clique: set[int], candidates: set[int], excluded: set[int]) -> None:
        if not candidates and not excluded:
            found.append(tuple(sorted(clique)))
            return
        pivot = max(candidates | excluded, key=lambda u: len(candidates & adj[u]))
        for v in sorted(candidates - adj[pivot]):
            expand(clique | {v}, candidates & adj[v], excluded & adj[v])
            candidates.remove(v)
            excluded.add(v)

    expand(set(), set(range(n)), set())
    return found
