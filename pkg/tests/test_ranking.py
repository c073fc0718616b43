"""PageRank over note graphs: exact cases, oracle agreement, invariants."""

import random

import pytest

from ontoforge.errors import VaultError
from ontoforge.ranking import pagerank
from ontoforge.vault import Note, NoteGraph

from test_kernels import dense_pagerank_oracle


def graph_of(n: int, edges: set[tuple[int, int]]) -> NoteGraph:
    notes = {f"n{i:02d}": Note(id=f"n{i:02d}", path=f"n{i:02d}.md", body="") for i in range(n)}
    return NoteGraph(
        notes=notes, edges={(f"n{a:02d}", f"n{b:02d}") for a, b in edges}
    )


def test_two_mutual_nodes_split_evenly():
    table = pagerank(graph_of(2, {(0, 1), (1, 0)}), damping=0.85)
    assert table.converged
    assert table.scores["n00"] == pytest.approx(0.5, abs=1e-9)
    assert table.scores["n01"] == pytest.approx(0.5, abs=1e-9)


def test_star_hub_dominates():
    # Five leaves all pointing at one hub.
    table = pagerank(graph_of(6, {(i, 5) for i in range(5)}))
    hub = table.scores["n05"]
    assert all(hub > table.scores[f"n{i:02d}"] for i in range(5))
    expected = dense_pagerank_oracle([[5], [5], [5], [5], [5], []], 0.85)
    for i in range(6):
        assert table.scores[f"n{i:02d}"] == pytest.approx(expected[i], abs=1e-8)


def test_random_graph_matches_dense_oracle():
    rng = random.Random(5)
    edges = {
        (a, b)
        for a in range(20)
        for b in range(20)
        if a != b and rng.random() < 0.15
    }
    table = pagerank(graph_of(20, edges), tolerance=1e-14, max_iterations=1000)
    out_edges = [sorted({b for a, b in edges if a == i}) for i in range(20)]
    expected = dense_pagerank_oracle(out_edges, 0.85)
    for i in range(20):
        assert table.scores[f"n{i:02d}"] == pytest.approx(expected[i], abs=1e-8)


def test_scores_sum_to_one_and_nonnegative():
    rng = random.Random(17)
    for trial in range(20):
        n = rng.randint(1, 25)
        edges = {
            (a, b) for a in range(n) for b in range(n) if a != b and rng.random() < 0.2
        }
        table = pagerank(graph_of(n, edges))
        assert sum(table.scores.values()) == pytest.approx(1.0, abs=1e-9)
        assert all(score >= 0 for score in table.scores.values())


@pytest.mark.parametrize("n", [3, 5, 8])
def test_cycle_is_uniform(n):
    table = pagerank(graph_of(n, {(i, (i + 1) % n) for i in range(n)}))
    for score in table.scores.values():
        assert score == pytest.approx(1.0 / n, abs=1e-9)


def test_complete_graph_is_uniform():
    n = 6
    table = pagerank(graph_of(n, {(a, b) for a in range(n) for b in range(n) if a != b}))
    for score in table.scores.values():
        assert score == pytest.approx(1.0 / n, abs=1e-9)


def test_undirected_switch_symmetrizes():
    # Directed chain: the sink accumulates mass; symmetrized, ends match.
    chain = graph_of(3, {(0, 1), (1, 2)})
    directed = pagerank(chain)
    undirected = pagerank(chain, undirected=True)
    assert directed.scores["n02"] > directed.scores["n00"]
    assert undirected.scores["n00"] == pytest.approx(undirected.scores["n02"], abs=1e-9)


def test_parameter_validation():
    graph = graph_of(2, {(0, 1)})
    with pytest.raises(VaultError):
        pagerank(NoteGraph())
    for bad_damping in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            pagerank(graph, damping=bad_damping)
    with pytest.raises(ValueError):
        pagerank(graph, tolerance=0.0)
    with pytest.raises(ValueError):
        pagerank(graph, max_iterations=0)


def test_csv_and_json_exports():
    table = pagerank(graph_of(3, {(0, 2), (1, 2)}))
    csv_text = table.to_csv()
    lines = csv_text.strip().splitlines()
    assert lines[0] == "note_id,score"
    assert lines[1].startswith("n02,")  # highest rank first
    assert "scores" in table.to_dict()
    assert table.to_dict()["converged"] is True
