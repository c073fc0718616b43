"""Concept relevance ranking over the note graph."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from ontoforge import _kernels
from ontoforge.errors import VaultError
from ontoforge.vault import NoteGraph

DEFAULT_DAMPING = 0.85
DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITERATIONS = 200


@dataclass
class RankTable:
    scores: dict[str, float]
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return {
            "scores": {nid: self.scores[nid] for nid in sorted(self.scores)},
            "iterations": self.iterations,
            "converged": self.converged,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        """``note_id,score`` rows, highest rank first."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["note_id", "score"])
        for nid in sorted(self.scores, key=lambda n: (-self.scores[n], n)):
            writer.writerow([nid, repr(self.scores[nid])])
        return buf.getvalue()


def pagerank(
    graph: NoteGraph,
    damping: float = DEFAULT_DAMPING,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    undirected: bool = False,
) -> RankTable:
    """PageRank with uniform teleport; dangling mass spreads uniformly.

    Duplicate links collapse to one edge. ``undirected=True`` symmetrizes
    the graph before ranking.
    """
    if not graph.notes:
        raise VaultError("pagerank needs a non-empty note graph")
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must be in (0, 1), got {damping}")
    if tolerance <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    if max_iterations < 1:
        raise ValueError(f"max_iterations must be >= 1, got {max_iterations}")

    ids = sorted(graph.notes)
    index = {nid: i for i, nid in enumerate(ids)}
    out: list[set[int]] = [set() for _ in ids]
    for source, target in graph.edges:
        out[index[source]].add(index[target])
        if undirected:
            out[index[target]].add(index[source])
    out_edges = [sorted(targets) for targets in out]

    scores, iterations, converged = _kernels.pagerank(
        out_edges, damping, tolerance, max_iterations
    )
    return RankTable(
        scores={nid: scores[index[nid]] for nid in ids},
        iterations=iterations,
        converged=converged,
    )
