"""Kernel backend selection.

The two inner loops that dominate large builds -- PageRank power iteration
over the note graph and Bron-Kerbosch clique enumeration over the merge
graph -- exist twice: a compiled Cython extension (``_speed``) and a plain
Python fallback (``_pure``). The extension is preferred when importable;
``ONTOFORGE_KERNELS=pure`` forces the fallback. ``benchmarks/bench_kernels.py``
compares the two.
"""

from __future__ import annotations

import os

BACKEND: str

if os.environ.get("ONTOFORGE_KERNELS", "").lower() == "pure":
    from ontoforge._kernels import _pure as _impl

    BACKEND = "pure"
else:
    try:
        from ontoforge._kernels import _speed as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from ontoforge._kernels import _pure as _impl  # type: ignore[no-redef]

        BACKEND = "pure"

pagerank = _impl.pagerank
maximal_cliques = _impl.maximal_cliques

__all__ = ["BACKEND", "pagerank", "maximal_cliques"]
