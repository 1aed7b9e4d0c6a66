"""Maximum clique and minimum vertex cover as 0-1 programs in LP text format.

Variables are named ``x1 .. xn`` (1-based). Constraints are written in
sorted pair order so the output is byte-stable for a given graph.
"""

from __future__ import annotations

from itertools import combinations
from pathlib import Path

from .graph import Graph


def _lp(sense: str, n: int, rows: list[str]) -> str:
    out = [f"\\ {n} binary variables, {len(rows)} constraints", sense]
    terms = [f"+ x{i}" for i in range(1, n + 1)]
    # long objectives continue on following lines, ten terms each
    chunks = [" ".join(terms[k : k + 10]) for k in range(0, n, 10)] or [""]
    out.append(f" obj: {chunks[0]}".rstrip())
    out.extend(f"   {c}" for c in chunks[1:])
    out.append("Subject To")
    out.extend(rows)
    out.append("Binary")
    out.extend(f" x{i}" for i in range(1, n + 1))
    out.append("End")
    return "\n".join(out) + "\n"


def export_mc(g: Graph) -> str:
    """Maximise ``sum x_i`` with ``x_i + x_j <= 1`` for every non-adjacent pair."""
    rows = [
        f" c{k}: x{i + 1} + x{j + 1} <= 1"
        for k, (i, j) in enumerate(((i, j) for i, j in combinations(range(g.n), 2) if not g.has_edge(i, j)), start=1)
    ]
    return _lp("Maximize", g.n, rows)


def export_mvc(g: Graph) -> str:
    """Minimise ``sum x_i`` with ``x_i + x_j >= 1`` for every edge."""
    rows = [f" c{k}: x{i + 1} + x{j + 1} >= 1" for k, (i, j) in enumerate(g.edges(), start=1)]
    return _lp("Minimize", g.n, rows)


def write_lp(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")
