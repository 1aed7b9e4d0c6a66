"""Undirected simple graphs with bitset adjacency.

Vertices are 0-based internally. DIMACS files and anything printed for
humans use 1-based indices.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Set
from typing import Any

import numpy as np

log = logging.getLogger(__name__)


class GraphInputError(ValueError):
    """Bad vertex index, self-loop or otherwise unusable graph input."""


class DimacsParseError(GraphInputError):
    def __init__(self, message: str, lineno: int | None = None) -> None:
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def iter_bits(bits: int) -> Iterator[int]:
    """Yield the indices of set bits in ascending order."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


def mask_of(indices: Iterable[int]) -> int:
    bits = 0
    for i in indices:
        bits |= 1 << i
    return bits


class VertexSet(Set):
    """Immutable set of vertex indices backed by an integer bitmask."""

    __slots__ = ("bits", "n")

    def __init__(self, members: Iterable[int] = (), n: int | None = None, *, bits: int | None = None) -> None:
        if bits is None:
            bits = 0
            for v in members:
                if v < 0:
                    raise GraphInputError(f"negative vertex index {v}")
                bits |= 1 << v
        if n is not None and bits >> n:
            raise GraphInputError(f"vertex index out of range for universe of size {n}")
        self.bits = bits
        self.n = n

    def __contains__(self, v: Any) -> bool:
        return isinstance(v, int) and v >= 0 and (self.bits >> v) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.bits)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __hash__(self) -> int:
        return hash(self.bits)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, VertexSet):
            return self.bits == other.bits
        return Set.__eq__(self, other)

    def __and__(self, other: Any) -> VertexSet:
        if isinstance(other, VertexSet):
            return VertexSet(n=self.n, bits=self.bits & other.bits)
        return Set.__and__(self, other)

    def __or__(self, other: Any) -> VertexSet:
        if isinstance(other, VertexSet):
            return VertexSet(n=self.n, bits=self.bits | other.bits)
        return Set.__or__(self, other)

    def __sub__(self, other: Any) -> VertexSet:
        if isinstance(other, VertexSet):
            return VertexSet(n=self.n, bits=self.bits & ~other.bits)
        return Set.__sub__(self, other)

    @classmethod
    def _from_iterable(cls, it: Iterable[int]) -> VertexSet:
        return cls(it)

    def one_based(self) -> list[int]:
        return [v + 1 for v in self]

    def __repr__(self) -> str:
        return f"VertexSet({sorted(self)})"


class Graph:
    """Immutable undirected simple graph on vertices ``0..n-1``.

    ``adj_bits[v]`` is the neighbourhood of ``v`` as an int bitmask. The
    graph is never mutated after construction, so instances can be shared
    between threads.
    """

    __slots__ = ("n", "adj_bits", "duplicate_edges")

    def __init__(self, n: int, adj_bits: Iterable[int], duplicate_edges: int = 0) -> None:
        self.n = n
        self.adj_bits: tuple[int, ...] = tuple(adj_bits)
        self.duplicate_edges = duplicate_edges
        if len(self.adj_bits) != n:
            raise GraphInputError("adjacency length does not match vertex count")

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> Graph:
        """Build from a symmetric boolean adjacency matrix; the diagonal is ignored."""
        a = np.asarray(matrix, dtype=bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphInputError("adjacency matrix must be square")
        if not np.array_equal(a, a.T):
            raise GraphInputError("adjacency matrix is not symmetric")
        a = a.copy()
        np.fill_diagonal(a, False)
        packed = np.packbits(a, axis=1, bitorder="little")
        return cls(a.shape[0], (int.from_bytes(row.tobytes(), "little") for row in packed))

    def to_matrix(self) -> np.ndarray:
        nbytes = (self.n + 7) // 8
        buf = np.frombuffer(b"".join(b.to_bytes(nbytes, "little") for b in self.adj_bits), dtype=np.uint8)
        buf = buf.reshape(self.n, nbytes) if self.n else buf.reshape(0, 0)
        return np.unpackbits(buf, axis=1, bitorder="little", count=self.n).astype(bool)

    def degree(self, v: int) -> int:
        return self.adj_bits[v].bit_count()

    def degrees(self) -> list[int]:
        return [b.bit_count() for b in self.adj_bits]

    def has_edge(self, u: int, v: int) -> bool:
        return (self.adj_bits[u] >> v) & 1 == 1

    @property
    def num_edges(self) -> int:
        return sum(self.degrees()) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges as ``(u, v)`` with ``u < v``, sorted."""
        for u, bits in enumerate(self.adj_bits):
            yield from ((u, v) for v in iter_bits(bits >> (u + 1) << (u + 1)))

    def is_clique(self, members: Iterable[int]) -> bool:
        members = list(members)
        m = mask_of(members)
        return all((self.adj_bits[v] | (1 << v)) & m == m for v in members)

    def subgraph(self, vertices: Iterable[int]) -> Graph:
        """Induced subgraph, relabelled to ``0..k-1`` in the given order."""
        vs = list(vertices)
        pos = {v: i for i, v in enumerate(vs)}
        adj = []
        for v in vs:
            adj.append(mask_of(pos[u] for u in iter_bits(self.adj_bits[v]) if u in pos))
        return Graph(len(vs), adj)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.adj_bits == other.adj_bits

    def __hash__(self) -> int:
        return hash((self.n, self.adj_bits))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges})"


def build_graph(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Build a graph from 0-based index pairs.

    Duplicate pairs (in either orientation) are collapsed and counted in
    ``Graph.duplicate_edges``.
    """
    if n < 0:
        raise GraphInputError(f"negative vertex count {n}")
    adj = [0] * n
    dupes = 0
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise GraphInputError(f"edge ({u}, {v}) out of range for n={n}")
        if u == v:
            raise GraphInputError(f"self-loop on vertex {u}")
        if (adj[u] >> v) & 1:
            dupes += 1
            continue
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    return Graph(n, adj, duplicate_edges=dupes)


def adjacency(g: Graph, v: int) -> VertexSet:
    if not 0 <= v < g.n:
        raise GraphInputError(f"vertex {v} out of range for n={g.n}")
    return VertexSet(n=g.n, bits=g.adj_bits[v])


def complement(g: Graph) -> Graph:
    full = (1 << g.n) - 1
    return Graph(g.n, ((~bits & full) ^ (1 << v) for v, bits in enumerate(g.adj_bits)))


def parse_dimacs(text: str) -> Graph:
    """Parse DIMACS edge format (``p edge n m`` / ``e u v``, 1-based)."""
    n = None
    declared = 0
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if n is not None:
                raise DimacsParseError("duplicate problem line", lineno)
            if len(parts) != 4 or parts[1] not in ("edge", "col"):
                raise DimacsParseError(f"malformed problem line {line!r}", lineno)
            try:
                n, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsParseError(f"malformed problem line {line!r}", lineno) from None
            if n < 0 or declared < 0:
                raise DimacsParseError("negative counts in problem line", lineno)
        elif parts[0] == "e":
            if n is None:
                raise DimacsParseError("edge before 'p edge' header", lineno)
            if len(parts) != 3:
                raise DimacsParseError(f"malformed edge line {line!r}", lineno)
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise DimacsParseError(f"malformed edge line {line!r}", lineno) from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise DimacsParseError(f"vertex out of range 1..{n} in {line!r}", lineno)
            if u == v:
                raise DimacsParseError(f"self-loop in {line!r}", lineno)
            edges.append((u - 1, v - 1))
        else:
            raise DimacsParseError(f"unknown line type {parts[0]!r}", lineno)
    if n is None:
        raise DimacsParseError("missing 'p edge' header")
    g = build_graph(n, edges)
    if g.duplicate_edges:
        log.warning("DIMACS input: %d duplicate edges ignored", g.duplicate_edges)
    if g.num_edges != declared:
        raise DimacsParseError(f"header declares {declared} edges but {g.num_edges} distinct edges listed")
    return g


def write_dimacs(g: Graph, comment: str = "generated by pwclique") -> str:
    lines = [f"c {c}" for c in comment.splitlines()]
    lines.append(f"p edge {g.n} {g.num_edges}")
    lines.extend(f"e {u + 1} {v + 1}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def read_dimacs(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_dimacs(fh.read())
