"""Exact maximum-clique branch and bound: basic, MCQ and PMC.

All three share one search scaffold. Candidate sets, removed-vertex sets
and colour classes are int bitmasks over a relabelled graph in which bit
``i`` is the ``i``-th vertex of the initial ordering, so a sweep in bit
order is a sweep in the initial ordering.
"""

from __future__ import annotations

import time
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .colouring import colour_classes
from .graph import Graph, GraphInputError, VertexSet, iter_bits

BRUTE_FORCE_LIMIT = 25
_CLOCK_STRIDE = 256


class SizeLimitError(ValueError):
    pass


@dataclass(frozen=True)
class TraceEvent:
    """One line of the search log. Vertex labels are 1-based.

    ``action`` is one of ``enter``, ``expand``, ``skip``, ``prune``,
    ``best``. ``bound`` is the upper bound evaluated at the event (0 when
    not applicable), ``best`` the incumbent size at that moment.
    """

    depth: int
    action: str
    R: tuple[int, ...]
    S: tuple[int, ...]
    C: tuple[int, ...] = ()
    F: tuple[int, ...] = ()
    vertex: int | None = None
    bound: int = 0
    best: int = 0

    def format(self) -> str:
        v = "-" if self.vertex is None else str(self.vertex)
        return (
            f"depth={self.depth} |S|={len(self.S)} |C|={len(self.C)} |R|={len(self.R)} "
            f"bound={self.bound} best={self.best} action={self.action} v={v} "
            f"R={_fmt(self.R)} S={_fmt(self.S)} C={_fmt(self.C)} F={_fmt(self.F)}"
        )


def _fmt(vs: Sequence[int]) -> str:
    return "{" + ",".join(map(str, vs)) + "}"


@dataclass
class SolveResult:
    best: VertexSet
    nodes_expanded: int = 0
    colour_prunes: int = 0
    skip_prunes: int = 0
    wall_time: float = 0.0
    complete: bool = True
    algorithm: str = ""
    trace: list[TraceEvent] | None = None
    # (nodes_expanded, size) at every incumbent improvement
    improvements: list[tuple[int, int]] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.best)

    @property
    def members(self) -> list[int]:
        return sorted(self.best)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "size": self.size,
            "members": self.best.one_based(),
            "complete": self.complete,
            "nodes_expanded": self.nodes_expanded,
            "colour_prunes": self.colour_prunes,
            "skip_prunes": self.skip_prunes,
            "wall_time": self.wall_time,
        }


class _Timeout(Exception):
    pass


def initial_order(g: Graph) -> list[int]:
    """Vertices by descending degree, ties by ascending index."""
    deg = g.degrees()
    return sorted(range(g.n), key=lambda v: (-deg[v], v))


def _relabel(g: Graph, order: Sequence[int]) -> list[int]:
    if g.n <= 64:
        pos = {v: i for i, v in enumerate(order)}
        out = []
        for v in order:
            bits = 0
            for u in iter_bits(g.adj_bits[v]):
                bits |= 1 << pos[u]
            out.append(bits)
        return out
    perm = np.asarray(order)
    a = g.to_matrix()[np.ix_(perm, perm)]
    packed = np.packbits(a, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def _check_permutation(order: Sequence[int], n: int) -> list[int]:
    order = list(order)
    if sorted(order) != list(range(n)):
        raise GraphInputError("order_override must be a permutation of the vertices")
    return order


class _Search:
    """Mutable state of one solve: current clique, incumbent, counters."""

    def __init__(self, adj: list[int], labels: Sequence[int], timeout: float | None, trace: bool) -> None:
        self.adj = adj
        self.labels = list(labels)  # search index -> original vertex
        self.R: list[int] = []
        self.best: list[int] = []
        self.best_size = 0
        self.nodes = 0
        self.colour_prunes = 0
        self.skip_prunes = 0
        self.improvements: list[tuple[int, int]] = []
        self.deadline = None if timeout is None else time.perf_counter() + timeout
        self.trace: list[TraceEvent] | None = [] if trace else None

    def tick(self) -> None:
        self.nodes += 1
        if self.deadline is not None and self.nodes % _CLOCK_STRIDE == 0:
            if time.perf_counter() > self.deadline:
                raise _Timeout

    def record_if_better(self) -> None:
        if len(self.R) > self.best_size:
            self.best = list(self.R)
            self.best_size = len(self.R)
            self.improvements.append((self.nodes, self.best_size))
            if self.trace is not None:
                self.log(len(self.R), "best", 0, 0, 0)

    def log(self, depth: int, action: str, S: int, C: int, F: int, vertex: int | None = None, bound: int = 0) -> None:
        lab = self.labels

        def members(bits: int) -> tuple[int, ...]:
            return tuple(sorted(lab[v] + 1 for v in iter_bits(bits)))

        self.trace.append(
            TraceEvent(
                depth=depth,
                action=action,
                R=tuple(lab[v] + 1 for v in self.R),
                S=members(S),
                C=members(C),
                F=members(F),
                vertex=None if vertex is None else lab[vertex] + 1,
                bound=bound,
                best=self.best_size,
            )
        )

    # -- Algorithm 1 ---------------------------------------------------------

    def basic(self, S: int, depth: int) -> None:
        adj, R, tracing = self.adj, self.R, self.trace is not None
        if tracing:
            self.log(depth, "enter", S, 0, 0, bound=len(R) + S.bit_count())
        while S:
            bound = len(R) + S.bit_count()
            if bound <= self.best_size:
                self.colour_prunes += 1
                if tracing:
                    self.log(depth, "prune", S, 0, 0, bound=bound)
                return
            low = S & -S
            v = low.bit_length() - 1
            self.tick()
            R.append(v)
            if tracing:
                self.log(depth, "expand", S, 0, 0, vertex=v, bound=bound)
            child = S & adj[v]
            if child:
                self.basic(child, depth + 1)
            else:
                self.record_if_better()
            R.pop()
            S ^= low

    # -- Algorithm 2 ---------------------------------------------------------

    def mcq(self, S: int, classes: list[int], depth: int) -> None:
        adj, R, tracing = self.adj, self.R, self.trace is not None
        if tracing:
            self.log(depth, "enter", S, 0, 0, bound=len(R) + len(classes))
        for colour in range(len(classes), 0, -1):
            members = classes[colour - 1]
            while members:
                # expanding right to left: every remaining vertex has colour <= this one
                if len(R) + colour <= self.best_size:
                    self.colour_prunes += 1
                    if tracing:
                        self.log(depth, "prune", S, 0, 0, bound=len(R) + colour)
                    return
                v = members.bit_length() - 1
                bit = 1 << v
                members ^= bit
                self.tick()
                R.append(v)
                if tracing:
                    self.log(depth, "expand", S, 0, 0, vertex=v, bound=len(R) - 1 + colour)
                child = S & adj[v]
                if child:
                    self.mcq(child, colour_classes(adj, child), depth + 1)
                else:
                    self.record_if_better()
                R.pop()
                S ^= bit

    # -- Algorithm 3 ---------------------------------------------------------

    def pivot(self, S: int, F: int) -> tuple[int, int]:
        """Vertex of ``S | F`` with most neighbours in ``S`` and its skip set.

        Ties go to the lowest original vertex index.
        """
        adj, lab = self.adj, self.labels
        best_v, best_cnt = -1, -1
        pool = S | F
        while pool:
            low = pool & -pool
            u = low.bit_length() - 1
            pool ^= low
            cnt = (S & adj[u]).bit_count()
            if cnt > best_cnt or (cnt == best_cnt and lab[u] < lab[best_v]):
                best_v, best_cnt = u, cnt
        return best_v, S & ~adj[best_v]

    def pmc(self, S: int, F: int, classes: list[int], depth: int) -> None:
        adj, R, tracing = self.adj, self.R, self.trace is not None
        if len(R) + len(classes) <= self.best_size:
            # the first loop test would return anyway; skip the pivot it would never use
            self.colour_prunes += 1
            if tracing:
                self.log(depth, "prune", S, 0, F, bound=len(R) + len(classes))
            return
        _, C = self.pivot(S, F)
        self.skip_prunes += S.bit_count() - C.bit_count()
        live = list(classes)
        n_colours = len(live)  # max colour after renumbering = number of non-empty classes
        if tracing:
            self.log(depth, "enter", S, C, F, bound=len(R) + n_colours)
        for colour in range(len(classes), 0, -1):
            members = classes[colour - 1]
            while members:
                bound = len(R) + n_colours
                if bound <= self.best_size:
                    self.colour_prunes += 1
                    if tracing:
                        self.log(depth, "prune", S, C & S, F, bound=bound)
                    return
                v = members.bit_length() - 1
                bit = 1 << v
                members ^= bit
                if not C & bit:
                    if tracing:
                        self.log(depth, "skip", S, C & S, F, vertex=v, bound=bound)
                    continue
                self.tick()
                R.append(v)
                if tracing:
                    self.log(depth, "expand", S, C & S, F, vertex=v, bound=bound)
                nb = adj[v]
                child = S & nb
                if child:
                    self.pmc(child, F & nb, colour_classes(adj, child), depth + 1)
                else:
                    self.record_if_better()
                R.pop()
                S ^= bit
                F |= bit
                live[colour - 1] ^= bit
                if not live[colour - 1]:
                    n_colours -= 1


def _run(g: Graph, algorithm: str, order: list[int], timeout: float | None, trace: bool) -> SolveResult:
    adj = _relabel(g, order) if order != list(range(g.n)) else list(g.adj_bits)
    search = _Search(adj, order, timeout, trace)
    everything = (1 << g.n) - 1
    complete = True
    t0 = time.perf_counter()
    try:
        if g.n:
            if algorithm == "basic":
                search.basic(everything, 0)
            elif algorithm == "mcq":
                search.mcq(everything, colour_classes(adj, everything), 0)
            else:
                search.pmc(everything, 0, colour_classes(adj, everything), 0)
    except _Timeout:
        complete = False
    wall = time.perf_counter() - t0
    best = VertexSet((order[v] for v in search.best), n=g.n)
    return SolveResult(
        best=best,
        nodes_expanded=search.nodes,
        colour_prunes=search.colour_prunes,
        skip_prunes=search.skip_prunes,
        wall_time=wall,
        complete=complete,
        algorithm=algorithm,
        trace=search.trace,
        improvements=search.improvements,
    )


def solve_basic(g: Graph, timeout: float | None = None, trace: bool = False) -> SolveResult:
    """Plain depth-first BnB with the ``|R| + |S|`` size bound."""
    return _run(g, "basic", list(range(g.n)), timeout, trace)


def solve_mcq(g: Graph, timeout: float | None = None, trace: bool = False) -> SolveResult:
    """MCQ: degree ordering plus the greedy-colouring bound."""
    return _run(g, "mcq", initial_order(g), timeout, trace)


def solve_pmc(
    g: Graph,
    order_override: Sequence[int] | None = None,
    timeout: float | None = None,
    trace: bool = False,
) -> SolveResult:
    """MCQ with expansion restricted to the pivot's skip set at every node.

    ``order_override`` replaces the degree ordering used for the initial
    colouring (and hence the bit order of the search).
    """
    order = initial_order(g) if order_override is None else _check_permutation(order_override, g.n)
    return _run(g, "pmc", order, timeout, trace)


SOLVERS = {"basic": solve_basic, "mcq": solve_mcq, "pmc": solve_pmc}


def solve(g: Graph, algorithm: str = "pmc", timeout: float | None = None, trace: bool = False) -> SolveResult:
    try:
        fn = SOLVERS[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {sorted(SOLVERS)}") from None
    return fn(g, timeout=timeout, trace=trace)


def select_pivot(g: Graph, S: VertexSet | set[int], F: VertexSet | set[int] = frozenset()) -> tuple[int, VertexSet]:
    """Pivot ``v_k`` over ``S | F`` maximising ``|S & adj(v_k)|`` and ``C = S - adj(v_k)``."""
    s_bits = S.bits if isinstance(S, VertexSet) else sum(1 << v for v in set(S))
    f_bits = F.bits if isinstance(F, VertexSet) else sum(1 << v for v in set(F))
    if not s_bits:
        raise ValueError("select_pivot needs a non-empty candidate set")
    if s_bits & f_bits:
        raise ValueError("candidate and removed sets must be disjoint")
    search = _Search(list(g.adj_bits), range(g.n), None, False)
    v, c = search.pivot(s_bits, f_bits)
    return v, VertexSet(n=g.n, bits=c)


def brute_force_mc(g: Graph) -> VertexSet:
    """Enumerate every clique; return the lexicographically smallest maximum one.

    Cliques are visited in lexicographic order of their sorted member
    tuples, so the first maximum seen is the smallest.
    """
    if g.n > BRUTE_FORCE_LIMIT:
        raise SizeLimitError(f"brute force refused for n={g.n} > {BRUTE_FORCE_LIMIT}")
    nbrs = [frozenset(iter_bits(b)) for b in g.adj_bits]
    best: list[int] = []

    def extend(clique: list[int], candidates: list[int]) -> None:
        nonlocal best
        if len(clique) > len(best):
            best = list(clique)
        for i, v in enumerate(candidates):
            clique.append(v)
            extend(clique, [u for u in candidates[i + 1 :] if u in nbrs[v]])
            clique.pop()

    extend([], list(range(g.n)))
    return VertexSet(best, n=g.n)


def clique_number(g: Graph) -> int:
    return len(brute_force_mc(g))


__all__ = [
    "SolveResult",
    "TraceEvent",
    "SizeLimitError",
    "brute_force_mc",
    "clique_number",
    "initial_order",
    "select_pivot",
    "solve",
    "solve_basic",
    "solve_mcq",
    "solve_pmc",
]
