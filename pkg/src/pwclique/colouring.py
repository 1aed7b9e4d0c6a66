"""Greedy sequential colouring used as the clique-size upper bound."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

from .graph import Graph


@dataclass(frozen=True)
class Colouring:
    """Colour labels over a vertex subset, with the subset sorted by colour.

    ``order`` lists the coloured vertices ascending by colour; ties keep
    the order in which the vertices were coloured, so the last entry always
    carries the largest colour.
    """

    labels: dict[int, int] = field(default_factory=dict)
    order: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.order)

    def colour(self, v: int) -> int:
        return self.labels[v]

    def is_proper(self, g: Graph) -> bool:
        return all(
            self.labels[u] != self.labels[v]
            for u in self.order
            for v in self.order
            if u < v and g.has_edge(u, v)
        )

    def is_consecutive(self) -> bool:
        return set(self.labels.values()) == set(range(1, max_colour(self) + 1))

    def without(self, v: int) -> Colouring:
        """Drop ``v`` without touching the other labels (may leave a gap)."""
        labels = dict(self.labels)
        del labels[v]
        return Colouring(labels, tuple(u for u in self.order if u != v))


def greedy_colour(g: Graph, vertices: Sequence[int]) -> Colouring:
    """Colour ``vertices`` in sequence, each with the smallest colour not used
    by an already-coloured neighbour, then stably sort them by colour."""
    classes: list[int] = []  # bitmask of members per colour
    labels: dict[int, int] = {}
    for v in vertices:
        nb = g.adj_bits[v]
        for c, members in enumerate(classes):
            if not members & nb:
                classes[c] = members | (1 << v)
                labels[v] = c + 1
                break
        else:
            classes.append(1 << v)
            labels[v] = len(classes)
    order = tuple(sorted(vertices, key=labels.__getitem__))
    return Colouring(labels, order)


def max_colour(f: Colouring) -> int:
    return max(f.labels.values(), default=0)


def renumber(f: Colouring) -> Colouring:
    """Compress colours to ``1..k`` keeping their relative order.

    One pass over ``order``, which is already sorted by colour.
    """
    labels: dict[int, int] = {}
    prev, current = None, 0
    for v in f.order:
        c = f.labels[v]
        if c != prev:
            current += 1
            prev = c
        labels[v] = current
    return Colouring(labels, f.order)


def colour_classes(adj_bits: Sequence[int], candidates: int) -> list[int]:
    """Bitset form of :func:`greedy_colour` for vertices taken in index order.

    Returns one bitmask per colour. Filling colour classes one at a time,
    each by a sweep in index order, gives exactly the labels of the
    sequential smallest-feasible-colour rule.
    """
    classes = []
    uncoloured = candidates
    while uncoloured:
        free = uncoloured
        members = 0
        while free:
            low = free & -free
            members |= low
            free &= ~(adj_bits[low.bit_length() - 1] | low)
        classes.append(members)
        uncoloured &= ~members
    return classes
