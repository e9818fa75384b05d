"""Midpoint subdivision that makes a graph locally balanced.

A generation is *bad* when it has more edges than vertices on either of
its bounding spheres.  Every edge of a bad generation is cut in half by a
new degree-two vertex; degree-two Kirchhoff vertices are invisible to the
Laplacian, so the spectrum is unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import LayeredGraph, MetricLayers, validate_graph


@dataclass(frozen=True)
class BalanceResult:
    """Balanced graph plus provenance.

    ``sphere_origin[k]`` is the original sphere index of new sphere ``k`` or
    ``None`` for an inserted sphere; ``edge_origin[j][e]`` is the
    ``(generation, edge index)`` of the original edge containing new edge
    ``e`` of generation ``j``.
    """

    graph: LayeredGraph
    metric: MetricLayers
    sphere_origin: tuple
    edge_origin: tuple


def bad_generations(g: LayeredGraph) -> set[int]:
    sizes = g.sphere_sizes
    return {
        n
        for n in range(g.depth)
        if g.edge_count(n) > sizes[n] and g.edge_count(n) > sizes[n + 1]
    }


def is_locally_balanced(g: LayeredGraph) -> bool:
    return not bad_generations(g)


def balance(g: LayeredGraph, m: MetricLayers) -> BalanceResult:
    """Insert a midpoint sphere into every bad generation.

    New vertices follow the parent-major order of the edges they split,
    i.e. the order of :meth:`LayeredGraph.edges`.
    """
    if m.depth != g.depth:
        raise ValueError(f"metric depth {m.depth} does not match graph depth {g.depth}")
    bad = bad_generations(g)
    sizes = [1]
    mats, lengths, origin, edge_origin = [], [], [0], []
    for n in range(g.depth):
        edges = g.edges(n)
        if n not in bad:
            mats.append(np.array(g.biadjacency[n]))
            lengths.append(m.lengths[n])
            edge_origin.append(tuple((n, e) for e in range(len(edges))))
        else:
            count = len(edges)
            first = np.zeros((count, sizes[-1]), dtype=np.int64)
            first[np.arange(count), edges[:, 0]] = 1
            second = np.zeros((g.sphere_sizes[n + 1], count), dtype=np.int64)
            second[edges[:, 1], np.arange(count)] = 1
            mats += [first, second]
            half = m.lengths[n] / 2
            lengths += [half, half]
            sizes.append(count)
            origin.append(None)
            # both halves of edge e have new vertex e as child resp. parent
            edge_origin.append(tuple((n, e) for e in range(count)))
            edge_origin.append(tuple((n, e) for e in range(count)))
        sizes.append(g.sphere_sizes[n + 1])
        origin.append(n + 1)
    terminal = set()
    for n, i in g.terminal:
        terminal.add((origin.index(n), i))
    out = validate_graph(sizes, mats, terminal)
    leftover = bad_generations(out)
    if leftover:
        raise AssertionError(f"subdivision left bad generations {sorted(leftover)}")
    return BalanceResult(out, MetricLayers(tuple(lengths)), tuple(origin), tuple(edge_origin))
