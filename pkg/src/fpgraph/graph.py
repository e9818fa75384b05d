"""Layered rooted graphs, their metric data and combinatorial cone profiles.

A graph is stored sphere by sphere: ``sphere_sizes[n]`` vertices at
combinatorial distance ``n`` from the root and one 0/1 biadjacency matrix
per generation, ``biadjacency[n][w, v] == 1`` iff ``v`` in ``S_n`` is joined
to ``w`` in ``S_{n+1}``.  Edges inside a sphere cannot be represented.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DeadEndVertex,
    IndexOutOfRange,
    MultiEdge,
    NotSymmetric,
    OrphanVertex,
    RootNotUnique,
    ShapeMismatch,
)

_INT64_SAFE = 2**62


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LayeredGraph:
    """Finite truncation of a rooted graph without intra-sphere edges.

    Build instances with :func:`validate_graph`; the constructor itself does
    not check invariants.
    """

    sphere_sizes: tuple[int, ...]
    biadjacency: tuple[np.ndarray, ...]
    terminal: frozenset = field(default_factory=frozenset)

    @property
    def depth(self) -> int:
        """Index ``N`` of the truncation sphere."""
        return len(self.sphere_sizes) - 1

    @cached_property
    def offsets(self) -> np.ndarray:
        """Global index of the first vertex of every sphere (plus the total)."""
        return np.concatenate([[0], np.cumsum(self.sphere_sizes)])

    @property
    def num_vertices(self) -> int:
        return int(self.offsets[-1])

    def edge_count(self, j: int) -> int:
        return int(self.biadjacency[j].sum())

    @property
    def num_edges(self) -> int:
        return sum(self.edge_count(j) for j in range(self.depth))

    def edges(self, j: int) -> np.ndarray:
        """Generation-``j`` edges as ``(parent, child)`` rows, parent-major order."""
        self._check_generation(j)
        return np.argwhere(self.biadjacency[j].T)

    def b_in(self, n: int) -> np.ndarray:
        """Backward degree of every vertex of ``S_n``."""
        if n == 0:
            return np.zeros(1, dtype=np.int64)
        return self.biadjacency[n - 1].sum(axis=1)

    def b_out(self, n: int) -> np.ndarray:
        """Forward degree of every vertex of ``S_n``."""
        if n == self.depth:
            return np.zeros(self.sphere_sizes[n], dtype=np.int64)
        return self.biadjacency[n].sum(axis=0)

    def degrees(self, n: int) -> np.ndarray:
        return self.b_in(n) + self.b_out(n)

    def global_index(self, n: int, i: int) -> int:
        return int(self.offsets[n]) + int(i)

    def discrete_laplacian(self) -> np.ndarray:
        """Dense matrix of ``(Lf)(x) = sum_{y ~ x} (f(x) - f(y))``."""
        size = self.num_vertices
        lap = np.zeros((size, size))
        for n, b in enumerate(self.biadjacency):
            lo, mid, hi = self.offsets[n], self.offsets[n + 1], self.offsets[n + 2]
            lap[mid:hi, lo:mid] -= b
            lap[lo:mid, mid:hi] -= b.T
        lap[np.diag_indices(size)] = np.concatenate(
            [self.degrees(n) for n in range(self.depth + 1)]
        )
        return lap

    def _check_generation(self, j):
        if not 0 <= j < self.depth:
            raise IndexOutOfRange(f"generation {j} outside 0..{self.depth - 1}")

    def __eq__(self, other):
        if not isinstance(other, LayeredGraph):
            return NotImplemented
        return (
            self.sphere_sizes == other.sphere_sizes
            and self.terminal == other.terminal
            and all(np.array_equal(a, b) for a, b in zip(self.biadjacency, other.biadjacency))
        )

    def __repr__(self):
        return f"LayeredGraph(sphere_sizes={self.sphere_sizes}, edges={self.num_edges})"


@dataclass(frozen=True)
class MetricLayers:
    """Edge length per generation of a spherically homogeneous metric graph."""

    lengths: tuple[float, ...]

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.lengths)
        if not lengths or any(not np.isfinite(x) or x <= 0 for x in lengths):
            raise ValueError(f"edge lengths must be positive and finite, got {self.lengths}")
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def uniform(cls, depth: int, length: float = 1.0) -> MetricLayers:
        return cls((float(length),) * depth)

    @property
    def depth(self) -> int:
        return len(self.lengths)

    @property
    def breakpoints(self) -> np.ndarray:
        """Distances ``t_0 = 0 < t_1 < ... < t_N`` of the spheres from the root."""
        return np.concatenate([[0.0], np.cumsum(self.lengths)])

    @property
    def height(self) -> float:
        return float(self.breakpoints[-1])


def validate_graph(sphere_sizes, biadjacency, terminal=()) -> LayeredGraph:
    """Check raw sphere data and return an immutable :class:`LayeredGraph`.

    Parameters
    ----------
    sphere_sizes : sequence of int
        ``s_0, ..., s_N`` with ``s_0 == 1``.
    biadjacency : sequence of array_like
        ``N`` integer matrices, the ``n``-th of shape ``(s_{n+1}, s_n)``.
    terminal : iterable of (sphere, index)
        Vertices below the truncation sphere allowed to have no children.
    """
    sizes = tuple(int(s) for s in sphere_sizes)
    if not sizes or sizes[0] != 1:
        raise RootNotUnique(f"sphere 0 must hold exactly one vertex, got {sizes[:1]}")
    if any(s < 1 for s in sizes):
        raise ShapeMismatch(f"sphere sizes must be positive: {sizes}")
    if len(biadjacency) != len(sizes) - 1:
        raise ShapeMismatch(
            f"{len(sizes)} spheres need {len(sizes) - 1} biadjacency matrices, got {len(biadjacency)}"
        )
    terminal = frozenset((int(n), int(i)) for n, i in terminal)
    mats = []
    for n, raw in enumerate(biadjacency):
        b = np.asarray(raw)
        if b.ndim != 2 or b.shape != (sizes[n + 1], sizes[n]):
            raise ShapeMismatch(
                f"B_{n} has shape {b.shape}, expected {(sizes[n + 1], sizes[n])}"
            )
        if not np.issubdtype(b.dtype, np.integer):
            if not np.all(np.equal(np.mod(b, 1), 0)):
                raise ShapeMismatch(f"B_{n} has non-integer entries")
        b = b.astype(np.int64)
        if (b < 0).any():
            raise ShapeMismatch(f"B_{n} has negative entries")
        if (b > 1).any():
            w, v = np.argwhere(b > 1)[0]
            raise MultiEdge(f"B_{n}[{w}, {v}] = {b[w, v]}: multiple edges are not allowed")
        orphans = np.flatnonzero(b.sum(axis=1) == 0)
        if orphans.size:
            raise OrphanVertex(f"vertex {orphans[0]} of sphere {n + 1} has no parent")
        for v in np.flatnonzero(b.sum(axis=0) == 0):
            if (n, int(v)) not in terminal:
                raise DeadEndVertex(
                    f"vertex {v} of sphere {n} has no children and is not marked terminal"
                )
        mats.append(_frozen(b))
    return LayeredGraph(sizes, tuple(mats), terminal)


def _checked_matmul(a, b):
    bound = int(np.abs(a).max(initial=0)) * int(np.abs(b).max(initial=0)) * a.shape[1]
    if bound >= _INT64_SAFE:
        raise OverflowError("path count exceeds the int64 range")
    return a @ b


def path_count_matrix(g: LayeredGraph, n: int, m: int) -> np.ndarray:
    """Number of descending paths from each ``v`` in ``S_n`` to each ``u`` in ``S_m``.

    Returns the exact integer product ``B_{m-1} ... B_n`` of shape
    ``(s_m, s_n)``; the identity when ``n == m``.
    """
    if not 0 <= n <= m <= g.depth:
        raise IndexOutOfRange(f"need 0 <= n <= m <= {g.depth}, got n={n}, m={m}")
    out = np.eye(g.sphere_sizes[n], dtype=np.int64)
    for k in range(n, m):
        out = _checked_matmul(g.biadjacency[k], out)
    return out


def _relation(g, n, m):
    """Boolean comparability between ``S_n`` and ``S_m`` (rows ``S_m``)."""
    if n <= m:
        return path_count_matrix(g, n, m) > 0
    return (path_count_matrix(g, m, n) > 0).T


@dataclass(frozen=True)
class ConeProfile:
    """Combinatorial profile of the cones ``G_v`` for ``v`` in ``S_n``.

    ``g[j]`` and ``w[j]`` refer to the open band between ``t_j`` and
    ``t_{j+1}`` (the generation-``j`` edges); ``b_in[j]`` and ``b_out[j]``
    are the backward/forward degree of any vertex of ``S_j``.
    """

    n: int
    g: tuple[int, ...]
    w: tuple[int, ...]
    b_in: tuple[int, ...]
    b_out: tuple[int, ...]


def _common(values, what):
    values = np.unique(np.asarray(values))
    if values.size != 1:
        raise NotSymmetric(f"{what} differs across the sphere: {values.tolist()}")
    return int(values[0])


def cone_profiles(g: LayeredGraph, n: int) -> ConeProfile:
    """Cone sizes ``g_n^j``, slice multiplicities ``w_n^j`` and degrees.

    Every vertex of ``S_n`` (and every edge of a band) is used as a
    representative; disagreement raises :class:`NotSymmetric`.
    """
    if not 0 <= n <= g.depth:
        raise IndexOutOfRange(f"sphere {n} outside 0..{g.depth}")
    N = g.depth
    rel = [_relation(g, n, k) for k in range(N + 1)]  # rel[k]: (s_k, s_n)
    gvals, wvals = [], []
    for j in range(N):
        b = g.biadjacency[j]
        per_vertex = [
            int(b[np.ix_(rel[j + 1][:, v], rel[j][:, v])].sum()) for v in range(g.sphere_sizes[n])
        ]
        gvals.append(_common(per_vertex, f"g_{n} on band {j}"))
        if j >= n:
            # ancestors at level n of each parent
            counts = rel[j].sum(axis=1)
        else:
            # descendants at level n of each child
            counts = rel[j + 1].sum(axis=1)
        wvals.append(_common(counts, f"w_{n} on band {j}"))
    b_in = [_common(g.b_in(k), f"b_in of sphere {k}") for k in range(N + 1)]
    b_out = [_common(g.b_out(k), f"b_out of sphere {k}") for k in range(N + 1)]
    return ConeProfile(n, tuple(gvals), tuple(wvals), tuple(b_in), tuple(b_out))


def cone_sets(g: LayeredGraph, n: int, j: int) -> np.ndarray:
    """``G_x ∩ S_n`` for a point ``x`` inside each generation-``j`` edge.

    Returns a boolean array of shape ``(E_j, s_n)`` in :meth:`LayeredGraph.edges`
    order.
    """
    edges = g.edges(j)
    if n <= j:
        rel = _relation(g, n, j)  # (s_j, s_n)
        return rel[edges[:, 0]]
    rel = _relation(g, j + 1, n)  # (s_n, s_{j+1})
    return rel[:, edges[:, 1]].T


def to_dot(g: LayeredGraph, edge_labels=None, name: str = "G") -> str:
    """Graphviz source with one rank per sphere.

    ``edge_labels`` maps ``(generation, edge_index)`` to a label string.
    """
    lines = [f"graph {name} {{", "  rankdir=TB;", "  node [shape=circle, label=\"\", width=0.15];"]
    for n, s in enumerate(g.sphere_sizes):
        nodes = " ".join(f"v{n}_{i};" for i in range(s))
        lines.append(f"  {{ rank=same; {nodes} }}")
    for j in range(g.depth):
        for e, (p, c) in enumerate(g.edges(j)):
            attr = ""
            if edge_labels is not None and (j, e) in edge_labels:
                attr = f' [label="{edge_labels[(j, e)]}"]'
            lines.append(f"  v{j}_{p} -- v{j + 1}_{c}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
