"""Preset builders for the graph families used throughout the package."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BranchTooSmall, InvalidParams, NotATree
from .graph import LayeredGraph, MetricLayers, validate_graph


def _metric(depth, lengths):
    if np.isscalar(lengths):
        return MetricLayers.uniform(depth, float(lengths))
    lengths = tuple(lengths)
    if len(lengths) != depth:
        raise InvalidParams(f"{len(lengths)} lengths given for depth {depth}")
    return MetricLayers(lengths)


def path_graph(depth: int, lengths=1.0):
    """A single ray of ``depth`` edges."""
    if depth < 1:
        raise InvalidParams("depth must be >= 1")
    g = validate_graph((1,) * (depth + 1), [np.ones((1, 1), dtype=int)] * depth)
    return g, _metric(depth, lengths)


def radial_tree(branching, depth: int | None = None, lengths=1.0):
    """Spherically symmetric tree; every vertex of ``S_k`` has ``branching[k]`` children.

    Generations past ``len(branching)`` (when ``depth`` is larger) continue
    with a single child per vertex.  Children of one parent get consecutive
    indices, ordered by parent index.
    """
    branching = [int(b) for b in branching]
    depth = len(branching) if depth is None else int(depth)
    if depth < 1 or any(b < 1 for b in branching):
        raise InvalidParams(f"bad radial tree parameters: branching={branching}, depth={depth}")
    branching = (branching + [1] * depth)[:depth]
    sizes = [1]
    mats = []
    for b in branching:
        s = sizes[-1]
        mat = np.zeros((s * b, s), dtype=int)
        for parent in range(s):
            mat[parent * b:(parent + 1) * b, parent] = 1
        mats.append(mat)
        sizes.append(s * b)
    return validate_graph(sizes, mats), _metric(depth, lengths)


def antitree(sizes, lengths=1.0):
    """All possible edges between consecutive spheres of the given sizes."""
    sizes = [int(s) for s in sizes]
    if len(sizes) < 2 or sizes[0] != 1 or any(s < 1 for s in sizes):
        raise InvalidParams(f"antitree sizes must start with 1 and be positive: {sizes}")
    mats = [np.ones((sizes[n + 1], sizes[n]), dtype=int) for n in range(len(sizes) - 1)]
    return validate_graph(sizes, mats), _metric(len(sizes) - 1, lengths)


def gamma_tilde(depth: int = 5, lengths=1.0):
    """Root, one vertex, two children joined completely to two grandchildren, then two rays.

    Spheres are ``(1, 1, 2, 2, ..., 2)``; this is the running example of
    the decomposition procedure before balancing.
    """
    if depth < 3:
        raise InvalidParams("gamma_tilde needs depth >= 3")
    mats = [np.ones((1, 1), int), np.ones((2, 1), int), np.ones((2, 2), int)]
    mats += [np.eye(2, dtype=int)] * (depth - 3)
    return validate_graph((1, 1) + (2,) * (depth - 1), mats), _metric(depth, lengths)


def cyclic_graph(depth: int = 4, lengths=1.0):
    """Spherically symmetric graph that is not family preserving.

    The root has four children ``v_i``; ``v_i`` is joined to ``w_i`` and
    ``w_{i+1}`` (indices mod 4); every ``w_i`` continues as a ray.
    """
    if depth < 2:
        raise InvalidParams("cyclic_graph needs depth >= 2")
    ring = np.zeros((4, 4), int)
    for v in range(4):
        ring[v, v] = 1
        ring[(v + 1) % 4, v] = 1
    mats = [np.ones((4, 1), int), ring] + [np.eye(4, dtype=int)] * (depth - 2)
    return validate_graph((1,) + (4,) * depth, mats), _metric(depth, lengths)


def sphere_product(g1: LayeredGraph, g2: LayeredGraph) -> LayeredGraph:
    """Tensor product of two layered graphs of equal depth (``S_n = S_n^1 x S_n^2``).

    Best effort: family preservation of the factors is usually, not
    provably, inherited; run :func:`fpgraph.symmetry.check_family_preserving`.
    """
    if g1.depth != g2.depth:
        raise InvalidParams("sphere_product needs graphs of equal depth")
    sizes = [a * b for a, b in zip(g1.sphere_sizes, g2.sphere_sizes)]
    mats = [np.kron(a, b) for a, b in zip(g1.biadjacency, g2.biadjacency)]
    return validate_graph(sizes, mats)


@dataclass(frozen=True)
class Preset:
    """Named graph family plus its parameters.

    ``kind`` is one of ``path``, ``radial_tree``, ``antitree``,
    ``gamma_tilde``, ``cyclic`` or ``custom`` (``params["graph"]`` holds a
    JSON graph document).
    """

    kind: str
    params: dict = field(default_factory=dict)
    lengths: object = 1.0


def generate(p: Preset):
    """Build ``(graph, metric)`` for a preset."""
    kw = dict(p.params)
    if p.kind == "path":
        return path_graph(kw.get("depth", 4), p.lengths)
    if p.kind == "radial_tree":
        return radial_tree(kw["branching"], kw.get("depth"), p.lengths)
    if p.kind == "antitree":
        return antitree(kw["sizes"], p.lengths)
    if p.kind == "gamma_tilde":
        return gamma_tilde(kw.get("depth", 5), p.lengths)
    if p.kind == "cyclic":
        return cyclic_graph(kw.get("depth", 4), p.lengths)
    if p.kind == "custom":
        from .io import graph_from_dict

        g, m = graph_from_dict(kw["graph"])
        if m is None:
            m = _metric(g.depth, p.lengths)
        return g, m
    raise InvalidParams(f"unknown preset kind {p.kind!r}")


def is_tree(g: LayeredGraph) -> bool:
    return all(int(b.sum(axis=1).max()) == 1 for b in g.biadjacency)


def ns_reference_vector(tree: LayeredGraph, v, s: int):
    """Root-of-unity vector on the children of ``v = (sphere, index)``.

    The ``j``-th child (in index order) gets ``exp(2 pi i j s / b) / sqrt(b)``
    with ``b`` the number of children of ``v``.
    """
    from .discrete import SphereVector

    if not is_tree(tree):
        raise NotATree("reference vectors are defined on trees only")
    n, idx = int(v[0]), int(v[1])
    if not 0 <= n < tree.depth or not 0 <= idx < tree.sphere_sizes[n]:
        raise InvalidParams(f"vertex {v} has no children in the truncation")
    children = np.flatnonzero(tree.biadjacency[n][:, idx])
    b = children.size
    if b < 2:
        raise BranchTooSmall(f"vertex {v} has {b} child(ren); need at least 2")
    if not 1 <= s <= b - 1:
        raise InvalidParams(f"s must lie in 1..{b - 1}, got {s}")
    omega = np.exp(2j * np.pi / b)
    values = np.zeros(tree.sphere_sizes[n + 1], dtype=complex)
    values[children] = omega ** (s * np.arange(1, b + 1)) / np.sqrt(b)
    return SphereVector(n + 1, values)
