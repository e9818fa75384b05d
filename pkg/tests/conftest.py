"""Shared fixtures and brute-force oracles.

The oracles work on explicit vertex/edge lists and never call the library
routines they are used to check.
"""

from __future__ import annotations

import numpy as np
import pytest

from fpgraph import antitree, balance, gamma_tilde, path_graph, radial_tree
from fpgraph.graph import validate_graph

# the four presets of the spectral-equivalence check
PRESETS = {
    "path6": lambda: path_graph(6),
    "gamma5": lambda: gamma_tilde(5),
    "antitree12321": lambda: antitree((1, 2, 3, 2, 1)),
    "radial123": lambda: radial_tree((1, 2, 3), depth=4),
}


@pytest.fixture(params=sorted(PRESETS))
def preset(request):
    g, m = PRESETS[request.param]()
    return request.param, g, m


@pytest.fixture
def gamma():
    """Balanced Γ̃ of depth 5 with unit lengths."""
    g, m = gamma_tilde(5)
    res = balance(g, m)
    return res.graph, res.metric


# --- oracles ------------------------------------------------------------------


def children_lists(g):
    """``out[n][v]`` = children (indices in S_{n+1}) of vertex v of S_n."""
    return [[list(np.flatnonzero(b[:, v])) for v in range(b.shape[1])] for b in g.biadjacency]


def brute_paths(g, n, m):
    """Count descending paths S_n -> S_m by explicit depth-first enumeration."""
    kids = children_lists(g)
    out = np.zeros((g.sphere_sizes[m], g.sphere_sizes[n]), dtype=np.int64)

    def walk(level, v, start):
        if level == m:
            out[v, start] += 1
            return
        for c in kids[level][v]:
            walk(level + 1, c, start)

    for v in range(g.sphere_sizes[n]):
        walk(n, v, v)
    return out


def descendants(g, n, v, k):
    """Set of vertices of S_k below vertex v of S_n (k >= n)."""
    kids = children_lists(g)
    cur = {v}
    for level in range(n, k):
        cur = {c for x in cur for c in kids[level][x]}
    return cur


def ancestors(g, k, u, n):
    """Set of vertices of S_n above vertex u of S_k (n <= k)."""
    cur = {u}
    for level in range(k, n, -1):
        b = g.biadjacency[level - 1]
        cur = {int(p) for x in cur for p in np.flatnonzero(b[x])}
    return cur


def brute_g(g, n, v, j):
    """Generation-j edges inside the cone of vertex v of S_n."""
    count = 0
    for p in range(g.sphere_sizes[j]):
        for c in np.flatnonzero(g.biadjacency[j][:, p]):
            if j >= n:
                ok = p in descendants(g, n, v, j)
            else:
                ok = v in descendants(g, j + 1, int(c), n)
            count += ok
    return count


def relabel(g, rng):
    """Random within-sphere relabeling; returns the new graph and the permutations."""
    perms = [rng.permutation(s) for s in g.sphere_sizes]
    mats = []
    for n, b in enumerate(g.biadjacency):
        new = np.zeros_like(b)
        new[np.ix_(perms[n + 1], perms[n])] = b
        mats.append(new)
    return validate_graph(g.sphere_sizes, mats), perms


def dense_fd_spectrum(g, m, cells):
    """Lowest eigenvalues of the three-point Laplacian built edge by edge.

    A separate construction from :func:`fpgraph.spectral.fd_matrices`:
    global matrix over every vertex and interior point, then Dirichlet rows
    and columns dropped, dense symmetric solve with the lumped mass.
    """
    h = m.lengths[0] / cells
    counts = [int(round(l / h)) for l in m.lengths]
    offsets = np.concatenate([[0], np.cumsum(g.sphere_sizes)])
    n_nodes = int(offsets[-1]) + sum(g.edge_count(j) * (counts[j] - 1) for j in range(g.depth))
    K = np.zeros((n_nodes, n_nodes))
    mass = np.zeros(n_nodes)
    nxt = int(offsets[-1])
    for j in range(g.depth):
        b = g.biadjacency[j]
        for c, p in zip(*np.nonzero(b)):
            chain = [offsets[j] + p] + list(range(nxt, nxt + counts[j] - 1)) + [offsets[j + 1] + c]
            nxt += counts[j] - 1
            for x, y in zip(chain[:-1], chain[1:]):
                K[x, x] += 1 / h
                K[y, y] += 1 / h
                K[x, y] -= 1 / h
                K[y, x] -= 1 / h
                mass[x] += h / 2
                mass[y] += h / 2
    drop = {0} | set(range(int(offsets[-2]), int(offsets[-1])))
    keep = [i for i in range(n_nodes) if i not in drop]
    K = K[np.ix_(keep, keep)]
    s = 1 / np.sqrt(mass[keep])
    return np.linalg.eigvalsh(s[:, None] * K * s[None, :])
