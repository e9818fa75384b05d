"""Family-preservation test by automorphism search, plus the Lambda commutation check.

Rooted automorphisms preserve the distance to the root, so they are
tuples of per-sphere permutations ``P_n`` with ``P_{n+1} B_n P_n^T = B_n``.
The search assigns images vertex by vertex, checking adjacency against
every already-assigned neighbor, and backtracks on conflict.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discrete import lambda_indices, lambda_op
from .errors import SymmetrySearchTimeout
from .graph import LayeredGraph

DEFAULT_BUDGET = 10**7


@dataclass
class Witness:
    """Outcome for one neighbor pair.

    ``kind`` is ``"backward"`` (shallower spheres fixed) or ``"forward"``
    (deeper spheres fixed).  ``perms[n][i]`` is the image of vertex ``i`` of
    ``S_n``; ``None`` when no automorphism exists.
    """

    kind: str
    sphere: int
    pair: tuple[int, int]
    perms: list | None


@dataclass
class SymmetryVerdict:
    """``family_preserving`` is ``None`` when the search budget ran out."""

    family_preserving: bool | None
    witnesses: list = field(default_factory=list)
    checked_depth: int = 0
    nodes: int = 0

    @property
    def first_failure(self) -> Witness | None:
        return next((w for w in self.witnesses if w.perms is None), None)


class _Search:
    def __init__(self, g: LayeredGraph, budget: int):
        self.g = g
        self.budget = budget
        self.nodes = 0
        b_in = [g.b_in(n) for n in range(g.depth + 1)]
        b_out = [g.b_out(n) for n in range(g.depth + 1)]
        self.signature = [np.stack([b_in[n], b_out[n]], axis=1) for n in range(g.depth + 1)]

    def _consistent(self, perms, k, x, y):
        g = self.g
        if k > 0:
            b = g.biadjacency[k - 1]  # rows S_k, cols S_{k-1}
            done = perms[k - 1] >= 0
            if not np.array_equal(b[x, done], b[y, perms[k - 1][done]]):
                return False
        if k < g.depth:
            b = g.biadjacency[k]  # rows S_{k+1}, cols S_k
            done = perms[k + 1] >= 0
            if not np.array_equal(b[done, x], b[perms[k + 1][done], y]):
                return False
        return True

    def find(self, fixed, order, n, u, v):
        """Automorphism with ``u -> v`` on ``S_n`` fixing the spheres in ``fixed``."""
        g = self.g
        perms = [np.full(s, -1, dtype=np.int64) for s in g.sphere_sizes]
        used = [np.zeros(s, dtype=bool) for s in g.sphere_sizes]
        for k in fixed:
            perms[k][:] = np.arange(g.sphere_sizes[k])
            used[k][:] = True
        if not np.array_equal(self.signature[n][u], self.signature[n][v]):
            return None
        if not self._consistent(perms, n, u, v):
            return None
        perms[n][u] = v
        used[n][v] = True
        variables = [(k, x) for k in order for x in range(g.sphere_sizes[k]) if perms[k][x] < 0]

        def candidates(k, x):
            sig = self.signature[k]
            for y in np.flatnonzero(~used[k] & (sig == sig[x]).all(axis=1)):
                self.nodes += 1
                if self.nodes > self.budget:
                    raise SymmetrySearchTimeout(f"node budget {self.budget} exhausted")
                if self._consistent(perms, k, x, int(y)):
                    yield int(y)

        stack = []
        depth = 0
        while True:
            if depth == len(variables):
                return [p.tolist() for p in perms]
            if depth == len(stack):
                stack.append(candidates(*variables[depth]))
            k, x = variables[depth]
            if perms[k][x] >= 0:
                used[k][perms[k][x]] = False
                perms[k][x] = -1
            y = next(stack[depth], None)
            if y is None:
                stack.pop()
                depth -= 1
                if depth < 0:
                    return None
                continue
            perms[k][x] = y
            used[k][y] = True
            depth += 1


def _neighbor_pairs(g, n, kind):
    if kind == "backward":
        if n == 0:
            return []
        b = g.biadjacency[n - 1]
        share = b @ b.T
    else:
        if n == g.depth:
            return []
        b = g.biadjacency[n]
        share = b.T @ b
    u, v = np.nonzero(np.triu(share, 1))
    return list(zip(u.tolist(), v.tolist()))


def _root(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def check_family_preserving(g: LayeredGraph, budget: int = DEFAULT_BUDGET) -> SymmetryVerdict:
    """Decide family preservation of the truncated graph.

    For every pair of backward (forward) neighbors an automorphism exchanging
    them while fixing all shallower (deeper) spheres is searched.  Pairs
    already joined through earlier witnesses are skipped, since composing
    two such automorphisms gives another one.
    """
    search = _Search(g, budget)
    N = g.depth
    witnesses = []
    verdict = True
    try:
        for n in range(1, N + 1):
            for kind in ("backward", "forward"):
                if kind == "backward":
                    fixed, order = range(0, n), range(n, N + 1)
                else:
                    fixed, order = range(n + 1, N + 1), range(n, 0, -1)
                parent = list(range(g.sphere_sizes[n]))
                for u, v in _neighbor_pairs(g, n, kind):
                    if _root(parent, u) == _root(parent, v):
                        continue
                    perms = search.find(list(fixed), list(order), n, u, v)
                    witnesses.append(Witness(kind, n, (u, v), perms))
                    if perms is None:
                        verdict = False
                        break
                    parent[_root(parent, u)] = _root(parent, v)
                if not verdict:
                    break
            if not verdict:
                break
    except SymmetrySearchTimeout:
        return SymmetryVerdict(None, witnesses, N, search.nodes)
    return SymmetryVerdict(verdict, witnesses, N, search.nodes)


def is_automorphism(g: LayeredGraph, perms) -> bool:
    """True iff the per-sphere permutations preserve every biadjacency matrix."""
    for n, b in enumerate(g.biadjacency):
        p, q = np.asarray(perms[n]), np.asarray(perms[n + 1])
        permuted = np.zeros_like(b)
        permuted[np.ix_(q, p)] = b
        if not np.array_equal(permuted, b):
            return False
    return True


def check_lambda_commutation(g: LayeredGraph, n: int) -> tuple[bool, int]:
    """Do all ``Lambda_{n,+-j}`` available on the truncation commute?

    Returns the verdict and the largest absolute entry over all commutators
    (exact integers, 0 when commuting).
    """
    mats = [lambda_op(g, n, j) for j in lambda_indices(g, n)]
    worst = 0
    for i, a in enumerate(mats):
        for b in mats[i + 1:]:
            worst = max(worst, int(np.abs(a @ b - b @ a).max(initial=0)))
    return worst == 0, worst
