"""Cyclic-subspace decomposition of the discrete Laplacian on family preserving graphs.

Starting from ``delta_o``, every sphere not yet spanned by earlier chains is
completed with joint eigenvectors of the go-and-return operators
``Lambda_{n,+-j}``; each such seed is pushed outward sphere by sphere to
form an orthonormal chain.  The chains together are an orthonormal basis
of ``l^2`` of the truncated graph in which the discrete Laplacian is block
tridiagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from .errors import (
    CompletenessFailure,
    IndexOutOfRange,
    NonCommuting,
    NotTridiagonal,
    SubspaceNotInvariant,
)
from .graph import LayeredGraph, path_count_matrix

CHAIN_CUTOFF = 1e-10


@dataclass(frozen=True, eq=False)
class SphereVector:
    """Complex vector supported on the sphere ``S_n``."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True, eq=False)
class Branch:
    """One cyclic subspace: seed sphere, orthonormal chain and Lambda eigenvalues.

    ``chain[k]`` lives on sphere ``n_r + k``; ``lambda_tags[j]`` is the
    eigenvalue of ``Lambda_{n_r, j}`` (signed ``j``) on the seed.
    """

    r: int
    n_r: int
    chain: tuple[SphereVector, ...]
    lambda_tags: dict

    @property
    def seed(self) -> SphereVector:
        return self.chain[0]

    def __len__(self):
        return len(self.chain)


@dataclass(frozen=True, eq=False)
class DiscreteDecomposition:
    branches: tuple[Branch, ...]
    graph: LayeredGraph

    @property
    def depth(self) -> int:
        return self.graph.depth

    def basis_matrix(self) -> np.ndarray:
        """All chain vectors as columns of one matrix, branch by branch."""
        cols = [embed(self.graph, v) for b in self.branches for v in b.chain]
        return np.column_stack(cols)

    def residuals(self) -> dict:
        """Orthonormality, completeness and Laplacian-coupling defects."""
        basis = self.basis_matrix()
        owner = np.concatenate([[i] * len(b) for i, b in enumerate(self.branches)])
        gram = basis.conj().T @ basis
        lap = basis.conj().T @ self.graph.discrete_laplacian() @ basis
        cross = owner[:, None] != owner[None, :]
        return {
            "dimension": basis.shape[1] - self.graph.num_vertices,
            "orthonormality": float(np.abs(gram - np.eye(basis.shape[1])).max()),
            "laplacian_coupling": float(np.abs(lap[cross]).max(initial=0.0)),
        }


def embed(g: LayeredGraph, v: SphereVector) -> np.ndarray:
    """Extend a sphere vector by zeros to all vertices (global ordering)."""
    out = np.zeros(g.num_vertices, dtype=complex)
    out[g.offsets[v.n]:g.offsets[v.n + 1]] = v.values
    return out


def e_matrix(g: LayeredGraph, n: int) -> np.ndarray:
    """Forward summation operator ``l^2(S_n) -> l^2(S_{n+1})``; this is ``B_n``."""
    if not 0 <= n < g.depth:
        raise IndexOutOfRange(f"E_{n} needs 0 <= n < {g.depth}")
    return g.biadjacency[n]


def lambda_op(g: LayeredGraph, n: int, j: int) -> np.ndarray:
    """Go-and-return operator on ``l^2(S_n)`` using ``|j|`` steps.

    ``j > 0`` walks ``j`` generations outward and back (needs ``n + j <= N``);
    ``j < 0`` walks ``|j|`` generations toward the root and back (needs
    ``|j| <= n``).  Exact integer result.
    """
    if j == 0:
        raise IndexOutOfRange("j must be nonzero")
    if j > 0:
        if n < 0 or n + j > g.depth:
            raise IndexOutOfRange(f"Lambda_{{{n},+{j}}} needs n + j <= {g.depth}")
        p = path_count_matrix(g, n, n + j)
        return p.T @ p
    if not 0 <= -j <= n <= g.depth:
        raise IndexOutOfRange(f"Lambda_{{{n},{j}}} needs |j| <= n")
    p = path_count_matrix(g, n + j, n)
    return p @ p.T


def lambda_indices(g: LayeredGraph, n: int) -> list[int]:
    """Signed ``j`` for which ``Lambda_{n,j}`` exists on the truncation."""
    return list(range(1, g.depth - n + 1)) + [-j for j in range(1, n + 1)]


def phase_normalize(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate ``v`` so that its first entry of non-negligible size is real positive."""
    big = np.flatnonzero(np.abs(v) > tol * max(1.0, np.abs(v).max(initial=0.0)))
    if big.size == 0:
        return v
    first = v[big[0]]
    return v * (abs(first) / first)


def _commutes(a, b, tol):
    c = a @ b - b @ a
    if np.issubdtype(c.dtype, np.integer):
        return not c.any()
    return np.abs(c).max(initial=0.0) <= tol


def joint_eigenbasis(mats, subspace=None, *, descending=False, rng=None, tol=1e-10):
    """Orthonormal basis of ``subspace`` made of joint eigenvectors of ``mats``.

    Parameters
    ----------
    mats : list of (d, d) symmetric matrices
        Pairwise commuting; ``subspace`` must be invariant under each.
    subspace : (d, m) array, optional
        Orthonormal columns; the whole space when omitted.
    descending : bool
        Order joint eigenspaces by decreasing instead of increasing
        eigenvalue tuple.
    rng : numpy Generator, optional
        If given, apply a random unitary inside every degenerate joint
        eigenspace (used to test choice independence).

    Returns
    -------
    vectors : (d, m) complex array
    eigenvalues : (m, len(mats)) float array
    """
    mats = [np.asarray(m) for m in mats]
    if not mats:
        raise ValueError("need at least one matrix")
    d = mats[0].shape[0]
    q = np.eye(d, dtype=complex) if subspace is None else np.asarray(subspace, dtype=complex)
    if q.shape[1] == 0:
        return q, np.zeros((0, len(mats)))
    for i, a in enumerate(mats):
        for b in mats[i + 1:]:
            if not _commutes(a, b, tol * max(1.0, np.abs(a).max() * np.abs(b).max())):
                raise NonCommuting("matrices do not commute")

    restricted = []
    for a in mats:
        a = a.astype(float)
        r = q.conj().T @ a @ q
        scale = max(1.0, np.abs(a).max())
        if np.abs(a @ q - q @ r).max() > tol * scale:
            raise SubspaceNotInvariant("subspace is not invariant under the family")
        restricted.append((r + r.conj().T) / 2)

    # refine clusters one matrix at a time
    clusters = [(np.eye(q.shape[1], dtype=complex), ())]
    for r in restricted:
        cluster_tol = 1e-8 * max(1.0, np.abs(r).max())
        refined = []
        for basis, tags in clusters:
            vals, vecs = np.linalg.eigh(basis.conj().T @ r @ basis)
            start = 0
            for k in range(1, len(vals) + 1):
                if k == len(vals) or vals[k] - vals[k - 1] > cluster_tol:
                    refined.append((basis @ vecs[:, start:k], tags + (float(vals[start:k].mean()),)))
                    start = k
        clusters = refined

    clusters.sort(key=lambda c: c[1], reverse=descending)
    vectors, eigenvalues = [], []
    for basis, tags in clusters:
        if rng is not None and basis.shape[1] > 1:
            basis = basis @ unitary_group.rvs(basis.shape[1], random_state=rng)
        for k in range(basis.shape[1]):
            vectors.append(phase_normalize(q @ basis[:, k]))
            eigenvalues.append(tags)
    return np.column_stack(vectors), np.array(eigenvalues)


def _complement(covered, size):
    if not covered:
        return np.eye(size, dtype=complex)
    c = np.column_stack(covered)
    if c.shape[1] > size:
        raise CompletenessFailure(f"{c.shape[1]} chain vectors on a sphere of size {size}")
    u, s, _ = np.linalg.svd(c, full_matrices=True)
    if np.abs(s - 1).max() > 1e-8:
        raise CompletenessFailure("chain vectors on a sphere are not orthonormal")
    return u[:, c.shape[1]:]


def decompose_discrete(g: LayeredGraph, *, rng=None) -> DiscreteDecomposition:
    """Split ``l^2`` of the truncated graph into cyclic subspaces.

    Branch ids follow (seed sphere, joint-eigenspace order); within a
    sphere, seeds with larger ``Lambda`` eigenvalues come first.  ``rng``
    re-mixes degenerate joint eigenspaces (see :func:`joint_eigenbasis`).
    """
    N = g.depth
    covered = [[] for _ in range(N + 1)]
    branches = []
    for n in range(N + 1):
        comp = _complement(covered[n], g.sphere_sizes[n])
        if comp.shape[1] == 0:
            continue
        js = lambda_indices(g, n)
        if js:
            seeds, tags = joint_eigenbasis(
                [lambda_op(g, n, j) for j in js], comp, descending=True, rng=rng
            )
        else:
            seeds, tags = comp, np.zeros((comp.shape[1], 0))
        for col in range(seeds.shape[1]):
            chain = [SphereVector(n, seeds[:, col])]
            v = seeds[:, col]
            for k in range(n, N):
                v = g.biadjacency[k] @ v
                norm = np.linalg.norm(v)
                if norm <= CHAIN_CUTOFF:
                    break
                v = v / norm
                chain.append(SphereVector(k + 1, v))
            for sv in chain:
                covered[sv.n].append(sv.values)
            # eigenvalues of integer matrices; drop round-off noise around 0
            lam = {j: 0.0 if abs(t) < 1e-9 else float(t) for j, t in zip(js, tags[col])}
            branches.append(Branch(len(branches), n, tuple(chain), lam))
    total = sum(len(b) for b in branches)
    if total != g.num_vertices:
        raise CompletenessFailure(f"chains span {total} dimensions, graph has {g.num_vertices}")
    return DiscreteDecomposition(tuple(branches), g)


@dataclass(frozen=True)
class JacobiData:
    """Tridiagonal matrix of the discrete Laplacian in a chain basis."""

    diagonal: np.ndarray
    offdiagonal: np.ndarray

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal) + np.diag(self.offdiagonal, 1) + np.diag(self.offdiagonal, -1)


def branch_jacobi(g: LayeredGraph, b: Branch, tol: float = 1e-10) -> JacobiData:
    """Diagonal ``<phi_k, L phi_k>`` and off-diagonal ``<phi_{k+1}, L phi_k>``."""
    phi = np.column_stack([embed(g, v) for v in b.chain])
    t = phi.conj().T @ g.discrete_laplacian() @ phi
    far = np.abs(np.triu(t, 2)).max(initial=0.0)
    if far > tol or np.abs(t.imag).max() > tol:
        raise NotTridiagonal(f"branch {b.r}: residual {max(far, np.abs(t.imag).max()):.3g}")
    return JacobiData(np.diag(t).real.copy(), np.diag(t, -1).real.copy())


__all__ = [
    "SphereVector",
    "Branch",
    "DiscreteDecomposition",
    "JacobiData",
    "e_matrix",
    "lambda_op",
    "lambda_indices",
    "joint_eigenbasis",
    "decompose_discrete",
    "branch_jacobi",
    "embed",
    "phase_normalize",
]
