"""Eigenvalues of reduced operators and of whole truncated metric graphs.

All spectra are reported as wavenumbers ``k`` (eigenvalue ``k**2``).

* Reduced operators: Prüfer angle of the solution with ``u(a) = 0``,
  ``u'(a) = 1``.  The angle advances by ``k * length`` on every interval and
  jumps ``(u, u'/k) -> (d u, c u'/k)`` keep it inside its quadrant, so the
  number of eigenvalues below ``k`` is ``floor(angle(b) / pi)``.
* Whole graph: vertex matrix ``M(k)`` (diagonal ``-sum k cot(k l)``,
  off-diagonal ``k / sin(k l)``) on the Kirchhoff vertices.  The eigenvalue
  count below ``k`` equals the Dirichlet edge count plus the number of
  positive eigenvalues of ``M(k)``; jumps of this count give roots and
  multiplicities, including roots at ``sin(k l) = 0``.
* Finite differences: lumped-mass second-order scheme, an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DegenerateWindow, MeshMisfit, ScanStepTooCoarse
from .graph import LayeredGraph, MetricLayers
from .reduction import ReducedOperator

ROOT_TOL = 1e-12
RESONANCE_GAP = 1e-6


@dataclass(frozen=True)
class SpectrumEntry:
    k: float
    multiplicity: int
    source: str

    @property
    def eigenvalue(self) -> float:
        return self.k**2


@dataclass(frozen=True)
class Spectrum:
    entries: tuple[SpectrumEntry, ...]
    k_max: float

    def expanded(self) -> np.ndarray:
        """Wavenumbers repeated according to multiplicity."""
        return np.array([e.k for e in self.entries for _ in range(e.multiplicity)])

    def count_below(self, k: float) -> int:
        return sum(e.multiplicity for e in self.entries if e.k < k)

    def __len__(self):
        return sum(e.multiplicity for e in self.entries)


def _merge(ks, mults, source, k_max, tol=1e-10):
    entries = []
    for k, mlt in sorted(zip(ks, mults)):
        if entries and k - entries[-1].k <= tol:
            prev = entries.pop()
            entries.append(SpectrumEntry(prev.k, prev.multiplicity + mlt, source))
        else:
            entries.append(SpectrumEntry(float(k), int(mlt), source))
    return Spectrum(tuple(entries), float(k_max))


# --- reduced operators ------------------------------------------------------


def transfer_matrix(op: ReducedOperator, k: float) -> np.ndarray:
    """Map ``(u(a), u'(a)) -> (u(b-), u'(b-))`` for ``-u'' = k^2 u``."""
    t = np.eye(2)
    for idx, l in enumerate(op.interval_lengths):
        if idx > 0:
            d, c = op.jump_at(op.a_index + idx)
            t = np.diag([d, c]) @ t
        s, co = math.sin(k * l), math.cos(k * l)
        t = np.array([[co, s / k], [-k * s, co]]) @ t
    return t


def shooting_value(op: ReducedOperator, k: float) -> float:
    """``u(b)`` for the solution with ``u(a) = 0`` and ``u'(a) = 1``."""
    return float(transfer_matrix(op, k)[0, 1])


def prufer_angle(op: ReducedOperator, k: float) -> float:
    """Continuous angle of ``(u, u'/k)`` at ``b``; starts at 0 in ``a``."""
    theta = 0.0
    for idx, l in enumerate(op.interval_lengths):
        if idx > 0:
            d, c = op.jump_at(op.a_index + idx)
            turns = math.floor(theta / math.pi)
            rest = theta - turns * math.pi
            theta = turns * math.pi + math.atan2(d * math.sin(rest), c * math.cos(rest))
        theta += k * l
    return theta


def reduced_spectrum(op: ReducedOperator, k_max: float, tol: float = ROOT_TOL) -> Spectrum:
    """All ``k`` in ``(0, k_max]`` with ``u(b) = 0``; every root is simple."""
    length = op.b - op.a
    if length <= 0:
        raise DegenerateWindow(f"branch {op.r}: window [{op.a}, {op.b}] is empty")
    step = math.pi / (8 * length)
    grid = np.append(np.arange(step, k_max, step), k_max)
    angles = np.array([prufer_angle(op, k) for k in grid])
    top = int(math.floor(angles[-1] / math.pi + 1e-15))
    roots = []
    for mode in range(1, top + 1):
        target = mode * math.pi
        hi_idx = int(np.searchsorted(angles, target, side="left"))
        lo_idx = max(hi_idx - 1, 0)
        lo = 0.0 if hi_idx == 0 else grid[lo_idx]
        hi = grid[hi_idx]
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if prufer_angle(op, mid) >= target:
                hi = mid
            else:
                lo = mid
        roots.append(0.5 * (lo + hi))
    return Spectrum(tuple(SpectrumEntry(float(k), 1, f"branch-{op.r}") for k in roots), float(k_max))


# --- whole graph: vertex secular matrix -------------------------------------


def _kirchhoff_vertices(g):
    """Global indices of vertices carrying Kirchhoff conditions (not root, not ``S_N``)."""
    return np.arange(g.offsets[1], g.offsets[g.depth])


def secular_matrix(g: LayeredGraph, m: MetricLayers, k: float) -> np.ndarray:
    """Vertex matrix ``M(k)`` on the Kirchhoff vertices (undefined where ``sin(k l) = 0``)."""
    inner = _kirchhoff_vertices(g)
    pos = {int(v): i for i, v in enumerate(inner)}
    mat = np.zeros((len(inner), len(inner)))
    for j in range(g.depth):
        kl = k * m.lengths[j]
        cot, csc = math.cos(kl) / math.sin(kl), 1.0 / math.sin(kl)
        for p, c in g.edges(j):
            u, v = g.global_index(j, p), g.global_index(j + 1, c)
            iu, iv = pos.get(u), pos.get(v)
            if iu is not None:
                mat[iu, iu] -= k * cot
            if iv is not None:
                mat[iv, iv] -= k * cot
            if iu is not None and iv is not None:
                mat[iu, iv] += k * csc
                mat[iv, iu] += k * csc
    return mat


def dirichlet_count(g: LayeredGraph, m: MetricLayers, k: float) -> int:
    """Eigenvalues below ``k`` of the edges decoupled by Dirichlet conditions."""
    return sum(
        g.edge_count(j) * max(math.ceil(k * m.lengths[j] / math.pi) - 1, 0) for j in range(g.depth)
    )


def eigen_count(g: LayeredGraph, m: MetricLayers, k: float) -> int:
    """Number of graph eigenvalues (with multiplicity) with wavenumber below ``k``.

    Valid for ``k`` away from the points ``sin(k l_j) = 0``.
    """
    mat = secular_matrix(g, m, k)
    positive = int((np.linalg.eigvalsh(mat) > 0).sum()) if mat.size else 0
    return dirichlet_count(g, m, k) + positive


def resonance_points(m: MetricLayers, k_max: float) -> np.ndarray:
    """Wavenumbers ``j pi / l`` below ``k_max`` where ``M(k)`` is singular."""
    pts = set()
    for l in set(m.lengths):
        for q in range(1, int(k_max * l / math.pi) + 1):
            pts.add(q * math.pi / l)
    out = []
    for p in sorted(pts):
        # j pi / l from different lengths can agree up to round-off
        if p < k_max and (not out or p - out[-1] > 1e-9 * p):
            out.append(p)
    return np.array(out)


def _resonant(m, k, tol=1e-12):
    return any(abs(math.sin(k * l)) < tol for l in m.lengths)


def _check_resonant_root(g, m, p, jump):
    """Roots assigned to the resonance ``p`` must really sit there."""
    dim = kernel_dimension(g, m, p)
    if dim != jump:
        raise ScanStepTooCoarse(
            f"{jump} eigenvalues within {RESONANCE_GAP} of k={p}, but only {dim} at k={p}"
        )


def _isolate(count, lo, hi, c_lo, c_hi, tol, out):
    """Split ``[lo, hi]`` until every jump of ``count`` is pinned to ``tol``."""
    stack = [(lo, hi, c_lo, c_hi)]
    while stack:
        lo, hi, c_lo, c_hi = stack.pop()
        if c_hi == c_lo:
            continue
        if hi - lo <= tol:
            out.append((0.5 * (lo + hi), c_hi - c_lo))
            continue
        mid = 0.5 * (lo + hi)
        c_mid = count(mid)
        stack.append((mid, hi, c_mid, c_hi))
        stack.append((lo, mid, c_lo, c_mid))


def full_spectrum_secular(
    g: LayeredGraph, m: MetricLayers, k_max: float, tol: float = ROOT_TOL, step: float | None = None
) -> Spectrum:
    """Graph eigenvalues in ``(0, k_max]``, Dirichlet at the root and at ``S_N``."""
    if m.depth != g.depth:
        raise ValueError("metric and graph depth differ")
    step = math.pi / (8 * m.height) if step is None else step
    # Near a resonance M(k) has entries ~1/delta, so its eigenvalues carry
    # round-off ~eps/delta while those it must resolve are ~delta.
    delta = RESONANCE_GAP
    count = lambda k: eigen_count(g, m, k)  # noqa: E731
    cuts = [0.0, *resonance_points(m, k_max), k_max]
    roots = []
    prev_count = 0
    for idx in range(len(cuts) - 1):
        left, right = cuts[idx], cuts[idx + 1]
        lo = left + delta if idx > 0 else min(step, right) * 1e-3
        hi = right - delta if idx + 1 < len(cuts) - 1 or _resonant(m, right) else right
        c_lo = count(lo)
        if idx > 0 and c_lo != prev_count:
            _check_resonant_root(g, m, left, c_lo - prev_count)
            roots.append((left, c_lo - prev_count))
        n_cells = max(1, math.ceil((hi - lo) / step))
        grid = np.linspace(lo, hi, n_cells + 1)
        c_prev = c_lo
        for a, b in zip(grid[:-1], grid[1:]):
            c_b = count(b)
            if c_b < c_prev:
                raise ScanStepTooCoarse(f"eigenvalue count decreased on [{a}, {b}]")
            _isolate(count, a, b, c_prev, c_b, tol, roots)
            c_prev = c_b
        prev_count = c_prev
    if _resonant(m, k_max):
        at_end = kernel_dimension(g, m, k_max)
        if at_end:
            roots.append((k_max, at_end))
            prev_count += at_end
    total = sum(mult for _, mult in roots)
    if total != prev_count:
        raise ScanStepTooCoarse(f"isolated {total} eigenvalues, count function says {prev_count}")
    return _merge([k for k, _ in roots], [mult for _, mult in roots], "full-secular", k_max)


def amplitude_matrix(g: LayeredGraph, m: MetricLayers, k: float) -> np.ndarray:
    """Square system for edge amplitudes ``f_e = A cos(kx) + B sin(kx)``.

    Rows: Dirichlet values at root and ``S_N``, continuity and Kirchhoff at
    every other vertex.  Singular exactly at eigenvalues, for every ``k > 0``.
    """
    edges = [(j, int(p), int(c)) for j in range(g.depth) for p, c in g.edges(j)]
    n_e = len(edges)
    ends = {}
    for e, (j, p, c) in enumerate(edges):
        kl = k * m.lengths[j]
        s, co = math.sin(kl), math.cos(kl)
        # (value row, outgoing-derivative / k row) for each end
        ends.setdefault(g.global_index(j, p), []).append((e, (1.0, 0.0), (0.0, 1.0)))
        ends.setdefault(g.global_index(j + 1, c), []).append((e, (co, s), (s, -co)))
    rows = []
    dirichlet = set(range(g.offsets[1])) | set(range(g.offsets[g.depth], g.offsets[-1]))
    for v, incident in ends.items():
        if v in dirichlet:
            for e, val, _ in incident:
                row = np.zeros(2 * n_e)
                row[2 * e:2 * e + 2] = val
                rows.append(row)
            continue
        e0, val0, _ = incident[0]
        for e, val, _ in incident[1:]:
            row = np.zeros(2 * n_e)
            row[2 * e:2 * e + 2] = val
            row[2 * e0:2 * e0 + 2] -= val0
            rows.append(row)
        row = np.zeros(2 * n_e)
        for e, _, der in incident:
            row[2 * e:2 * e + 2] += der
        rows.append(row)
    return np.array(rows)


def kernel_dimension(g: LayeredGraph, m: MetricLayers, k: float, tol: float = 1e-8) -> int:
    s = np.linalg.svd(amplitude_matrix(g, m, k), compute_uv=False)
    return int((s < tol * s[0]).sum())


def secular_residual(g: LayeredGraph, m: MetricLayers, k: float, multiplicity: int = 1) -> float:
    """``multiplicity``-th smallest singular value of the amplitude system, scaled."""
    s = np.linalg.svd(amplitude_matrix(g, m, k), compute_uv=False)
    return float(s[-multiplicity] / s[0])


# --- finite differences -----------------------------------------------------


def fd_matrices(g: LayeredGraph, m: MetricLayers, h: float):
    """Stiffness and lumped mass on the uniform mesh of width ``h``.

    Returns ``(K, mass)`` over the free nodes (Dirichlet nodes removed).
    """
    cells = []
    for l in m.lengths:
        q = l / h
        if abs(q - round(q)) > 1e-9 * max(1.0, q) or round(q) < 1:
            raise MeshMisfit(f"mesh width {h} does not divide edge length {l}")
        cells.append(int(round(q)))
    n_vertices = g.num_vertices
    segments = []
    next_node = n_vertices
    for j in range(g.depth):
        for p, c in g.edges(j):
            nodes = [g.global_index(j, p)]
            nodes += list(range(next_node, next_node + cells[j] - 1))
            next_node += cells[j] - 1
            nodes.append(g.global_index(j + 1, c))
            segments.extend(zip(nodes[:-1], nodes[1:]))
    seg = np.array(segments)
    n_nodes = next_node
    w = 1.0 / h
    rows = np.concatenate([seg[:, 0], seg[:, 1], seg[:, 0], seg[:, 1]])
    cols = np.concatenate([seg[:, 0], seg[:, 1], seg[:, 1], seg[:, 0]])
    data = np.concatenate([np.full(len(seg), w)] * 2 + [np.full(len(seg), -w)] * 2)
    stiffness = sp.csr_matrix((data, (rows, cols)), shape=(n_nodes, n_nodes))
    mass = np.bincount(seg.ravel(), minlength=n_nodes) * (h / 2)
    dirichlet = np.concatenate([np.arange(g.offsets[1]), np.arange(g.offsets[g.depth], g.offsets[-1])])
    free = np.setdiff1d(np.arange(n_nodes), dirichlet)
    return stiffness[free][:, free], mass[free]


def full_spectrum_fd(g: LayeredGraph, m: MetricLayers, h: float, count: int) -> Spectrum:
    """Lowest ``count`` eigenvalues of the finite-difference Laplacian (O(h^2) accurate)."""
    stiffness, mass = fd_matrices(g, m, h)
    scale = sp.diags(1.0 / np.sqrt(mass))
    a = (scale @ stiffness @ scale).tocsc()
    count = min(count, a.shape[0] - 1)
    if a.shape[0] <= 400:
        vals = np.linalg.eigvalsh(a.toarray())[:count]
    else:
        # seeded generic start vector: reproducible, and (unlike a constant
        # one) not trapped in the symmetric invariant subspace; the wide
        # Krylov space copes with degenerate clusters
        n = a.shape[0]
        v0 = np.random.default_rng(0).standard_normal(n)
        ncv = min(n - 1, max(4 * count, 40))
        vals = np.sort(spla.eigsh(a, k=count, sigma=0.0, which="LM", v0=v0, ncv=ncv, return_eigenvectors=False))
    ks = np.sqrt(np.clip(vals, 0.0, None))
    groups = []
    for k in ks:
        if groups and k - groups[-1][0] <= 1e-8 * max(1.0, k):
            groups[-1][1] += 1
        else:
            groups.append([k, 1])
    entries = tuple(SpectrumEntry(float(k), mult, "full-fd") for k, mult in groups)
    return Spectrum(entries, float(ks[-1]) if len(ks) else 0.0)


# --- comparison -------------------------------------------------------------


@dataclass
class ComparisonReport:
    matched: list = field(default_factory=list)  # (k_full, k_part, source)
    unmatched_full: list = field(default_factory=list)
    unmatched_parts: list = field(default_factory=list)  # (k, source)
    max_deviation: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.unmatched_full and not self.unmatched_parts


def compare_spectra(full: Spectrum, parts, tol: float) -> ComparisonReport:
    """Match the multiset union of ``parts`` against ``full`` within ``tol`` in ``k``."""
    a = sorted(full.expanded().tolist())
    b = sorted((e.k, e.source) for s in parts for e in s.entries for _ in range(e.multiplicity))
    report = ComparisonReport()
    i = j = 0
    while i < len(a) and j < len(b):
        dev = abs(a[i] - b[j][0])
        if dev <= tol:
            report.matched.append((a[i], b[j][0], b[j][1]))
            report.max_deviation = max(report.max_deviation, dev)
            i += 1
            j += 1
        elif a[i] < b[j][0]:
            report.unmatched_full.append(a[i])
            i += 1
        else:
            report.unmatched_parts.append(b[j])
            j += 1
    report.unmatched_full.extend(a[i:])
    report.unmatched_parts.extend(b[j:])
    return report
