"""From discrete branches to one-dimensional weighted Laplacians.

Each branch seed ``phi`` on ``S_n`` is spread over the metric graph as an
edge weight ``h`` (constant along every edge).  Functions of the form
``u(|x|) h(x)`` form an invariant subspace of the graph Laplacian, and the
map to ``u`` turns the Laplacian into ``-u''`` on an interval with jump
conditions ``u(t_j+) = d_j u(t_j-)``, ``u'(t_j+) = c_j u'(t_j-)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import simpson

from .discrete import Branch, DiscreteDecomposition, SphereVector
from .errors import ConstancyViolation, EmptySupport, GridMismatch, IndexOutOfRange
from .graph import ConeProfile, LayeredGraph, MetricLayers, cone_profiles, cone_sets

WEIGHT_ZERO = 1e-12


@dataclass(frozen=True, eq=False)
class EdgeWeights:
    """Per-edge value of the spread seed; ``values[j]`` follows ``g.edges(j)``."""

    r: int
    n: int
    values: tuple[np.ndarray, ...]

    def slice_norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(v) for v in self.values])

    def nonzero_generations(self) -> np.ndarray:
        return np.flatnonzero([np.abs(v).max(initial=0.0) > WEIGHT_ZERO for v in self.values])

    def as_labels(self, fmt="{:.4g}") -> dict:
        """``{(generation, edge): label}`` for :func:`fpgraph.graph.to_dot`."""
        labels = {}
        for j, vals in enumerate(self.values):
            for e, h in enumerate(vals):
                z = complex(h)
                labels[(j, e)] = fmt.format(z.real) if abs(z.imag) < 1e-14 else fmt.format(z)
        return labels


def lift_vector(
    g: LayeredGraph, phi: SphereVector, profile: ConeProfile | None = None, *, r: int = -1,
    check_constancy: bool = False, tol: float = 1e-10,
) -> EdgeWeights:
    """Spread ``phi`` over the edges: sum over ``G_x ∩ S_n``, scaled by ``1/sqrt(g w)``."""
    n = phi.n
    profile = cone_profiles(g, n) if profile is None else profile
    values = []
    for j in range(g.depth):
        sets = cone_sets(g, n, j)
        sums = sets @ phi.values
        counts = sets.sum(axis=1)
        if check_constancy:
            for e in np.flatnonzero(np.abs(sums) > tol):
                on = phi.values[sets[e]]
                if np.abs(on - on[0]).max() > tol:
                    raise ConstancyViolation(
                        f"seed of branch {r} is not constant on the cone of edge {e} (generation {j})"
                    )
        gj = profile.g[j]
        if gj == 0:
            values.append(np.zeros(len(sums), dtype=complex))
            continue
        h = sums / np.sqrt(gj * np.maximum(counts, 1))
        h[np.abs(h) <= WEIGHT_ZERO] = 0.0
        values.append(h)
    return EdgeWeights(r, n, tuple(values))


def lift_weights(g: LayeredGraph, b: Branch, profile: ConeProfile | None = None) -> EdgeWeights:
    """Edge weights of a branch seed, checking that the seed is constant on cones."""
    return lift_vector(g, b.seed, profile, r=b.r, check_constancy=True)


def support_window(g: LayeredGraph, b: Branch, w: EdgeWeights) -> tuple[int, int]:
    """Sphere indices ``(a, b)`` with ``t_a, t_b`` the ends of the support.

    ``a = n_r - 1`` (``0`` for a seed at the root); ``b`` is one past the last
    generation carrying a nonzero weight.
    """
    nz = w.nonzero_generations()
    if nz.size == 0:
        raise EmptySupport(f"branch {b.r} has identically zero weights")
    return max(b.n_r - 1, 0), int(nz[-1]) + 1


@dataclass(frozen=True)
class Jump:
    """Matching data at ``t_j``; ``d_sq`` and ``c_sq`` are exact squares."""

    j: int
    d: float
    c: float
    d_sq: Fraction
    c_sq: Fraction


def _sqrt(q: Fraction) -> float:
    # sqrt of the exact rational, correctly rounded for moderate sizes
    return math.sqrt(q.numerator) / math.sqrt(q.denominator) if q else 0.0


def jump_data(g: LayeredGraph, b: Branch, profile: ConeProfile | None = None, window=None) -> list[Jump]:
    """``(j, d_j, c_j)`` for every interior breakpoint of the branch window."""
    profile = cone_profiles(g, b.n_r) if profile is None else profile
    if window is None:
        window = support_window(g, b, lift_weights(g, b, profile))
    a_idx, b_idx = window
    if not 0 <= a_idx < b_idx <= g.depth:
        raise IndexOutOfRange(f"window {window} outside 0..{g.depth}")
    gg, ww = profile.g, profile.w
    out = []
    for j in range(max(b.n_r, a_idx + 1), b_idx):
        c_sq = Fraction(ww[j] * gg[j - 1], ww[j - 1] * gg[j])
        d_sq = c_sq * Fraction(profile.b_out[j] ** 2, profile.b_in[j] ** 2)
        out.append(Jump(j, _sqrt(d_sq), _sqrt(c_sq), d_sq, c_sq))
    return out


@dataclass(frozen=True)
class ReducedOperator:
    """``-u''`` on ``[a, b]``, Dirichlet at both ends, jumps at interior breakpoints."""

    r: int
    n_r: int
    a_index: int
    b_index: int
    breakpoints: tuple[float, ...]  # t_{a_index} .. t_{b_index}
    jumps: tuple[Jump, ...]

    @property
    def a(self) -> float:
        return self.breakpoints[0]

    @property
    def b(self) -> float:
        return self.breakpoints[-1]

    @property
    def interval_lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def jump_at(self, j: int) -> tuple[float, float]:
        for jump in self.jumps:
            if jump.j == j:
                return jump.d, jump.c
        return 1.0, 1.0


def build_reduced_operator(
    g: LayeredGraph, m: MetricLayers, b: Branch, profile: ConeProfile | None = None
) -> ReducedOperator:
    """Assemble the one-dimensional operator of a branch."""
    if m.depth != g.depth:
        raise ValueError("metric and graph depth differ")
    profile = cone_profiles(g, b.n_r) if profile is None else profile
    w = lift_weights(g, b, profile)
    window = support_window(g, b, w)
    jumps = jump_data(g, b, profile, window)
    t = m.breakpoints
    return ReducedOperator(
        b.r, b.n_r, window[0], window[1], tuple(float(x) for x in t[window[0]:window[1] + 1]), tuple(jumps)
    )


def reduce_decomposition(g: LayeredGraph, m: MetricLayers, dec: DiscreteDecomposition) -> list[ReducedOperator]:
    profiles = {}
    ops = []
    for b in dec.branches:
        if b.n_r not in profiles:
            profiles[b.n_r] = cone_profiles(g, b.n_r)
        ops.append(build_reduced_operator(g, m, b, profiles[b.n_r]))
    return ops


# --- sampled functions on the metric graph ---------------------------------


@dataclass(frozen=True, eq=False)
class SampledGraphFunction:
    """Samples on ``M + 1`` equally spaced points per edge, endpoints included.

    ``values[j]`` has shape ``(E_j, M + 1)``; all edges of a generation share
    the same parameter grid.
    """

    values: tuple[np.ndarray, ...]
    M: int

    @classmethod
    def zeros(cls, g: LayeredGraph, M: int = 64) -> SampledGraphFunction:
        return cls(tuple(np.zeros((g.edge_count(j), M + 1), dtype=complex) for j in range(g.depth)), M)

    @classmethod
    def from_callable(cls, g: LayeredGraph, m: MetricLayers, func, M: int = 64) -> SampledGraphFunction:
        """``func(j, e, t)`` evaluated on the grid, ``t`` the distance to the root."""
        t0 = m.breakpoints
        values = []
        for j in range(g.depth):
            t = t0[j] + m.lengths[j] * np.linspace(0.0, 1.0, M + 1)
            values.append(np.array([func(j, e, t) for e in range(g.edge_count(j))], dtype=complex))
        return cls(tuple(values), M)

    def __add__(self, other):
        return SampledGraphFunction(tuple(a + b for a, b in zip(self.values, other.values)), self.M)

    def __sub__(self, other):
        return SampledGraphFunction(tuple(a - b for a, b in zip(self.values, other.values)), self.M)

    def __mul__(self, s):
        return SampledGraphFunction(tuple(a * s for a in self.values), self.M)

    __rmul__ = __mul__


def _check_grid(g, f):
    if len(f.values) != g.depth or any(
        v.shape != (g.edge_count(j), f.M + 1) for j, v in enumerate(f.values)
    ):
        raise GridMismatch("sampled function does not match the graph's edges")
    if f.M < 2 or f.M % 2:
        raise GridMismatch("Simpson quadrature needs an even number M >= 2 of subintervals")


def inner(m: MetricLayers, f: SampledGraphFunction, h: SampledGraphFunction) -> complex:
    """Quadrature approximation of the ``L^2`` inner product ``∫ f conj(h)``."""
    total = 0j
    for j, (a, b) in enumerate(zip(f.values, h.values)):
        total += simpson((a * b.conj()).sum(axis=0), dx=m.lengths[j] / f.M)
    return total


def norm(m: MetricLayers, f: SampledGraphFunction) -> float:
    return math.sqrt(max(inner(m, f, f).real, 0.0))


def project(g: LayeredGraph, m: MetricLayers, w: EdgeWeights, f: SampledGraphFunction) -> SampledGraphFunction:
    """Slice-wise orthogonal projection onto the functions ``u(|x|) h(x)``."""
    _check_grid(g, f)
    if m.depth != g.depth:
        raise GridMismatch("metric depth differs from graph depth")
    out = []
    for vals, h in zip(f.values, w.values):
        coef = h.conj() @ vals  # <f_t, h_t> for every grid point t
        out.append(np.outer(h, coef))
    return SampledGraphFunction(tuple(out), f.M)


def to_line(g: LayeredGraph, w: EdgeWeights, f: SampledGraphFunction) -> list[np.ndarray]:
    """Profile ``u(t) = <f_t, h_t>`` on every generation band."""
    _check_grid(g, f)
    return [h.conj() @ vals for vals, h in zip(f.values, w.values)]


def from_line(w: EdgeWeights, profile: list[np.ndarray]) -> SampledGraphFunction:
    """Inverse of :func:`to_line` on the range: ``u(|x|) h(x)``."""
    M = len(profile[0]) - 1
    return SampledGraphFunction(tuple(np.outer(h, u) for h, u in zip(w.values, profile)), M)


def line_inner(m: MetricLayers, u: list[np.ndarray], v: list[np.ndarray]) -> complex:
    M = len(u[0]) - 1
    return sum(simpson(a * b.conj(), dx=m.lengths[j] / M) for j, (a, b) in enumerate(zip(u, v)))


def sample_domain_function(g: LayeredGraph, m: MetricLayers, M: int = 64, rng=None) -> SampledGraphFunction:
    """Random piecewise-cubic function satisfying the vertex conditions.

    Continuous, zero at the root and on the truncation sphere, and with
    vanishing sums of outgoing derivatives at every other vertex.
    """
    rng = np.random.default_rng(rng)
    N = g.depth
    vertex = [rng.normal(size=s) + 1j * rng.normal(size=s) for s in g.sphere_sizes]
    vertex[0][:] = 0
    vertex[N][:] = 0
    # outgoing derivatives: start[j][e] at the parent end, end[j][e] at the child end
    start = [rng.normal(size=g.edge_count(j)) + 1j * rng.normal(size=g.edge_count(j)) for j in range(N)]
    end = [rng.normal(size=g.edge_count(j)) + 1j * rng.normal(size=g.edge_count(j)) for j in range(N)]
    for n in range(1, N):
        down, up = g.edges(n), g.edges(n - 1)
        for v in range(g.sphere_sizes[n]):
            out_e = np.flatnonzero(down[:, 0] == v)
            in_e = np.flatnonzero(up[:, 1] == v)
            excess = (start[n][out_e].sum() + end[n - 1][in_e].sum()) / (len(out_e) + len(in_e))
            start[n][out_e] -= excess
            end[n - 1][in_e] -= excess
    s = np.linspace(0.0, 1.0, M + 1)
    values = []
    for j in range(N):
        edges = g.edges(j)
        l = m.lengths[j]
        a = vertex[j][edges[:, 0]][:, None]
        b = vertex[j + 1][edges[:, 1]][:, None]
        p = l * start[j][:, None] - (b - a)
        q = (b - a) + l * end[j][:, None]  # d/dx at the child end is -end
        bump = rng.normal(size=(len(edges), 1))
        values.append(
            (1 - s) * a + s * b + p * s * (1 - s) ** 2 + q * s**2 * (1 - s) + bump * (s * (1 - s)) ** 2
        )
    return SampledGraphFunction(tuple(values), M)


def vertex_defects(g: LayeredGraph, m: MetricLayers, f: SampledGraphFunction) -> tuple[float, float]:
    """Largest continuity jump and Kirchhoff sum over the interior vertices.

    Endpoint derivatives use second-order one-sided differences.
    """
    _check_grid(g, f)
    N, M = g.depth, f.M
    cont, kirch = 0.0, 0.0
    for n in range(1, N):
        down, up = g.edges(n), g.edges(n - 1)
        h_down, h_up = m.lengths[n] / M, m.lengths[n - 1] / M
        fd, fu = f.values[n], f.values[n - 1]
        d_start = (-3 * fd[:, 0] + 4 * fd[:, 1] - fd[:, 2]) / (2 * h_down)
        d_end = -(3 * fu[:, -1] - 4 * fu[:, -2] + fu[:, -3]) / (2 * h_up)
        for v in range(g.sphere_sizes[n]):
            out_e = np.flatnonzero(down[:, 0] == v)
            in_e = np.flatnonzero(up[:, 1] == v)
            vals = np.concatenate([fd[out_e, 0], fu[in_e, -1]])
            cont = max(cont, float(np.abs(vals - vals[0]).max()))
            kirch = max(kirch, float(abs(d_start[out_e].sum() + d_end[in_e].sum())))
    return cont, kirch
