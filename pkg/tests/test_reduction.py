from fractions import Fraction

import numpy as np
import pytest

from fpgraph import antitree, balance, gamma_tilde, path_graph, radial_tree
from fpgraph.discrete import Branch, SphereVector, decompose_discrete
from fpgraph.errors import ConstancyViolation, EmptySupport, GridMismatch
from fpgraph.generators import ns_reference_vector
from fpgraph.reduction import (
    SampledGraphFunction,
    build_reduced_operator,
    from_line,
    inner,
    jump_data,
    lift_vector,
    lift_weights,
    line_inner,
    norm,
    project,
    reduce_decomposition,
    sample_domain_function,
    support_window,
    to_line,
    vertex_defects,
)

from conftest import PRESETS

S2 = np.sqrt(2)


@pytest.fixture
def gamma_dec(gamma):
    g, m = gamma
    return g, m, decompose_discrete(g)


def _fix_sign(values):
    # global phase: make the first nonzero weight positive
    flat = np.concatenate(values)
    first = flat[np.flatnonzero(np.abs(flat) > 1e-12)[0]]
    return [v * (abs(first) / first) for v in values]


def test_gamma_r1_weights(gamma_dec):
    g, _, dec = gamma_dec
    w = _fix_sign(list(lift_weights(g, dec.branches[1]).values))
    np.testing.assert_allclose(w[0], [0], atol=1e-15)
    np.testing.assert_allclose(w[1], [1 / S2, -1 / S2], atol=1e-15)
    np.testing.assert_allclose(w[2], [0.5, 0.5, -0.5, -0.5], atol=1e-15)
    np.testing.assert_allclose(w[3], [0.5, 0.5, -0.5, -0.5], atol=1e-15)
    for j in (4, 5):
        np.testing.assert_allclose(w[j], 0, atol=1e-15)


def test_gamma_r2_r3_weights(gamma_dec):
    g, _, dec = gamma_dec
    w2 = _fix_sign(list(lift_weights(g, dec.branches[2]).values))
    w3 = _fix_sign(list(lift_weights(g, dec.branches[3]).values))
    # r=2 reaches the rays below S_4, r=3 cancels there
    np.testing.assert_allclose(w2[2], [0.5, -0.5, 0.5, -0.5], atol=1e-15)
    np.testing.assert_allclose(w2[4], [1 / S2, -1 / S2], atol=1e-15)
    np.testing.assert_allclose(w3[2], [0.5, -0.5, -0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(w3[4], 0, atol=1e-15)


def test_antitree_root_weights():
    sizes = (1, 2, 3, 2, 4)
    g, _ = antitree(sizes)
    w = lift_vector(g, SphereVector(0, [1.0]))
    for j, vals in enumerate(w.values):
        np.testing.assert_allclose(vals, 1 / np.sqrt(sizes[j] * sizes[j + 1]), atol=1e-15)


@pytest.mark.parametrize("s", [1, 2])
def test_radial_tree_root_of_unity_weights(s):
    g, _ = radial_tree((1, 3, 2))
    phi = ns_reference_vector(g, (1, 0), s)
    w = lift_vector(g, phi)
    omega = np.exp(2j * np.pi / 3)
    pattern = omega ** (s * np.arange(1, 4))
    np.testing.assert_allclose(w.values[1], pattern / np.sqrt(3), atol=1e-15)
    np.testing.assert_allclose(w.values[2], np.repeat(pattern, 2) / np.sqrt(6), atol=1e-15)
    np.testing.assert_allclose(w.values[0], 0, atol=1e-15)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_slice_normalization(name):
    res = balance(*PRESETS[name]())
    g, m = res.graph, res.metric
    dec = decompose_discrete(g)
    for b in dec.branches:
        w = lift_weights(g, b)
        norms = w.slice_norms()
        a, e = support_window(g, b, w)
        assert np.abs(norms[norms > 1e-12] - 1).max() < 1e-12
        assert np.all(norms[:a] < 1e-12) and np.all(norms[e:] < 1e-12)


def test_support_windows(gamma_dec):
    g, _, dec = gamma_dec
    windows = [support_window(g, b, lift_weights(g, b)) for b in dec.branches]
    assert windows[0] == (0, g.depth)
    assert windows[1] == (1, 4)
    assert windows[3] == (2, 4)


def test_root_window_is_full(preset):
    _, g, m = preset
    res = balance(g, m)
    dec = decompose_discrete(res.graph)
    b = dec.branches[0]
    assert support_window(res.graph, b, lift_weights(res.graph, b)) == (0, res.graph.depth)


def test_gamma_jump_golden(gamma_dec):
    g, _, dec = gamma_dec
    j1 = {j.j: j for j in jump_data(g, dec.branches[1])}
    j2 = {j.j: j for j in jump_data(g, dec.branches[2])}
    assert (j1[2].d_sq, j1[2].c_sq) == (Fraction(2), Fraction(1, 2))
    assert (j1[3].d_sq, j1[3].c_sq) == (1, 1)
    assert (j2[3].d_sq, j2[3].c_sq) == (1, 1)
    assert (j2[4].d_sq, j2[4].c_sq) == (Fraction(1, 2), Fraction(2))
    assert abs(j1[2].d - S2) < 1e-14 and abs(j1[2].c - 1 / S2) < 1e-14
    assert abs(j2[4].d - 1 / S2) < 1e-14 and abs(j2[4].c - S2) < 1e-14


def test_antitree_root_jumps():
    sizes = (1, 2, 3, 2, 4)
    g, _ = antitree(sizes)
    root = decompose_discrete(g).branches[0]
    for jp in jump_data(g, root):
        assert jp.d_sq == Fraction(sizes[jp.j + 1], sizes[jp.j - 1])
        assert jp.c_sq * jp.d_sq == 1
        assert abs(jp.d - np.sqrt(sizes[jp.j + 1] / sizes[jp.j - 1])) < 1e-14


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_root_branch_dc_is_one(name):
    res = balance(*PRESETS[name]())
    dec = decompose_discrete(res.graph)
    for jp in jump_data(res.graph, dec.branches[0]):
        assert jp.d_sq * jp.c_sq == 1
        assert jp.d > 0 and jp.c > 0


def test_path_operator():
    g, m = path_graph(5)
    op = build_reduced_operator(g, m, decompose_discrete(g).branches[0])
    assert (op.a, op.b) == (0.0, 5.0)
    assert all((jp.d, jp.c) == (1.0, 1.0) for jp in op.jumps)


def test_gamma_r1_operator(gamma_dec):
    g, m, dec = gamma_dec
    op = build_reduced_operator(g, m, dec.branches[1])
    assert (op.a, op.b) == (1.0, 3.0)  # t_1 and t_4 on the balanced graph
    np.testing.assert_allclose(op.interval_lengths, [1.0, 0.5, 0.5])
    assert op.jump_at(2) == pytest.approx((S2, 1 / S2))
    assert op.jump_at(3) == (1.0, 1.0)


def test_constancy_violation(gamma_dec):
    g, _, _ = gamma_dec
    bad = Branch(9, 2, (SphereVector(2, [1.0, 0.0]),), {})
    with pytest.raises(ConstancyViolation):
        lift_weights(g, bad)


def test_empty_support(gamma_dec):
    g, _, _ = gamma_dec
    zero = Branch(9, 2, (SphereVector(2, [0.0, 0.0]),), {})
    with pytest.raises(EmptySupport):
        support_window(g, zero, lift_weights(g, zero))


def test_index_shift_stability(gamma_dec):
    # weights lifted from phi_k agree with h^r up to a unimodular factor
    g, _, dec = gamma_dec
    for b in dec.branches:
        h = np.concatenate(lift_weights(g, b).values)
        for v in b.chain[1:]:
            hk = np.concatenate(lift_vector(g, v).values)
            common = (np.abs(h) > 1e-12) & (np.abs(hk) > 1e-12)
            z = hk[common] / h[common]
            assert np.abs(np.abs(z) - 1).max() < 1e-12
            assert np.abs(z - z[0]).max() < 1e-12


# --- projections on sampled functions ------------------------------------------


def _smooth(g, m, rng, M=64):
    coeffs = [rng.normal(size=(g.edge_count(j), 3)) + 1j * rng.normal(size=(g.edge_count(j), 3)) for j in range(g.depth)]

    def f(j, e, t):
        a, b, c = coeffs[j][e]
        return a * np.sin(t) + b * np.cos(2 * t) + c * t**2

    return SampledGraphFunction.from_callable(g, m, f, M)


def test_projection_basic(gamma_dec):
    g, m, dec = gamma_dec
    rng = np.random.default_rng(5)
    ws = [lift_weights(g, b) for b in dec.branches]
    f = _smooth(g, m, rng)
    for r, w in enumerate(ws):
        pf = project(g, m, w, f)
        assert norm(m, project(g, m, w, pf) - pf) < 1e-12 * norm(m, f)
        assert norm(m, pf) <= norm(m, f) + 1e-12
        assert abs(inner(m, pf, f - pf)) < 1e-8 * norm(m, f) ** 2
        for other in ws[r + 1:]:
            assert norm(m, project(g, m, other, pf)) < 1e-12 * norm(m, f)


def test_projection_fixes_own_range(gamma_dec):
    g, m, dec = gamma_dec
    w = lift_weights(g, dec.branches[2])
    t = np.linspace(0, 1, 65)
    h = from_line(w, [np.sin(3 * t + j) for j in range(g.depth)])
    assert norm(m, project(g, m, w, h) - h) < 1e-12


def test_completeness(gamma_dec):
    g, m, dec = gamma_dec
    ws = [lift_weights(g, b) for b in dec.branches]
    f = _smooth(g, m, np.random.default_rng(8))
    total = SampledGraphFunction.zeros(g, f.M)
    for w in ws:
        total = total + project(g, m, w, f)
    assert norm(m, f - total) < 1e-12 * norm(m, f)


def test_slice_isometry(gamma_dec):
    g, m, dec = gamma_dec
    w = lift_weights(g, dec.branches[1])
    rng = np.random.default_rng(2)
    u = [rng.normal(size=65) for _ in range(g.depth)]
    v = [rng.normal(size=65) + 1j * rng.normal(size=65) for _ in range(g.depth)]
    a = inner(m, from_line(w, u), from_line(w, v))
    # only the bands inside the support carry weight
    mask = [np.linalg.norm(x) > 0 for x in w.values]
    b = line_inner(m, [x * k for x, k in zip(u, mask)], [x * k for x, k in zip(v, mask)])
    assert abs(a - b) < 1e-8
    back = to_line(g, w, from_line(w, u))
    for band, k in enumerate(mask):
        if k:
            np.testing.assert_allclose(back[band], u[band], atol=1e-13)


def test_boundary_conditions_preserved(gamma_dec):
    g, m, dec = gamma_dec
    ws = [lift_weights(g, b) for b in dec.branches]
    errs = []
    for M in (32, 64, 128):
        f = sample_domain_function(g, m, M, rng=4)
        cont, kirch = vertex_defects(g, m, f)
        assert cont < 1e-12
        worst = 0.0
        for w in ws:
            c, k = vertex_defects(g, m, project(g, m, w, f))
            assert c < 1e-10
            worst = max(worst, k)
        errs.append(max(worst, kirch))
    # one-sided differences: defects shrink with M, order at least one
    assert errs[-1] < 1e-2
    assert np.log2(errs[0] / errs[-1]) / 2 >= 1.0


def test_grid_mismatch(gamma_dec):
    g, m, dec = gamma_dec
    w = lift_weights(g, dec.branches[0])
    odd = SampledGraphFunction.zeros(g, 63)
    with pytest.raises(GridMismatch):
        project(g, m, w, odd)
    short = SampledGraphFunction(SampledGraphFunction.zeros(g, 64).values[:-1], 64)
    with pytest.raises(GridMismatch):
        project(g, m, w, short)


def test_reduce_decomposition_counts(gamma_dec):
    g, m, dec = gamma_dec
    ops = reduce_decomposition(g, m, dec)
    assert [op.r for op in ops] == [0, 1, 2, 3]
    assert [(op.a_index, op.b_index) for op in ops] == [(0, 6), (1, 4), (2, 6), (2, 4)]


def test_unbalanced_gamma_reduction():
    # r=0 also works before balancing (radial function on the original graph)
    g, m = gamma_tilde(5)
    dec = decompose_discrete(g)
    op = build_reduced_operator(g, m, dec.branches[0])
    assert (op.a_index, op.b_index) == (0, 5)
