import numpy as np
import pytest

from fpgraph import antitree, gamma_tilde, path_graph, radial_tree
from fpgraph.discrete import decompose_discrete
from fpgraph.errors import BranchTooSmall, InvalidParams, NotATree
from fpgraph.generators import Preset, cyclic_graph, generate, is_tree, ns_reference_vector, sphere_product
from fpgraph.io import graph_to_dict
from fpgraph.symmetry import check_family_preserving


def test_binary_radial_tree():
    g, m = radial_tree((1, 2, 2))
    assert g.sphere_sizes == (1, 1, 2, 4)
    assert m.lengths == (1.0, 1.0, 1.0)
    assert is_tree(g)
    np.testing.assert_array_equal(g.biadjacency[2], [[1, 0], [1, 0], [0, 1], [0, 1]])


def test_radial_tree_continues_as_rays():
    g, _ = radial_tree((1, 2, 3), depth=5)
    assert g.sphere_sizes == (1, 1, 2, 6, 6, 6)
    np.testing.assert_array_equal(g.biadjacency[4], np.eye(6))


def test_antitree_shapes():
    g, _ = antitree((1, 2, 3, 2, 1))
    assert [b.shape for b in g.biadjacency] == [(2, 1), (3, 2), (2, 3), (1, 2)]
    assert all((b == 1).all() for b in g.biadjacency)


def test_gamma_tilde_layout():
    g, _ = gamma_tilde(5)
    assert g.sphere_sizes == (1, 1, 2, 2, 2, 2)
    np.testing.assert_array_equal(g.biadjacency[2], np.ones((2, 2)))
    np.testing.assert_array_equal(g.biadjacency[3], np.eye(2))


@pytest.mark.parametrize(
    "preset",
    [
        Preset("path", {"depth": 3}),
        Preset("radial_tree", {"branching": [1, 2, 3]}),
        Preset("antitree", {"sizes": [1, 2, 3, 2]}, lengths=[1.0, 0.5, 2.0]),
        Preset("gamma_tilde", {"depth": 6}),
    ],
)
def test_generate_family_preserving(preset):
    g, m = generate(preset)
    assert m.depth == g.depth
    assert check_family_preserving(g).family_preserving is True


def test_generate_custom_round_trip():
    g, m = antitree((1, 2, 2))
    g2, m2 = generate(Preset("custom", {"graph": graph_to_dict(g, m)}))
    assert g2 == g and m2 == m


@pytest.mark.parametrize(
    "call",
    [
        lambda: path_graph(0),
        lambda: antitree((2, 3)),
        lambda: antitree((1, 0, 2)),
        lambda: radial_tree((1, 0)),
        lambda: gamma_tilde(2),
        lambda: cyclic_graph(1),
        lambda: path_graph(3, lengths=[1.0, 2.0]),
        lambda: generate(Preset("moebius")),
    ],
)
def test_invalid_params(call):
    with pytest.raises(InvalidParams):
        call()


def test_ns_vector_binary():
    g, _ = radial_tree((1, 2, 2))
    phi = ns_reference_vector(g, (1, 0), 1)
    assert phi.n == 2
    # omega = -1: values omega, omega^2, i.e. the difference vector up to sign
    np.testing.assert_allclose(phi.values, np.array([-1, 1]) / np.sqrt(2), atol=1e-15)


def test_ns_vector_ternary():
    g, _ = radial_tree((1, 3))
    omega = np.exp(2j * np.pi / 3)
    phi = ns_reference_vector(g, (1, 0), 1)
    np.testing.assert_allclose(phi.values, np.array([omega, omega**2, omega**3]) / np.sqrt(3), atol=1e-15)
    assert abs(np.linalg.norm(phi.values) - 1) < 1e-15


def test_ns_vectors_orthogonal():
    g, _ = radial_tree((1, 5))
    vecs = [ns_reference_vector(g, (1, 0), s).values for s in range(1, 5)]
    gram = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-14)
    # and orthogonal to the constant vector on the children
    assert all(abs(v.sum()) < 1e-14 for v in vecs)


def test_ns_vector_errors():
    g, _ = antitree((1, 2, 2))
    with pytest.raises(NotATree):
        ns_reference_vector(g, (1, 0), 1)
    t, _ = radial_tree((1, 1, 2))
    with pytest.raises(BranchTooSmall):
        ns_reference_vector(t, (1, 0), 1)
    with pytest.raises(InvalidParams):
        ns_reference_vector(t, (2, 0), 2)


def test_ns_equivalence_on_radial_tree():
    g, _ = radial_tree((1, 2, 3), depth=4)
    dec = decompose_discrete(g)
    for n in range(1, g.depth + 1):
        seeds = [b.seed.values for b in dec.branches if b.n_r == n]
        refs = [
            ns_reference_vector(g, (n - 1, v), s).values
            for v in range(g.sphere_sizes[n - 1])
            if g.biadjacency[n - 1][:, v].sum() > 1
            for s in range(1, int(g.biadjacency[n - 1][:, v].sum()))
        ]
        assert len(seeds) == len(refs)
        if not seeds:
            continue
        a, _ = np.linalg.qr(np.array(seeds).T)
        b, _ = np.linalg.qr(np.array(refs).T)
        # mutual projection residuals
        assert np.linalg.norm(b - a @ (a.conj().T @ b)) <= 1e-10
        assert np.linalg.norm(a - b @ (b.conj().T @ a)) <= 1e-10


def test_sphere_product():
    p, _ = path_graph(2)
    t, _ = radial_tree((1, 2))
    g = sphere_product(t, p)
    assert g.sphere_sizes == (1, 1, 2)
    a, _ = antitree((1, 2, 2))
    h = sphere_product(a, t)
    assert h.sphere_sizes == (1, 2, 4)
    assert check_family_preserving(h).family_preserving is True
    with pytest.raises(InvalidParams):
        sphere_product(a, path_graph(3)[0])
