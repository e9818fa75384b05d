from collections import Counter

import pytest

from fpgraph.generators import Preset
from fpgraph.pipeline import PipelineConfig, run_pipeline
from fpgraph.errors import InvalidParams


def _run(kind, params, **kw):
    return run_pipeline(PipelineConfig(preset=Preset(kind, params), **kw))


def test_path_depth_four():
    res = _run("path", {"depth": 4})
    rep = res.report
    assert res.exit_code == 0 and rep["status"] == "pass"
    assert rep["totals"]["branches"] == 1
    assert rep["comparison"]["max_deviation"] < 1e-10
    assert rep["fd_check"]["passed"]


def test_gamma_four_branches():
    res = _run("gamma_tilde", {"depth": 5}, emit_dot=True)
    rep = res.report
    assert res.exit_code == 0
    assert [(b["n_r"], b["window"]) for b in rep["branches"]] == [(0, [0, 6]), (2, [1, 4]), (3, [2, 6]), (3, [2, 4])]
    assert rep["balance"]["bad_generations"] == [2]
    assert {"graph.dot", "balanced.dot", "weights_r3.dot"} <= set(res.artifacts)


def test_antitree_census():
    sizes = (1, 2, 3, 2, 2, 2, 2)
    res = _run("antitree", {"sizes": list(sizes)}, skip_fd=True)
    rep = res.report
    assert res.exit_code == 0
    origin = rep["balance"]["sphere_origin"]
    depth = len(origin) - 1
    census = Counter((b["n_r"], b["chain_length"]) for b in rep["branches"])
    expected = Counter({(0, depth + 1): 1, (1, 2): sizes[1] - 1})
    for k, o in enumerate(origin):
        if o is None:
            before, after = sizes[origin[k - 1]], sizes[origin[k + 1]]
            expected[(k, min(3, depth - k + 1))] += after - 1
            expected[(k, 1)] += (before - 1) * (after - 1)
    assert census == expected


def test_totals_reconcile():
    rep = _run("radial_tree", {"branching": [1, 2, 3], "depth": 4}, skip_fd=True).report
    t = rep["totals"]
    assert t["chain_length_sum"] == t["vertices"]
    assert t["reduced_eigenvalues"] == t["full_eigenvalues"]
    assert sum(b["eigenvalues"] for b in rep["branches"]) == t["full_eigenvalues"]


def test_determinism(tmp_path):
    texts = []
    for name in ("a", "b"):
        res = _run("antitree", {"sizes": [1, 2, 3, 2, 1]}, out_dir=str(tmp_path / name), emit_dot=True)
        texts.append({f.name: f.read_bytes() for f in (tmp_path / name).iterdir()})
        assert set(texts[-1]) == set(res.artifacts)
    assert texts[0] == texts[1]


def test_symmetry_failure_stops_early():
    res = _run("cyclic", {"depth": 4})
    assert res.exit_code == 3
    assert res.report["status"] == "symmetry-failure"
    assert "branches" not in res.report


def test_comparison_failure_exit_code():
    # a tolerance far below solver accuracy forces mismatches
    res = _run("gamma_tilde", {"depth": 5}, tol=1e-300, skip_fd=True)
    assert res.exit_code == 2
    assert res.report["comparison"]["passed"] is False


def test_config_validation():
    with pytest.raises(InvalidParams):
        run_pipeline(PipelineConfig())
    with pytest.raises(InvalidParams):
        run_pipeline(PipelineConfig(preset=Preset("path", {"depth": 3}), tol=0.0))
