"""End-to-end run: generate, check, balance, decompose, reduce, solve, compare."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .balancing import bad_generations, balance
from .discrete import decompose_discrete
from .errors import FPGraphError, InvalidParams, StageError
from .generators import Preset, generate
from .graph import to_dot
from .reduction import lift_weights, reduce_decomposition
from .spectral import compare_spectra, full_spectrum_fd, full_spectrum_secular, reduced_spectrum
from .symmetry import check_family_preserving, check_lambda_commutation

THREADS_ENV = "FPGRAPH_NUM_THREADS"

EXIT_PASS = 0
EXIT_STAGE_ERROR = 1
EXIT_COMPARISON = 2
EXIT_SYMMETRY = 3
EXIT_IO = 4


def num_threads() -> int:
    """Worker count from ``FPGRAPH_NUM_THREADS`` (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InvalidParams(f"{THREADS_ENV}={raw!r} is not an integer") from None


@dataclass
class PipelineConfig:
    """Inputs and switches of :func:`run_pipeline`.

    Exactly one of ``preset`` and ``input`` is set.  ``mesh`` is the FD width
    used for the cross-check of the lowest ``fd_count`` eigenvalues.
    """

    preset: Preset | None = None
    input: str | None = None
    k_max: float = 10.0
    tol: float = 1e-8
    mesh: float = 1 / 64
    fd_count: int = 10
    fd_rtol: float = 5e-3
    out_dir: str | None = None
    skip_fd: bool = False
    emit_dot: bool = False
    emit_csv: bool = True

    def validate(self):
        if (self.preset is None) == (self.input is None):
            raise InvalidParams("give exactly one of preset and input")
        for name in ("k_max", "tol", "mesh", "fd_rtol"):
            if not getattr(self, name) > 0:
                raise InvalidParams(f"{name} must be positive")
        if self.fd_count < 1:
            raise InvalidParams("fd_count must be at least 1")


@dataclass
class PipelineResult:
    report: dict
    exit_code: int
    artifacts: dict = field(default_factory=dict)


@contextmanager
def _stage(name):
    try:
        yield
    except StageError:
        raise
    except (FPGraphError, ValueError, ArithmeticError) as exc:
        raise StageError(name, exc) from exc


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Execute every stage and collect a JSON-ready report.

    The exit code is 0 when the graph is family preserving and the reduced
    spectra match the full one (and the FD cross-check, unless skipped),
    3 on a symmetry failure and 2 on a spectral mismatch.
    """
    cfg.validate()
    report: dict = {"config": _config_dict(cfg)}
    artifacts: dict = {}

    with _stage("generate"):
        if cfg.preset is not None:
            g, m = generate(cfg.preset)
        else:
            g, m = io.load_graph(cfg.input)
            if m is None:
                raise InvalidParams("input graph has no lengths")
    report["graph"] = {"spheres": list(g.sphere_sizes), "lengths": list(m.lengths), "vertices": g.num_vertices}
    _emit(cfg, artifacts, "graph.json", io.graph_to_dict(g, m))

    with _stage("check"):
        verdict = check_family_preserving(g)
        commuting = [check_lambda_commutation(g, n)[0] for n in range(g.depth + 1)]
    failure = verdict.first_failure
    report["symmetry"] = {
        "family_preserving": verdict.family_preserving,
        "lambda_commuting": all(commuting),
        "witnesses": len(verdict.witnesses),
        "first_failure": None if failure is None else {"kind": failure.kind, "sphere": failure.sphere, "pair": list(failure.pair)},
    }
    if verdict.family_preserving is not True:
        report["status"] = "symmetry-failure"
        return _finish(cfg, report, artifacts, EXIT_SYMMETRY)

    with _stage("balance"):
        bal = balance(g, m)
        gb, mb = bal.graph, bal.metric
    report["balance"] = {
        "bad_generations": sorted(bad_generations(g)),
        "spheres": list(gb.sphere_sizes),
        "lengths": list(mb.lengths),
        "sphere_origin": list(bal.sphere_origin),
    }
    balanced_doc = io.graph_to_dict(gb, mb)
    balanced_doc["sphere_origin"] = list(bal.sphere_origin)
    _emit(cfg, artifacts, "balanced.json", balanced_doc)

    with _stage("decompose"):
        dec = decompose_discrete(gb)
        residuals = dec.residuals()
    _emit(cfg, artifacts, "branches.json", io.branches_to_dict(dec))

    with _stage("reduce"):
        ops = reduce_decomposition(gb, mb, dec)
    _emit(cfg, artifacts, "ops.json", io.operators_to_dict(ops))

    with _stage("spectrum"):
        with ThreadPoolExecutor(max_workers=num_threads()) as pool:
            parts = list(pool.map(lambda op: reduced_spectrum(op, cfg.k_max), ops))
    with _stage("spectrum-full"):
        full = full_spectrum_secular(g, m, cfg.k_max)
    if cfg.emit_csv:
        _emit(cfg, artifacts, "spectrum_reduced.csv", io.spectra_to_csv(parts))
        _emit(cfg, artifacts, "spectrum_full.csv", io.spectra_to_csv([full]))

    report["branches"] = [
        {
            "r": b.r,
            "n_r": b.n_r,
            "chain_length": len(b),
            "lambda_tags": {str(j): t for j, t in b.lambda_tags.items()},
            "window": [op.a_index, op.b_index],
            "interval": [op.a, op.b],
            "jumps": [{"j": jp.j, "d": jp.d, "c": jp.c, "d_sq": str(jp.d_sq), "c_sq": str(jp.c_sq)} for jp in op.jumps],
            "eigenvalues": len(s),
        }
        for b, op, s in zip(dec.branches, ops, parts)
    ]
    chain_total = sum(len(b) for b in dec.branches)
    reduced_total = sum(len(s) for s in parts)
    report["totals"] = {
        "branches": len(dec.branches),
        "chain_length_sum": chain_total,
        "vertices": gb.num_vertices,
        "reduced_eigenvalues": reduced_total,
        "full_eigenvalues": len(full),
        "decomposition_residuals": residuals,
    }

    with _stage("compare"):
        cmp = compare_spectra(full, parts, cfg.tol)
    report["comparison"] = io.report_to_dict(cmp)
    ok = cmp.passed and chain_total == gb.num_vertices and reduced_total == len(full)

    if not cfg.skip_fd:
        with _stage("fd"):
            fd = full_spectrum_fd(g, m, cfg.mesh, cfg.fd_count).expanded()
        ref = full.expanded()[: len(fd)]
        n = min(len(ref), len(fd))
        rel = float(np.max(np.abs(fd[:n] ** 2 - ref[:n] ** 2) / ref[:n] ** 2)) if n else 0.0
        report["fd_check"] = {"mesh": cfg.mesh, "count": n, "max_relative_deviation": rel, "passed": rel <= cfg.fd_rtol}
        ok = ok and rel <= cfg.fd_rtol

    if cfg.emit_dot:
        _emit(cfg, artifacts, "graph.dot", to_dot(g))
        _emit(cfg, artifacts, "balanced.dot", to_dot(gb))
        for b in dec.branches:
            labels = lift_weights(gb, b).as_labels()
            _emit(cfg, artifacts, f"weights_r{b.r}.dot", to_dot(gb, labels, name=f"h{b.r}"))

    report["status"] = "pass" if ok else "comparison-failure"
    return _finish(cfg, report, artifacts, EXIT_PASS if ok else EXIT_COMPARISON)


def _config_dict(cfg):
    # the output location is left out so artifacts do not depend on it
    out = {k: v for k, v in vars(cfg).items() if k not in ("preset", "out_dir")}
    if cfg.preset is not None:
        out["preset"] = {"kind": cfg.preset.kind, "params": dict(cfg.preset.params), "lengths": cfg.preset.lengths}
    return out


def _emit(cfg, artifacts, name, payload):
    """Write ``payload`` (dict -> JSON, str as is) into the output directory."""
    text = payload if isinstance(payload, str) else io.dumps(payload) + "\n"
    artifacts[name] = text
    if cfg.out_dir is not None:
        try:
            Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
            Path(cfg.out_dir, name).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise StageError("write", exc) from exc


def _finish(cfg, report, artifacts, code):
    report["exit_code"] = code
    _emit(cfg, artifacts, "report.json", report)
    return PipelineResult(report, code, artifacts)
