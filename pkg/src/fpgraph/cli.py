"""Command line front end: ``fpgraph <subcommand> ...``.

Exit codes: 0 success, 1 computation error, 2 spectral mismatch,
3 symmetry failure, 4 input/output problem.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import io
from .balancing import balance, is_locally_balanced
from .discrete import decompose_discrete
from .errors import FPGraphError, InvalidParams, StageError
from .generators import Preset, generate
from .graph import MetricLayers, to_dot
from .pipeline import (
    EXIT_COMPARISON,
    EXIT_IO,
    EXIT_PASS,
    EXIT_STAGE_ERROR,
    EXIT_SYMMETRY,
    PipelineConfig,
    run_pipeline,
)
from .reduction import lift_weights, reduce_decomposition
from .spectral import compare_spectra, full_spectrum_fd, full_spectrum_secular, reduced_spectrum
from .symmetry import check_family_preserving, check_lambda_commutation

PRESETS = ("path", "radial_tree", "antitree", "gamma_tilde", "cyclic")


def _ints(text):
    return tuple(int(x) for x in text.split(","))


def _floats(text):
    return tuple(float(x) for x in text.split(","))


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _graph_with_metric(path, length=None):
    g, m = io.load_graph(path)
    if m is None:
        if length is None:
            raise InvalidParams(f"{path} has no lengths; pass --length")
        m = MetricLayers.uniform(g.depth, length)
    return g, m


def _preset_from_args(args) -> Preset:
    lengths = args.lengths if args.lengths is not None else args.length
    if args.preset in ("path", "gamma_tilde", "cyclic"):
        params = {} if args.depth is None else {"depth": args.depth}
    elif args.preset == "antitree":
        if args.sizes is None:
            raise InvalidParams("antitree needs --sizes")
        params = {"sizes": args.sizes}
    else:
        if args.branching is None:
            raise InvalidParams("radial_tree needs --branching")
        params = {"branching": args.branching, "depth": args.depth}
    return Preset(args.preset, params, lengths)


def _add_preset_args(p, required):
    p.add_argument("--preset", choices=PRESETS, required=required)
    p.add_argument("--depth", type=int)
    p.add_argument("--sizes", type=_ints, help="antitree sphere sizes, e.g. 1,2,3,2")
    p.add_argument("--branching", type=_ints, help="radial tree branching numbers, e.g. 1,2,3")
    p.add_argument("--length", type=float, default=1.0, help="common edge length")
    p.add_argument("--lengths", type=_floats, help="per-generation lengths")


# --- subcommands --------------------------------------------------------------


def cmd_gen(args):
    g, m = generate(_preset_from_args(args))
    _write(args.out, io.dumps(io.graph_to_dict(g, m)) + "\n")
    if args.dot:
        _write(args.dot, to_dot(g))
    return EXIT_PASS


def cmd_check(args):
    g, _ = io.load_graph(args.input)
    commuting = {n: check_lambda_commutation(g, n) for n in range(g.depth + 1)}
    bad = [n for n, (ok, _) in commuting.items() if not ok]
    print(f"lambda commutation: {'ok' if not bad else 'fails at spheres ' + ','.join(map(str, bad))}")
    for n in bad:
        print(f"  sphere {n}: max |commutator entry| = {commuting[n][1]}")
    if args.algebraic_only:
        return EXIT_PASS if not bad else EXIT_SYMMETRY
    verdict = check_family_preserving(g, budget=args.budget)
    if verdict.family_preserving is None:
        print(f"family preserving: unknown (search budget {args.budget} exhausted)")
        return EXIT_SYMMETRY
    print(f"family preserving: {str(verdict.family_preserving).lower()}")
    w = verdict.first_failure
    if w is not None:
        print(f"  first failing pair: {w.kind} neighbors {w.pair} in sphere {w.sphere}")
    return EXIT_PASS if verdict.family_preserving else EXIT_SYMMETRY


def cmd_balance(args):
    g, m = _graph_with_metric(args.input, args.length)
    res = balance(g, m)
    doc = io.graph_to_dict(res.graph, res.metric)
    doc["sphere_origin"] = list(res.sphere_origin)
    _write(args.out, io.dumps(doc) + "\n")
    return EXIT_PASS


def cmd_decompose(args):
    g, _ = io.load_graph(args.input)
    dec = decompose_discrete(g)
    _write(args.out, io.dumps(io.branches_to_dict(dec)) + "\n")
    return EXIT_PASS


def cmd_reduce(args):
    g, m = _graph_with_metric(args.input, args.length)
    if not is_locally_balanced(g):
        raise InvalidParams("graph is not locally balanced; run `balance` first")
    dec = io.branches_from_dict(io.read_json(args.branches), g)
    ops = reduce_decomposition(g, m, dec)
    _write(args.out, io.dumps(io.operators_to_dict(ops)) + "\n")
    if args.dot_prefix:
        for b in dec.branches:
            _write(f"{args.dot_prefix}{b.r}.dot", to_dot(g, lift_weights(g, b).as_labels(), name=f"h{b.r}"))
    return EXIT_PASS


def cmd_spectrum(args):
    ops = io.operators_from_dict(io.read_json(args.ops))
    spectra = [reduced_spectrum(op, args.kmax) for op in ops]
    _write(args.out, io.spectra_to_csv(spectra))
    return EXIT_PASS


def cmd_spectrum_full(args):
    g, m = _graph_with_metric(args.input, args.length)
    if args.method == "secular":
        spec = full_spectrum_secular(g, m, args.kmax)
    else:
        spec = full_spectrum_fd(g, m, args.mesh, args.count)
    _write(args.out, io.spectra_to_csv([spec]))
    return EXIT_PASS


def cmd_compare(args):
    with open(args.full, encoding="utf-8") as fh:
        full_parts = io.spectra_from_csv(fh.read())
    with open(args.parts, encoding="utf-8") as fh:
        parts = io.spectra_from_csv(fh.read())
    if len(full_parts) != 1:
        raise InvalidParams(f"{args.full} must hold exactly one source, found {len(full_parts)}")
    rep = compare_spectra(full_parts[0], parts, args.tol)
    print(f"matched: {len(rep.matched)}")
    print(f"max deviation: {rep.max_deviation:.3e}")
    print(f"unmatched full: {len(rep.unmatched_full)}")
    for k in rep.unmatched_full:
        print(f"  k = {k:.15g}")
    print(f"unmatched parts: {len(rep.unmatched_parts)}")
    for k, src in rep.unmatched_parts:
        print(f"  k = {k:.15g} ({src})")
    print("verdict:", "pass" if rep.passed else "FAIL")
    if args.out:
        _write(args.out, io.dumps(io.report_to_dict(rep)) + "\n")
    return EXIT_PASS if rep.passed else EXIT_COMPARISON


def cmd_pipeline(args):
    cfg = PipelineConfig(
        preset=_preset_from_args(args) if args.preset else None,
        input=args.input,
        k_max=args.kmax,
        tol=args.tol,
        mesh=args.mesh,
        fd_count=args.count,
        out_dir=args.out_dir,
        skip_fd=args.skip_fd,
        emit_dot=args.emit_dot,
        emit_csv=not args.no_csv,
    )
    result = run_pipeline(cfg)
    rep = result.report
    print(f"status: {rep['status']}")
    if "totals" in rep:
        t = rep["totals"]
        print(f"branches: {t['branches']}  eigenvalues: reduced {t['reduced_eigenvalues']}, full {t['full_eigenvalues']}")
        print(f"max deviation: {rep['comparison']['max_deviation']:.3e}")
    if "fd_check" in rep:
        print(f"fd max relative deviation: {rep['fd_check']['max_relative_deviation']:.3e}")
    if cfg.out_dir is None:
        sys.stdout.write(io.dumps(rep) + "\n")
    return result.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpgraph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="build a preset graph")
    _add_preset_args(p, required=True)
    p.add_argument("--out")
    p.add_argument("--dot", help="also write Graphviz source here")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check", help="family preservation and Lambda commutation")
    p.add_argument("--input", required=True)
    p.add_argument("--algebraic-only", action="store_true")
    p.add_argument("--budget", type=int, default=10**7)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("balance", help="subdivide bad generations")
    p.add_argument("--input", required=True)
    p.add_argument("--length", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("decompose", help="discrete cyclic decomposition")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reduce", help="one-dimensional operators of all branches")
    p.add_argument("--input", required=True)
    p.add_argument("--branches", required=True)
    p.add_argument("--length", type=float)
    p.add_argument("--out")
    p.add_argument("--dot-prefix", help="write h^r edge labels to <prefix><r>.dot")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("spectrum", help="eigenvalues of reduced operators")
    p.add_argument("--ops", required=True)
    p.add_argument("--kmax", type=float, default=10.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("spectrum-full", help="eigenvalues of the whole graph")
    p.add_argument("--input", required=True)
    p.add_argument("--length", type=float)
    p.add_argument("--kmax", type=float, default=10.0)
    p.add_argument("--method", choices=("secular", "fd"), default="secular")
    p.add_argument("--mesh", type=float, default=1 / 64)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum_full)

    p = sub.add_parser("compare", help="match reduced spectra against the full spectrum")
    p.add_argument("--full", required=True)
    p.add_argument("--parts", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pipeline", help="run every stage and write a report")
    _add_preset_args(p, required=False)
    p.add_argument("--input")
    p.add_argument("--kmax", type=float, default=10.0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--mesh", type=float, default=1 / 64)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--out-dir")
    p.add_argument("--skip-fd", action="store_true")
    p.add_argument("--emit-dot", action="store_true")
    p.add_argument("--no-csv", action="store_true")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, (OSError, json.JSONDecodeError)):
            return EXIT_IO
        return EXIT_STAGE_ERROR
    except FPGraphError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
