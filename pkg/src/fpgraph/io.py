"""JSON and CSV formats for graphs, branches, reduced operators and spectra.

Floats are written with 17 significant digits and complex numbers as
``[re, im]`` pairs, so files round-trip exactly and identical inputs give
byte-identical output.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from fractions import Fraction

import numpy as np

from .discrete import Branch, DiscreteDecomposition, SphereVector
from .errors import ShapeMismatch
from .graph import LayeredGraph, MetricLayers, validate_graph
from .reduction import Jump, ReducedOperator
from .spectral import Spectrum, SpectrumEntry

CSV_COLUMNS = ("source", "index", "k", "lambda", "multiplicity")


def _float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize {x}")
    return format(x, ".17g")


def dumps(obj, indent: int = 1, _level: int = 0) -> str:
    """JSON text with 17-digit floats; keys keep insertion order."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, type(None), str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return f"[{_float(obj.real)}, {_float(obj.imag)}]"
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # short scalar rows stay on one line
        if all(isinstance(x, (int, float, np.number, complex)) for x in obj):
            return "[" + ", ".join(dumps(x, indent, _level + 1) for x in obj) + "]"
        items = [pad + dumps(x, indent, _level + 1) for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj) + "\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# --- graphs -----------------------------------------------------------------


def graph_to_dict(g: LayeredGraph, m: MetricLayers | None = None) -> dict:
    """``{"spheres", "edges", "lengths"}`` with edges as ``[child, parent]`` pairs."""
    out = {
        "spheres": list(g.sphere_sizes),
        "edges": [[[int(c), int(p)] for p, c in g.edges(j)] for j in range(g.depth)],
    }
    if m is not None:
        out["lengths"] = [float(x) for x in m.lengths]
    if g.terminal:
        out["terminal"] = [list(t) for t in sorted(g.terminal)]
    return out


def graph_from_dict(doc: dict):
    """Parse a graph document; returns ``(graph, metric or None)``."""
    try:
        sizes = [int(s) for s in doc["spheres"]]
        edges = doc["edges"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeMismatch(f"malformed graph document: {exc}") from exc
    if len(edges) != len(sizes) - 1:
        raise ShapeMismatch(f"{len(sizes)} spheres need {len(sizes) - 1} edge lists, got {len(edges)}")
    mats = []
    for j, pairs in enumerate(edges):
        b = np.zeros((sizes[j + 1], sizes[j]), dtype=np.int64)
        for pair in pairs:
            if len(pair) != 2:
                raise ShapeMismatch(f"generation {j}: edge {pair} is not a [child, parent] pair")
            c, p = int(pair[0]), int(pair[1])
            if not (0 <= c < sizes[j + 1] and 0 <= p < sizes[j]):
                raise ShapeMismatch(f"generation {j}: edge {pair} out of range")
            b[c, p] += 1  # repeated pairs surface as MultiEdge in validation
        mats.append(b)
    terminal = {tuple(int(x) for x in t) for t in doc.get("terminal", [])}
    g = validate_graph(sizes, mats, terminal)
    m = None
    if doc.get("lengths") is not None:
        lengths = doc["lengths"]
        if isinstance(lengths, (int, float)):
            lengths = [lengths] * g.depth
        if len(lengths) != g.depth:
            raise ShapeMismatch(f"{len(lengths)} lengths for depth {g.depth}")
        m = MetricLayers(tuple(float(x) for x in lengths))
    return g, m


def load_graph(path):
    return graph_from_dict(read_json(path))


# --- branches ---------------------------------------------------------------


def branches_to_dict(dec: DiscreteDecomposition) -> dict:
    return {
        "graph": graph_to_dict(dec.graph),
        "branches": [
            {
                "r": b.r,
                "n_r": b.n_r,
                "chain": [[complex(x) for x in v.values] for v in b.chain],
                "lambda_tags": {str(j): t for j, t in b.lambda_tags.items()},
            }
            for b in dec.branches
        ],
    }


def branches_from_dict(doc: dict, g: LayeredGraph | None = None) -> DiscreteDecomposition:
    if g is None:
        g, _ = graph_from_dict(doc["graph"])
    branches = []
    for item in doc["branches"]:
        n_r = int(item["n_r"])
        chain = tuple(
            SphereVector(n_r + k, np.array([complex(re, im) for re, im in vals]))
            for k, vals in enumerate(item["chain"])
        )
        for v in chain:
            if v.n > g.depth or len(v.values) != g.sphere_sizes[v.n]:
                raise ShapeMismatch(f"branch {item['r']}: chain does not fit sphere {v.n}")
        tags = {int(j): float(t) for j, t in item["lambda_tags"].items()}
        branches.append(Branch(int(item["r"]), n_r, chain, tags))
    return DiscreteDecomposition(tuple(branches), g)


# --- reduced operators ------------------------------------------------------


def operator_to_dict(op: ReducedOperator) -> dict:
    """Breakpoints ``t_a .. t_b``; interior ones carry ``d``, ``c`` and their exact squares."""
    points = []
    for idx, t in enumerate(op.breakpoints):
        j = op.a_index + idx
        entry = {"index": j, "t": float(t)}
        if 0 < idx < len(op.breakpoints) - 1:
            jump = next((x for x in op.jumps if x.j == j), None)
            if jump is None:
                jump = Jump(j, 1.0, 1.0, Fraction(1), Fraction(1))
            entry.update(d=jump.d, c=jump.c, d_sq=jump.d_sq, c_sq=jump.c_sq)
        points.append(entry)
    return {"r": op.r, "n_r": op.n_r, "a": op.a, "b": op.b, "breakpoints": points}


def operator_from_dict(doc: dict) -> ReducedOperator:
    points = doc["breakpoints"]
    if len(points) < 2:
        raise ShapeMismatch(f"operator {doc.get('r')}: needs at least two breakpoints")
    jumps = []
    for p in points[1:-1]:
        d_sq = Fraction(p["d_sq"]) if "d_sq" in p else Fraction(p["d"] ** 2).limit_denominator()
        c_sq = Fraction(p["c_sq"]) if "c_sq" in p else Fraction(p["c"] ** 2).limit_denominator()
        jumps.append(Jump(int(p["index"]), float(p["d"]), float(p["c"]), d_sq, c_sq))
    return ReducedOperator(
        int(doc["r"]),
        int(doc["n_r"]),
        int(points[0]["index"]),
        int(points[-1]["index"]),
        tuple(float(p["t"]) for p in points),
        tuple(jumps),
    )


def operators_to_dict(ops) -> dict:
    return {"operators": [operator_to_dict(op) for op in ops]}


def operators_from_dict(doc: dict) -> list[ReducedOperator]:
    return [operator_from_dict(d) for d in doc["operators"]]


# --- spectra ----------------------------------------------------------------


def spectra_to_csv(spectra) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for s in spectra:
        for i, e in enumerate(s.entries):
            writer.writerow([e.source, i, _float(e.k), _float(e.k**2), e.multiplicity])
    return buf.getvalue()


def spectra_from_csv(text: str, k_max: float = math.inf) -> list[Spectrum]:
    """One :class:`Spectrum` per distinct source, in order of appearance."""
    groups: dict[str, list[SpectrumEntry]] = {}
    reader = csv.DictReader(_io.StringIO(text))
    if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
        raise ShapeMismatch(f"expected CSV columns {CSV_COLUMNS}, got {reader.fieldnames}")
    for row in reader:
        e = SpectrumEntry(float(row["k"]), int(row["multiplicity"]), row["source"])
        groups.setdefault(e.source, []).append(e)
    return [Spectrum(tuple(v), k_max) for v in groups.values()]


def report_to_dict(report) -> dict:
    """Serializable form of a :class:`~fpgraph.spectral.ComparisonReport`."""
    return {
        "passed": report.passed,
        "matched": len(report.matched),
        "max_deviation": report.max_deviation,
        "unmatched_full": list(report.unmatched_full),
        "unmatched_parts": [{"k": k, "source": s} for k, s in report.unmatched_parts],
    }
