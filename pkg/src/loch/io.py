"""JSON formats for index sets, measure and Hilbert systems, operators and models.

Output is deterministic: keys keep construction order, reals are written
with 17 significant digits, complex numbers as ``[re, im]`` pairs, and
non-string identifiers as strings (tuples joined by commas).
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import MalformedInput
from .geometry import Segment
from .hilbert import InductiveHilbertSystem
from .measure import InductiveMeasureSystem, MeasureSpaceNode, atomic_node, segment_node
from .operator import CoherentOperator
from .order import ChainWitness, DirectedSet, check_directed

# --------------------------------------------------------------------------
# deterministic encoder


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0.0:
        return "0.0"
    text = format(x, ".17g")
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def _encode(obj, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," + pad if indent else ","
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return "[" + _float(obj.real) + "," + _float(obj.imag) + "]"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [json.dumps(id_str(k), ensure_ascii=False) + ":" + (" " if indent else "")
                 + _encode(v, indent, level + 1) for k, v in obj.items()]
        return "{" + pad + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if not indent or not _has_dict(obj):
            return "[" + ",".join(_encode(v, 0, 0) for v in obj) + "]"
        return "[" + pad + sep.join(_encode(v, indent, level + 1) for v in obj) + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def _has_dict(obj) -> bool:
    if isinstance(obj, dict):
        return True
    if isinstance(obj, (list, tuple)):
        return any(_has_dict(v) for v in obj)
    return False


def dumps(obj, indent: int = 1) -> str:
    """Deterministic JSON text (17 significant digits, complex as pairs)."""
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise MalformedInput(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: invalid JSON ({exc})") from None


def id_str(e) -> str:
    """String form of an identifier (tuples are joined with commas)."""
    if isinstance(e, tuple):
        return ",".join(id_str(x) for x in e)
    return str(e)


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)):
        return complex(v)
    raise MalformedInput(f"bad complex value {v!r}")


def matrix_to_json(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(rows, shape: tuple | None = None) -> np.ndarray:
    try:
        a = np.array([[_complex(v) for v in row] for row in rows], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"bad matrix: {exc}") from None
    if shape is not None:
        if a.size == 0:
            a = np.zeros(shape, dtype=complex)
        elif a.shape != tuple(shape):
            raise MalformedInput(f"matrix has shape {a.shape}, expected {tuple(shape)}")
    return a


# --------------------------------------------------------------------------
# directed sets


def directed_set_to_json(ds: DirectedSet, chain: ChainWitness | None = None) -> dict:
    out = {"elements": [id_str(e) for e in ds.elements],
           "leq": [[id_str(a), id_str(b)] for b in ds.elements for a in ds.down_set(b)]}
    if chain is not None:
        out["chain"] = [id_str(e) for e in chain.chain]
    return out


def directed_set_from_json(data: dict) -> tuple[DirectedSet, ChainWitness | None]:
    if not isinstance(data, dict) or "elements" not in data:
        raise MalformedInput("directed set needs an 'elements' list")
    elems = [str(e) for e in data["elements"]]
    pairs = data.get("leq")
    if pairs is None:
        raise MalformedInput("directed set needs a 'leq' pair list")
    try:
        pairs = [(str(a), str(b)) for a, b in pairs]
    except (TypeError, ValueError):
        raise MalformedInput("'leq' must be a list of [smaller, larger] pairs") from None
    ds = check_directed(elems, pairs)
    chain = data.get("chain")
    return ds, (None if chain is None else ChainWitness(str(e) for e in chain))


# --------------------------------------------------------------------------
# measure systems


def _point(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def node_to_json(node: MeasureSpaceNode) -> dict:
    if node.kind == "atomic":
        out = {"kind": "atomic", "atoms": {id_str(k): float(w) for k, w in node.weights.items()}}
        if node.blocks is not None:
            out["blocks"] = [sorted(id_str(k) for k in b) for b in node.blocks]
        return out
    return {"kind": "segments",
            "segments": {id_str(k): [_point(s.start), _point(s.end)] for k, s in node.segments.items()}}


def node_from_json(data: dict) -> MeasureSpaceNode:
    kind = data.get("kind")
    if kind == "atomic":
        atoms = data.get("atoms")
        if not isinstance(atoms, dict):
            raise MalformedInput("atomic node needs an 'atoms' object")
        return atomic_node({str(k): float(v) for k, v in atoms.items()}, data.get("blocks"),
                           bool(data.get("allow_null", False)))
    if kind == "segments":
        segs = data.get("segments")
        if isinstance(segs, list):
            segs = {str(i): s for i, s in enumerate(segs)}
        if not isinstance(segs, dict):
            raise MalformedInput("segment node needs a 'segments' list or object")
        try:
            return segment_node({str(k): Segment(_complex(a), _complex(b)) for k, (a, b) in segs.items()})
        except (TypeError, ValueError):
            raise MalformedInput("segments must be [[re, im], [re, im]] pairs") from None
    raise MalformedInput(f"unknown node kind {kind!r}")


def measure_system_to_json(system: InductiveMeasureSystem, chain: ChainWitness | None = None,
                           extra: dict | None = None) -> dict:
    out = dict(extra or {})
    out["index"] = directed_set_to_json(system.index, chain)
    out["nodes"] = {id_str(lam): node_to_json(system.nodes[lam]) for lam in system.index}
    if system.witnesses is not None:
        out["witnesses"] = {f"{id_str(a)}<={id_str(b)}": {id_str(k): id_str(v) for k, v in w.items()}
                            for (a, b), w in system.witnesses.items()}
    return out


def _pair_key(key: str) -> tuple[str, str]:
    if "<=" not in key:
        raise MalformedInput(f"pair key {key!r} must look like 'a<=b'")
    a, b = key.split("<=", 1)
    return a, b


def measure_system_from_json(data: dict) -> tuple[InductiveMeasureSystem, ChainWitness | None]:
    if "index" not in data or "nodes" not in data:
        raise MalformedInput("measure system needs 'index' and 'nodes'")
    ds, chain = directed_set_from_json(data["index"])
    nodes = {}
    for lam in ds:
        if lam not in data["nodes"]:
            raise MalformedInput(f"no node for {lam!r}")
        nodes[lam] = node_from_json(data["nodes"][lam])
    wit = data.get("witnesses")
    if wit is not None:
        wit = {_pair_key(k): {str(a): str(b) for a, b in v.items()} for k, v in wit.items()}
    return InductiveMeasureSystem(ds, nodes, wit), chain


# --------------------------------------------------------------------------
# Hilbert systems and operators


def hilbert_system_to_json(system: InductiveHilbertSystem, chain: ChainWitness | None = None) -> dict:
    out = {"index": directed_set_to_json(system.index, chain),
           "dims": {id_str(lam): system.dims[lam] for lam in system.index}}
    if system.coordinates is not None:
        out["coordinates"] = {id_str(lam): [id_str(c) for c in system.coordinates[lam]]
                              for lam in system.index}
    else:
        out["embeddings"] = {f"{id_str(a)}<={id_str(b)}": matrix_to_json(system.J(b, a))
                             for a, b in system.index.comparable_pairs()}
    return out


def hilbert_system_from_json(data: dict) -> tuple[InductiveHilbertSystem, ChainWitness | None]:
    from .hilbert import validate_hilbert_system

    if "index" not in data:
        raise MalformedInput("Hilbert system needs an 'index'")
    ds, chain = directed_set_from_json(data["index"])
    if "coordinates" in data:
        coords = {lam: tuple(str(c) for c in data["coordinates"][lam]) for lam in ds}
        dims = {lam: len(coords[lam]) for lam in ds}
        return validate_hilbert_system(ds, dims, coordinates=coords), chain
    try:
        dims = {lam: int(data["dims"][lam]) for lam in ds}
    except (KeyError, TypeError, ValueError):
        raise MalformedInput("'dims' must give an integer for every element") from None
    emb = {}
    for k, rows in (data.get("embeddings") or {}).items():
        a, b = _pair_key(k)
        if a not in ds or b not in ds:
            raise MalformedInput(f"embedding {k!r} mentions an unknown element")
        emb[(a, b)] = matrix_from_json(rows, (dims[b], dims[a]))
    return validate_hilbert_system(ds, dims, embeddings=emb), chain


def operator_to_json(op: CoherentOperator, chain: ChainWitness | None = None) -> dict:
    out = {"system": hilbert_system_to_json(op.domain, chain)}
    if not op.square:
        out["codomain"] = hilbert_system_to_json(op.codomain)
    out["blocks"] = {id_str(lam): matrix_to_json(op.blocks[lam]) for lam in op.index}
    return out


def load_system_ref(ref, base: Path | None = None):
    if isinstance(ref, str):
        path = Path(ref) if base is None or Path(ref).is_absolute() else base / ref
        return hilbert_system_from_json(read_json(path))
    if isinstance(ref, dict):
        return hilbert_system_from_json(ref)
    raise MalformedInput("'system' must be an inline object or a file path")


def operator_blocks_from_json(data: dict, base: Path | None = None, system=None):
    """``(domain, codomain, raw blocks, chain)`` without checking coherence."""
    if not isinstance(data, dict) or "blocks" not in data:
        raise MalformedInput("operator needs 'blocks'")
    chain = None
    if system is None:
        if "system" not in data:
            raise MalformedInput("operator needs a 'system'")
        system, chain = load_system_ref(data["system"], base)
    codomain = system
    if "codomain" in data:
        codomain, _ = load_system_ref(data["codomain"], base)
    blocks = {}
    for lam in system.index:
        if lam not in data["blocks"]:
            raise MalformedInput(f"no block for node {lam!r}")
        blocks[lam] = matrix_from_json(data["blocks"][lam], (codomain.dims[lam], system.dims[lam]))
    return system, (codomain if codomain is not system else None), blocks, chain


# --------------------------------------------------------------------------
# models


def multiplicity_model_to_json(model) -> dict:
    from .spectral import direct_integral_view

    ch = ChainWitness(model.chain)
    view = direct_integral_view(model)
    return {
        "operator": operator_to_json(model.operator, ch),
        "chain": [id_str(e) for e in model.chain],
        "points": [{"id": p.ident, "value": p.value, "multiplicity": p.multiplicity,
                    "nodes": [id_str(lam) for lam, b in zip(model.system.index.elements, p.members) if b],
                    "born": p.born} for p in model.points],
        "phi": {str(n): {str(k): v for k, v in model.phi(n).items()} for n in model.multiplicities},
        "layers": {id_str(lam): {str(n): [p.ident for p in model.layer(lam, n)] for n in model.multiplicities}
                   for lam in model.system.index},
        "infinite_multiplicity": [],
        "coordinates": {id_str(lam): [list(c) for c in model.coordinates[lam]] for lam in model.system.index},
        "unitaries": {id_str(lam): matrix_to_json(model.unitaries[lam]) for lam in model.system.index},
        "fibers": {id_str(lam): [{"point": f.point, "dimension": f.dimension, "value": f.value}
                                 for f in fibers] for lam, fibers in view.items()},
        "residuals": {id_str(lam): r for lam, r in model.residuals.items()},
        "splits": model.splits,
    }


def verify_model_json(data: dict) -> dict:
    """Recompute residuals, unitarity and bookkeeping from a serialized model."""
    from .linalg import spectral_norm

    for key in ("operator", "points", "unitaries", "coordinates"):
        if key not in data:
            raise MalformedInput(f"model needs {key!r}")
    system, _, blocks, _ = operator_blocks_from_json(data["operator"])
    value = {int(p["id"]): _complex(p["value"]) for p in data["points"]}
    mult = {int(p["id"]): int(p["multiplicity"]) for p in data["points"]}
    out = {"residual": 0.0, "unitarity": 0.0, "dimension_ok": True, "sup_ok": True, "per_node": {}}
    for lam in system.index:
        d = system.dims[lam]
        u = matrix_from_json(data["unitaries"][lam], (d, d))
        coords = data["coordinates"][lam]
        diag = np.diag([value[int(c[2])] for c in coords]) if coords else np.zeros((0, 0))
        res = spectral_norm(u @ blocks[lam] @ u.conj().T - diag)
        uni = max(spectral_norm(u.conj().T @ u - np.eye(d)), spectral_norm(u @ u.conj().T - np.eye(d)))
        pts = {int(c[2]) for c in coords}
        count = sum(mult[p] for p in pts)
        sup = max((abs(value[p]) for p in pts), default=0.0)
        out["per_node"][lam] = {"residual": res, "unitarity": uni, "dimension": d, "count": count}
        out["residual"] = max(out["residual"], res)
        out["unitarity"] = max(out["unitarity"], uni)
        out["dimension_ok"] &= count == d and len(coords) == d
        out["sup_ok"] &= sup <= spectral_norm(blocks[lam]) + 1e-9
    return out
