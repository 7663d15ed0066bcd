"""Strictly inductive systems of measure spaces and their limits.

Two kinds of carrier are supported: finite atomic spaces (weighted atoms,
optionally with a coarser generating partition for the sigma-algebra) and
finite unions of oriented segments in the plane carrying length measure.

Sets of the limit space are described intensionally by small expression
trees (:class:`SetExpr`) that are evaluated node by node.  Set equality is
taken modulo null sets: segment traces are unions of parameter intervals
and endpoints are ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (ClassificationError, ConsistencyAlarm, DegenerateCarrier,
                     MalformedInput, PreconditionError, Report, ValidationError,
                     Violation)
from .geometry import Segment
from .order import DirectedSet

MEASURE_TOL = 1e-12
GEOM_TOL = 1e-12


# --------------------------------------------------------------------------
# interval arithmetic on [0, 1]

Intervals = tuple  # sorted, disjoint ((a, b), ...) with a < b


def _normalize(iv: Iterable[tuple[float, float]]) -> Intervals:
    items = sorted((max(0.0, a), min(1.0, b)) for a, b in iv)
    out: list[list[float]] = []
    for a, b in items:
        if b - a <= 0.0:
            continue
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


def _iv_union(x: Intervals, y: Intervals) -> Intervals:
    return _normalize(x + y)


def _iv_intersect(x: Intervals, y: Intervals) -> Intervals:
    out = []
    i = j = 0
    while i < len(x) and j < len(y):
        a = max(x[i][0], y[j][0])
        b = min(x[i][1], y[j][1])
        if a < b:
            out.append((a, b))
        if x[i][1] < y[j][1]:
            i += 1
        else:
            j += 1
    return tuple(out)


def _iv_complement(x: Intervals) -> Intervals:
    out = []
    prev = 0.0
    for a, b in x:
        if a > prev:
            out.append((prev, a))
        prev = b
    if prev < 1.0:
        out.append((prev, 1.0))
    return tuple(out)


def _iv_length(x: Intervals) -> float:
    return math.fsum(b - a for a, b in x)


FULL: Intervals = ((0.0, 1.0),)


def _segment_overlap(seg: Segment, other: Segment, tol: float = GEOM_TOL) -> Intervals:
    """Parameter interval of ``seg`` covered by ``other`` (empty unless collinear)."""
    d = seg.end - seg.start
    dd = abs(d) ** 2
    if dd == 0.0:
        return ()
    ts = []
    for q in (other.start, other.end):
        rel = q - seg.start
        t = (rel * d.conjugate()).real / dd
        if abs(rel - t * d) > tol:
            return ()
        ts.append(t)
    return _normalize([(min(ts), max(ts))])


# --------------------------------------------------------------------------
# carriers


@dataclass(frozen=True)
class MeasureSpaceNode:
    """One measure space ``(X, Omega, mu)`` of a system.

    Exactly one of ``weights`` (atomic carrier) or ``segments`` (segment
    union with length measure) is set.  ``blocks`` optionally restricts the
    sigma-algebra of an atomic carrier to the one generated by a partition;
    ``None`` means every subset is measurable.
    """

    weights: Mapping[Hashable, float] | None = None
    segments: Mapping[Hashable, Segment] | None = None
    blocks: tuple | None = None
    allow_null: bool = False

    @property
    def kind(self) -> str:
        return "atomic" if self.weights is not None else "segments"

    @property
    def keys(self) -> tuple:
        src = self.weights if self.weights is not None else self.segments
        return tuple(src)

    def total(self) -> float:
        if self.weights is not None:
            return math.fsum(self.weights.values())
        return math.fsum(s.length for s in self.segments.values())


def atomic_node(weights: Mapping[Hashable, float], blocks: Iterable[Iterable] | None = None,
                allow_null: bool = False) -> MeasureSpaceNode:
    w = {k: float(v) for k, v in weights.items()}
    b = None if blocks is None else tuple(frozenset(x) for x in blocks)
    return MeasureSpaceNode(weights=w, blocks=b, allow_null=allow_null)


def segment_node(segments: Mapping[Hashable, Segment] | Sequence[Segment]) -> MeasureSpaceNode:
    if not isinstance(segments, Mapping):
        segments = dict(enumerate(segments))
    return MeasureSpaceNode(segments=dict(segments))


def _check_node(lam, node: MeasureSpaceNode) -> Violation | None:
    if (node.weights is None) == (node.segments is None):
        raise MalformedInput(f"node {lam!r} must be either atomic or a segment union")
    if node.weights is not None:
        for k, w in node.weights.items():
            if not (w > 0 or (w == 0 and node.allow_null)) or not math.isfinite(w):
                return Violation("sim1", f"atom {k!r} of node {lam!r} has weight {w}", (lam, k))
        if node.blocks is not None:
            seen: set = set()
            for blk in node.blocks:
                if not blk or blk & seen or not blk <= set(node.weights):
                    return Violation("sim1", f"blocks of node {lam!r} do not partition its atoms", (lam,))
                seen |= blk
            if seen != set(node.weights):
                return Violation("sim1", f"blocks of node {lam!r} do not cover its atoms", (lam,))
    else:
        segs = list(node.segments.items())
        for i, (ki, si) in enumerate(segs):
            for kj, sj in segs[i + 1:]:
                if _iv_length(_segment_overlap(si, sj)) > 0:
                    return Violation("sim1", f"segments {ki!r} and {kj!r} of node {lam!r} overlap",
                                     (lam, ki, kj))
    return None


# --------------------------------------------------------------------------
# systems


class InductiveMeasureSystem:
    """Net of measure spaces over a finite directed set with inclusion witnesses.

    ``witnesses[(lam, nu)]`` maps the carrier keys of ``lam`` into those of
    ``nu``; when omitted the keys themselves are the points and inclusion is
    the identity.  ``truncated`` marks a finite window onto an infinite
    system (the Hata families); ``tail`` then supplies limit values for the
    sets that reach beyond the window.
    """

    def __init__(self, index: DirectedSet, nodes: Mapping, witnesses: Mapping | None = None,
                 truncated: bool = False, tail=None, meta: dict | None = None):
        self.index = index
        self.nodes = dict(nodes)
        self.witnesses = None if witnesses is None else {k: dict(v) for k, v in witnesses.items()}
        self.truncated = truncated
        self.tail = tail
        self.meta = dict(meta or {})
        missing = [lam for lam in index if lam not in self.nodes]
        if missing:
            raise MalformedInput(f"no node for index {missing[0]!r}")
        kinds = {n.kind for n in self.nodes.values()}
        if len(kinds) != 1:
            raise MalformedInput("all nodes of a system must share one carrier kind")
        self.kind = kinds.pop()
        self._canon: dict = {}
        self._global = None

    def witness(self, lam, nu) -> dict:
        if lam == nu or self.witnesses is None:
            return {k: k for k in self.nodes[lam].keys}
        try:
            return self.witnesses[(lam, nu)]
        except KeyError:
            raise MalformedInput(f"no inclusion witness for {lam!r} <= {nu!r}") from None

    @property
    def top(self):
        return self.index.top()

    def canonical(self, lam) -> dict:
        """Map from ``lam``'s keys to the keys of the top node."""
        if lam not in self._canon:
            self._canon[lam] = self.witness(lam, self.top)
        return self._canon[lam]

    def global_segments(self) -> dict:
        """Segment table of the top node (every segment of the system lives there)."""
        if self.kind != "segments":
            raise ClassificationError("system is not a segment system")
        return dict(self.nodes[self.top].segments)

    def node_keys(self, lam) -> frozenset:
        """Canonical (top) keys of the carrier of ``lam``."""
        return frozenset(self.canonical(lam)[k] for k in self.nodes[lam].keys)

    # -- measures ---------------------------------------------------------

    def node_measure(self, lam, trace) -> float:
        node = self.nodes[lam]
        canon = self.canonical(lam)
        if self.kind == "atomic":
            return math.fsum(w for k, w in node.weights.items() if canon[k] in trace)
        return math.fsum(seg.length * _iv_length(trace.get(canon[k], ()))
                         for k, seg in node.segments.items())

    def node_measurable(self, lam, trace) -> bool:
        node = self.nodes[lam]
        if self.kind != "atomic" or node.blocks is None:
            return True
        canon = self.canonical(lam)
        local = {k for k in node.weights if canon[k] in trace}
        return all(blk <= local or not (blk & local) for blk in node.blocks)

    def contained_in(self, lam, trace) -> bool:
        keys = self.node_keys(lam)
        if self.kind == "atomic":
            return trace <= keys
        return all(k in keys for k, iv in trace.items() if _iv_length(iv) > 0)


def validate_system(system: InductiveMeasureSystem, tol: float = MEASURE_TOL) -> InductiveMeasureSystem:
    """Check sim1-sim3 and witness transitivity on every comparable pair.

    Raises ``ValidationError`` naming the first violated axiom, or
    ``MalformedInput`` when a witness map is not an injection.
    """
    report = system_report(system, tol)
    if not report.ok:
        raise ValidationError(report.violation)
    return system


def system_report(system: InductiveMeasureSystem, tol: float = MEASURE_TOL) -> Report:
    index = system.index
    for lam in index:
        v = _check_node(lam, system.nodes[lam])
        if v is not None:
            return Report(False, v)

    for lam, nu in index.comparable_pairs():
        small, big = system.nodes[lam], system.nodes[nu]
        w = system.witness(lam, nu)
        if set(w) != set(small.keys):
            raise MalformedInput(f"witness {lam!r}->{nu!r} does not cover the carrier of {lam!r}")
        if len(set(w.values())) != len(w):
            raise MalformedInput(f"witness {lam!r}->{nu!r} is not injective")
        big_keys = set(big.keys)
        for k, kk in w.items():
            if kk not in big_keys:
                return Report(False, Violation("sim2", f"point {k!r} of {lam!r} is missing from {nu!r}",
                                               (lam, nu, k)))
        if system.kind == "atomic":
            for k, kk in w.items():
                a, b = small.weights[k], big.weights[kk]
                if abs(a - b) > tol * (1 + abs(b)):
                    return Report(False, Violation("sim3", f"mass of {k!r} differs: {a} vs {b}",
                                                   (lam, nu, k), abs(a - b)))
            traced = _traced_blocks(big, set(w.values()))
            own = _own_blocks(small, w)
            if traced != own:
                return Report(False, Violation(
                    "sim2", f"sigma-algebra of {lam!r} is not the trace of that of {nu!r}", (lam, nu)))
        else:
            for k, kk in w.items():
                s, t = small.segments[k], big.segments[kk]
                if abs(s.start - t.start) > GEOM_TOL or abs(s.end - t.end) > GEOM_TOL:
                    return Report(False, Violation(
                        "sim2", f"segment {k!r} of {lam!r} is not the same in {nu!r}", (lam, nu, k),
                        max(abs(s.start - t.start), abs(s.end - t.end))))
                if abs(s.length - t.length) > tol * (1 + t.length):
                    return Report(False, Violation("sim3", f"length of {k!r} differs", (lam, nu, k)))

    if system.witnesses is not None:
        for lam, nu in index.comparable_pairs():
            for eta in index.elements:
                if eta == nu or not index.le(nu, eta):
                    continue
                w1, w2, w3 = system.witness(lam, nu), system.witness(nu, eta), system.witness(lam, eta)
                for k in w1:
                    if w2[w1[k]] != w3[k]:
                        return Report(False, Violation(
                            "transitivity", f"witnesses {lam!r}->{nu!r}->{eta!r} disagree on {k!r}",
                            (lam, nu, eta, k)))
    return Report(True)


def _traced_blocks(big: MeasureSpaceNode, image: set) -> frozenset:
    if big.blocks is None:
        return frozenset(frozenset([k]) for k in image)
    return frozenset(frozenset(b & image) for b in big.blocks if b & image)


def _own_blocks(small: MeasureSpaceNode, w: dict) -> frozenset:
    if small.blocks is None:
        return frozenset(frozenset([w[k]]) for k in small.weights)
    return frozenset(frozenset(w[k] for k in b) for b in small.blocks)


# --------------------------------------------------------------------------
# set descriptions


class SetExpr:
    """Intensional description of a subset of the limit space."""

    def __or__(self, other):
        return Union(self, other)

    def __and__(self, other):
        return Intersection(self, other)

    def __sub__(self, other):
        return Difference(self, other)

    def unbounded(self, system) -> bool:
        """True when the set reaches past every node of the (untruncated) system."""
        return False

    def trace(self, system):
        """Global trace: atom keys (atomic) or ``{segment key: intervals}``."""
        raise NotImplementedError


def _empty_trace(system):
    return frozenset() if system.kind == "atomic" else {}


class Empty(SetExpr):
    def trace(self, system):
        return _empty_trace(system)

    def __repr__(self):
        return "Empty()"


class Everything(SetExpr):
    """The whole limit space ``X``."""

    def unbounded(self, system):
        return system.truncated

    def trace(self, system):
        if system.kind == "atomic":
            return system.node_keys(system.top)
        return {k: FULL for k in system.global_segments()}

    def __repr__(self):
        return "Everything()"


@dataclass(frozen=True, eq=False)
class Atoms(SetExpr):
    keys: frozenset

    def __init__(self, keys):
        object.__setattr__(self, "keys", frozenset(keys))

    def trace(self, system):
        if system.kind != "atomic":
            return {}
        return self.keys & system.node_keys(system.top)


@dataclass(frozen=True, eq=False)
class Pieces(SetExpr):
    """Parameter sub-intervals of named segments: ``{key: [(t0, t1), ...]}``.

    A key mapped to ``None`` stands for the whole segment.
    """

    parts: tuple

    def __init__(self, parts):
        if not isinstance(parts, Mapping):
            parts = {k: None for k in parts}
        items = tuple((k, FULL if v is None else _normalize(v)) for k, v in parts.items())
        object.__setattr__(self, "parts", items)

    def trace(self, system):
        if system.kind == "atomic":
            return frozenset()
        known = system.global_segments()
        return {k: iv for k, iv in self.parts if k in known and iv}


@dataclass(frozen=True, eq=False)
class Region(SetExpr):
    """Union of closed segments of the plane (intersected with the limit space)."""

    segments: tuple

    def __init__(self, segments):
        object.__setattr__(self, "segments", tuple(segments))

    def trace(self, system):
        if system.kind == "atomic":
            return frozenset()
        out = {}
        for k, seg in system.global_segments().items():
            iv = ()
            for r in self.segments:
                iv = _iv_union(iv, _segment_overlap(seg, r))
            if iv:
                out[k] = iv
        return out


@dataclass(frozen=True, eq=False)
class Carrier(SetExpr):
    """The carrier ``X_lam`` of one node."""

    node: Hashable

    def trace(self, system):
        keys = system.node_keys(self.node)
        if system.kind == "atomic":
            return keys
        return {k: FULL for k in keys}


@dataclass(frozen=True, eq=False)
class Union(SetExpr):
    left: SetExpr
    right: SetExpr

    def unbounded(self, system):
        return self.left.unbounded(system) or self.right.unbounded(system)

    def trace(self, system):
        a, b = self.left.trace(system), self.right.trace(system)
        if system.kind == "atomic":
            return a | b
        return {k: _iv_union(a.get(k, ()), b.get(k, ())) for k in set(a) | set(b)}


@dataclass(frozen=True, eq=False)
class Intersection(SetExpr):
    left: SetExpr
    right: SetExpr

    def unbounded(self, system):
        return self.left.unbounded(system) and self.right.unbounded(system)

    def trace(self, system):
        a, b = self.left.trace(system), self.right.trace(system)
        if system.kind == "atomic":
            return a & b
        out = {}
        for k in set(a) & set(b):
            iv = _iv_intersect(a[k], b[k])
            if iv:
                out[k] = iv
        return out


@dataclass(frozen=True, eq=False)
class Difference(SetExpr):
    left: SetExpr
    right: SetExpr

    def unbounded(self, system):
        # conservative: removing a set never makes an unbounded set bounded here
        return self.left.unbounded(system)

    def trace(self, system):
        a, b = self.left.trace(system), self.right.trace(system)
        if system.kind == "atomic":
            return a - b
        out = {}
        for k, iv in a.items():
            rest = _iv_intersect(iv, _iv_complement(b.get(k, ())))
            if rest:
                out[k] = rest
        return out


def union_all(exprs: Iterable[SetExpr]) -> SetExpr:
    out: SetExpr = Empty()
    for e in exprs:
        out = e if isinstance(out, Empty) else Union(out, e)
    return out


# --------------------------------------------------------------------------
# classification and measures


@dataclass(frozen=True)
class Classification:
    """Where a set lives: ``"omega"`` (inside some node), ``"omega_tilde"``
    (measurable trace on every node only) or ``"not_measurable"``."""

    kind: str
    node: Hashable | None = None
    witness: Hashable | None = None

    @property
    def in_omega(self) -> bool:
        return self.kind == "omega"

    @property
    def in_omega_tilde(self) -> bool:
        return self.kind in ("omega", "omega_tilde")


def is_in_omega_tilde(system: InductiveMeasureSystem, expr: SetExpr) -> Classification:
    """Classify ``expr`` against the union sigma-algebra and its extension.

    For an ``omega`` verdict the reported node is the smallest (by id) node
    whose carrier contains the set.
    """
    trace = expr.trace(system)
    for lam in system.index:
        if not system.node_measurable(lam, trace):
            return Classification("not_measurable", witness=lam)
    if expr.unbounded(system):
        return Classification("omega_tilde")
    for lam in system.index:
        if system.contained_in(lam, trace):
            return Classification("omega", node=lam)
    return Classification("omega_tilde")


def node_measure(system: InductiveMeasureSystem, lam, expr: SetExpr) -> float:
    """``mu_lam(A cap X_lam)``."""
    return system.node_measure(lam, expr.trace(system))


def limit_measure(system: InductiveMeasureSystem, expr: SetExpr, tol: float = MEASURE_TOL) -> float:
    """Measure of a set of the union sigma-algebra.

    The value is read at the containing node and cross-checked at the top
    node; a mismatch means the system violates measure compatibility.
    """
    cls = is_in_omega_tilde(system, expr)
    if not cls.in_omega:
        raise ClassificationError(f"set is classified {cls.kind}, not in the union sigma-algebra")
    trace = expr.trace(system)
    value = system.node_measure(cls.node, trace)
    check = system.node_measure(system.top, trace)
    if abs(value - check) > tol * (1 + abs(value)):
        raise ConsistencyAlarm(f"measure depends on the node: {value} at {cls.node!r}, {check} at top")
    return value


def extended_measure(system: InductiveMeasureSystem, expr: SetExpr) -> float:
    """Supremum over nodes of ``mu_lam(A cap X_lam)``; may be ``inf``.

    The net of node values is nondecreasing, so on a finite index set the
    supremum is attained at the top.  Sets reaching past a truncated system
    are handed to the system's declared tail model.
    """
    cls = is_in_omega_tilde(system, expr)
    if cls.kind == "not_measurable":
        raise ClassificationError(f"set is not measurable on node {cls.witness!r}")
    if expr.unbounded(system):
        if system.tail is None:
            raise ClassificationError("set reaches past the truncation and no tail model is declared")
        return system.tail.extended(system, expr)
    trace = expr.trace(system)
    return max(system.node_measure(lam, trace) for lam in system.index)


def extended_measures_vectorized(system: InductiveMeasureSystem, expr: SetExpr) -> np.ndarray:
    """Node values ``mu_lam(A cap X_lam)`` for every node, in index order.

    Segment systems only; uses one pass over the global segment table, which
    keeps very large index sets (thousands of branch unions) cheap.
    """
    segs = system.global_segments()
    keys = list(segs)
    col = {k: i for i, k in enumerate(keys)}
    trace = expr.trace(system)
    per_key = np.array([segs[k].length * _iv_length(trace.get(k, ())) for k in keys])
    rows = np.zeros((len(system.index), len(keys)))
    for i, lam in enumerate(system.index):
        for k in system.node_keys(lam):
            rows[i, col[k]] = 1.0
    return rows @ per_key


def extended_measure_table(system: InductiveMeasureSystem, exprs: Sequence[SetExpr],
                           chunk: int = 1024) -> tuple[np.ndarray, np.ndarray]:
    """``(sup over nodes, value at the top)`` for many bounded sets of a segment system.

    Works blockwise on a (sets x segments) trace matrix against the
    (nodes x segments) membership matrix, so thousands of sets over
    thousands of nodes stay cheap.
    """
    segs = system.global_segments()
    keys = list(segs)
    col = {k: i for i, k in enumerate(keys)}
    lengths = np.array([segs[k].length for k in keys])
    member = np.zeros((len(system.index), len(keys)))
    for i, lam in enumerate(system.index):
        for k in system.node_keys(lam):
            member[i, col[k]] = 1.0
    fractions = np.zeros((len(exprs), len(keys)))
    for r, e in enumerate(exprs):
        if e.unbounded(system):
            raise ClassificationError(f"{e!r} reaches past the truncation")
        for k, iv in e.trace(system).items():
            fractions[r, col[k]] = _iv_length(iv)
    per_key = fractions * lengths
    sup = np.empty(len(exprs))
    for lo in range(0, len(exprs), chunk):
        sup[lo:lo + chunk] = (per_key[lo:lo + chunk] @ member.T).max(axis=1)
    top = per_key @ member[system.index.elements.index(system.top)]
    return sup, top


def tail_growth_ratio(system: InductiveMeasureSystem, expr: SetExpr) -> float | None:
    """Per-level growth ratio used to justify the value of an unbounded set."""
    if not expr.unbounded(system) or system.tail is None:
        return None
    return system.tail.growth_ratio(system, expr)


def check_local_sigma_additivity(system: InductiveMeasureSystem, family: Sequence[SetExpr],
                                 rel_tol: float = MEASURE_TOL) -> Report:
    """Finite additivity of the limit measure on a disjoint family inside one node.

    Raises
    ------
    PreconditionError
        Two members overlap in positive measure, or no node contains the family.
    """
    traces = [e.trace(system) for e in family]
    for lam in system.index:
        if all(system.contained_in(lam, t) for t in traces):
            node = lam
            break
    else:
        raise PreconditionError("family does not lie inside a single node")

    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            overlap = Intersection(family[i], family[j]).trace(system)
            if system.node_measure(node, overlap) > 0:
                raise PreconditionError(
                    f"members {i} and {j} overlap",
                    Violation("disjoint", "family is not pairwise disjoint", (i, j)))

    parts = [system.node_measure(node, t) for t in traces]
    whole = system.node_measure(node, union_all(family).trace(system))
    total = math.fsum(parts)
    defect = abs(whole - total)
    ok = defect <= rel_tol * (1 + total)
    v = None if ok else Violation("additivity", "measure of the union differs from the sum",
                                  (node,), defect)
    return Report(ok, v, {"node": node, "union": whole, "sum": total, "defect": defect})


# --------------------------------------------------------------------------
# discretized L2


@dataclass(frozen=True)
class CarrierPoint:
    """A quadrature point: key, location (plane point or atom id) and mass."""

    key: Hashable
    location: object
    weight: float


@dataclass(frozen=True)
class L2Carrier:
    """Finite-dimensional stand-in for ``L2(X_lam, mu_lam)``.

    Coordinates are orthonormal: a function ``f`` is represented by
    ``sqrt(weight) * f(point)``.
    """

    points: tuple

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def weights(self) -> np.ndarray:
        return np.array([p.weight for p in self.points], dtype=float)

    def coordinates(self, values) -> np.ndarray:
        return np.sqrt(self.weights) * np.asarray(values)

    def gram(self) -> np.ndarray:
        """Gram matrix of the point indicators in the weighted inner product."""
        return np.diag(self.weights)


def discretize_l2(node: MeasureSpaceNode, samples: int = 1) -> L2Carrier:
    """Midpoint-rule discretization of one node (atoms are used directly).

    Zero-mass atoms are null functions and drop out of the space.
    """
    if node.weights is not None:
        return L2Carrier(tuple(CarrierPoint(k, k, w) for k, w in node.weights.items() if w > 0))
    if samples < 1:
        raise MalformedInput("need at least one sample per segment")
    pts = []
    for k, seg in node.segments.items():
        if seg.length == 0.0:
            raise DegenerateCarrier(f"segment {k!r} has zero length")
        w = seg.length / samples
        for i, z in enumerate(seg.midpoints(samples)):
            pts.append(CarrierPoint((k, i), complex(z), w))
    return L2Carrier(tuple(pts))


@dataclass
class DiscreteL2System:
    """Discretized ``L2`` net: carriers per node plus the Hilbert system they form."""

    measure: InductiveMeasureSystem
    carriers: dict
    hilbert: object = field(repr=False)
    samples: int = 1


def discretize_system(system: InductiveMeasureSystem, samples: int = 1) -> DiscreteL2System:
    """Discretize every node; embeddings extend functions by zero."""
    from .hilbert import InductiveHilbertSystem

    carriers = {lam: discretize_l2(system.nodes[lam], samples) for lam in system.index}
    coords = {}
    for lam, car in carriers.items():
        canon = system.canonical(lam)
        if system.kind == "atomic":
            coords[lam] = tuple(canon[p.key] for p in car.points)
        else:
            coords[lam] = tuple((canon[p.key[0]], p.key[1]) for p in car.points)
    hs = InductiveHilbertSystem.from_coordinates(system.index, coords)
    return DiscreteL2System(system, carriers, hs, samples)
