"""The Hata tree-like self-similar set: generator, branch structure, measure systems.

The iterated function system is ``f1(z) = c conj(z)`` and
``f2(z) = (1 - |c|^2) conj(z) + |c|^2`` with seed ``X0 = [0, 1] U c[0, 1]``.
Approximations are stored as exact segment endpoints; polylines are sampled
only for drawing and quadrature.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import ClassificationError, InvalidIndex, MalformedInput, Report, Violation
from .geometry import Segment, distances_to_segments
from .measure import (FULL, Everything, InductiveMeasureSystem, SetExpr, segment_node)
from .order import ChainWitness, DirectedSet

ENDPOINT_TOL = 1e-12
DEFAULT_C = 0.3 + 0.4j


@dataclass(frozen=True)
class IfsParams:
    c: complex = DEFAULT_C

    def __post_init__(self):
        c = complex(self.c)
        object.__setattr__(self, "c", c)
        if not (0 < abs(c) < 1 and 0 < abs(1 - c) < 1):
            raise MalformedInput(f"need 0 < |c| < 1 and 0 < |1 - c| < 1, got c = {c}")
        if c.imag == 0:
            raise MalformedInput("c must not be real")

    @property
    def r2(self) -> float:
        """``|c|^2``, the junction point of ``f1(X0)`` and ``f2(X0)``."""
        return abs(self.c) ** 2

    @property
    def growth_ratio(self) -> float:
        """Ratio of consecutive per-level added lengths, ``|c| + 1 - |c|^2``."""
        return abs(self.c) + 1.0 - self.r2


_COMPLEX_RE = re.compile(r"^\s*([+-]?[\d.]+(?:[eE][+-]?\d+)?)\s*([+-])\s*([\d.]+(?:[eE][+-]?\d+)?)?\s*[ij]\s*$")


def parse_complex(text: str) -> complex:
    """Parse literals such as ``0.3+0.4i`` or ``0.3-0.4i``."""
    m = _COMPLEX_RE.match(text)
    if m is None:
        try:
            return complex(text.replace("i", "j"))
        except ValueError:
            raise MalformedInput(f"cannot parse complex literal {text!r}") from None
    re_part, sign, im_part = m.groups()
    im = float(im_part) if im_part else 1.0
    return complex(float(re_part), im if sign == "+" else -im)


def format_complex(z: complex) -> str:
    z = complex(z)
    sign = "-" if z.imag < 0 else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


# --------------------------------------------------------------------------
# maps and words


def apply_map(j: int, z, params: IfsParams):
    """``f_j(z)``; works elementwise on arrays."""
    if j == 1:
        return params.c * np.conj(z)
    if j == 2:
        r2 = params.r2
        return (1.0 - r2) * np.conj(z) + r2
    raise MalformedInput(f"map index must be 1 or 2, got {j!r}")


def as_word(word) -> tuple:
    if isinstance(word, str):
        word = tuple(int(ch) for ch in word)
    word = tuple(word)
    if any(ch not in (1, 2) for ch in word):
        raise MalformedInput(f"words use the letters 1 and 2 only, got {word!r}")
    return word


def compose_word(word, z, params: IfsParams):
    """``f_w(z) = f_{w1}(f_{w2}(...f_{wm}(z)))``; the empty word is the identity."""
    out = z
    for j in reversed(as_word(word)):
        out = apply_map(j, out, params)
    return out


def words(m: int):
    """All words of length ``m`` in lexicographic order (``1 < 2``)."""
    return itertools.product((1, 2), repeat=m)


def word_lipschitz(word, params: IfsParams) -> float:
    w = as_word(word)
    return abs(params.c) ** w.count(1) * (1.0 - params.r2) ** w.count(2)


# --------------------------------------------------------------------------
# approximations


@dataclass(frozen=True, eq=False)
class Approximation:
    """The level-``n`` approximation as ``2^(n+1)`` oriented segments.

    Rows follow the generation order: ``X_n = [f1(X_{n-1}); f2(X_{n-1})]``
    starting from ``[c[0,1]; [0,1]]``.
    """

    level: int
    starts: np.ndarray
    ends: np.ndarray
    params: IfsParams
    samples_per_segment: int = 2

    @property
    def segments(self) -> tuple:
        return tuple(Segment(a, b) for a, b in zip(self.starts, self.ends))

    def __len__(self) -> int:
        return self.starts.size

    def polylines(self, s: int | None = None) -> np.ndarray:
        """Sampled rows, shape ``(segments, s)``."""
        s = self.samples_per_segment if s is None else s
        t = np.linspace(0.0, 1.0, s)
        return self.starts[:, None] * (1 - t) + self.ends[:, None] * t

    def halves(self) -> tuple:
        """``(f1(X_{n-1}), f2(X_{n-1}))`` as (starts, ends) pairs; needs ``n >= 1``."""
        h = len(self) // 2
        return (self.starts[:h], self.ends[:h]), (self.starts[h:], self.ends[h:])


def generate_approximation(params: IfsParams, n: int, samples_per_segment: int = 2) -> Approximation:
    if n < 0:
        raise MalformedInput("level must be nonnegative")
    if samples_per_segment < 2:
        raise MalformedInput("need at least two samples per segment")
    starts = np.array([0.0, 0.0], dtype=complex)
    ends = np.array([params.c, 1.0], dtype=complex)
    for _ in range(n):
        starts = np.concatenate([apply_map(1, starts, params), apply_map(2, starts, params)])
        ends = np.concatenate([apply_map(1, ends, params), apply_map(2, ends, params)])
    return Approximation(n, starts, ends, params, samples_per_segment)


def approximation_from_words(params: IfsParams, n: int) -> tuple[np.ndarray, np.ndarray]:
    """``X_n`` as the union of ``f_w(X0)`` over words of length ``n``, composed letter by letter."""
    starts, ends = [], []
    for w in words(n):
        for a, b in ((0.0, params.c), (0.0, 1.0)):
            starts.append(compose_word(w, complex(a), params))
            ends.append(compose_word(w, complex(b), params))
    return np.array(starts, dtype=complex), np.array(ends, dtype=complex)


def _canonical_rows(starts, ends, tol):
    swap = np.where(np.abs(starts.real - ends.real) > tol, starts.real > ends.real,
                    starts.imag > ends.imag)
    a = np.where(swap, ends, starts)
    b = np.where(swap, starts, ends)
    return np.column_stack([a.real, a.imag, b.real, b.imag])


def same_segment_multiset(first: tuple, second: tuple, tol: float = ENDPOINT_TOL) -> bool:
    """Multiset equality of two segment lists up to orientation and endpoint tolerance."""
    (s1, e1), (s2, e2) = first, second
    if s1.size != s2.size:
        return False
    x = _canonical_rows(np.asarray(s1), np.asarray(e1), tol)
    y = _canonical_rows(np.asarray(s2), np.asarray(e2), tol)
    tree = cKDTree(y)
    used = np.zeros(len(y), dtype=bool)
    radius = 2.0 * tol
    for row in x:
        for j in sorted(tree.query_ball_point(row, radius)):
            if not used[j]:
                used[j] = True
                break
        else:
            return False
    return True


def inclusion_defect(small: Approximation, big: Approximation, s: int = 3) -> float:
    """Largest distance from a sampled point of ``small`` to the segments of ``big``."""
    pts = small.polylines(s).ravel()
    return float(distances_to_segments(pts, big.starts, big.ends).max())


# --------------------------------------------------------------------------
# branches


@dataclass(frozen=True)
class Branch:
    """A maximal segment of ``X_n``.

    ``word`` is ``w2`` for the branch ``f_{w2}(X01)`` and ``None`` for the two
    seed branches; ``level`` is the first approximation containing it.
    """

    segment: Segment
    word: tuple | None
    start_node: complex
    level: int
    name: str

    @property
    def length(self) -> float:
        return self.segment.length


def enumerate_branches(params: IfsParams, n: int) -> list[Branch]:
    """The ``2^n + 1`` branches of ``X_n``: seeds first, then level by level."""
    if n < 0:
        raise MalformedInput("level must be nonnegative")
    out = [
        Branch(Segment(0.0, 1.0), None, 0j, 0, "X00"),
        Branch(Segment(0.0, params.c), None, 0j, 0, "X01"),
    ]
    # f_{w2}(0) and f_{w2}(c) for all w of length k, built outermost letter first
    z0 = np.array([apply_map(2, 0j, params)])
    zc = np.array([apply_map(2, params.c, params)])
    for k in range(n):
        if k > 0:
            z0 = np.concatenate([apply_map(1, z0, params), apply_map(2, z0, params)])
            zc = np.concatenate([apply_map(1, zc, params), apply_map(2, zc, params)])
        for w, a, b in zip(words(k), z0, zc):
            full = tuple(w) + (2,)
            out.append(Branch(Segment(a, b), full, complex(a), k + 1, "".join(map(str, full))))
    return out


def branch_attachments(branches: Sequence[Branch], tol: float = ENDPOINT_TOL) -> list[tuple]:
    """For each branch, the earlier branches whose closed segment holds its start node."""
    out: list[tuple] = [()]
    for i in range(1, len(branches)):
        z = branches[i].start_node
        out.append(tuple(j for j in range(i) if branches[j].segment.distance_to(z) <= tol))
    return out


def branch_measure(branches: Iterable[Branch]) -> float:
    """Total length of a collection of branches."""
    return math.fsum(b.length for b in branches)


def branch_measure_closed_form(params: IfsParams, n: int) -> float:
    """Length of ``X_n`` from the per-level increments ``|c|(1-|c|^2) rho^k``."""
    a = abs(params.c) * (1.0 - params.r2)
    return 1.0 + abs(params.c) + math.fsum(a * params.growth_ratio ** k for k in range(n))


def branch_table_csv(branches: Sequence[Branch]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["word", "start_re", "start_im", "end_re", "end_im", "length"])
    for b in branches:
        s = b.segment
        w.writerow([b.name, repr(s.start.real), repr(s.start.imag), repr(s.end.real),
                    repr(s.end.imag), repr(b.length)])
    return buf.getvalue()


# --------------------------------------------------------------------------
# connectivity


def check_connectivity(approx: Approximation, tol: float = ENDPOINT_TOL) -> Report:
    """Certify that the segments of ``X_n`` form one connected graph.

    Two segments are adjacent when they share an endpoint (within ``tol``).
    For ``n >= 1`` the report also certifies that ``|c|^2`` lies on both
    halves ``f1(X_{n-1})`` and ``f2(X_{n-1})`` and lists the endpoints the
    halves share.
    """
    m = len(approx)
    pts = np.concatenate([approx.starts, approx.ends])
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in tree.query_pairs(tol):
        a, b = find(i % m), find(j % m)
        if a != b:
            parent[a] = b
    components = len({find(i) for i in range(m)})
    details = {"segments": m, "components": components}
    if components != 1:
        return Report(False, Violation("connected", f"{components} connected components", ()), details)

    if approx.level >= 1:
        (s1, e1), (s2, e2) = approx.halves()
        r2 = approx.params.r2
        d1 = distances_to_segments([r2], s1, e1)[0]
        d2 = distances_to_segments([r2], s2, e2)[0]
        details["junction"] = r2
        details["junction_defect"] = max(d1, d2)
        shared = _shared_points(np.concatenate([s1, e1]), np.concatenate([s2, e2]), tol)
        details["shared_points"] = shared
        if max(d1, d2) > tol:
            return Report(False, Violation("junction", "|c|^2 is not on both halves", (r2,),
                                           max(d1, d2)), details)
    return Report(True, details=details)


def _shared_points(a: np.ndarray, b: np.ndarray, tol: float) -> list[complex]:
    ta = cKDTree(np.column_stack([a.real, a.imag]))
    tb = cKDTree(np.column_stack([b.real, b.imag]))
    found = {}
    for i, js in enumerate(ta.query_ball_tree(tb, tol)):
        if js:
            z = complex(a[i])
            found[(round(z.real, 9), round(z.imag, 9))] = z
    return [found[k] for k in sorted(found)]


# --------------------------------------------------------------------------
# drawing


def render_svg(approx: Approximation, samples: int | None = None, width: int = 800,
               stroke: str = "#1f3a93", stroke_width: float = 0.6) -> bytes:
    """Deterministic SVG with one polyline per segment.

    The view box is the bounding box of the samples padded by 5% on each
    side; the imaginary axis points up.
    """
    rows = approx.polylines(samples)
    x, y = rows.real, -rows.imag
    xmin, xmax, ymin, ymax = x.min(), x.max(), y.min(), y.max()
    padx = 0.05 * (xmax - xmin or 1.0)
    pady = 0.05 * (ymax - ymin or 1.0)
    xmin, xmax, ymin, ymax = xmin - padx, xmax + padx, ymin - pady, ymax + pady
    w, h = xmax - xmin, ymax - ymin
    height = max(1, int(round(width * h / w)))
    sw = stroke_width * w / width
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="{xmin:.9g} {ymin:.9g} {w:.9g} {h:.9g}">',
        f'<g fill="none" stroke="{stroke}" stroke-width="{sw:.9g}" stroke-linecap="round">',
    ]
    for xr, yr in zip(x, y):
        pts = " ".join(f"{a:.9g},{b:.9g}" for a, b in zip(xr, yr))
        lines.append(f'<polyline points="{pts}"/>')
    lines.append("</g>")
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")


# --------------------------------------------------------------------------
# inductive systems of measure spaces


class BranchFamily(SetExpr):
    """Union of new branches ``f_{w2}(X01)`` with ``w`` drawn from ``words_at(k)``.

    ``words_at(k)`` lists the chosen words of length ``k``; with ``levels``
    the family stops after that many levels, otherwise it continues for
    every ``k`` and reaches past any truncation.
    """

    def __init__(self, words_at: Callable[[int], Iterable], levels: int | None = None):
        self.words_at = words_at
        self.levels = levels

    def unbounded(self, system):
        return self.levels is None and system.truncated

    def trace(self, system):
        by_word = system.meta["branch_keys_by_word"]
        depth = system.meta["branch_depth"]
        top = depth if self.levels is None else min(depth, self.levels)
        out = {}
        for k in range(top):
            for w in self.words_at(k):
                key = by_word.get(as_word(w) + (2,))
                if key is not None:
                    out[key] = FULL
        return out

    def level_lengths(self, params: IfsParams, upto: int) -> list[float]:
        base = abs(params.c) * (1.0 - params.r2)
        n = upto if self.levels is None else min(upto, self.levels)
        return [math.fsum(base * word_lipschitz(w, params) for w in self.words_at(k)) if k < n else 0.0
                for k in range(upto)]


@dataclass
class HataTail:
    """Limit values for Hata sets that reach past the truncation."""

    params: IfsParams
    horizon: int = 60

    def growth_ratio(self, system, expr) -> float:
        if isinstance(expr, Everything):
            return self.params.growth_ratio
        if isinstance(expr, BranchFamily):
            a = expr.level_lengths(self.params, self.horizon)
            return a[-1] / a[-2] if a[-2] > 0 else 0.0
        raise ClassificationError(f"no tail model for {expr!r}")

    def extended(self, system, expr) -> float:
        rho = self.growth_ratio(system, expr)
        if isinstance(expr, Everything):
            if rho >= 1.0:
                return math.inf
            a = abs(self.params.c) * (1.0 - self.params.r2)
            return 1.0 + abs(self.params.c) + a / (1.0 - rho)
        a = expr.level_lengths(self.params, self.horizon)
        if rho >= 1.0:
            return math.inf
        return math.fsum(a) + a[-1] * rho / (1.0 - rho)


class HataSystem(NamedTuple):
    system: InductiveMeasureSystem
    index: DirectedSet
    chain: ChainWitness
    branches: list


def branch_indexed_le(a: tuple, b: tuple) -> bool:
    """``(n,k) <= (m,l)`` iff equal, ``n < m``, or ``n == m`` and ``k == 0``."""
    return a == b or a[0] < b[0] or (a[0] == b[0] and a[1] == 0)


def branch_indexed_elements(depth: int) -> list[tuple]:
    """Truncated branch index set: all ``(n, k)`` with ``n <= depth`` plus the cap ``(depth+1, 0)``."""
    return [(n, k) for n in range(depth + 1) for k in range(2 ** n + 1)] + [(depth + 1, 0)]


def _union_subtrees(children: dict, v: int) -> list[frozenset]:
    acc = [frozenset([v])]
    for ch in children.get(v, ()):
        sub = _union_subtrees(children, ch)
        acc = [a | s for a in acc for s in [frozenset()] + sub]
    return acc


def connected_branch_union(branches: Sequence[Branch], members: Iterable[int],
                           attachments: Sequence[tuple] | None = None) -> tuple:
    """Validate a union of branches (must hold the root and be connected)."""
    mem = frozenset(members)
    if attachments is None:
        attachments = branch_attachments(branches)
    if 0 not in mem:
        raise InvalidIndex("branch unions must contain the root branch [0, 1]")
    if any(i < 0 or i >= len(branches) for i in mem):
        raise InvalidIndex("unknown branch index")
    for i in mem - {0}:
        if not any(j in mem for j in attachments[i]):
            raise InvalidIndex(f"union is disconnected: branch {branches[i].name} is not attached")
    return tuple(sorted(mem))


def build_inductive_system(variant: str, params: IfsParams, depth: int,
                           max_union_depth: int = 4) -> HataSystem:
    """One of the three Hata systems of measure spaces.

    ``linear``
        chain ``0 <= 1 <= ... <= depth`` with nodes ``X_m``.
    ``branch-indexed``
        nodes ``X_(n,0) = X_n`` and ``X_(n,k) = X_n U (k-th new branch of level n+1)``
        for ``n <= depth``, capped by ``(depth+1, 0)`` so the window is directed.
    ``branch-union``
        connected unions of branches of ``X_depth`` that contain ``[0, 1]``,
        ordered by inclusion.

    Segment keys are branch numbers in :func:`enumerate_branches` order.
    """
    if depth < 0:
        raise MalformedInput("depth must be nonnegative")
    if variant == "linear":
        branches = enumerate_branches(params, depth)
        elements = list(range(depth + 1))
        index = DirectedSet.from_predicate(elements, lambda a, b: a <= b, top=depth)
        members = {m: [i for i, b in enumerate(branches) if b.level <= m] for m in elements}
        chain = ChainWitness(elements)
        bdepth = depth
    elif variant == "branch-indexed":
        branches = enumerate_branches(params, depth + 1)
        elements = branch_indexed_elements(depth)
        index = DirectedSet.from_predicate(elements, branch_indexed_le, top=(depth + 1, 0))
        first_of_level = {}
        for i, b in enumerate(branches):
            first_of_level.setdefault(b.level, i)
        members = {}
        for n, k in elements:
            base = [i for i, b in enumerate(branches) if b.level <= n]
            if k:
                base.append(first_of_level[n + 1] + k - 1)
            members[(n, k)] = base
        chain = ChainWitness([(m, 0) for m in range(depth + 2)])
        bdepth = depth + 1
    elif variant == "branch-union":
        if depth > max_union_depth:
            raise MalformedInput(f"branch-union depth {depth} exceeds the cap {max_union_depth}")
        branches = enumerate_branches(params, depth)
        att = branch_attachments(branches)
        children: dict = {}
        for i in range(1, len(branches)):
            children.setdefault(att[i][0], []).append(i)
        unions = sorted(tuple(sorted(s)) for s in _union_subtrees(children, 0))
        sets = {u: frozenset(u) for u in unions}
        top = tuple(range(len(branches)))
        index = DirectedSet.from_predicate(unions, lambda a, b: sets[a] <= sets[b], top=top)
        members = {u: list(u) for u in unions}
        chain = ChainWitness([tuple(i for i, b in enumerate(branches) if b.level <= m)
                              for m in range(depth + 1)])
        bdepth = depth
    else:
        raise MalformedInput(f"unknown variant {variant!r}")

    segs = {i: b.segment for i, b in enumerate(branches)}
    nodes = {lam: segment_node({i: segs[i] for i in sorted(members[lam])}) for lam in index}
    meta = {
        "variant": variant,
        "params": params,
        "branch_depth": bdepth,
        "branch_keys_by_word": {b.word: i for i, b in enumerate(branches) if b.word is not None},
    }
    system = InductiveMeasureSystem(index, nodes, truncated=True, tail=HataTail(params), meta=meta)
    return HataSystem(system, index, chain, branches)
