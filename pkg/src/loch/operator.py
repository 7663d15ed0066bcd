"""Coherent operator nets (locally bounded operators) and their spectra."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping

import numpy as np

from .errors import (ConsistencyAlarm, DomainError, IncompatibleSystems, MalformedInput,
                     PreconditionError, Report, ValidationError, Violation, default_tolerance)
from .hilbert import InductiveHilbertSystem
from .linalg import CLUSTER_TOL, cluster_values, orthonormal_complement, spectral_norm

CLASS_TOL = 1e-10
THREADS = 1


def set_threads(n: int) -> None:
    """Number of worker threads for per-node eigenvalue computations."""
    global THREADS
    THREADS = max(1, int(n))


def _map_nodes(fn, nodes):
    nodes = list(nodes)
    if THREADS > 1 and len(nodes) > 1:
        with ThreadPoolExecutor(THREADS) as pool:
            return list(pool.map(fn, nodes))
    return [fn(n) for n in nodes]


class CoherentOperator:
    """A net of matrices ``T_lam : H_lam -> K_lam`` over one index set.

    ``domain`` and ``codomain`` are :class:`InductiveHilbertSystem` objects
    (the same one for operators on a single space).  The constructor does
    not check coherence; use :func:`validate_coherent` for untrusted blocks.
    Arithmetic is blockwise and re-asserts coherence of the result only in
    the sense that coherent inputs give coherent outputs exactly.
    """

    __array_priority__ = 100

    def __init__(self, domain: InductiveHilbertSystem, blocks: Mapping, codomain=None):
        self.domain = domain
        self.codomain = domain if codomain is None else codomain
        self.blocks = {lam: np.asarray(blocks[lam], dtype=complex) for lam in domain.index}

    def __repr__(self):
        return f"CoherentOperator({len(self.blocks)} blocks)"

    @property
    def index(self):
        return self.domain.index

    def __getitem__(self, lam) -> np.ndarray:
        return self.blocks[lam]

    @property
    def square(self) -> bool:
        return self.domain is self.codomain

    # constructors ---------------------------------------------------------

    @classmethod
    def identity(cls, system: InductiveHilbertSystem) -> "CoherentOperator":
        return cls(system, {lam: np.eye(system.dims[lam]) for lam in system.index})

    @classmethod
    def zero(cls, system: InductiveHilbertSystem, codomain=None) -> "CoherentOperator":
        cod = system if codomain is None else codomain
        return cls(system, {lam: np.zeros((cod.dims[lam], system.dims[lam])) for lam in system.index}, cod)

    # algebra ----------------------------------------------------------------

    @property
    def H(self) -> "CoherentOperator":
        """Blockwise adjoint."""
        return CoherentOperator(self.codomain, {k: v.conj().T for k, v in self.blocks.items()}, self.domain)

    def _same_shape(self, other):
        if not isinstance(other, CoherentOperator):
            return NotImplemented
        if other.domain is not self.domain or other.codomain is not self.codomain:
            raise IncompatibleSystems("operands live on different systems")
        return True

    def __add__(self, other):
        if self._same_shape(other) is NotImplemented:
            return NotImplemented
        return CoherentOperator(self.domain, {k: v + other.blocks[k] for k, v in self.blocks.items()},
                                self.codomain)

    def __sub__(self, other):
        if self._same_shape(other) is NotImplemented:
            return NotImplemented
        return CoherentOperator(self.domain, {k: v - other.blocks[k] for k, v in self.blocks.items()},
                                self.codomain)

    def __neg__(self):
        return CoherentOperator(self.domain, {k: -v for k, v in self.blocks.items()}, self.codomain)

    def __mul__(self, scalar):
        if isinstance(scalar, CoherentOperator):
            return NotImplemented
        return CoherentOperator(self.domain, {k: scalar * v for k, v in self.blocks.items()}, self.codomain)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, CoherentOperator):
            return NotImplemented
        if other.codomain is not self.domain:
            raise IncompatibleSystems("composition needs matching intermediate systems")
        return CoherentOperator(other.domain, {k: v @ other.blocks[k] for k, v in self.blocks.items()},
                                self.codomain)

    def distance(self, other) -> float:
        """Largest blockwise spectral-norm difference."""
        return max((spectral_norm(v - other.blocks[k]) for k, v in self.blocks.items()), default=0.0)


def adjoint(t: CoherentOperator) -> CoherentOperator:
    return t.H


def compose(s: CoherentOperator, t: CoherentOperator) -> CoherentOperator:
    return s @ t


def add(s: CoherentOperator, t: CoherentOperator) -> CoherentOperator:
    return s + t


def scale(alpha: complex, t: CoherentOperator) -> CoherentOperator:
    return alpha * t


# --------------------------------------------------------------------------
# coherence


def _check_shapes(blocks, domain, codomain):
    for lam in domain.index:
        if lam not in blocks:
            raise MalformedInput(f"no block for node {lam!r}")
        shape = np.shape(blocks[lam])
        want = (codomain.dims[lam], domain.dims[lam])
        if tuple(shape) != want and not (0 in want and np.size(blocks[lam]) == 0):
            raise MalformedInput(f"block {lam!r} has shape {shape}, expected {want}")


def restriction_residuals(blocks: Mapping, domain: InductiveHilbertSystem,
                          codomain: InductiveHilbertSystem | None = None) -> dict:
    """Residuals of the first characterization for every pair ``lam < nu``.

    ``T_nu J - J T_lam`` (restriction) and ``T_nu P - P T_nu`` (commutation
    with the projection onto the smaller space), spectral norms.
    """
    cod = domain if codomain is None else codomain
    out = {}
    for lam, nu in domain.index.comparable_pairs():
        tn = np.asarray(blocks[nu], dtype=complex)
        tl = np.asarray(blocks[lam], dtype=complex)
        jh, jk = domain.J(nu, lam), cod.J(nu, lam)
        ph, pk = domain.projection(lam, nu), cod.projection(lam, nu)
        out[(lam, nu)] = max(spectral_norm(tn @ jh - jk @ tl), spectral_norm(tn @ ph - pk @ tn))
    return out


def block_residuals(blocks: Mapping, domain: InductiveHilbertSystem,
                    codomain: InductiveHilbertSystem | None = None) -> dict:
    """Residuals of the block-diagonal characterization for every pair ``lam < nu``.

    ``T_nu`` is written in the bases ``[J, Q]`` with ``Q`` spanning the
    orthogonal complement of the smaller space; the residual is the largest
    of ``||B11 - T_lam||``, ``||B12||`` and ``||B21||``.
    """
    cod = domain if codomain is None else codomain
    out = {}
    for lam, nu in domain.index.comparable_pairs():
        tn = np.asarray(blocks[nu], dtype=complex)
        tl = np.asarray(blocks[lam], dtype=complex)
        jh, jk = domain.J(nu, lam), cod.J(nu, lam)
        qh, qk = orthonormal_complement(jh), orthonormal_complement(jk)
        b11 = jk.conj().T @ tn @ jh
        b12 = jk.conj().T @ tn @ qh
        b21 = qk.conj().T @ tn @ jh
        out[(lam, nu)] = max(spectral_norm(b11 - tl), spectral_norm(b12), spectral_norm(b21))
    return out


@dataclass
class CoherenceVerdicts:
    restriction: Report
    block: Report

    @property
    def agree(self) -> bool:
        return self.restriction.ok == self.block.ok


def _verdict(residuals: dict, tol: float, tag: str) -> Report:
    for pair, r in residuals.items():
        if r > tol:
            return Report(False, Violation(tag, f"net is not coherent on {pair[0]!r} <= {pair[1]!r}",
                                           pair, r), {"residuals": residuals})
    return Report(True, details={"residuals": residuals})


def coherence_verdicts(blocks: Mapping, domain: InductiveHilbertSystem,
                       codomain: InductiveHilbertSystem | None = None,
                       tol: float | None = None) -> CoherenceVerdicts:
    """Both characterizations of coherence, computed independently."""
    tol = default_tolerance() if tol is None else tol
    cod = domain if codomain is None else codomain
    _check_shapes(blocks, domain, cod)
    return CoherenceVerdicts(
        _verdict(restriction_residuals(blocks, domain, cod), tol, "coherence"),
        _verdict(block_residuals(blocks, domain, cod), tol, "block-diagonal"),
    )


def validate_coherent(blocks: Mapping, domain: InductiveHilbertSystem,
                      codomain: InductiveHilbertSystem | None = None,
                      tol: float | None = None) -> CoherentOperator:
    """Return the operator if the net is coherent, else raise ``ValidationError``.

    Raises ``ConsistencyAlarm`` when the two characterizations disagree.
    """
    v = coherence_verdicts(blocks, domain, codomain, tol)
    if not v.agree:
        raise ConsistencyAlarm("restriction and block-diagonal criteria disagree")
    if not v.restriction.ok:
        raise ValidationError(v.restriction.violation)
    return CoherentOperator(domain, blocks, codomain)


def is_coherent(t: CoherentOperator, tol: float | None = None) -> bool:
    return coherence_verdicts(t.blocks, t.domain, t.codomain, tol).restriction.ok


# --------------------------------------------------------------------------
# seminorms and classes


def seminorm(t: CoherentOperator, nu) -> float:
    """``q_nu(T) = ||T_nu||``."""
    if nu not in t.blocks:
        raise KeyError(f"unknown node {nu!r}")
    return spectral_norm(t.blocks[nu])


@dataclass
class OperatorClass:
    normal: bool
    selfadjoint: bool
    positive: bool
    projection: bool
    isometric: bool
    unitary: bool
    residuals: dict = field(default_factory=dict)

    def flags(self) -> set:
        return {k for k in ("normal", "selfadjoint", "positive", "projection", "isometric", "unitary")
                if getattr(self, k)}


def classify(t: CoherentOperator, tol: float = CLASS_TOL) -> OperatorClass:
    """Blockwise operator classes, each decided by a residual norm against ``tol``."""
    res = {k: 0.0 for k in ("normal", "selfadjoint", "positive", "projection", "isometric", "coisometric")}
    square_blocks = t.square
    for lam, a in t.blocks.items():
        ah = a.conj().T
        res["isometric"] = max(res["isometric"], spectral_norm(ah @ a - np.eye(a.shape[1])))
        res["coisometric"] = max(res["coisometric"], spectral_norm(a @ ah - np.eye(a.shape[0])))
        if not square_blocks:
            continue
        res["normal"] = max(res["normal"], spectral_norm(a @ ah - ah @ a))
        res["selfadjoint"] = max(res["selfadjoint"], spectral_norm(a - ah))
        res["projection"] = max(res["projection"], spectral_norm(a @ a - a))
        if a.size:
            low = float(np.linalg.eigvalsh((a + ah) / 2).min())
            res["positive"] = max(res["positive"], max(0.0, -low))
    inf = math.inf
    if not square_blocks:
        for k in ("normal", "selfadjoint", "positive", "projection"):
            res[k] = inf
    sa = res["selfadjoint"] <= tol
    return OperatorClass(
        normal=res["normal"] <= tol,
        selfadjoint=sa,
        positive=sa and res["positive"] <= tol,
        projection=sa and res["projection"] <= tol,
        isometric=res["isometric"] <= tol,
        unitary=res["isometric"] <= tol and res["coisometric"] <= tol,
        residuals=res,
    )


# --------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class SpectrumSet:
    """Finite spectrum as clustered points plus the per-node multiset."""

    points: tuple
    nodes: dict
    multiset: tuple

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def contains(self, z: complex, tol: float = CLUSTER_TOL) -> bool:
        return any(abs(z - p) <= tol for p in self.points)

    def distance(self, z: complex) -> float:
        return min((abs(z - p) for p in self.points), default=math.inf)

    def same_as(self, other: "SpectrumSet", tol: float = CLUSTER_TOL) -> bool:
        return (len(self) == len(other) and all(other.contains(p, tol) for p in self.points)
                and all(self.contains(p, tol) for p in other.points))


def _spectrum_from(pairs, tol) -> SpectrumSet:
    vals = [v for _, v in pairs]
    groups, reps = cluster_values(vals, tol)
    nodes = {}
    for rep, g in zip(reps, groups):
        seen = []
        for i in g:
            lam = pairs[i][0]
            if lam not in seen:
                seen.append(lam)
        nodes[rep] = tuple(seen)
    return SpectrumSet(tuple(reps), nodes, tuple(pairs))


def spectrum(t: CoherentOperator, tol: float = CLUSTER_TOL) -> SpectrumSet:
    """Union over nodes of the block eigenvalues, clustered at ``tol``."""
    if not t.square:
        raise MalformedInput("spectrum needs an operator on a single system")
    lams = list(t.index)
    eig = _map_nodes(lambda lam: np.linalg.eigvals(t.blocks[lam]) if t.blocks[lam].size else [], lams)
    pairs = [(lam, complex(v)) for lam, vals in zip(lams, eig) for v in vals]
    return _spectrum_from(pairs, tol)


def resolvent_norms(t: CoherentOperator, z: complex) -> dict:
    """``||(z - T_lam)^-1||`` per node (``inf`` where the block is singular)."""
    out = {}
    for lam, a in t.blocks.items():
        n = a.shape[0]
        if n == 0:
            out[lam] = 0.0
            continue
        s = np.linalg.svd(z * np.eye(n) - a, compute_uv=False)
        out[lam] = math.inf if s[-1] <= 1e-12 * max(1.0, s[0]) else 1.0 / s[-1]
    return out


# --------------------------------------------------------------------------
# multiplication operators


class LocFunction:
    """A function on the carrier points of a discretized system.

    Either ``func(location)`` (plane point for segment samples, atom id for
    atoms) or a table ``values[coordinate key]``.
    """

    def __init__(self, func: Callable | None = None, values: Mapping | None = None):
        if (func is None) == (values is None):
            raise MalformedInput("give exactly one of func or values")
        self.func = func
        self.values = None if values is None else dict(values)

    def __call__(self, key, point) -> complex:
        if self.values is not None:
            try:
                return complex(self.values[key])
            except KeyError:
                raise DomainError(f"function undefined at {key!r}") from None
        try:
            return complex(self.func(point.location))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"function undefined at {key!r}: {exc}") from None

    def compose(self, psi: Callable) -> "LocFunction":
        return LocFunction(lambda loc, f=self: psi(f._eval_loc(loc))) if self.func is not None else \
            LocFunction(values={k: psi(v) for k, v in self.values.items()})

    def _eval_loc(self, loc):
        return complex(self.func(loc))

    def conj(self) -> "LocFunction":
        return self.compose(lambda v: complex(v).conjugate())

    def __mul__(self, other: "LocFunction") -> "LocFunction":
        return _Pointwise(self, other, lambda a, b: a * b)

    def __add__(self, other: "LocFunction") -> "LocFunction":
        return _Pointwise(self, other, lambda a, b: a + b)


class _Pointwise(LocFunction):
    def __init__(self, f, g, op):
        self.f, self.g, self.op = f, g, op
        self.func = self.values = None

    def __call__(self, key, point):
        return self.op(self.f(key, point), self.g(key, point))

    def compose(self, psi):
        parent = self

        class _C(LocFunction):
            def __init__(self):
                self.func = self.values = None

            def __call__(self, key, point):
                return complex(psi(parent(key, point)))
        return _C()


def function_table(phi: LocFunction, l2sys) -> dict:
    """Values of ``phi`` at every carrier point, per node, in coordinate order."""
    out = {}
    for lam in l2sys.hilbert.index:
        keys = l2sys.hilbert.coordinates[lam]
        pts = l2sys.carriers[lam].points
        out[lam] = np.array([phi(k, p) for k, p in zip(keys, pts)], dtype=complex)
    return out


def multiplication_operator(phi: LocFunction, l2sys) -> CoherentOperator:
    """Diagonal net of multiplication by ``phi`` on a discretized ``L2`` system."""
    table = function_table(phi, l2sys)
    return CoherentOperator(l2sys.hilbert, {lam: np.diag(v) for lam, v in table.items()})


def essential_range(phi: LocFunction, l2sys, tol: float = CLUSTER_TOL) -> SpectrumSet:
    """Values of ``phi`` on positive-mass points, tagged by node."""
    table = function_table(phi, l2sys)
    pairs = [(lam, complex(v)) for lam, vals in table.items() for v in vals]
    return _spectrum_from(pairs, tol)


# --------------------------------------------------------------------------
# Fuglede-Putnam


def fuglede_putnam_check(n_op: CoherentOperator, m_op: CoherentOperator, b_op: CoherentOperator,
                         pre_tol: float = 1e-10, tol: float = 1e-9) -> Report:
    """Given normal ``N``, ``M`` and ``B`` with ``N B = B M``, measure ``||N* B - B M*||``.

    ``B`` maps the space of ``M`` into the space of ``N``.
    """
    if b_op.domain is not m_op.domain or b_op.codomain is not n_op.domain:
        raise IncompatibleSystems("B must map the space of M into the space of N")
    for name, op in (("N", n_op), ("M", m_op)):
        c = classify(op)
        if not c.normal:
            raise PreconditionError(f"{name} is not locally normal",
                                    Violation("normal", f"{name} is not normal", (), c.residuals["normal"]))
    per_node = {}
    for lam in n_op.index:
        n, m, b = n_op.blocks[lam], m_op.blocks[lam], b_op.blocks[lam]
        pre = spectral_norm(n @ b - b @ m)
        if pre > pre_tol:
            raise PreconditionError(f"N B != B M on node {lam!r}",
                                    Violation("intertwining", "N B != B M", (lam,), pre))
        per_node[lam] = spectral_norm(n.conj().T @ b - b @ m.conj().T)
    worst = max(per_node.values(), default=0.0)
    ok = worst <= tol
    v = None if ok else Violation("fuglede-putnam", "N* B != B M*",
                                  (max(per_node, key=per_node.get),), worst)
    return Report(ok, v, {"per_node": per_node, "max": worst})
