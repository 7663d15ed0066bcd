"""Locally spectral measures, functional calculus, and multiplication-operator models."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping

import numpy as np

from .errors import (ClassificationError, DomainError, PreconditionError, Report, Violation)
from .hilbert import InductiveHilbertSystem, check_representing
from .linalg import (CLUSTER_TOL, canonical_basis, cluster_values, eigenspaces, joint_eigenspaces,
                     spectral_norm)
from .measure import InductiveMeasureSystem, atomic_node, discretize_system
from .operator import (CoherentOperator, LocFunction, classify, multiplication_operator)
from .order import ChainWitness, DirectedSet, is_sequentially_finite

LAW_TOL = 1e-10
MODEL_TOL = 1e-9
UNITARY_TOL = 1e-12


def _require_normal(n_op: CoherentOperator) -> None:
    c = classify(n_op)
    if not c.normal:
        raise ClassificationError(f"operator is not locally normal (residual {c.residuals['normal']:.3g})")


def _require_representing(system: InductiveHilbertSystem) -> None:
    rep = check_representing(system)
    if not rep.ok:
        raise PreconditionError("system is not representing", rep.violation)


# --------------------------------------------------------------------------
# spectral measures


class LocalSpectralMeasure:
    """Projection-valued measure on the finite spectrum of a locally normal operator.

    ``atoms`` are the clustered eigenvalues (over all nodes) in ``(Re, Im)``
    order.  ``E(A)`` takes a collection of atom values (matched within the
    clustering tolerance) or a predicate on complex numbers, and returns the
    coherent net of spectral projections; ``E_at`` takes atom positions.
    """

    def __init__(self, operator: CoherentOperator, tol: float = CLUSTER_TOL):
        self.operator = operator
        self.tol = tol
        system = operator.domain
        per_node = {lam: eigenspaces(operator.blocks[lam], tol) for lam in system.index}
        values = [v for spaces in per_node.values() for v, _ in spaces]
        _, reps = cluster_values(values, tol)
        self.atoms: tuple = tuple(reps)
        # node -> atom position -> eigenprojection
        self._proj: dict = {}
        for lam, spaces in per_node.items():
            table = {}
            for v, basis in spaces:
                a = self.atom_of(v)
                p = basis @ basis.conj().T
                table[a] = table[a] + p if a in table else p
            self._proj[lam] = table

    def __len__(self):
        return len(self.atoms)

    @property
    def system(self) -> InductiveHilbertSystem:
        return self.operator.domain

    def atom_of(self, z: complex) -> int:
        dist = [abs(z - a) for a in self.atoms]
        i = int(np.argmin(dist))
        if dist[i] > max(self.tol, 1e-7):
            raise DomainError(f"{z!r} is not a spectrum atom")
        return i

    def _positions(self, subset) -> frozenset:
        if callable(subset):
            return frozenset(i for i, a in enumerate(self.atoms) if subset(a))
        return frozenset(self.atom_of(complex(s)) for s in subset)

    def node_projection(self, lam, subset) -> np.ndarray:
        """``E_lam(A)``: sum of the eigenprojections of ``N_lam`` over the atoms in ``A``."""
        return self._node_projection(lam, self._positions(subset))

    def _node_projection(self, lam, pos: frozenset) -> np.ndarray:
        d = self.system.dims[lam]
        out = np.zeros((d, d), dtype=complex)
        for a, p in self._proj[lam].items():
            if a in pos:
                out = out + p
        return out

    def E(self, subset) -> CoherentOperator:
        return self.E_at(self._positions(subset))

    def E_at(self, positions) -> CoherentOperator:
        """``E`` of the atoms at the given positions of :attr:`atoms`."""
        pos = frozenset(int(i) for i in positions)
        if any(not 0 <= i < len(self.atoms) for i in pos):
            raise DomainError("atom position out of range")
        return CoherentOperator(self.system, {lam: self._node_projection(lam, pos) for lam in self.system.index})

    def support(self, lam) -> tuple:
        """Atoms carried by node ``lam``."""
        return tuple(sorted(self._proj[lam]))


def spectral_measure(n_op: CoherentOperator, tol: float = CLUSTER_TOL) -> LocalSpectralMeasure:
    """Spectral measure of a locally normal operator on a representing system."""
    _require_normal(n_op)
    _require_representing(n_op.domain)
    return LocalSpectralMeasure(n_op, tol)


def _subset_pairs(k: int, rng: np.random.Generator, samples: int = 64):
    if k <= 6:
        subsets = [frozenset(c) for r in range(k + 1) for c in itertools.combinations(range(k), r)]
        return list(itertools.product(subsets, subsets))
    out = []
    for _ in range(samples):
        a = frozenset(np.flatnonzero(rng.random(k) < 0.5).tolist())
        b = frozenset(np.flatnonzero(rng.random(k) < 0.5).tolist())
        out.append((a, b))
    return out


def check_measure_laws(e: LocalSpectralMeasure, tol: float = LAW_TOL, seed: int = 0) -> Report:
    """Null/unital, projection-valued, multiplicative, additive; every atom carries mass.

    Multiplicativity ``E(A & B) = E(A) E(B)`` is tested over all pairs of
    atom subsets for at most six atoms and over random pairs beyond.
    Additivity is tested on the disjoint pairs ``(A - B, B)``.
    """
    sys = e.system
    k = len(e.atoms)
    res = {"null": 0.0, "unital": 0.0, "projection": 0.0, "multiplicative": 0.0, "additive": 0.0}
    everything = range(k)
    for lam in sys.index:
        d = sys.dims[lam]
        res["null"] = max(res["null"], spectral_norm(e._node_projection(lam, frozenset())))
        res["unital"] = max(res["unital"], spectral_norm(e._node_projection(lam, frozenset(everything)) - np.eye(d)))
    rng = np.random.default_rng(seed)
    cache: dict = {}

    def proj(lam, s):
        key = (lam, s)
        if key not in cache:
            cache[key] = e._node_projection(lam, s)
        return cache[key]

    for a, b in _subset_pairs(k, rng):
        for lam in sys.index:
            pa, pb = proj(lam, a), proj(lam, b)
            res["projection"] = max(res["projection"], spectral_norm(pa @ pa - pa),
                                    spectral_norm(pa - pa.conj().T))
            res["multiplicative"] = max(res["multiplicative"], spectral_norm(proj(lam, a & b) - pa @ pb))
            res["additive"] = max(res["additive"],
                                  spectral_norm(proj(lam, a | b) - proj(lam, a - b) - pb))
    empty_atoms = [i for i in range(k) if all(spectral_norm(proj(lam, frozenset([i]))) < 0.5
                                              for lam in sys.index)]
    worst = max(res.values())
    if empty_atoms:
        return Report(False, Violation("atom-mass", "spectrum atom with zero projection",
                                       (e.atoms[empty_atoms[0]],)), {"residuals": res})
    if worst > tol:
        law = max(res, key=res.get)
        return Report(False, Violation(law, f"{law} law fails", (), res[law]), {"residuals": res})
    return Report(True, details={"residuals": res, "max": worst})


def commutant_check(e: LocalSpectralMeasure, t: CoherentOperator, tol: float = LAW_TOL) -> Report:
    """Compare ``T N = N T`` with ``T E({a}) = E({a}) T`` for every atom ``a``.

    ``details`` carries both verdicts; the report is ok when they agree.
    """
    n = e.operator
    r_n = max(spectral_norm(t.blocks[lam] @ n.blocks[lam] - n.blocks[lam] @ t.blocks[lam])
              for lam in n.index)
    r_e = 0.0
    for i in range(len(e.atoms)):
        for lam in n.index:
            p = e._node_projection(lam, frozenset([i]))
            r_e = max(r_e, spectral_norm(t.blocks[lam] @ p - p @ t.blocks[lam]))
    scale = max(1.0, max(spectral_norm(t.blocks[lam]) for lam in n.index))
    commutes_n = r_n <= tol * scale * max(1.0, max(spectral_norm(n.blocks[l]) for l in n.index))
    commutes_e = r_e <= tol * scale
    details = {"commutes_with_N": commutes_n, "commutes_with_E": commutes_e,
               "residual_N": r_n, "residual_E": r_e}
    if commutes_n != commutes_e:
        return Report(False, Violation("commutant", "T N = N T and T E = E T disagree", (), max(r_n, r_e)),
                      details)
    return Report(True, details=details)


def _atom_values(phi, e: LocalSpectralMeasure) -> list:
    out = []
    for a in e.atoms:
        if callable(phi):
            out.append(complex(phi(a)))
        else:
            try:
                out.append(complex(phi[a]))
            except KeyError:
                match = [v for k, v in phi.items() if abs(complex(k) - a) <= e.tol]
                if not match:
                    raise DomainError(f"no value for atom {a!r}") from None
                out.append(complex(match[0]))
    return out


def integrate(phi, e: LocalSpectralMeasure) -> CoherentOperator:
    """``N(phi) = sum_a phi(a) E({a})`` per node.

    ``phi`` is a callable on complex numbers, a scalar constant, or a
    mapping from atoms to values.
    """
    if np.isscalar(phi):
        const = complex(phi)
        phi = lambda z: const  # noqa: E731
    vals = _atom_values(phi, e)
    blocks = {}
    for lam in e.system.index:
        d = e.system.dims[lam]
        out = np.zeros((d, d), dtype=complex)
        for a, p in e._proj[lam].items():
            out = out + vals[a] * p
        blocks[lam] = out
    return CoherentOperator(e.system, blocks)


def borel_calculus(psi, n_op: CoherentOperator) -> CoherentOperator:
    """``psi(N)`` through the spectral measure of ``N``."""
    return integrate(psi, spectral_measure(n_op))


# --------------------------------------------------------------------------
# multiplicity model


@dataclass
class ModelPoint:
    """A joint-spectrum point: value ``z``, membership bits per node, multiplicity ``n``."""

    ident: int
    value: complex
    multiplicity: int
    members: tuple
    born: int
    basis: np.ndarray = field(repr=False)


@dataclass
class MultiplicityModel:
    """Joint-spectrum points stratified by multiplicity, with the unitaries ``U_lam``.

    ``U_lam`` maps ``H_lam`` onto coordinates ``(n, k, point)``; the rows
    are the conjugated basis vectors of each point, ``k`` major inside each
    multiplicity layer.  ``residuals[lam] = ||U N U* - D||`` with ``D`` the
    diagonal of point values.
    """

    operator: CoherentOperator
    chain: tuple
    points: list
    unitaries: dict
    coordinates: dict
    residuals: dict
    splits: list
    infinite: tuple = ()

    @property
    def system(self) -> InductiveHilbertSystem:
        return self.operator.domain

    @property
    def multiplicities(self) -> tuple:
        return tuple(sorted({p.multiplicity for p in self.points}))

    def layer(self, lam, n: int) -> list:
        """``X_{lam, n}``: points of multiplicity ``n`` inside ``H_lam``."""
        pos = self.system.index.elements.index(lam)
        return [p for p in self.points if p.multiplicity == n and p.members[pos]]

    def phi(self, n: int) -> dict:
        return {p.ident: p.value for p in self.points if p.multiplicity == n}

    def measure_system(self, n: int) -> InductiveMeasureSystem:
        """Counting measure on the layer of multiplicity ``n``."""
        idx = self.system.index
        nodes = {lam: atomic_node({p.ident: 1.0 for p in self.layer(lam, n)}, allow_null=True)
                 for lam in idx}
        return InductiveMeasureSystem(idx, nodes)

    def diagonal(self, lam) -> np.ndarray:
        pts = {p.ident: p for p in self.points}
        return np.diag([pts[c[2]].value for c in self.coordinates[lam]])

    def dimension_count(self, lam) -> int:
        return sum(n * len(self.layer(lam, n)) for n in self.multiplicities)

    def sup_bounds(self) -> dict:
        return {lam: max((abs(p.value) for n in self.multiplicities for p in self.layer(lam, n)),
                         default=0.0) for lam in self.system.index}

    def model_space(self) -> InductiveHilbertSystem:
        return InductiveHilbertSystem.from_coordinates(self.system.index, self.coordinates)

    def unitary_operator(self) -> CoherentOperator:
        return CoherentOperator(self.system, self.unitaries, self.model_space())


def _check_model_preconditions(n_op: CoherentOperator, chain) -> tuple:
    system = n_op.domain
    _require_representing(system)
    if chain is None:
        raise PreconditionError("a chain witness for sequential finiteness is required")
    witness = chain if isinstance(chain, ChainWitness) else ChainWitness(chain)
    try:
        rep = is_sequentially_finite(system.index, witness)
    except Exception as exc:  # malformed witness is a failed hypothesis here
        raise PreconditionError(f"invalid chain witness: {exc}") from None
    if not rep.ok:
        raise PreconditionError("index is not certified sequentially finite", rep.violation)
    _require_normal(n_op)
    return witness.chain


def _labels_to_key(labels: tuple, nodes_below: list, all_nodes: tuple) -> tuple:
    z = labels[0]
    bits = {}
    for lam, b in zip(nodes_below, labels[1:]):
        r = round(b.real)
        if abs(b - r) > 1e-6 or r not in (0, 1):
            raise PreconditionError(f"projection onto {lam!r} has eigenvalue {b}")
        bits[lam] = int(r)
    return z, bits


def multiplicity_model(n_op: CoherentOperator, chain, tol: float = CLUSTER_TOL) -> MultiplicityModel:
    """Stratify a locally normal operator by joint-spectrum multiplicity.

    Walks the chain ``eps_1 <= eps_2 <= ...``.  At each step the points found
    so far are embedded into the new space and refined by the projections
    of the newly reachable nodes (an event recorded in ``splits`` if a point
    breaks up), then the orthogonal complement of the previous space is
    decomposed jointly by ``N_eps`` and the projections ``P_{lam, eps}``
    (``N`` first, projections in identifier order).
    """
    eps_seq = _check_model_preconditions(n_op, chain)
    system = n_op.domain
    index = system.index
    elems = index.elements
    work: list = []  # [value, bits dict, basis in current space, born]
    splits = []
    prev = None
    for step, eps in enumerate(eps_seq):
        below = list(index.down_set(eps))
        ops = [n_op.blocks[eps]] + [system.projection(lam, eps) for lam in below]
        nxt = []
        if prev is not None:
            j = system.J(eps, prev)
            for value, bits, basis, born in work:
                pieces = joint_eigenspaces(ops, j @ basis, tol)
                if len(pieces) > 1:
                    splits.append({"step": step, "born": born, "value": value, "pieces": len(pieces)})
                for labels, b in pieces:
                    _, nb = _labels_to_key(labels, below, elems)
                    nxt.append([value, nb, b, born])
            comp = system.complement(prev, eps)
        else:
            comp = np.eye(system.dims[eps], dtype=complex)
        if comp.shape[1]:
            for labels, b in joint_eigenspaces(ops, comp, tol):
                z, bits = _labels_to_key(labels, below, elems)
                nxt.append([z, bits, b, step])
        work = nxt
        prev = eps

    top = eps_seq[-1]
    raw = []
    for value, bits, basis, born in work:
        members = tuple(bits.get(lam, 0) for lam in elems)
        raw.append((basis.shape[1], value.real, value.imag, members, born, value, basis))
    raw.sort(key=lambda r: r[:5])
    points = [ModelPoint(i, complex(r[5]), r[0], r[3], r[4], canonical_basis(r[6]))
              for i, r in enumerate(raw)]

    unitaries, coords, residuals = {}, {}, {}
    for pos, lam in enumerate(elems):
        jt = system.J(top, lam)
        rows, keys = [], []
        for n in sorted({p.multiplicity for p in points}):
            layer = [p for p in points if p.multiplicity == n and p.members[pos]]
            for k in range(n):
                for p in layer:
                    rows.append((jt.conj().T @ p.basis[:, k]).conj())
                    keys.append((n, k, p.ident))
        d = system.dims[lam]
        u = np.array(rows, dtype=complex).reshape(len(rows), d)
        unitaries[lam] = u
        coords[lam] = tuple(keys)
        diag = np.diag([points[key[2]].value for key in keys])
        residuals[lam] = spectral_norm(u @ n_op.blocks[lam] @ u.conj().T - diag)
    return MultiplicityModel(n_op, tuple(eps_seq), points, unitaries, coords, residuals, splits)


def check_multiplicity_model(model: MultiplicityModel, tol: float = MODEL_TOL) -> Report:
    """Residuals, unitarity, dimension bookkeeping and the per-node sup bound."""
    system = model.system
    details = {"residual": max(model.residuals.values(), default=0.0), "unitarity": 0.0}
    for lam in system.index:
        u = model.unitaries[lam]
        d = system.dims[lam]
        if u.shape != (d, d):
            return Report(False, Violation("dimension", f"layers of {lam!r} have {u.shape[0]} rows, "
                                           f"dim is {d}", (lam,)), details)
        details["unitarity"] = max(details["unitarity"], spectral_norm(u.conj().T @ u - np.eye(d)),
                                   spectral_norm(u @ u.conj().T - np.eye(d)))
        if model.dimension_count(lam) != d:
            return Report(False, Violation("dimension", f"multiplicity count mismatch at {lam!r}", (lam,)),
                          details)
        bound = spectral_norm(model.operator.blocks[lam]) + MODEL_TOL
        if model.sup_bounds()[lam] > bound:
            return Report(False, Violation("sup-bound", f"phi exceeds ||N|| at {lam!r}", (lam,)), details)
        if model.residuals[lam] > tol:
            return Report(False, Violation("conjugation", f"U N U* != M_phi at {lam!r}", (lam,),
                                           model.residuals[lam]), details)
    if details["unitarity"] > UNITARY_TOL:
        return Report(False, Violation("unitary", "U is not unitary", (), details["unitarity"]), details)
    return Report(True, details=details)


# --------------------------------------------------------------------------
# functional model


@dataclass
class FunctionalModel:
    """``V N V* = M_phi`` on a discretized atomic measure system.

    Atoms are ``(point, k)`` for the ``k``-th copy of a multiplicity-``n``
    point, with counting measure.
    """

    measure: InductiveMeasureSystem
    phi: LocFunction
    l2: object
    unitaries: dict
    residuals: dict
    unitarity: dict
    multiplicity: MultiplicityModel

    def multiplication(self) -> CoherentOperator:
        return multiplication_operator(self.phi, self.l2)

    def unitary_operator(self) -> CoherentOperator:
        return CoherentOperator(self.multiplicity.system, self.unitaries, self.l2.hilbert)


def functional_model(n_op: CoherentOperator, chain, tol: float = CLUSTER_TOL) -> FunctionalModel:
    """Flatten the multiplicity model into one multiplication-operator model."""
    mm = multiplicity_model(n_op, chain, tol)
    system = mm.system
    nodes, values = {}, {}
    for lam in system.index:
        weights = {}
        for (n, k, ident) in mm.coordinates[lam]:
            weights[(ident, k)] = 1.0
            values[(ident, k)] = mm.points[ident].value
        nodes[lam] = atomic_node(weights, allow_null=True)
    measure = InductiveMeasureSystem(system.index, nodes)
    l2 = discretize_system(measure)
    phi = LocFunction(values=values)
    mphi = multiplication_operator(phi, l2)
    unitaries, residuals, unitarity = {}, {}, {}
    for lam in system.index:
        row_of = {(ident, k): i for i, (n, k, ident) in enumerate(mm.coordinates[lam])}
        order = [row_of[key] for key in l2.hilbert.coordinates[lam]]
        v = mm.unitaries[lam][order, :]
        d = system.dims[lam]
        unitaries[lam] = v
        residuals[lam] = spectral_norm(v @ n_op.blocks[lam] @ v.conj().T - mphi.blocks[lam])
        unitarity[lam] = max(spectral_norm(v.conj().T @ v - np.eye(d)), spectral_norm(v @ v.conj().T - np.eye(d)))
    return FunctionalModel(measure, phi, l2, unitaries, residuals, unitarity, mm)


def check_functional_model(model: FunctionalModel, tol: float = MODEL_TOL) -> Report:
    details = {"residual": max(model.residuals.values(), default=0.0),
               "unitarity": max(model.unitarity.values(), default=0.0)}
    if details["unitarity"] > UNITARY_TOL:
        lam = max(model.unitarity, key=model.unitarity.get)
        return Report(False, Violation("unitary", f"V is not unitary at {lam!r}", (lam,),
                                       details["unitarity"]), details)
    if details["residual"] > tol:
        lam = max(model.residuals, key=model.residuals.get)
        return Report(False, Violation("conjugation", f"V N V* != M_phi at {lam!r}", (lam,),
                                       details["residual"]), details)
    return Report(True, details=details)


# --------------------------------------------------------------------------
# fiber view


@dataclass(frozen=True)
class Fiber:
    point: int
    dimension: int
    value: complex


def direct_integral_view(model: MultiplicityModel) -> dict:
    """Per node, the fibers ``x -> (n, phi_n(x))`` of the multiplicity model."""
    out = {}
    for lam in model.system.index:
        fibers = []
        for n in model.multiplicities:
            fibers.extend(Fiber(p.ident, n, p.value) for p in model.layer(lam, n))
        out[lam] = tuple(fibers)
    return out


def reassemble(view: dict, model: MultiplicityModel) -> dict:
    """Diagonal operators rebuilt from the fiber view in the model's coordinates."""
    out = {}
    for lam, fibers in view.items():
        value = {f.point: f.value for f in fibers}
        out[lam] = np.diag([value[c[2]] for c in model.coordinates[lam]])
    return out


def fiber_histogram(view: dict) -> dict:
    """``{node: {n: number of fibers of dimension n}}``."""
    out = {}
    for lam, fibers in view.items():
        h: dict = {}
        for f in fibers:
            h[f.dimension] = h.get(f.dimension, 0) + 1
        out[lam] = h
    return out
