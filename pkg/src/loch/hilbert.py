"""Strictly inductive systems of finite-dimensional Hilbert spaces."""

from __future__ import annotations

import threading
from typing import Hashable, Mapping

import numpy as np

from .errors import MalformedInput, PreconditionError, Report, ValidationError, Violation
from .linalg import spectral_norm
from .order import DirectedSet

ISOMETRY_TOL = 1e-12
REPRESENTING_TOL = 1e-10


class InductiveHilbertSystem:
    """Spaces ``C^dim`` per index with isometric embeddings ``J(nu, lam)``.

    Embeddings are given either explicitly, as ``dim_nu x dim_lam`` matrices
    keyed by ``(lam, nu)``, or implicitly through per-node coordinate labels
    (each node's basis is a subset of the labels of every larger node), in
    which case they are coordinate injections built on demand.
    """

    def __init__(self, index: DirectedSet, dims: Mapping[Hashable, int],
                 embeddings: Mapping | None = None, coordinates: Mapping | None = None):
        self.index = index
        self.dims = {lam: int(dims[lam]) for lam in index}
        self._embeddings = None if embeddings is None else {
            k: np.asarray(v, dtype=complex) for k, v in embeddings.items()}
        self.coordinates = None if coordinates is None else {k: tuple(v) for k, v in coordinates.items()}
        self._memo: dict = {}
        self._lock = threading.Lock()

    @classmethod
    def from_coordinates(cls, index: DirectedSet, coordinates: Mapping) -> "InductiveHilbertSystem":
        dims = {lam: len(coordinates[lam]) for lam in index}
        return cls(index, dims, coordinates=coordinates)

    def __repr__(self):
        return f"InductiveHilbertSystem({len(self.index)} nodes, top dim {self.dims[self.top]})"

    @property
    def top(self):
        return self.index.top()

    def J(self, nu, lam) -> np.ndarray:
        """Embedding of ``H_lam`` into ``H_nu`` (requires ``lam <= nu``)."""
        key = ("J", lam, nu)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        if lam == nu and (self._embeddings is None or (lam, nu) not in self._embeddings):
            mat = np.eye(self.dims[lam])
        elif self.coordinates is not None:
            if not self.index.le(lam, nu):
                raise PreconditionError(f"{lam!r} is not <= {nu!r}")
            pos = {c: i for i, c in enumerate(self.coordinates[nu])}
            mat = np.zeros((self.dims[nu], self.dims[lam]))
            for j, c in enumerate(self.coordinates[lam]):
                try:
                    mat[pos[c], j] = 1.0
                except KeyError:
                    raise ValidationError(Violation(
                        "lhs3", f"coordinate {c!r} of {lam!r} is missing from {nu!r}", (lam, nu))) from None
        else:
            try:
                mat = self._embeddings[(lam, nu)]
            except KeyError:
                if not self.index.le(lam, nu):
                    raise PreconditionError(f"{lam!r} is not <= {nu!r}") from None
                raise MalformedInput(f"no embedding given for {lam!r} <= {nu!r}") from None
        with self._lock:
            self._memo[key] = mat
        return mat

    def projection(self, lam, eps) -> np.ndarray:
        """Hermitian projection of ``H_eps`` onto ``H_lam``."""
        key = ("P", lam, eps)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        if not self.index.le(lam, eps):
            raise PreconditionError(f"projection needs {lam!r} <= {eps!r}")
        j = self.J(eps, lam)
        mat = j @ j.conj().T
        with self._lock:
            self._memo[key] = mat
        return mat

    def complement(self, lam, eps) -> np.ndarray:
        """Orthonormal basis (columns) of ``H_eps`` minus ``H_lam``."""
        from .linalg import orthonormal_complement
        return orthonormal_complement(self.J(eps, lam))


def validate_hilbert_system(index: DirectedSet, dims: Mapping, embeddings: Mapping | None = None,
                            coordinates: Mapping | None = None,
                            tol: float = ISOMETRY_TOL) -> InductiveHilbertSystem:
    """Build a system and check identity, isometry and transitivity of embeddings.

    Raises
    ------
    MalformedInput
        An embedding has the wrong shape, or a comparable pair has none.
    ValidationError
        ``lhs3`` (identity / transitivity / dimension order) or ``lhs4``
        (isometry), with the first failing pair as witness.
    """
    for lam in index:
        if lam not in dims or int(dims[lam]) < 0:
            raise MalformedInput(f"missing or negative dimension for {lam!r}")
    system = InductiveHilbertSystem(index, dims, embeddings, coordinates)
    report = hilbert_system_report(system, tol)
    if not report.ok:
        raise ValidationError(report.violation)
    return system


def hilbert_system_report(system: InductiveHilbertSystem, tol: float = ISOMETRY_TOL) -> Report:
    index, dims = system.index, system.dims
    for lam in index:
        if system._embeddings is not None and (lam, lam) in system._embeddings:
            d = spectral_norm(system._embeddings[(lam, lam)] - np.eye(dims[lam]))
            if d > tol:
                return Report(False, Violation("lhs3", f"J({lam!r},{lam!r}) is not the identity",
                                               (lam, lam), d))
    for lam, nu in index.comparable_pairs():
        j = system.J(nu, lam)
        if j.shape != (dims[nu], dims[lam]):
            raise MalformedInput(f"embedding {lam!r}->{nu!r} has shape {j.shape}, "
                                 f"expected {(dims[nu], dims[lam])}")
        if dims[lam] > dims[nu]:
            return Report(False, Violation("lhs3", f"dim {lam!r} exceeds dim {nu!r}", (lam, nu)))
        d = spectral_norm(j.conj().T @ j - np.eye(dims[lam]))
        if d > tol:
            return Report(False, Violation("lhs4", f"embedding {lam!r}->{nu!r} is not isometric",
                                           (lam, nu), d))
    for lam, nu in index.comparable_pairs():
        for eta in index.elements:
            if eta == nu or not index.le(nu, eta):
                continue
            d = spectral_norm(system.J(eta, nu) @ system.J(nu, lam) - system.J(eta, lam))
            if d > tol:
                return Report(False, Violation(
                    "lhs3", f"J({eta!r},{nu!r}) J({nu!r},{lam!r}) != J({eta!r},{lam!r})",
                    (lam, nu, eta), d))
    return Report(True)


def projection_onto(system: InductiveHilbertSystem, lam, eps) -> np.ndarray:
    return system.projection(lam, eps)


def check_representing(system: InductiveHilbertSystem, tol: float = REPRESENTING_TOL,
                       all_bounds: bool = False) -> Report:
    """Commutation of the projections onto ``H_lam`` and ``H_nu`` inside a common ``H_eps``.

    For every unordered pair the canonical upper bound is used; with
    ``all_bounds`` every common upper bound is tried.  ``details["norms"]``
    maps ``(lam, nu, eps)`` to the commutator's spectral norm.  On failure the
    violation's witness is the offending ``(lam, nu, eps)`` triple.
    """
    index = system.index
    elems = index.elements
    norms = {}
    worst = 0.0
    for i, lam in enumerate(elems):
        for nu in elems[i + 1:]:
            if all_bounds:
                bounds = [e for e in elems if index.le(lam, e) and index.le(nu, e)]
            else:
                bounds = [index.upper_bound(lam, nu)]
            for eps in bounds:
                p, q = system.projection(lam, eps), system.projection(nu, eps)
                c = spectral_norm(p @ q - q @ p)
                norms[(lam, nu, eps)] = c
                worst = max(worst, c)
                if c > tol:
                    return Report(False, Violation(
                        "lch5", f"projections onto {lam!r} and {nu!r} do not commute in {eps!r}",
                        (lam, nu, eps), c), {"norms": norms, "max": worst})
    return Report(True, details={"norms": norms, "max": worst})


def build_inoue_space(index: DirectedSet, component_dims: Mapping) -> InductiveHilbertSystem:
    """``H_lam`` = direct sum of the component spaces ``G_alpha`` over ``alpha <= lam``.

    Coordinates are ``(alpha, i)`` with ``alpha`` in identifier order, so
    every embedding is a 0/1 coordinate injection.
    """
    coords = {}
    for lam in index:
        coords[lam] = tuple((a, i) for a in index.down_set(lam) for i in range(int(component_dims.get(a, 0))))
    return InductiveHilbertSystem.from_coordinates(index, coords)
