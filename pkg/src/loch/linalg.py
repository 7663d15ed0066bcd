"""Dense linear-algebra helpers: norms, eigenspaces of normal matrices, clustering."""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
from scipy.spatial import cKDTree

CLUSTER_TOL = 1e-8


def spectral_norm(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def orthonormal_complement(j: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning the orthogonal complement of ``ran(j)``."""
    j = np.asarray(j)
    n, k = j.shape
    if k == 0:
        return np.eye(n, dtype=complex)
    if n == k:
        return np.zeros((n, 0), dtype=complex)
    return sla.null_space(j.conj().T).astype(complex)


def cluster_values(values, tol: float = CLUSTER_TOL) -> tuple[list[list[int]], list[complex]]:
    """Single-linkage clusters of complex values at absolute distance ``tol``.

    Returns ``(groups, reps)``; each representative is the member with the
    smallest ``(Re, Im)``, and groups are sorted by their representative.
    """
    vals = np.asarray(values, dtype=complex).ravel()
    n = vals.size
    if n == 0:
        return [], []
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    tree = cKDTree(np.column_stack([vals.real, vals.imag]))
    for i, j in tree.query_pairs(tol):
        a, b = find(i), find(j)
        if a != b:
            parent[a] = b
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for idx in groups.values():
        rep = min((vals[i] for i in idx), key=lambda z: (z.real, z.imag))
        out.append((rep, sorted(idx)))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return [g for _, g in out], [complex(r) for r, _ in out]


def normal_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and a unitary eigenbasis of a normal matrix (complex Schur form)."""
    a = np.asarray(a, dtype=complex)
    if a.shape[0] == 0:
        return np.zeros(0, dtype=complex), np.zeros((0, 0), dtype=complex)
    t, z = sla.schur(a, output="complex")
    return np.diag(t).copy(), z


def eigenspaces(a: np.ndarray, tol: float = CLUSTER_TOL) -> list[tuple[complex, np.ndarray]]:
    """``(eigenvalue, orthonormal basis)`` per eigenvalue cluster of a normal matrix."""
    w, z = normal_eig(a)
    groups, reps = cluster_values(w, tol)
    return [(rep, z[:, g]) for rep, g in zip(reps, groups)]


def canonical_basis(v: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Basis of ``ran(v)`` that depends only on the subspace.

    Gram-Schmidt over the columns of the orthogonal projector onto the span,
    with each column's first non-negligible coordinate made real positive.
    """
    v = np.asarray(v, dtype=complex)
    n, k = v.shape
    if k == 0:
        return v
    p = v @ v.conj().T
    cols: list[np.ndarray] = []
    for j in range(n):
        x = p[:, j].copy()
        for c in cols:
            x -= c * (c.conj() @ x)
        nrm = np.linalg.norm(x)
        if nrm > 1e-6:
            x /= nrm
            for c in cols:  # second pass keeps orthogonality tight
                x -= c * (c.conj() @ x)
            x /= np.linalg.norm(x)
            cols.append(x)
            if len(cols) == k:
                break
    out = np.column_stack(cols)
    return normalize_phases(out, tol)


def normalize_phases(v: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    v = np.array(v, dtype=complex)
    for j in range(v.shape[1]):
        nz = np.flatnonzero(np.abs(v[:, j]) > tol)
        if nz.size:
            z = v[nz[0], j]
            v[:, j] *= abs(z) / z
    return v


def joint_eigenspaces(ops, basis: np.ndarray | None = None, tol: float = CLUSTER_TOL):
    """Recursive eigenspace refinement of a commuting family of normal matrices.

    Each operator in turn splits every current subspace into its eigenspaces
    (computed on the compression to that subspace).  Returns a list of
    ``(labels, basis)`` with one eigenvalue label per operator.
    """
    ops = list(ops)
    if basis is None:
        n = ops[0].shape[0]
        basis = np.eye(n, dtype=complex)
    spaces = [((), np.asarray(basis, dtype=complex))]
    for a in ops:
        nxt = []
        for labels, q in spaces:
            if q.shape[1] == 0:
                continue
            sub = q.conj().T @ a @ q
            for val, v in eigenspaces(sub, tol):
                nxt.append((labels + (val,), q @ v))
        spaces = nxt
    return spaces
