"""Random generators for directed sets, representing systems and operator nets.

Every generator takes a :class:`numpy.random.Generator` so suites are
reproducible from one seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import InductiveHilbertSystem, build_inoue_space
from .linalg import joint_eigenspaces
from .operator import CoherentOperator
from .order import ChainWitness, DirectedSet, check_directed


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary (QR of a complex Gaussian with phase fix)."""
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_matrix(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))


def random_directed_set(rng: np.random.Generator, size: int) -> DirectedSet:
    """Random finite directed set on ``l0 .. l{size-1}`` whose top is the last element.

    Each element gets random strict upper covers among later elements, and
    every element sits below the top; the order is the transitive closure.
    """
    names = [f"l{i}" for i in range(size)]
    up = [set() for _ in range(size)]
    for i in range(size - 1):
        later = list(range(i + 1, size))
        k = int(rng.integers(1, min(2, len(later)) + 1))
        up[i].update(int(j) for j in rng.choice(later, size=k, replace=False))
        up[i].add(size - 1)
    for i in range(size - 1, -1, -1):  # close transitively, later elements first
        for j in list(up[i]):
            up[i] |= up[j]
    pairs = [(names[i], names[i]) for i in range(size)]
    pairs += [(names[i], names[j]) for i in range(size) for j in up[i]]
    return check_directed(names, pairs)


def maximal_chain(index: DirectedSet) -> ChainWitness:
    """A chain ending in the top element, ascending through down-set sizes."""
    top = index.top()
    chain = [e for e in sorted(index.down_set(top), key=lambda e: (len(index.down_set(e)), e))
             if index.le(e, top)]
    picked = []
    for e in chain:
        if not picked or index.le(picked[-1], e):
            picked.append(e)
    if picked[-1] != top:
        picked.append(top)
    return ChainWitness(picked)


def random_patterns(rng: np.random.Generator, index: DirectedSet, count: int) -> list:
    """Up-closed node sets (each containing the top): unions of principal up-sets."""
    elems = index.elements
    ups = {a: frozenset(b for b in elems if index.le(a, b)) for a in elems}
    out = []
    for _ in range(count):
        k = int(rng.integers(1, 3))
        gens = rng.choice(len(elems), size=min(k, len(elems)), replace=False)
        pat = frozenset().union(*(ups[elems[int(g)]] for g in gens))
        out.append(pat)
    return out


def representing_system(rng: np.random.Generator, index: DirectedSet, patterns: list,
                        multiplicities: list, rotate: bool = True) -> InductiveHilbertSystem:
    """Representing system whose top space splits into one block per pattern.

    Block ``p`` has dimension ``multiplicities[p]`` and lies in ``H_lam``
    exactly when ``lam`` is in ``patterns[p]``.  With ``rotate`` the blocks
    sit in a random orthonormal frame of the top space and every node gets
    its own random basis, so the embeddings are dense isometries.
    """
    elems = index.elements
    cols: dict = {lam: [] for lam in elems}
    pos = 0
    for pat, m in zip(patterns, multiplicities):
        for _ in range(int(m)):
            for lam in pat:
                cols[lam].append(pos)
            pos += 1
    total = pos
    w = random_unitary(rng, total) if rotate else np.eye(total, dtype=complex)
    basis = {}
    for lam in elems:
        b = w[:, cols[lam]]
        if rotate:
            b = b @ random_unitary(rng, len(cols[lam]))
        basis[lam] = b
    dims = {lam: len(cols[lam]) for lam in elems}
    emb = {(lam, nu): basis[nu].conj().T @ basis[lam] for lam, nu in index.comparable_pairs()}
    return InductiveHilbertSystem(index, dims, embeddings=emb)


@dataclass
class RandomSystem:
    system: InductiveHilbertSystem
    patterns: list
    multiplicities: list


def random_representing_system(rng: np.random.Generator, max_nodes: int = 6, max_dim: int = 8,
                               max_classes: int = 4) -> RandomSystem:
    """Random directed set plus a random representing system with dims ``<= max_dim``."""
    while True:
        index = random_directed_set(rng, int(rng.integers(1, max_nodes + 1)))
        k = int(rng.integers(1, max_classes + 1))
        patterns = random_patterns(rng, index, k)
        mults = [int(m) for m in rng.integers(1, 3, size=k)]
        if sum(mults) <= max_dim:
            break
    return RandomSystem(representing_system(rng, index, patterns, mults), patterns, mults)


def random_inoue_system(rng: np.random.Generator, max_nodes: int = 5, max_dim: int = 10):
    """Inoue direct-sum system over a random directed set, node dims ``<= max_dim``."""
    while True:
        index = random_directed_set(rng, int(rng.integers(1, max_nodes + 1)))
        comp = {a: int(rng.integers(1, 3)) for a in index}
        if sum(comp.values()) <= max_dim:
            return build_inoue_space(index, comp), maximal_chain(index)


# --------------------------------------------------------------------------
# operator nets


def pattern_classes(system: InductiveHilbertSystem) -> list:
    """Orthonormal bases (top coordinates) of the joint eigenspaces of all ``P_{lam, top}``."""
    top = system.top
    d = system.dims[top]
    if d == 0:
        return []
    ops = [system.projection(lam, top) for lam in system.index]
    return [b for _, b in joint_eigenspaces(ops, np.eye(d, dtype=complex))]


def compress(system: InductiveHilbertSystem, top_block: np.ndarray, codomain=None) -> CoherentOperator:
    """Net ``T_lam = J_K* T_top J_H`` from a top operator that respects every ``H_lam``."""
    cod = system if codomain is None else codomain
    top = system.top
    blocks = {lam: cod.J(top, lam).conj().T @ top_block @ system.J(top, lam) for lam in system.index}
    return CoherentOperator(system, blocks, codomain)


def _eigenvalues(rng, n, kind, pool):
    vals = []
    for _ in range(n):
        if pool is not None and rng.random() < 0.4:
            vals.append(pool[int(rng.integers(len(pool)))])
        elif kind == "hermitian":
            vals.append(complex(rng.standard_normal()))
        else:
            vals.append(complex(rng.standard_normal(), rng.standard_normal()))
    return vals


def random_coherent(rng: np.random.Generator, system: InductiveHilbertSystem,
                    kind: str = "general", repeat: bool = True) -> CoherentOperator:
    """Random coherent net: one random block per pattern class of the top space.

    ``kind`` is ``general``, ``normal`` or ``hermitian``.  With ``repeat``,
    normal eigenvalues are often reused from a small pool, so nets with
    degenerate spectra (multiplicity above one) are common.
    """
    top = system.top
    d = system.dims[top]
    t = np.zeros((d, d), dtype=complex)
    pool = None
    if repeat and kind != "general":
        pool = _eigenvalues(rng, 3, kind, None)
    for b in pattern_classes(system):
        k = b.shape[1]
        if kind == "general":
            blk = random_matrix(rng, k, k)
        else:
            u = random_unitary(rng, k)
            blk = u @ np.diag(_eigenvalues(rng, k, kind, pool)) @ u.conj().T
        t += b @ blk @ b.conj().T
    if kind == "hermitian":
        t = (t + t.conj().T) / 2
    return compress(system, t)


def random_commuting(rng: np.random.Generator, n_op: CoherentOperator) -> CoherentOperator:
    """Random coherent net commuting with the locally normal ``n_op``."""
    system = n_op.domain
    top = system.top
    d = system.dims[top]
    t = np.zeros((d, d), dtype=complex)
    if d:
        ops = [n_op.blocks[top]] + [system.projection(lam, top) for lam in system.index]
        for _, b in joint_eigenspaces(ops, np.eye(d, dtype=complex)):
            k = b.shape[1]
            t += b @ random_matrix(rng, k, k) @ b.conj().T
    return compress(system, t)


def mutate_incoherent(rng: np.random.Generator, op: CoherentOperator, size: float = 0.5):
    """Copy of ``op`` with one block perturbed so that coherence breaks.

    Picks a comparable pair ``lam < nu`` with ``dim H_lam > 0`` and perturbs
    ``T_nu`` on ``H_lam``; returns ``None`` if the system has no such pair.
    """
    system = op.domain
    pairs = [(a, b) for a, b in system.index.comparable_pairs() if system.dims[a] > 0]
    if not pairs:
        return None
    lam, nu = pairs[int(rng.integers(len(pairs)))]
    j = system.J(nu, lam)
    x = random_matrix(rng, system.dims[nu], system.dims[lam])
    x *= size / max(np.linalg.norm(x, 2), 1e-300)
    blocks = dict(op.blocks)
    blocks[nu] = blocks[nu] + x @ j.conj().T
    return CoherentOperator(system, blocks, op.codomain)


@dataclass
class FugledeTriple:
    n: CoherentOperator
    m: CoherentOperator
    b: CoherentOperator


def random_fuglede_triple(rng: np.random.Generator, max_nodes: int = 5, max_dim: int = 8) -> FugledeTriple:
    """Normal ``N`` on ``H``, normal ``M`` on ``K`` and ``B: K -> H`` with ``N B = B M``.

    ``H`` and ``K`` share the pattern classes; ``B`` only links eigenvectors
    of ``M`` and ``N`` with equal eigenvalues inside the same class.
    """
    while True:
        index = random_directed_set(rng, int(rng.integers(1, max_nodes + 1)))
        k = int(rng.integers(1, 4))
        patterns = random_patterns(rng, index, k)
        mh = [int(m) for m in rng.integers(1, 3, size=k)]
        mk = [int(m) for m in rng.integers(1, 3, size=k)]
        if sum(mh) <= max_dim and sum(mk) <= max_dim:
            break
    h = representing_system(rng, index, patterns, mh, rotate=False)
    kk = representing_system(rng, index, patterns, mk, rotate=False)
    pool = [complex(rng.standard_normal(), rng.standard_normal()) for _ in range(3)]
    dh, dk = sum(mh), sum(mk)
    n_top = np.zeros((dh, dh), dtype=complex)
    m_top = np.zeros((dk, dk), dtype=complex)
    b_top = np.zeros((dh, dk), dtype=complex)
    oh = ok = 0
    for p in range(k):
        a, c = mh[p], mk[p]
        zh = [pool[int(i)] for i in rng.integers(len(pool), size=a)]
        zk = [pool[int(i)] for i in rng.integers(len(pool), size=c)]
        uh, uk = random_unitary(rng, a), random_unitary(rng, c)
        link = random_matrix(rng, a, c) * np.array([[zi == zj for zj in zk] for zi in zh])
        n_top[oh:oh + a, oh:oh + a] = uh @ np.diag(zh) @ uh.conj().T
        m_top[ok:ok + c, ok:ok + c] = uk @ np.diag(zk) @ uk.conj().T
        b_top[oh:oh + a, ok:ok + c] = uh @ link @ uk.conj().T
        oh, ok = oh + a, ok + c
    return FugledeTriple(compress(h, n_top), compress(kk, m_top), compress(kk, b_top, h))
