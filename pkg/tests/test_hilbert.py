"""Inductive Hilbert systems, projections, representing checks and Inoue sums."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loch.errors import MalformedInput, PreconditionError, ValidationError
from loch.hata import branch_indexed_elements, branch_indexed_le
from loch.hilbert import (InductiveHilbertSystem, build_inoue_space, check_representing,
                          hilbert_system_report, projection_onto, validate_hilbert_system)
from loch.order import DirectedSet, chain_order, check_directed
from loch.sampling import random_directed_set, random_representing_system


def vee():
    return check_directed(["a", "b", "t"], [("a", "a"), ("b", "b"), ("t", "t"), ("a", "t"), ("b", "t")])


def branch_window(depth):
    return DirectedSet.from_predicate(branch_indexed_elements(depth), branch_indexed_le,
                                      top=(depth + 1, 0))


def test_validation_examples():
    assert validate_hilbert_system(chain_order(["x"]), {"x": 3}).dims == {"x": 3}
    ix = chain_order([0, 1])
    j = np.array([[1.0], [0.0]])
    sys = validate_hilbert_system(ix, {0: 1, 1: 2}, {(0, 1): j})
    assert np.array_equal(sys.J(1, 0), j)
    with pytest.raises(ValidationError) as exc:
        validate_hilbert_system(ix, {0: 1, 1: 2}, {(0, 1): 2 * j})
    v = exc.value.violation
    assert v.tag == "lhs4" and v.witness == (0, 1) and v.residual == pytest.approx(3.0)


def test_validation_errors():
    ix = chain_order([0, 1])
    with pytest.raises(MalformedInput):
        validate_hilbert_system(ix, {0: 1, 1: 2}, {(0, 1): np.ones((3, 1))})
    with pytest.raises(MalformedInput):
        validate_hilbert_system(ix, {0: 1, 1: 2}, {})
    with pytest.raises(MalformedInput):
        validate_hilbert_system(ix, {0: 1})
    with pytest.raises(ValidationError) as exc:
        validate_hilbert_system(ix, {0: 2, 1: 1}, {(0, 1): np.ones((1, 2))})
    assert exc.value.violation.tag == "lhs3"


def test_transitivity_violation():
    ix = chain_order([0, 1, 2])
    e = np.eye(2)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    emb = {(0, 1): np.array([[1.0], [0.0]]), (1, 2): e, (0, 2): swap @ np.array([[1.0], [0.0]])}
    with pytest.raises(ValidationError) as exc:
        validate_hilbert_system(ix, {0: 1, 1: 2, 2: 2}, emb)
    assert exc.value.violation.tag == "lhs3" and exc.value.violation.witness == (0, 1, 2)


def test_projections():
    ix = chain_order([0, 1])
    sys = validate_hilbert_system(ix, {0: 1, 1: 2}, {(0, 1): np.array([[1.0], [0.0]])})
    assert np.array_equal(projection_onto(sys, 0, 1), np.diag([1.0, 0.0]))
    assert np.array_equal(projection_onto(sys, 1, 1), np.eye(2))
    with pytest.raises(PreconditionError):
        projection_onto(sys, 1, 0)
    inoue = build_inoue_space(vee(), {"a": 1, "b": 1, "t": 1})
    assert np.array_equal(inoue.projection("a", "t"), np.diag([1.0, 0.0, 0.0]))
    assert np.array_equal(inoue.projection("b", "t"), np.diag([0.0, 1.0, 0.0]))
    with pytest.raises(PreconditionError):
        inoue.projection("a", "b")


def test_projection_invariants_random():
    rng = np.random.default_rng(11)
    for _ in range(20):
        sys = random_representing_system(rng).system
        assert hilbert_system_report(sys).ok
        for lam, eps in sys.index.comparable_pairs(strict=False):
            p = sys.projection(lam, eps)
            assert np.allclose(p, p.conj().T, atol=1e-12)
            assert np.allclose(p @ p, p, atol=1e-12)
            assert round(np.trace(p).real) == sys.dims[lam]
            for nu in sys.index:
                if sys.index.le(lam, nu) and sys.index.le(nu, eps):
                    assert np.allclose(p @ sys.projection(nu, eps), p, atol=1e-12)


def test_chain_is_representing():
    rng = np.random.default_rng(2)
    ix = chain_order([0, 1, 2])
    from loch.sampling import random_unitary
    u = random_unitary(rng, 4)
    b = {0: u[:, :1], 1: u[:, :2], 2: u[:, :4]}
    emb = {(a, c): b[c].conj().T @ b[a] for a, c in ix.comparable_pairs()}
    sys = validate_hilbert_system(ix, {0: 1, 1: 2, 2: 4}, emb)
    assert check_representing(sys).ok


def test_counterexample():
    s = 1 / np.sqrt(2)
    emb = {("a", "t"): np.array([[1.0], [0.0]]), ("b", "t"): np.array([[s], [s]])}
    sys = validate_hilbert_system(vee(), {"a": 1, "b": 1, "t": 2}, emb)
    rep = check_representing(sys)
    assert not rep.ok
    assert rep.violation.tag == "lch5" and rep.violation.witness == ("a", "b", "t")
    # [[1,0],[0,0]] against [[.5,.5],[.5,.5]]: the commutator has norm 1/2
    assert rep.violation.residual == pytest.approx(0.5, abs=1e-15)
    # orthogonal lines do commute
    emb[("b", "t")] = np.array([[0.0], [1.0]])
    assert check_representing(validate_hilbert_system(vee(), {"a": 1, "b": 1, "t": 2}, emb)).ok


def test_inoue_examples():
    sys = build_inoue_space(chain_order([1, 2]), {1: 1, 2: 1})
    assert sys.dims == {1: 1, 2: 2}
    assert np.array_equal(sys.J(2, 1), np.array([[1.0], [0.0]]))
    single = build_inoue_space(chain_order(["g"]), {"g": 3})
    assert single.dims == {"g": 3}
    ix = branch_window(1)
    sys = build_inoue_space(ix, {a: 1 for a in ix})
    for lam in ix:
        assert sys.dims[lam] == len(ix.down_set(lam))
    assert hilbert_system_report(sys).ok
    assert build_inoue_space(chain_order([0, 1]), {0: 0, 1: 2}).dims == {0: 0, 1: 2}


def test_inoue_exact_commutation_and_meets():
    ix = branch_window(2)
    sys = build_inoue_space(ix, {a: 1 + sum(a) % 2 for a in ix})
    rep = check_representing(sys, all_bounds=True)
    assert rep.ok and rep.details["max"] == 0.0
    top = ix.top()
    coords = sys.coordinates[top]
    for lam in ix:
        for nu in ix:
            p, q = sys.projection(lam, top), sys.projection(nu, top)
            assert np.array_equal(p @ q, q @ p)
            common = set(ix.down_set(lam)) & set(ix.down_set(nu))
            meet = np.diag([1.0 if a in common else 0.0 for a, _ in coords])
            assert np.array_equal(p @ q, meet)


def test_upper_bound_independence():
    rng = np.random.default_rng(4)
    for _ in range(25):
        sys = random_representing_system(rng).system
        rep = check_representing(sys, all_bounds=True)
        assert rep.ok
        by_pair = {}
        for (lam, nu, eps), c in rep.details["norms"].items():
            by_pair.setdefault((lam, nu), []).append(c)
        assert all(max(v) <= 1e-10 for v in by_pair.values())


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10_000))
def test_inoue_random_directed_sets(size, seed):
    rng = np.random.default_rng(seed)
    ix = random_directed_set(rng, size)
    comp = {a: int(rng.integers(0, 3)) for a in ix}
    sys = build_inoue_space(ix, comp)
    assert hilbert_system_report(sys).ok
    for lam in ix:
        assert sys.dims[lam] == sum(comp[a] for a in ix.down_set(lam))
    assert check_representing(sys).details["max"] == 0.0


def test_memo_is_threadsafe():
    from concurrent.futures import ThreadPoolExecutor
    sys = build_inoue_space(branch_window(2), {a: 1 for a in branch_window(2)})
    top = sys.top
    with ThreadPoolExecutor(4) as pool:
        mats = list(pool.map(lambda lam: sys.projection(lam, top), list(sys.index) * 4))
    assert all(np.array_equal(m, sys.projection(lam, top)) for m, lam in zip(mats, list(sys.index) * 4))
    assert isinstance(sys, InductiveHilbertSystem)
