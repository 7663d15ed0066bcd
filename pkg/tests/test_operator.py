"""Coherent operator nets: validation, algebra, classes, spectra, multiplication operators."""

import math

import numpy as np
import pytest

from loch.errors import (ConsistencyAlarm, DomainError, IncompatibleSystems, MalformedInput,
                         PreconditionError, ValidationError)
from loch.hata import IfsParams, build_inductive_system
from loch.hilbert import build_inoue_space, validate_hilbert_system
from loch.measure import InductiveMeasureSystem, atomic_node, discretize_system
from loch.operator import (CoherentOperator, LocFunction, adjoint, add, block_residuals, classify,
                           coherence_verdicts, compose, essential_range, fuglede_putnam_check,
                           is_coherent, multiplication_operator, resolvent_norms,
                           restriction_residuals, scale, seminorm, spectrum, validate_coherent)
from loch.order import chain_order
from loch.sampling import (mutate_incoherent, random_coherent, random_fuglede_triple,
                           random_representing_system)


def chain12():
    return validate_hilbert_system(chain_order([1, 2]), {1: 1, 2: 2}, {(1, 2): np.array([[1.0], [0.0]])})


def test_validate_examples():
    h = chain12()
    assert validate_coherent(CoherentOperator.identity(h).blocks, h) is not None
    op = validate_coherent({1: np.array([[2.0]]), 2: np.diag([2.0, 5.0])}, h)
    assert np.array_equal(op[2], np.diag([2.0, 5.0]))
    with pytest.raises(ValidationError) as exc:
        validate_coherent({1: np.array([[2.0]]), 2: np.array([[2.0, 1.0], [0.0, 5.0]])}, h)
    assert exc.value.violation.witness == (1, 2)
    assert exc.value.violation.residual == pytest.approx(1.0)


def test_validate_shape_errors():
    h = chain12()
    with pytest.raises(MalformedInput):
        validate_coherent({1: np.eye(2), 2: np.eye(2)}, h)
    with pytest.raises(MalformedInput):
        validate_coherent({2: np.eye(2)}, h)


def test_verdicts_agree_on_random_nets():
    rng = np.random.default_rng(8)
    for _ in range(40):
        sys = random_representing_system(rng).system
        op = random_coherent(rng, sys)
        v = coherence_verdicts(op.blocks, sys)
        assert v.agree and v.restriction.ok
        assert max(block_residuals(op.blocks, sys).values(), default=0) <= 1e-12
        bad = mutate_incoherent(rng, op)
        if bad is not None:
            v = coherence_verdicts(bad.blocks, sys)
            assert v.agree and not v.restriction.ok
            assert v.restriction.violation.tag == "coherence"
            assert v.block.violation.tag == "block-diagonal"


def test_consistency_alarm_on_disagreement(monkeypatch):
    import loch.operator as opmod
    h = chain12()
    blocks = {1: np.array([[2.0]]), 2: np.array([[2.0, 1.0], [0.0, 5.0]])}
    monkeypatch.setattr(opmod, "block_residuals", lambda *a, **k: {(1, 2): 0.0})
    with pytest.raises(ConsistencyAlarm):
        validate_coherent(blocks, h)


def test_compression_property():
    rng = np.random.default_rng(9)
    sys = random_representing_system(rng).system
    op = random_coherent(rng, sys)
    for lam, nu in sys.index.comparable_pairs():
        j = sys.J(nu, lam)
        assert np.allclose(j.conj().T @ op[nu] @ j, op[lam], atol=1e-12)


def test_adjoint_and_algebra():
    rng = np.random.default_rng(10)
    sys = random_representing_system(rng).system
    s, t, u = (random_coherent(rng, sys) for _ in range(3))
    herm = random_coherent(rng, sys, "hermitian")
    assert adjoint(herm).distance(herm) <= 1e-12
    assert adjoint(adjoint(t)).distance(t) == 0
    assert adjoint(compose(s, t)).distance(compose(adjoint(t), adjoint(s))) <= 1e-12
    assert compose(t, CoherentOperator.identity(sys)).distance(t) == 0
    assert ((s @ t) @ u).distance(s @ (t @ u)) <= 1e-12 * (1 + seminorm(s @ t @ u, sys.top))
    for lam in sys.index:
        assert np.allclose((s @ t)[lam], s[lam] @ t[lam])
    assert add(s, t).distance(s + t) == 0
    assert scale(2j, t).distance(t * 2j) == 0
    assert (t - t).distance(CoherentOperator.zero(sys)) == 0
    for result in (s @ t, s + t, t.H, 3 * t):
        assert is_coherent(result)


def test_incompatible_systems():
    rng = np.random.default_rng(12)
    a = random_coherent(rng, random_representing_system(rng).system)
    b = random_coherent(rng, random_representing_system(rng).system)
    with pytest.raises(IncompatibleSystems):
        compose(a, b)
    with pytest.raises(IncompatibleSystems):
        a + b


def test_seminorms():
    h = build_inoue_space(chain_order([0]), {0: 2})
    assert seminorm(CoherentOperator.identity(h), 0) == 1
    assert seminorm(CoherentOperator(h, {0: np.diag([3, -4j])}), 0) == pytest.approx(4)
    with pytest.raises(KeyError):
        seminorm(CoherentOperator.identity(h), 7)
    rng = np.random.default_rng(13)
    for _ in range(20):
        sys = random_representing_system(rng).system
        s, t = random_coherent(rng, sys), random_coherent(rng, sys)
        for nu in sys.index:
            q = seminorm(t, nu)
            assert seminorm(t.H @ t, nu) == pytest.approx(q * q, rel=1e-12, abs=1e-12)
            assert seminorm(t.H, nu) == pytest.approx(q, rel=1e-12, abs=1e-12)
            assert seminorm(s @ t, nu) <= seminorm(s, nu) * q * (1 + 1e-12) + 1e-12


def test_classify():
    h = build_inoue_space(chain_order([0]), {0: 2})
    proj = classify(CoherentOperator(h, {0: np.diag([1.0, 0.0])}))
    assert {"projection", "selfadjoint", "positive", "normal"} <= proj.flags()
    assert "unitary" not in proj.flags()
    rot = classify(CoherentOperator(h, {0: np.diag([1j, -1j])}))
    assert rot.normal and not rot.selfadjoint and rot.unitary
    tri = classify(CoherentOperator(h, {0: np.array([[1.0, 2.0], [0.0, 3.0]])}))
    assert not tri.normal and tri.residuals["normal"] > 1


def test_spectrum_examples():
    h = chain12()
    sp = spectrum(validate_coherent({1: np.array([[1.0]]), 2: np.diag([1.0, 2.0])}, h))
    assert sorted(p.real for p in sp.points) == [1.0, 2.0]
    assert sp.nodes[1] == (1, 2) and sp.nodes[2] == (2,)
    assert spectrum(CoherentOperator.identity(h)).points == (1,)
    rng = np.random.default_rng(14)
    for _ in range(20):
        sys = random_representing_system(rng).system
        op = random_coherent(rng, sys, "normal")
        sp = spectrum(op)
        for lam in sys.index:
            for v in np.linalg.eigvals(op[lam]) if op[lam].size else []:
                assert sp.contains(v)
        for p in sp.points:
            assert any(np.min(np.abs(np.linalg.eigvals(op[lam]) - p)) <= 1e-8
                       for lam in sys.index if op[lam].size)


def test_resolvent_probe():
    rng = np.random.default_rng(15)
    sys = random_representing_system(rng).system
    op = random_coherent(rng, sys, "normal")
    sp = spectrum(op)
    probes = 0
    while probes < 20:
        z = complex(*rng.uniform(-3, 3, 2))
        if sp.distance(z) <= 1e-3:
            continue
        probes += 1
        assert all(math.isfinite(v) for v in resolvent_norms(op, z).values())
    for p in sp.points:
        assert any(math.isinf(v) or v > 1e8 for v in resolvent_norms(op, p).values())


def atomic_l2():
    sys = InductiveMeasureSystem(chain_order([0, 1]), {0: atomic_node({"a": 1.0}),
                                                       1: atomic_node({"a": 1.0, "b": 1.0})})
    return discretize_system(sys)


def test_multiplication_operators():
    l2 = atomic_l2()
    one = multiplication_operator(LocFunction(lambda loc: 1.0), l2)
    assert one.distance(CoherentOperator.identity(l2.hilbert)) == 0
    m = multiplication_operator(LocFunction(values={"a": 2, "b": 3}), l2)
    assert np.array_equal(m[1], np.diag([2, 3]))
    assert is_coherent(m)
    with pytest.raises(DomainError):
        multiplication_operator(LocFunction(values={"a": 2}), l2)
    hata = discretize_system(build_inductive_system("linear", IfsParams(), 0).system, 2)
    m = multiplication_operator(LocFunction(lambda z: z.real), hata)
    mids = sorted(np.diag(m[0]).real)
    c = IfsParams().c
    assert np.allclose(mids, sorted([0.25, 0.75, 0.25 * c.real, 0.75 * c.real]), atol=1e-15)


def test_star_morphism():
    rng = np.random.default_rng(16)
    l2 = discretize_system(build_inductive_system("branch-indexed", IfsParams(), 1).system, 2)
    keys = l2.hilbert.coordinates[l2.hilbert.top]
    f = LocFunction(values={k: complex(*rng.standard_normal(2)) for k in keys})
    g = LocFunction(values={k: complex(*rng.standard_normal(2)) for k in keys})
    mf, mg = multiplication_operator(f, l2), multiplication_operator(g, l2)
    # equal up to the last-ulp rounding of complex products
    assert multiplication_operator(f * g, l2).distance(mf @ mg) <= 1e-15
    assert multiplication_operator(f + g, l2).distance(mf + mg) == 0
    assert multiplication_operator(f.conj(), l2).distance(mf.H) == 0
    assert multiplication_operator(f.compose(abs), l2).distance(
        CoherentOperator(l2.hilbert, {k: np.abs(v) for k, v in mf.blocks.items()})) <= 1e-15


def test_essential_range():
    l2 = atomic_l2()
    assert essential_range(LocFunction(lambda loc: 4 - 1j), l2).points == (4 - 1j,)
    null = InductiveMeasureSystem(chain_order([0]), {0: atomic_node({"z": 0.0, "p": 1.0}, allow_null=True)})
    er = essential_range(LocFunction(values={"z": 5, "p": 2}), discretize_system(null))
    assert er.points == (2,)
    rng = np.random.default_rng(17)
    for _ in range(20):
        n = int(rng.integers(1, 8))
        atoms = {f"a{i}": float(rng.uniform(0.1, 2)) for i in range(n)}
        sys = discretize_system(InductiveMeasureSystem(chain_order([0]), {0: atomic_node(atoms)}))
        vals = {k: complex(int(rng.integers(0, 3)), int(rng.integers(0, 3))) for k in atoms}
        phi = LocFunction(values=vals)
        assert essential_range(phi, sys).same_as(spectrum(multiplication_operator(phi, sys)))


def test_fuglede_putnam():
    h = build_inoue_space(chain_order([0, 1]), {0: 1, 1: 1})
    n = CoherentOperator(h, {0: np.array([[1j]]), 1: np.diag([1j, 2.0])})
    rep = fuglede_putnam_check(n, n, CoherentOperator.identity(h))
    assert rep.ok and rep.details["max"] == 0
    d = CoherentOperator(h, {0: np.array([[1.0]]), 1: np.diag([1.0, 2.0])})
    b = CoherentOperator(h, {0: np.array([[7.0]]), 1: np.diag([7.0, -3.0])})
    assert fuglede_putnam_check(d, d, b).ok
    rng = np.random.default_rng(18)
    for _ in range(100):
        tri = random_fuglede_triple(rng)
        assert fuglede_putnam_check(tri.n, tri.m, tri.b).ok


def test_fuglede_putnam_preconditions():
    h = build_inoue_space(chain_order([0, 1]), {0: 1, 1: 1})
    d = CoherentOperator(h, {0: np.array([[1.0]]), 1: np.diag([1.0, 2.0])})
    b = CoherentOperator(h, {0: np.array([[1.0]]), 1: np.eye(2)})
    e = CoherentOperator(h, {0: np.array([[1.0]]), 1: np.diag([1.0, 3.0])})
    with pytest.raises(PreconditionError) as exc:
        fuglede_putnam_check(d, e, b)
    assert exc.value.violation.witness == (1,)
    assert exc.value.violation.residual == pytest.approx(1.0)
    other = build_inoue_space(chain_order([0, 1]), {0: 1, 1: 1})
    with pytest.raises(IncompatibleSystems):
        fuglede_putnam_check(d, CoherentOperator.identity(other), b)


def test_fuglede_putnam_rejects_non_normal():
    h = build_inoue_space(chain_order([0]), {0: 2})
    jordan = CoherentOperator(h, {0: np.array([[0.0, 1.0], [0.0, 0.0]])})
    with pytest.raises(PreconditionError):
        fuglede_putnam_check(jordan, jordan, CoherentOperator.identity(h))
