"""Inductive systems of measure spaces, limit and extended measures, L2 carriers."""

import math

import numpy as np
import pytest

from loch.errors import (ClassificationError, DegenerateCarrier, MalformedInput, PreconditionError,
                         ValidationError)
from loch.geometry import Segment
from loch.hata import BranchFamily, IfsParams, branch_measure, build_inductive_system, words
from loch.hilbert import check_representing, hilbert_system_report
from loch.measure import (Atoms, Carrier, Empty, Everything, InductiveMeasureSystem, Pieces, Region,
                          atomic_node, check_local_sigma_additivity, discretize_l2, discretize_system,
                          extended_measure, extended_measure_table, is_in_omega_tilde, limit_measure,
                          node_measure, segment_node, system_report, tail_growth_ratio, validate_system)
from loch.order import chain_order, check_directed

P = IfsParams()


def two_atoms(wa_small=1.0, wa_big=1.0):
    ix = chain_order(["s", "b"])
    return InductiveMeasureSystem(ix, {"s": atomic_node({"a": wa_small}),
                                       "b": atomic_node({"a": wa_big, "b": 2.0})})


def test_validate_atomic_pair():
    assert validate_system(two_atoms()) is not None
    rep = system_report(two_atoms(1.0, 1.5))
    assert not rep.ok and rep.violation.tag == "sim3" and rep.violation.witness == ("s", "b", "a")
    with pytest.raises(ValidationError):
        validate_system(two_atoms(1.0, 1.5))


def test_validate_inclusion_and_sigma_algebra():
    ix = chain_order(["s", "b"])
    bad = InductiveMeasureSystem(ix, {"s": atomic_node({"z": 1.0}), "b": atomic_node({"a": 1.0})})
    assert system_report(bad).violation.tag == "sim2"
    # tracing a coarse block onto one atom is fine
    coarse = InductiveMeasureSystem(ix, {"s": atomic_node({"a": 1.0}),
                                         "b": atomic_node({"a": 1.0, "b": 1.0}, blocks=[["a", "b"]])})
    assert system_report(coarse).ok
    # the big node cannot separate a from b, the small one can
    finer = InductiveMeasureSystem(ix, {"s": atomic_node({"a": 1.0, "b": 1.0}),
                                        "b": atomic_node({"a": 1.0, "b": 1.0, "c": 1.0},
                                                         blocks=[["a", "b"], ["c"]])})
    assert system_report(finer).violation.tag == "sim2"
    negative = InductiveMeasureSystem(ix, {"s": atomic_node({"a": -1.0}), "b": atomic_node({"a": -1.0})})
    assert system_report(negative).violation.tag == "sim1"
    null_ok = InductiveMeasureSystem(ix, {"s": atomic_node({"a": 0.0}, allow_null=True),
                                          "b": atomic_node({"a": 0.0}, allow_null=True)})
    assert system_report(null_ok).ok


def test_witness_errors():
    ix = chain_order(["s", "b"])
    nodes = {"s": atomic_node({"x": 1.0, "y": 1.0}), "b": atomic_node({"a": 1.0, "b": 1.0})}
    sys = InductiveMeasureSystem(ix, nodes, witnesses={("s", "b"): {"x": "a", "y": "a"}})
    with pytest.raises(MalformedInput):
        system_report(sys)
    ok = InductiveMeasureSystem(ix, nodes, witnesses={("s", "b"): {"x": "b", "y": "a"}})
    assert system_report(ok).ok
    with pytest.raises(MalformedInput):
        InductiveMeasureSystem(ix, {"s": atomic_node({"a": 1.0})})


def test_overlapping_segments_rejected():
    ix = chain_order([0])
    node = segment_node([Segment(0, 1), Segment(0.5, 2)])
    assert system_report(InductiveMeasureSystem(ix, {0: node})).violation.tag == "sim1"


def test_hata_systems_validate():
    for variant in ("linear", "branch-indexed", "branch-union"):
        for depth in range(3):
            assert system_report(build_inductive_system(variant, P, depth).system).ok


def test_limit_measure_examples():
    sys = build_inductive_system("linear", P, 3).system
    assert limit_measure(sys, Carrier(0)) == pytest.approx(1.5, abs=1e-15)
    assert limit_measure(sys, Empty()) == 0
    a, b = Pieces({0: [(0, 0.5)]}), Pieces({1: [(0.25, 1)], 2: None})
    assert limit_measure(sys, a | b) == pytest.approx(limit_measure(sys, a) + limit_measure(sys, b), abs=1e-15)
    assert limit_measure(sys, a) == pytest.approx(0.5)


def test_limit_measure_requires_omega():
    sys = build_inductive_system("linear", P, 3).system
    with pytest.raises(ClassificationError):
        limit_measure(sys, Everything())


def test_classification():
    atomic = two_atoms()
    assert is_in_omega_tilde(atomic, Everything()).in_omega
    c = is_in_omega_tilde(atomic, Atoms(["a"]))
    assert c.in_omega and "a" in atomic.node_keys(c.node)
    assert is_in_omega_tilde(atomic, Atoms(["b"])).node == "b"
    chain = InductiveMeasureSystem(chain_order([0, 1]), {0: atomic_node({"a": 1.0}),
                                                         1: atomic_node({"a": 1.0, "b": 1.0})})
    assert is_in_omega_tilde(chain, Atoms(["a"])).node == 0

    hata = build_inductive_system("linear", P, 3).system
    assert is_in_omega_tilde(hata, Everything()).kind == "omega_tilde"
    every_level = BranchFamily(lambda k: [next(iter(words(k)))])
    assert is_in_omega_tilde(hata, every_level).kind == "omega_tilde"
    cut = BranchFamily(lambda k: [next(iter(words(k)))], levels=2)
    c = is_in_omega_tilde(hata, cut)
    assert c.in_omega and c.node == 2


def test_not_measurable():
    ix = chain_order(["s", "b"])
    sys = InductiveMeasureSystem(ix, {"s": atomic_node({"a": 1.0, "b": 1.0}, blocks=[["a", "b"]]),
                                      "b": atomic_node({"a": 1.0, "b": 1.0}, blocks=[["a", "b"]])})
    c = is_in_omega_tilde(sys, Atoms(["a"]))
    assert c.kind == "not_measurable"
    with pytest.raises(ClassificationError):
        extended_measure(sys, Atoms(["a"]))
    assert extended_measure(sys, Atoms(["a", "b"])) == 2.0


def test_extended_measure_examples():
    sys = build_inductive_system("branch-indexed", P, 2).system
    assert extended_measure(sys, Empty()) == 0
    for e in (Carrier((1, 1)), Pieces({0: [(0.1, 0.3)], 3: None}), Region([Segment(0, 0.5)])):
        assert extended_measure(sys, e) == pytest.approx(limit_measure(sys, e), abs=1e-15)
    assert extended_measure(sys, Region([Segment(0, 0.5)])) == pytest.approx(0.5)
    assert math.isinf(extended_measure(sys, Everything()))
    assert tail_growth_ratio(sys, Everything()) == pytest.approx(1.25, abs=1e-15)
    assert tail_growth_ratio(sys, Carrier((0, 0))) is None


def test_extended_measure_of_convergent_family():
    sys = build_inductive_system("linear", P, 3).system
    only_ones = BranchFamily(lambda k: [(1,) * k])
    value = extended_measure(sys, only_ones)
    # the k-th chosen branch has length |c|(1-|c|^2)|c|^k
    a = abs(P.c) * (1 - P.r2)
    assert value == pytest.approx(a / (1 - abs(P.c)), rel=1e-12)
    assert tail_growth_ratio(sys, only_ones) == pytest.approx(abs(P.c))


def test_no_tail_model():
    ix = chain_order([0])
    sys = InductiveMeasureSystem(ix, {0: segment_node([Segment(0, 1)])}, truncated=True)
    with pytest.raises(ClassificationError):
        extended_measure(sys, Everything())


def test_extended_measure_table_matches_generic_route():
    sys = build_inductive_system("branch-union", P, 2).system
    exprs = [Carrier(lam) for lam in sys.index] + [Pieces({0: [(0, 0.3)], 2: [(0.5, 1)]})]
    sup, top = extended_measure_table(sys, exprs)
    for e, s in zip(exprs, sup):
        assert s == pytest.approx(extended_measure(sys, e), abs=1e-15)
    with pytest.raises(ClassificationError):
        extended_measure_table(sys, [Everything()])


def test_monotone_and_trace_consistency():
    rng = np.random.default_rng(1)
    sys = build_inductive_system("branch-indexed", P, 2).system
    keys = list(sys.global_segments())
    for _ in range(50):
        big, small = {}, {}
        for k in rng.choice(keys, size=3, replace=False):
            a, b = np.sort(rng.uniform(0, 1, 2))
            big[int(k)] = [(a, b)]
            small[int(k)] = [tuple(np.sort(rng.uniform(a, b, 2)))]
        assert extended_measure(sys, Pieces(small)) <= extended_measure(sys, Pieces(big)) + 1e-15
        values = [node_measure(sys, lam, Pieces(big)) for lam in sys.index]
        for lam, nu in sys.index.comparable_pairs():
            i, j = sys.index.elements.index(lam), sys.index.elements.index(nu)
            assert values[i] <= values[j] + 1e-15


def test_sigma_additivity_atoms():
    sys = two_atoms()
    rep = check_local_sigma_additivity(sys, [Atoms(["a"]), Atoms(["b"])])
    assert rep.ok and rep.details["defect"] == 0
    with pytest.raises(PreconditionError) as exc:
        check_local_sigma_additivity(sys, [Atoms(["a"]), Atoms(["a", "b"])])
    assert exc.value.violation.witness == (0, 1)


def test_sigma_additivity_hata_branches():
    sys = build_inductive_system("linear", P, 2).system
    family = [Pieces([k]) for k in sys.global_segments()]
    assert len(family) == 5
    rep = check_local_sigma_additivity(sys, family)
    assert rep.ok
    assert rep.details["union"] == pytest.approx(branch_measure(build_inductive_system("linear", P, 2).branches),
                                                 rel=1e-12)


def test_sigma_additivity_random_partitions():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(1, 12))
        atoms = {f"a{i}": float(rng.uniform(0.01, 5)) for i in range(n)}
        sys = InductiveMeasureSystem(chain_order([0]), {0: atomic_node(atoms)})
        labels = rng.integers(0, 4, size=n)
        family = [Atoms([f"a{i}" for i in range(n) if labels[i] == g]) for g in range(4)]
        rep = check_local_sigma_additivity(sys, family)
        assert rep.ok
        assert rep.details["union"] == pytest.approx(math.fsum(atoms.values()), rel=1e-12)


def test_sigma_additivity_needs_one_node():
    ix = check_directed(["x", "y", "t"], [("x", "x"), ("y", "y"), ("t", "t"), ("x", "t"), ("y", "t")])
    sys = InductiveMeasureSystem(ix, {"x": atomic_node({"a": 1.0}), "y": atomic_node({"b": 1.0}),
                                      "t": atomic_node({"a": 1.0, "b": 1.0})})
    assert check_local_sigma_additivity(sys, [Atoms(["a"]), Atoms(["b"])]).details["node"] == "t"


def test_discretize_examples():
    car = discretize_l2(atomic_node({"a": 1.0, "b": 4.0}))
    assert car.dim == 2
    ind_b = car.coordinates([0.0, 1.0])
    assert np.vdot(ind_b, ind_b).real == pytest.approx(4.0)
    car = discretize_l2(segment_node([Segment(0, 1)]), 4)
    assert car.dim == 4 and np.allclose(car.weights, 0.25)
    assert np.allclose([p.location for p in car.points], [0.125, 0.375, 0.625, 0.875])
    with pytest.raises(DegenerateCarrier):
        discretize_l2(segment_node([Segment(0.3, 0.3)]), 2)
    with pytest.raises(MalformedInput):
        discretize_l2(segment_node([Segment(0, 1)]), 0)
    assert discretize_l2(atomic_node({"a": 0.0, "b": 1.0}, allow_null=True)).dim == 1


def test_hata_l2_embedding_isometric():
    sys = build_inductive_system("linear", P, 1).system
    l2 = discretize_system(sys, 2)
    assert l2.carriers[0].dim == 4 and l2.carriers[1].dim == 6
    j = l2.hilbert.J(1, 0)
    assert np.allclose(j.conj().T @ j, np.eye(4))
    w0, w1 = l2.carriers[0].weights, l2.carriers[1].weights
    # Gram matrices agree on the common part
    assert np.allclose(j.T @ np.diag(w1) @ j, np.diag(w0))


@pytest.mark.parametrize("variant", ["linear", "branch-indexed", "branch-union"])
def test_discretized_systems_are_representing(variant):
    sys = build_inductive_system(variant, P, 2).system
    l2 = discretize_system(sys, 3)
    assert hilbert_system_report(l2.hilbert).ok
    assert check_representing(l2.hilbert).ok
    h = l2.hilbert
    for lam, nu in h.index.comparable_pairs():
        for eta in h.index:
            if h.index.le(nu, eta):
                assert np.allclose(h.J(eta, nu) @ h.J(nu, lam), h.J(eta, lam))


def test_atomic_system_discretization():
    sys = two_atoms()
    l2 = discretize_system(sys)
    assert check_representing(l2.hilbert).ok
    assert l2.hilbert.dims == {"s": 1, "b": 2}
