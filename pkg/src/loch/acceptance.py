"""The twelve acceptance criteria as runnable checks.

Each criterion returns a :class:`CriterionResult`; a criterion passes when
every check holds at its stated tolerance and the run finishes inside its
time limit.  All randomness comes from one seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import sampling as S
from .hata import (IfsParams, apply_map, approximation_from_words, build_inductive_system,
                   check_connectivity, compose_word, enumerate_branches, generate_approximation,
                   inclusion_defect, same_segment_multiset)
from .hilbert import InductiveHilbertSystem, build_inoue_space, check_representing
from .linalg import spectral_norm
from .measure import (Carrier, Everything, InductiveMeasureSystem, Pieces, atomic_node,
                      discretize_system, extended_measure, extended_measure_table, limit_measure,
                      tail_growth_ratio)
from .operator import (LocFunction, classify, coherence_verdicts, fuglede_putnam_check,
                       multiplication_operator, resolvent_norms, seminorm, spectrum)
from .order import DirectedSet, chain_order, check_directed
from .spectral import (borel_calculus, check_functional_model, check_measure_laws,
                       check_multiplicity_model, commutant_check, functional_model, integrate,
                       spectral_measure)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    limit: float

    @property
    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"[{verdict}] criterion {self.number:2d} {self.name}: {self.detail} "
                f"({self.seconds:.2f}s / limit {self.limit:g}s)")


def _rng(seed: int, number: int) -> np.random.Generator:
    return np.random.default_rng([seed, number])


# --------------------------------------------------------------------------
# 1-3: the Hata approximations


def crit_branch_counts(seed: int):
    p = IfsParams()
    counts = [len(enumerate_branches(p, n)) for n in range(13)]
    first = counts[:6] == [2, 3, 5, 9, 17, 33]
    rule = all(c == 2 ** n + 1 for n, c in enumerate(counts))
    return first and rule, f"counts n=0..12 {counts}"


def closed_forms(c: complex) -> dict:
    """Closed forms of ``f_w`` for ``|w| = 2, 3`` (``w`` applied right to left)."""
    r = abs(c) ** 2
    cb = c.conjugate()
    return {
        "11": lambda z: r * z,
        "22": lambda z: (1 - r) ** 2 * z + r * (2 - r),
        "12": lambda z: c * (1 - r) * z + c * r,
        "21": lambda z: (1 - r) * cb * z + r,
        "111": lambda z: c * r * z.conjugate(),
        "122": lambda z: c * (1 - r) ** 2 * z.conjugate() + c * r * (2 - r),
        "112": lambda z: r * (1 - r) * z.conjugate() + r * r,
        "121": lambda z: c * c * (1 - r) * z.conjugate() + c * r,
        "222": lambda z: (1 - r) ** 3 * z.conjugate() + r * (3 - 3 * r + r * r),
        "211": lambda z: r * (1 - r) * z.conjugate() + r,
        "212": lambda z: cb * (1 - r) ** 2 * z.conjugate() + (1 - r) * cb * r + r,
        "221": lambda z: (1 - r) ** 2 * c * z.conjugate() + r * (2 - r),
    }


def crit_recursion(seed: int):
    p = IfsParams()
    rng = _rng(seed, 2)
    worst_incl, ok_f, ok_words = 0.0, True, True
    approx = generate_approximation(p, 0)
    for n in range(11):
        nxt = generate_approximation(p, n + 1)
        image = (np.concatenate([apply_map(1, approx.starts, p), apply_map(2, approx.starts, p)]),
                 np.concatenate([apply_map(1, approx.ends, p), apply_map(2, approx.ends, p)]))
        ok_f &= same_segment_multiset(image, (nxt.starts, nxt.ends), 1e-12)
        worst_incl = max(worst_incl, inclusion_defect(approx, nxt))
        if n <= 8:
            ok_words &= same_segment_multiset(approximation_from_words(p, n), (approx.starts, approx.ends))
        approx = nxt
    zs = rng.uniform(-1.5, 1.5, 100) + 1j * rng.uniform(-1.5, 1.5, 100)
    worst_form = max(abs(compose_word(w, complex(z), p) - f(complex(z)))
                     for w, f in closed_forms(p.c).items() for z in zs)
    ok = ok_f and ok_words and worst_incl <= 1e-12 and worst_form <= 1e-14
    return ok, (f"F(X_n)=X_n+1 {ok_f}, word union {ok_words}, inclusion defect {worst_incl:.1e}, "
                f"closed-form defect {worst_form:.1e}")


def crit_connectivity(seed: int):
    p = IfsParams()
    ok, worst = True, 0.0
    for n in range(11):
        rep = check_connectivity(generate_approximation(p, n))
        ok &= rep.ok
        if n >= 1:
            ok &= rep.details["junction"] == p.r2
            worst = max(worst, rep.details["junction_defect"])
    return ok and worst <= 1e-12, f"connected n=0..10 {ok}, junction |c|^2={p.r2:.4g} defect {worst:.1e}"


# --------------------------------------------------------------------------
# 4: measure limits


def crit_measure_limits(seed: int):
    rng = _rng(seed, 4)
    p = IfsParams()
    worst, sets = 0.0, 0
    monotone_fail = 0
    systems = {}
    for variant in ("linear", "branch-indexed", "branch-union"):
        for depth in range(5):
            hs = build_inductive_system(variant, p, depth)
            sys = hs.system
            systems[(variant, depth)] = sys
            exprs = [Carrier(lam) for lam in sys.index]
            keys = list(sys.global_segments())
            for _ in range(20):
                pick = rng.choice(keys, size=int(rng.integers(1, len(keys) + 1)), replace=False)
                parts = {}
                for k in pick:
                    a, b = np.sort(rng.uniform(0, 1, 2))
                    parts[int(k)] = [(float(a), float(b))]
                exprs.append(Pieces(parts))
            sup, top = extended_measure_table(sys, exprs)
            ref = np.array([sys.nodes[e.node].total() for e in exprs if isinstance(e, Carrier)]
                           + list(top[len(sys.index):]))
            worst = max(worst, float(np.max(np.abs(sup - ref) / (1 + ref))))
            sets += len(exprs)
            if len(sys.index) <= 200:  # generic route on the smaller systems
                for e in exprs[-5:] + exprs[:5]:
                    worst = max(worst, abs(extended_measure(sys, e) - limit_measure(sys, e)))
    # monotonicity on random nested pairs
    sys = systems[("branch-indexed", 3)]
    keys = list(sys.global_segments())
    for _ in range(200):
        big_keys = rng.choice(keys, size=int(rng.integers(1, len(keys) + 1)), replace=False)
        big, small = {}, {}
        for k in big_keys:
            a, b = np.sort(rng.uniform(0, 1, 2))
            big[int(k)] = [(float(a), float(b))]
            if rng.random() < 0.6:
                s, t = np.sort(rng.uniform(a, b, 2))
                small[int(k)] = [(float(s), float(t))]
        if extended_measure(sys, Pieces(small)) > extended_measure(sys, Pieces(big)) + 1e-12:
            monotone_fail += 1
    full = systems[("linear", 4)]
    total = extended_measure(full, Everything())
    ratio = tail_growth_ratio(full, Everything())
    ok = worst <= 1e-12 and monotone_fail == 0 and math.isinf(total) and abs(ratio - 1.25) <= 1e-12
    return ok, (f"{sets} sets, max |mu~ - mu| {worst:.1e}, monotone failures {monotone_fail}/200, "
                f"total length {total} with growth ratio {ratio:.15g}")


# --------------------------------------------------------------------------
# 5-8: operator nets


def crit_coherence(seed: int):
    rng = _rng(seed, 5)
    disagree = wrong = done = 0
    while done < 100:
        rs = S.random_representing_system(rng, max_nodes=6, max_dim=8)
        t = S.random_coherent(rng, rs.system)
        bad = S.mutate_incoherent(rng, t)
        if bad is None:
            continue
        done += 1
        good_v = coherence_verdicts(t.blocks, t.domain)
        bad_v = coherence_verdicts(bad.blocks, bad.domain)
        disagree += (not good_v.agree) + (not bad_v.agree)
        wrong += (not good_v.restriction.ok) + bad_v.restriction.ok
    return disagree == 0 and wrong == 0, (f"{done} coherent + {done} mutated nets, "
                                          f"disagreements {disagree}, misclassified {wrong}")


def crit_seminorms(seed: int):
    rng = _rng(seed, 6)
    worst = 0.0
    for _ in range(100):
        rs = S.random_representing_system(rng, max_nodes=6, max_dim=8)
        s_op, t_op = S.random_coherent(rng, rs.system), S.random_coherent(rng, rs.system)
        for lam in rs.system.index:
            qt, qs = seminorm(t_op, lam), seminorm(s_op, lam)
            scale = max(qt * qt, 1e-300)
            worst = max(worst, abs(seminorm(t_op.H @ t_op, lam) - qt * qt) / max(scale, 1.0),
                        abs(seminorm(t_op.H, lam) - qt) / max(qt, 1.0),
                        max(0.0, seminorm(s_op @ t_op, lam) - qs * qt) / max(qs * qt, 1.0))
    return worst <= 1e-9, f"100 nets, worst relative defect {worst:.1e}"


def _distinct(values, tol=1e-8):
    out = []
    for v in values:
        if all(abs(v - u) > tol for u in out):
            out.append(v)
    return out


def crit_spectrum(seed: int):
    rng = _rng(seed, 7)
    mismatch = singular_probe = missed = 0
    for _ in range(100):
        rs = S.random_representing_system(rng, max_nodes=6, max_dim=8)
        n_op = S.random_coherent(rng, rs.system, "normal")
        sp = spectrum(n_op)
        union = _distinct([complex(v) for lam in n_op.index for v in np.linalg.eigvals(n_op.blocks[lam])])
        if len(union) != len(sp) or not all(sp.contains(v) for v in union):
            mismatch += 1
        radius = max(abs(v) for v in sp.points) + 1.0
        probes = 0
        while probes < 20:
            z = complex(rng.uniform(-radius, radius), rng.uniform(-radius, radius))
            if sp.distance(z) <= 1e-3:
                continue
            probes += 1
            if not all(math.isfinite(r) for r in resolvent_norms(n_op, z).values()):
                singular_probe += 1
        for z in sp.points:
            if all(math.isfinite(r) for r in resolvent_norms(n_op, z).values()):
                missed += 1
    ok = mismatch == 0 and singular_probe == 0 and missed == 0
    return ok, (f"100 normal nets, union mismatches {mismatch}, singular off-spectrum probes "
                f"{singular_probe}/2000, spectrum points with all blocks invertible {missed}")


def crit_fuglede(seed: int):
    rng = _rng(seed, 8)
    worst, fails = 0.0, 0
    for _ in range(100):
        tr = S.random_fuglede_triple(rng)
        rep = fuglede_putnam_check(tr.n, tr.m, tr.b)
        worst = max(worst, rep.details["max"])
        fails += not rep.ok
    return fails == 0, f"100 triples, max ||N*B - BM*|| {worst:.1e}"


# --------------------------------------------------------------------------
# 9-11: spectral models


def crit_spectral_measure(seed: int):
    rng = _rng(seed, 9)
    law_fail = 0
    worst_id = worst_one = 0.0
    commutant_fail = 0
    for _ in range(50):
        rs = S.random_representing_system(rng, max_nodes=5, max_dim=8)
        n_op = S.random_coherent(rng, rs.system, "normal")
        e = spectral_measure(n_op)
        law_fail += not check_measure_laws(e, seed=int(rng.integers(1 << 30))).ok
        worst_id = max(worst_id, integrate(lambda z: z, e).distance(n_op))
        worst_one = max(worst_one, max(spectral_norm(b - np.eye(b.shape[0]))
                                       for b in integrate(1.0, e).blocks.values()))
        t_in = S.random_commuting(rng, n_op)
        rep_in = commutant_check(e, t_in)
        commutant_fail += not (rep_in.ok and rep_in.details["commutes_with_N"])
        t_out = S.random_coherent(rng, rs.system)
        rep_out = commutant_check(e, t_out)
        commutant_fail += not rep_out.ok
    # a hand-made non-commuting case: N = diag(1, 2), T swaps the coordinates
    ix = chain_order(["a"])
    hs = InductiveHilbertSystem.from_coordinates(ix, {"a": (0, 1)})
    from .operator import CoherentOperator
    n0 = CoherentOperator(hs, {"a": np.diag([1.0, 2.0])})
    swap = CoherentOperator(hs, {"a": np.array([[0.0, 1.0], [1.0, 0.0]])})
    rep = commutant_check(spectral_measure(n0), swap)
    commutant_fail += not (rep.ok and not rep.details["commutes_with_N"])
    ok = law_fail == 0 and worst_id <= 1e-10 and worst_one <= 1e-10 and commutant_fail == 0
    return ok, (f"50 nets, law failures {law_fail}, ||int z dE - N|| {worst_id:.1e}, "
                f"||int 1 dE - I|| {worst_one:.1e}, commutant failures {commutant_fail}")


def random_atomic_chain(rng: np.random.Generator, length: int = 3, max_atoms: int = 6):
    """Nested atomic measure spaces on a chain with random masses and a random function."""
    sizes = sorted(int(s) for s in rng.integers(1, max_atoms + 1, size=length))
    atoms = [f"x{i}" for i in range(sizes[-1])]
    mass = {a: float(rng.uniform(0.2, 3.0)) for a in atoms}
    ix = chain_order(list(range(length)))
    nodes = {m: atomic_node({a: mass[a] for a in atoms[:sizes[m]]}) for m in range(length)}
    pool = [complex(rng.standard_normal(), rng.standard_normal()) for _ in range(3)]
    values = {a: pool[int(rng.integers(3))] if rng.random() < 0.5
              else complex(rng.standard_normal(), rng.standard_normal()) for a in atoms}
    return InductiveMeasureSystem(ix, nodes), values


def crit_borel(seed: int):
    rng = _rng(seed, 10)
    worst = 0.0
    for _ in range(50):
        rs = S.random_representing_system(rng, max_nodes=5, max_dim=8)
        n_op = S.random_coherent(rng, rs.system, "normal")
        a = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        psi1 = lambda z, a=a: a[0] * z * z + a[1] * z.conjugate() + a[2]  # noqa: E731
        psi2 = lambda z, a=a: a[3] * z + a[4] * abs(z) + a[5]  # noqa: E731
        p1, p2 = borel_calculus(psi1, n_op), borel_calculus(psi2, n_op)
        worst = max(worst,
                    borel_calculus(lambda z: psi1(z) * psi2(z), n_op).distance(p1 @ p2),
                    borel_calculus(lambda z: psi1(z) + psi2(z), n_op).distance(p1 + p2),
                    borel_calculus(lambda z: psi1(z).conjugate(), n_op).distance(p1.H),
                    borel_calculus(lambda z: 1.0, n_op).distance(
                        type(n_op).identity(n_op.domain)))
        msys, values = random_atomic_chain(rng)
        l2 = discretize_system(msys)
        phi = LocFunction(values=values)
        m_phi = multiplication_operator(phi, l2)
        m_psi = multiplication_operator(phi.compose(psi1), l2)
        worst = max(worst, borel_calculus(psi1, m_phi).distance(m_psi))
    return worst <= 1e-10, f"50 cases, worst identity defect {worst:.1e}"


def crit_functional_model(seed: int):
    rng = _rng(seed, 11)
    worst_res = worst_uni = 0.0
    bookkeeping = sup_fail = spec_fail = model_fail = 0
    multi = 0
    for _ in range(50):
        hs, chain = S.random_inoue_system(rng, max_nodes=5, max_dim=10)
        n_op = S.random_coherent(rng, hs, "normal")
        fm = functional_model(n_op, chain)
        mm = fm.multiplicity
        rep = check_functional_model(fm)
        model_fail += not rep.ok or not check_multiplicity_model(mm).ok
        worst_res = max(worst_res, rep.details["residual"])
        worst_uni = max(worst_uni, rep.details["unitarity"])
        for lam in hs.index:
            bookkeeping += mm.dimension_count(lam) != hs.dims[lam]
            sup_fail += mm.sup_bounds()[lam] > spectral_norm(n_op.blocks[lam]) + 1e-9
        spec_fail += not spectrum(fm.multiplication()).same_as(spectrum(n_op))
        multi += any(p.multiplicity > 1 for p in mm.points)
    ok = (worst_res <= 1e-9 and worst_uni <= 1e-12 and bookkeeping == 0 and sup_fail == 0
          and spec_fail == 0 and model_fail == 0)
    return ok, (f"50 models ({multi} with multiplicity > 1), max ||V N V* - M_phi|| {worst_res:.1e}, "
                f"unitarity {worst_uni:.1e}, bookkeeping errors {bookkeeping}, sup-bound failures "
                f"{sup_fail}, spectrum mismatches {spec_fail}")


# --------------------------------------------------------------------------
# 12: representing certificates


def crit_representing(seed: int):
    rng = _rng(seed, 12)
    exact = True
    from .hata import branch_indexed_elements, branch_indexed_le
    indices = [DirectedSet.from_predicate(branch_indexed_elements(2), branch_indexed_le, top=(3, 0))]
    indices += [S.random_directed_set(rng, int(rng.integers(1, 7))) for _ in range(10)]
    for ix in indices:
        hs = build_inoue_space(ix, {a: int(rng.integers(0, 3)) for a in ix})
        top = hs.top
        for lam in ix:
            for nu in ix:
                p, q = hs.projection(lam, top), hs.projection(nu, top)
                exact &= np.array_equal(p @ q, q @ p)
    worst = 0.0
    l2_ok = True
    for variant in ("linear", "branch-indexed", "branch-union"):
        for depth in range(4):
            sys = build_inductive_system(variant, IfsParams(), depth).system
            rep = check_representing(discretize_system(sys, samples=2).hilbert, tol=1e-12)
            l2_ok &= rep.ok
            worst = max(worst, rep.details["max"])
    ds = check_directed(["a", "b", "t"], [("a", "a"), ("b", "b"), ("t", "t"), ("a", "t"), ("b", "t")])
    s = 1 / math.sqrt(2)
    bad = InductiveHilbertSystem(ds, {"a": 1, "b": 1, "t": 2},
                                 embeddings={("a", "t"): [[1.0], [0.0]], ("b", "t"): [[s], [s]]})
    rep = check_representing(bad)
    counter = (not rep.ok) and tuple(rep.violation.witness) == ("a", "b", "t") and \
        abs(rep.violation.residual - 0.5) < 1e-12
    ok = exact and l2_ok and counter
    return ok, (f"Inoue commutators exactly zero {exact}, discretized Hata systems max commutator "
                f"{worst:.1e}, counterexample witness {rep.violation.witness if rep.violation else None}")


CRITERIA: list[tuple[int, str, float, Callable]] = [
    (1, "Hata branch counts", 1.0, crit_branch_counts),
    (2, "Hata recursion fidelity", 10.0, crit_recursion),
    (3, "connectivity", 5.0, crit_connectivity),
    (4, "measure limits", 10.0, crit_measure_limits),
    (5, "coherence criterion equivalence", 20.0, crit_coherence),
    (6, "C*-seminorm laws", 10.0, crit_seminorms),
    (7, "spectrum union", 20.0, crit_spectrum),
    (8, "Fuglede-Putnam", 10.0, crit_fuglede),
    (9, "spectral measure laws", 30.0, crit_spectral_measure),
    (10, "Borel calculus", 10.0, crit_borel),
    (11, "functional model round-trip", 60.0, crit_functional_model),
    (12, "representing certificates", 5.0, crit_representing),
]


def run_criterion(number: int, seed: int = 42) -> CriterionResult:
    num, name, limit, fn = CRITERIA[number - 1]
    t0 = time.perf_counter()
    try:
        ok, detail = fn(seed)
    except Exception as exc:  # a crash is a failed criterion, reported as such
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    secs = time.perf_counter() - t0
    if secs > limit:
        detail += "; exceeded time limit"
    return CriterionResult(num, name, bool(ok) and secs <= limit, detail, secs, limit)


def run_suite(seed: int = 42) -> list[CriterionResult]:
    return [run_criterion(n, seed) for n in range(1, len(CRITERIA) + 1)]
