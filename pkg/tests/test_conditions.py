import itertools
import math
import random
from fractions import Fraction

import pytest

from expthresh.cliques import CliqueParams, build_clique_instance
from expthresh.conditions import (
    OverlapLaw,
    build_explicit_cover,
    check_thm_one,
    check_thm_one_pointwise,
    check_thm_two,
    exact_sum_overlap_law,
    explicit_cover_weights,
    g1_weight_bound,
    pair_overlap_law,
    sum_overlap_law,
)
from expthresh.core import Instance, TooLarge, covers, mask_of, solve_p
from expthresh.report import Verdict

from conftest import brute_upset, to_sets

TWO_E = 2 * math.e


def brute_pair_counts(inst):
    counts = {}
    for a, b in itertools.product(inst.edges, repeat=2):
        y = bin(a & b).count("1")
        counts[y] = counts.get(y, 0) + 1
    return {y: Fraction(c, inst.d**2) for y, c in counts.items()}


# -- overlap laws ----------------------------------------------------------


def test_pair_law_instance_a(instance_a):
    law = pair_overlap_law(instance_a)
    assert law.probs == {0: Fraction(1, 4), 1: Fraction(1, 2), 2: Fraction(1, 4)}
    assert law.probs == brute_pair_counts(instance_a)
    assert law.total() == 1


def test_pair_law_single_edge():
    law = pair_overlap_law(Instance.from_lists(5, 3, [[0, 2, 4]], 1))
    assert law.probs == {3: 1}


def test_pair_law_instance_b(instance_b):
    law = pair_overlap_law(instance_b)
    assert law.probs == {0: Fraction(3, 10), 1: Fraction(3, 5), 3: Fraction(1, 10)}
    assert law.probs == brute_pair_counts(instance_b)


def test_pair_law_random_instances_match_brute_force():
    rng = random.Random(3)
    for _ in range(30):
        n, k = rng.randint(3, 9), rng.randint(1, 3)
        pool = list(itertools.combinations(range(n), k))
        edges = rng.sample(pool, rng.randint(1, min(len(pool), 12)))
        inst = Instance.from_lists(n, k, edges, 1)
        law = pair_overlap_law(inst)
        assert law.probs == brute_pair_counts(inst)
        assert all(pr >= 0 for pr in law.probs.values()) and law.total() == 1
        assert min(law.support) >= 0 and max(law.support) <= k


def test_pair_law_too_large():
    n, k = 24, 4
    edges = list(itertools.combinations(range(n), k))[:10001]
    with pytest.raises(TooLarge):
        pair_overlap_law(Instance.from_lists(n, k, edges, 1))


def test_sum_law_s1_point_mass(instance_b):
    assert sum_overlap_law(instance_b, 1, 500, seed=1).probs == {0: 1.0}
    assert exact_sum_overlap_law(instance_b, 1).probs == {0: 1}


def test_exact_sum_law_s2_is_pair_law(instance_a, instance_b):
    for inst in (instance_a, instance_b):
        assert exact_sum_overlap_law(inst, 2).probs == pair_overlap_law(inst).probs
    assert exact_sum_overlap_law(instance_a, 2).prob(2) == Fraction(1, 4)


def test_exact_sum_law_s3_brute_force(instance_a):
    counts = {}
    for draw in itertools.product(instance_a.edges, repeat=3):
        seen, total = 0, 0
        for e in draw:
            total += bin(e & seen).count("1")
            seen |= e
        counts[total] = counts.get(total, 0) + 1
    law = exact_sum_overlap_law(instance_a, 3)
    assert law.probs == {m: Fraction(c, 64) for m, c in counts.items()}
    assert max(law.support) <= 2 * instance_a.k


def test_sum_law_empirical(instance_a, instance_b):
    law = sum_overlap_law(instance_a, 2, 20000, seed=4)
    assert law.kind == "empirical" and law.trials == 20000
    assert abs(law.prob(2) - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / 20000)
    assert abs(float(law.total()) - 1) <= 1 / math.sqrt(20000)
    assert law.tv_distance(pair_overlap_law(instance_a)) <= 0.02
    assert sum_overlap_law(instance_b, 3, 100, seed=9) == sum_overlap_law(instance_b, 3, 100, seed=9)


def test_empirical_band_smoothing():
    law = OverlapLaw.empirical({0: 100}, 100)
    assert law.prob(1) == 0 and law.stderr(1) > 0
    lo, hi = law.band(1)
    assert lo == 0.0 and hi > 0


# -- pair-overlap condition ------------------------------------------------


def test_pair_condition_instance_b_threshold(instance_b):
    law = pair_overlap_law(instance_b)
    rep = check_thm_two(instance_b, law, 1.7)
    y1 = rep.point_named("pair overlap", 1)
    expected = 0.6 * 2 ** (5 / 3) * 10 ** (1 / 3)
    assert float(y1.lhs) == pytest.approx(expected)
    assert float(y1.lhs) == pytest.approx(4.104, abs=1e-3)
    assert rep.point_named("pair overlap", 2).lhs.sign == 0
    crit = expected ** (1 / 3)
    assert crit == pytest.approx(1.601, abs=1e-3)
    assert check_thm_two(instance_b, law, crit * 1.0001).passed
    assert check_thm_two(instance_b, law, crit * 0.9999).verdict is Verdict.FAIL
    assert check_thm_two(instance_b, law, 2.0).passed


def test_pair_condition_no_mass():
    law = OverlapLaw({0: Fraction(1, 2), 3: Fraction(1, 2)})
    inst = Instance.from_lists(6, 3, [[0, 1, 2], [3, 4, 5]], 1)
    assert check_thm_two(inst, law, 1.0001).passed


def test_pair_condition_instance_a(instance_a):
    rep = check_thm_two(instance_a, pair_overlap_law(instance_a), TWO_E)
    y1 = rep.point_named("pair overlap", 1)
    assert float(y1.lhs) == pytest.approx(0.5 * 2**1.5 * 2)
    assert float(y1.rhs) == pytest.approx(TWO_E**2)
    assert rep.passed
    assert [p.index for p in rep.points] == [1]


def test_pair_condition_metadata_only():
    law = OverlapLaw({0: Fraction(9, 10), 1: Fraction(1, 10)})
    rep = check_thm_two(None, law, 3.0, r=10**6, d=10**9, k=4)
    assert len(rep.points) == 3
    y1 = rep.point_named("pair overlap", 1)
    assert y1.lhs.ln() == pytest.approx(math.log(0.1) + 1.75 * math.log(1e6) + 0.25 * math.log(1e9))


# -- explicit cover --------------------------------------------------------


def test_explicit_cover_instance_a(instance_a):
    g0, g1 = build_explicit_cover(instance_a)
    assert to_sets(g0) == {frozenset(s) for s in ([0, 1, 2], [1, 2, 3], [2, 3, 0], [3, 0, 1])}
    assert to_sets(g1) == {frozenset(range(4))}
    family = list(g0 | g1)
    for S in brute_upset(instance_a):
        mask = mask_of(S)
        assert any(g & ~mask == 0 for g in family)


def test_explicit_cover_disjoint_edges():
    inst = Instance.from_lists(6, 2, [[0, 1], [2, 3], [4, 5]], 2)
    g0, g1 = build_explicit_cover(inst)
    assert len(g0) == 0 and len(g1) == 3
    weights = explicit_cover_weights(inst, TWO_E)
    assert weights.w0.sign == 0


def test_explicit_cover_instance_b(instance_b):
    g0, g1 = build_explicit_cover(instance_b)
    # triangles sharing one vertex have no vertex pair in common
    triangles = [frozenset(T) for T in itertools.combinations(range(5), 3)]
    pairs = itertools.combinations(triangles, 2)
    disjoint = {
        frozenset(_pair_indices(a)) | frozenset(_pair_indices(b))
        for a, b in pairs
        if len(a & b) == 1
    }
    assert len(disjoint) == 15
    assert to_sets(g1) == disjoint
    assert covers(g0 | g1, instance_b)


def _pair_indices(vertices):
    # colex rank of 2-subsets {a < b} is C(b, 2) + a
    return [math.comb(b, 2) + a for a, b in itertools.combinations(sorted(vertices), 2)]


def test_explicit_cover_needs_integer_r():
    inst = Instance.from_lists(4, 2, [[0, 1], [2, 3]], Fraction(3, 2))
    with pytest.raises(ValueError):
        build_explicit_cover(inst)


def test_explicit_cover_weights_instance_a(instance_a):
    w = explicit_cover_weights(instance_a, TWO_E)
    q = math.sqrt(0.5) / TWO_E
    assert float(w.w0) == pytest.approx(4 * q**3)
    assert float(w.w0) == pytest.approx(0.0088, abs=1e-4)
    assert float(w.w1) == pytest.approx(q**4)
    assert float(w.w1) == pytest.approx(0.000286, abs=1e-6)
    assert float(w.total) <= 1 and w.w0_ok and w.w1_ok
    exact = explicit_cover_weights(instance_a, TWO_E, exact=True)
    assert isinstance(exact.w0, Fraction) and isinstance(exact.w1, Fraction)
    assert exact.w0 >= Fraction(4 * q**3) * (1 - Fraction(1, 10**9))
    assert exact.w0 <= Fraction(1, 2) and exact.w1 <= Fraction(1, 2)


@pytest.mark.parametrize("d,k", [(1, 2), (3, 2), (10, 3), (50, 5)])
def test_g1_bound_at_r_equals_d(d, k):
    bound = g1_weight_bound(d, d, k, TWO_E)
    assert bound.ln() == pytest.approx(d - d * k * math.log(TWO_E))
    assert bound <= Fraction(1, 2)


def test_explicit_cover_completeness_exhaustive():
    rng = random.Random(12)
    for _ in range(60):
        n = rng.randint(3, 10)
        k = rng.randint(1, min(3, n - 1))
        pool = list(itertools.combinations(range(n), k))
        edges = rng.sample(pool, rng.randint(1, min(len(pool), 8)))
        r = rng.randint(1, min(len(edges), 3))
        inst = Instance.from_lists(n, k, edges, r)
        g0, g1 = build_explicit_cover(inst)
        family = list(g0 | g1)
        for S in brute_upset(inst):
            mask = mask_of(S)
            assert any(g & ~mask == 0 for g in family), (n, k, edges, r, S)


# -- overlap-sum condition -------------------------------------------------


def test_sum_condition_s1_vacuous(instance_b):
    rep = check_thm_one(instance_b, exact_sum_overlap_law(instance_b, 1), 1, 16.0)
    assert rep.passed
    assert all(p.informational for p in rep.points)


def test_sum_condition_instance_b(instance_b):
    rep = check_thm_one(instance_b, pair_overlap_law(instance_b), 2, 16.0)
    m1 = rep.point_named("overlap sum", 1)
    assert float(m1.lhs) == pytest.approx(0.6 * (10 * math.e**3 / 2) ** (1 / 3))
    assert float(m1.lhs) == pytest.approx(2.79, abs=0.01)
    assert float(m1.rhs) == pytest.approx((16 / TWO_E) ** 2)
    assert m1.verdict is Verdict.PASS
    assert rep.point_named("overlap sum", 2).lhs.sign == 0
    # P(Y2 = 3) (10 e^3 / 2) = 0.1 * 100.4 > 1 = rhs at m = 3
    assert rep.point_named("overlap sum", 3).verdict is Verdict.FAIL
    assert rep.point_named("overlap sum", 0).informational


def test_sum_condition_adversarial():
    inst = Instance.from_lists(12, 2, [[i, i + 1] for i in range(11)], 1)
    s = 3
    law = OverlapLaw({(s - 1) * inst.k: Fraction(1)})
    rep = check_thm_one(inst, law, s, 100.0)
    top = rep.point_named("overlap sum", (s - 1) * inst.k)
    assert float(top.rhs) == pytest.approx(1.0)
    assert top.verdict is Verdict.FAIL and rep.verdict is Verdict.FAIL


def test_sum_condition_warnings(instance_a):
    rep = check_thm_one(instance_a, pair_overlap_law(instance_a), 2, 3.0, t=1)
    text = " ".join(rep.warnings)
    assert "L >= 2e" in text and "t >= p^(-sk) n" in text


def test_sum_condition_empirical_inconclusive(instance_b):
    # at L chosen so that m=1 sits right at its rhs, a small sample cannot decide
    base = math.log(10) + 3 - math.log(2)
    crit = TWO_E * math.exp((math.log(0.6) + base / 3) / 2)
    law = sum_overlap_law(instance_b, 2, 200, seed=2)
    rep = check_thm_one(instance_b, law, 2, crit)
    assert rep.point_named("overlap sum", 1).verdict is Verdict.INCONCLUSIVE


# -- pointwise strengthening -----------------------------------------------


def test_pointwise_zero_tail(instance_b):
    for L in (4 * math.e, 20.0, 1e6):
        assert check_thm_one_pointwise(lambda y: 0, instance_b, L).passed


def test_pointwise_redraw_tail(instance_b):
    rep = check_thm_one_pointwise(lambda y: Fraction(2, 10) if y == 3 else 1, instance_b, 4 * math.e)
    top = rep.point_named("conditional tail", 3)
    assert float(top.lhs) == pytest.approx(0.2 * 10 * (2 * math.e) ** 3 / 2)
    assert float(top.rhs) == pytest.approx(1.0)
    assert top.verdict is Verdict.FAIL


def _pair_tail(law):
    def tail(y):
        return sum((pr for v, pr in law.probs.items() if v >= y), Fraction(0))

    return tail


def test_pointwise_clique_r_equals_d():
    inst = build_clique_instance(CliqueParams(11, 3, 2), 165)
    law = pair_overlap_law(inst)
    assert check_thm_one_pointwise(_pair_tail(law), inst, 4 * math.e).passed
    assert check_thm_one(inst, law, 2, 4 * math.e).passed


def test_pointwise_implies_sum_condition():
    # s = 2: the exact pair-law tail is a history-uniform conditional tail
    rng = random.Random(5)
    exercised = 0
    for case in range(60):
        n = rng.randint(20, 40)
        pool = list(itertools.combinations(range(n), 2))
        edges = rng.sample(pool, rng.randint(30, 150))
        inst = Instance.from_lists(n, 2, edges, rng.randint(30, len(edges)))
        L = math.exp(rng.uniform(math.log(4 * math.e), 8))
        exact = pair_overlap_law(inst)
        if not check_thm_one_pointwise(_pair_tail(exact), inst, L).passed:
            continue
        exercised += 1
        assert check_thm_one(inst, exact, 2, L).passed
        empirical = sum_overlap_law(inst, 2, 5000, seed=case)
        assert check_thm_one(inst, empirical, 2, L).verdict is not Verdict.FAIL
    assert exercised >= 30
