"""Property suite over the seeded 500-pair lottery corpus: implication
chains, expected-utility consistency, the bliss-point oracle for the
quadratic rule, screen soundness, and grid-refinement exactness."""

import numpy as np
import pytest

from mvlab.dominance import (
    EmpiricalDistribution,
    Order,
    Relation,
    ecdf,
    fsd_test,
    mvc_test,
    necessary_screen,
    quadratic_dominance_test,
    ssd_test,
    tsd_test,
)
from mvlab.utilities import expected_utility, table6_panel

EU_TOL = 1e-12


def _mapped_into_domains(lottery, lo, hi):
    """Affinely map supports into [-0.5, 0.5], inside every panel domain."""
    span = hi - lo
    if span == 0.0:
        return lottery.affine(1.0, -lo - 0.5)
    return lottery.affine(1.0 / span, -lo / span - 0.5)


def _refined(dist: EmpiricalDistribution) -> EmpiricalDistribution:
    """Insert interval midpoints as zero-mass support points."""
    mids = (dist.support[:-1] + dist.support[1:]) / 2.0
    support = np.sort(np.concatenate([dist.support, mids]))
    return EmpiricalDistribution(support, dist.at(support))


def test_implication_chain(lottery_corpus):
    violations = []
    for i, (first, second) in enumerate(lottery_corpus):
        f, g = ecdf(first), ecdf(second)
        chain = [fsd_test(f, g).relation, ssd_test(f, g).relation, tsd_test(f, g).relation]
        for lower, higher in zip(chain, chain[1:]):
            if lower is Relation.FIRST_DOMINATES and higher is not Relation.FIRST_DOMINATES:
                violations.append((i, chain))
            if lower is Relation.SECOND_DOMINATES and higher is not Relation.SECOND_DOMINATES:
                violations.append((i, chain))
            if lower is Relation.INDISTINGUISHABLE and higher is not Relation.INDISTINGUISHABLE:
                violations.append((i, chain))
    assert violations == []


def test_corpus_exercises_dominance_branches(lottery_corpus):
    relations = {ssd_test(ecdf(a), ecdf(b)).relation for a, b in lottery_corpus}
    assert Relation.FIRST_DOMINATES in relations
    assert Relation.NO_DOMINANCE in relations
    assert Relation.INDISTINGUISHABLE in relations


def test_ssd_implies_panel_agreement(lottery_corpus):
    panel = table6_panel()
    checked = 0
    for first, second in lottery_corpus:
        verdict = ssd_test(ecdf(first), ecdf(second))
        if verdict.relation is not Relation.FIRST_DOMINATES:
            continue
        lo = min(first.min_value(), second.min_value())
        hi = max(first.max_value(), second.max_value())
        mapped_f = _mapped_into_domains(first, lo, hi)
        mapped_g = _mapped_into_domains(second, lo, hi)
        checked += 1
        for spec in panel:
            assert expected_utility(mapped_f, spec) >= (
                expected_utility(mapped_g, spec) - EU_TOL
            ), f"{spec.identifier} disagrees with an SSD-dominant lottery"
    assert checked >= 50  # the corpus must actually exercise the property


def test_quadratic_rule_matches_bliss_utility_oracle(lottery_corpus):
    for first, second in lottery_corpus:
        f, g = ecdf(first), ecdf(second)
        verdict = quadratic_dominance_test(f, g)
        k = max(first.max_value(), second.max_value())

        def eu(lot):
            return float(np.sum(lot.probs * (2 * k * lot.values - lot.values**2)))

        delta = eu(first) - eu(second)
        dmean = first.mean() - second.mean()
        if verdict.relation is Relation.FIRST_DOMINATES:
            assert delta >= -1e-9 and dmean >= -EU_TOL
        elif verdict.relation is Relation.SECOND_DOMINATES:
            assert delta <= 1e-9 and dmean <= EU_TOL
        elif verdict.relation is Relation.NO_DOMINANCE:
            # one direction must genuinely fail: either sign conflict
            # between mean ordering and utility ordering
            f_ok = dmean >= -EU_TOL and delta >= -1e-9
            g_ok = dmean <= EU_TOL and delta <= 1e-9
            assert not (f_ok and abs(delta) > 1e-9) or not (g_ok and abs(delta) > 1e-9)


def test_screen_soundness(lottery_corpus):
    tests = {Order.FIRST: fsd_test, Order.SECOND: ssd_test, Order.THIRD: tsd_test}
    for first, second in lottery_corpus:
        f, g = ecdf(first), ecdf(second)
        for order, rule in tests.items():
            if necessary_screen(f, g, order):
                assert rule(f, g).relation is not Relation.FIRST_DOMINATES
            if necessary_screen(g, f, order):
                assert rule(f, g).relation is not Relation.SECOND_DOMINATES


def test_grid_refinement_does_not_change_verdicts(lottery_corpus):
    for first, second in lottery_corpus[:150]:
        f, g = ecdf(first), ecdf(second)
        rf, rg = _refined(f), _refined(g)
        for rule in (fsd_test, ssd_test, tsd_test, quadratic_dominance_test):
            base = rule(f, g)
            refined = rule(rf, rg)
            assert (base.relation, base.strict) == (refined.relation, refined.strict)


def test_mvc_consistency_with_weak_form(lottery_corpus):
    for first, second in lottery_corpus[:200]:
        m1, m2 = first.moment_summary(), second.moment_summary()
        verdict = mvc_test(m1, m2)
        if verdict.relation is Relation.FIRST_DOMINATES:
            assert m1.mean >= m2.mean and m1.std <= m2.std
            assert m1.mean > m2.mean or m1.std < m2.std
