from __future__ import annotations

import math

import numpy as np
import pytest

from mfspec import spectra as S
from mfspec.errors import ConditionQViolated, DepthMismatch, Infeasible
from mfspec.extended import NEG_INF
from mfspec.pressure import pressure, pressure_gradient
from mfspec.symbolic import LocallyConstantPotential as L, VectorPotential, markov_stats, validate_sft

FULL2 = validate_sft([[1, 1], [1, 1]])
GOLDEN = validate_sft([[1, 1], [1, 0]])
IND, ONE = L.indicator(FULL2, 1), L.constant(FULL2, 1.0)
GIND, GONE = L.indicator(GOLDEN, 1), L.constant(GOLDEN, 1.0)
PHI = (1 + math.sqrt(5)) / 2


def h2(p: float) -> float:
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def test_condition_q_passes_for_positive_denominator():
    assert S.check_condition_q(FULL2, IND, ONE).passed


def test_condition_q_negative_mean_witness():
    res = S.check_condition_q(FULL2, IND, L.symbol_values(FULL2, [-1.0, 1.0]))
    assert not res.passed and res.witness == ("0",)


def test_condition_q_zero_means():
    res = S.check_condition_q(FULL2, IND, L.indicator(FULL2, 1))
    assert not res.passed and res.witness == ("0",)
    with pytest.raises(ConditionQViolated):
        S.predicted(FULL2, IND, L.indicator(FULL2, 1), None, 0.5)


def test_domain_interval_and_cycles():
    dom = S.domain(GOLDEN, GIND, GONE)
    assert (dom.lower, dom.upper) == (0.0, 0.5)
    assert (dom.lower_cycle, dom.upper_cycle) == ("0", "01")
    assert dom.contains(0.3) and not dom.contains(0.6)


def test_domain_two_dimensional():
    v = VectorPotential.of([L.indicator(FULL2, 0), L.indicator(FULL2, 1)])
    dom = S.domain(FULL2, v, VectorPotential.constant(FULL2, 2, 1.0))
    assert dom.contains([0.3, 0.7]) and not dom.contains([0.3, 0.6])
    assert not dom.contains_unbounded_direction


def test_dichotomy():
    assert S.dichotomy(FULL2, IND, ONE, 2.0) is S.Dichotomy.NEG_INFINITY
    assert S.dichotomy(FULL2, IND, ONE, 0.5) is S.Dichotomy.NON_NEGATIVE
    assert S.dichotomy(FULL2, IND, ONE, 1.0) is S.Dichotomy.NON_NEGATIVE


@pytest.mark.parametrize("alpha", [0.1, 0.25, 0.5, 0.8])
def test_predicted_binary_entropy(alpha):
    pt = S.predicted(FULL2, IND, ONE, None, alpha)
    assert pt.status is S.Status.INTERIOR
    assert float(pt.value) == pytest.approx(h2(alpha), abs=1e-9)


def test_predicted_statuses():
    assert S.predicted(FULL2, IND, ONE, None, 1.5).value == NEG_INF
    edge = S.predicted(FULL2, IND, ONE, None, 0.0)
    assert edge.status is S.Status.BOUNDARY and float(edge.value) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(Exception):
        S.predicted(FULL2, IND, ONE, None, 0.0, strict=True)


def test_predicted_parry_point():
    pt = S.predicted(GOLDEN, GIND, GONE, None, 1 / (1 + PHI**2))
    assert float(pt.value) == pytest.approx(math.log(PHI), abs=1e-9)


def test_predicted_with_weight():
    pt = S.predicted(FULL2, IND, ONE, L.indicator(FULL2, 0), 0.25)
    assert float(pt.value) == pytest.approx(h2(0.25) + 0.75, abs=1e-9)


def test_predicted_two_dimensional():
    v = VectorPotential.of([L.indicator(FULL2, 0), L.indicator(FULL2, 1)])
    ones = VectorPotential.constant(FULL2, 2, 1.0)
    assert float(S.predicted(FULL2, v, ones, None, [0.3, 0.7]).value) == pytest.approx(h2(0.3), abs=1e-8)
    assert S.predicted(FULL2, v, ones, None, [0.3, 0.6]).status is S.Status.OUTSIDE


def test_minimizer_within_search_radius_and_stationary():
    pt = S.predicted(FULL2, IND, ONE, None, 0.25)
    q = float(pt.argmin_q[0])
    assert abs(q) <= math.log(2) / 0.25
    assert q == pytest.approx(-math.log(3), abs=1e-7)
    grad = pressure_gradient(FULL2, VectorPotential.of(IND - ONE * 0.25), None, [q])
    assert abs(grad[0]) <= 1e-9


def test_coarse_examples():
    assert float(S.coarse(FULL2, IND, ONE, None, 0.5, 0.05, 10)) == pytest.approx(math.log(252) / 10, abs=1e-12)
    assert float(S.coarse(FULL2, IND, ONE, None, 0.5, 2.0, 6)) == pytest.approx(math.log(2), abs=1e-12)
    assert S.coarse(FULL2, IND, ONE, None, 2.0, 0.1, 6) == NEG_INF


def test_coarse_box_is_open():
    # 3/10 sits exactly on the edge of (0.25, 0.3)
    val = S.coarse(FULL2, IND, ONE, None, 0.275, 0.025, 10)
    assert val == NEG_INF


def test_coarse_rejects_bad_arguments():
    with pytest.raises(ValueError):
        S.coarse(FULL2, IND, ONE, None, 0.5, 0.0, 4)
    with pytest.raises(ValueError):
        S.coarse(FULL2, IND, ONE, None, 0.5, 0.1, 0)


def test_cvp_matches_predicted():
    pt = S.conditional_variational(GOLDEN, GIND, GONE, None, 0.4)
    assert float(pt.value) == pytest.approx(float(S.predicted(GOLDEN, GIND, GONE, None, 0.4).value), abs=1e-6)


def test_cvp_measure_meets_constraint():
    mu, res = S.cvp_measure(FULL2, IND, ONE, None, 0.3)
    h, i = markov_stats(mu, IND)
    assert i == pytest.approx(0.3, abs=1e-8)
    assert h == pytest.approx(h2(0.3), abs=1e-8)


def test_cvp_infeasible():
    assert S.conditional_variational(FULL2, IND, ONE, None, 2.0).value == NEG_INF
    with pytest.raises(Infeasible):
        S.conditional_variational(FULL2, IND, ONE, None, 2.0, strict=True)


def test_cvp_order_must_carry_depth():
    pair = L.from_mapping(FULL2, 3, {f"{a}{b}{c}": float(a * b * c) for a in (0, 1) for b in (0, 1) for c in (0, 1)})
    with pytest.raises(DepthMismatch):
        S.conditional_variational(FULL2, pair, ONE, None, 0.1, order=1)


def test_spectrum_over_set_takes_supremum():
    best = S.spectrum_over_set(FULL2, IND, ONE, None, [0.1, 0.4, 0.45])
    assert float(best.alpha[0]) == 0.45
    with pytest.raises(ValueError):
        S.spectrum_over_set(FULL2, IND, ONE, None, [])


def test_refine_gamma():
    assert float(S.refine_gamma(FULL2, IND, ONE, None, 0.3, [1.0])) == pytest.approx(h2(0.3), abs=1e-9)
    assert S.refine_gamma(FULL2, IND, ONE, None, 0.3, []) == NEG_INF


def test_search_radius_cap():
    assert S.search_radius(1.0, 1.0, 1e-12) == S.RADIUS_CAP
    assert S.search_radius(0.5, 0.5, 1.0) == pytest.approx(1.01 + 1e-6)


def test_spectrum_point_invariant():
    with pytest.raises(ValueError):
        S.SpectrumPoint(np.array([0.0]), NEG_INF, None, S.Status.INTERIOR)


def test_pressure_bounds_spectrum():
    for a in (0.2, 0.6):
        assert float(S.predicted(FULL2, IND, ONE, None, a).value) <= pressure(FULL2, L.constant(FULL2, 0.0)) + 1e-12
