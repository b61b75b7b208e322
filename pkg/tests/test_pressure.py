from __future__ import annotations

import math

import numpy as np
import pytest

from mfspec.symbolic import LocallyConstantPotential as L, VectorPotential, markov_stats, validate_sft
from mfspec.pressure import (
    SequenceFunction,
    approximate_potential,
    equilibrium_markov,
    perron,
    pressure,
    pressure_cover_estimate,
    pressure_gradient,
    transfer_matrix,
)

FULL2 = validate_sft([[1, 1], [1, 1]])
GOLDEN = validate_sft([[1, 1], [1, 0]])
PHI = (1 + math.sqrt(5)) / 2


def test_topological_entropy():
    assert pressure(FULL2, L.constant(FULL2, 0.0)) == pytest.approx(math.log(2), abs=1e-14)
    assert pressure(GOLDEN, L.constant(GOLDEN, 0.0)) == pytest.approx(math.log(PHI), abs=1e-14)


def test_bernoulli_potential():
    ind = L.indicator(FULL2, 1)
    assert pressure(FULL2, ind) == pytest.approx(math.log(1 + math.e), abs=1e-13)


def test_periodic_shift_pressure():
    cyc = validate_sft([[0, 1], [1, 0]])
    assert pressure(cyc, L.symbol_values(cyc, [1.0, 3.0])) == pytest.approx(2.0, abs=1e-13)


def test_depth_two_pressure_is_log_root():
    pair = L.from_mapping(GOLDEN, 2, {"00": 0.3, "01": -0.2, "10": 0.5})
    m = np.array([[math.exp(0.3), math.exp(-0.2)], [math.exp(0.5), 0.0]])
    assert pressure(GOLDEN, pair) == pytest.approx(math.log(max(abs(np.linalg.eigvals(m)))), abs=1e-13)


def test_large_potential_does_not_overflow():
    assert pressure(FULL2, L.symbol_values(FULL2, [800.0, 0.0])) == pytest.approx(800.0 + math.log1p(math.exp(-800)), abs=1e-10)


def test_transfer_matrix_weights():
    tm = transfer_matrix(GOLDEN, L.constant(GOLDEN, 0.0))
    assert np.allclose(tm.weights, [[1, 1], [1, 0]])


def test_perron_vectors():
    m = np.array([[2.0, 1.0], [1.0, 0.0]])
    rho, r, l = perron(m)
    assert rho == pytest.approx(1 + math.sqrt(2), abs=1e-13)
    assert np.allclose(m @ r, rho * r) and np.allclose(l @ m, rho * l)


def test_gradient_matches_equilibrium_integral():
    ind = L.indicator(FULL2, 1)
    g = pressure_gradient(FULL2, VectorPotential.of(ind), None, [1.0])
    assert g[0] == pytest.approx(math.e / (1 + math.e), abs=1e-12)
    h = 1e-5
    fd = (pressure(FULL2, ind * (1 + h)) - pressure(FULL2, ind * (1 - h))) / (2 * h)
    assert g[0] == pytest.approx(fd, abs=1e-8)


def test_equilibrium_satisfies_variational_identity():
    pair = L.from_mapping(GOLDEN, 2, {"00": 0.3, "01": -0.2, "10": 0.5})
    mu = equilibrium_markov(GOLDEN, pair)
    h, i = markov_stats(mu, pair)
    assert h + i == pytest.approx(pressure(GOLDEN, pair), abs=1e-12)


def test_parry_measure():
    mu = equilibrium_markov(GOLDEN, L.constant(GOLDEN, 0.0))
    assert mu.stationary == pytest.approx([PHI**2 / (1 + PHI**2), 1 / (1 + PHI**2)], abs=1e-12)


def test_approximation_of_geometric_tail():
    f = SequenceFunction(lambda x: sum(s * 2.0 ** -(i + 1) for i, s in enumerate(x)), lambda j: 2.0**-j, horizon=40)
    phi, err = approximate_potential(f, FULL2, 2)
    assert err == 0.25
    for w, v in phi.as_dict().items():
        assert v == pytest.approx(w[0] / 2 + w[1] / 4, abs=1e-12)
    true = pressure(FULL2, L.symbol_values(FULL2, [0.0, 0.5]))
    # the exact pressure of the tail function lies within err of the projection
    assert abs(pressure(FULL2, phi) - true) <= err


def test_approximation_is_exact_for_locally_constant():
    pair = L.from_mapping(GOLDEN, 3, {w: float(i) for i, w in enumerate(["000", "001", "010", "100", "101"])})
    phi, err = approximate_potential(SequenceFunction.from_potential(pair), GOLDEN, 3)
    assert err == 0.0 and np.array_equal(phi.values, pair.values)
    const, err = approximate_potential(SequenceFunction(lambda x: 1.5, lambda j: 0.0), FULL2, 1)
    assert err == 0.0 and np.all(const.values == 1.5)


def test_approximation_rejects_depth_zero():
    with pytest.raises(ValueError):
        approximate_potential(SequenceFunction(lambda x: 0.0, lambda j: 0.0), FULL2, 0)


def test_cover_estimates_converge():
    pair = L.from_mapping(GOLDEN, 2, {"00": 0.3, "01": -0.2, "10": 0.5})
    exact = pressure(GOLDEN, pair)
    errs = [abs(pressure_cover_estimate(GOLDEN, pair, n) - exact) for n in (4, 8, 16)]
    assert errs[0] > errs[1] > errs[2]
    assert pressure_cover_estimate(FULL2, L.constant(FULL2, 0.0), 5) == pytest.approx(math.log(2), abs=1e-15)
