from __future__ import annotations

import math

import numpy as np
from hypothesis import given, settings, strategies as st

from mfspec import dimension as D
from mfspec import spectra as S
from mfspec.extended import ExtendedReal, NEG_INF, POS_INF
from mfspec.pressure import equilibrium_markov, pressure
from mfspec.symbolic import (
    LocallyConstantPotential as L,
    MarkovMeasure,
    count_words,
    markov_stats,
    sorted_log_sum_exp,
    validate_sft,
    window_indices,
    word_array,
)

FULL2 = validate_sft([[1, 1], [1, 1]])
GOLDEN = validate_sft([[1, 1], [1, 0]])
THREE = validate_sft([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
SYSTEMS = [FULL2, GOLDEN, THREE]

reals = st.floats(-3.0, 3.0, allow_nan=False)


@st.composite
def potentials(draw, depth_max: int = 3):
    sft = draw(st.sampled_from(SYSTEMS))
    depth = draw(st.integers(1, depth_max))
    vals = draw(st.lists(reals, min_size=len(sft.words(depth)), max_size=len(sft.words(depth))))
    return L(sft, depth, np.array(vals))


@st.composite
def potential_pairs(draw):
    phi = draw(potentials())
    depth = draw(st.integers(1, 3))
    n = len(phi.sft.words(depth))
    vals = draw(st.lists(reals, min_size=n, max_size=n))
    return phi, L(phi.sft, depth, np.array(vals))


@st.composite
def markov_measures(draw):
    sft = draw(st.sampled_from(SYSTEMS))
    order = draw(st.integers(1, 2))
    kernel = np.zeros((len(sft.words(order)), len(sft.words(order))))
    index = sft.index(order)
    for i, w in enumerate(sft.words(order)):
        for b in range(sft.alphabet_size):
            if sft.transitions[w[-1]][b]:
                kernel[i, index[w[1:] + (b,)]] = draw(st.floats(0.05, 1.0))
    kernel /= kernel.sum(axis=1, keepdims=True)
    return MarkovMeasure.from_kernel(sft, order, kernel)


@settings(max_examples=40, deadline=None)
@given(potential_pairs(), reals, reals)
def test_pressure_is_convex(pair, q1, q2):
    phi, xi = pair
    mid = pressure(phi.sft, phi * ((q1 + q2) / 2) + xi)
    assert mid <= 0.5 * pressure(phi.sft, phi * q1 + xi) + 0.5 * pressure(phi.sft, phi * q2 + xi) + 1e-10


@settings(max_examples=40, deadline=None)
@given(potentials(), reals)
def test_pressure_translation(phi, c):
    assert abs(pressure(phi.sft, phi + c) - pressure(phi.sft, phi) - c) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(potential_pairs())
def test_pressure_monotone(pair):
    phi, other = pair
    bigger = phi + (other - other.minimum)
    assert pressure(phi.sft, phi) <= pressure(phi.sft, bigger) + 1e-12


@settings(max_examples=40, deadline=None)
@given(potential_pairs(), st.floats(0.01, 3.0))
def test_pressure_cone_bounds(pair, t):
    eta, phi = pair
    base = pressure(eta.sft, eta)
    moved = pressure(eta.sft, eta + phi * t)
    assert base + phi.minimum * t <= moved + 1e-10
    assert moved <= base + phi.maximum * t + 1e-10


@settings(max_examples=40, deadline=None)
@given(markov_measures(), st.data())
def test_variational_dominance(mu, data):
    depth = data.draw(st.integers(1, 3))
    n = len(mu.sft.words(depth))
    phi = L(mu.sft, depth, np.array(data.draw(st.lists(reals, min_size=n, max_size=n))))
    h, i = markov_stats(mu, phi)
    assert h + i <= pressure(mu.sft, phi) + 1e-9


@settings(max_examples=30, deadline=None)
@given(potentials())
def test_equilibrium_attains_pressure(phi):
    mu = equilibrium_markov(phi.sft, phi)
    h, i = markov_stats(mu, phi)
    assert abs(h + i - pressure(phi.sft, phi)) <= 1e-8


@settings(max_examples=30, deadline=None)
@given(markov_measures())
def test_markov_entropy_below_topological_entropy(mu):
    h, _ = markov_stats(mu, L.constant(mu.sft, 0.0))
    assert h <= pressure(mu.sft, L.constant(mu.sft, 0.0)) + 1e-9
    assert np.allclose(mu.stationary @ mu.kernel, mu.stationary, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=2))
def test_bernoulli_entropy_closed_form(w):
    p = np.array(w) / sum(w)
    h, _ = markov_stats(MarkovMeasure.bernoulli(FULL2, p), L.constant(FULL2, 0.0))
    assert abs(h - float(-(p * np.log(p)).sum())) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(SYSTEMS), st.integers(1, 10))
def test_word_count_recursion(sft, n):
    ends = np.zeros(sft.alphabet_size, dtype=np.int64)
    for w in word_array(sft, n):
        ends[w[-1]] += 1
    assert count_words(sft, n + 1) == int((ends @ sft.matrix.astype(np.int64)).sum())


finite_or_inf = st.one_of(st.floats(-1e6, 1e6, allow_nan=False), st.sampled_from([-math.inf, math.inf]))


@given(finite_or_inf, finite_or_inf, finite_or_inf)
def test_extended_order_is_total_and_transitive(a, b, c):
    x, y, z = ExtendedReal.of(a), ExtendedReal.of(b), ExtendedReal.of(c)
    assert (x < y) + (y < x) + (x == y) == 1
    if x <= y and y <= z:
        assert x <= z
    assert NEG_INF <= x <= POS_INF


@settings(max_examples=25, deadline=None)
@given(st.integers(4, 10), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.02, 0.3))
def test_cover_sums_over_unions(n, a1, a2, gamma):
    # the log-sum over a union of two member families is at least the max
    # and at most the sum of the two
    words = word_array(FULL2, n)
    ratio = words.sum(axis=1) / n
    zero = np.zeros(words.shape[0])
    m1 = np.abs(ratio - a1) < gamma
    m2 = np.abs(ratio - a2) < gamma

    def lam(mask):
        return sorted_log_sum_exp(zero[mask]) / n

    union = lam(m1 | m2)
    assert union >= max(lam(m1), lam(m2))
    assert math.exp(n * union) <= math.exp(n * lam(m1)) + math.exp(n * lam(m2)) + 1e-9


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 0.45), st.floats(0.1, 0.45), st.floats(0.0, 1.0))
def test_predicted_is_concave(a, b, lam):
    g_ind, g_one = L.indicator(GOLDEN, 1), L.constant(GOLDEN, 1.0)
    mid = lam * a + (1 - lam) * b
    fa = float(S.predicted(GOLDEN, g_ind, g_one, None, a).value)
    fb = float(S.predicted(GOLDEN, g_ind, g_one, None, b).value)
    fm = float(S.predicted(GOLDEN, g_ind, g_one, None, mid).value)
    assert fm >= lam * fa + (1 - lam) * fb - 1e-8


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 0.95))
def test_cvp_never_exceeds_predicted(alpha):
    ind, one = L.indicator(FULL2, 1), L.constant(FULL2, 1.0)
    c = float(S.conditional_variational(FULL2, ind, one, None, alpha).value)
    assert c <= float(S.predicted(FULL2, ind, one, None, alpha).value) + 1e-6


@settings(max_examples=20, deadline=None)
@given(st.floats(-2.0, 2.0), st.floats(0.5, 1.9))
def test_pointwise_shift_identity(q, alpha):
    fmap = D.PiecewiseLinearMap((2.0, 2.0))
    sft, u = D.code_as_sft(fmap)
    phi0 = L.symbol_values(sft, [math.log(0.25), math.log(0.75)])
    t = float(D.pointwise_t(fmap, phi0, q))
    tu = float(D.t_u_of_q(sft, -phi0, u, u, alpha, [q]))
    assert abs(t - (tu + alpha * q)) <= 1e-9


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(SYSTEMS), st.integers(1, 6), st.integers(1, 3))
def test_window_sums_are_additive(sft, n, depth):
    rng_vals = np.linspace(-1.0, 1.0, len(sft.words(depth)))
    phi = L(sft, depth, rng_vals)
    words = word_array(sft, n + depth)
    win = window_indices(sft, words, depth)
    for w, row in zip(words.tolist(), win.tolist()):
        assert abs(phi.birkhoff_sum(w, n + 1) - math.fsum(phi.values[row[: n + 1]])) <= 1e-12
