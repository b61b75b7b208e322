from __future__ import annotations

import math
import time

import numpy as np
import pytest

from mfspec import dimension as D
from mfspec import oracle
from mfspec import spectra as S
from mfspec.errors import ExcludedAlpha
from mfspec.pressure import pressure_cover_estimate, pressure_gradient, pressure_of_values
from mfspec.symbolic import LocallyConstantPotential as L, VectorPotential
from mfspec.systems import load_bundle

BUNDLE = load_bundle()
FULL2, GOLDEN = BUNDLE["full2"], BUNDLE["golden"]


def h2(a: float) -> float:
    return -a * math.log(a) - (1 - a) * math.log(1 - a)


def kronecker(count: int, d: int, lo: float, hi: float) -> np.ndarray:
    gens = np.sqrt(np.array([2.0, 3.0, 5.0, 7.0])[:d])
    return lo + (hi - lo) * np.mod(np.arange(1, count + 1)[:, None] * gens, 1.0)


def indicator_system(system):
    return system.sft, system.potential("ind1"), system.potential("one")


ENTROPY_GRID = [round(0.05 * i, 2) for i in range(1, 20)]
GOLDEN_GRID = [round(0.05 * i, 2) for i in range(1, 10)]


@pytest.mark.criterion(1, "closed-form entropy spectrum")
def test_entropy_spectrum_closed_form():
    sft, ind, one = indicator_system(FULL2)
    start = time.perf_counter()
    errors = [abs(float(S.predicted(sft, ind, one, None, a).value) - h2(a)) for a in ENTROPY_GRID]
    elapsed = time.perf_counter() - start
    print(f"criterion 1: max error {max(errors):.3e}, runtime {elapsed:.3f} s")
    assert max(errors) <= 1e-8
    assert elapsed < 1.0


@pytest.mark.criterion(2, "strong duality")
def test_strong_duality():
    start = time.perf_counter()
    worst = 0.0
    for system, grid in ((FULL2, ENTROPY_GRID), (GOLDEN, GOLDEN_GRID)):
        sft, ind, one = indicator_system(system)
        for a in grid:
            p = float(S.predicted(sft, ind, one, None, a).value)
            c = float(S.conditional_variational(sft, ind, one, None, a).value)
            worst = max(worst, abs(p - c))
    elapsed = time.perf_counter() - start
    print(f"criterion 2: max gap {worst:.3e}, runtime {elapsed:.2f} s")
    assert worst <= 1e-5
    assert elapsed < 30.0


@pytest.mark.criterion(3, "inequality chain")
def test_inequality_chain():
    sft, ind, one = indicator_system(FULL2)
    ns = (8, 10, 12, 14)
    failures = []
    for a in (0.25, 0.5):
        p = float(S.predicted(sft, ind, one, None, a).value)
        c = float(S.conditional_variational(sft, ind, one, None, a).value)
        if c > p + 1e-6:
            failures.append(f"cvp above predicted at alpha={a}")
        for g in (0.1, 0.05):
            gaps = [abs(float(S.coarse(sft, ind, one, None, a, g, n)) - p) for n in ns]
            print(f"criterion 3: alpha={a} gamma={g} gaps {[round(x, 4) for x in gaps]}")
            if not all(x > y for x, y in zip(gaps, gaps[1:])):
                failures.append(f"gaps not decreasing at alpha={a} gamma={g}")
            if g == 0.05 and gaps[-1] > 0.06:
                failures.append(f"final gap {gaps[-1]:.4f} > 0.06 at alpha={a}")
    exact = float(S.coarse(sft, ind, one, None, 0.5, 0.1, 10))
    if exact != math.log(252) / 10:
        failures.append("coarse(0.5, 0.1, 10) differs from log(252)/10")
    print("criterion 3: " + ("; ".join(failures) or "all conditions hold"))
    assert not failures


@pytest.mark.criterion(4, "gradient identity")
def test_gradient_identity():
    h = 1e-5
    cases = [
        (GOLDEN.sft, VectorPotential.of([GOLDEN.potential("ind1") + 1.0]), GOLDEN.potential("pair")),
        (
            FULL2.sft,
            VectorPotential.of(
                [FULL2.potential("ind1") + 0.5, L.from_mapping(FULL2.sft, 2, {"00": 1.0, "01": 0.2, "10": 2.0, "11": 0.7})]
            ),
            None,
        ),
    ]
    worst = 0.0
    for sft, xv, xi0 in cases:
        d, k = xv.d, 2
        mat = xv.matrix(k)
        base = xi0.lifted_values(k) if xi0 is not None else 0.0
        for q in kronecker(20, d, -3.0, 3.0):
            grad = pressure_gradient(sft, xv, xi0, q)
            for i in range(d):
                e = np.zeros(d)
                e[i] = h
                up = pressure_of_values(sft, k, (q + e) @ mat + base)
                down = pressure_of_values(sft, k, (q - e) @ mat + base)
                fd = (up - down) / (2 * h)
                worst = max(worst, abs(grad[i] - fd) / abs(fd))
    print(f"criterion 4: max relative error {worst:.3e}")
    assert worst <= 1e-6


def moran_bisection() -> float:
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if 0.5**mid + (1 / 3) ** mid > 1:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


@pytest.mark.criterion(5, "Bowen root")
def test_bowen_root():
    s, d = BUNDLE["slopes23"], BUNDLE["doubling"]
    root = float(D.bowen_root(s.sft, s.potential("zero"), s.potential("u")))
    unit = float(D.bowen_root(d.sft, d.potential("zero"), d.potential("u")))
    print(f"criterion 5: Moran root {root:.15f}, uniform slope root {unit!r}")
    assert abs(root - moran_bisection()) <= 1e-10
    assert abs(unit - 1.0) <= 1e-12


@pytest.mark.criterion(6, "Lyapunov spectrum")
def test_lyapunov_spectrum():
    s = BUNDLE["slopes23"]
    fmap, u, one = s.require_map(), s.potential("u"), s.potential("one")
    a0 = (math.log(2) + math.log(3)) / 2
    legendre = float(D.lyapunov_spectrum(fmap, a0))
    bowen = float(D.u_dimension_spectrum(s.sft, u, one, u, a0))
    gaps = [
        abs(float(D.lyapunov_spectrum(fmap, a)) - float(D.u_dimension_spectrum(s.sft, u, one, u, a)))
        for a in np.linspace(math.log(2), math.log(3), 11)[1:-1]
    ]
    print(f"criterion 6: Legendre {legendre:.12f}, Bowen {bowen:.12f}, max route gap {max(gaps):.3e}")
    assert abs(legendre - math.log(2) / a0) <= 1e-8
    assert abs(bowen - math.log(2) / a0) <= 1e-8
    assert max(gaps) <= 1e-8


@pytest.mark.criterion(7, "indifferent fixed point")
def test_indifferent_fixed_point():
    s = BUNDLE["indifferent"]
    fmap, u, one, ind = s.require_map(), s.potential("u"), s.potential("one"), s.potential("ind1")
    assert D.check_condition_p(s.sft, u).passed
    assert S.check_condition_q(s.sft, one, u).passed
    dom = S.domain(s.sft, one, u)
    assert dom.contains_unbounded_direction and math.isinf(dom.upper)
    assert D.bowen_root(s.sft, s.potential("zero"), u).is_pos_inf
    with pytest.raises(ExcludedAlpha):
        D.birkhoff_dimension_spectrum(fmap, ind, 0.0)
    gaps = []
    for a in (0.1, 0.3, 0.5, 0.7, 0.9):
        value = float(D.birkhoff_dimension_spectrum(fmap, ind, a))
        assert math.isfinite(value)
        gaps.append(abs(value - D.u_dimension_variational(s.sft, ind, one, u, a)))
    print(f"criterion 7: max duality gap {max(gaps):.3e}")
    assert max(gaps) <= 1e-5


@pytest.mark.criterion(8, "dichotomy and domain")
def test_dichotomy_and_domain():
    cases = [
        (FULL2, FULL2.potential("ind1"), FULL2.potential("one")),
        (GOLDEN, GOLDEN.potential("ind1"), GOLDEN.potential("one")),
        (BUNDLE["slopes23"], BUNDLE["slopes23"].potential("ind1"), BUNDLE["slopes23"].potential("u")),
    ]
    mismatches = 0
    for s, phi, psi in cases:
        dom = S.domain(s.sft, phi, psi)
        width = dom.upper - dom.lower
        for a in np.linspace(dom.lower - 0.5 * width, dom.upper + 0.5 * width, 50):
            inside = dom.contains(a)
            nonneg = S.dichotomy(s.sft, phi, psi, a) is S.Dichotomy.NON_NEGATIVE
            pt = S.predicted(s.sft, phi, psi, None, a)
            mismatches += int(nonneg != inside)
            mismatches += int(pt.value.is_neg_inf == inside)
            mismatches += int(pt.value.is_neg_inf != (pt.status is S.Status.OUTSIDE))
    print(f"criterion 8: {mismatches} mismatches over 150 points")
    assert mismatches == 0


@pytest.mark.criterion(9, "concavity and set suprema")
def test_concavity_and_suprema():
    worst = -math.inf
    for s in (FULL2, GOLDEN):
        sft, ind, one = indicator_system(s)
        dom = S.domain(sft, ind, one)
        grid = np.linspace(dom.lower, dom.upper, 21)[1:-1]
        vals = [float(S.predicted(sft, ind, one, None, a).value) for a in grid]
        for i in range(len(grid)):
            for j in range(i + 2, len(grid), 2):
                worst = max(worst, 0.5 * (vals[i] + vals[j]) - vals[(i + j) // 2])
    sft, ind, one = indicator_system(FULL2)
    grid = [0.1 + 0.04 * i for i in range(21)]
    pointwise_max = max(S.predicted(sft, ind, one, None, a).value for a in grid)
    over_set = S.spectrum_over_set(sft, ind, one, None, grid).value
    s = BUNDLE["slopes23"]
    gammas = np.arange(math.log(2), math.log(3) + 1e-12, 1e-3)
    refine_gaps = [
        abs(
            float(S.refine_gamma(s.sft, s.potential("ind1"), s.potential("u"), None, a, gammas))
            - float(S.predicted(s.sft, s.potential("ind1"), s.potential("u"), None, a).value)
        )
        for a in (0.3, 0.6)
    ]
    print(f"criterion 9: worst concavity defect {worst:.3e}, refine gaps {refine_gaps}")
    assert worst <= 1e-8
    assert over_set == pointwise_max
    assert max(refine_gaps) <= 1e-3


@pytest.mark.criterion(10, "pointwise-dimension spectrum")
def test_pointwise_dimension():
    s = BUNDLE["doubling"]
    fmap, phi0, u = s.require_map(), s.potential("bern_quarter"), s.potential("u")
    a_star = (math.log(4) + math.log(4 / 3)) / (2 * math.log(2))
    peak = float(D.pointwise_dimension_spectrum(fmap, phi0, a_star))
    dom = S.domain(s.sft, -phi0, u)
    worst = 0.0
    for qq, aa in kronecker(10, 2, 0.0, 1.0):
        q = -3.0 + 6.0 * qq
        a = dom.lower + (dom.upper - dom.lower) * aa
        t = float(D.pointwise_t(fmap, phi0, q))
        tu = float(D.t_u_of_q(s.sft, -phi0, u, u, a, q))
        worst = max(worst, abs(t - (tu + a * q)))
    print(f"criterion 10: peak {peak:.12f}, domain [{dom.lower:.12f}, {dom.upper:.12f}], identity error {worst:.3e}")
    assert abs(peak - 1.0) <= 1e-6
    assert abs(dom.lower + math.log2(0.75)) <= 1e-9
    assert abs(dom.upper - 2.0) <= 1e-9
    assert worst <= 1e-9


@pytest.mark.criterion(11, "oracle agreement")
def test_oracle_agreement():
    mismatches = 0
    for s in BUNDLE.values():
        for name in s.names:
            phi = s.potential(name)
            for n in range(1, 13):
                mismatches += int(oracle.brute_pressure(s.sft, phi, n) != pressure_cover_estimate(s.sft, phi, n))
    reports = oracle.reproduce_reference_values()
    failed = [r.quantity_name for r in reports if not r.passed]
    print(f"criterion 11: {mismatches} brute/cover mismatches, {len(reports) - len(failed)}/{len(reports)} reference values")
    assert mismatches == 0
    assert not failed
