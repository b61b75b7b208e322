"""The verification suite run by ``mfspec verify``.

Each check group compares a main-path quantity with an independent value
and returns OracleReports.  Inequalities are reported as their violation
(positive part), which must be exactly zero.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import dimension, oracle, pressure as pr, spectra
from .errors import ExcludedAlpha
from .oracle import OracleReport, closed_forms
from .symbolic import LocallyConstantPotential as L
from .symbolic import VectorPotential
from .systems import System, load_bundle


class _Reports:
    def __init__(self, tol: float | None):
        self.tol = tol
        self.items: list[OracleReport] = []

    def add(self, name: str, reference: float, value: float, tol: float) -> None:
        if self.tol is not None and tol > 0:
            tol = self.tol
        self.items.append(OracleReport(name, float(reference), float(value), tol))

    def violation(self, name: str, amount: float) -> None:
        self.items.append(OracleReport(name, 0.0, max(float(amount), 0.0), 0.0))


def h2(a: float) -> float:
    return closed_forms("binary_entropy", a)


def deterministic_points(count: int, d: int, lo: float, hi: float) -> np.ndarray:
    """Kronecker sequence: j * (sqrt 2, sqrt 3, ...) mod 1, scaled to [lo, hi]^d."""
    gens = np.sqrt(np.array([2.0, 3.0, 5.0, 7.0])[:d])
    j = np.arange(1, count + 1)[:, None]
    return lo + (hi - lo) * np.mod(j * gens, 1.0)


def _full2(bundle) -> System:
    return bundle["full2"]


def entropy_grid() -> list[float]:
    return [round(0.05 * i, 2) for i in range(1, 20)]


def check_entropy_spectrum(bundle, r: _Reports) -> None:
    s = _full2(bundle)
    ind, one = s.potential("ind1"), s.potential("one")
    for a in entropy_grid():
        r.add(f"predicted vs H({a})", h2(a), float(spectra.predicted(s.sft, ind, one, None, a).value), 1e-8)


def check_duality(bundle, r: _Reports) -> None:
    grids = {"full2": entropy_grid(), "golden": [round(0.05 * i, 2) for i in range(1, 10)]}
    for name, grid in grids.items():
        s = bundle[name]
        ind, one = s.potential("ind1"), s.potential("one")
        for a in grid:
            p = float(spectra.predicted(s.sft, ind, one, None, a).value)
            c = float(spectra.conditional_variational(s.sft, ind, one, None, a).value)
            r.add(f"duality {name} alpha={a}", p, c, 1e-5)


def coarse_gaps(s: System, alpha: float, gamma: float, ns=(8, 10, 12, 14)) -> list[float]:
    ind, one = s.potential("ind1"), s.potential("one")
    p = float(spectra.predicted(s.sft, ind, one, None, alpha).value)
    return [abs(float(spectra.coarse(s.sft, ind, one, None, alpha, gamma, n)) - p) for n in ns]


def check_chain(bundle, r: _Reports) -> None:
    s = _full2(bundle)
    ind, one = s.potential("ind1"), s.potential("one")
    for a in (0.25, 0.5):
        p = float(spectra.predicted(s.sft, ind, one, None, a).value)
        c = float(spectra.conditional_variational(s.sft, ind, one, None, a).value)
        r.violation(f"cvp <= predicted + 1e-6 alpha={a}", c - p - 1e-6)
        for g in (0.1, 0.05):
            # binomial type-class bound: each count is at most exp(n S(k/n))
            box = np.linspace(a - g, a + g, 201)
            sup = float(spectra.spectrum_over_set(s.sft, ind, one, None, box).value)
            for n in (8, 10, 12, 14):
                val = float(spectra.coarse(s.sft, ind, one, None, a, g, n))
                r.violation(f"coarse <= box sup + log(n+1)/n alpha={a} gamma={g} n={n}", val - sup - math.log(n + 1) / n)
    exact = math.log(math.comb(10, 5)) / 10
    r.add("coarse n=10 gamma=0.1 alpha=0.5", exact, float(spectra.coarse(s.sft, ind, one, None, 0.5, 0.1, 10)), 0.0)


def gradient_cases(bundle):
    g, f = bundle["golden"], bundle["full2"]
    xi1 = VectorPotential.of([g.potential("ind1") + 1.0])
    xi2 = VectorPotential.of([f.potential("ind1") + 0.5, L.from_mapping(f.sft, 2, {"00": 1.0, "01": 0.2, "10": 2.0, "11": 0.7})])
    return [("golden d=1", g.sft, xi1, g.potential("pair")), ("full2 d=2", f.sft, xi2, None)]


def check_gradient(bundle, r: _Reports) -> None:
    h = 1e-5
    for label, sft, xv, xi0 in gradient_cases(bundle):
        d = xv.d
        k = max(xv.depth, xi0.depth if xi0 is not None else 1, 2)
        base = xi0.lifted_values(k) if xi0 is not None else 0.0
        mat = xv.matrix(k)
        worst = 0.0
        for q in deterministic_points(20, d, -3.0, 3.0):
            grad = pr.pressure_gradient(sft, xv, xi0, q)
            for i in range(d):
                e = np.zeros(d)
                e[i] = h
                fd = (pr.pressure_of_values(sft, k, (q + e) @ mat + base) - pr.pressure_of_values(sft, k, (q - e) @ mat + base)) / (2 * h)
                worst = max(worst, abs(grad[i] - fd) / abs(fd))
        r.add(f"gradient vs finite differences {label} (max rel err)", 0.0, worst, 1e-6)


def check_bowen(bundle, r: _Reports) -> None:
    s = bundle["slopes23"]
    zero = s.potential("zero")
    r.add("Bowen root slopes (2,3)", closed_forms("moran_root", 0.5, 1 / 3), float(dimension.bowen_root(s.sft, zero, s.potential("u"))), 1e-10)
    d = bundle["doubling"]
    r.add("Bowen root uniform slope 2", 1.0, float(dimension.bowen_root(d.sft, d.potential("zero"), d.potential("u"))), 1e-12)


def lyapunov_grid() -> np.ndarray:
    return np.linspace(math.log(2), math.log(3), 11)[1:-1]


def check_lyapunov(bundle, r: _Reports) -> None:
    s = bundle["slopes23"]
    fmap, u, one = s.require_map(), s.potential("u"), s.potential("one")
    a0 = (math.log(2) + math.log(3)) / 2
    r.add("Lyapunov Legendre route", math.log(2) / a0, float(dimension.lyapunov_spectrum(fmap, a0)), 1e-8)
    r.add("Lyapunov Bowen route", math.log(2) / a0, float(dimension.u_dimension_spectrum(s.sft, u, one, u, a0)), 1e-8)
    for a in lyapunov_grid():
        r.add(
            f"Lyapunov routes agree alpha={a:.6f}",
            float(dimension.lyapunov_spectrum(fmap, a)),
            float(dimension.u_dimension_spectrum(s.sft, u, one, u, a)),
            1e-8,
        )


def check_indifferent(bundle, r: _Reports) -> None:
    s = bundle["indifferent"]
    fmap, u, one, ind = s.require_map(), s.potential("u"), s.potential("one"), s.potential("ind1")
    r.add("condition P indifferent", 1.0, float(dimension.check_condition_p(s.sft, u).passed), 0.0)
    r.add("condition Q indifferent", 1.0, float(spectra.check_condition_q(s.sft, one, u).passed), 0.0)
    dom = spectra.domain(s.sft, one, u)
    r.add("indifferent ratio domain unbounded", 1.0, float(dom.contains_unbounded_direction and math.isinf(dom.upper)), 0.0)
    r.add("indifferent Bowen root", math.inf, float(dimension.bowen_root(s.sft, s.potential("zero"), u)), 0.0)
    try:
        dimension.birkhoff_dimension_spectrum(fmap, ind, 0.0)
        rejected = 0.0
    except ExcludedAlpha:
        rejected = 1.0
    r.add("alpha = phi(p) rejected", 1.0, rejected, 0.0)
    for a in (0.1, 0.3, 0.5, 0.7, 0.9):
        r.add(
            f"indifferent Birkhoff dimension duality alpha={a}",
            dimension.u_dimension_variational(s.sft, ind, one, u, a),
            float(dimension.birkhoff_dimension_spectrum(fmap, ind, a)),
            1e-5,
        )


def dichotomy_cases(bundle):
    return [
        ("full2", bundle["full2"].potential("ind1"), bundle["full2"].potential("one"), bundle["full2"]),
        ("golden", bundle["golden"].potential("ind1"), bundle["golden"].potential("one"), bundle["golden"]),
        ("slopes23", bundle["slopes23"].potential("ind1"), bundle["slopes23"].potential("u"), bundle["slopes23"]),
    ]


def check_dichotomy(bundle, r: _Reports) -> None:
    for name, phi, psi, s in dichotomy_cases(bundle):
        dom = spectra.domain(s.sft, phi, psi)
        width = dom.upper - dom.lower
        mismatches = 0
        for a in np.linspace(dom.lower - 0.5 * width, dom.upper + 0.5 * width, 50):
            inside = dom.contains(a)
            dich = spectra.dichotomy(s.sft, phi, psi, a) is spectra.Dichotomy.NON_NEGATIVE
            pt = spectra.predicted(s.sft, phi, psi, None, a)
            sentinel = pt.value.is_neg_inf
            mismatches += int(dich != inside) + int(sentinel == inside) + int(sentinel != (pt.status is spectra.Status.OUTSIDE))
        r.add(f"dichotomy vs domain {name} (mismatches)", 0.0, mismatches, 0.0)


def check_concavity(bundle, r: _Reports) -> None:
    for name in ("full2", "golden"):
        s = bundle[name]
        ind, one = s.potential("ind1"), s.potential("one")
        dom = spectra.domain(s.sft, ind, one)
        grid = np.linspace(dom.lower, dom.upper, 21)[1:-1]
        vals = [float(spectra.predicted(s.sft, ind, one, None, a).value) for a in grid]
        worst = 0.0
        for i in range(len(grid)):
            for j in range(i + 2, len(grid), 2):
                mid = (i + j) // 2
                worst = max(worst, 0.5 * (vals[i] + vals[j]) - vals[mid])
        r.violation(f"midpoint concavity {name}", worst - 1e-8)
    s = _full2(bundle)
    ind, one = s.potential("ind1"), s.potential("one")
    grid = [0.1 + 0.04 * i for i in range(21)]
    best = max(spectra.predicted(s.sft, ind, one, None, a).value for a in grid)
    r.add("set supremum over 21 points", float(best), float(spectra.spectrum_over_set(s.sft, ind, one, None, grid).value), 0.0)
    s = bundle["slopes23"]
    ind, u = s.potential("ind1"), s.potential("u")
    gammas = np.arange(math.log(2), math.log(3) + 1e-12, 1e-3)
    for a in (0.3, 0.6):
        r.add(
            f"refine gamma slopes (2,3) alpha={a}",
            float(spectra.predicted(s.sft, ind, u, None, a).value),
            float(spectra.refine_gamma(s.sft, ind, u, None, a, gammas)),
            1e-3,
        )


def check_pointwise(bundle, r: _Reports) -> None:
    s = bundle["doubling"]
    fmap, phi0, u = s.require_map(), s.potential("bern_quarter"), s.potential("u")
    a_star = (math.log(4) + math.log(4 / 3)) / (2 * math.log(2))
    r.add("pointwise dimension at alpha*", 1.0, float(dimension.pointwise_dimension_spectrum(fmap, phi0, a_star)), 1e-6)
    dom = spectra.domain(s.sft, -phi0, u)
    r.add("pointwise domain lower", -math.log2(0.75), dom.lower, 1e-9)
    r.add("pointwise domain upper", 2.0, dom.upper, 1e-9)
    pts = deterministic_points(10, 2, 0.0, 1.0)
    worst = 0.0
    for qq, aa in pts:
        q = -3.0 + 6.0 * qq
        a = dom.lower + (dom.upper - dom.lower) * aa
        t = float(dimension.pointwise_t(fmap, phi0, q))
        tu = float(dimension.t_u_of_q(s.sft, -phi0, u, u, a, q))
        worst = max(worst, abs(t - (tu + a * q)))
    r.add("T(q) = T_u(q) + alpha q (max abs err)", 0.0, worst, 1e-9)


def check_oracles(bundle, r: _Reports) -> None:
    for name, s in bundle.items():
        mismatches = 0
        for pname in s.names:
            phi = s.potential(pname)
            for n in range(1, 13):
                a = oracle.brute_pressure(s.sft, phi, n)
                b = pr.pressure_cover_estimate(s.sft, phi, n)
                mismatches += int(a != b)
        r.add(f"brute vs cover {name} n <= 12 (mismatches)", 0.0, mismatches, 0.0)
    for rep in oracle.reproduce_reference_values(r.tol):
        r.items.append(rep)


CHECKS: dict[str, Callable] = {
    "1 entropy spectrum": check_entropy_spectrum,
    "2 duality": check_duality,
    "3 inequality chain": check_chain,
    "4 gradient identity": check_gradient,
    "5 Bowen root": check_bowen,
    "6 Lyapunov spectrum": check_lyapunov,
    "7 indifferent fixed point": check_indifferent,
    "8 dichotomy and domain": check_dichotomy,
    "9 concavity and suprema": check_concavity,
    "10 pointwise dimension": check_pointwise,
    "11 oracle agreement": check_oracles,
}


def run_suite(bundle: dict[str, System] | None = None, tol: float | None = None) -> dict[str, list[OracleReport]]:
    bundle = bundle if bundle is not None else load_bundle()
    out = {}
    for name, check in CHECKS.items():
        r = _Reports(tol)
        check(bundle, r)
        out[name] = r.items
    return out
