"""Brute-force reference values.

Nothing here uses transfer matrices, cycle algorithms or convex
minimization: pressures come from explicit word enumeration, constrained
suprema from exhaustive grids over Markov kernels, and the rest from closed
formulas.  These are slow on purpose and exist to check the main paths.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DepthMismatch, ResourceLimit, UnknownFormula
from .symbolic import (
    LocallyConstantPotential,
    Sft,
    as_vector,
    count_words,
    max_words,
    sorted_log_sum_exp,
    validate_sft,
)


# ---------------------------------------------------------------------------
# pressure by enumeration


def brute_pressure(sft: Sft, phi: LocallyConstantPotential, n: int) -> float:
    """(1/n) log of sum over admissible (n+k-1)-words of exp(S_n phi).

    Words are generated depth first; each Birkhoff sum accumulates left to
    right so the multiset of sums matches the vectorized cover estimate.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    k = phi.depth
    length = n + k - 1
    total = count_words(sft, length)
    if total > max_words():
        raise ResourceLimit(f"{total} words of length {length} exceed the cap {max_words()}")
    table = phi.as_dict()
    succ = [[b for b in range(sft.alphabet_size) if sft.transitions[a][b]] for a in range(sft.alphabet_size)]
    sums: list[float] = []

    def extend(word: list[int], s: float) -> None:
        if len(word) >= k:
            s = s + table[tuple(word[-k:])]
        if len(word) == length:
            sums.append(s)
            return
        for b in succ[word[-1]]:
            word.append(b)
            extend(word, s)
            word.pop()

    for a in range(sft.alphabet_size):
        extend([a], 0.0)
    return sorted_log_sum_exp(np.array(sums)) / n


# ---------------------------------------------------------------------------
# constrained supremum over a kernel grid


def _row_grid(width: int, lo: np.ndarray | None, hi: np.ndarray | None, step: float) -> np.ndarray:
    """Interior points of the probability simplex on ``width`` successors,
    as rows of length ``width``."""
    if width == 1:
        return np.ones((1, 1))
    axes = []
    for j in range(width - 1):
        a = step if lo is None else max(lo[j], step * 1e-3)
        b = 1.0 - step if hi is None else min(hi[j], 1.0 - step * 1e-3)
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        axes.append(a + step * np.arange(max(count, 0)))
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, width - 1)
    last = 1.0 - mesh.sum(axis=1)
    keep = last > 0
    return np.column_stack([mesh[keep], last[keep]])


def _evaluate(sft, succ, rows, g, xv, step, chunk=1 << 17):
    """Best (value, kernel) among products of the row grids."""
    m = sft.alphabet_size
    sizes = [r.shape[0] for r in rows]
    count = math.prod(sizes)
    if count > max_words():
        raise ResourceLimit(f"{count} kernels exceed the cap {max_words()}")
    best_val, best_kernel = -math.inf, None
    src = np.array([a for a in range(m) for b in succ[a]])
    dst = np.array([b for a in range(m) for b in succ[a]])
    eye = np.eye(m)
    for start in range(0, count, chunk):
        flat = np.arange(start, min(start + chunk, count))
        idx = np.unravel_index(flat, sizes)
        kern = np.zeros((flat.size, m, m))
        for a in range(m):
            kern[:, a, succ[a]] = rows[a][idx[a]]
        mat = eye[None] - np.transpose(kern, (0, 2, 1)) + 1.0
        pi = np.linalg.solve(mat, np.ones((flat.size, m, 1)))[..., 0]
        probs = kern[:, src, dst]
        mass = pi[:, src] * probs
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(probs > 0, np.log(probs), 0.0)
        ent = -np.sum(mass * logs, axis=1)
        resid = np.max(np.abs(mass @ g.T), axis=1)
        val = np.where(resid <= step, ent + mass @ xv, -math.inf)
        i = int(np.argmax(val))
        if val[i] > best_val:
            best_val, best_kernel = float(val[i]), kern[i].copy()
    return best_val, best_kernel


def brute_conditional(sft: Sft, phi, psi, xi, alpha, grid_step: float) -> float:
    """max of h + integral(xi) over order-1 Markov kernels on a grid with
    constraint residual at most ``grid_step``, refined once near the best."""
    phi, psi = as_vector(phi), as_vector(psi)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    depth = max(phi.depth, psi.depth, xi.depth if xi is not None else 1)
    if depth > 2:
        raise DepthMismatch("the kernel grid covers potentials of depth at most 2")
    g = phi.matrix(2) - alpha[:, None] * psi.matrix(2)
    xv = xi.lifted_values(2) if xi is not None else np.zeros(g.shape[1])
    m = sft.alphabet_size
    succ = [[b for b in range(m) if sft.transitions[a][b]] for a in range(m)]
    rows = [_row_grid(len(s), None, None, grid_step) for s in succ]
    best, kern = _evaluate(sft, succ, rows, g, xv, grid_step)
    if kern is None:
        return -math.inf
    fine = grid_step / 10.0
    rows = []
    for a in range(m):
        centre = kern[a, succ[a]][:-1]
        rows.append(_row_grid(len(succ[a]), centre - grid_step, centre + grid_step, fine))
    refined, _ = _evaluate(sft, succ, rows, g, xv, grid_step)
    return max(best, refined)


# ---------------------------------------------------------------------------
# closed forms


class Formula(enum.Enum):
    BINARY_ENTROPY = "binary_entropy"
    LOGISTIC_PRESSURE = "logistic_pressure"
    MORAN_ROOT = "moran_root"
    PARRY_ENTROPY = "parry_entropy"


def _binary_entropy(a: float) -> float:
    if not 0.0 <= a <= 1.0:
        raise ValueError("binary entropy needs 0 <= a <= 1")
    return -sum(p * math.log(p) for p in (a, 1.0 - a) if p > 0)


def _logistic_pressure(q: float) -> float:
    return max(q, 0.0) + math.log1p(math.exp(-abs(q)))


def _moran_root(*ratios: float) -> float:
    """t with sum(r_i ** t) = 1 by plain scalar bisection."""
    if not ratios or any(not 0 < r < 1 for r in ratios):
        raise ValueError("Moran ratios must lie in (0, 1)")
    f = lambda t: math.fsum(r**t for r in ratios) - 1.0
    lo, hi = 0.0, 1.0
    while f(hi) > 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def _parry_entropy(matrix) -> float:
    """log of the largest eigenvalue modulus, or the golden ratio by name."""
    if isinstance(matrix, str):
        if matrix == "golden":
            return math.log((1.0 + math.sqrt(5.0)) / 2.0)
        raise ValueError(f"unknown named matrix {matrix!r}")
    return math.log(float(np.max(np.abs(np.linalg.eigvals(np.asarray(matrix, dtype=float))))))


_FORMULAS: dict[Formula, Callable[..., float]] = {
    Formula.BINARY_ENTROPY: _binary_entropy,
    Formula.LOGISTIC_PRESSURE: _logistic_pressure,
    Formula.MORAN_ROOT: _moran_root,
    Formula.PARRY_ENTROPY: _parry_entropy,
}


def closed_forms(name: Formula | str, *params) -> float:
    try:
        formula = name if isinstance(name, Formula) else Formula(name)
    except ValueError:
        raise UnknownFormula(f"no closed form named {name!r}") from None
    return _FORMULAS[formula](*params)


# ---------------------------------------------------------------------------
# reports


def _num(x: float):
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


@dataclass(frozen=True)
class OracleReport:
    quantity_name: str
    oracle_value: float
    main_value: float
    tolerance: float

    @property
    def abs_error(self) -> float:
        a, b = float(self.oracle_value), float(self.main_value)
        if a == b:
            return 0.0
        return abs(a - b) if math.isfinite(a) and math.isfinite(b) else math.inf

    @property
    def passed(self) -> bool:
        return self.abs_error <= self.tolerance

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(abs_error=self.abs_error, passed=self.passed)
        return {k: (_num(v) if isinstance(v, float) else v) for k, v in d.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def reports_to_json(reports: Sequence[OracleReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)


def format_table(reports: Sequence[OracleReport]) -> str:
    width = max([len(r.quantity_name) for r in reports] + [8])
    lines = [f"{'quantity':<{width}}  {'oracle':>20}  {'main':>20}  {'abs_err':>10}  result"]
    for r in reports:
        lines.append(
            f"{r.quantity_name:<{width}}  {float(r.oracle_value):>20.12f}  {float(r.main_value):>20.12f}  "
            f"{r.abs_error:>10.2e}  {'PASS' if r.passed else 'FAIL'}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# reference examples


def _systems():
    full2 = validate_sft([[1, 1], [1, 1]])
    golden = validate_sft([[1, 1], [1, 0]])
    return full2, golden


def reproduce_reference_values(tol: float | None = None) -> list[OracleReport]:
    """Reference value against main-path value for every reference example."""
    from . import dimension, pressure as pr, spectra
    from .symbolic import MarkovMeasure, VectorPotential, enumerate_words, markov_stats

    L = LocallyConstantPotential
    full2, golden = _systems()
    ind = L.indicator(full2, 1)
    one = L.constant(full2, 1.0)
    zerog = L.constant(golden, 0.0)
    h = lambda a: closed_forms(Formula.BINARY_ENTROPY, a)
    e = math.e
    out: list[tuple[str, float, float, float]] = []

    def add(name, oracle, main, t):
        out.append((name, float(oracle), float(main), t if tol is None else tol))

    # words and measures
    add("golden words n=3", 5, len(enumerate_words(golden, 3)), 0)
    bern = MarkovMeasure.bernoulli(full2, [0.75, 0.25])
    ent, integral = markov_stats(bern, ind)
    add("Bernoulli(1/4) entropy", h(0.25), ent, 1e-12)
    add("Bernoulli(1/4) integral", 0.25, integral, 1e-12)
    parry = pr.equilibrium_markov(golden, zerog)
    add("Parry entropy", closed_forms(Formula.PARRY_ENTROPY, "golden"), markov_stats(parry, zerog)[0], 1e-10)
    add("Parry 1->0 probability", 1.0, parry.kernel[1, 0], 1e-12)

    # pressure, gradient, equilibrium
    add("pressure golden", closed_forms(Formula.PARRY_ENTROPY, [[1, 1], [1, 0]]), pr.pressure(golden, zerog), 1e-12)
    add("pressure full2 indicator", closed_forms(Formula.LOGISTIC_PRESSURE, 1.0), pr.pressure(full2, ind), 1e-12)
    xi_vec = VectorPotential.of([ind])
    add("gradient q=0", 0.5, pr.pressure_gradient(full2, xi_vec, None, [0.0])[0], 1e-12)
    add("gradient q=1", e / (1 + e), pr.pressure_gradient(full2, xi_vec, None, [1.0])[0], 1e-12)
    eq = pr.equilibrium_markov(full2, ind)
    add("equilibrium P(next=1)", e / (1 + e), eq.kernel[0, 1], 1e-12)
    tail = pr.SequenceFunction(lambda x: sum(2.0 ** (-i - 1) * s for i, s in enumerate(x)), lambda j: 2.0 ** (-j))
    add("approximation error bound k=2", 0.25, pr.approximate_potential(tail, full2, 2)[1], 0)
    add("cover estimate golden n=10", math.log(144) / 10, pr.pressure_cover_estimate(golden, zerog, 10), 1e-15)
    add("brute pressure golden n=10", math.log(144) / 10, brute_pressure(golden, zerog, 10), 1e-15)
    add("cover estimate full2 n=1", math.log(1 + e), pr.pressure_cover_estimate(full2, ind, 1), 1e-15)
    add("brute pressure full2 n=1", math.log(1 + e), brute_pressure(full2, ind, 1), 1e-15)

    # conditions and domains
    sft_i, u_i = dimension.code_as_sft(dimension.PiecewiseLinearMap((1, 2)))
    add("condition Q indifferent", 1.0, float(spectra.check_condition_q(sft_i, one, u_i).passed), 0)
    dom_g = spectra.domain(golden, L.indicator(golden, 1), L.constant(golden, 1.0))
    add("golden domain upper", 0.5, dom_g.upper, 1e-12)
    add("golden domain lower", 0.0, dom_g.lower, 1e-12)
    dom_i = spectra.domain(sft_i, one, u_i)
    add("indifferent domain lower", 1 / math.log(2), dom_i.lower, 1e-12)
    add("indifferent domain upper", math.inf, dom_i.upper, 0)
    add("dichotomy alpha=2", 1.0, float(spectra.dichotomy(full2, ind, one, 2.0) is spectra.Dichotomy.NEG_INFINITY), 0)
    add("dichotomy alpha=1", 1.0, float(spectra.dichotomy(full2, ind, one, 1.0) is spectra.Dichotomy.NON_NEGATIVE), 0)

    # spectra
    add("predicted alpha=0.25", h(0.25), float(spectra.predicted(full2, ind, one, None, 0.25).value), 1e-8)
    add("coarse n=10 gamma=0.1", math.log(math.comb(10, 5)) / 10, float(spectra.coarse(full2, ind, one, None, 0.5, 0.1, 10)), 0)
    brute = brute_conditional(full2, ind, one, None, 0.25, 1e-3)
    add("brute conditional alpha=0.25", h(0.25), brute, 2e-3)
    add("cvp alpha=0.25", brute, float(spectra.conditional_variational(full2, ind, one, None, 0.25).value), 2e-3)
    add("set sup {0.25,0.5}", max(h(0.25), h(0.5)), float(spectra.spectrum_over_set(full2, ind, one, None, [0.25, 0.5]).value), 1e-8)
    add("set sup {0.25}", h(0.25), float(spectra.spectrum_over_set(full2, ind, one, None, [0.25]).value), 1e-8)
    sft23, u23 = dimension.code_as_sft(dimension.PiecewiseLinearMap((2, 3)))
    ind23, one23 = L.indicator(sft23, 1), L.constant(sft23, 1.0)
    grid = np.arange(math.log(2), math.log(3) + 1e-12, 1e-3)
    a_fin = 0.3
    add("refine gamma slopes (2,3)", float(spectra.predicted(sft23, ind23, u23, None, a_fin).value),
        float(spectra.refine_gamma(sft23, ind23, u23, None, a_fin, grid)), 1e-3)

    # dimension
    moran = closed_forms(Formula.MORAN_ROOT, 0.5, 1 / 3)
    add("Moran root", moran, float(dimension.bowen_root(sft23, L.constant(sft23, 0.0), u23)), 1e-10)
    add("indifferent Bowen root", math.inf, float(dimension.bowen_root(sft_i, L.constant(sft_i, 0.0), u_i)), 0)
    add("T_u(0) slopes (2,3)", moran, float(dimension.t_u_of_q(sft23, u23, one23, u23, 0.7, 0.0)), 1e-10)
    a_lyap = (math.log(2) + math.log(3)) / 2
    add("u-dimension Lyapunov point", math.log(2) / a_lyap, float(dimension.u_dimension_spectrum(sft23, u23, one23, u23, a_lyap)), 1e-8)
    add("Lyapunov point", math.log(2) / a_lyap, float(dimension.lyapunov_spectrum(dimension.PiecewiseLinearMap((2, 3)), a_lyap)), 1e-8)
    add("entropy spectrum alpha=0.25", h(0.25), float(dimension.entropy_birkhoff_spectrum(full2, ind, 0.25)), 1e-8)
    doubling = dimension.PiecewiseLinearMap((2, 2))
    sft_d, _ = dimension.code_as_sft(doubling)
    add("Birkhoff dimension doubling", h(0.25) / math.log(2),
        float(dimension.birkhoff_dimension_spectrum(doubling, L.indicator(sft_d, 1), 0.25)), 1e-8)
    b4 = L.symbol_values(sft_d, [math.log(0.25), math.log(0.75)])
    b2 = L.symbol_values(sft_d, [math.log(0.5), math.log(0.5)])
    a_star = (math.log(4) + math.log(4 / 3)) / (2 * math.log(2))
    add("pointwise dimension alpha*", 1.0, float(dimension.pointwise_dimension_spectrum(doubling, b4, a_star)), 1e-6)
    add("pointwise dimension alpha=2.5", -math.inf, float(dimension.pointwise_dimension_spectrum(doubling, b4, 2.5)), 0)
    add("local entropy uniform", math.log(2),
        float(dimension.local_entropy_spectrum(sft_d, [b2, b4], [math.log(2), a_star * math.log(2)])), 1e-8)

    return [OracleReport(*row) for row in out]
