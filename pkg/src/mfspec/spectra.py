"""Predicted, coarse and conditional variational spectra of ratio level sets.

Throughout, ``phi`` and ``psi`` are vector potentials of the same dimension
d, ``xi`` is the weight potential and ``alpha`` a point of R^d.  The level
potential ``g = phi - alpha * psi`` (componentwise) drives everything: the
set J of integrals of g over invariant measures decides whether alpha is
inside the domain, and the predicted spectrum minimizes q -> P(<q, g> + xi).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import cycles
from .errors import BoundaryUnresolved, ConditionQViolated, DepthMismatch, Infeasible
from .extended import NEG_INF, ExtendedReal, ext_max, finite
from .optimize import golden_section, minimize_convex_1d, minimize_convex_nd
from .pressure import equilibrium_of_values, pressure_of_values
from .symbolic import (
    LocallyConstantPotential,
    MarkovMeasure,
    Sft,
    VectorPotential,
    as_vector,
    block_edges,
    sorted_log_sum_exp,
    stationary_vector,
    window_indices,
    word_array,
)

BOUNDARY_TOL = 1e-9
RADIUS_CAP = 1e6
BOUNDARY_RADIUS = 1e3
CONSTRAINT_TOL = 1e-8
INNER_TOL = 1e-10
INNER_CAP = 5000


class Status(enum.Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"
    UNDEFINED = "Undefined"


class Dichotomy(enum.Enum):
    NON_NEGATIVE = "NonNegative"
    NEG_INFINITY = "NegInfinity"


@dataclass(frozen=True, eq=False)
class SpectrumPoint:
    alpha: np.ndarray
    value: ExtendedReal
    argmin_q: np.ndarray | None
    status: Status
    iterations: int = 0
    radius: float | None = None

    def __post_init__(self):
        if self.value.is_neg_inf != (self.status is Status.OUTSIDE):
            raise ValueError("value is -inf exactly when the point is Outside")


@dataclass(frozen=True)
class ConditionQResult:
    passed: bool
    component: int | None = None
    witness: tuple[str, ...] = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.passed


@dataclass(frozen=True, eq=False)
class DomainDescription:
    d: int
    lower: float | None = None
    upper: float | None = None
    lower_cycle: str | None = None
    upper_cycle: str | None = None
    points: np.ndarray | None = None
    contains_unbounded_direction: bool = False
    _membership: object = field(default=None, repr=False)

    def contains(self, alpha, tol: float = BOUNDARY_TOL) -> bool:
        a = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
        if self.d == 1:
            return self.lower - tol <= a[0] <= self.upper + tol
        return self._membership(a) >= -tol

    def boundary_distance(self, alpha) -> float:
        """Distance to the boundary (d = 1) in alpha units."""
        a = float(np.atleast_1d(alpha)[0])
        return min(abs(a - self.lower), abs(a - self.upper))


# ---------------------------------------------------------------------------
# problem set-up


@dataclass(frozen=True, eq=False)
class _Level:
    sft: Sft
    phi: VectorPotential
    psi: VectorPotential
    alpha: np.ndarray
    k: int
    g: np.ndarray
    xi: np.ndarray
    graph: cycles.BlockGraph

    @property
    def d(self) -> int:
        return self.g.shape[0]

    def pressure(self, q) -> float:
        return pressure_of_values(self.sft, self.k, np.asarray(q) @ self.g + self.xi)

    def gradient(self, q) -> np.ndarray:
        _, mass, _, _ = equilibrium_of_values(self.sft, self.k, np.asarray(q) @ self.g + self.xi)
        return self.g @ mass


def _level(sft, phi, psi, xi, alpha) -> _Level:
    phi, psi = as_vector(phi), as_vector(psi)
    if phi.d != psi.d:
        raise ValueError("phi and psi must have the same dimension")
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    if alpha.shape != (phi.d,):
        raise ValueError(f"alpha must have {phi.d} components")
    k = max(phi.depth, psi.depth, xi.depth if xi is not None else 1, 2)
    g = phi.matrix(k) - alpha[:, None] * psi.matrix(k)
    xv = xi.lifted_values(k) if xi is not None else np.zeros(g.shape[1])
    return _Level(sft, phi, psi, alpha, k, g, xv, cycles.block_graph(sft, k))


def _zero_or(sft: Sft, xi):
    return xi if xi is not None else LocallyConstantPotential.constant(sft)


# ---------------------------------------------------------------------------
# condition (Q) and the domain


def check_condition_q(sft: Sft, phi, psi) -> ConditionQResult:
    """Each psi_i has nonnegative integral over invariant measures, strictly
    positive whenever the phi_i integral vanishes."""
    phi, psi = as_vector(phi), as_vector(psi)
    if phi.d != psi.d:
        raise ValueError("phi and psi must have the same dimension")
    k = max(phi.depth, psi.depth, 2)
    graph = cycles.block_graph(sft, k)
    fm, pm = phi.matrix(k), psi.matrix(k)
    for i in range(phi.d):
        num, den = fm[i], pm[i]
        scale = 1.0 + float(np.max(np.abs(den))) + float(np.max(np.abs(num)))
        tol = 1e-12 * scale
        dmin, dcyc = cycles.min_cycle(graph, den)
        if dmin < -tol:
            return ConditionQResult(False, i, (dcyc.label(sft),), "negative psi mean on a cycle")
        if dmin > tol:
            continue
        zmask = cycles.zero_mean_mask(graph, den)
        hi, hcyc = cycles.optimal_cycle(graph, num, zmask)
        lo, lcyc = cycles.min_cycle(graph, num, zmask)
        if hcyc is None:
            continue
        if lo <= tol and hi >= -tol:
            if abs(hi) <= tol:
                witness = (hcyc.label(sft),)
            elif abs(lo) <= tol:
                witness = (lcyc.label(sft),)
            else:
                witness = (lcyc.label(sft), hcyc.label(sft))
            return ConditionQResult(False, i, witness, "zero psi mean with zero phi mean")
    return ConditionQResult(True)


def _require_q(sft, phi, psi) -> None:
    res = check_condition_q(sft, phi, psi)
    if not res.passed:
        raise ConditionQViolated(
            f"condition (Q) fails for component {res.component}: {res.reason}", res.witness
        )


def _support(graph, g: np.ndarray, theta: np.ndarray) -> float:
    return cycles.max_cycle_mean(graph, theta @ g)


def _directions(d: int, n: int) -> np.ndarray:
    if d == 2:
        ang = np.arange(n) * (2 * math.pi / n)
        return np.column_stack([np.cos(ang), np.sin(ang)])
    # Fibonacci-like lattice mapped to the sphere via normalized Gaussian
    # quantiles keeps the grid deterministic in any dimension
    idx = np.arange(n) + 0.5
    pts = []
    golden = (1 + 5**0.5) / 2
    for j in range(d):
        pts.append(np.cos(2 * math.pi * ((idx * golden ** (j + 1)) % 1.0)) * (idx / n) ** (1.0 / (j + 1)))
    pts = np.array(pts).T
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def inradius(graph, g: np.ndarray) -> float:
    """Signed distance from 0 to the boundary of J = {integrals of g}.

    Positive inside, negative outside.  Exact for d = 1; for d = 2 a
    direction grid refined by golden-section search; a direction lattice
    for d > 2.
    """
    d = g.shape[0]
    if d == 1:
        hi = cycles.max_cycle_mean(graph, g[0])
        lo = -cycles.max_cycle_mean(graph, -g[0])
        return min(hi, -lo)
    if d == 2:
        n = 256
        vals = np.array([_support(graph, g, th) for th in _directions(2, n)])
        best = float(vals.min())
        step = 2 * math.pi / n
        for i in np.argsort(vals)[:3]:
            center = i * step

            def f(a):
                return _support(graph, g, np.array([math.cos(a), math.sin(a)]))

            _, fv, _ = golden_section(f, center - step, center + step, tol=1e-13)
            best = min(best, fv)
        return best
    return float(min(_support(graph, g, th) for th in _directions(d, 4000)))


def domain(sft: Sft, phi, psi) -> DomainDescription:
    """Set of ratio vectors of invariant measures."""
    phi, psi = as_vector(phi), as_vector(psi)
    _require_q(sft, phi, psi)
    k = max(phi.depth, psi.depth, 2)
    graph = cycles.block_graph(sft, k)
    fm, pm = phi.matrix(k), psi.matrix(k)
    if phi.d == 1:
        hi = cycles.max_cycle_ratio(graph, fm[0], pm[0])
        lo = cycles.min_cycle_ratio(graph, fm[0], pm[0])
        if hi is None or lo is None:
            raise ValueError("every cycle has zero psi sum; no ratio is defined")
        return DomainDescription(
            d=1,
            lower=lo.value,
            upper=hi.value,
            lower_cycle=lo.cycle.label(sft) if lo.cycle else None,
            upper_cycle=hi.cycle.label(sft) if hi.cycle else None,
            contains_unbounded_direction=math.isinf(lo.value) or math.isinf(hi.value),
        )
    unbounded = False
    for i in range(phi.d):
        hi = cycles.max_cycle_ratio(graph, fm[i], pm[i])
        lo = cycles.min_cycle_ratio(graph, fm[i], pm[i])
        if hi is not None and lo is not None:
            unbounded |= math.isinf(hi.value) or math.isinf(lo.value)
    pts = []
    for th in _directions(phi.d, 64 if phi.d == 2 else 400):
        _, cyc = cycles.optimal_cycle(graph, th @ fm)
        if cyc is None:
            continue
        dens = [cyc.total(pm[i]) for i in range(phi.d)]
        if any(x == 0 for x in dens):
            continue
        pts.append([cyc.total(fm[i]) / dens[i] for i in range(phi.d)])
    points = np.unique(np.array(pts), axis=0) if pts else np.zeros((0, phi.d))

    def membership(a: np.ndarray) -> float:
        g = fm - a[:, None] * pm
        return inradius(graph, g)

    return DomainDescription(
        d=phi.d, points=points, contains_unbounded_direction=unbounded, _membership=membership
    )


def _classify(lv: _Level, dom: DomainDescription | None = None) -> tuple[Status, float]:
    """Status of alpha and the in-radius of J around 0."""
    eps = inradius(lv.graph, lv.g)
    if lv.d == 1:
        dom = dom or domain(lv.sft, lv.phi, lv.psi)
        a = float(lv.alpha[0])
        if a < dom.lower - BOUNDARY_TOL or a > dom.upper + BOUNDARY_TOL:
            return Status.OUTSIDE, eps
        if dom.boundary_distance(a) <= BOUNDARY_TOL:
            return Status.BOUNDARY, eps
        return Status.INTERIOR, eps
    if eps < -BOUNDARY_TOL:
        return Status.OUTSIDE, eps
    if eps <= BOUNDARY_TOL:
        return Status.BOUNDARY, eps
    return Status.INTERIOR, eps


def dichotomy(sft: Sft, phi, psi, alpha) -> Dichotomy:
    """Whether the predicted spectrum at alpha (with zero weight) is
    nonnegative or minus infinity."""
    phi, psi = as_vector(phi), as_vector(psi)
    _require_q(sft, phi, psi)
    status, _ = _classify(_level(sft, phi, psi, None, alpha))
    return Dichotomy.NEG_INFINITY if status is Status.OUTSIDE else Dichotomy.NON_NEGATIVE


def search_radius(p_xi: float, xi_norm: float, eps: float) -> float:
    """Radius of a ball that contains every minimizer in q."""
    bound = (p_xi + xi_norm) / eps
    return min(1.01 * bound + 1e-6, RADIUS_CAP)


# ---------------------------------------------------------------------------
# predicted spectrum


def predicted(sft: Sft, phi, psi, xi=None, alpha=0.0, strict: bool = False) -> SpectrumPoint:
    """inf over q of P(<q, phi - alpha*psi> + xi)."""
    phi, psi = as_vector(phi), as_vector(psi)
    _require_q(sft, phi, psi)
    lv = _level(sft, phi, psi, xi, alpha)
    status, eps = _classify(lv)
    if status is Status.OUTSIDE:
        return SpectrumPoint(lv.alpha, NEG_INF, None, Status.OUTSIDE)
    if status is Status.BOUNDARY:
        if strict:
            raise BoundaryUnresolved(f"alpha={lv.alpha.tolist()} lies on the domain boundary")
        radius = BOUNDARY_RADIUS
    else:
        p_xi = pressure_of_values(sft, lv.k, lv.xi)
        radius = search_radius(p_xi, float(np.max(np.abs(lv.xi))), eps)
    res = _minimize(lv.pressure, lv.gradient, lv.d, radius)
    if status is Status.INTERIOR and not res.converged:
        status = Status.UNDEFINED
    return SpectrumPoint(lv.alpha, finite(res.fx), res.x, status, res.iterations, radius)


def _minimize(f, grad, d: int, radius: float):
    if d == 1:
        return minimize_convex_1d(lambda x: f(np.array([x])), lambda x: float(grad(np.array([x]))[0]), radius)
    return minimize_convex_nd(f, grad, np.zeros(d), radius)


# ---------------------------------------------------------------------------
# coarse spectrum


def _as_fraction(x: float) -> Fraction:
    return Fraction(repr(float(x)))


def coarse(sft: Sft, phi, psi, xi, alpha, gamma: float, n: int) -> ExtendedReal:
    """(1/n) log of the xi-weighted count of n-cylinders whose ratio vector
    lies in the open box of half-width gamma around alpha."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    phi, psi = as_vector(phi), as_vector(psi)
    xi = _zero_or(sft, xi)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    k = max(phi.depth, psi.depth, xi.depth)
    words = word_array(sft, n + k - 1)
    win = window_indices(sft, words, k)
    fm, pm, xv = phi.matrix(k), psi.matrix(k), xi.lifted_values(k)

    def sums(values):
        s = np.zeros(words.shape[0])
        for i in range(n):
            s = s + values[win[:, i]]
        return s

    member = np.ones(words.shape[0], dtype=bool)
    for i in range(phi.d):
        num, den = sums(fm[i]), sums(pm[i])
        member &= _in_open_interval(num, den, float(alpha[i]), float(gamma))
    if not member.any():
        return NEG_INF
    return finite(sorted_log_sum_exp(sums(xv)[member]) / n)


def _in_open_interval(num: np.ndarray, den: np.ndarray, a: float, gamma: float) -> np.ndarray:
    """num/den in (a - gamma, a + gamma); zero denominators are excluded.

    A float test decides clear cases; ties within rounding are settled in
    exact rational arithmetic on the decimal values of a and gamma.
    """
    ok = den != 0
    ratio = np.where(ok, num / np.where(ok, den, 1.0), 0.0)
    lo, hi = a - gamma, a + gamma
    inside = ok & (ratio > lo) & (ratio < hi)
    margin = 1e-9 * (1.0 + abs(a) + gamma)
    close = ok & ((np.abs(ratio - lo) <= margin) | (np.abs(ratio - hi) <= margin))
    if close.any():
        fa, fg = _as_fraction(a), _as_fraction(gamma)
        for j in np.flatnonzero(close):
            r = Fraction(float(num[j])) / Fraction(float(den[j]))
            inside[j] = fa - fg < r < fa + fg
    return inside


# ---------------------------------------------------------------------------
# conditional variational spectrum


@dataclass
class _CvpResult:
    value: float
    entropy: float
    multiplier: np.ndarray
    residual: float
    kernel: np.ndarray
    stationary: np.ndarray
    mass: np.ndarray
    iterations: int


def _row_logsumexp(x: np.ndarray, starts: np.ndarray) -> np.ndarray:
    top = np.maximum.reduceat(x, starts)
    counts = np.diff(np.append(starts, x.shape[0]))
    top_e = np.repeat(top, counts)
    tot = np.add.reduceat(np.exp(x - top_e), starts)
    return np.repeat(top + np.log(tot), counts)


def solve_constrained_entropy(sft: Sft, order: int, g: np.ndarray, xv: np.ndarray) -> _CvpResult:
    """Maximize h + integral of xv over order-``order`` Markov measures
    subject to integral of g = 0.

    Kernel rows move by exponentiated-gradient steps (projection onto each
    row simplex in the entropic geometry) on an augmented quadratic-penalty
    objective; the penalty weight doubles until the constraint residual
    drops below 1e-8.
    """
    src, dst = block_edges(sft.transitions, order)
    ns = len(sft.words(order))
    starts = np.flatnonzero(np.r_[True, src[1:] != src[:-1]])
    outdeg = np.bincount(src, minlength=ns)
    logp = -np.log(outdeg[src].astype(np.float64))
    d = g.shape[0]
    nu = np.zeros(d)
    lam = 1.0
    total_it = 0

    def evaluate(lp):
        p = np.exp(lp)
        kern = np.zeros((ns, ns))
        kern[src, dst] = p
        pi = stationary_vector(kern)
        mass = pi[src] * p
        c = g @ mass
        ent = -float(mass @ lp)
        return kern, pi, mass, c, ent

    def objective(state, nu, lam):
        _, _, mass, c, ent = state
        return ent + float(xv @ mass) - float(nu @ c) - 0.5 * lam * float(c @ c)

    state = evaluate(logp)
    residual = prev_residual = math.inf
    for _outer in range(200):
        step = 1.0
        cur = objective(state, nu, lam)
        for _ in range(INNER_CAP):
            total_it += 1
            kern, pi, mass, c, _ = state
            p = np.exp(logp)
            reward = xv - (nu + lam * c) @ g - logp
            row_reward = np.bincount(src, weights=p * reward, minlength=ns)
            gain = float(pi @ row_reward)
            bias = np.linalg.solve(np.eye(ns) - kern + np.outer(np.ones(ns), pi), row_reward - gain)
            adv = reward + bias[dst]
            centered = adv - np.repeat(np.add.reduceat(p * adv, starts), np.diff(np.append(starts, adv.shape[0])))
            if float(np.max(np.abs(centered))) <= INNER_TOL:
                break
            slope = float(mass @ (adv * centered))

            def trial(t):
                cand = logp + t * adv
                cand = cand - _row_logsumexp(cand, starts)
                st = evaluate(cand)
                return cand, st, objective(st, nu, lam)

            # parabolic model of the objective along the step, fitted from
            # the slope at 0 and the value of the full step
            cand, new_state, new = trial(1.0)
            curv = new - cur - slope
            step = 1.0
            if curv < 0:
                step = min(1.0, -slope / (2.0 * curv))
                if step < 1.0:
                    cand, new_state, new = trial(step)
            while new < cur and step > 1e-12:
                step *= 0.5
                cand, new_state, new = trial(step)
            moved = float(np.max(np.abs(cand - logp)))
            logp, state, cur = cand, new_state, new
            if moved <= 1e-15:
                break
        c = state[3]
        residual = float(np.max(np.abs(c)))
        if residual < CONSTRAINT_TOL:
            break
        nu = nu + lam * c
        if residual > 0.25 * prev_residual:
            lam = min(2.0 * lam, 1e6)
        prev_residual = residual
    kern, pi, mass, c, ent = state
    return _CvpResult(ent + float(xv @ mass), ent, -nu, residual, kern, pi, mass, total_it)


def conditional_variational(
    sft: Sft, phi, psi, xi=None, alpha=0.0, order: int = 1, strict: bool = False
) -> SpectrumPoint:
    """sup of h + integral of xi over order-k Markov measures whose
    integrals satisfy integral(phi - alpha*psi) = 0."""
    phi, psi = as_vector(phi), as_vector(psi)
    _require_q(sft, phi, psi)
    if order < 1:
        raise ValueError("order must be a positive integer")
    lv = _level(sft, phi, psi, xi, alpha)
    depth = max(phi.depth, psi.depth, xi.depth if xi is not None else 1)
    if depth > order + 1:
        raise DepthMismatch(f"order {order} cannot carry potentials of depth {depth}")
    status, _ = _classify(lv)
    if status is Status.OUTSIDE:
        if strict:
            raise Infeasible(f"no invariant measure has ratio {lv.alpha.tolist()}")
        return SpectrumPoint(lv.alpha, NEG_INF, None, Status.OUTSIDE)
    kk = order + 1
    g = phi.matrix(kk) - lv.alpha[:, None] * psi.matrix(kk)
    xv = xi.lifted_values(kk) if xi is not None else np.zeros(g.shape[1])
    res = solve_constrained_entropy(sft, order, g, xv)
    if res.residual >= CONSTRAINT_TOL and status is Status.INTERIOR:
        if res.residual > 1e-6:
            if strict:
                raise Infeasible("constraint residual stayed above tolerance")
            return SpectrumPoint(lv.alpha, NEG_INF, None, Status.OUTSIDE, res.iterations)
        status = Status.UNDEFINED
    return SpectrumPoint(lv.alpha, finite(res.value), res.multiplier, status, res.iterations)


def cvp_measure(sft: Sft, phi, psi, xi, alpha, order: int = 1) -> tuple[MarkovMeasure, _CvpResult]:
    """The maximizing Markov measure itself, for cross-checks."""
    phi, psi = as_vector(phi), as_vector(psi)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    kk = order + 1
    g = phi.matrix(kk) - alpha[:, None] * psi.matrix(kk)
    xv = xi.lifted_values(kk) if xi is not None else np.zeros(g.shape[1])
    res = solve_constrained_entropy(sft, order, g, xv)
    return MarkovMeasure(sft, order, res.kernel, res.stationary), res


# ---------------------------------------------------------------------------
# set-valued and refined spectra


def spectrum_over_set(sft: Sft, phi, psi, xi, grid: Sequence) -> SpectrumPoint:
    """Supremum of the predicted spectrum over a finite sample of a compact set."""
    grid = list(grid)
    if not grid:
        raise ValueError("grid must be nonempty")
    points = [predicted(sft, phi, psi, xi, a) for a in grid]
    best = points[0]
    for pt in points[1:]:
        if pt.value > best.value:
            best = pt
    return best


def _feasible_gamma(sft, phi, psi, alpha) -> tuple[float, float] | None:
    """Range of the psi integral over measures with integral(phi - alpha psi) = 0
    (d = 1), from the Lagrangian dual of the cycle polytope."""
    k = max(phi.depth, psi.depth, 2)
    graph = cycles.block_graph(sft, k)
    f, p = phi.lifted_values(k), psi.lifted_values(k)
    g = f - alpha * p
    if inradius(graph, g[None, :]) < -BOUNDARY_TOL:
        return None
    span = 1e4

    def upper(t):
        return cycles.max_cycle_mean(graph, p + t * g)

    def lower(t):
        return cycles.max_cycle_mean(graph, -p + t * g)

    _, hi, _ = golden_section(upper, -span, span, tol=1e-15)
    _, lo, _ = golden_section(lower, -span, span, tol=1e-15)
    return -lo, hi


def refine_gamma(sft: Sft, phi, psi, xi, alpha, gamma_grid: Sequence) -> ExtendedReal:
    """sup over gamma of the predicted spectrum of (phi, psi) against the
    constant denominator at the level (alpha*gamma, gamma)."""
    phi, psi = as_vector(phi), as_vector(psi)
    _require_q(sft, phi, psi)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    d = phi.d
    grid = [np.atleast_1d(np.asarray(gm, dtype=np.float64)) for gm in gamma_grid]
    if not grid:
        return NEG_INF
    if d == 1:
        span = _feasible_gamma(sft, phi[0], psi[0], float(alpha[0]))
        lo_g = min(float(gm[0]) for gm in grid)
        hi_g = max(float(gm[0]) for gm in grid)
        if span is not None:
            for end in span:
                if lo_g <= end <= hi_g:
                    grid.append(np.array([end]))
    tphi = VectorPotential(tuple(phi) + tuple(psi))
    tpsi = VectorPotential.constant(sft, 2 * d, 1.0)
    values = []
    for gm in grid:
        level = np.concatenate([alpha * gm, gm])
        values.append(predicted(sft, tphi, tpsi, xi, level).value)
    return ext_max(values)
