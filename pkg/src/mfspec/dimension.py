"""Dimension spectra through Bowen's equation.

A piecewise-linear Markov map is coded as a shift with the depth-1 weight
``u = log |Df|``.  The u-dimension of a level set is inf over q of T_u(q),
where T_u(q) is the root in t of P(<q, phi - alpha*psi> - t*u) = 0.  The
named spectra (Lyapunov, Birkhoff, pointwise, local entropy) are all
specializations of this or of the predicted spectrum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import cycles
from . import spectra
from .errors import (
    BoundaryUnresolved,
    ConditionPViolated,
    ExcludedAlpha,
    InvalidSystem,
    NotMarkov,
)
from .extended import NEG_INF, ExtendedReal, finite
from .optimize import minimize_convex_1d, minimize_convex_nd
from .pressure import equilibrium_of_values, pressure, pressure_of_values
from .spectra import SpectrumPoint, Status
from .symbolic import LocallyConstantPotential, Sft, VectorPotential, as_vector, validate_sft

ROOT_TOL = 1e-10
MAX_DOUBLINGS = 60
NORMALIZE_TOL = 1e-9


@dataclass(frozen=True)
class PiecewiseLinearMap:
    """Markov interval map with constant slope magnitude on each branch."""

    slopes: tuple[float, ...]
    transitions: tuple[tuple[int, ...], ...] | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        slopes = tuple(float(s) for s in self.slopes)
        if not slopes:
            raise ValueError("need at least one branch")
        if any(not math.isfinite(s) or s < 1.0 for s in slopes):
            raise ValueError("slopes must be finite and at least 1")
        m = len(slopes)
        trans = self.transitions
        if trans is None:
            trans = tuple(tuple(1 for _ in range(m)) for _ in range(m))
        trans = tuple(tuple(int(x) for x in row) for row in trans)
        if len(trans) != m or any(len(row) != m for row in trans):
            raise ValueError("transition matrix must be m x m")
        flat = [i for i, s in enumerate(slopes) if s == 1.0]
        if len(flat) > 1:
            raise ValueError("at most one branch may have slope 1")
        if flat and not trans[flat[0]][flat[0]]:
            raise ValueError("the slope-1 branch must fix its own interval endpoint")
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "transitions", trans)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))

    @property
    def branch_count(self) -> int:
        return len(self.slopes)

    @property
    def indifferent_symbol(self) -> int | None:
        for i, s in enumerate(self.slopes):
            if s == 1.0:
                return i
        return None


def code_as_sft(fmap: PiecewiseLinearMap) -> tuple[Sft, LocallyConstantPotential]:
    """Symbolic model of the map and its log-derivative potential."""
    try:
        sft = validate_sft(fmap.transitions, fmap.labels)
    except InvalidSystem as exc:
        raise NotMarkov(str(exc)) from exc
    u = LocallyConstantPotential.symbol_values(sft, [math.log(s) for s in fmap.slopes])
    return sft, u


@dataclass(frozen=True)
class ConditionPResult:
    passed: bool
    witness: tuple[str, ...] = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.passed


def check_condition_p(sft: Sft, u: LocallyConstantPotential) -> ConditionPResult:
    """u >= 0 everywhere and every zero-sum cycle is a single self-loop."""
    k = max(u.depth, 2)
    vals = u.lifted_values(k)
    graph = cycles.block_graph(sft, k)
    tol = 1e-15 * (1.0 + float(np.max(np.abs(vals))))
    neg = np.flatnonzero(vals < -tol)
    if neg.size:
        word = sft.words(k)[int(neg[0])]
        return ConditionPResult(False, (sft.format_word(word),), "u takes a negative value")
    zero = np.abs(vals) <= tol
    non_loop = zero & (graph.src != graph.dst)
    if cycles.has_cycle(graph, non_loop):
        cyc = cycles.shortest_cycle(graph, non_loop)
        return ConditionPResult(False, (cyc.label(sft),), "zero-u cycle that is not a fixed point")
    return ConditionPResult(True)


def _require_p(sft: Sft, u: LocallyConstantPotential) -> None:
    res = check_condition_p(sft, u)
    if not res.passed:
        raise ConditionPViolated(f"condition (P) fails: {res.reason}", res.witness)


# ---------------------------------------------------------------------------
# Bowen's equation


def _bowen_values(sft: Sft, k: int, eta: np.ndarray, u: np.ndarray) -> float:
    """inf{t : P(eta - t u) <= 0} for value arrays at depth k >= 2."""
    graph = cycles.block_graph(sft, k)
    zero = np.abs(u) <= 1e-15 * (1.0 + float(np.max(np.abs(u))))
    if zero.any():
        # t -> P(eta - t u) decreases to the largest eta-mean over zero-u
        # cycles; if that limit is >= 0 the equation has no finite root
        limit = cycles.max_cycle_mean(graph, eta, zero)
        if limit >= 0.0:
            return math.inf

    def press(t: float) -> float:
        return pressure_of_values(sft, k, eta - t * u)

    if press(0.0) > 0:
        lo, hi = 0.0, 1.0
        j = 0
        while press(hi) > 0:
            lo, hi = hi, 2.0 * hi
            j += 1
            if j > MAX_DOUBLINGS:
                return math.inf
    else:
        lo, hi = -1.0, 0.0
        j = 0
        while press(lo) <= 0:
            lo, hi = 2.0 * lo, lo
            j += 1
            if j > MAX_DOUBLINGS:
                return -math.inf
    # bisect well past ROOT_TOL so that independent root finders agree
    for _ in range(300):
        if hi - lo <= 1e-3 * ROOT_TOL * max(1.0, abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if press(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def bowen_root(sft: Sft, eta: LocallyConstantPotential, u: LocallyConstantPotential) -> ExtendedReal:
    """Smallest t with P(eta - t u) <= 0 (plus infinity when none exists)."""
    _require_p(sft, u)
    k = max(eta.depth, u.depth, 2)
    return ExtendedReal.of(_bowen_values(sft, k, eta.lifted_values(k), u.lifted_values(k)))


def t_u_of_q(sft: Sft, phi, psi, u: LocallyConstantPotential, alpha, q) -> ExtendedReal:
    phi, psi = as_vector(phi), as_vector(psi)
    _require_p(sft, u)
    spectra._require_q(sft, phi, psi)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    q = np.atleast_1d(np.asarray(q, dtype=np.float64))
    eta = phi.level(psi, alpha).dot(q)
    return bowen_root(sft, eta, u)


# ---------------------------------------------------------------------------
# minimization of Bowen roots over q


class _RootObjective:
    """F(q) = root_t P(q @ a - t u) + q @ b, with its gradient."""

    def __init__(self, sft: Sft, k: int, a: np.ndarray, b: np.ndarray, u: np.ndarray):
        self.sft, self.k, self.a, self.b, self.u = sft, k, a, b, u

    def root(self, q: np.ndarray) -> float:
        return _bowen_values(self.sft, self.k, q @ self.a, self.u)

    def __call__(self, q) -> float:
        q = np.atleast_1d(np.asarray(q, dtype=np.float64))
        return self.root(q) + float(q @ self.b)

    def grad(self, q) -> np.ndarray:
        q = np.atleast_1d(np.asarray(q, dtype=np.float64))
        t = self.root(q)
        if not math.isfinite(t):
            return np.full(q.shape[0], math.nan)
        _, mass, _, _ = equilibrium_of_values(self.sft, self.k, q @ self.a - t * self.u)
        return (self.a @ mass) / float(self.u @ mass) + self.b


def _dimension_point(sft, phi, psi, u, alpha, a_pot=None, b_vec=None, strict=False) -> SpectrumPoint:
    phi, psi = as_vector(phi), as_vector(psi)
    _require_p(sft, u)
    spectra._require_q(sft, phi, psi)
    lv = spectra._level(sft, phi, psi, None, alpha)
    status, eps = spectra._classify(lv)
    if status is Status.OUTSIDE:
        return SpectrumPoint(lv.alpha, NEG_INF, None, Status.OUTSIDE)
    if status is Status.BOUNDARY and strict:
        raise BoundaryUnresolved(f"alpha={lv.alpha.tolist()} lies on the domain boundary")
    k = max(lv.k, u.depth, 2)
    uv = u.lifted_values(k)
    if a_pot is None:
        a_mat = phi.matrix(k) - lv.alpha[:, None] * psi.matrix(k)
        b_vec = np.zeros(lv.d)
    else:
        a_mat = as_vector(a_pot).matrix(k)
    obj = _RootObjective(sft, k, a_mat, b_vec, uv)
    d = lv.d
    start, best = np.zeros(d), obj(np.zeros(d))
    for scale in [2.0**j for j in range(11)]:
        for i in range(d):
            for sign in (1.0, -1.0):
                q = np.zeros(d)
                q[i] = sign * scale
                val = obj(q)
                if val < best:
                    start, best = q, val
    if not math.isfinite(best):
        raise BoundaryUnresolved("Bowen root is infinite at every trial q")
    if status is Status.BOUNDARY:
        radius = spectra.BOUNDARY_RADIUS
    else:
        radius = min(1.01 * max(best, 0.0) * float(np.max(uv)) / eps + 1e-6, spectra.RADIUS_CAP)
        radius = max(radius, 1.01 * float(np.linalg.norm(start)))
    if d == 1:
        res = minimize_convex_1d(lambda x: obj(np.array([x])), lambda x: float(obj.grad(np.array([x]))[0]), radius)
    else:
        res = minimize_convex_nd(obj, obj.grad, start, radius)
    value = min(res.fx, best)
    if status is Status.INTERIOR and not res.converged:
        status = Status.UNDEFINED
    return SpectrumPoint(lv.alpha, finite(value), res.x, status, res.iterations, radius)


def u_dimension_point(sft: Sft, phi, psi, u, alpha, strict: bool = False) -> SpectrumPoint:
    return _dimension_point(sft, phi, psi, u, alpha, strict=strict)


def u_dimension_spectrum(sft: Sft, phi, psi, u, alpha, strict: bool = True) -> ExtendedReal:
    """u-dimension of the level set {ratio of Birkhoff sums -> alpha}.

    Raises BoundaryUnresolved on the domain boundary unless ``strict`` is
    False, in which case the bounded-radius infimum is returned.
    """
    return u_dimension_point(sft, phi, psi, u, alpha, strict).value


def u_dimension_variational(sft: Sft, phi, psi, u, alpha, order: int = 1) -> float:
    """sup of h / integral(u) over order-k Markov measures on the level set,
    by Dinkelbach iteration on the constrained entropy maximization."""
    phi, psi = as_vector(phi), as_vector(psi)
    kk = order + 1
    uv = u.lifted_values(kk)
    t = 0.0
    for _ in range(60):
        xi = u * (-t)
        _, res = spectra.cvp_measure(sft, phi, psi, xi, alpha, order)
        integral = float(res.mass @ uv)
        if integral <= 0:
            raise ExcludedAlpha("feasible measures have zero u-integral")
        new = res.entropy / integral
        if abs(new - t) <= 1e-13 * max(1.0, abs(t)):
            t = new
            break
        t = new
    return t


# ---------------------------------------------------------------------------
# named spectra


def entropy_birkhoff_spectrum(sft: Sft, phi: LocallyConstantPotential, alpha: float) -> ExtendedReal:
    """Topological entropy of {Birkhoff averages of phi -> alpha}."""
    one = LocallyConstantPotential.constant(sft, 1.0)
    return spectra.predicted(sft, phi, one, None, alpha).value


def lyapunov_point(fmap: PiecewiseLinearMap, alpha: float) -> SpectrumPoint:
    sft, u = code_as_sft(fmap)
    if alpha <= 0:
        raise BoundaryUnresolved("Lyapunov exponent 0 is the indifferent endpoint")
    one = LocallyConstantPotential.constant(sft, 1.0)
    pt = spectra.predicted(sft, u, one, None, alpha)
    if pt.status is Status.OUTSIDE:
        return pt
    return SpectrumPoint(pt.alpha, pt.value.scale(1.0 / alpha), pt.argmin_q, pt.status, pt.iterations, pt.radius)


def lyapunov_spectrum(fmap: PiecewiseLinearMap, alpha: float) -> ExtendedReal:
    """(1/alpha) inf_q (P(q log|Df|) - q alpha)."""
    return lyapunov_point(fmap, alpha).value


def _fixed_value(sft: Sft, phi: LocallyConstantPotential, p: int) -> float:
    return phi.value((p,) * phi.depth)


def birkhoff_dimension_point(fmap: PiecewiseLinearMap, phi: LocallyConstantPotential, alpha: float) -> SpectrumPoint:
    sft, u = code_as_sft(fmap)
    p = fmap.indifferent_symbol
    if p is not None and abs(alpha - _fixed_value(sft, phi, p)) <= 1e-12:
        raise ExcludedAlpha("alpha equals the value of phi at the indifferent fixed point")
    one = LocallyConstantPotential.constant(sft, 1.0)
    return _dimension_point(sft, phi, one, u, alpha)


def birkhoff_dimension_spectrum(fmap: PiecewiseLinearMap, phi: LocallyConstantPotential, alpha: float) -> ExtendedReal:
    """Dimension of {Birkhoff averages of phi -> alpha}."""
    return birkhoff_dimension_point(fmap, phi, alpha).value


def _normalized(sft: Sft, phi: LocallyConstantPotential) -> LocallyConstantPotential:
    p = pressure(sft, phi)
    return phi - p if abs(p) > NORMALIZE_TOL else phi


def pointwise_dimension_point(fmap: PiecewiseLinearMap, phi0: LocallyConstantPotential, alpha: float) -> SpectrumPoint:
    sft, u = code_as_sft(fmap)
    phi = -_normalized(sft, phi0)
    b_vec = np.array([-float(alpha)])
    return _dimension_point(sft, phi, u, u, alpha, a_pot=phi, b_vec=b_vec)


def pointwise_dimension_spectrum(fmap: PiecewiseLinearMap, phi0: LocallyConstantPotential, alpha: float) -> ExtendedReal:
    """inf_q (T(q) - q alpha) with T(q) the Bowen root of q*phi against
    log|Df| and phi = -phi0 after normalizing P(phi0) = 0."""
    return pointwise_dimension_point(fmap, phi0, alpha).value


def pointwise_t(fmap: PiecewiseLinearMap, phi0: LocallyConstantPotential, q: float) -> ExtendedReal:
    """T(q): Bowen root of q*phi against log|Df|."""
    sft, u = code_as_sft(fmap)
    phi = -_normalized(sft, phi0)
    return bowen_root(sft, phi * q, u)


def local_entropy_point(sft: Sft, phi, alpha: Sequence[float]) -> SpectrumPoint:
    phi = as_vector(phi)
    normed = VectorPotential(tuple(_normalized(sft, c) for c in phi))
    ones = VectorPotential.constant(sft, phi.d, 1.0)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    pt = spectra.predicted(sft, normed, ones, None, -alpha)
    return SpectrumPoint(alpha, pt.value, pt.argmin_q, pt.status, pt.iterations, pt.radius)


def local_entropy_spectrum(sft: Sft, phi, alpha: Sequence[float]) -> ExtendedReal:
    """inf over q of P(<q, Phi>) + <q, alpha> for normalized potentials."""
    return local_entropy_point(sft, phi, alpha).value
