"""Topological pressure of locally constant potentials.

For a depth-k potential the pressure is the log spectral radius of the
weighted transfer matrix on (k-1)-blocks.  The Perron root is found by power
iteration on ``M/s + I`` where ``s`` is a dense-solver estimate of the root:
adding the identity makes the matrix primitive whatever the period, and the
rescaling keeps the spectral gap of order one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NonConvergence
from .symbolic import (
    LocallyConstantPotential,
    MarkovMeasure,
    Sft,
    VectorPotential,
    Word,
    _prefix_map,
    block_edges,
    sorted_log_sum_exp,
    window_indices,
    word_array,
)

RESIDUAL_TOL = 1e-13
MAX_ITER = 100_000


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Weighted block transfer matrix, stored as ``exp(shift) * entries``."""

    block_depth: int
    index: tuple[Word, ...]
    entries: np.ndarray
    shift: float

    @property
    def weights(self) -> np.ndarray:
        return self.entries * math.exp(self.shift)


def _matrix_from_values(sft: Sft, k: int, values: np.ndarray) -> tuple[np.ndarray, float]:
    src, dst = block_edges(sft.transitions, k - 1)
    n = len(sft.words(k - 1))
    shift = float(values.max())
    m = np.zeros((n, n))
    m[src, dst] = np.exp(values - shift)
    return m, shift


def _allowed_mask(sft: Sft, k: int) -> np.ndarray:
    src, dst = block_edges(sft.transitions, k - 1)
    n = len(sft.words(k - 1))
    mask = np.zeros((n, n), dtype=bool)
    mask[src, dst] = True
    return mask


def transfer_matrix(sft: Sft, phi: LocallyConstantPotential) -> TransferMatrix:
    k = max(phi.depth, 2)
    m, shift = _matrix_from_values(sft, k, phi.lifted_values(k))
    return TransferMatrix(k - 1, sft.words(k - 1), m, shift)


def _power(b: np.ndarray, v: np.ndarray) -> tuple[float, np.ndarray]:
    v = np.where(np.isfinite(v), v, 1.0)
    if v.max() <= 0:
        v = np.ones_like(v)
    v = v / v.max()
    for _ in range(MAX_ITER):
        w = b @ v
        lam = float(v @ w) / float(v @ v)
        if np.max(np.abs(w - lam * v)) <= RESIDUAL_TOL * lam:
            return lam, v
        v = w / w.max()
    raise NonConvergence(f"power iteration missed residual {RESIDUAL_TOL} in {MAX_ITER} steps")


def _seed(m: np.ndarray) -> tuple[float, np.ndarray]:
    vals, vecs = np.linalg.eig(m)
    i = int(np.argmax(vals.real))
    return float(vals[i].real), np.abs(vecs[:, i].real)


def perron(m: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Perron root with right and left eigenvectors (max-normalized)."""
    n = m.shape[0]
    if n == 1:
        return float(m[0, 0]), np.ones(1), np.ones(1)
    s, r0 = _seed(m)
    _, l0 = _seed(m.T)
    if not (s > 0 and math.isfinite(s)):
        s = float(m.sum(axis=1).max())
    b = m / s + np.eye(n)
    _, r = _power(b, r0)
    _, l = _power(b.T, l0)
    rho = float(l @ (m @ r)) / float(l @ r)
    return rho, r, l


def pressure_of_values(sft: Sft, k: int, values: np.ndarray) -> float:
    """Pressure of the depth-k potential with the given value array."""
    if k < 2:
        values = values[_prefix_map(sft.transitions, 2, k)]
        k = 2
    m, shift = _matrix_from_values(sft, k, values)
    rho, _, _ = perron(m)
    return math.log(rho) + shift


def equilibrium_of_values(sft: Sft, k: int, values: np.ndarray):
    """Pressure, edge masses on k-words, kernel and stationary vector.

    ``k`` must be at least 2; the kernel acts on (k-1)-blocks.
    """
    m, shift = _matrix_from_values(sft, k, values)
    rho, r, l = perron(m)
    with np.errstate(divide="ignore", invalid="ignore"):
        kernel = m * r[None, :] / (rho * r[:, None])
        kernel = kernel / kernel.sum(axis=1, keepdims=True)
    bad = ~np.all(np.isfinite(kernel), axis=1)
    if bad.any():
        # rows whose right eigenvector entry underflowed carry no stationary
        # mass; any admissible stochastic row keeps the kernel valid
        allowed = (m > 0) | _allowed_mask(sft, k)
        rows = np.where(m[bad] > 0, m[bad], 0.0)
        tot = rows.sum(axis=1, keepdims=True)
        uniform = allowed[bad] / allowed[bad].sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            kernel[bad] = np.where(tot > 0, rows / np.where(tot > 0, tot, 1.0), uniform)
    pi = l * r
    pi = pi / pi.sum()
    src, dst = block_edges(sft.transitions, k - 1)
    mass = pi[src] * kernel[src, dst]
    return math.log(rho) + shift, mass, kernel, pi


def pressure(sft: Sft, phi: LocallyConstantPotential) -> float:
    """Topological pressure P(phi) as log spectral radius."""
    k = max(phi.depth, 2)
    return pressure_of_values(sft, k, phi.lifted_values(k))


def equilibrium_markov(sft: Sft, phi: LocallyConstantPotential) -> MarkovMeasure:
    """Unique equilibrium state, an order-(k-1) Markov measure."""
    k = max(phi.depth, 2)
    _, _, kernel, pi = equilibrium_of_values(sft, k, phi.lifted_values(k))
    return MarkovMeasure(sft, k - 1, kernel, pi)


def pressure_gradient(
    sft: Sft,
    xi_vec: VectorPotential,
    xi0: LocallyConstantPotential | None,
    q: Sequence[float],
) -> np.ndarray:
    """Gradient in q of P(<q, Xi> + xi0), i.e. the integrals of Xi under the
    equilibrium state of that potential."""
    xi_vec = xi_vec if isinstance(xi_vec, VectorPotential) else VectorPotential.of(xi_vec)
    k = max(xi_vec.depth, xi0.depth if xi0 is not None else 1, 2)
    mat = xi_vec.matrix(k)
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    vals = q @ mat
    if xi0 is not None:
        vals = vals + xi0.lifted_values(k)
    _, mass, _, _ = equilibrium_of_values(sft, k, vals)
    return mat @ mass


# ---------------------------------------------------------------------------
# approximation from the locally constant subspace


@dataclass(frozen=True)
class SequenceFunction:
    """A function of one-sided sequences known through finite prefixes.

    ``func`` receives a prefix of length ``k + horizon`` and ``variation(j)``
    bounds the oscillation of the function on every j-cylinder.
    """

    func: Callable[[Sequence[int]], float]
    variation: Callable[[int], float]
    horizon: int = 64

    @classmethod
    def from_potential(cls, phi: LocallyConstantPotential) -> SequenceFunction:
        depth = phi.depth

        def variation(j: int) -> float:
            if j >= depth:
                return 0.0
            groups: dict[Word, list[float]] = {}
            for w, v in phi.as_dict().items():
                groups.setdefault(w[:j], []).append(v)
            return max(max(g) - min(g) for g in groups.values())

        return cls(lambda x: phi.value(x[:depth]), variation, horizon=depth)


def minimal_extension(sft: Sft, word: Sequence[int], length: int) -> tuple[int, ...]:
    """Lexicographically minimal admissible continuation of ``word``."""
    out = list(word)
    while len(out) < length:
        last = out[-1]
        out.append(next(b for b in range(sft.alphabet_size) if sft.transitions[last][b]))
    return tuple(out)


def approximate_potential(
    oracle: SequenceFunction, sft: Sft, k: int
) -> tuple[LocallyConstantPotential, float]:
    """Depth-k projection of a sequence function and its sup-error bound."""
    if k < 1:
        raise ValueError("depth must be at least 1")
    length = k + max(oracle.horizon, 0)
    values = [float(oracle.func(minimal_extension(sft, w, length))) for w in sft.words(k)]
    return LocallyConstantPotential(sft, k, np.array(values)), float(oracle.variation(k))


# ---------------------------------------------------------------------------
# finite-n cover sums


def cover_sums(sft: Sft, phi: LocallyConstantPotential, n: int) -> tuple[np.ndarray, np.ndarray]:
    """All admissible (n+k-1)-words and their Birkhoff sums S_n phi.

    Sums accumulate left to right, one window at a time.
    """
    k = phi.depth
    words = word_array(sft, n + k - 1)
    win = window_indices(sft, words, k)
    sums = np.zeros(words.shape[0])
    for i in range(n):
        sums = sums + phi.values[win[:, i]]
    return words, sums


def pressure_cover_estimate(sft: Sft, phi: LocallyConstantPotential, n: int) -> float:
    """(1/n) log of the weighted count of n-step cylinders."""
    if n < 1:
        raise ValueError("n must be at least 1")
    _, sums = cover_sums(sft, phi, n)
    return sorted_log_sum_exp(sums) / n
