"""Subshifts of finite type, admissible words, locally constant potentials,
Birkhoff sums and Markov measures.

Words are tuples of integer symbols.  Every admissible set of words is kept
in lexicographic order so that arrays of potential values line up with
``Sft.words(k)`` without any extra bookkeeping.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DepthMismatch, EmptyRow, NotIrreducible, ResourceLimit

Word = tuple

DEFAULT_MAX_WORDS = 2**24
ROW_TOL = 1e-12
STATIONARY_TOL = 1e-10


def max_words() -> int:
    """Enumeration cap, read from ``MFSPEC_MAX_WORDS`` at call time."""
    raw = os.environ.get("MFSPEC_MAX_WORDS")
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_WORDS
    cap = int(raw)
    if cap < 1:
        raise ValueError("MFSPEC_MAX_WORDS must be positive")
    return cap


# ---------------------------------------------------------------------------
# shift spaces


@dataclass(frozen=True)
class Sft:
    transitions: tuple[tuple[bool, ...], ...]
    period: int
    labels: tuple[str, ...]

    @property
    def alphabet_size(self) -> int:
        return len(self.transitions)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.transitions, dtype=bool)

    def allowed(self, a: int, b: int) -> bool:
        return self.transitions[a][b]

    def is_admissible(self, word: Sequence[int]) -> bool:
        m = self.alphabet_size
        if any(not 0 <= s < m for s in word):
            return False
        return all(self.transitions[a][b] for a, b in zip(word, word[1:]))

    def words(self, k: int) -> tuple[Word, ...]:
        """Admissible k-words in lexicographic order (cached)."""
        return _admissible_words(self.transitions, k)

    def index(self, k: int) -> dict[Word, int]:
        return _word_index(self.transitions, k)

    def word(self, w: str | Sequence[int]) -> Word:
        """Parse a word given as a label string or a symbol sequence."""
        if isinstance(w, str):
            lookup = {lab: i for i, lab in enumerate(self.labels)}
            if all(len(lab) == 1 for lab in self.labels):
                try:
                    return tuple(lookup[c] for c in w)
                except KeyError as exc:
                    raise ValueError(f"unknown symbol in word {w!r}") from exc
            raise ValueError("string words need single-character labels")
        return tuple(int(s) for s in w)

    def format_word(self, w: Sequence[int]) -> str:
        return "".join(self.labels[s] for s in w)


def validate_sft(matrix, labels: Sequence[str] | None = None) -> Sft:
    """Check a 0/1 transition matrix and build the shift space.

    Raises EmptyRow when a symbol has no successor and NotIrreducible when
    some state cannot reach another one.
    """
    arr = np.asarray(matrix)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError("transition matrix must be square with m >= 1")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("transition matrix entries must be 0 or 1")
    a = arr.astype(bool)
    m = a.shape[0]
    for i in range(m):
        if not a[i].any():
            raise EmptyRow(f"symbol {i} has no successor")
    for i in range(m):
        if not a[:, i].any():
            raise NotIrreducible(f"symbol {i} has no predecessor")
    reach = _reachable(a, 0)
    coreach = _reachable(a.T, 0)
    if not (reach.all() and coreach.all()):
        missing = int(np.flatnonzero(~(reach & coreach))[0])
        raise NotIrreducible(f"symbols 0 and {missing} do not communicate")
    if labels is None:
        labels = tuple(str(i) for i in range(m))
    labels = tuple(str(x) for x in labels)
    if len(labels) != m or len(set(labels)) != m:
        raise ValueError("labels must be distinct, one per symbol")
    trans = tuple(tuple(bool(x) for x in row) for row in a)
    return Sft(trans, _period(a), labels)


def _reachable(a: np.ndarray, start: int) -> np.ndarray:
    seen = np.zeros(a.shape[0], dtype=bool)
    seen[start] = True
    frontier = [start]
    while frontier:
        nxt = []
        for v in frontier:
            for w in np.flatnonzero(a[v]):
                if not seen[w]:
                    seen[w] = True
                    nxt.append(int(w))
        frontier = nxt
    return seen


def _period(a: np.ndarray) -> int:
    m = a.shape[0]
    level = [-1] * m
    level[0] = 0
    queue = [0]
    for v in queue:
        for w in np.flatnonzero(a[v]):
            if level[w] < 0:
                level[w] = level[v] + 1
                queue.append(int(w))
    g = 0
    for u in range(m):
        for v in np.flatnonzero(a[u]):
            g = math.gcd(g, abs(level[u] + 1 - level[v]))
    return g


# ---------------------------------------------------------------------------
# words


def count_words(sft: Sft, n: int) -> int:
    """Exact number of admissible n-words (integer arithmetic)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 1
    m = sft.alphabet_size
    counts = [1] * m
    for _ in range(n - 1):
        counts = [sum(counts[b] for b in range(m) if sft.transitions[a][b]) for a in range(m)]
    return sum(counts)


def _check_cap(sft: Sft, n: int) -> int:
    total = count_words(sft, n)
    cap = max_words()
    if total > cap:
        raise ResourceLimit(f"{total} admissible {n}-words exceed the cap {cap}")
    return total


@lru_cache(maxsize=256)
def _admissible_words(transitions: tuple, k: int) -> tuple[Word, ...]:
    if k < 0:
        raise ValueError("word length must be nonnegative")
    m = len(transitions)
    words: list[Word] = [()]
    for step in range(k):
        nxt = []
        for w in words:
            if step == 0:
                nxt.extend((b,) for b in range(m))
            else:
                last = w[-1]
                nxt.extend(w + (b,) for b in range(m) if transitions[last][b])
        words = nxt
    return tuple(words)


@lru_cache(maxsize=256)
def _word_index(transitions: tuple, k: int) -> dict[Word, int]:
    return {w: i for i, w in enumerate(_admissible_words(transitions, k))}


def enumerate_words(sft: Sft, n: int) -> list[Word]:
    """All admissible words of length n in lexicographic order."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    _check_cap(sft, n)
    if n <= 12:
        return list(sft.words(n))
    return [tuple(int(s) for s in row) for row in word_array(sft, n)]


def word_array(sft: Sft, n: int) -> np.ndarray:
    """Admissible n-words as rows of an integer array, lexicographic order."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    _check_cap(sft, n)
    m = sft.alphabet_size
    if n == 0:
        return np.zeros((1, 0), dtype=np.int16)
    a = sft.matrix
    outdeg = a.sum(axis=1)
    width = int(outdeg.max())
    succ = np.zeros((m, width), dtype=np.int16)
    mask = np.zeros((m, width), dtype=bool)
    for i in range(m):
        s = np.flatnonzero(a[i])
        succ[i, : len(s)] = s
        mask[i, : len(s)] = True
    arr = np.arange(m, dtype=np.int16).reshape(m, 1)
    for _ in range(n - 1):
        last = arr[:, -1]
        rows = np.repeat(arr, outdeg[last], axis=0)
        appended = succ[last][mask[last]]
        arr = np.concatenate([rows, appended.reshape(-1, 1)], axis=1)
    return arr


def _encode(words: np.ndarray, m: int) -> np.ndarray:
    code = np.zeros(words.shape[0], dtype=np.int64)
    for j in range(words.shape[1]):
        code = code * m + words[:, j]
    return code


def window_indices(sft: Sft, words: np.ndarray, k: int) -> np.ndarray:
    """Index into ``sft.words(k)`` of every length-k window of every row."""
    m = sft.alphabet_size
    # lexicographic order of words is numeric order of their base-m codes
    keys = _encode(np.array(sft.words(k), dtype=np.int64).reshape(-1, k), m)
    n_windows = words.shape[1] - k + 1
    out = np.empty((words.shape[0], n_windows), dtype=np.int64)
    for i in range(n_windows):
        out[:, i] = np.searchsorted(keys, _encode(words[:, i : i + k], m))
    return out


@lru_cache(maxsize=256)
def _prefix_map(transitions: tuple, k: int, j: int) -> np.ndarray:
    """For each admissible k-word, the index of its j-prefix."""
    idx = _word_index(transitions, j)
    return np.array([idx[w[:j]] for w in _admissible_words(transitions, k)], dtype=np.int64)


@lru_cache(maxsize=256)
def block_edges(transitions: tuple, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Source and target k-block of every admissible (k+1)-word."""
    idx = _word_index(transitions, k)
    words = _admissible_words(transitions, k + 1)
    src = np.array([idx[w[:-1]] for w in words], dtype=np.int64)
    dst = np.array([idx[w[1:]] for w in words], dtype=np.int64)
    return src, dst


def sorted_log_sum_exp(sums: np.ndarray) -> float:
    """log of sum(exp(sums)) with terms added in ascending order.

    The summation order is fixed so that two implementations enumerating the
    same multiset of Birkhoff sums agree bit for bit.
    """
    sums = np.sort(np.asarray(sums, dtype=np.float64))
    if sums.size == 0:
        return -math.inf
    top = float(sums[-1])
    terms = np.exp(sums - top)
    total = float(np.cumsum(terms)[-1])
    return top + math.log(total)


# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True, eq=False)
class LocallyConstantPotential:
    """Real function of the first ``depth`` symbols of a sequence.

    ``values[i]`` is the value on ``sft.words(depth)[i]``.
    """

    sft: Sft
    depth: int
    values: np.ndarray

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be at least 1")
        vals = np.array(self.values, dtype=np.float64).reshape(-1)
        if vals.shape[0] != len(self.sft.words(self.depth)):
            raise ValueError("need exactly one value per admissible word")
        if not np.all(np.isfinite(vals)):
            raise ValueError("potential values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    # constructors
    @classmethod
    def from_mapping(cls, sft: Sft, depth: int, mapping: Mapping) -> LocallyConstantPotential:
        words = sft.words(depth)
        parsed = {sft.word(k): float(v) for k, v in mapping.items()}
        extra = set(parsed) - set(words)
        if extra:
            raise ValueError(f"values given for non-admissible words: {sorted(extra)}")
        missing = [w for w in words if w not in parsed]
        if missing:
            raise ValueError(f"missing values for words: {missing}")
        return cls(sft, depth, np.array([parsed[w] for w in words]))

    @classmethod
    def from_function(cls, sft: Sft, depth: int, f: Callable[[Word], float]) -> LocallyConstantPotential:
        return cls(sft, depth, np.array([f(w) for w in sft.words(depth)], dtype=np.float64))

    @classmethod
    def constant(cls, sft: Sft, c: float = 0.0, depth: int = 1) -> LocallyConstantPotential:
        return cls(sft, depth, np.full(len(sft.words(depth)), float(c)))

    @classmethod
    def symbol_values(cls, sft: Sft, per_symbol: Sequence[float]) -> LocallyConstantPotential:
        """Depth-1 potential taking ``per_symbol[a]`` on the cylinder [a]."""
        return cls(sft, 1, np.array(per_symbol, dtype=np.float64))

    @classmethod
    def indicator(cls, sft: Sft, symbol: int) -> LocallyConstantPotential:
        return cls.from_function(sft, 1, lambda w: 1.0 if w[0] == symbol else 0.0)

    # evaluation
    def value(self, word: Sequence[int]) -> float:
        w = tuple(word)
        if len(w) < self.depth:
            raise DepthMismatch(f"word of length {len(w)} shorter than depth {self.depth}")
        return float(self.values[self.sft.index(self.depth)[w[: self.depth]]])

    def as_dict(self) -> dict[Word, float]:
        return dict(zip(self.sft.words(self.depth), self.values.tolist()))

    def lift(self, k: int) -> LocallyConstantPotential:
        """Constant extension to depth k >= depth."""
        if k < self.depth:
            raise DepthMismatch(f"cannot lift depth {self.depth} down to {k}")
        if k == self.depth:
            return self
        return LocallyConstantPotential(self.sft, k, self.lifted_values(k))

    def lifted_values(self, k: int) -> np.ndarray:
        if k == self.depth:
            return self.values
        if k < self.depth:
            raise DepthMismatch(f"cannot lift depth {self.depth} down to {k}")
        return self.values[_prefix_map(self.sft.transitions, k, self.depth)]

    def birkhoff_sum(self, word: Sequence[int], n: int | None = None) -> float:
        """Exact S_n on the cylinder of ``word``; terms summed left to right."""
        w = tuple(word)
        if n is None:
            n = len(w) - self.depth + 1
        if n < 0 or len(w) < n + self.depth - 1:
            raise DepthMismatch(f"word length {len(w)} < n + k - 1 = {n + self.depth - 1}")
        idx = self.sft.index(self.depth)
        total = 0.0
        for i in range(n):
            total = total + float(self.values[idx[w[i : i + self.depth]]])
        return total

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def minimum(self) -> float:
        return float(self.values.min())

    @property
    def maximum(self) -> float:
        return float(self.values.max())

    # arithmetic, always on a common depth
    def _binary(self, other, op) -> LocallyConstantPotential:
        if isinstance(other, LocallyConstantPotential):
            if other.sft != self.sft:
                raise ValueError("potentials live on different shifts")
            k = max(self.depth, other.depth)
            return LocallyConstantPotential(self.sft, k, op(self.lifted_values(k), other.lifted_values(k)))
        return LocallyConstantPotential(self.sft, self.depth, op(self.values, float(other)))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return LocallyConstantPotential(self.sft, self.depth, -self.values)

    def __mul__(self, c: float):
        return LocallyConstantPotential(self.sft, self.depth, self.values * float(c))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"LocallyConstantPotential(depth={self.depth}, values={self.values.tolist()})"


Potential = LocallyConstantPotential


@dataclass(frozen=True, eq=False)
class VectorPotential:
    """d potentials lifted to one common depth."""

    components: tuple[LocallyConstantPotential, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a vector potential needs d >= 1 components")
        sft = comps[0].sft
        if any(c.sft != sft for c in comps):
            raise ValueError("components live on different shifts")
        k = max(c.depth for c in comps)
        object.__setattr__(self, "components", tuple(c.lift(k) for c in comps))

    @classmethod
    def of(cls, *pots) -> VectorPotential:
        if len(pots) == 1 and isinstance(pots[0], VectorPotential):
            return pots[0]
        if len(pots) == 1 and isinstance(pots[0], (list, tuple)):
            pots = tuple(pots[0])
        return cls(tuple(pots))

    @classmethod
    def constant(cls, sft: Sft, d: int, c: float = 1.0) -> VectorPotential:
        return cls(tuple(LocallyConstantPotential.constant(sft, c) for _ in range(d)))

    @property
    def sft(self) -> Sft:
        return self.components[0].sft

    @property
    def d(self) -> int:
        return len(self.components)

    @property
    def depth(self) -> int:
        return self.components[0].depth

    def __len__(self) -> int:
        return self.d

    def __getitem__(self, i: int) -> LocallyConstantPotential:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def matrix(self, k: int | None = None) -> np.ndarray:
        """(d, #k-words) array of values at depth k (default: own depth)."""
        k = self.depth if k is None else k
        return np.vstack([c.lifted_values(k) for c in self.components])

    def lift(self, k: int) -> VectorPotential:
        return VectorPotential(tuple(c.lift(k) for c in self.components))

    def dot(self, q: Sequence[float]) -> LocallyConstantPotential:
        q = np.asarray(q, dtype=np.float64).reshape(-1)
        if q.shape[0] != self.d:
            raise ValueError(f"q has {q.shape[0]} entries, expected {self.d}")
        return LocallyConstantPotential(self.sft, self.depth, q @ self.matrix())

    def level(self, psi: VectorPotential, alpha: Sequence[float]) -> VectorPotential:
        """Componentwise self - alpha * psi."""
        alpha = np.asarray(alpha, dtype=np.float64).reshape(-1)
        if psi.d != self.d or alpha.shape[0] != self.d:
            raise ValueError("dimension mismatch between potentials and alpha")
        return VectorPotential(tuple(c - a * p for c, p, a in zip(self.components, psi.components, alpha)))


def as_vector(x) -> VectorPotential:
    if isinstance(x, VectorPotential):
        return x
    if isinstance(x, LocallyConstantPotential):
        return VectorPotential((x,))
    return VectorPotential.of(*x)


def common_depth(*items) -> int:
    k = 1
    for it in items:
        if it is not None:
            k = max(k, it.depth)
    return k


def birkhoff_ratio(phi, psi, word: Sequence[int], n: int | None = None) -> tuple[float | None, ...]:
    """Componentwise S_n phi_i / S_n psi_i on the cylinder of ``word``.

    A component is ``None`` when its denominator vanishes.
    """
    phi, psi = as_vector(phi), as_vector(psi)
    if phi.d != psi.d:
        raise ValueError("phi and psi must have the same dimension")
    k = max(phi.depth, psi.depth)
    w = tuple(word)
    if n is None:
        n = len(w) - k + 1
    if n < 1 or len(w) < n + k - 1:
        raise DepthMismatch(f"need a word of length n + k - 1 = {n + k - 1}, got {len(w)}")
    out: list[float | None] = []
    for f, g in zip(phi, psi):
        num = _exact_sum(f.lift(k), w, n)
        den = _exact_sum(g.lift(k), w, n)
        out.append(None if den == 0.0 else num / den)
    return tuple(out)


def _exact_sum(f: LocallyConstantPotential, w: Word, n: int) -> float:
    idx = f.sft.index(f.depth)
    return math.fsum(float(f.values[idx[w[i : i + f.depth]]]) for i in range(n))


# ---------------------------------------------------------------------------
# Markov measures


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    """Shift-invariant Markov measure on the order-k block graph.

    States are admissible k-words; ``kernel[i, j]`` is the probability of
    moving from block i to block j, nonzero only when j extends i.
    """

    sft: Sft
    order: int
    kernel: np.ndarray
    stationary: np.ndarray

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be a positive integer")
        n = len(self.sft.words(self.order))
        p = np.array(self.kernel, dtype=np.float64)
        pi = np.array(self.stationary, dtype=np.float64).reshape(-1)
        if p.shape != (n, n) or pi.shape != (n,):
            raise ValueError("kernel/stationary shape does not match the block count")
        if np.any(p < 0) or np.any(pi < -STATIONARY_TOL):
            raise ValueError("probabilities must be nonnegative")
        src, dst = block_edges(self.sft.transitions, self.order)
        allowed = np.zeros((n, n), dtype=bool)
        allowed[src, dst] = True
        if np.any(p[~allowed] != 0):
            raise ValueError("kernel charges a forbidden transition")
        if np.max(np.abs(p.sum(axis=1) - 1.0)) > ROW_TOL:
            raise ValueError("kernel rows must sum to 1")
        if abs(pi.sum() - 1.0) > STATIONARY_TOL or np.max(np.abs(pi @ p - pi)) > STATIONARY_TOL:
            raise ValueError("stationary vector is not invariant")
        pi = np.clip(pi, 0.0, None)
        for arr in (p, pi):
            arr.setflags(write=False)
        object.__setattr__(self, "kernel", p)
        object.__setattr__(self, "stationary", pi)

    @classmethod
    def from_kernel(cls, sft: Sft, order: int, kernel) -> MarkovMeasure:
        p = np.asarray(kernel, dtype=np.float64)
        return cls(sft, order, p, stationary_vector(p))

    @classmethod
    def bernoulli(cls, sft: Sft, probs: Sequence[float]) -> MarkovMeasure:
        probs = np.asarray(probs, dtype=np.float64)
        m = sft.alphabet_size
        if probs.shape != (m,) or abs(probs.sum() - 1.0) > ROW_TOL:
            raise ValueError("probs must be a probability vector over the alphabet")
        kernel = np.tile(probs, (m, 1))
        return cls(sft, 1, kernel, probs.copy())

    def edge_probabilities(self) -> np.ndarray:
        """Measure of every admissible (order+1)-word."""
        src, dst = block_edges(self.sft.transitions, self.order)
        return self.stationary[src] * self.kernel[src, dst]

    def lift(self, order: int) -> MarkovMeasure:
        """Same measure written on longer blocks."""
        if order < self.order:
            raise DepthMismatch("cannot lower the order of a Markov measure")
        if order == self.order:
            return self
        k = self.order
        tr = self.sft.transitions
        idx = _word_index(tr, k)
        blocks = _admissible_words(tr, order)
        weights = []
        for w in blocks:
            val = self.stationary[idx[w[:k]]]
            for t in range(order - k):
                val *= self.kernel[idx[w[t : t + k]], idx[w[t + 1 : t + k + 1]]]
            weights.append(val)
        src, dst = block_edges(tr, order)
        words = _admissible_words(tr, order + 1)
        kernel = np.zeros((len(blocks), len(blocks)))
        for e, w in enumerate(words):
            kernel[src[e], dst[e]] = self.kernel[idx[w[order - k : order]], idx[w[order - k + 1 :]]]
        return MarkovMeasure(self.sft, order, kernel, np.array(weights))


def stationary_vector(kernel: np.ndarray) -> np.ndarray:
    """Unique stationary distribution of an irreducible stochastic matrix."""
    p = np.asarray(kernel, dtype=np.float64)
    n = p.shape[0]
    a = np.eye(n) - p.T + np.ones((n, n))
    pi = np.linalg.solve(a, np.ones(n))
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def markov_stats(mu: MarkovMeasure, phi: LocallyConstantPotential) -> tuple[float, float]:
    """Entropy of ``mu`` and the integral of ``phi`` against it."""
    if phi.depth > mu.order + 1:
        mu = mu.lift(phi.depth - 1)
    k = mu.order
    src, dst = block_edges(mu.sft.transitions, k)
    probs = mu.kernel[src, dst]
    mass = mu.stationary[src] * probs
    pos = probs > 0
    entropy = -float(np.sum(mass[pos] * np.log(probs[pos])))
    integral = float(np.dot(mass, phi.lifted_values(k + 1)))
    return entropy, integral


def integrate(mu: MarkovMeasure, pots: Iterable[LocallyConstantPotential]) -> np.ndarray:
    return np.array([markov_stats(mu, p)[1] for p in pots])
