"""Cycle statistics on the block graph of a shift.

Extreme integrals of a locally constant potential over invariant measures
are attained on simple cycles of the block graph, so means, ratios and
zero-cycle checks all reduce to graph algorithms: Karp's maximum cycle mean,
a tight-edge subgraph for recovering optimal cycles, and Dinkelbach's
iteration for cycle ratios.  Ties are broken by shortest cycle, then by
the lexicographically smallest rotation of its symbol sequence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .symbolic import Sft, block_edges

NEG = -math.inf


@dataclass(frozen=True, eq=False)
class BlockGraph:
    """Vertices are (k-1)-blocks, edges are admissible k-words (k >= 2)."""

    sft: Sft
    k: int
    nv: int
    src: np.ndarray
    dst: np.ndarray
    first_symbol: np.ndarray

    @property
    def ne(self) -> int:
        return self.src.shape[0]


@dataclass(frozen=True)
class Cycle:
    edges: tuple[int, ...]
    symbols: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.edges)

    def mean(self, values: np.ndarray) -> float:
        return math.fsum(float(values[e]) for e in self.edges) / len(self.edges)

    def total(self, values: np.ndarray) -> float:
        return math.fsum(float(values[e]) for e in self.edges)

    def label(self, sft: Sft) -> str:
        return sft.format_word(self.symbols)


def block_graph(sft: Sft, k: int) -> BlockGraph:
    return _block_graph(sft, max(k, 2))


@lru_cache(maxsize=64)
def _block_graph(sft: Sft, k: int) -> BlockGraph:
    src, dst = block_edges(sft.transitions, k - 1)
    blocks = sft.words(k - 1)
    first = np.array([b[0] for b in blocks], dtype=np.int64)
    return BlockGraph(sft, k, len(blocks), src, dst, first)


def _karp_table(g: BlockGraph, w: np.ndarray, mask: np.ndarray) -> np.ndarray:
    n = g.nv
    src, dst, wm = g.src[mask], g.dst[mask], w[mask]
    table = np.full((n + 1, n), NEG)
    table[0] = 0.0
    for j in range(1, n + 1):
        np.maximum.at(table[j], dst, table[j - 1][src] + wm)
    return table


def max_cycle_mean(g: BlockGraph, w: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Largest mean of ``w`` over cycles using only edges in ``mask``."""
    mask = np.ones(g.ne, dtype=bool) if mask is None else mask
    if not mask.any():
        return NEG
    table = _karp_table(g, w, mask)
    n = g.nv
    best = NEG
    for v in range(n):
        if table[n, v] == NEG:
            continue
        worst = math.inf
        for j in range(n):
            if table[j, v] != NEG:
                worst = min(worst, (table[n, v] - table[j, v]) / (n - j))
        best = max(best, worst)
    return best


def _tight_mask(g: BlockGraph, w: np.ndarray, lam: float, mask: np.ndarray) -> np.ndarray:
    """Edges lying on cycles of mean ``lam`` (up to rounding)."""
    shifted = w - lam
    table = _karp_table(g, shifted, mask)
    h = table.max(axis=0)
    scale = 1.0 + float(np.max(np.abs(w[mask]))) if mask.any() else 1.0
    tol = 1e-10 * scale * max(g.nv, 1)
    slack = h[g.dst] - (h[g.src] + shifted)
    ok = np.isfinite(h[g.src]) & np.isfinite(h[g.dst])
    return mask & ok & (np.abs(slack) <= tol)


def shortest_cycle(g: BlockGraph, mask: np.ndarray) -> Cycle | None:
    """Canonical shortest cycle inside the edge subgraph ``mask``."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(g.nv)]
    for e in np.flatnonzero(mask):
        adj[int(g.src[e])].append((int(g.dst[e]), int(e)))
    for lst in adj:
        lst.sort()
    best: tuple | None = None
    for s in range(g.nv):
        parent: dict[int, tuple[int, int]] = {}
        seen = {s}
        queue = [s]
        found = None
        for v in queue:
            for w, e in adj[v]:
                if w == s:
                    found = (v, e)
                    break
                if w not in seen:
                    seen.add(w)
                    parent[w] = (v, e)
                    queue.append(w)
            if found:
                break
        if not found:
            continue
        v, e = found
        edges = [e]
        while v != s:
            v, pe = parent[v]
            edges.append(pe)
        edges.reverse()
        cyc = _canonical(g, edges)
        key = (len(cyc.edges), cyc.symbols)
        if best is None or key < best[0]:
            best = (key, cyc)
    return None if best is None else best[1]


def _canonical(g: BlockGraph, edges: list[int]) -> Cycle:
    syms = [int(g.first_symbol[g.src[e]]) for e in edges]
    n = len(edges)
    rot = min(range(n), key=lambda i: tuple(syms[i:] + syms[:i]))
    return Cycle(tuple(edges[rot:] + edges[:rot]), tuple(syms[rot:] + syms[:rot]))


def optimal_cycle(g: BlockGraph, w: np.ndarray, mask: np.ndarray | None = None):
    """(max mean, canonical cycle attaining it) or (-inf, None)."""
    mask = np.ones(g.ne, dtype=bool) if mask is None else mask
    lam = max_cycle_mean(g, w, mask)
    if lam == NEG:
        return NEG, None
    cyc = shortest_cycle(g, _tight_mask(g, w, lam, mask))
    if cyc is None:
        return lam, None
    return cyc.mean(w), cyc


def min_cycle(g: BlockGraph, w: np.ndarray, mask: np.ndarray | None = None):
    val, cyc = optimal_cycle(g, -w, mask)
    return -val, cyc


def zero_mean_mask(g: BlockGraph, w: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    """Edges on cycles of mean zero when zero is the minimum cycle mean."""
    mask = np.ones(g.ne, dtype=bool) if mask is None else mask
    return _tight_mask(g, -w, 0.0, mask)


def has_cycle(g: BlockGraph, mask: np.ndarray) -> bool:
    return max_cycle_mean(g, np.zeros(g.ne), mask) > NEG


@dataclass(frozen=True)
class RatioExtreme:
    value: float
    cycle: Cycle | None


def max_cycle_ratio(g: BlockGraph, num: np.ndarray, den: np.ndarray, tol: float = 1e-12) -> RatioExtreme | None:
    """Supremum of sum(num)/sum(den) over invariant measures.

    Requires nonnegative cycle means for ``den``.  Returns +inf when a
    zero-``den`` cycle carries positive ``num``; None when every cycle has
    zero ``den``.
    """
    scale = 1.0 + float(np.max(np.abs(num))) + float(np.max(np.abs(den)))
    dmin, _ = min_cycle(g, den)
    if dmin <= tol * scale:
        zmask = zero_mean_mask(g, den)
        nmax, ncyc = optimal_cycle(g, num, zmask)
        if nmax > tol * scale:
            return RatioExtreme(math.inf, ncyc)
    dmax, start = optimal_cycle(g, den)
    if start is None or dmax <= tol * scale:
        return None
    lam = start.total(num) / start.total(den)
    for _ in range(500):
        val, cyc = optimal_cycle(g, num - lam * den)
        if cyc is None or val <= tol * scale:
            break
        d = cyc.total(den)
        if d <= 0:
            break
        new = cyc.total(num) / d
        if new <= lam:
            break
        lam = new
    tight = _tight_mask(g, num - lam * den, 0.0, np.ones(g.ne, dtype=bool))
    cyc = _ratio_cycle(g, num, den, lam, tight, scale * tol)
    if cyc is not None:
        lam = cyc.total(num) / cyc.total(den)
    return RatioExtreme(lam, cyc)


def _ratio_cycle(g, num, den, lam, tight, tol):
    # cycles in the tight subgraph all have ratio lam unless their den sum is
    # zero; drop such zero cycles by restricting to edges off zero-den loops
    cyc = shortest_cycle(g, tight)
    if cyc is not None and cyc.total(den) > tol:
        return cyc
    keep = tight.copy()
    for e in np.flatnonzero(tight):
        if abs(den[e]) <= tol and g.src[e] == g.dst[e]:
            keep[e] = False
    cyc = shortest_cycle(g, keep)
    if cyc is not None and cyc.total(den) > tol:
        return cyc
    return None


def min_cycle_ratio(g: BlockGraph, num: np.ndarray, den: np.ndarray, tol: float = 1e-12) -> RatioExtreme | None:
    res = max_cycle_ratio(g, -num, den, tol)
    if res is None:
        return None
    return RatioExtreme(-res.value + 0.0, res.cycle)
