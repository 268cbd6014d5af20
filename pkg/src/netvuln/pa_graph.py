"""Preferential-attachment dynamics, targeted damage and vertex percolation.

At time ``j`` (``j`` vertices present) the new vertex ``j+1`` links to each
old vertex ``m <= j`` independently with probability
``min(f(indeg_j(m)) / j, 1)``.  Given its own indegree, the chain of parent
``m`` does not depend on any other parent, so the graph is built parent by
parent.  For parent ``m`` at indegree ``k`` from time ``a`` on, the
probability of no edge in times ``a..b`` is

    prod_{j=a}^{b} (1 - q/j) = Gamma(b+1-q) Gamma(a) / (Gamma(a-q) Gamma(b+1)),  q = f(k) < a,

so the next edge time is an exact inverse-CDF draw (binary search over
``b``).  This costs ``O(log n)`` per edge instead of ``O(n)`` per vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from numba import njit

from ._rng import derive_seed, keyed_uniforms, uniform3, uniform4
from .errors import EpsOutOfRange, ParameterError, POutOfRange, UnorderedRulesError
from .rules import AttachmentRule, pointwise_ordered

EDGE_HEADER = "# netvuln edges v1 n={n}"
MASK_HEADER = "# netvuln mask v1"

# stream labels so that generation, thinning and percolation never share draws
_GEN_STREAM = 1
_THIN_STREAM = 2


@dataclass(frozen=True, eq=False)
class PaGraph:
    """Edges ``child -> parent`` with ``child > parent``, labels 1..n.

    ``child`` and ``parent`` are sorted by child, then parent.  ``indegree``
    has length ``n + 1``; entry 0 is unused.
    """

    n: int
    child: np.ndarray
    parent: np.ndarray
    indegree: np.ndarray

    @property
    def num_edges(self) -> int:
        return len(self.child)

    @property
    def edges(self) -> np.ndarray:
        return np.column_stack([self.child, self.parent])

    def edge_set(self) -> set:
        return set(zip(self.child.tolist(), self.parent.tolist()))

    def __eq__(self, other):
        return (isinstance(other, PaGraph) and self.n == other.n
                and np.array_equal(self.child, other.child)
                and np.array_equal(self.parent, other.parent))


@dataclass(frozen=True, eq=False)
class VertexMask:
    """Alive flags by label (index 0 unused, always False)."""

    n: int
    alive: np.ndarray
    provenance: tuple = ("full",)

    @classmethod
    def full(cls, n: int) -> "VertexMask":
        alive = np.ones(n + 1, dtype=bool)
        alive[0] = False
        return cls(n, alive)

    @property
    def alive_count(self) -> int:
        return int(self.alive.sum())

    def __and__(self, other: "VertexMask") -> "VertexMask":
        if self.n != other.n:
            raise ParameterError("masks of different sizes")
        return VertexMask(self.n, self.alive & other.alive, ("composite", self.provenance, other.provenance))

    def __eq__(self, other):
        return isinstance(other, VertexMask) and self.n == other.n and np.array_equal(self.alive, other.alive)


# -- generation ---------------------------------------------------------

@njit(cache=True, inline="always")
def _f(k, table, gamma, tail):
    if k < table.shape[0]:
        return table[k]
    return gamma * k + tail


@njit(cache=True, inline="always")
def _log_survival(a, b, q):
    return math.lgamma(b + 1.0 - q) - math.lgamma(a - q) - math.lgamma(b + 1.0) + math.lgamma(a)


@njit(cache=True)
def _grow(arr):
    out = np.empty(2 * arr.shape[0], dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def _generate_kernel(n, table, gamma, tail, seed):
    cap = max(16, 4 * n)
    child = np.empty(cap, dtype=np.int64)
    parent = np.empty(cap, dtype=np.int64)
    indeg = np.zeros(n + 1, dtype=np.int64)
    e = 0
    last = n - 1  # last time step; edge at time j goes to child j+1
    for m in range(1, n):
        k = 0
        a = m
        draw = 0
        while a <= last:
            q = _f(k, table, gamma, tail)
            if q >= a:
                b = a
            else:
                logu = math.log(uniform3(seed, m, draw))
                draw += 1
                if _log_survival(a, last, q) >= logu:
                    break
                lo, hi = a, last
                while lo < hi:
                    mid = (lo + hi) // 2
                    if _log_survival(a, mid, q) < logu:
                        hi = mid
                    else:
                        lo = mid + 1
                b = lo
            if e == child.shape[0]:
                child = _grow(child)
                parent = _grow(parent)
            child[e] = b + 1
            parent[e] = m
            e += 1
            k += 1
            a = b + 1
        indeg[m] = k
    return child[:e], parent[:e], indeg


def _finish(n, child, parent, indeg) -> PaGraph:
    order = np.lexsort((parent, child))
    return PaGraph(n, np.ascontiguousarray(child[order]), np.ascontiguousarray(parent[order]), indeg)


def generate(rule: AttachmentRule, n: int, seed: int) -> PaGraph:
    """Random graph ``G_n`` under attachment rule ``rule``; deterministic in ``seed``."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    table, gamma, tail = rule.numba_params()
    c, p, d = _generate_kernel(int(n), table, gamma, tail, derive_seed(seed, _GEN_STREAM))
    return _finish(int(n), c, p, d)


@njit(cache=True)
def _thin_kernel(child, parent, table_lo, g_lo, c_lo, table_up, g_up, c_up, seed, level):
    """Keep each upper edge with probability ``p_lo / p_up``; edges arrive parent-major."""
    keep = np.zeros(child.shape[0], dtype=np.bool_)
    cur = -1
    z_lo = 0
    z_up = 0
    for i in range(child.shape[0]):
        if parent[i] != cur:
            cur = parent[i]
            z_lo = 0
            z_up = 0
        j = child[i] - 1
        p_up = min(_f(z_up, table_up, g_up, c_up) / j, 1.0)
        p_lo = min(_f(z_lo, table_lo, g_lo, c_lo) / j, 1.0)
        if uniform4(seed, child[i], parent[i], level) * p_up < p_lo:
            keep[i] = True
            z_lo += 1
        z_up += 1
    return keep


def coupled_generate(rules: Sequence[AttachmentRule], n: int, seed: int, probe: int = 10**5) -> list[PaGraph]:
    """Graphs for pointwise ordered rules ``f_1 <= f_2 <= ...`` with nested edge sets.

    The top rule is sampled directly; each lower graph keeps an edge of the
    graph above it with probability ``p_lower / p_upper`` evaluated at the two
    graphs' current indegrees.  Each graph then has exactly its own law, and
    ``E_1 subset E_2 subset ...`` holds surely.
    """
    rules = list(rules)
    if not rules:
        return []
    if not pointwise_ordered(rules, probe):
        raise UnorderedRulesError("rules are not pointwise ordered")
    if not all(r.is_nondecreasing(probe) for r in rules):
        raise UnorderedRulesError("coupling needs non-decreasing rules")
    if n < 1:
        raise ParameterError("n must be >= 1")
    table, gamma, tail = rules[-1].numba_params()
    c, p, _ = _generate_kernel(int(n), table, gamma, tail, derive_seed(seed, _GEN_STREAM))
    layers = [(c, p)]
    for level in range(len(rules) - 2, -1, -1):
        c_up, p_up = layers[0]
        keep = _thin_kernel(c_up, p_up, *rules[level].numba_params(), *rules[level + 1].numba_params(),
                            derive_seed(seed, _THIN_STREAM, level), level)
        layers.insert(0, (c_up[keep], p_up[keep]))
    out = []
    for c, p in layers:
        indeg = np.bincount(p, minlength=n + 1).astype(np.int64)
        out.append(_finish(int(n), c, p, indeg))
    return out


def indegree_path(graph: PaGraph, m: int, times) -> np.ndarray:
    """Indegree of vertex ``m`` at the given times (graph sizes)."""
    arrivals = np.sort(graph.child[graph.parent == m])
    return np.searchsorted(arrivals, np.asarray(times), side="right")


# -- masks --------------------------------------------------------------

def n_removed(eps: float, n: int) -> int:
    """``floor(eps * n)`` evaluated exactly on the decimal value of ``eps``."""
    return int(Fraction(repr(float(eps))) * n)


def damage(graph: PaGraph | int, eps: float) -> VertexMask:
    """Kill labels ``1..floor(eps n)``."""
    n = graph if isinstance(graph, int) else graph.n
    if not 0 < eps < 1:
        raise EpsOutOfRange(f"eps must lie in (0,1), got {eps}")
    mask = VertexMask.full(n)
    mask.alive[1 : n_removed(eps, n) + 1] = False
    return VertexMask(n, mask.alive, ("damage", float(eps)))


def percolate(target: PaGraph | VertexMask, p: float, seed: int) -> VertexMask:
    """Retain each alive vertex independently with probability ``p``.

    Vertex ``v`` survives iff ``U(seed, v) < p``, so masks for the same seed
    are nested in ``p``.
    """
    if not 0 <= p <= 1:
        raise POutOfRange(f"p must lie in [0,1], got {p}")
    base = VertexMask.full(target.n) if isinstance(target, PaGraph) else target
    u = keyed_uniforms(seed, np.arange(base.n + 1))
    alive = base.alive & (u < p)
    return VertexMask(base.n, alive, ("percolation", float(p), int(seed), base.provenance))


# -- file formats -------------------------------------------------------

def write_edges(graph: PaGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(EDGE_HEADER.format(n=graph.n) + "\n")
        if graph.num_edges:
            np.savetxt(fh, graph.edges, fmt="%d", delimiter="\t")


def read_edges(path) -> PaGraph:
    with open(path) as fh:
        head = fh.readline().strip()
        if not head.startswith("# netvuln edges v1 n="):
            raise ParameterError(f"not a netvuln edge file: {head!r}")
        n = int(head.split("n=")[1])
        data = np.loadtxt(fh, dtype=np.int64, delimiter="\t", ndmin=2)
    if data.size == 0:
        data = np.empty((0, 2), dtype=np.int64)
    child, parent = data[:, 0].copy(), data[:, 1].copy()
    if np.any(child <= parent) or np.any(parent < 1) or np.any(child > n):
        raise ParameterError("edge file violates child > parent >= 1")
    return _finish(n, child, parent, np.bincount(parent, minlength=n + 1).astype(np.int64))


def write_mask(mask: VertexMask, path) -> None:
    labels = np.arange(1, mask.n + 1)
    with open(path, "w") as fh:
        fh.write(MASK_HEADER + "\n")
        np.savetxt(fh, np.column_stack([labels, mask.alive[1:].astype(int)]), fmt="%d", delimiter="\t")


def read_mask(path) -> VertexMask:
    with open(path) as fh:
        head = fh.readline().strip()
        if head != MASK_HEADER:
            raise ParameterError(f"not a netvuln mask file: {head!r}")
        data = np.loadtxt(fh, dtype=np.int64, delimiter="\t", ndmin=2)
    n = len(data)
    alive = np.zeros(n + 1, dtype=bool)
    alive[data[:, 0]] = data[:, 1] != 0
    return VertexMask(n, alive, ("file",))
