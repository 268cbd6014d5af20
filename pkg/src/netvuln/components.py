"""Components, giant-component estimators and sampled graph distances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from ._rng import derive_seed, keyed_uniforms
from .errors import InconclusiveError, ParameterError, PZeroError, TooFewAliveError
from .pa_graph import PaGraph, VertexMask, damage, generate, n_removed
from .rules import AttachmentRule

_PERC_STREAM = 3
_PAIR_STREAM = 4


class _Unreachable:
    """Distance between vertices in different components."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "UNREACHABLE"

    def __reduce__(self):
        return (_Unreachable, ())


UNREACHABLE = _Unreachable()


@dataclass(frozen=True)
class ComponentSummary:
    sizes: np.ndarray
    largest: int
    alive_count: int


@dataclass(frozen=True)
class PcEstimate:
    p_lo: float
    p_hi: float
    method: str
    replicas: int
    n_used: int
    tau_g: float
    note: str = ""
    trace: list = field(default_factory=list, compare=False)

    def contains(self, p: float) -> bool:
        return self.p_lo <= p <= self.p_hi

    def distance_to(self, p: float) -> float:
        return max(self.p_lo - p, p - self.p_hi, 0.0)


# -- union-find -----------------------------------------------------------

@njit(cache=True)
def _find(par, x):
    root = x
    while par[root] != root:
        root = par[root]
    while par[x] != root:
        nxt = par[x]
        par[x] = root
        x = nxt
    return root


@njit(cache=True)
def _component_sizes(n, a, b, alive):
    par = np.arange(n + 1)
    size = np.ones(n + 1, dtype=np.int64)
    for i in range(a.shape[0]):
        u = a[i]
        v = b[i]
        if not (alive[u] and alive[v]):
            continue
        ru = _find(par, u)
        rv = _find(par, v)
        if ru == rv:
            continue
        if size[ru] < size[rv]:
            ru, rv = rv, ru
        par[rv] = ru
        size[ru] += size[rv]
    count = 0
    for v in range(1, n + 1):
        if alive[v] and par[v] == v:
            count += 1
    out = np.empty(count, dtype=np.int64)
    j = 0
    for v in range(1, n + 1):
        if alive[v] and par[v] == v:
            out[j] = size[v]
            j += 1
    return out


def component_sizes(n: int, a, b, alive) -> np.ndarray:
    """Sizes of the connected components of the alive subgraph of an undirected edge list."""
    return _component_sizes(int(n), np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64),
                            np.asarray(alive, dtype=np.bool_))


def largest_component(graph: PaGraph, mask: VertexMask | None = None) -> ComponentSummary:
    mask = mask if mask is not None else VertexMask.full(graph.n)
    sizes = component_sizes(graph.n, graph.child, graph.parent, mask.alive)
    largest = int(sizes.max()) if sizes.size else 0
    return ComponentSummary(np.sort(sizes)[::-1], largest, int(mask.alive_count))


# -- giant component ------------------------------------------------------

def _percolation_uniforms(seed, replica, n):
    return keyed_uniforms(derive_seed(seed, _PERC_STREAM, replica), np.arange(n + 1))


def giant_fraction(rule: AttachmentRule, n: int, eps: float, p: float, replicas: int, seed: int):
    """Mean and standard error of ``|C| / (p (n - floor(eps n)))`` over replicas.

    ``eps = 0`` means no damage.  Replica ``r`` uses graph seed
    ``derive_seed(seed, r)``; percolation uniforms are shared across ``p``.
    """
    if p == 0:
        raise PZeroError("p = 0 leaves no vertex to normalise by")
    if not 0 < p <= 1:
        raise ParameterError("p must lie in (0,1]")
    if replicas < 1:
        raise ParameterError("replicas must be >= 1")
    vals = np.empty(replicas)
    for r in range(replicas):
        g = generate(rule, n, derive_seed(seed, r))
        vals[r] = _fraction(g, eps, p, _percolation_uniforms(seed, r, n))
    return _mean_se(vals)


def _fraction(g: PaGraph, eps: float, p: float, u: np.ndarray) -> float:
    alive = damage(g, eps).alive if eps > 0 else VertexMask.full(g.n).alive
    alive = alive & (u < p)
    sizes = component_sizes(g.n, g.child, g.parent, alive)
    largest = sizes.max() if sizes.size else 0
    return largest / (p * (g.n - n_removed(eps, g.n)))


def _mean_se(vals):
    vals = np.asarray(vals, dtype=float)
    se = vals.std(ddof=1) / math.sqrt(len(vals)) if len(vals) > 1 else 0.0
    return float(vals.mean()), float(se)


class _GiantOracle:
    """Giant-component classifier with graphs cached per ``(n, replica)``."""

    def __init__(self, rule, n_schedule, eps, replicas, tau_g, seed):
        self.rule, self.eps, self.tau_g = rule, eps, tau_g
        self.n_schedule = list(n_schedule)
        self.graphs = {}
        for n in self.n_schedule:
            for r in range(replicas):
                g = generate(rule, n, derive_seed(seed, n, r))
                self.graphs[n, r] = (g, _percolation_uniforms(seed, r, n))
        self.replicas = replicas
        self.trace = []

    def stats(self, p):
        out = []
        for n in self.n_schedule:
            vals = [_fraction(g, self.eps, p, u) for (g, u) in (self.graphs[n, r] for r in range(self.replicas))]
            out.append(_mean_se(vals))
        return out

    def is_giant(self, p):
        stats = self.stats(p)
        means = [m for m, _ in stats]
        diffs = []
        for (m0, s0), (m1, s1) in zip(stats, stats[1:]):
            tol = 2.0 * math.hypot(s0, s1)
            diffs.append((m1 - m0, tol))
        self.trace.append({"p": p, "means": means, "se": [s for _, s in stats]})
        if means[-1] <= self.tau_g:
            return False
        if all(d >= -tol for d, tol in diffs):
            return True
        last_d, last_tol = diffs[-1]
        if last_d < -last_tol and any(d > tol for d, tol in diffs[:-1]):
            raise InconclusiveError(f"giant fraction rises then falls along n at p={p}")
        return False


def pc_bisect(rule: AttachmentRule, n_schedule: Sequence[int], eps: float, replicas: int,
              tau_g: float = 0.01, seed: int = 0, width: float = 2.0**-10) -> PcEstimate:
    """Bracket the percolation threshold by bisection on a finite-size giant test.

    A retention probability ``p`` counts as supercritical when the mean
    normalised largest component at the largest ``n`` exceeds ``tau_g`` and
    no step along ``n_schedule`` shows a drop beyond two standard errors.
    """
    if not 0 < tau_g < 0.5:
        raise ParameterError("tau_g must lie in (0, 0.5)")
    n_schedule = list(n_schedule)
    if not n_schedule or any(b <= a for a, b in zip(n_schedule, n_schedule[1:])):
        raise ParameterError("n_schedule must be strictly increasing")
    oracle = _GiantOracle(rule, n_schedule, eps, replicas, tau_g, seed)
    common = dict(method="MonteCarloBisect", replicas=replicas, n_used=n_schedule[-1], tau_g=tau_g)
    if not oracle.is_giant(1.0):
        return PcEstimate(1.0, 1.0, note="no giant at p=1", trace=oracle.trace, **common)
    lo, hi = 0.0, 1.0
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        try:
            giant = oracle.is_giant(mid)
        except InconclusiveError as exc:
            exc.p_lo, exc.p_hi = lo, hi
            raise
        if giant:
            hi = mid
        else:
            lo = mid
    return PcEstimate(lo, hi, trace=oracle.trace, **common)


# -- distances ------------------------------------------------------------

@njit(cache=True)
def _csr(n, a, b, alive):
    deg = np.zeros(n + 2, dtype=np.int64)
    for i in range(a.shape[0]):
        if alive[a[i]] and alive[b[i]]:
            deg[a[i] + 1] += 1
            deg[b[i] + 1] += 1
    ptr = np.cumsum(deg)
    fill = ptr[:-1].copy()
    nbr = np.empty(ptr[-1], dtype=np.int64)
    for i in range(a.shape[0]):
        u = a[i]
        v = b[i]
        if alive[u] and alive[v]:
            nbr[fill[u]] = v
            fill[u] += 1
            nbr[fill[v]] = u
            fill[v] += 1
    return ptr, nbr


@njit(cache=True)
def _bfs_pairs(n, ptr, nbr, us, vs):
    dist = np.full(n + 1, -1, dtype=np.int64)
    queue = np.empty(n + 1, dtype=np.int64)
    out = np.full(us.shape[0], -1, dtype=np.int64)
    for i in range(us.shape[0]):
        s = us[i]
        t = vs[i]
        if s == t:
            out[i] = 0
            continue
        dist[s] = 0
        queue[0] = s
        head = 0
        tail = 1
        found = -1
        while head < tail and found < 0:
            x = queue[head]
            head += 1
            for j in range(ptr[x], ptr[x + 1]):
                y = nbr[j]
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    if y == t:
                        found = dist[y]
                        break
                    queue[tail] = y
                    tail += 1
        out[i] = found
        for j in range(tail):
            dist[queue[j]] = -1
        dist[t] = -1
    return out


def sample_distances(graph: PaGraph, mask: VertexMask | None, pairs: int, seed: int):
    """Graph distances between ``pairs`` independent uniform alive vertex pairs.

    Returns a list of ``(u, v, d)`` where ``d`` is an int or ``UNREACHABLE``.
    """
    mask = mask if mask is not None else VertexMask.full(graph.n)
    labels = np.flatnonzero(mask.alive)
    if len(labels) < 2:
        raise TooFewAliveError("need at least two alive vertices")
    rng = np.random.default_rng(derive_seed(seed, _PAIR_STREAM))
    us = labels[rng.integers(0, len(labels), pairs)]
    vs = labels[rng.integers(0, len(labels), pairs)]
    return distances_between(graph, mask, us, vs)


def distances_between(graph: PaGraph, mask: VertexMask | None, us, vs):
    mask = mask if mask is not None else VertexMask.full(graph.n)
    ptr, nbr = _csr(graph.n, graph.child, graph.parent, mask.alive)
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    d = _bfs_pairs(graph.n, ptr, nbr, us, vs)
    return [(int(u), int(v), int(x) if x >= 0 else UNREACHABLE) for u, v, x in zip(us, vs, d)]


def distance_bound_violation(distances, n: int, pc_eps: float, delta: float) -> float:
    """Share of reachable pairs ``u != v`` closer than ``(1-delta) log n / log(1/pc_eps)``."""
    if not 0 < pc_eps < 1:
        raise ParameterError("pc_eps must lie in (0,1)")
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0,1)")
    bound = (1 - delta) * math.log(n) / math.log(1 / pc_eps)
    usable = [d for u, v, d in distances if u != v and d is not UNREACHABLE]
    if not usable:
        return 0.0
    return sum(d < bound for d in usable) / len(usable)
