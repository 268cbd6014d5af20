"""Indegree laws: jump-process tails, limiting distributions, empirical histograms."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import integrate, special

from ._rng import derive_seed
from .errors import EpsOutOfRange, ParameterError, QuadratureTolError
from .pa_graph import PaGraph, VertexMask
from .rules import AttachmentRule, RuleKind

QUAD_TOL = 1e-8


@dataclass(frozen=True)
class DegreeDistribution:
    """Tail ``mu_{>=k}`` for ``k = 0..k_max``."""

    tail: np.ndarray
    gamma: float
    beta: float
    eps: float | None = None

    @property
    def kind(self) -> str:
        return "undamaged" if self.eps is None else "damaged"

    @property
    def k_max(self) -> int:
        return len(self.tail) - 1

    @property
    def pmf(self) -> np.ndarray:
        """``mu({k})`` for ``k < k_max``; the last entry holds the remaining tail mass."""
        return np.append(-np.diff(self.tail), self.tail[-1])


@dataclass(frozen=True)
class JumpProcessSpec:
    """Pure-birth process with rate ``f(k)`` in state ``k``, started at ``start`` in {0, 1}."""

    rule: AttachmentRule
    start: int = 0

    def __post_init__(self):
        if self.start not in (0, 1):
            raise ParameterError("start must be 0 or 1")


def _check_gb(gamma, beta):
    if not 0 < gamma < 1:
        raise ParameterError("gamma must lie in (0,1)")
    if beta <= 0:
        raise ParameterError("beta must be positive")


# -- closed forms -----------------------------------------------------------

def incomplete_beta_sum(a: float, c: float, k: int, method: str = "auto") -> float:
    """``sum_{i=0}^k C(k,i) (-a)^i / (i + c)``.

    Equal to ``a^{-c} int_0^a x^{c-1} (1-x)^k dx``.  ``method`` is one of
    ``"sum"`` (direct, cancellation-prone for large ``k``), ``"quad"``
    (numerical integral) or ``"beta"`` (regularised incomplete beta, ``a <= 1``);
    ``"auto"`` picks the sum for ``k <= 20`` and a stable form otherwise.
    """
    if a <= 0 or c <= 0:
        raise ParameterError("need a > 0 and c > 0")
    if k < 0:
        raise ParameterError("k must be non-negative")
    if method == "auto":
        method = "sum" if k <= 20 else ("beta" if a <= 1 else "quad")
    if method == "sum":
        return math.fsum(math.comb(k, i) * (-a) ** i / (i + c) for i in range(k + 1))
    if method == "beta":
        if a > 1:
            raise ParameterError("beta form needs a <= 1")
        return float(special.betainc(c, k + 1, a) * math.exp(special.betaln(c, k + 1) - c * math.log(a)))
    if method == "quad":
        val, err = integrate.quad(lambda x: (1.0 - x) ** k, 0.0, a, weight="alg", wvar=(c - 1.0, 0.0),
                                  epsabs=0.0, epsrel=1e-13, limit=200)
        return val * a ** (-c)
    raise ParameterError(f"unknown method {method!r}")


def jump_tail(t: float, k: int, gamma: float, beta: float) -> float:
    """``P(Z_t >= k+1)`` for the affine jump process started at 0."""
    _check_gb(gamma, beta)
    if t < 0 or k < 0:
        raise ParameterError("need t >= 0 and k >= 0")
    return float(special.betainc(k + 1, beta / gamma, -math.expm1(-gamma * t)))


def mu_undamaged(gamma: float, beta: float, k_max: int) -> DegreeDistribution:
    """``mu_{>=k} = B(k + beta/gamma, 1/gamma) / B(beta/gamma, 1/gamma)``."""
    _check_gb(gamma, beta)
    b = beta / gamma
    k = np.arange(k_max + 1)
    tail = np.exp(special.betaln(k + b, 1 / gamma) - special.betaln(b, 1 / gamma))
    return DegreeDistribution(tail, gamma, beta)


def mu_damaged(eps: float, gamma: float, beta: float, k_max: int, tol: float = QUAD_TOL) -> DegreeDistribution:
    """Limiting indegree tail of vertices surviving the removal of the oldest ``eps`` share.

    ``mu_{>=k} = (1-eps)^{-1} int_eps^1 I_{1-y^gamma}(k, beta/gamma) dy`` for
    ``k >= 1`` and ``mu_{>=0} = 1``.  Each value is computed to relative
    accuracy ``tol``.
    """
    if not 0 < eps < 1:
        raise EpsOutOfRange("eps must lie in (0,1)")
    _check_gb(gamma, beta)
    if beta > 1:
        raise ParameterError("degree theory assumes beta <= 1")
    b = beta / gamma
    tail = np.empty(k_max + 1)
    tail[0] = 1.0
    for k in range(1, k_max + 1):
        val, err = integrate.quad(lambda y: special.betainc(k, b, 1.0 - y**gamma), eps, 1.0,
                                  epsabs=0.0, epsrel=tol * 0.1, limit=500)
        if not err <= tol * abs(val) + 1e-300:
            raise QuadratureTolError(f"k={k}: error estimate {err:.3g} above tolerance")
        tail[k] = val / (1.0 - eps)
    return DegreeDistribution(tail, gamma, beta, eps)


def tail_slope(dist: DegreeDistribution, k_lo: int, k_hi: int) -> float:
    """Least-squares slope of ``log mu_{>=k}`` against ``k`` on ``[k_lo, k_hi]``."""
    k = np.arange(k_lo, k_hi + 1)
    return float(np.polyfit(k, np.log(dist.tail[k]), 1)[0])


def max_indegree_constant(eps: float, gamma: float) -> float:
    """``-1 / log(1 - eps^gamma)``, the growth constant of the maximal indegree over ``log n``."""
    if not 0 < eps < 1:
        raise EpsOutOfRange("eps must lie in (0,1)")
    if not 0 < gamma < 1:
        raise ParameterError("gamma must lie in (0,1)")
    return -1.0 / math.log1p(-(eps**gamma))


# -- empirical ------------------------------------------------------------

def empirical_indegree(graph: PaGraph, mask: VertexMask | None = None) -> np.ndarray:
    """Normalised histogram ``X_k`` of final indegrees over alive vertices."""
    mask = mask if mask is not None else VertexMask.full(graph.n)
    deg = graph.indegree[mask.alive]
    if deg.size == 0:
        return np.zeros(1)
    return np.bincount(deg).astype(float) / deg.size


def max_indegree(graph: PaGraph, mask: VertexMask | None = None) -> int:
    mask = mask if mask is not None else VertexMask.full(graph.n)
    deg = graph.indegree[mask.alive]
    return int(deg.max()) if deg.size else 0


def total_variation(dist: DegreeDistribution, x: np.ndarray) -> float:
    """Total variation between ``dist`` and an empirical pmf ``x`` on the integers."""
    mu = -np.diff(dist.tail)
    size = max(len(mu), len(x))
    a = np.zeros(size)
    b = np.zeros(size)
    a[: len(mu)] = mu
    b[: len(x)] = x
    # mass of mu beyond k_max is unresolved; count it as disjoint from x
    return 0.5 * (float(np.abs(a - b).sum()) + float(dist.tail[-1]))


def write_degree_csv(path, dist: DegreeDistribution, x: np.ndarray) -> None:
    mu = dist.pmf
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "mu_theory", "x_empirical", "abs_diff"])
        for k in range(max(len(mu), len(x))):
            m = mu[k] if k < len(mu) else 0.0
            e = x[k] if k < len(x) else 0.0
            w.writerow([k, repr(float(m)), repr(float(e)), repr(abs(float(m) - float(e)))])


# -- jump process -----------------------------------------------------------

@njit(cache=True)
def _jump_counts(table, gamma, tail, start, t, runs, seed):
    np.random.seed(seed)
    out = np.empty(runs, dtype=np.int64)
    for r in range(runs):
        k = start
        clock = 0.0
        while True:
            if k < table.shape[0]:
                rate = table[k]
            else:
                rate = gamma * k + tail
            clock += np.random.exponential(1.0) / rate
            if clock > t:
                break
            k += 1
        out[r] = k - start
    return out


def _exponentials(seed, size):
    return np.random.default_rng(derive_seed(seed, 5)).standard_exponential(size)


def simulate_jump_process(spec: JumpProcessSpec, t: float, seed: int) -> np.ndarray:
    """Jump times in ``[0, t]``; waiting time in state ``k`` is ``E_i / f(k)``.

    The standard exponentials ``E_0, E_1, ...`` depend only on ``seed``, so
    the two start values are coupled with ``start=1`` dominating ``start=0``
    whenever ``f`` is non-decreasing.
    """
    if t < 0:
        raise ParameterError("t must be non-negative")
    times = []
    clock = 0.0
    k = spec.start
    block = 64
    i = 0
    exps = _exponentials(seed, block)
    while True:
        if i == len(exps):
            exps = np.concatenate([exps, np.random.default_rng(derive_seed(seed, 5, len(exps))).standard_exponential(len(exps))])
        clock += exps[i] / spec.rule(k)
        i += 1
        if clock > t:
            break
        times.append(clock)
        k += 1
    return np.array(times)


def jump_counts(spec: JumpProcessSpec, t: float, runs: int, seed: int) -> np.ndarray:
    """Number of jumps in ``[0, t]`` for ``runs`` independent paths."""
    if t < 0:
        raise ParameterError("t must be non-negative")
    table, gamma, tail = spec.rule.numba_params()
    return _jump_counts(table, gamma, tail, spec.start, float(t), int(runs), derive_seed(seed, 6) % (2**32))
