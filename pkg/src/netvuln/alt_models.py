"""Comparison models: configuration model and inhomogeneous random graphs."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from numba import njit

from ._rng import derive_seed, uniform3
from .errors import EmptyDegreeSequence, EpsOutOfRange, GammaRangeError, ParameterError, SubcriticalError
from .operator import power_iteration
from .pa_graph import VertexMask, n_removed


# -- degree laws ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DegreeLaw:
    """Law of ``D`` on ``0..len(pmf)-1``."""

    pmf: np.ndarray

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.ndim != 1 or pmf.size == 0 or np.any(pmf < 0):
            raise ParameterError("pmf must be a non-empty non-negative vector")
        if abs(pmf.sum() - 1.0) > 1e-9:
            raise ParameterError(f"pmf sums to {pmf.sum()}, not 1")
        object.__setattr__(self, "pmf", pmf / pmf.sum())
        if not self.mean > 0:
            raise ParameterError("E[D] must be positive")
        if len(pmf) > 2 and pmf[2] >= 1.0:
            raise ParameterError("P(D=2) must be < 1")

    @classmethod
    def from_dict(cls, d) -> "DegreeLaw":
        """``{"kind": "power_law", "gamma": g, "k_max": K}`` or ``{"pmf": {"k": prob, ...}}``."""
        if d.get("kind") == "power_law":
            return cls.power_law(float(d["gamma"]), int(d.get("k_max", 10**6)))
        pmf = d["pmf"]
        if isinstance(pmf, dict):
            items = {int(k): float(v) for k, v in pmf.items()}
            arr = np.zeros(max(items) + 1)
            for k, v in items.items():
                arr[k] = v
            pmf = arr
        return cls(np.asarray(pmf, dtype=float))

    @classmethod
    def from_json(cls, text: str) -> "DegreeLaw":
        return cls.from_dict(json.loads(text))

    @classmethod
    def power_law(cls, gamma: float, k_max: int = 10**6) -> "DegreeLaw":
        """``P(D >= k) = k^{-1/gamma}`` for ``1 <= k <= k_max``; the mass beyond sits at ``k_max``."""
        if not 0 < gamma < 1:
            raise ParameterError("gamma must lie in (0,1)")
        k = np.arange(k_max + 1, dtype=float)
        tail = np.zeros(k_max + 2)
        tail[1:-1] = k[1:] ** (-1.0 / gamma)
        tail[0] = 1.0
        pmf = tail[:-1] - tail[1:]
        pmf[-1] = tail[-2]
        return cls(pmf)

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.pmf)), self.pmf))

    def survival(self, k) -> np.ndarray:
        """``[1-F](k) = P(D > k)``."""
        tail = np.concatenate([1.0 - np.cumsum(self.pmf), [0.0]])
        tail = np.maximum(tail, 0.0)
        k = np.asarray(k)
        return tail[np.clip(k, 0, len(self.pmf))]

    def inverse_survival(self, u: float) -> int:
        """``inf{k : P(D > k) <= u}``."""
        sf = np.maximum(1.0 - np.cumsum(self.pmf), 0.0)
        # guard against rounding in the cumulative sum
        sf[-1] = 0.0
        return int(np.argmax(sf <= u + 1e-15))

    def sample(self, n: int, seed: int) -> np.ndarray:
        rng = np.random.default_rng(derive_seed(seed, 20))
        cdf = np.cumsum(self.pmf)
        return np.minimum(np.searchsorted(cdf, rng.random(n), side="right"), len(self.pmf) - 1)


# -- configuration model ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MultiGraph:
    """Undirected multigraph on labels 1..n; edge ``i`` joins ``a[i]`` and ``b[i]``."""

    n: int
    a: np.ndarray
    b: np.ndarray
    degrees: np.ndarray
    repaired: int | None = None

    @property
    def num_edges(self) -> int:
        return len(self.a)

    @property
    def child(self):
        return self.a

    @property
    def parent(self):
        return self.b


def cm_generate(degrees: Sequence[int], seed: int) -> MultiGraph:
    """Uniform matching of half-edges.

    An odd degree sum is repaired by giving one uniformly chosen vertex an
    extra half-edge; its label is kept in ``repaired``.
    """
    deg = np.asarray(degrees, dtype=np.int64).copy()
    if deg.size == 0:
        raise EmptyDegreeSequence("degree sequence is empty")
    if np.any(deg < 0):
        raise ParameterError("degrees must be non-negative")
    rng = np.random.default_rng(derive_seed(seed, 21))
    repaired = None
    if deg.sum() % 2:
        v = int(rng.integers(len(deg)))
        deg[v] += 1
        repaired = v + 1
    stubs = np.repeat(np.arange(1, len(deg) + 1), deg)
    rng.shuffle(stubs)
    return MultiGraph(len(deg), stubs[0::2].copy(), stubs[1::2].copy(), deg, repaired)


def cm_attack(graph: MultiGraph, eps: float) -> VertexMask:
    """Remove the ``floor(eps n)`` vertices of largest degree, smaller label first on ties."""
    if not 0 < eps < 1:
        raise EpsOutOfRange("eps must lie in (0,1)")
    n = graph.n
    k = n_removed(eps, n)
    order = np.lexsort((np.arange(1, n + 1), -graph.degrees))
    mask = VertexMask.full(n)
    mask.alive[order[:k] + 1] = False
    return VertexMask(n, mask.alive, ("cm_attack", float(eps)))


def cm_pc(law: DegreeLaw, eps: float) -> float:
    """Percolation threshold of the configuration model after removing the top ``eps`` degrees.

    ``E D / (E[D(D-1); D <= m] - m(m-1)(eps - [1-F](m)))`` with ``m = [1-F]^{-1}(eps)``.
    """
    if not 0 <= eps < 1:
        raise EpsOutOfRange("eps must lie in [0,1)")
    m = law.inverse_survival(eps)
    k = np.arange(m + 1)
    second = float(np.dot(k * (k - 1.0), law.pmf[: m + 1]))
    denom = second - m * (m - 1.0) * (eps - float(law.survival(m)))
    if denom <= 0:
        raise SubcriticalError("damaged configuration model has no giant component")
    return law.mean / denom


# -- inhomogeneous random graphs ----------------------------------------------

class KernelKind(str, Enum):
    CL = "cl"
    PA = "pa"
    CONST = "const"


@dataclass(frozen=True)
class Kernel:
    kind: KernelKind
    gamma: float = 0.5
    const: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(str(self.kind).lower()))
        if not 0 <= self.gamma < 1:
            raise ParameterError("gamma must lie in [0,1)")
        if self.kind is KernelKind.CONST and self.const <= 0:
            raise ParameterError("constant kernel must be positive")

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        g = self.gamma
        if self.kind is KernelKind.CL:
            return x ** (-g) * y ** (-g)
        if self.kind is KernelKind.PA:
            return 1.0 / (np.minimum(x, y) ** g * np.maximum(x, y) ** (1 - g))
        return np.full(np.broadcast(x, y).shape, self.const)

    @property
    def code(self) -> int:
        return {KernelKind.CL: 0, KernelKind.PA: 1, KernelKind.CONST: 2}[self.kind]


@njit(cache=True)
def _kappa(code, g, c, x, y):
    if code == 0:
        return x ** (-g) * y ** (-g)
    if code == 1:
        lo = min(x, y)
        hi = max(x, y)
        return 1.0 / (lo**g * hi ** (1.0 - g))
    return c


@njit(cache=True)
def _irg_kernel(code, g, c, n, seed):
    cap = 4 * n + 16
    a = np.empty(cap, dtype=np.int64)
    b = np.empty(cap, dtype=np.int64)
    e = 0
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            prob = min(_kappa(code, g, c, i / n, j / n) / n, 1.0)
            if uniform3(seed, i, j) < prob:
                if e == a.shape[0]:
                    a2 = np.empty(2 * e, dtype=np.int64)
                    b2 = np.empty(2 * e, dtype=np.int64)
                    a2[:e] = a
                    b2[:e] = b
                    a, b = a2, b2
                a[e] = i
                b[e] = j
                e += 1
    return a[:e], b[:e]


def irg_generate(kernel: Kernel, n: int, seed: int) -> MultiGraph:
    """Edge ``{i, j}`` present with probability ``min(kappa(i/n, j/n)/n, 1)``, each pair once."""
    if n < 2:
        raise ParameterError("n must be >= 2")
    a, b = _irg_kernel(kernel.code, kernel.gamma, kernel.const, int(n), derive_seed(seed, 22))
    deg = np.bincount(np.concatenate([a, b]), minlength=n + 1)[1:]
    return MultiGraph(int(n), a, b, deg)


def edge_probability(kernel: Kernel, i: int, j: int, n: int) -> float:
    return float(min(kernel(i / n, j / n) / n, 1.0))


def _irg_norm(kernel: Kernel, eps: float, N: int) -> float:
    h = -math.log(eps) / N
    u = math.log(eps) + (np.arange(N) + 0.5) * h
    x = np.exp(u)
    sw = np.sqrt(h * x)
    S = sw[:, None] * kernel(x[:, None], x[None, :]) * sw[None, :]
    return power_iteration(S)[0]


def irg_pc(kernel: Kernel, eps: float, N: int = 1024) -> float:
    """``1 / ||T_kappa||`` on ``L^2(eps, 1)``.

    The operator is discretised by the midpoint rule in ``log x`` and
    symmetrised; the norms at ``N`` and ``2N`` points are Richardson
    extrapolated.
    """
    if not 0 < eps < 1:
        raise EpsOutOfRange("eps must lie in (0,1)")
    if N < 16:
        raise ParameterError("N must be >= 16")
    r1 = _irg_norm(kernel, eps, N)
    r2 = _irg_norm(kernel, eps, 2 * N)
    return 1.0 / (r2 + (r2 - r1) / 3.0)


def cl_pc_closed(eps: float, gamma: float) -> float:
    """Reciprocal of ``int_eps^1 x^{-2 gamma} dx``."""
    if not 0 < eps < 1:
        raise EpsOutOfRange("eps must lie in (0,1)")
    if math.isclose(gamma, 0.5, abs_tol=1e-12):
        return 1.0 / math.log(1.0 / eps)
    return (1.0 - 2.0 * gamma) / (1.0 - eps ** (1.0 - 2.0 * gamma))


def irg_pa_bounds(eps: float, gamma: float) -> tuple[float, float]:
    """Interval for ``irg_pc(PA) / eps^{gamma - 1/2}`` when ``gamma > 1/2``."""
    if gamma <= 0.5:
        raise GammaRangeError("bounds need gamma > 1/2")
    a = 2 * gamma - 1
    e = eps**a
    inner = 1 - e + 2 * a * e * math.log(eps)
    return a / math.sqrt(2.0), a / math.sqrt(inner)
