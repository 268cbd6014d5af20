"""Mean-offspring operator of the two-boundary branching process.

For a particle at location ``s`` in ``[log eps, 0]`` with mark ``a`` the
operator acts as

    (A g)(s, a) = int_{log eps}^{s} g(t, R) beta e^{(1-gamma)(t-s)} dt
                + int_{s}^{0}       g(t, L) c_a  e^{gamma (t-s)} dt,

with ``c_L = beta`` and ``c_R = gamma + beta``.  It is discretised by the
composite midpoint rule on ``N`` uniform cells per mark; the cell that
contains the kernel's jump gets half weight, which keeps the scheme
second order so Richardson extrapolation over ``N`` and ``2N`` applies.

Index layout of the ``2N x 2N`` matrix: rows/columns ``0..N-1`` carry mark
L, ``N..2N-1`` mark R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, GammaRangeError, NoConvergenceError, ParameterError

MAX_GRID = 4096
MAX_ITER = 100_000


@dataclass(frozen=True)
class OperatorGrid:
    eps: float
    gamma: float
    beta: float
    N: int
    nodes: np.ndarray
    weights: np.ndarray
    kernel: np.ndarray
    simple: bool = False

    @property
    def size(self) -> int:
        return self.kernel.shape[0]

    def scaled(self, p: float) -> "OperatorGrid":
        """Grid of the percolated operator ``A_p = p A``."""
        return replace(self, kernel=p * self.kernel)


@dataclass(frozen=True)
class SpectralResult:
    rho: float
    residual: float
    N_used: int
    extrapolated: bool
    rho_base: float = float("nan")
    rho_companion: float = float("nan")
    iterations: int = 0
    eigenvector: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {"rho": self.rho, "residual": self.residual, "N_used": self.N_used,
                "extrapolated": self.extrapolated, "rho_base": self.rho_base,
                "rho_companion": self.rho_companion, "iterations": self.iterations}


def _check(eps, gamma, beta, N):
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0,1)")
    if not 0 <= gamma < 1:
        raise ParameterError("gamma must lie in [0,1)")
    if beta <= 0:
        raise ParameterError("beta must be positive")
    if N < 8:
        raise ParameterError("grid needs N >= 8 cells")
    if N > MAX_GRID:
        raise ParameterError(f"grid capped at N = {MAX_GRID}")


def assemble(eps: float, gamma: float, beta: float, N: int) -> OperatorGrid:
    _check(eps, gamma, beta, N)
    h = -math.log(eps) / N
    s = math.log(eps) + (np.arange(N) + 0.5) * h
    d = s[None, :] - s[:, None]  # column location minus row location
    below = np.tril(np.ones((N, N)), -1) + 0.5 * np.eye(N)
    above = below.T
    left = beta * h * np.exp((1.0 - gamma) * d) * below
    right = h * np.exp(gamma * d) * above
    del d
    M = np.empty((2 * N, 2 * N))
    M[:N, N:] = left
    M[N:, N:] = left
    M[:N, :N] = beta * right
    M[N:, :N] = (gamma + beta) * right
    return OperatorGrid(eps, gamma, beta, N, s, np.full(N, h), M)


def assemble_companion(eps: float, N: int) -> OperatorGrid:
    """Mark-free comparison operator for gamma = 1/2 with kernel ``e^{(t-s)/2}``."""
    _check(eps, 0.5, 1.0, N)
    h = -math.log(eps) / N
    s = math.log(eps) + (np.arange(N) + 0.5) * h
    M = h * np.exp(0.5 * (s[None, :] - s[:, None]))
    return OperatorGrid(eps, 0.5, 1.0, N, s, np.full(N, h), M, simple=True)


def apply(grid: OperatorGrid, g) -> np.ndarray:
    g = np.asarray(g, dtype=np.float64)
    if g.shape != (grid.size,):
        raise DimensionMismatch(f"expected vector of length {grid.size}, got {g.shape}")
    return grid.kernel @ g


def power_iteration(M: np.ndarray, tol: float = 1e-12, max_iter: int = MAX_ITER):
    """Dominant eigenpair of a non-negative matrix, started from the ones vector.

    Returns ``(rho, v, residual, iterations)`` with ``max(v) == 1``.
    """
    v = np.ones(M.shape[0])
    rho = 0.0
    for it in range(1, max_iter + 1):
        w = M @ v
        new = float(np.max(np.abs(w)))
        if new == 0.0:
            raise NoConvergenceError("operator annihilated the iterate")
        v = w / new
        if abs(new - rho) < tol * new:
            rho = new
            resid = float(np.max(np.abs(M @ v - rho * v)))
            return rho, v, resid, it
        rho = new
    raise NoConvergenceError(f"power iteration did not converge in {max_iter} steps")


def _rebuild(grid: OperatorGrid, N: int) -> OperatorGrid:
    if grid.simple:
        fresh = assemble_companion(grid.eps, N)
    else:
        fresh = assemble(grid.eps, grid.gamma, grid.beta, N)
    # carry any p-scaling of the original grid over to the companion grid
    ref = assemble_companion(grid.eps, grid.N) if grid.simple else None
    scale = _scale_factor(grid, ref)
    return fresh if scale == 1.0 else fresh.scaled(scale)


def _scale_factor(grid: OperatorGrid, ref: OperatorGrid | None) -> float:
    if ref is None:
        # the (L, R) entry of the first row is beta*h/2 in an unscaled grid
        base = grid.beta * grid.weights[0] * 0.5
        return float(grid.kernel[0, grid.N] / base)
    return float(grid.kernel[0, 0] / ref.kernel[0, 0])


def spectral_radius(grid: OperatorGrid, tol: float = 1e-12, extrapolate: bool = True) -> SpectralResult:
    """Spectral radius of the discretised operator.

    With ``extrapolate`` a second grid (``2N`` cells, or ``N/2`` when ``2N``
    would exceed the storage cap) is solved and the two values are combined
    by Richardson extrapolation for an ``O(h^2)`` scheme.
    """
    rho, v, resid, its = power_iteration(grid.kernel, tol)
    if not extrapolate:
        return SpectralResult(rho, resid, grid.N, False, rho, float("nan"), its, v)
    other_N = 2 * grid.N if 2 * grid.N <= MAX_GRID else grid.N // 2
    if other_N < 8:
        return SpectralResult(rho, resid, grid.N, False, rho, float("nan"), its, v)
    rho2 = power_iteration(_rebuild(grid, other_N).kernel, tol)[0]
    fine, coarse = (rho2, rho) if other_N > grid.N else (rho, rho2)
    ratio = max(other_N, grid.N) / min(other_N, grid.N)
    rho_ext = fine + (fine - coarse) / (ratio**2 - 1.0)
    return SpectralResult(rho_ext, resid, max(other_N, grid.N), True, rho, rho2, its, v)


def pc_spectral(eps: float, gamma: float, beta: float, N: int = 1024, tol: float = 1e-12) -> float:
    """Critical retention probability ``min(1/rho, 1)`` of the damaged network."""
    rho = spectral_radius(assemble(eps, gamma, beta, N), tol).rho
    return min(1.0 / rho, 1.0)


def pc_bounds(eps: float, gamma: float, beta: float) -> tuple[float, float]:
    """Analytic interval containing ``1/rho`` for ``gamma >= 1/2``."""
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0,1)")
    if math.isclose(gamma, 0.5, abs_tol=1e-12):
        L = math.log(1.0 / eps)
        return 1.0 / ((gamma + beta) * L), 1.0 / (beta * L)
    if gamma < 0.5:
        raise GammaRangeError("analytic bounds need gamma >= 1/2")
    lead = (2 * gamma - 1) / math.sqrt(beta * (gamma + beta)) * eps ** (gamma - 0.5)
    x = math.log(eps ** (1 - 2 * gamma)) * eps ** (gamma - 0.5)
    return lead / math.sqrt(1 + x + x * x), lead / (1 - eps ** (gamma - 0.5))


def pc_leading_order(eps: float, gamma: float, beta: float) -> float:
    return (2 * gamma - 1) / math.sqrt(beta * (gamma + beta)) * eps ** (gamma - 0.5)


def two_bump(grid: OperatorGrid) -> np.ndarray:
    """Trial eigenfunction: ``e^{-gamma s}`` bump on the left half, ``e^{-(1-gamma) s}`` on the right.

    Mark weights are 1 for R and ``beta/(gamma+beta)`` for L on the left half;
    the right half carries ``sqrt(beta/(gamma+beta)) * sqrt(eps) * e^{-(1-gamma)s}``.
    """
    if grid.simple:
        raise ParameterError("two-bump function needs the marked operator")
    e, g, b, s = grid.eps, grid.gamma, grid.beta, grid.nodes
    left = s <= math.log(e) / 2
    bump_left = e**g * np.exp(-g * s)
    bump_right = math.sqrt(b / (g + b)) * math.sqrt(e) * np.exp(-(1 - g) * s)
    mark_L = np.where(left, b / (g + b) * bump_left, bump_right)
    mark_R = np.where(left, bump_left, bump_right)
    return np.concatenate([mark_L, mark_R])


def two_bump_factor(eps: float, gamma: float, beta: float) -> float:
    """Pointwise lower growth factor of the operator on the two-bump function."""
    return (math.sqrt(beta * (gamma + beta)) / (2 * gamma - 1)
            * eps ** (-gamma + 0.5) * (1 - eps ** (gamma - 0.5)))
