"""Branching process on ``[log eps, 0] x {L, R}`` with two killing boundaries.

A particle at ``s`` with mark ``a`` has

* left children: Poisson process with intensity ``beta e^{(1-gamma) t} dt`` on
  relative positions ``t in [log eps - s, 0]``; they carry mark R;
* right children: the jump times on ``[0, -s]`` of the pure-birth process
  with rates ``gamma k + beta`` started at 0 (mark L) or 1 (mark R); they
  carry mark L.

Percolation deletes every particle, the root included, independently with
probability ``1 - p`` together with its line of descent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from ._rng import derive_seed
from .errors import ParameterError, POutOfRange, UndecidedError
from .rules import AttachmentRule

MARK_L = 0
MARK_R = 1

EXTINCT = 0
SURVIVED = 1
UNDECIDED = 2


class Mark(str, Enum):
    L = "L"
    R = "R"


@dataclass(frozen=True)
class ParticleType:
    location: float
    mark: Mark

    def __post_init__(self):
        object.__setattr__(self, "mark", Mark(self.mark))


@dataclass(frozen=True)
class IbpConfig:
    eps: float
    rule: AttachmentRule
    p: float = 1.0
    gen_cap: int = 200
    pop_cap: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ParameterError("eps must lie in (0,1)")
        if not 0 <= self.p <= 1:
            raise POutOfRange("p must lie in [0,1]")
        if self.gen_cap < 0 or self.pop_cap < 1:
            raise ParameterError("need gen_cap >= 0 and pop_cap >= 1")
        self.rule.beta  # affine rules only


@dataclass(frozen=True)
class Outcome:
    status: str
    generation: int
    population: int = 0


@dataclass(frozen=True)
class SurvivalEstimate:
    zeta_hat: float
    se: float
    censored_fraction: float
    zeta_lower: float
    zeta_upper: float
    replicas: int

    def __iter__(self):
        return iter((self.zeta_hat, self.se, self.censored_fraction))

    def to_dict(self) -> dict:
        return {"zeta_hat": self.zeta_hat, "se": self.se, "censored_fraction": self.censored_fraction,
                "zeta_lower": self.zeta_lower, "zeta_upper": self.zeta_upper, "replicas": self.replicas}


# -- jitted core --------------------------------------------------------------

@njit(cache=True)
def _push(buf_s, buf_m, n, s, m):
    if n == buf_s.shape[0]:
        new_s = np.empty(2 * n)
        new_m = np.empty(2 * n, dtype=np.int8)
        new_s[:n] = buf_s
        new_m[:n] = buf_m
        buf_s, buf_m = new_s, new_m
    buf_s[n] = s
    buf_m[n] = m
    return buf_s, buf_m, n + 1


@njit(cache=True)
def _children(s, mark, gamma, beta, log_eps, p, buf_s, buf_m, n):
    """Append the retained children of one particle; returns updated buffers and count."""
    c = 1.0 - gamma
    low = log_eps - s
    if low < 0.0:
        e_low = math.exp(c * low)
        lam = beta / c * (1.0 - e_low)
        for _ in range(np.random.poisson(lam)):
            t = math.log(e_low + np.random.random() * (1.0 - e_low)) / c
            if np.random.random() < p:
                loc = min(max(s + t, log_eps), 0.0)
                buf_s, buf_m, n = _push(buf_s, buf_m, n, loc, MARK_R)
    horizon = -s
    k = 0 if mark == MARK_L else 1
    clock = 0.0
    while horizon > 0.0:
        clock += np.random.exponential(1.0) / (gamma * k + beta)
        if clock > horizon:
            break
        k += 1
        if np.random.random() < p:
            buf_s, buf_m, n = _push(buf_s, buf_m, n, min(s + clock, 0.0), MARK_L)
    return buf_s, buf_m, n


@njit(cache=True)
def _seed(seed):
    np.random.seed(seed)


@njit(cache=True)
def _offspring_one(s, mark, gamma, beta, log_eps, seed):
    np.random.seed(seed)
    buf_s = np.empty(16)
    buf_m = np.empty(16, dtype=np.int8)
    buf_s, buf_m, n = _children(s, mark, gamma, beta, log_eps, 1.0, buf_s, buf_m, 0)
    return buf_s[:n], buf_m[:n]


@njit(cache=True)
def _run(gamma, beta, log_eps, p, gen_cap, pop_cap):
    """One percolated process from a fresh root; returns (status, generation, population)."""
    if np.random.random() >= p:
        return EXTINCT, 0, 0
    cur_s = np.empty(64)
    cur_m = np.empty(64, dtype=np.int8)
    cur_s[0] = math.log(math.exp(log_eps) + (1.0 - math.exp(log_eps)) * np.random.random())
    cur_m[0] = MARK_L
    size = 1
    gen = 0
    while True:
        if size == 0:
            return EXTINCT, gen, 0
        if size >= pop_cap:
            return SURVIVED, gen, size
        if gen >= gen_cap:
            return UNDECIDED, gen, size
        nxt_s = np.empty(max(64, 4 * size))
        nxt_m = np.empty(max(64, 4 * size), dtype=np.int8)
        m = 0
        for i in range(size):
            nxt_s, nxt_m, m = _children(cur_s[i], cur_m[i], gamma, beta, log_eps, p, nxt_s, nxt_m, m)
        cur_s, cur_m, size = nxt_s, nxt_m, m
        gen += 1


@njit(cache=True)
def _run_many(gamma, beta, log_eps, p, gen_cap, pop_cap, replicas, seed):
    np.random.seed(seed)
    status = np.empty(replicas, dtype=np.int64)
    for r in range(replicas):
        status[r] = _run(gamma, beta, log_eps, p, gen_cap, pop_cap)[0]
    return status


@njit(cache=True)
def _generation_sizes(gamma, beta, log_eps, p, gens, replicas, seed):
    """Total population of generations ``0..gens`` summed over replicas, roots uniform."""
    np.random.seed(seed)
    total = np.zeros(gens + 1)
    for r in range(replicas):
        cur_s = np.empty(64)
        cur_m = np.empty(64, dtype=np.int8)
        cur_s[0] = math.log(math.exp(log_eps) + (1.0 - math.exp(log_eps)) * np.random.random())
        cur_m[0] = MARK_L
        size = 1
        for g in range(gens + 1):
            total[g] += size
            if g == gens or size == 0:
                break
            nxt_s = np.empty(max(64, 4 * size))
            nxt_m = np.empty(max(64, 4 * size), dtype=np.int8)
            m = 0
            for i in range(size):
                nxt_s, nxt_m, m = _children(cur_s[i], cur_m[i], gamma, beta, log_eps, p, nxt_s, nxt_m, m)
            cur_s, cur_m, size = nxt_s, nxt_m, m
    return total


# -- public API -------------------------------------------------------------

def _np_seed(seed, *keys):
    return derive_seed(seed, *keys) % (2**32)


def sample_root(eps: float, seed: int = 0, u: float | None = None) -> ParticleType:
    """Root of type ``(S, L)`` with ``e^S`` uniform on ``[eps, 1]``; ``u`` overrides the draw."""
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0,1)")
    if u is None:
        u = np.random.default_rng(derive_seed(seed, 7)).random()
    x = eps + (1 - eps) * u
    return ParticleType(min(max(math.log(x), math.log(eps)), 0.0), Mark.L)


def sample_roots(eps: float, size: int, seed: int = 0) -> np.ndarray:
    """Vectorised root locations."""
    u = np.random.default_rng(derive_seed(seed, 7)).random(size)
    return np.log(eps + (1 - eps) * u)


def offspring(parent: ParticleType, rule: AttachmentRule, eps: float, seed: int = 0) -> list[ParticleType]:
    """First-generation children of ``parent`` (no percolation)."""
    log_eps = math.log(eps)
    if not log_eps <= parent.location <= 0:
        raise ParameterError("parent location outside [log eps, 0]")
    mark = MARK_L if parent.mark is Mark.L else MARK_R
    locs, marks = _offspring_one(parent.location, mark, rule.gamma, rule.beta, log_eps, _np_seed(seed, 8))
    return [ParticleType(float(s), Mark.L if m == MARK_L else Mark.R) for s, m in zip(locs, marks)]


def offspring_counts(parent: ParticleType, rule: AttachmentRule, eps: float, draws: int, seed: int = 0) -> np.ndarray:
    """Child counts ``(left, right)`` for ``draws`` independent families of ``parent``."""
    out = np.empty((draws, 2), dtype=np.int64)
    mark = MARK_L if parent.mark is Mark.L else MARK_R
    log_eps = math.log(eps)
    base = _np_seed(seed, 9)
    for i in range(draws):
        _, marks = _offspring_one(parent.location, mark, rule.gamma, rule.beta, log_eps, (base + i) % (2**32))
        out[i, 0] = int(np.sum(marks == MARK_R))
        out[i, 1] = int(np.sum(marks == MARK_L))
    return out


def simulate(config: IbpConfig, strict: bool = False) -> Outcome:
    """Run one percolated process under the population and generation caps.

    A run still alive below ``pop_cap`` at ``gen_cap`` is returned as
    ``undecided``; with ``strict`` it raises ``UndecidedError`` instead.
    """
    _seed(_np_seed(config.seed, 10))
    r = config.rule
    status, gen, pop = _run(r.gamma, r.beta, math.log(config.eps), config.p, config.gen_cap, config.pop_cap)
    if status == UNDECIDED and strict:
        raise UndecidedError(f"population {pop} at generation cap {gen}")
    name = {EXTINCT: "extinct", SURVIVED: "survived", UNDECIDED: "undecided"}[status]
    return Outcome(name, int(gen), int(pop))


def survival_probability(eps: float, rule: AttachmentRule, p: float, replicas: int,
                         caps: tuple[int, int] = (1000, 200), seed: int = 0) -> SurvivalEstimate:
    """Monte Carlo survival probability.

    ``caps = (pop_cap, gen_cap)``.  Censored runs count as extinct for
    ``zeta_lower`` (which is also ``zeta_hat``) and as survived for ``zeta_upper``.
    """
    if replicas < 1:
        raise ParameterError("replicas must be >= 1")
    cfg = IbpConfig(eps, rule, p, caps[1], caps[0], seed)
    if p == 0:
        return SurvivalEstimate(0.0, 0.0, 0.0, 0.0, 0.0, replicas)
    status = _run_many(rule.gamma, rule.beta, math.log(eps), p, cfg.gen_cap, cfg.pop_cap, int(replicas),
                       _np_seed(seed, 11))
    surv = float(np.mean(status == SURVIVED))
    cens = float(np.mean(status == UNDECIDED))
    se = math.sqrt(surv * (1 - surv) / replicas)
    return SurvivalEstimate(surv, se, cens, surv, surv + cens, replicas)


def generation_sizes(eps: float, rule: AttachmentRule, p: float, gens: int, replicas: int, seed: int = 0) -> np.ndarray:
    """Mean generation sizes ``E|X_0|, ..., E|X_gens|`` (root always kept)."""
    tot = _generation_sizes(rule.gamma, rule.beta, math.log(eps), p, gens, replicas, _np_seed(seed, 12))
    return tot / replicas
