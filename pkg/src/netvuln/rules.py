"""Attachment rules f: N_0 -> (0, inf).

A rule is stored as a finite table ``f(0..K-1)`` followed by an affine
tail ``gamma * k + tail_intercept`` for ``k >= K``.  Affine rules have an
empty table and ``tail_intercept == beta``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import AffineRuleError, GammaZeroError, ParameterError

PROBE_RANGE = 10**6
_SLACK = 1e-9


class RuleKind(str, Enum):
    AFFINE = "affine"
    LCLASS = "lclass"
    CCLASS = "cclass"


@dataclass(frozen=True)
class AttachmentRule:
    kind: RuleKind
    gamma: float
    tail_intercept: float
    table: tuple = field(default=())
    beta_lower: float | None = None
    beta_upper: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", RuleKind(self.kind))
        object.__setattr__(self, "table", tuple(float(v) for v in self.table))
        if not (0.0 <= self.gamma < 1.0):
            raise ParameterError(f"gamma must lie in [0,1), got {self.gamma}")
        if self.kind is RuleKind.AFFINE and self.table:
            raise ParameterError("affine rules carry no table")
        if self.kind is RuleKind.LCLASS:
            if self.beta_lower is None or self.beta_upper is None:
                raise ParameterError("L-class rules need beta_lower and beta_upper")
            if not 0 < self.beta_lower <= self.beta_upper:
                raise ParameterError("need 0 < beta_lower <= beta_upper")
        self.validate()

    # -- constructors -------------------------------------------------
    @classmethod
    def affine(cls, gamma: float, beta: float) -> "AttachmentRule":
        return cls(RuleKind.AFFINE, float(gamma), float(beta))

    @classmethod
    def from_function(
        cls,
        fn: Callable[[int], float],
        gamma: float,
        kind: str = "cclass",
        k_max: int = 10_000,
        tail_intercept: float | None = None,
        beta_lower: float | None = None,
        beta_upper: float | None = None,
    ) -> "AttachmentRule":
        """Tabulate ``fn`` on ``0..k_max``; beyond, continue with slope ``gamma``.

        The default tail intercept makes the tail start at ``f(k_max) + gamma``,
        which keeps a concave table concave.
        """
        table = [float(fn(k)) for k in range(k_max + 1)]
        if tail_intercept is None:
            tail_intercept = table[-1] - gamma * k_max
        return cls(RuleKind(kind), float(gamma), float(tail_intercept), tuple(table),
                   beta_lower, beta_upper)

    # -- evaluation ---------------------------------------------------
    @property
    def beta(self) -> float:
        if self.kind is not RuleKind.AFFINE:
            raise AffineRuleError("beta is defined for affine rules only")
        return self.tail_intercept

    def __call__(self, k):
        if np.isscalar(k):
            return evaluate(self, int(k))
        k = np.asarray(k, dtype=np.int64)
        out = self.gamma * k + self.tail_intercept
        if self.table:
            tab = np.asarray(self.table)
            inside = k < len(tab)
            out = np.where(inside, tab[np.minimum(k, len(tab) - 1)], out)
        return out.astype(np.float64)

    def numba_params(self):
        """(table, gamma, tail_intercept) as consumed by the jitted kernels."""
        return np.asarray(self.table, dtype=np.float64), float(self.gamma), float(self.tail_intercept)

    # -- invariants ---------------------------------------------------
    def validate(self, probe: int = PROBE_RANGE) -> None:
        """Check the class invariants on ``k = 0..probe``."""
        k = np.arange(probe + 1)
        f = self(k)
        if not np.all(f > 0):
            raise ParameterError("attachment rule must be strictly positive")
        if self.kind is RuleKind.LCLASS:
            lo = self.gamma * k + self.beta_lower
            hi = self.gamma * k + self.beta_upper
            if np.any(f < lo - _SLACK) or np.any(f > hi + _SLACK):
                raise ParameterError("L-class rule leaves its affine envelope")
        elif self.kind is RuleKind.CCLASS:
            inc = np.diff(f)
            tol = _SLACK * (1.0 + np.abs(f[1:]))
            if np.any(np.diff(inc) > tol[1:]):
                raise ParameterError("C-class rule must be concave")
            if np.any(inc < self.gamma - tol):
                raise ParameterError("C-class increments must stay >= gamma")

    def is_nondecreasing(self, probe: int = PROBE_RANGE) -> bool:
        return bool(np.all(np.diff(self(np.arange(probe + 1))) >= -_SLACK))

    # -- serialisation ------------------------------------------------
    def to_dict(self) -> dict:
        if self.kind is RuleKind.AFFINE:
            return {"kind": "affine", "gamma": self.gamma, "beta": self.tail_intercept}
        d = {"kind": self.kind.value, "gamma": self.gamma, "table": list(self.table),
             "tail_intercept": self.tail_intercept}
        if self.kind is RuleKind.LCLASS:
            d["beta_lower"] = self.beta_lower
            d["beta_upper"] = self.beta_upper
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "AttachmentRule":
        kind = RuleKind(d["kind"])
        if kind is RuleKind.AFFINE:
            return cls.affine(d["gamma"], d["beta"])
        return cls(kind, float(d["gamma"]), float(d["tail_intercept"]), tuple(d["table"]),
                   d.get("beta_lower"), d.get("beta_upper"))

    @classmethod
    def from_json(cls, text: str) -> "AttachmentRule":
        return cls.from_dict(json.loads(text))


def evaluate(rule: AttachmentRule, k: int) -> float:
    if k < 0:
        raise ParameterError("indegree must be non-negative")
    if k < len(rule.table):
        return rule.table[k]
    return rule.gamma * k + rule.tail_intercept


def affine_sandwich(rule: AttachmentRule, pivot: int = 0) -> tuple[AttachmentRule, AttachmentRule]:
    """Affine rules ``lower <= f <= upper``.

    L-class rules use their declared envelope.  For C-class rules the lower
    bound is ``gamma*k + f(0)`` and the upper bound is the chord through
    ``f(pivot)``, ``f(pivot+1)`` extended linearly; it touches ``f`` at the pivot.
    """
    if rule.kind is RuleKind.AFFINE:
        raise AffineRuleError("sandwich of an affine rule is the rule itself")
    if rule.kind is RuleKind.LCLASS:
        return (AttachmentRule.affine(rule.gamma, rule.beta_lower),
                AttachmentRule.affine(rule.gamma, rule.beta_upper))
    if pivot < 0:
        raise ParameterError("pivot must be non-negative")
    f0 = evaluate(rule, 0)
    slope = evaluate(rule, pivot + 1) - evaluate(rule, pivot)
    if slope >= 1:
        raise ParameterError(f"chord slope {slope:.4g} at pivot {pivot} is >= 1; choose a larger pivot")
    intercept = evaluate(rule, pivot) - slope * pivot
    return AttachmentRule.affine(rule.gamma, f0), AttachmentRule.affine(slope, intercept)


def power_law_exponent(rule: AttachmentRule) -> float:
    if rule.gamma == 0:
        raise GammaZeroError("degree tail is not a power law when gamma = 0")
    return (rule.gamma + 1.0) / rule.gamma


def pointwise_ordered(rules: Sequence[AttachmentRule], probe: int = PROBE_RANGE) -> bool:
    k = np.arange(probe + 1)
    vals = [r(k) for r in rules]
    return all(np.all(a <= b + _SLACK * (1 + np.abs(b))) for a, b in zip(vals, vals[1:]))

