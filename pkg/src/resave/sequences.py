"""Step-size, bandwidth and truncation schedules, plus the weight ledger.

The streaming estimator mixes each incoming observation into the running
kernel averages with step size ``gamma_scale / n`` and per-observation
bandwidth ``n ** -c1``.  After n steps the contribution of observation i is

    w_i = step_i * prod_{k=i+1..n} (1 - step_k),

and the weights always sum to ``1 - remaining_mass`` where
``remaining_mass = prod_i (1 - step_i)``.  ``WeightLedger`` tracks exactly
these quantities; everything downstream (closed-form evaluation, mass
accounting, equivalence checks) reads them from here rather than
recomputing products of its own.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SequencePlan:
    """Constants controlling the step, bandwidth and truncation sequences.

    gamma_scale  step size is gamma_scale / n (clipped to at most 1)
    c1           bandwidth exponent: h_n = n ** -c1
    c2           truncation exponent: floor_n = min(epsilon_trunc, n ** -c2)
    epsilon_trunc  cap on the truncation floor
    strict       when True, enforce the open-interval rate conditions
                 1/5 < c1 < 1/4 - 2*c2 and 1/50 < c2 < 1/25 under which the
                 asymptotic guarantees hold.  The joint interval for c1 is
                 nonempty only for c2 < 1/40, so strict mode is pickier than
                 the workhorse defaults (c1=0.2, c2=0.03), which sit on the
                 closure.  Permissive mode admits c1 = 0 (constant unit
                 bandwidth), which is what makes the equal-weight streaming
                 run reduce exactly to the batch estimator.
    """

    gamma_scale: float = 1.0
    c1: float = 0.2
    c2: float = 0.03
    epsilon_trunc: float = 0.05
    strict: bool = False

    def __post_init__(self):
        if not (self.gamma_scale > 0):
            raise ValueError(f"gamma_scale must be positive, got {self.gamma_scale}")
        if not (0.0 <= self.c1 < 1.0):
            raise ValueError(f"c1 must lie in [0, 1), got {self.c1}")
        if not (0.0 < self.c2 < 1.0):
            raise ValueError(f"c2 must lie in (0, 1), got {self.c2}")
        if not (self.epsilon_trunc > 0):
            raise ValueError(f"epsilon_trunc must be positive, got {self.epsilon_trunc}")
        if self.strict:
            if not (1 / 50 < self.c2 < 1 / 25):
                raise ValueError(f"strict mode needs 1/50 < c2 < 1/25, got c2={self.c2}")
            if not (1 / 5 < self.c1 < 1 / 4 - 2 * self.c2):
                raise ValueError(
                    f"strict mode needs 1/5 < c1 < 1/4 - 2*c2 = {1 / 4 - 2 * self.c2}, "
                    f"got c1={self.c1}"
                )


DEFAULT_PLAN = SequencePlan()


def step_size(n, plan=DEFAULT_PLAN):
    """Step size for absorbing observation number n (1-based)."""
    if n < 1:
        raise ValueError(f"observation index must be >= 1, got {n}")
    return min(plan.gamma_scale / n, 1.0)


def bandwidth(n, plan=DEFAULT_PLAN):
    """Bandwidth used when absorbing observation number n (1-based)."""
    if n < 1:
        raise ValueError(f"observation index must be >= 1, got {n}")
    return float(n) ** -plan.c1


def truncation_level(n, plan=DEFAULT_PLAN):
    """Density floor applied before forming ratios, after n observations."""
    if n < 1:
        raise ValueError(f"observation count must be >= 1, got {n}")
    return min(plan.epsilon_trunc, float(n) ** -plan.c2)


@dataclass(frozen=True)
class WeightLedger:
    """Immutable record of per-observation weights after n absorptions.

    weights[i] = step_{i+1} * prod_{k>i+1} (1 - step_k);
    remaining_mass = prod_k (1 - step_k);  sum(weights) == 1 - remaining_mass
    up to rounding.  With step 1/n all weights are equal to 1/n.
    """

    n: int
    remaining_mass: float
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def extend(self, step):
        """Ledger after one more absorption with the given step size."""
        if not (0.0 < step <= 1.0):
            raise ValueError(f"step size must lie in (0, 1], got {step}")
        new = np.empty(self.n + 1)
        np.multiply(self.weights, 1.0 - step, out=new[: self.n])
        new[self.n] = step
        return WeightLedger(self.n + 1, self.remaining_mass * (1.0 - step), new)


def empty_ledger():
    return WeightLedger(0, 1.0, np.empty(0))


def build_ledger(steps):
    """Ledger for a whole step sequence at once.

    Same weights as folding empty_ledger().extend over the steps, computed
    with one reversed cumulative product instead of n array copies.
    """
    steps = np.fromiter(steps, dtype=float)
    if steps.size == 0:
        return empty_ledger()
    if not ((steps > 0.0) & (steps <= 1.0)).all():
        raise ValueError("step sizes must lie in (0, 1]")
    survival = np.cumprod((1.0 - steps)[::-1])
    tail = np.ones_like(steps)
    tail[:-1] = survival[-2::-1]
    return WeightLedger(steps.size, float(survival[-1]), steps * tail)
