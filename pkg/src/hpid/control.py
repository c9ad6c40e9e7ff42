"""Linear and homogeneous PID step evaluators with explicit integral state.

The linear law is u = kp*e + kd*de + ki * integral(e).  The homogeneous
variant modulates each action by powers of a homogeneous norm nu of the
error pair (e, de):

    u = kp * nu^{2 mu} * e + kd * nu^{mu} * de + ki * integral(nu^{3 mu} e)

with degree mu in (-0.5, 0.5) and the dilation diag(e^{(1-mu)s}, e^s).
Setting mu = 0 recovers the linear PID output exactly.  For mu < 0 the norm
powers blow up at the origin, so nu is clamped from below at a configurable
floor; this bounds actuation near the set point at the cost of the idealized
finite-time law in an O(floor) neighbourhood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .homogeneity import Dilation, HomNormSpec, WeightedSumNorm, error_pair_dilation, norm_evaluator

__all__ = ["GainSet", "HpidState", "pid_step", "hpid_step", "reset"]


@dataclass(frozen=True)
class GainSet:
    """Signed PID gains (kp, kd, ki)."""

    kp: float
    kd: float
    ki: float

    def __post_init__(self):
        for name in ("kp", "kd", "ki"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"gain {name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    def a_matrix(self) -> np.ndarray:
        """Closed-loop matrix of the extended linear system (mu = 0)."""
        return np.array([[0.0, 1.0, 0.0], [self.kp, self.kd, 1.0], [self.ki, 0.0, 0.0]])

    def routh_hurwitz_failures(self) -> list[str]:
        """Failed stability conditions for lambda^3 - kd lambda^2 - kp lambda - ki.

        Empty list means the closed-loop matrix is Hurwitz.
        """
        failures = []
        if not -self.kd > 0.0:
            failures.append(f"-kd > 0 (lambda^2 coefficient), got -kd = {-self.kd}")
        if not -self.ki > 0.0:
            failures.append(f"-ki > 0 (constant coefficient), got -ki = {-self.ki}")
        if not self.kd * self.kp + self.ki > 0.0:
            failures.append(f"kd*kp + ki > 0 (Routh pivot), got {self.kd * self.kp + self.ki}")
        return failures

    def is_stabilizing(self) -> bool:
        return not self.routh_hurwitz_failures()


def pid_step(gains: GainSet, integral_acc: float, eps: float, deps: float, dt: float):
    """One linear PID evaluation; returns (u, updated integral accumulator).

    The integral uses the rectangle rule: acc' = acc + e * dt, and the output
    already includes the current sample, u = kp*e + kd*de + ki*acc'.
    """
    _require_finite(eps=eps, deps=deps, dt=dt, integral_acc=integral_acc)
    if dt < 0.0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    acc = integral_acc + eps * dt
    u = gains.kp * eps + gains.kd * deps + gains.ki * acc
    return u, acc


@dataclass(frozen=True)
class HpidState:
    """Immutable homogeneous-PID controller state.

    Stepping returns a new state; a single instance must not be stepped
    concurrently, but distinct instances are independent values.
    """

    gains: GainSet
    mu: float
    norm: HomNormSpec = WeightedSumNorm((1.0, 1.0))
    integral_acc: float = 0.0
    norm_floor: float = 1e-9

    def __post_init__(self):
        mu = float(self.mu)
        if not (math.isfinite(mu) and -0.5 < mu < 0.5):
            raise ValueError(f"mu must lie in (-0.5, 0.5), got {mu}")
        object.__setattr__(self, "mu", mu)
        floor = float(self.norm_floor)
        if not (math.isfinite(floor) and floor > 0.0):
            raise ValueError(f"norm_floor must be a positive real, got {floor}")
        object.__setattr__(self, "norm_floor", floor)
        object.__setattr__(self, "integral_acc", float(self.integral_acc))
        # validate the norm/dilation pairing once and keep the fast closure
        object.__setattr__(self, "_norm_eval", norm_evaluator(self.norm, self.dilation))

    @property
    def dilation(self) -> Dilation:
        return error_pair_dilation(self.mu)

    def error_norm(self, eps: float, deps: float) -> float:
        """||(e, de)||_d clamped from below at norm_floor."""
        return max(self._norm_eval(eps, deps), self.norm_floor)


def hpid_step(state: HpidState, eps: float, deps: float, dt: float):
    """One homogeneous PID evaluation; returns (u, new state).

    nu = max(||(e, de)||_d, norm_floor); the integral accumulates
    nu^{3 mu} * e by the rectangle rule, matching pid_step exactly at mu = 0.
    """
    _require_finite(eps=eps, deps=deps, dt=dt)
    if dt < 0.0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    nu = state.error_norm(eps, deps)
    mu = state.mu
    acc = state.integral_acc + nu ** (3.0 * mu) * eps * dt
    u = state.gains.kp * nu ** (2.0 * mu) * eps + state.gains.kd * nu**mu * deps + state.gains.ki * acc
    return u, replace(state, integral_acc=acc)


def reset(state: HpidState) -> HpidState:
    """Zero the integral accumulator; every other field is preserved."""
    return replace(state, integral_acc=0.0)


def _require_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v}")
