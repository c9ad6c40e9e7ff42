"""Stability certificates for the homogeneous PID upgrade.

Given stabilizing linear gains, a Lyapunov matrix P is obtained from
P A + A' P = -Q, then the admissible degree interval is the set of mu
around zero where P keeps the extended dilation strictly monotone,
P G(mu) + G(mu)' P > 0 with G(mu) = I + mu diag(-1, 0, 1).  The proof
constants

    beta  = lambda_min(P^{1/2} G P^{-1/2} + P^{-1/2} G' P^{1/2})
    gamma = -lambda_max(P^{1/2} A P^{-1/2} + P^{-1/2} A' P^{1/2})

bound the decay of the canonical homogeneous norm V = ||x||_d along closed
loop trajectories: dV/dt <= -(gamma / 2 beta) V^{1 + mu}.  The trajectory
level check measures the fraction of sample intervals satisfying that
inequality with a small slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .control import GainSet
from .homogeneity import SymMatrix, _canonical_core
from .sim import Trajectory

__all__ = [
    "InfeasibleGainsError",
    "StabilityCertificate",
    "DecreaseReport",
    "ConvergenceReport",
    "solve_lyapunov",
    "solve_lyapunov_matrix",
    "certify",
    "lyapunov_decrease_check",
    "convergence_classifier",
]

_DIAG_DIR = np.diag([-1.0, 0.0, 1.0])


class InfeasibleGainsError(ValueError):
    """The gains do not make the closed-loop matrix Hurwitz."""

    def __init__(self, failures: list[str]):
        self.failures = list(failures)
        super().__init__("gains are not stabilizing: " + "; ".join(failures))


def solve_lyapunov_matrix(A, Q) -> SymMatrix:
    """Direct dense solve of P A + A' P = -Q for symmetric P.

    Solves the vectorized linear system; for Q = Q' the solution is
    symmetric whenever it is unique, so only rounding is symmetrized away.
    """
    A = np.asarray(A, dtype=float)
    Q = Q.entries if isinstance(Q, SymMatrix) else np.asarray(Q, dtype=float)
    n = A.shape[0]
    M = np.kron(np.eye(n), A.T) + np.kron(A.T, np.eye(n))
    vec = np.linalg.solve(M, -Q.reshape(-1))
    P = vec.reshape(n, n)
    # the exact solution is symmetric; strip the solver's rounding noise and
    # let callers gate on the equation residual
    return SymMatrix(0.5 * (P + P.T))


def solve_lyapunov(gains: GainSet, Q=None) -> SymMatrix:
    """Lyapunov matrix P > 0 for the extended linear closed loop.

    Raises InfeasibleGainsError (naming the violated Routh-Hurwitz
    condition) when the gains are not stabilizing; the returned P satisfies
    ||P A + A' P + Q||_max <= 1e-9.
    """
    failures = gains.routh_hurwitz_failures()
    if failures:
        raise InfeasibleGainsError(failures)
    Qm = SymMatrix(np.eye(3)) if Q is None else (Q if isinstance(Q, SymMatrix) else SymMatrix(Q))
    if Qm.n != 3:
        raise ValueError("Q must be 3x3")
    if not Qm.is_positive_definite():
        raise ValueError("Q must be positive definite")
    A = gains.a_matrix()
    P = solve_lyapunov_matrix(A, Qm)
    resid = float(np.abs(P.entries @ A + A.T @ P.entries + Qm.entries).max())
    if resid > 1e-9 or not P.is_positive_definite():
        raise ArithmeticError(f"Lyapunov solve failed (residual {resid:.3e})")
    return P


@dataclass(frozen=True)
class StabilityCertificate:
    """Lyapunov matrix, proof constants, and the certified degree interval.

    beta is recorded at the worse interval endpoint (the smaller value,
    nearest the feasibility boundary), so gamma / (2 beta) is the strongest
    decrease rate the certificate claims on the whole interval.
    """

    P: SymMatrix
    beta: float
    gamma: float
    mu_lo: float
    mu_hi: float
    gains: GainSet

    def admits(self, mu: float) -> bool:
        return self.mu_lo < mu < self.mu_hi

    def decrease_rate(self) -> float:
        return self.gamma / (2.0 * self.beta)

    def monotonicity_margin(self, mu: float) -> float:
        """Smallest eigenvalue of P G(mu) + G(mu)' P."""
        G = np.eye(3) + mu * _DIAG_DIR
        M = self.P.entries @ G + G.T @ self.P.entries
        return float(np.linalg.eigvalsh(0.5 * (M + M.T)).min())


def _sqrt_factors(P: np.ndarray):
    w, V = np.linalg.eigh(P)
    return V @ np.diag(np.sqrt(w)) @ V.T, V @ np.diag(1.0 / np.sqrt(w)) @ V.T


def certify(gains: GainSet, Q=None, eig_margin: float = 1e-8, mu_cap: float = 0.5) -> StabilityCertificate:
    """Build a stability certificate for the hPID upgrade of linear gains.

    The degree interval is found by bisection on the eigenvalue margin of
    P G(mu) + G(mu)' P (feasible set in mu is an interval containing 0),
    capped at the design range (-mu_cap, mu_cap).
    """
    P = solve_lyapunov(gains, Q)
    Pe = P.entries
    S = Pe @ _DIAG_DIR + _DIAG_DIR @ Pe

    def margin(mu: float) -> float:
        return float(np.linalg.eigvalsh(2.0 * Pe + mu * S).min())

    def endpoint(sign: float) -> float:
        cap = sign * mu_cap
        if margin(cap) >= eig_margin:
            return cap
        lo, hi = 0.0, cap
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if margin(mid) >= eig_margin:
                lo = mid
            else:
                hi = mid
        return lo

    mu_hi = endpoint(+1.0)
    mu_lo = endpoint(-1.0)

    Ph, Pmh = _sqrt_factors(Pe)

    def beta_at(mu: float) -> float:
        G = np.eye(3) + mu * _DIAG_DIR
        M = Ph @ G @ Pmh + Pmh @ G.T @ Ph
        return float(np.linalg.eigvalsh(0.5 * (M + M.T)).min())

    A = gains.a_matrix()
    MA = Ph @ A @ Pmh + Pmh @ A.T @ Ph
    gamma = -float(np.linalg.eigvalsh(0.5 * (MA + MA.T)).max())
    beta = min(beta_at(mu_lo), beta_at(mu_hi))
    if beta <= 0.0 or gamma <= 0.0:
        raise ArithmeticError(f"certificate constants degenerate (beta={beta}, gamma={gamma})")
    return StabilityCertificate(P=P, beta=beta, gamma=gamma, mu_lo=mu_lo, mu_hi=mu_hi, gains=gains)


@dataclass(frozen=True)
class DecreaseReport:
    """Fraction of trajectory intervals satisfying the certified decay."""

    fraction: float
    passed: bool
    rate: float
    n_intervals: int
    n_excluded: int
    pass_fraction: float


def lyapunov_decrease_check(
    traj: Trajectory,
    cert: StabilityCertificate,
    mu: float,
    slack_abs: float = 1e-6,
    slack_rel: float = 0.05,
    pass_fraction: float = 0.99,
) -> DecreaseReport:
    """Check dV/dt <= -(gamma/2 beta) V^{1+mu} + slack along a trajectory.

    V is the canonical homogeneous norm induced by the certificate's P and
    the extended dilation for mu.  Discrete slopes are formed between
    adjacent samples; intervals inside a terminal ball of radius
    100 * norm_floor are excluded (slope noise dominates there).  The slack
    slack_abs + slack_rel * |rhs| absorbs finite-difference slope error.
    """
    scn = traj.scenario
    if scn.plant != "extended":
        raise ValueError("decrease check needs an extended-system trajectory")
    if scn.gains != cert.gains:
        raise ValueError("trajectory gains do not match the certificate")
    if scn.mu != mu:
        raise ValueError(f"trajectory was generated with mu={scn.mu}, not {mu}")
    if not cert.admits(mu):
        raise ValueError(f"mu={mu} lies outside the certified interval ({cert.mu_lo}, {cert.mu_hi})")

    w = np.array([1.0 - mu, 1.0, 1.0 + mu])
    Pe = cert.P.entries
    V = np.array([_canonical_core(Pe, w, x, 1e-12) for x in traj.states])
    times = traj.times
    rate = cert.decrease_rate()
    floor = 100.0 * scn.norm_floor

    ok = 0
    total = 0
    excluded = 0
    for i in range(len(times) - 1):
        if V[i] <= floor:
            excluded += 1
            continue
        slope = (V[i + 1] - V[i]) / (times[i + 1] - times[i])
        rhs = -rate * V[i] ** (1.0 + mu)
        total += 1
        if slope <= rhs + slack_abs + slack_rel * abs(rhs):
            ok += 1
    fraction = 1.0 if total == 0 else ok / total
    return DecreaseReport(
        fraction=fraction,
        passed=fraction >= pass_fraction,
        rate=rate,
        n_intervals=total,
        n_excluded=excluded,
        pass_fraction=pass_fraction,
    )


@dataclass(frozen=True)
class ConvergenceReport:
    finite_time: bool
    settle_time: float | None
    tolerance: float
    horizon: float


def convergence_classifier(traj: Trajectory, settle_tol: float, margin_factor: float = 0.95) -> ConvergenceReport:
    """Settle time and a finite-time verdict for a recorded trajectory.

    settle_time is the first sample time after which the Euclidean state
    norm stays at or below settle_tol for the rest of the horizon; the run
    is classified finite-time when it settles before margin_factor * T.
    """
    if not (math.isfinite(settle_tol) and settle_tol > 0.0):
        raise ValueError(f"settle_tol must be a positive real, got {settle_tol}")
    norms = np.linalg.norm(traj.states, axis=1)
    above = norms > settle_tol
    horizon = float(traj.times[-1])
    if not above.any():
        return ConvergenceReport(True, float(traj.times[0]), settle_tol, horizon)
    last_above = int(np.nonzero(above)[0][-1])
    if last_above == len(norms) - 1:
        return ConvergenceReport(False, None, settle_tol, horizon)
    settle = float(traj.times[last_above + 1])
    return ConvergenceReport(settle <= margin_factor * horizon, settle, settle_tol, horizon)
