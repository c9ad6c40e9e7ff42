"""Weighted dilations and the homogeneous norms built on them.

A weighted dilation is the one-parameter matrix group

    d(s) = diag(e^{r_1 s}, ..., e^{r_n s}),   r_i > 0,

with diagonal generator G = diag(r_1, ..., r_n).  Three kinds of
d-homogeneous norm (functions satisfying ||d(s) x|| = e^s ||x||) are
provided:

* a weighted power sum  sum_i c_i |x_i|^{1/r_i},
* the canonical norm: the unique lambda > 0 solving
  ||d(-ln lambda) x||_P = 1 for a weighted Euclidean norm
  ||z||_P = sqrt(z' P z), found by bracketed bisection plus Newton polish,
* an error-pair norm  |e|^{1/(1-mu)} / z1_max + c |de|  used by the
  homogeneous PID on the (error, error-rate) plane.

The module also verifies numerically that a vector field g is
d-homogeneous of degree mu, i.e. g(d(s) x) = e^{mu s} d(s) g(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "BracketError",
    "Dilation",
    "SymMatrix",
    "WeightedSumNorm",
    "CanonicalNorm",
    "ExperimentalNorm",
    "HomNormSpec",
    "HomogeneityReport",
    "standard_dilation",
    "error_pair_dilation",
    "extended_state_dilation",
    "dilation_apply",
    "check_strict_monotonicity",
    "weighted_sum_norm",
    "canonical_norm",
    "canonical_norm_gradient",
    "experimental_norm",
    "hom_norm",
    "norm_evaluator",
    "verify_field_homogeneity",
]


class BracketError(ArithmeticError):
    """The canonical-norm root bracket could not be established.

    Raised for pathological inputs (overflow-scale vectors, non-finite
    entries) where the defining equation cannot be solved reliably.
    """


@dataclass(frozen=True)
class Dilation:
    """Weighted dilation d(s) = diag(e^{r_i s}) with positive weights r_i."""

    weights: tuple[float, ...]

    def __post_init__(self):
        ws = tuple(float(w) for w in self.weights)
        if not ws:
            raise ValueError("dilation needs at least one weight")
        if not all(math.isfinite(w) and w > 0.0 for w in ws):
            raise ValueError(f"dilation weights must be finite and positive, got {ws}")
        object.__setattr__(self, "weights", ws)

    @property
    def n(self) -> int:
        return len(self.weights)

    def generator(self) -> np.ndarray:
        """G = diag(r_1, ..., r_n); anti-Hurwitz because all r_i > 0."""
        return np.diag(self.weights)

    def scales(self, s: float) -> np.ndarray:
        """Diagonal of d(s), i.e. the component-wise factors e^{r_i s}."""
        return np.exp(np.asarray(self.weights) * float(s))

    def apply(self, s: float, x) -> np.ndarray:
        return dilation_apply(self, s, x)


def standard_dilation(n: int) -> Dilation:
    """Uniform scaling e^s I_n (all weights equal to one)."""
    return Dilation((1.0,) * int(n))


def error_pair_dilation(mu: float) -> Dilation:
    """Dilation diag(e^{(1-mu)s}, e^s) on the (error, error-rate) plane."""
    _check_degree(mu)
    return Dilation((1.0 - float(mu), 1.0))


def extended_state_dilation(mu: float) -> Dilation:
    """Dilation diag(e^{(1-mu)s}, e^s, e^{(1+mu)s}) for the extended closed loop."""
    _check_degree(mu)
    return Dilation((1.0 - float(mu), 1.0, 1.0 + float(mu)))


def _check_degree(mu: float) -> None:
    if not (math.isfinite(mu) and -0.5 < mu < 0.5):
        raise ValueError(f"degree mu must lie in (-0.5, 0.5), got {mu}")


def dilation_apply(dil: Dilation, s: float, x) -> np.ndarray:
    """Component-wise e^{r_i s} x_i.

    The group law d(s) d(t) = d(s+t) holds up to floating rounding.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (dil.n,):
        raise ValueError(f"expected vector of dimension {dil.n}, got shape {x.shape}")
    return dil.scales(s) * x


class SymMatrix:
    """A validated symmetric real matrix (dense, small n).

    Symmetry is required to 1e-12 relative at construction; positive
    definiteness is checked on demand, never assumed.
    """

    __slots__ = ("entries",)

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if not np.isfinite(a).all():
            raise ValueError("matrix entries must be finite")
        scale = max(1.0, float(np.abs(a).max()))
        if float(np.abs(a - a.T).max()) > 1e-12 * scale:
            raise ValueError("matrix is not symmetric to 1e-12 relative")
        a = 0.5 * (a + a.T)
        a.flags.writeable = False
        self.entries = a

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries).min())

    def is_positive_definite(self, tol: float = 1e-10) -> bool:
        return self.min_eigenvalue() > tol

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash(self.entries.tobytes())

    def __repr__(self) -> str:
        return f"SymMatrix({self.entries.tolist()!r})"


@dataclass(frozen=True)
class WeightedSumNorm:
    """||x||_d = sum_i c_i |x_i|^{1/r_i} with positive coefficients c_i."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        cs = tuple(float(c) for c in self.coefficients)
        if not all(math.isfinite(c) and c > 0.0 for c in cs):
            raise ValueError(f"coefficients must be finite and positive, got {cs}")
        object.__setattr__(self, "coefficients", cs)


@dataclass(frozen=True)
class CanonicalNorm:
    """Canonical d-homogeneous norm induced by ||z||_P = sqrt(z' P z).

    Requires P > 0 and P G + G' P > 0 (strict monotonicity of the dilation
    with respect to the weighted Euclidean norm); both are checked when the
    norm is evaluated.
    """

    P: SymMatrix
    tolerance: float = 1e-12

    def __post_init__(self):
        if not isinstance(self.P, SymMatrix):
            object.__setattr__(self, "P", SymMatrix(self.P))
        tol = float(self.tolerance)
        if not (math.isfinite(tol) and tol > 0.0):
            raise ValueError("tolerance must be a positive real")
        object.__setattr__(self, "tolerance", tol)


@dataclass(frozen=True)
class ExperimentalNorm:
    """Error-pair norm |e|^{1/(1-mu)} / zeta1_max + gamma |de| on R^2."""

    zeta1_max: float
    gamma: float
    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.zeta1_max) and self.zeta1_max > 0.0):
            raise ValueError("zeta1_max must be a positive real")
        if not (math.isfinite(self.gamma) and self.gamma > 0.0):
            raise ValueError("gamma must be a positive real")
        _check_degree(self.mu)


HomNormSpec = WeightedSumNorm | CanonicalNorm | ExperimentalNorm


def check_strict_monotonicity(dil: Dilation, P, tol: float = 1e-10) -> bool:
    """True iff P > 0 and P G + G' P > 0 (eigenvalue margin above tol)."""
    P = P if isinstance(P, SymMatrix) else SymMatrix(P)
    if P.n != dil.n:
        raise ValueError(f"dimension mismatch: P is {P.n}x{P.n}, dilation is {dil.n}-dimensional")
    if P.min_eigenvalue() <= tol:
        return False
    G = dil.generator()
    M = P.entries @ G + G.T @ P.entries
    return float(np.linalg.eigvalsh(0.5 * (M + M.T)).min()) > tol


def weighted_sum_norm(spec: WeightedSumNorm, dil: Dilation, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (dil.n,) or len(spec.coefficients) != dil.n:
        raise ValueError("dimension mismatch between x, dilation and coefficients")
    total = 0.0
    for c, w, xi in zip(spec.coefficients, dil.weights, x):
        total += c * abs(xi) ** (1.0 / w)
    return total


def _p_norm(P: np.ndarray, z: np.ndarray) -> float:
    return math.sqrt(float(z @ P @ z))


def canonical_norm(spec: CanonicalNorm, dil: Dilation, x) -> float:
    """The unique lambda > 0 with ||d(-ln lambda) x||_P = 1 (0 at the origin).

    The map lambda -> ||d(-ln lambda) x||_P is strictly decreasing for a
    strictly monotone dilation, so the root is found by doubling/halving
    bracket expansion from lambda_0 = ||x||_P, bisection to 1e-12 relative,
    and safeguarded Newton polish down to the spec residual tolerance.
    """
    x = np.asarray(x, dtype=float)
    if not check_strict_monotonicity(dil, spec.P):
        raise ValueError("P must make the dilation strictly monotone (P > 0, PG + G'P > 0)")
    if x.shape != (dil.n,):
        raise ValueError(f"expected vector of dimension {dil.n}, got shape {x.shape}")
    return _canonical_core(spec.P.entries, np.asarray(dil.weights), x, spec.tolerance)


def _canonical_core(P: np.ndarray, w: np.ndarray, x: np.ndarray, tolerance: float) -> float:
    """Root solve for the canonical norm; monotonicity of (P, w) already vetted."""
    with np.errstate(over="ignore"):  # overflow-scale x is reported, not warned
        nx = _p_norm(P, x)
    if not math.isfinite(nx):
        raise BracketError(f"cannot evaluate canonical norm: ||x||_P = {nx}")
    if nx < 1e-300:
        return 0.0

    def resid(lam: float) -> float:
        return _p_norm(P, x * lam ** (-w)) - 1.0

    lo = hi = nx
    f0 = resid(nx)
    if f0 > 0.0:  # norm still above one: grow lambda
        for _ in range(2100):
            hi *= 2.0
            if not math.isfinite(hi):
                raise BracketError("bracket expansion overflowed")
            if resid(hi) <= 0.0:
                break
            lo = hi
        else:
            raise BracketError("no sign change found while expanding the bracket upward")
    elif f0 < 0.0:
        for _ in range(2100):
            lo *= 0.5
            if lo == 0.0:
                raise BracketError("bracket expansion underflowed")
            if resid(lo) >= 0.0:
                break
            hi = lo
        else:
            raise BracketError("no sign change found while expanding the bracket downward")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if resid(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * lo:
            break
    lam = 0.5 * (lo + hi)

    # Newton polish; dF/dlambda = -z'PGz / (lambda ||z||_P) < 0 by monotonicity
    for _ in range(30):
        z = x * lam ** (-w)
        nz = _p_norm(P, z)
        if abs(nz - 1.0) <= tolerance:
            break
        Pz = P @ z
        deriv = -float(Pz @ (w * z)) / (lam * nz)
        step = (nz - 1.0) / deriv
        cand = lam - step
        lam = cand if lo <= cand <= hi else 0.5 * (lo + hi)
    else:
        raise BracketError("canonical norm did not reach the requested residual tolerance")
    return lam


def canonical_norm_gradient(spec: CanonicalNorm, dil: Dilation, x) -> np.ndarray:
    """Gradient row of the canonical norm at x != 0.

    With lambda = ||x||_d and z = d(-ln lambda) x the gradient is

        lambda * z' P d(-ln lambda) / (z' P G z),

    which matches central finite differences of canonical_norm away from
    degenerate points.
    """
    x = np.asarray(x, dtype=float)
    lam = canonical_norm(spec, dil, x)
    if lam == 0.0:
        raise ValueError("canonical-norm gradient is undefined at the origin")
    w = np.asarray(dil.weights)
    scales = lam ** (-w)
    z = x * scales
    Pz = spec.P.entries @ z
    denom = float(Pz @ (w * z))
    return lam * (Pz * scales) / denom


def experimental_norm(spec: ExperimentalNorm, xi) -> float:
    """|xi_1|^{1/(1-mu)} / zeta1_max + gamma |xi_2| on the error pair."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (2,):
        raise ValueError(f"expected a 2-vector, got shape {xi.shape}")
    return abs(xi[0]) ** (1.0 / (1.0 - spec.mu)) / spec.zeta1_max + spec.gamma * abs(xi[1])


def hom_norm(spec: HomNormSpec, dil: Dilation, x) -> float:
    """Evaluate any homogeneous-norm variant against its dilation."""
    if isinstance(spec, WeightedSumNorm):
        return weighted_sum_norm(spec, dil, x)
    if isinstance(spec, CanonicalNorm):
        return canonical_norm(spec, dil, x)
    if isinstance(spec, ExperimentalNorm):
        expected = (1.0 - spec.mu, 1.0)
        if dil.n != 2 or any(abs(a - b) > 1e-12 for a, b in zip(dil.weights, expected)):
            raise ValueError(f"experimental norm requires dilation weights {expected}, got {dil.weights}")
        return experimental_norm(spec, x)
    raise TypeError(f"unknown norm spec {type(spec).__name__}")


def norm_evaluator(spec: HomNormSpec, dil: Dilation) -> Callable[[float, float], float]:
    """Fast (xi1, xi2) -> norm closure for two-dimensional specs.

    Validates the spec/dilation pairing once so per-step controller and
    vector-field evaluations stay cheap.
    """
    if dil.n != 2:
        raise ValueError("norm_evaluator is for the two-dimensional error pair")
    if isinstance(spec, WeightedSumNorm):
        if len(spec.coefficients) != 2:
            raise ValueError("weighted-sum norm needs exactly two coefficients here")
        c1, c2 = spec.coefficients
        e1, e2 = 1.0 / dil.weights[0], 1.0 / dil.weights[1]
        return lambda a, b: c1 * abs(a) ** e1 + c2 * abs(b) ** e2
    if isinstance(spec, CanonicalNorm):
        if not check_strict_monotonicity(dil, spec.P):
            raise ValueError("P must make the dilation strictly monotone (P > 0, PG + G'P > 0)")
        P, w, tol = spec.P.entries, np.asarray(dil.weights), spec.tolerance
        return lambda a, b: _canonical_core(P, w, np.array([a, b]), tol)
    if isinstance(spec, ExperimentalNorm):
        expected = (1.0 - spec.mu, 1.0)
        if any(abs(a - b) > 1e-12 for a, b in zip(dil.weights, expected)):
            raise ValueError(f"experimental norm requires dilation weights {expected}, got {dil.weights}")
        inv_e = 1.0 / (1.0 - spec.mu)
        z1m, g = spec.zeta1_max, spec.gamma
        return lambda a, b: abs(a) ** inv_e / z1m + g * abs(b)
    raise TypeError(f"unknown norm spec {type(spec).__name__}")


@dataclass(frozen=True)
class HomogeneityReport:
    """Outcome of a numerical degree-mu homogeneity check for a vector field."""

    degree: float
    max_residual: float
    tolerance: float
    passed: bool
    n_samples: int
    worst_sample: tuple[float, tuple[float, ...]] = field(default=(0.0, ()), repr=False)


def verify_field_homogeneity(
    field_fn: Callable[[np.ndarray], np.ndarray],
    dil: Dilation,
    mu: float,
    samples: Sequence[tuple[float, Sequence[float]]],
    tolerance: float = 1e-9,
) -> HomogeneityReport:
    """Check g(d(s) x) = e^{mu s} d(s) g(x) on the given (s, x) samples.

    The residual for one sample is
    ||g(d(s)x) - e^{mu s} d(s) g(x)|| / max(1, ||e^{mu s} d(s) g(x)||);
    the report carries the maximum over samples.
    """
    worst = 0.0
    worst_sample = (0.0, ())
    count = 0
    for s, x in samples:
        x = np.asarray(x, dtype=float)
        lhs = np.asarray(field_fn(dilation_apply(dil, s, x)), dtype=float)
        rhs = math.exp(mu * s) * dilation_apply(dil, s, np.asarray(field_fn(x), dtype=float))
        resid = float(np.linalg.norm(lhs - rhs)) / max(1.0, float(np.linalg.norm(rhs)))
        count += 1
        if resid > worst:
            worst = resid
            worst_sample = (float(s), tuple(float(v) for v in x))
    return HomogeneityReport(
        degree=float(mu),
        max_residual=worst,
        tolerance=float(tolerance),
        passed=worst <= tolerance,
        n_samples=count,
        worst_sample=worst_sample,
    )
