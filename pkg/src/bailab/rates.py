"""Primal rate machinery for two-armed Bernoulli bandits.

The central object is the error exponent ``g(x, inst)`` of a static
sampling schedule that spends a fraction ``x`` of the budget on arm 2:
the minimum over ``lam`` of ``(1-x) d(lam, mu1) + x d(lam, mu2)``, a
mixture of Bernoulli KL divergences.  This module provides the closed
form of ``g``, an independent derivative-free minimization route, the
inner minimizer, the optimal allocation, and the elementary
inequalities the rest of the package builds on.

Allocations are plain floats in [0, 1] (fraction of the budget on
arm 2); instances are :class:`BanditInstance` pairs of means strictly
inside (0, 1).  All logs are natural, so rates are in nats per round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DomainError

__all__ = [
    "BanditInstance",
    "RateProfile",
    "kl_bernoulli",
    "g_closed",
    "g_by_minimization",
    "minimize_rate_objective",
    "lambda_star",
    "x_star",
    "x_star_grid",
    "stationarity_residual",
    "pinsker_like_bound_slack",
    "rate_profile",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_LOG2 = math.log(2.0)


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def _sigmoid(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _check_allocation(x: float) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ArgumentError(f"allocation must be a real number, got {x!r}")
    x = float(x)
    if math.isnan(x) or not 0.0 <= x <= 1.0:
        raise ArgumentError(f"allocation must lie in [0, 1], got {x!r}")
    return x


def _check_tol(tol: float) -> float:
    if not tol > 0.0:
        raise ArgumentError(f"tolerance must be positive, got {tol!r}")
    return float(tol)


def _bisect_iterations(tol: float) -> int:
    # halvings of a unit bracket needed to reach width <= tol
    return max(1, math.ceil(-math.log2(min(tol, 0.5))))


@dataclass(frozen=True)
class BanditInstance:
    """A pair of Bernoulli mean rewards, each strictly inside (0, 1)."""

    mu1: float
    mu2: float

    def __post_init__(self) -> None:
        for name in ("mu1", "mu2"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float, np.floating)):
                raise DomainError(f"{name} must be a real number, got {v!r}")
            v = float(v)
            if math.isnan(v) or not 0.0 < v < 1.0:
                raise DomainError(f"{name} must lie strictly inside (0, 1), got {v!r}")
            object.__setattr__(self, name, v)

    @property
    def is_separated(self) -> bool:
        """Whether the means differ, i.e. a unique best arm exists."""
        return self.mu1 != self.mu2

    @property
    def best_arm(self) -> int:
        """Index (1 or 2) of the arm with the larger mean."""
        if not self.is_separated:
            raise DomainError("equal means: the best arm is undefined")
        return 1 if self.mu1 > self.mu2 else 2

    def swapped(self) -> "BanditInstance":
        return BanditInstance(self.mu2, self.mu1)


@dataclass(frozen=True)
class RateProfile:
    """Rate summary of one instance: g, its inner minimizer, and the optimum."""

    g_value: float
    lambda_min: float
    x_star: float


def kl_bernoulli(a: float, b: float) -> float:
    """KL divergence d(a, b) between Bernoulli distributions with means a, b.

    The first argument may sit on the boundary of [0, 1] under the
    convention 0 log 0 = 0.  The second argument must be interior,
    otherwise the divergence is infinite and a DomainError is raised.
    """
    if math.isnan(a) or math.isnan(b):
        raise DomainError("kl_bernoulli: NaN input")
    if not 0.0 <= a <= 1.0:
        raise DomainError(f"first argument must lie in [0, 1], got {a!r}")
    if not 0.0 < b < 1.0:
        raise DomainError(f"second argument must lie in (0, 1), got {b!r}")
    total = 0.0
    if a > 0.0:
        total += a * math.log(a / b)
    if a < 1.0:
        total += (1.0 - a) * math.log((1.0 - a) / (1.0 - b))
    return total


def g_closed(x: float, inst: BanditInstance) -> float:
    """Closed form of the static error exponent at allocation ``x``.

    Equals ``-log((1-mu1)^(1-x) (1-mu2)^x + mu1^(1-x) mu2^x)``; both
    products telescope to 1 at the boundary allocations, where the
    exponent vanishes.
    """
    x = _check_allocation(x)
    if x == 0.0 or x == 1.0:
        return 0.0
    m1, m2 = inst.mu1, inst.mu2
    tail = (1.0 - m1) ** (1.0 - x) * (1.0 - m2) ** x
    head = m1 ** (1.0 - x) * m2 ** x
    return -math.log(tail + head)


def minimize_rate_objective(
    x: float, inst: BanditInstance, tol: float = 1e-10
) -> tuple[float, float]:
    """Golden-section minimization of the KL-mixture objective in lambda.

    Returns ``(lambda_min, value)``.  The minimizer lies between the two
    means because each KL term is monotone in lambda outside that
    interval, so the search bracket is ``[min(mu), max(mu)]``.
    """
    x = _check_allocation(x)
    _check_tol(tol)
    m1, m2 = inst.mu1, inst.mu2

    def objective(lam: float) -> float:
        return (1.0 - x) * kl_bernoulli(lam, m1) + x * kl_bernoulli(lam, m2)

    a, b = min(m1, m2), max(m1, m2)
    h = b - a
    if h <= tol:
        lam = 0.5 * (a + b)
        return lam, objective(lam)
    c = b - _INV_PHI * h
    d = a + _INV_PHI * h
    fc, fd = objective(c), objective(d)
    while h > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            h = b - a
            c = b - _INV_PHI * h
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INV_PHI * h
            fd = objective(d)
    lam = 0.5 * (a + b)
    return lam, objective(lam)


def g_by_minimization(x: float, inst: BanditInstance, tol: float = 1e-10) -> float:
    """Static error exponent by direct 1-D minimization (oracle for g_closed)."""
    return minimize_rate_objective(x, inst, tol)[1]


def lambda_star(x: float, inst: BanditInstance) -> float:
    """Unique minimizer of the KL-mixture objective: odds interpolation.

    Interpolates the log-odds of the two means linearly with weight ``x``
    on arm 2 and maps back through the logistic function, which keeps the
    value strictly inside (0, 1).
    """
    x = _check_allocation(x)
    s = (1.0 - x) * _logit(inst.mu1) + x * _logit(inst.mu2)
    return _sigmoid(s)


def x_star_grid(mu1, mu2, tol: float = 1e-10) -> np.ndarray:
    """Vectorized :func:`x_star` over arrays of means.

    Every pair must be separated.  Runs a fixed number of bisection steps
    on the x-derivative of the closed form, so equal inputs produce
    bit-identical outputs whether evaluated here or through the scalar
    wrapper.
    """
    _check_tol(tol)
    m1 = np.asarray(mu1, dtype=float)
    m2 = np.asarray(mu2, dtype=float)
    if np.any(m1 == m2):
        raise DomainError("x_star needs distinct means: g is identically zero")
    lr_tail = np.log((1.0 - m2) / (1.0 - m1))
    lr_head = np.log(m2 / m1)
    shape = np.broadcast_shapes(m1.shape, m2.shape)
    lo = np.zeros(shape)
    hi = np.ones(shape)
    for _ in range(_bisect_iterations(tol)):
        mid = 0.5 * (lo + hi)
        slope = (1.0 - m1) ** (1.0 - mid) * (1.0 - m2) ** mid * lr_tail
        slope = slope + m1 ** (1.0 - mid) * m2 ** mid * lr_head
        # slope is the derivative of exp(-g); g increases where it is negative
        go_right = slope < 0.0
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


def x_star(inst: BanditInstance, tol: float = 1e-10) -> float:
    """Unique maximizer of ``g(., inst)`` over (0, 1).

    Located by bisection on the analytic x-derivative of the closed form,
    which is strictly decreasing, so the bracket always contains the
    optimum.  Requires distinct means.
    """
    if not inst.is_separated:
        raise DomainError("x_star needs distinct means: g is identically zero")
    out = x_star_grid(np.array([inst.mu1]), np.array([inst.mu2]), tol)
    return float(out[0])


def stationarity_residual(x: float, inst: BanditInstance) -> float:
    """First-order optimality residual of the inner minimization at lambda_star.

    Evaluates ``(1-x) d'(lam, mu1) + x d'(lam, mu2)`` (derivatives in the
    first KL slot) at the odds-interpolated minimizer; the result is zero
    up to round-off for every interior allocation.
    """
    x = _check_allocation(x)
    if x == 0.0 or x == 1.0:
        raise ArgumentError("boundary allocations have no interior stationarity condition")
    lam = lambda_star(x, inst)
    lam_logit = _logit(lam)
    d1 = lam_logit - _logit(inst.mu1)
    d2 = lam_logit - _logit(inst.mu2)
    return (1.0 - x) * d1 + x * d2


def pinsker_like_bound_slack(p: float, q: float) -> float:
    """Slack of the bound ``d(p, q) >= p log(1/q) - log 2`` (never negative)."""
    return kl_bernoulli(p, q) - (p * math.log(1.0 / q) - _LOG2)


def rate_profile(inst: BanditInstance, x: float | None = None, tol: float = 1e-10) -> RateProfile:
    """Bundle g, the inner minimizer, and the optimal allocation.

    When ``x`` is omitted the profile is evaluated at the optimum itself.
    """
    xs = x_star(inst, tol)
    at = xs if x is None else _check_allocation(x)
    return RateProfile(
        g_value=g_closed(at, inst),
        lambda_min=lambda_star(at, inst),
        x_star=xs,
    )
