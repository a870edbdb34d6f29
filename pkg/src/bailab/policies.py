"""Sampling policies over sufficient-statistic states.

Built-in policies: deterministic alternation (``uniform``), the
largest-remainder schedule of a fixed arm-2 fraction (``static``), the
schedule tuned to the optimal allocation of a reference instance
(``oracle_static``), and an adaptive tracking rule with forced
exploration (``plugin_tracking``).  A policy maps a state to the
probability of pulling arm 1; the final recommendation picks the larger
empirical mean and splits exact ties fairly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ArgumentError, RecommendationError
from .rates import BanditInstance, x_star, x_star_grid

__all__ = [
    "PolicyState",
    "PolicySpec",
    "action_distribution",
    "plugin_action_prob",
    "plugin_action_grid",
    "recommend",
    "pulls_arm2_at",
    "arm2_count",
    "schedule_pulls_arm1",
    "parse_policy",
    "policy_label",
]

POLICY_KINDS = ("uniform", "static", "oracle_static", "plugin_tracking")


@dataclass(frozen=True)
class PolicyState:
    """Sufficient statistic after ``t`` pulls: arm-1 pulls and both success counts."""

    t: int
    n1: int
    s1: int
    s2: int

    def __post_init__(self) -> None:
        if not (0 <= self.s1 <= self.n1 <= self.t and 0 <= self.s2 <= self.t - self.n1):
            raise ArgumentError(
                f"inconsistent state: t={self.t}, n1={self.n1}, s1={self.s1}, s2={self.s2}"
            )

    @property
    def n2(self) -> int:
        return self.t - self.n1


@dataclass(frozen=True)
class PolicySpec:
    """Immutable description of a sampling policy."""

    kind: str
    x: float | None = None
    ref: BanditInstance | None = None
    force_rate: float | None = None
    description: str = ""

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ArgumentError(f"unknown policy kind {self.kind!r}")
        if self.kind == "static":
            if self.x is None or math.isnan(self.x) or not 0.0 <= self.x <= 1.0:
                raise ArgumentError(f"static policy needs x in [0, 1], got {self.x!r}")
        if self.kind == "oracle_static":
            if self.ref is None or not self.ref.is_separated:
                raise ArgumentError("oracle_static needs a reference instance with distinct means")
        if self.kind == "plugin_tracking":
            fr = self.force_rate
            if fr is None or math.isnan(fr) or not 0.0 < fr <= 1.0:
                raise ArgumentError(f"plugin_tracking needs force_rate in (0, 1], got {fr!r}")
        if not self.description:
            object.__setattr__(self, "description", policy_label(self))

    @classmethod
    def uniform(cls) -> "PolicySpec":
        return cls(kind="uniform")

    @classmethod
    def static(cls, x: float) -> "PolicySpec":
        return cls(kind="static", x=float(x))

    @classmethod
    def oracle_static(cls, ref: BanditInstance) -> "PolicySpec":
        return cls(kind="oracle_static", ref=ref)

    @classmethod
    def plugin_tracking(cls, force_rate: float) -> "PolicySpec":
        return cls(kind="plugin_tracking", force_rate=float(force_rate))

    @property
    def deterministic_schedule(self) -> bool:
        """Whether the pull sequence depends only on the round index."""
        return self.kind != "plugin_tracking"

    def schedule_fraction(self) -> float:
        """Arm-2 fraction of the deterministic schedule."""
        if self.kind == "uniform":
            return 0.5
        if self.kind == "static":
            return self.x
        if self.kind == "oracle_static":
            return _oracle_fraction(self.ref.mu1, self.ref.mu2)
        raise ArgumentError(f"{self.kind} has no deterministic schedule")


@lru_cache(maxsize=None)
def _oracle_fraction(mu1: float, mu2: float) -> float:
    return x_star(BanditInstance(mu1, mu2))


def pulls_arm2_at(x: float, t: int) -> bool:
    """Largest-remainder schedule: arm 2 at round t iff floor((t+1)x) ticks up."""
    return math.floor((t + 1) * x) > math.floor(t * x)


def arm2_count(x: float, T: int) -> int:
    """Total arm-2 pulls of the largest-remainder schedule over T rounds."""
    return math.floor(T * x)


def schedule_pulls_arm1(policy: PolicySpec, t: int) -> bool:
    """Round-t action of a deterministic-schedule policy."""
    if policy.kind == "uniform":
        return t % 2 == 0
    return not pulls_arm2_at(policy.schedule_fraction(), t)


@lru_cache(maxsize=None)
def _tracking_target(mu1: float, mu2: float) -> float:
    return x_star(BanditInstance(mu1, mu2))


def plugin_action_prob(t: int, n1: int, s1: int, s2: int, force_rate: float) -> float:
    """Probability that the tracking rule pulls arm 1 from the given counts.

    First two rounds pull each arm once.  Afterwards the under-sampled arm
    (ties to arm 1) is forced with probability ``force_rate``; otherwise
    arm 1 is pulled iff its share of pulls is below ``1 - x*`` of the
    plug-in instance, whose empirical means are clamped to
    ``[1/(t+1), 1 - 1/(t+1)]`` (equal clamped means target 1/2).
    """
    if t == 0:
        return 1.0
    if t == 1:
        return 0.0
    n2 = t - n1
    lo = 1.0 / (t + 1)
    hi = 1.0 - lo
    m1 = min(max(s1 / n1, lo), hi)
    m2 = min(max(s2 / n2, lo), hi)
    target = 0.5 if m1 == m2 else _tracking_target(m1, m2)
    track_arm1 = (n1 / t) < 1.0 - target
    forced_arm1 = n1 <= n2
    return force_rate * (1.0 if forced_arm1 else 0.0) + (1.0 - force_rate) * (
        1.0 if track_arm1 else 0.0
    )


def plugin_action_grid(
    t: int, n1: int, n_s1: int, n_s2: int, force_rate: float
) -> np.ndarray:
    """Vectorized :func:`plugin_action_prob` over a full (s1, s2) grid.

    Produces bit-identical probabilities to the scalar path: the clamping,
    the bisection for x*, and the comparisons are the same floating
    operations applied elementwise.
    """
    if t < 2:
        raise ArgumentError("grid actions start at t=2; earlier rounds are deterministic")
    n2 = t - n1
    lo = 1.0 / (t + 1)
    hi = 1.0 - lo
    s1 = np.arange(n_s1, dtype=float)[:, None]
    s2 = np.arange(n_s2, dtype=float)[None, :]
    m1 = np.minimum(np.maximum(s1 / n1, lo), hi)
    m2 = np.minimum(np.maximum(s2 / n2, lo), hi)
    m1, m2 = np.broadcast_arrays(m1, m2)
    target = np.full(m1.shape, 0.5)
    separated = m1 != m2
    if np.any(separated):
        target[separated] = x_star_grid(m1[separated], m2[separated])
    track_arm1 = (n1 / t) < 1.0 - target
    forced_arm1 = 1.0 if n1 <= n2 else 0.0
    return force_rate * forced_arm1 + (1.0 - force_rate) * track_arm1


def action_distribution(policy: PolicySpec, state: PolicyState) -> float:
    """Probability of pulling arm 1 in the given state."""
    if policy.deterministic_schedule:
        return 1.0 if schedule_pulls_arm1(policy, state.t) else 0.0
    return plugin_action_prob(state.t, state.n1, state.s1, state.s2, policy.force_rate)


def recommend(state: PolicyState) -> tuple[float, float]:
    """Decision distribution over the arms: larger empirical mean wins.

    Means are compared by exact integer cross-multiplication; an exact tie
    returns the fair split.  Both arms must have been sampled.
    """
    n2 = state.n2
    if state.n1 < 1 or n2 < 1:
        raise RecommendationError(
            f"cannot recommend with pull counts n1={state.n1}, n2={n2}"
        )
    lhs = state.s1 * n2
    rhs = state.s2 * state.n1
    if lhs > rhs:
        return (1.0, 0.0)
    if lhs < rhs:
        return (0.0, 1.0)
    return (0.5, 0.5)


def parse_policy(text: str) -> PolicySpec:
    """Parse the CLI policy syntax.

    ``uniform`` | ``static:0.3`` | ``oracle:0.9,0.5`` | ``plugin:0.1``
    """
    name, _, arg = text.strip().partition(":")
    try:
        if name == "uniform":
            if arg:
                raise ArgumentError("uniform takes no parameter")
            return PolicySpec.uniform()
        if name == "static":
            return PolicySpec.static(float(arg))
        if name == "oracle":
            mu1, mu2 = (float(v) for v in arg.split(","))
            return PolicySpec.oracle_static(BanditInstance(mu1, mu2))
        if name == "plugin":
            return PolicySpec.plugin_tracking(float(arg))
    except (ValueError, TypeError) as exc:
        raise ArgumentError(f"malformed policy {text!r}: {exc}") from None
    raise ArgumentError(
        f"unknown policy {text!r}; expected uniform | static:X | oracle:MU1,MU2 | plugin:RATE"
    )


def policy_label(policy: PolicySpec) -> str:
    """Round-trippable text form of a policy (the CLI syntax)."""
    if policy.kind == "uniform":
        return "uniform"
    if policy.kind == "static":
        return f"static:{policy.x}"
    if policy.kind == "oracle_static":
        return f"oracle:{policy.ref.mu1},{policy.ref.mu2}"
    return f"plugin:{policy.force_rate}"
