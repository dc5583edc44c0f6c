"""Group-normalized advantages, clipped surrogate, KL estimator, and
contrastive velocity-field arithmetic, as plain numeric functions.

No policy or sampler lives here: callers supply rewards, importance ratios,
log-probabilities, and velocity vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, LengthMismatch, ProbabilityOutOfRange

_SIGMA_GUARD = 1e-8
_DEGENERATE_SIGMA = 1e-12


@dataclass(frozen=True)
class RewardGroup:
    """Rewards of one sampled group; at least two members, all finite."""

    rewards: tuple

    def __post_init__(self):
        values = tuple(float(r) for r in self.rewards)
        if len(values) < 2:
            raise ValueError("a reward group needs at least 2 members")
        if not all(math.isfinite(v) for v in values):
            raise ValueError("group rewards must be finite")
        object.__setattr__(self, "rewards", values)

    def __len__(self) -> int:
        return len(self.rewards)


@dataclass(frozen=True)
class NftConfig:
    """Guidance strength for the velocity fields and the separate KL weight."""

    beta_guidance: float = 0.1
    kl_beta: float = 0.01

    def __post_init__(self):
        for name in ("beta_guidance", "kl_beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0")


@dataclass(frozen=True)
class AdvantageResult:
    advantages: tuple
    degenerate: bool


def group_advantages(group: RewardGroup) -> AdvantageResult:
    """Normalize rewards within the group: (r - mean) / (population std + 1e-8).

    A group whose std is below 1e-12 is flagged degenerate and yields all
    zeros instead of amplified noise.
    """
    rewards = np.asarray(group.rewards, dtype=np.float64)
    sigma = float(rewards.std())
    if sigma < _DEGENERATE_SIGMA:
        return AdvantageResult(advantages=(0.0,) * len(rewards), degenerate=True)
    normalized = (rewards - rewards.mean()) / (sigma + _SIGMA_GUARD)
    return AdvantageResult(advantages=tuple(float(a) for a in normalized), degenerate=False)


def grpo_surrogate(rho: float, advantage: float, clip_eps: float) -> float:
    """min(rho * A, clip(rho, 1-eps, 1+eps) * A), the clipped policy objective."""
    if rho <= 0:
        raise ValueError(f"importance ratio must be positive, got {rho}")
    if not 0.0 < clip_eps < 1.0:
        raise ValueError(f"clip threshold must be in (0, 1), got {clip_eps}")
    clipped = min(max(rho, 1.0 - clip_eps), 1.0 + clip_eps)
    return min(rho * advantage, clipped * advantage)


def kl_penalty(logp_policy, logp_ref) -> float:
    """Nonnegative per-token KL estimate: mean of exp(x) - x - 1, x = ref - policy."""
    policy = np.asarray(logp_policy, dtype=np.float64)
    ref = np.asarray(logp_ref, dtype=np.float64)
    if policy.shape != ref.shape:
        raise LengthMismatch(f"log-prob lengths differ: {policy.shape} vs {ref.shape}")
    if policy.size == 0:
        raise LengthMismatch("log-prob sequences must be nonempty")
    x = ref - policy
    return float(np.mean(np.exp(x) - x - 1.0))


def _paired(u, v):
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector dimensions differ: {a.shape} vs {b.shape}")
    return a, b


def nft_positive_velocity(v_old, v_theta, beta: float) -> np.ndarray:
    """Interpolation toward the current field: (1 - beta) v_old + beta v_theta."""
    a, b = _paired(v_old, v_theta)
    return (1.0 - beta) * a + beta * b


def nft_negative_velocity(v_old, v_theta, beta: float) -> np.ndarray:
    """Extrapolation away from the current field: (1 + beta) v_old - beta v_theta."""
    a, b = _paired(v_old, v_theta)
    return (1.0 + beta) * a - beta * b


def nft_loss(v_old, v_theta, v_target, p: float, beta: float) -> float:
    """p ||v+ - v||^2 + (1 - p) ||v- - v||^2 over the two guided fields."""
    if not 0.0 <= p <= 1.0:
        raise ProbabilityOutOfRange(f"optimality probability must be in [0, 1], got {p}")
    positive = nft_positive_velocity(v_old, v_theta, beta)
    negative = nft_negative_velocity(v_old, v_theta, beta)
    target, _ = _paired(v_target, positive)
    pos_term = float(np.sum((positive - target) ** 2))
    neg_term = float(np.sum((negative - target) ** 2))
    return p * pos_term + (1.0 - p) * neg_term


def reward_to_probability(group: RewardGroup) -> tuple:
    """Min-max map of group rewards onto [0, 1]; a flat group maps to 0.5."""
    rewards = np.asarray(group.rewards, dtype=np.float64)
    lo, hi = float(rewards.min()), float(rewards.max())
    if hi - lo < _DEGENERATE_SIGMA:
        return (0.5,) * len(rewards)
    return tuple(float(p) for p in (rewards - lo) / (hi - lo))
