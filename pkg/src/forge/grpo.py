"""Group-relative policy optimization at desk scale.

The math lives in small, separately testable pieces (group-normalized
advantages, probability ratios, clipped surrogate, KL penalty, the grouped
objective) plus a tabular first-order autoregressive policy whose analytic
objective gradient can be checked against finite differences.

Per-token log-probabilities (new/old/reference alike) are always taken under
the sampling distribution actually used, i.e. after the repetition penalty has
been applied to the already-emitted tokens of the rollout, so ratios are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, IntegrityError


@dataclass(frozen=True)
class GrpoConfig:
    group_size: int = 5
    clip_epsilon: float = 0.2
    kl_beta: float = 0.001
    learning_rate: float = 0.5
    repetition_penalty: float = 1.2
    std_floor: float = 1e-8
    epochs_per_batch: int = 1

    def __post_init__(self):
        if self.group_size < 2:
            raise ConfigError("group_size must be at least 2")
        if self.clip_epsilon <= 0:
            raise ConfigError("clip_epsilon must be positive")
        if self.kl_beta < 0:
            raise ConfigError("kl_beta must be non-negative")
        if self.learning_rate < 0:
            raise ConfigError("learning_rate must be non-negative")
        if self.repetition_penalty < 1:
            raise ConfigError("repetition_penalty must be >= 1")
        if self.std_floor <= 0:
            raise ConfigError("std_floor must be positive")
        if self.epochs_per_batch < 1:
            raise ConfigError("epochs_per_batch must be >= 1")


@dataclass
class Rollout:
    tokens: tuple[int, ...]
    logp_new: np.ndarray
    logp_old: np.ndarray
    logp_ref: np.ndarray
    reward: float

    def validate(self) -> None:
        n = len(self.tokens)
        if n < 1:
            raise IntegrityError("rollout must contain at least one token")
        for name in ("logp_new", "logp_old", "logp_ref"):
            arr = getattr(self, name)
            if len(arr) != n:
                raise IntegrityError(
                    f"{name} has length {len(arr)}, expected {n}")


@dataclass
class RolloutGroup:
    query: tuple[int, ...]
    rollouts: list[Rollout]


@dataclass(frozen=True)
class AdvantageVector:
    per_rollout: tuple[float, ...]


@dataclass(frozen=True)
class ObjectiveReport:
    objective: float
    clip_fraction: float
    mean_kl: float
    mean_reward: float


def group_advantages(rewards, config: GrpoConfig) -> AdvantageVector:
    """Normalize group rewards to advantages: (R - mean) / population std.

    Degenerate groups (spread at or below std_floor) get all-zero advantages.
    Sums go through math.fsum so the canonical cases come out exact.
    """
    rewards = [float(r) for r in rewards]
    if len(rewards) != config.group_size:
        raise ConfigError(
            f"expected {config.group_size} rewards, got {len(rewards)}")
    n = len(rewards)
    mean = math.fsum(rewards) / n
    deviations = [r - mean for r in rewards]
    std = math.sqrt(math.fsum(d * d for d in deviations) / n)
    if std <= config.std_floor:
        return AdvantageVector(per_rollout=tuple(0.0 for _ in rewards))
    return AdvantageVector(per_rollout=tuple(d / std for d in deviations))


def token_ratio(logp_new: float, logp_old: float) -> float:
    """Probability ratio of the current to the old policy for one token."""
    return math.exp(logp_new - logp_old)


def clipped_surrogate(ratio: float, advantage: float, epsilon: float) -> float:
    """min(ratio * A, clip(ratio, 1-eps, 1+eps) * A), taken verbatim; for
    negative advantages the min keeps the clipped branch when it is lower."""
    if epsilon <= 0:
        raise ConfigError("epsilon must be positive")
    clipped = min(max(ratio, 1.0 - epsilon), 1.0 + epsilon)
    return min(ratio * advantage, clipped * advantage)


def kl_penalty(logp_new: float, logp_ref: float) -> float:
    """Nonnegative per-token divergence estimate exp(d) - d - 1 with
    d = logp_ref - logp_new; zero exactly when the policies agree.
    expm1 keeps the value nonnegative under floating point for tiny d."""
    delta = logp_ref - logp_new
    return math.expm1(delta) - delta


def grpo_objective(group: RolloutGroup, config: GrpoConfig) -> ObjectiveReport:
    """J = (1/G) sum_i (1/|o_i|) sum_t [surrogate - beta * kl]."""
    if len(group.rollouts) != config.group_size:
        raise IntegrityError(
            f"group has {len(group.rollouts)} rollouts, expected {config.group_size}")
    for rollout in group.rollouts:
        rollout.validate()

    advantages = group_advantages(
        [r.reward for r in group.rollouts], config).per_rollout

    total = 0.0
    clipped_tokens = 0
    token_count = 0
    kl_sum = 0.0
    for rollout, adv in zip(group.rollouts, advantages):
        per_token = 0.0
        for lpn, lpo, lpr in zip(rollout.logp_new, rollout.logp_old, rollout.logp_ref):
            ratio = token_ratio(lpn, lpo)
            surr = clipped_surrogate(ratio, adv, config.clip_epsilon)
            if surr < ratio * adv:
                clipped_tokens += 1
            kl = kl_penalty(lpn, lpr)
            kl_sum += kl
            per_token += surr - config.kl_beta * kl
            token_count += 1
        total += per_token / len(rollout.tokens)

    return ObjectiveReport(
        objective=total / config.group_size,
        clip_fraction=clipped_tokens / token_count,
        mean_kl=kl_sum / token_count,
        mean_reward=math.fsum(r.reward for r in group.rollouts) / config.group_size,
    )


# --- tabular autoregressive policy ---------------------------------------


@dataclass
class TabularPolicy:
    """First-order Markov policy over a small vocabulary: the next-token
    distribution is a softmax over logits[previous_token, :]."""
    vocab_size: int
    logits: np.ndarray  # (V, V) float64
    start_token: int
    stop_token: int
    max_len: int

    def __post_init__(self):
        self.logits = np.asarray(self.logits, dtype=np.float64)
        if self.logits.shape != (self.vocab_size, self.vocab_size):
            raise ConfigError("logits table must be (vocab_size, vocab_size)")
        if not np.all(np.isfinite(self.logits)):
            raise ConfigError("logits must be finite")
        if self.max_len < 1:
            raise ConfigError("max_len must be >= 1")

    def copy(self) -> "TabularPolicy":
        return replace(self, logits=self.logits.copy())

    @staticmethod
    def uniform(vocab_size: int, start_token: int, stop_token: int, max_len: int) -> "TabularPolicy":
        return TabularPolicy(
            vocab_size=vocab_size,
            logits=np.zeros((vocab_size, vocab_size)),
            start_token=start_token,
            stop_token=stop_token,
            max_len=max_len,
        )


def step_distribution(logits: np.ndarray, prev: int, emitted: set[int],
                      repetition_penalty: float) -> np.ndarray:
    """Next-token probabilities after the repetition penalty: the exponentiated
    logit of every already-emitted token is divided by the penalty (a shift of
    -ln(penalty)) before renormalizing."""
    z = logits[prev].astype(np.float64).copy()
    if emitted and repetition_penalty > 1.0:
        shift = math.log(repetition_penalty)
        for tok in emitted:
            z[tok] -= shift
    z -= z.max()
    p = np.exp(z)
    return p / p.sum()


@dataclass
class SampledRollout:
    tokens: tuple[int, ...]
    logps: np.ndarray
    entropies: np.ndarray
    truncated: bool


def sample_rollout(policy: TabularPolicy, query: tuple[int, ...],
                   config: GrpoConfig, rng: np.random.Generator) -> SampledRollout:
    """Sample one output sequence; the stop token, when drawn, is kept as the
    final token. Hitting max_len without a stop is a truncation, not an error."""
    prev = query[-1] if query else policy.start_token
    emitted: set[int] = set()
    tokens: list[int] = []
    logps: list[float] = []
    entropies: list[float] = []
    truncated = True
    for _ in range(policy.max_len):
        p = step_distribution(policy.logits, prev, emitted, config.repetition_penalty)
        tok = int(rng.choice(policy.vocab_size, p=p))
        tokens.append(tok)
        logps.append(math.log(p[tok]))
        with np.errstate(divide="ignore", invalid="ignore"):
            plogp = np.where(p > 0, p * np.log(p), 0.0)
        entropies.append(float(-plogp.sum()))
        if tok == policy.stop_token:
            truncated = False
            break
        emitted.add(tok)
        prev = tok
    return SampledRollout(
        tokens=tuple(tokens),
        logps=np.array(logps),
        entropies=np.array(entropies),
        truncated=truncated,
    )


def sequence_logprobs(logits: np.ndarray, query: tuple[int, ...],
                      tokens: tuple[int, ...], config: GrpoConfig,
                      policy: TabularPolicy) -> np.ndarray:
    """Per-token log-probabilities of a fixed token sequence under ``logits``,
    replaying the same penalty masks the sampler used."""
    prev = query[-1] if query else policy.start_token
    emitted: set[int] = set()
    out = np.empty(len(tokens))
    for t, tok in enumerate(tokens):
        p = step_distribution(logits, prev, emitted, config.repetition_penalty)
        out[t] = math.log(p[tok])
        if tok != policy.stop_token:
            emitted.add(tok)
            prev = tok
    return out


def _objective_and_grad(groups: list[RolloutGroup], logits: np.ndarray,
                        config: GrpoConfig, policy: TabularPolicy,
                        want_grad: bool):
    """Evaluate J over the frozen batch with fresh logp_new under ``logits``;
    optionally accumulate the analytic dJ/dlogits alongside."""
    grad = np.zeros_like(logits) if want_grad else None
    j_total = 0.0
    clipped_tokens = 0
    token_count = 0
    kl_sum = 0.0

    for group in groups:
        advantages = group_advantages(
            [r.reward for r in group.rollouts], config).per_rollout
        for rollout, adv in zip(group.rollouts, advantages):
            rollout.validate()
            weight = 1.0 / (config.group_size * len(rollout.tokens))
            prev = group.query[-1] if group.query else policy.start_token
            emitted: set[int] = set()
            for t, tok in enumerate(rollout.tokens):
                p = step_distribution(logits, prev, emitted, config.repetition_penalty)
                lpn = math.log(p[tok])
                ratio = math.exp(lpn - rollout.logp_old[t])
                unclipped = ratio * adv
                surr = clipped_surrogate(ratio, adv, config.clip_epsilon)
                delta = rollout.logp_ref[t] - lpn
                kl = math.expm1(delta) - delta
                j_total += weight * (surr - config.kl_beta * kl)
                kl_sum += kl
                token_count += 1
                if surr < unclipped:
                    clipped_tokens += 1
                if want_grad:
                    # Inside the clip band (or on the unclipped branch) the
                    # surrogate differentiates to ratio*adv*dlogp; a strictly
                    # active clipped branch sits on clip's flat region.
                    coef = 0.0 if surr < unclipped else ratio * adv
                    coef += config.kl_beta * math.expm1(delta)
                    scaled = weight * coef
                    grad[prev] -= scaled * p
                    grad[prev, tok] += scaled
                if tok != policy.stop_token:
                    emitted.add(tok)
                    prev = tok

    n_groups = len(groups)
    report = ObjectiveReport(
        objective=j_total / n_groups,
        clip_fraction=clipped_tokens / token_count,
        mean_kl=kl_sum / token_count,
        mean_reward=math.fsum(
            r.reward for g in groups for r in g.rollouts) / (n_groups * config.group_size),
    )
    if want_grad:
        grad /= n_groups
    return report, grad


def batch_objective(groups: list[RolloutGroup], logits: np.ndarray,
                    config: GrpoConfig, policy: TabularPolicy) -> float:
    """J over a frozen batch as a function of the logits table alone (the
    quantity the finite-difference check differentiates)."""
    report, _ = _objective_and_grad(groups, logits, config, policy, want_grad=False)
    return report.objective


def batch_gradient(groups: list[RolloutGroup], logits: np.ndarray,
                   config: GrpoConfig, policy: TabularPolicy) -> tuple[ObjectiveReport, np.ndarray]:
    return _objective_and_grad(groups, logits, config, policy, want_grad=True)


@dataclass
class GrpoStepResult:
    policy: TabularPolicy
    report: ObjectiveReport
    groups: list[RolloutGroup]
    entropy: float
    mean_len: float
    truncation_count: int


def grpo_step(policy: TabularPolicy, queries: list[tuple[int, ...]],
              reward_fn, config: GrpoConfig,
              rng: np.random.Generator,
              ref_policy: TabularPolicy | None = None) -> GrpoStepResult:
    """One optimization step: sample a group per query from the frozen old
    policy, take the analytic ascent direction of the grouped objective, and
    apply it at the configured learning rate.

    ``reward_fn`` scores the full query+output token sequence. The reported
    objective/clip/KL numbers are evaluated at the pre-update parameters.
    """
    old_logits = policy.logits.copy()
    ref_logits = ref_policy.logits if ref_policy is not None else old_logits

    groups: list[RolloutGroup] = []
    entropy_sum = 0.0
    entropy_steps = 0
    length_sum = 0
    truncations = 0
    for query in queries:
        rollouts = []
        for _ in range(config.group_size):
            sampled = sample_rollout(policy, query, config, rng)
            reward = float(reward_fn(tuple(query) + sampled.tokens))
            logp_ref = sequence_logprobs(ref_logits, query, sampled.tokens, config, policy)
            rollouts.append(Rollout(
                tokens=sampled.tokens,
                logp_new=sampled.logps.copy(),
                logp_old=sampled.logps.copy(),
                logp_ref=logp_ref,
                reward=reward,
            ))
            entropy_sum += float(sampled.entropies.sum())
            entropy_steps += len(sampled.entropies)
            length_sum += len(sampled.tokens)
            truncations += int(sampled.truncated)
        groups.append(RolloutGroup(query=tuple(query), rollouts=rollouts))

    report = None
    new_logits = old_logits.copy()
    for _ in range(config.epochs_per_batch):
        epoch_report, grad = batch_gradient(groups, new_logits, config, policy)
        if report is None:
            report = epoch_report
        if config.learning_rate != 0.0:
            new_logits = new_logits + config.learning_rate * grad

    updated = policy.copy()
    updated.logits = new_logits
    n_rollouts = len(queries) * config.group_size
    return GrpoStepResult(
        policy=updated,
        report=report,
        groups=groups,
        entropy=entropy_sum / max(entropy_steps, 1),
        mean_len=length_sum / max(n_rollouts, 1),
        truncation_count=truncations,
    )
