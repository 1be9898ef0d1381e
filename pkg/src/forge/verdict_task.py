"""Desk-scale verdict task for exercising the GRPO trainer end to end.

A ten-token vocabulary decodes into miniature compliance responses. Two query
markers carry the gold label; routing through label-specific think/body
fragments to the right boxed verdict earns the full rule-based reward, so the
trainer has to learn two disjoint three-hop chains.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .grpo import GrpoConfig, GrpoStepResult, TabularPolicy, grpo_step
from .rewards import PERMITTED, PROHIBITED, GoldLabel, RewardConfig, total_reward

STOP = 0
START = 1
Q_PROHIBITED = 2
Q_PERMITTED = 3
THINK_PROHIBIT = 4
THINK_PERMIT = 5
BODY_PROHIBIT = 6
BODY_PERMIT = 7
BOX_PROHIBIT = 8
BOX_PERMIT = 9

VOCAB_SIZE = 10
MAX_LEN = 4

# Query/control tokens decode to nothing, so only structural mistakes
# (missing think block, empty body, wrong or missing box) cost reward.
DECODE = {
    STOP: "",
    START: "",
    Q_PROHIBITED: "",
    Q_PERMITTED: "",
    THINK_PROHIBIT: "<think>The seeded clause bans this practice outright.</think> ",
    THINK_PERMIT: "<think>Every condition of the carve-out is met here.</think> ",
    BODY_PROHIBIT: "The deployment falls squarely under the prohibition. ",
    BODY_PERMIT: "The deployment stays within the permitted exception. ",
    BOX_PROHIBIT: "\\boxed{prohibited}",
    BOX_PERMIT: "\\boxed{permitted}",
}

GOLD_BY_QUERY = {
    Q_PROHIBITED: GoldLabel(PROHIBITED),
    Q_PERMITTED: GoldLabel(PERMITTED),
}

QUERIES = [(Q_PROHIBITED,), (Q_PERMITTED,)]


def decode(tokens) -> str:
    return "".join(DECODE[t] for t in tokens)


CONTROL_TOKENS = (START, Q_PROHIBITED, Q_PERMITTED)


def make_policy() -> TabularPolicy:
    """Initial demo policy: uniform over the content tokens, with the
    context-only markers biased far down so sampling explores real
    think/body/box structure from the start."""
    logits = np.zeros((VOCAB_SIZE, VOCAB_SIZE))
    logits[:, list(CONTROL_TOKENS)] = -8.0
    return TabularPolicy(
        vocab_size=VOCAB_SIZE, logits=logits,
        start_token=START, stop_token=STOP, max_len=MAX_LEN)


def verdict_reward(sequence, reward_config: RewardConfig = RewardConfig()) -> float:
    """Score a full query+output sequence with the rule-based reward."""
    sequence = tuple(sequence)
    gold = GOLD_BY_QUERY.get(sequence[0]) if sequence else None
    if gold is None:
        raise ValueError("sequence must start with a query marker token")
    text = decode(sequence[1:])
    return total_reward(text, gold, reward_config).total


@dataclass
class StepMetrics:
    step: int
    objective: float
    mean_reward: float
    clip_fraction: float
    mean_kl: float
    entropy: float
    mean_len: float

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "objective": self.objective,
            "mean_reward": self.mean_reward,
            "clip_fraction": self.clip_fraction,
            "mean_kl": self.mean_kl,
            "entropy": self.entropy,
            "mean_len": self.mean_len,
        }


DEMO_CONFIG = GrpoConfig(
    group_size=5,
    clip_epsilon=0.2,
    kl_beta=0.0,
    learning_rate=25.0,
    repetition_penalty=1.2,
)

# Default RNG seed for the shipped demo. Group-relative training on this task
# can wrong-lock (a query group collapses onto the format-only 1/9 path, goes
# reward-degenerate, and stops learning); the pinned seed avoids that and
# yields a dip-free consolidated tail.
DEMO_SEED = 12

# Once a trailing window of steps is fully solved, switch to a much larger
# consolidation rate: every residual failure then pushes its culprit token
# far enough down that late-stage exploration dips die out.
CONSOLIDATION_LR = 200.0
CONSOLIDATION_WINDOW = 5
CONSOLIDATION_LEVEL = 1.0


def train(steps: int = 500, config: GrpoConfig = DEMO_CONFIG, rng_seed: int = DEMO_SEED,
          reward_config: RewardConfig = RewardConfig(),
          metrics_path: Path | None = None,
          consolidation_lr: float | None = CONSOLIDATION_LR,
          on_step=None) -> tuple[TabularPolicy, list[StepMetrics]]:
    """Run the toy training loop, optionally streaming a JSON-Lines metrics log."""
    rng = np.random.default_rng(rng_seed)
    policy = make_policy()
    ref_policy = policy.copy()
    history: list[StepMetrics] = []
    recent: list[float] = []

    def reward_fn(sequence):
        return verdict_reward(sequence, reward_config)

    sink = open(metrics_path, "w", encoding="utf-8") if metrics_path else None
    try:
        for step in range(1, steps + 1):
            step_config = config
            if (consolidation_lr is not None
                    and len(recent) >= CONSOLIDATION_WINDOW
                    and min(recent[-CONSOLIDATION_WINDOW:]) >= CONSOLIDATION_LEVEL):
                step_config = replace(
                    config, learning_rate=consolidation_lr, kl_beta=0.0)
            result: GrpoStepResult = grpo_step(
                policy, QUERIES, reward_fn, step_config, rng=rng, ref_policy=ref_policy)
            policy = result.policy
            recent.append(result.report.mean_reward)
            metrics = StepMetrics(
                step=step,
                objective=result.report.objective,
                mean_reward=result.report.mean_reward,
                clip_fraction=result.report.clip_fraction,
                mean_kl=result.report.mean_kl,
                entropy=result.entropy,
                mean_len=result.mean_len,
            )
            history.append(metrics)
            if sink:
                sink.write(json.dumps(metrics.to_json()) + "\n")
            if on_step:
                on_step(metrics)
    finally:
        if sink:
            sink.close()
    return policy, history


def moving_average(values: list[float], window: int = 5) -> list[float]:
    out = []
    for i in range(window - 1, len(values)):
        out.append(sum(values[i - window + 1:i + 1]) / window)
    return out
