from __future__ import annotations

import math
import time

import numpy as np
import pytest

from forge.grpo import (GrpoConfig, TabularPolicy, batch_gradient,
                        batch_objective, grpo_step, sample_rollout,
                        sequence_logprobs, step_distribution)


def toy_policy(rng=None, vocab=6, max_len=4, scale=0.5):
    rng = rng or np.random.default_rng(0)
    return TabularPolicy(
        vocab_size=vocab,
        logits=rng.normal(0.0, scale, (vocab, vocab)),
        start_token=1,
        stop_token=0,
        max_len=max_len,
    )


def token_sum_reward(sequence):
    return sum((t * 7 + 3) % 5 for t in sequence) / 5.0


class TestStepDistribution:
    def test_softmax_without_penalty(self):
        logits = np.zeros((3, 3))
        logits[1] = [0.0, math.log(2.0), math.log(3.0)]
        p = step_distribution(logits, prev=1, emitted=set(), repetition_penalty=1.2)
        assert p == pytest.approx([1 / 6, 2 / 6, 3 / 6])

    def test_penalty_divides_emitted_token_weight(self):
        logits = np.zeros((3, 3))
        logits[1] = [0.0, math.log(2.0), math.log(3.0)]
        p = step_distribution(logits, prev=1, emitted={2}, repetition_penalty=1.2)
        # weight of token 2 drops from 3 to 3/1.2 = 2.5, then renormalize
        expected = np.array([1.0, 2.0, 2.5])
        expected /= expected.sum()
        assert p == pytest.approx(expected)

    def test_no_penalty_when_factor_is_one(self):
        logits = np.random.default_rng(3).normal(size=(4, 4))
        base = step_distribution(logits, 0, set(), 1.0)
        emitted = step_distribution(logits, 0, {1, 2}, 1.0)
        assert base == pytest.approx(emitted)


class TestSampleRollout:
    def test_deterministic_under_seed(self):
        policy = toy_policy()
        config = GrpoConfig(group_size=5)
        a = sample_rollout(policy, (2,), config, np.random.default_rng(9))
        b = sample_rollout(policy, (2,), config, np.random.default_rng(9))
        assert a.tokens == b.tokens
        assert np.array_equal(a.logps, b.logps)

    def test_stop_token_terminates_and_is_kept(self):
        policy = toy_policy()
        # force stop: massive logit toward stop from every state
        policy.logits[:, policy.stop_token] = 50.0
        config = GrpoConfig(group_size=5)
        rollout = sample_rollout(policy, (2,), config, np.random.default_rng(1))
        assert rollout.tokens == (policy.stop_token,)
        assert not rollout.truncated

    def test_truncation_recorded_at_max_len(self):
        policy = toy_policy()
        policy.logits[:, policy.stop_token] = -50.0
        config = GrpoConfig(group_size=5)
        rollout = sample_rollout(policy, (2,), config, np.random.default_rng(1))
        assert len(rollout.tokens) == policy.max_len
        assert rollout.truncated

    def test_logps_match_replay(self):
        policy = toy_policy()
        config = GrpoConfig(group_size=5)
        rollout = sample_rollout(policy, (3,), config, np.random.default_rng(4))
        replayed = sequence_logprobs(policy.logits, (3,), rollout.tokens, config, policy)
        assert replayed == pytest.approx(rollout.logps, abs=1e-12)


class TestGrpoStep:
    def test_zero_learning_rate_is_bitwise_noop(self):
        policy = toy_policy()
        before = policy.logits.copy()
        config = GrpoConfig(group_size=5, learning_rate=0.0)
        result = grpo_step(policy, [(2,), (3,)], token_sum_reward, config,
                           rng=np.random.default_rng(11))
        assert np.array_equal(result.policy.logits, before)

    def test_deterministic_under_seed(self):
        config = GrpoConfig(group_size=5, learning_rate=0.3)
        r1 = grpo_step(toy_policy(), [(2,)], token_sum_reward, config,
                       rng=np.random.default_rng(5))
        r2 = grpo_step(toy_policy(), [(2,)], token_sum_reward, config,
                       rng=np.random.default_rng(5))
        assert np.array_equal(r1.policy.logits, r2.policy.logits)
        assert r1.report == r2.report

    def test_report_counts_rollouts_and_lengths(self):
        config = GrpoConfig(group_size=5)
        result = grpo_step(toy_policy(), [(2,), (3,)], token_sum_reward, config,
                           rng=np.random.default_rng(2))
        assert len(result.groups) == 2
        assert all(len(g.rollouts) == 5 for g in result.groups)
        lengths = [len(r.tokens) for g in result.groups for r in g.rollouts]
        assert result.mean_len == pytest.approx(sum(lengths) / len(lengths))
        assert 0 <= result.entropy <= math.log(6) + 1e-9

    def test_ratios_start_at_one_so_objective_is_advantage_mean(self):
        config = GrpoConfig(group_size=5, kl_beta=0.0)
        result = grpo_step(toy_policy(), [(2,)], token_sum_reward, config,
                           rng=np.random.default_rng(3))
        rewards = [r.reward for r in result.groups[0].rollouts]
        mean = sum(rewards) / len(rewards)
        if max(rewards) - min(rewards) > 1e-8:
            # J = (1/G) sum_i adv_i = 0 for a freshly sampled batch
            assert result.report.objective == pytest.approx(0.0, abs=1e-9)
        assert result.report.mean_reward == pytest.approx(mean)


class TestGradientCheck:
    def test_analytic_gradient_matches_central_differences(self):
        start = time.monotonic()
        rng = np.random.default_rng(42)
        policy = toy_policy(rng=rng, vocab=6, max_len=4)
        ref = toy_policy(rng=rng, vocab=6, max_len=4)
        config = GrpoConfig(group_size=5, kl_beta=0.05, repetition_penalty=1.2)

        result = grpo_step(policy, [(2,), (3,)], token_sum_reward, config,
                           rng=np.random.default_rng(7), ref_policy=ref)
        groups = result.groups
        # evaluate off the sampling point so ratios differ from 1
        theta = policy.logits + np.random.default_rng(1).normal(0, 0.03, policy.logits.shape)
        _, grad = batch_gradient(groups, theta, config, policy)

        h = 1e-5
        max_rel = 0.0
        for i in range(policy.vocab_size):
            for j in range(policy.vocab_size):
                plus = theta.copy()
                plus[i, j] += h
                minus = theta.copy()
                minus[i, j] -= h
                fd = (batch_objective(groups, plus, config, policy)
                      - batch_objective(groups, minus, config, policy)) / (2 * h)
                denom = max(abs(grad[i, j]), abs(fd), 1e-3)
                max_rel = max(max_rel, abs(grad[i, j] - fd) / denom)
        assert max_rel < 1e-4
        assert time.monotonic() - start < 60

    def test_gradient_check_with_zero_beta_and_penalty_off(self):
        config = GrpoConfig(group_size=5, kl_beta=0.0, repetition_penalty=1.0)
        policy = toy_policy(rng=np.random.default_rng(8), vocab=5, max_len=3)
        result = grpo_step(policy, [(2,)], token_sum_reward, config,
                           rng=np.random.default_rng(9))
        theta = policy.logits + 0.01
        _, grad = batch_gradient(result.groups, theta, config, policy)
        h = 1e-5
        for i in range(5):
            for j in range(5):
                plus, minus = theta.copy(), theta.copy()
                plus[i, j] += h
                minus[i, j] -= h
                fd = (batch_objective(result.groups, plus, config, policy)
                      - batch_objective(result.groups, minus, config, policy)) / (2 * h)
                assert abs(grad[i, j] - fd) <= 1e-4 * max(abs(fd), abs(grad[i, j]), 1e-3)
