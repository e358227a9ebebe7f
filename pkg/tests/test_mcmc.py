from __future__ import annotations

import math

import numpy as np
import pytest

from qcauset.action import bd_action_4d
from qcauset.causet import CausalMatrix, CausalSet, enumerate_causal_sets, is_transitive
from qcauset.errors import UsageError
from qcauset.mcmc import (
    AcceptanceRule,
    accept,
    boltzmann_distribution,
    empirical_distribution,
    run_chain,
    target_distribution,
    total_variation,
    uniform_distribution,
)
from qcauset.proposals import ProposalStrategy


def test_invalid_always_rejected():
    s = CausalSet.chain(3)
    bad = CausalMatrix.from_string("3:101")
    for rule in (AcceptanceRule.uniform(), AcceptanceRule.metropolis(0.004)):
        assert not any(accept(rule, s, bad, seed) for seed in range(10))
        assert rule.acceptance_probability(s, bad) == 0.0


def test_uniform_accepts_every_valid():
    rule = AcceptanceRule.uniform()
    s = CausalSet.chain(3)
    assert all(accept(rule, s, t.matrix, i) for i, t in enumerate(enumerate_causal_sets(3)))


def test_metropolis_probabilities():
    rule = AcceptanceRule.metropolis(0.5)
    lo, hi = sorted(enumerate_causal_sets(3), key=bd_action_4d)[::6]
    assert rule.acceptance_probability(hi, lo.matrix) == 1.0
    p = rule.acceptance_probability(lo, hi.matrix)
    assert p == pytest.approx(math.exp(-2.0 * (bd_action_4d(hi) - bd_action_4d(lo))))
    hits = sum(accept(rule, lo, hi.matrix, seed) for seed in range(4000))
    assert abs(hits / 4000 - p) < 4 * math.sqrt(p * (1 - p) / 4000)


def test_weight_hook_enters_ratio():
    hook = lambda old, new: 0.5  # noqa: E731
    rule = AcceptanceRule.metropolis(1e9, weight_hook=hook)
    s = CausalSet.chain(3)
    assert rule.acceptance_probability(s, s.matrix) == pytest.approx(0.5, rel=1e-6)


def test_rule_validation():
    with pytest.raises(UsageError):
        AcceptanceRule.metropolis(-1.0)
    with pytest.raises(UsageError):
        AcceptanceRule("metropolis")


def test_chain_stays_valid_and_reproduces():
    strat = ProposalStrategy.uniform_quantum()
    rule = AcceptanceRule.uniform()
    a = run_chain(CausalSet.antichain(4), strat, rule, 400, seed=11, record_trace=True)
    b = run_chain(CausalSet.antichain(4), strat, rule, 400, seed=11, record_trace=True)
    assert a.samples == b.samples
    assert a.trace_csv() == b.trace_csv()
    assert all(is_transitive(x, 4) for x in a.samples)
    assert len(a.samples) == 360
    assert a.abundances.shape == (360, 3)
    assert 0 < a.invalid_rate < 1


def test_burn_in_and_thinning():
    res = run_chain(CausalSet.antichain(3), ProposalStrategy(kind="relation"), AcceptanceRule.uniform(),
                    100, burn_in=20, thin=4, seed=1)
    assert len(res.samples) == 20
    with pytest.raises(UsageError):
        run_chain(CausalSet.antichain(3), ProposalStrategy(kind="relation"), AcceptanceRule.uniform(), 10, burn_in=10)


def test_trace_format():
    res = run_chain(CausalSet.antichain(3), ProposalStrategy(kind="relation"),
                    AcceptanceRule.metropolis(1.0), 3, burn_in=0, seed=2, record_trace=True)
    lines = res.trace_csv().splitlines()
    assert lines[0] == "step,set,action,accepted"
    assert len(lines) == 4
    step, key, act, acc = lines[1].split(",")
    assert step == "1" and key.startswith("3:") and acc in "01"
    assert float(act) == pytest.approx(bd_action_4d(CausalSet.from_string(key)))


def test_uniform_chain_converges_n3():
    res = run_chain(CausalSet.antichain(3), ProposalStrategy(kind="relation"), AcceptanceRule.uniform(),
                    20000, seed=5)
    assert total_variation(empirical_distribution(res.samples, 3), uniform_distribution(3)) < 0.05


def test_boltzmann_law():
    nu = boltzmann_distribution(3, 2.0)
    s = enumerate_causal_sets(3)
    w = np.exp(-2.0 * np.array([bd_action_4d(x) for x in s]))
    assert np.allclose(nu, w / w.sum())
    assert np.allclose(target_distribution(3, AcceptanceRule.metropolis(0.5)), nu)
    assert np.allclose(target_distribution(3, AcceptanceRule.uniform()), 1 / 7)


def test_empirical_distribution_rejects_strangers():
    from qcauset.errors import VerificationError

    with pytest.raises(VerificationError):
        empirical_distribution([0b101], 3)
