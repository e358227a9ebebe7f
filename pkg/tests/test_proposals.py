from __future__ import annotations

import numpy as np
import pytest

from qcauset.causet import CausalMatrix, CausalSet, enumerate_causal_sets, is_transitive, n_pairs
from qcauset.errors import UsageError
from qcauset.proposals import (
    ParameterSample,
    ProposalStrategy,
    averaged_kernel,
    is_link,
    link_target,
    propose,
    propose_link,
    propose_relation,
    proposal_distribution,
    proposal_kernel,
    quantum_proposer,
)

SAMPLE = ParameterSample(r_tc=0.8, r_bd=0.0, steps=4)


def test_relation_flip_examples():
    s = CausalMatrix.from_string("3:101")
    assert is_transitive(s.flip(1))  # add (1,3)
    chain = CausalMatrix.from_string("3:111")
    assert is_transitive(chain.flip(0))  # drop (1,2): 1<3 and 2<3 remain
    assert not is_transitive(chain.flip(1))  # drop (1,3) only


def test_relation_move_flips_one_bit():
    s = CausalSet.chain(4)
    for seed in range(20):
        m = propose_relation(s, seed)
        assert bin(m.bits ^ s.bits).count("1") == 1


def test_link_move():
    chain = CausalSet.chain(3)
    assert is_link(chain.bits, 3, 0) and not is_link(chain.bits, 3, 1)
    assert link_target(chain.bits, 3, 1) == chain.bits  # (1,3) is not a link
    assert link_target(chain.bits, 3, 0) == 0b110  # drop link (1,2)
    v = CausalSet.from_relations(3, [(1, 2)])
    assert link_target(v.bits, 3, 2) == v.bits  # adding 2<3 alone breaks transitivity
    for seed in range(30):
        assert is_transitive(propose_link(CausalSet.chain(4), seed))


@pytest.mark.parametrize("kind", ["relation", "link", "classical-mixed"])
def test_classical_distributions_are_normalised(kind):
    strat = ProposalStrategy(kind=kind)
    for s in enumerate_causal_sets(4):
        p = proposal_distribution(s, strat)
        assert p.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_classical_kernels_coincide_on_valid_sets(n):
    # a valid single-bit flip is exactly a link removal or a safe addition
    k_rel = proposal_kernel(n, ProposalStrategy(kind="relation"))
    k_link = proposal_kernel(n, ProposalStrategy(kind="link"))
    k_mix = proposal_kernel(n, ProposalStrategy(kind="classical-mixed"))
    off = ~np.eye(k_rel.shape[0], dtype=bool)
    assert np.allclose(k_rel[off], k_link[off])
    assert np.allclose(k_rel[off], k_mix[off])
    assert np.allclose(k_rel, k_rel.T)


def test_quantum_distribution_normalised_and_leaky():
    strat = ProposalStrategy.uniform_quantum()
    p = proposal_distribution(CausalSet.chain(3), strat, SAMPLE)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    invalid = [b for b in range(8) if not is_transitive(b, 3)]
    assert p[invalid].sum() > 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_quantum_kernel_symmetric(n):
    strat = ProposalStrategy.weighted_quantum()
    samples = strat.draw_parameter_samples(5)
    k = averaged_kernel(n, strat, samples)
    assert np.max(np.abs(k - k.T)) <= 1e-10
    assert np.all(k.sum(axis=1) <= 1 + 1e-12)


def test_kernel_matches_distribution_rows():
    strat = ProposalStrategy.uniform_quantum()
    sets = enumerate_causal_sets(3)
    k = proposal_kernel(3, strat, SAMPLE)
    for a, s in enumerate(sets):
        p = proposal_distribution(s, strat, SAMPLE)
        assert np.allclose(k[a], p[[t.bits for t in sets]])


def test_diagonal_cache_matches_combined_hamiltonian():
    from qcauset.pauli import diagonal_vector

    strat = ProposalStrategy.weighted_quantum()
    qp = quantum_proposer(4, strat)
    sample = ParameterSample(0.75, 0.04, 3)
    diag, mix = qp.diagonal(sample)
    h = qp.hamiltonian(sample)
    assert np.allclose(diag, diagonal_vector(h), atol=1e-12)
    assert mix == pytest.approx(0.25 * 0.96)


def test_parameter_draws_and_ranges():
    strat = ProposalStrategy(r_bd_range=(0.05, 0.02))
    assert strat.r_bd_range == (0.02, 0.05)
    draws = strat.draw_parameter_samples(3, 200)
    assert all(0.7 <= d.r_tc <= 0.9 and 0.02 <= d.r_bd <= 0.05 and 3 <= d.steps <= 10 for d in draws)
    assert {d.steps for d in draws} == set(range(3, 11))
    assert strat.draw_parameter_samples(3) == strat.draw_parameter_samples(3)
    assert len(strat.draw_parameter_samples(3)) == 10


def test_strategy_validation():
    with pytest.raises(UsageError):
        ProposalStrategy(kind="teleport")
    with pytest.raises(UsageError):
        ProposalStrategy(r_tc_range=(0.5, 1.5))
    with pytest.raises(UsageError):
        proposal_kernel(3, ProposalStrategy())


def test_propose_is_seed_deterministic():
    strat = ProposalStrategy.uniform_quantum()
    s = CausalSet.chain(4)
    a = [propose(s, strat, seed).bits for seed in range(5)]
    b = [propose(s, strat, seed).bits for seed in range(5)]
    assert a == b
    assert all(0 <= x < 1 << n_pairs(4) for x in a)
