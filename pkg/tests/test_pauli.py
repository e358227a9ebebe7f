from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcauset.action import bd_truncated
from qcauset.causet import CausalMatrix, count_violations, n_pairs
from qcauset.errors import UsageError
from qcauset.pauli import (
    GammaConfig,
    PauliHamiltonian,
    PauliTerm,
    alpha_bd,
    alpha_tc,
    binary_to_pauli,
    build_h_bd,
    build_h_mix,
    build_h_tc,
    combine,
    diagonal_value,
    diagonal_vector,
    frobenius_sq,
    term_weights,
    to_dense,
)


def test_term_validation_and_text():
    t = PauliTerm(0.5, ((2, "Z"), (0, "Z")))
    assert t.qubits == (0, 2)
    assert PauliTerm.from_text(t.to_text()) == t
    with pytest.raises(UsageError):
        PauliHamiltonian(2, (PauliTerm(1.0, ((0, "X"), (1, "X"))),))


def test_hamiltonian_text_round_trip():
    h = combine(GammaConfig(0.8, 0.03), 3)
    back = PauliHamiltonian.from_text(3, h.to_text())
    assert np.allclose(to_dense(back), to_dense(h), atol=1e-15)


def test_tc_spin_form_n3():
    # P/8 (1 - Z12)(1 - Z23)(1 + Z13); qubits are (1,2)=0, (1,3)=1, (2,3)=2
    h = build_h_tc(3, p=2.0)
    coeffs = {t.qubits: t.coefficient for t in h.terms}
    want = {(): 1, (0,): -1, (2,): -1, (1,): 1, (0, 2): 1, (0, 1): -1, (1, 2): -1, (0, 1, 2): 1}
    assert set(coeffs) == set(want)
    for k, sign in want.items():
        assert coeffs[k] == pytest.approx(sign * 2.0 / 8)


def test_tc_examples():
    assert diagonal_value(build_h_tc(3, 1.0), CausalMatrix.from_string("3:101")) == pytest.approx(1.0)
    m = next(CausalMatrix(5, b) for b in range(1 << 10) if count_violations(CausalMatrix(5, b)) == 3)
    assert diagonal_value(build_h_tc(5, 1.7), m) == pytest.approx(3 * 1.7)
    assert len(build_h_tc(2)) == 0


@pytest.mark.parametrize("n", [3, 4, 5])
def test_tc_diagonal_counts_violations(n):
    diag = diagonal_vector(build_h_tc(n, 1.3))
    want = np.array([1.3 * count_violations(b, n) for b in range(1 << n_pairs(n))])
    assert np.max(np.abs(diag - want)) <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_bd_diagonal_matches_truncated_action(n):
    diag = diagonal_vector(build_h_bd(n, 0.1, 4))
    want = np.array([bd_truncated(CausalMatrix(n, b), 0.1, 4) for b in range(1 << n_pairs(n))])
    assert np.max(np.abs(diag - want)) <= 1e-12


def test_bd_term_count_grows_cubically():
    counts = {n: len(build_h_bd(n)) for n in range(3, 8)}
    ratios = [counts[n] / n**3 for n in counts]
    assert max(ratios) / min(ratios) < 3
    assert all(t.is_diagonal for t in build_h_bd(5).terms)
    assert max(len(t.qubits) for t in build_h_bd(5).terms) == 3


@given(st.dictionaries(st.frozensets(st.integers(0, 4), max_size=3), st.floats(-3, 3), max_size=6))
def test_binary_to_pauli_preserves_values(mono):
    h = binary_to_pauli(mono, 5)
    diag = diagonal_vector(h)
    for b in range(32):
        want = sum(c for s, c in mono.items() if all(b >> k & 1 for k in s))
        assert diag[b] == pytest.approx(want, abs=1e-12)


def test_diagonal_value_rejects_mixer():
    with pytest.raises(UsageError):
        diagonal_value(build_h_mix(3), 0)


def test_dense_matches_diagonal_plus_mixer():
    h = combine(GammaConfig(0.7, 0.1), 3)
    dense = to_dense(h)
    assert np.allclose(np.diag(dense).real, diagonal_vector(h))
    assert np.allclose(dense, dense.conj().T)
    # one X term per qubit with the mixer weight
    g = GammaConfig(0.7, 0.1)
    assert dense[1, 0] == pytest.approx(g.gamma_mix)


def test_gamma_config():
    g = GammaConfig(0.8, 0.04)
    assert sum(g.gammas) == pytest.approx(1.0)
    assert g.gamma_bd == pytest.approx(0.2 * 0.04)
    with pytest.raises(UsageError):
        GammaConfig(1.2)


def test_normalisations():
    assert alpha_bd(6, 0.1) == pytest.approx(50.0)
    assert alpha_tc(4) == pytest.approx(math.sqrt(6) * 4 / 8)
    # the mixer has Frobenius norm^2 q; the scaled action term matches it to leading order
    assert frobenius_sq(build_h_mix(6)) == 6
    w = term_weights(GammaConfig(0.5, 0.5), 4, 0.1, tc_scale=2.0, bd_scale=3.0)
    assert (w.tc, w.bd, w.mix) == pytest.approx((1.0, 0.75, 0.25))


def test_combine_uniform_has_no_action_term():
    h = combine(GammaConfig(0.8, 0.0), 4)
    ref = build_h_tc(4).scaled(0.8 * alpha_tc(4)) + build_h_mix(6, 0.2)
    assert np.allclose(diagonal_vector(h), diagonal_vector(ref), atol=1e-12)
