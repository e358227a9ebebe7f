from __future__ import annotations

import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcauset.action import (
    LAYER_COEFFICIENTS,
    SmearedActionParams,
    action_for,
    bd_action_2d_exact,
    bd_action_4d,
    bd_action_d,
    bd_action_smeared,
    bd_truncated,
    c2_d,
    f4,
    fd,
)
from qcauset.causet import CausalMatrix, CausalSet, enumerate_causal_sets
from qcauset.errors import ConfigError, UsageError


def f4_closed(j: int, e: Fraction) -> Fraction:
    """Unexpanded smearing weight, valid for e < 1."""
    u = 1 - e
    return u**j * (
        1
        - 9 * e * j / u
        + 8 * e**2 * j * (j - 1) / u**2
        - Fraction(4, 3) * e**3 * j * (j - 1) * (j - 2) / u**3
    )


def interval_counts(s: CausalSet) -> list[int]:
    n = s.n
    out = []
    for i, k in itertools.combinations(range(1, n + 1), 2):
        if s.matrix.related(i, k):
            out.append(sum(s.matrix.related(i, j) and s.matrix.related(j, k) for j in range(i + 1, k)))
    return out


def oracle_4d(s: CausalSet, e: Fraction) -> float:
    inner = sum(f4_closed(j, e) for j in interval_counts(s))
    return 4 / math.sqrt(6) * math.sqrt(e) * float(s.n - e * inner)


def test_f4_values():
    assert f4(0, 0.1) == 1.0
    assert f4(1, 0.1) == pytest.approx(0.0, abs=1e-15)
    assert f4(2, 0.1) == pytest.approx(-0.65, abs=1e-14)
    # unsmeared limit: only the j-th layer survives
    assert [f4(j, 1.0) for j in range(5)] == [1.0, -9.0, 16.0, -8.0, 0.0]


@given(st.integers(0, 12), st.fractions(Fraction(1, 100), Fraction(99, 100)))
def test_f4_matches_closed_form(j, e):
    assert f4(j, float(e)) == pytest.approx(float(f4_closed(j, e)), rel=1e-9, abs=1e-9)


@given(st.integers(0, 12), st.floats(0.01, 1.0))
def test_fd_with_4d_coefficients_is_f4(j, e):
    assert fd(j, e, LAYER_COEFFICIENTS[4]) == pytest.approx(f4(j, e), rel=1e-9, abs=1e-12)


def test_f4_rejects_bad_input():
    with pytest.raises(UsageError):
        f4(-1, 0.1)
    with pytest.raises(UsageError):
        f4(1, 0.0)


def test_c2_values():
    assert c2_d(4) == -9.0
    assert c2_d(2) == -2.0
    assert c2_d(3) == pytest.approx(1 - 105 / 24)
    assert c2_d(4) == LAYER_COEFFICIENTS[4][1]
    assert c2_d(2) == LAYER_COEFFICIENTS[2][1]


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_4d_action_matches_oracle(n):
    e = Fraction(1, 10)
    for s in enumerate_causal_sets(n):
        assert bd_action_4d(s, 0.1) == pytest.approx(oracle_4d(s, e), abs=1e-12)


def test_4d_action_frozen_values():
    # computed with the rational oracle above
    assert bd_action_4d(CausalSet.antichain(3)) == pytest.approx(1.5491933384829668, abs=1e-12)
    assert bd_action_4d(CausalSet.chain(3)) == pytest.approx(1.4459137825841024, abs=1e-12)
    assert bd_action_4d(CausalSet.chain(4)) == pytest.approx(1.9442376397961236, abs=1e-12)


@pytest.mark.parametrize("n", [3, 4])
def test_general_smeared_reduces_to_4d(n):
    p = SmearedActionParams(epsilon=0.2, dimension=4)
    for s in enumerate_causal_sets(n):
        assert bd_action_smeared(s, p) == pytest.approx(bd_action_4d(s, 0.2), abs=1e-12)


def test_2d_exact_examples():
    assert bd_action_2d_exact(CausalSet.chain(2)) == 0.0
    assert bd_action_2d_exact(CausalSet.chain(3)) == 6.0
    assert bd_action_2d_exact(CausalSet.antichain(4)) == 8.0


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_2d_smeared_unsmeared_limit_is_exact(n):
    p = SmearedActionParams(epsilon=1.0, dimension=2)
    for s in enumerate_causal_sets(n):
        assert bd_action_smeared(s, p) == pytest.approx(bd_action_2d_exact(s), abs=1e-12)


def test_first_order_expansion_slope():
    # first-order f_d(j) = 1 + (C2 - 1) j e
    p = SmearedActionParams(epsilon=0.05, dimension=4)
    s = CausalSet.chain(3)
    inner = 2 * 1.0 + (1 + (c2_d(4) - 1) * 0.05)
    want = 4 / math.sqrt(6) * math.sqrt(0.05) * (3 - 0.05 * inner)
    assert bd_action_d(s, p) == pytest.approx(want, abs=1e-12)


def test_truncated_on_valid_sets_equals_first_order():
    p = SmearedActionParams(epsilon=0.1, dimension=4)
    for s in enumerate_causal_sets(4):
        assert bd_truncated(s, params=p) == pytest.approx(bd_action_d(s, p), abs=1e-12)


def test_truncated_defined_on_invalid_configuration():
    m = CausalMatrix.from_string("3:101")
    # Lambda_13 = C12 C23 = 1 although C13 = 0, so only the two links contribute
    want = 4 / math.sqrt(6) * math.sqrt(0.1) * (3 - 0.1 * 2)
    assert bd_truncated(m, 0.1, 4) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_truncation_error_is_order_e_3p5(n):
    for s in enumerate_causal_sets(n):
        errs = [abs(bd_truncated(s, e, 4) - bd_action_4d(s, e)) / e**3.5 for e in (0.1, 0.05, 0.025)]
        assert max(errs) <= 4 * min(errs) + 1e-9


def test_missing_constants_is_config_error():
    p = SmearedActionParams(epsilon=0.1, dimension=6)
    with pytest.raises(ConfigError):
        bd_action_d(CausalSet.chain(3), p)
    q = SmearedActionParams(epsilon=0.1, dimension=6, alpha_d=-1.0, beta_d=1.0)
    assert math.isfinite(bd_action_d(CausalSet.chain(3), q))
    with pytest.raises(ConfigError):
        bd_action_smeared(CausalSet.chain(3), q)


def test_action_for_dispatch():
    p = SmearedActionParams()
    s = CausalSet.chain(3)
    assert action_for(p)(s) == bd_action_4d(s)
    assert action_for(p, "exact-2d")(s) == 6.0
    with pytest.raises(UsageError):
        action_for(p, "nope")
