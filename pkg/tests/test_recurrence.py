"""Recurrence coefficients, the Frobenius oracle and the ODE residual."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lame_series.errors import (
    BranchError,
    InvalidParamsError,
    SingularPointError,
    TruncationOverflowError,
)
from lame_series.models import IndicialRoot, LameParams, PolynomialSpec, Sign
from lame_series.recurrence import (
    Recurrence,
    alpha_for_polynomial,
    coeff_A,
    coeff_B,
    eval_coefficients,
    eval_frobenius,
    frobenius_coeffs,
    graded_frobenius_coeffs,
    graded_recurrence,
    ode_residual,
    polynomial_oracle_coeffs,
    recurrence_coeffs,
    residual_from_coefficients,
    termination_index,
)

FIRST = IndicialRoot.FIRST_KIND
SECOND = IndicialRoot.SECOND_KIND

P_210 = LameParams(a=2, b=1, c=0, q=8, alpha=1)
P_210_FREE = LameParams(a=2, b=1, c=0)
# 2a = b + c and a = 0: every A_n vanishes when q = 0
P_SYM = LameParams(a=0, b=1, c=-1)


# ── coeff_A / coeff_B ────────────────────────────────────────────────

def test_coeff_a_vanishes_for_trivial_params():
    assert coeff_A(P_210_FREE, FIRST, 0) == 0


def test_coeff_a_first_index():
    assert coeff_A(P_210, FIRST, 0) == pytest.approx(-1.0, rel=1e-15)


def test_coeff_a_second_index():
    # -(2a-b-c)·1 / ((a-b)(a-c)·2·1.5) = -3/6
    assert coeff_A(P_210_FREE, FIRST, 1) == pytest.approx(-0.5, rel=1e-15)


def test_coeff_b_vanishes_for_alpha_zero():
    assert coeff_B(P_210_FREE, FIRST, 1) == 0


def test_coeff_b_example():
    p = LameParams(a=2, b=1, c=0, alpha=1)
    assert coeff_B(p, FIRST, 1) == pytest.approx(1 / 12, rel=1e-15)


def test_coeff_b_termination_case():
    p = LameParams(a=3.5, b=-1.2, c=0.7, q=2.0, alpha=4)
    assert coeff_B(p, FIRST, 3) == 0


def test_coeff_b_needs_positive_index():
    with pytest.raises(InvalidParamsError):
        coeff_B(P_210, FIRST, 0)


def test_degenerate_params_rejected():
    with pytest.raises(InvalidParamsError):
        coeff_A(LameParams(a=1, b=1, c=0), FIRST, 0)
    with pytest.raises(InvalidParamsError):
        coeff_B(LameParams(a=1, b=0, c=1), FIRST, 1)


def test_index_cap():
    with pytest.raises(TruncationOverflowError):
        coeff_A(P_210, FIRST, 10**6 + 1)


def test_termination_identity_grid():
    """λ = 0, α = 2(2β + i): B(2β + i + 1) is exactly zero."""
    p = LameParams(a=1.3, b=-0.4, c=2.9, q=0.7)
    for beta in range(10):
        for i in range(10):
            alpha = 2 * (2 * beta + i)
            assert coeff_B(p.with_alpha(alpha), FIRST, 2 * beta + i + 1) == 0


@given(
    a=st.floats(-5, 5), b=st.floats(-5, 5), c=st.floats(-5, 5),
    q=st.floats(-10, 10), alpha=st.floats(-6, 6), n=st.integers(0, 500),
    lam=st.sampled_from([FIRST, SECOND]),
)
@settings(max_examples=200, deadline=None)
def test_coefficients_finite(a, b, c, q, alpha, n, lam):
    p = LameParams(a=a, b=b, c=c, q=q, alpha=alpha)
    if abs(a - b) < 1e-3 or abs(a - c) < 1e-3:
        return
    assert math.isfinite(coeff_A(p, lam, n))
    assert math.isfinite(coeff_B(p, lam, n + 1))


def test_extended_precision_agrees():
    for n in range(5):
        assert coeff_A(P_210, SECOND, n, precision="extended") == pytest.approx(
            coeff_A(P_210, SECOND, n), rel=1e-14
        )


# ── Frobenius coefficients ───────────────────────────────────────────

def test_frobenius_trivial():
    assert frobenius_coeffs(P_210_FREE, FIRST, 2).c == (1.0, 0.0, 0.0)


def test_frobenius_chain():
    seq = frobenius_coeffs(P_210, FIRST, 2)
    assert seq[0] == 1
    assert seq[1] == pytest.approx(-1.0)
    # A_1·(−1) + B_1 = 2/3 + 1/12
    assert seq[2] == pytest.approx(0.75, rel=1e-14)
    assert seq.N == 2


def test_frobenius_second_kind_first_coefficient():
    seq = frobenius_coeffs(P_210, SECOND, 1)
    assert seq.c == (1.0, coeff_A(P_210, SECOND, 0))


def test_frobenius_needs_positive_n():
    with pytest.raises(InvalidParamsError):
        frobenius_coeffs(P_210, FIRST, 0)


def test_recurrence_coeffs_constant():
    # c_{n+1} = 2 c_n: powers of two
    c = recurrence_coeffs(lambda n: 2.0, lambda n: 0.0, 10)
    assert c == [2.0 ** n for n in range(11)]


def test_recurrence_coeffs_explicit_c1():
    c = recurrence_coeffs(lambda n: 0.0, lambda n: 1.0, 6, c1=0.0)
    assert c == [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]


# ── Oracle evaluation ────────────────────────────────────────────────

def test_eval_at_expansion_point():
    assert eval_frobenius(P_210, FIRST, 2.0, 30) == 1.0
    assert eval_frobenius(P_210, SECOND, 2.0, 30) == 0.0


@pytest.mark.parametrize("x", [-3.0, 0.5, 1.7, 2.2, 10.0])
def test_eval_trivial_params_is_one(x):
    assert eval_frobenius(P_210_FREE, FIRST, x, 20) == 1.0


def test_eval_second_kind_branch():
    with pytest.raises(BranchError):
        eval_frobenius(P_210, SECOND, 1.9, 10)


def test_eval_self_consistency():
    """N and N+10 agree within the geometric tail bound."""
    x = 2.1
    r = 0.155  # absolute metric at x = 2.1
    y_n = eval_frobenius(P_210, FIRST, x, 30)
    y_more = eval_frobenius(P_210, FIRST, x, 40)
    assert abs(y_n - y_more) <= r ** 30 / (1 - r) + 1e-15


def test_eval_extended_matches_double():
    y = eval_frobenius(P_210, SECOND, 2.25, 60)
    y_ext = eval_frobenius(P_210, SECOND, 2.25, 60, precision="extended")
    assert y == pytest.approx(y_ext, rel=1e-13)


def test_eval_coefficients_matches_oracle():
    seq = frobenius_coeffs(P_210, FIRST, 25)
    assert eval_coefficients(seq.c, FIRST, 2.1 - 2.0) == pytest.approx(
        eval_frobenius(P_210, FIRST, 2.1, 25), rel=1e-15
    )


# ── ODE residual ─────────────────────────────────────────────────────

@pytest.mark.parametrize("x", [-2.5, 0.5, 1.5, 3.0])
def test_residual_trivial_params_is_zero(x):
    assert ode_residual(P_210_FREE, FIRST, x, 10) == 0.0


def test_residual_at_singular_points():
    for x in (2.0, 1.0, 0.0):
        with pytest.raises(SingularPointError):
            ode_residual(P_210, FIRST, x, 10)


@pytest.mark.parametrize("x", [2.1, 2.3, 1.8])
def test_residual_decreases_when_depth_doubles(x):
    r_n = abs(ode_residual(P_210, FIRST, x, 8))
    r_2n = abs(ode_residual(P_210, FIRST, x, 16))
    assert r_2n * 10 <= r_n


def test_residual_second_kind_decreases():
    r_n = abs(ode_residual(P_210, SECOND, 2.2, 8))
    r_2n = abs(ode_residual(P_210, SECOND, 2.2, 16))
    assert r_2n * 10 <= r_n


def test_residual_exact_quadratic():
    """a=0, b=1, c=−1, q=0, α=4: y = 1 − (5/3)x² solves the equation."""
    p = P_SYM.with_alpha(4.0)
    coeffs = [1.0, 0.0, -5 / 3]
    for x in np.linspace(-0.9, 0.9, 20):
        if abs(x) < 1e-9:
            continue
        assert abs(residual_from_coefficients(p, FIRST, coeffs, float(x))) < 1e-12


def test_residual_exact_square_root():
    """α=1, q=b+c, λ=½: y = (x−a)^{1/2}."""
    p = LameParams(a=2, b=1, c=0, q=1, alpha=1)
    for x in np.linspace(2.05, 2.95, 20):
        assert abs(residual_from_coefficients(p, SECOND, [1.0], float(x))) < 1e-12


# ── Polynomial family ────────────────────────────────────────────────

def test_alpha_for_polynomial_branches():
    assert alpha_for_polynomial(0, 1, FIRST) == 4
    assert alpha_for_polynomial(0, 1, FIRST, Sign.MINUS) == -5
    assert alpha_for_polynomial(0, 0, SECOND) == 1
    assert alpha_for_polynomial(0, 0, SECOND, Sign.MINUS) == -2
    assert alpha_for_polynomial(2, 1, SECOND) == 2 * (2 + 2 + 0.5)


@pytest.mark.parametrize("lam", [FIRST, SECOND])
@pytest.mark.parametrize("sign", [Sign.PLUS, Sign.MINUS])
def test_termination_index_roundtrip(lam, sign):
    for j in range(4):
        for alpha_j in range(5):
            alpha = alpha_for_polynomial(j, alpha_j, lam, sign)
            assert termination_index(alpha, lam, level=j) == alpha_j
            p = LameParams(a=1.5, b=-0.5, c=0.25, alpha=alpha)
            assert coeff_B(p, lam, 2 * alpha_j + j + 1) == 0


def test_termination_index_none():
    assert termination_index(3.0, FIRST) is None
    assert termination_index(2.0, FIRST, level=0) is None
    assert termination_index(2.0, FIRST, level=1) == 0


def test_graded_recurrence_sums_to_plain():
    rec = Recurrence(P_210, FIRST)
    table = graded_recurrence([rec.A] * 30, [rec.B] * 30, 25)
    plain = recurrence_coeffs(rec.A, rec.B, 25)
    for n in range(26):
        total = math.fsum(table[m][n] for m in range(len(table)))
        assert total == pytest.approx(plain[n], rel=1e-12, abs=1e-15)


def test_polynomial_oracle_coefficients():
    spec = PolynomialSpec(j=0, alpha_seq=(1,))
    coeffs = polynomial_oracle_coeffs(P_SYM, spec, 0.0, FIRST)
    assert coeffs == pytest.approx([1.0, 0.0, -5 / 3, 0.0])


def test_polynomial_oracle_matches_frobenius_when_a_vanishes():
    spec = PolynomialSpec(j=0, alpha_seq=(2,))
    p = P_SYM.with_alpha(spec.alpha(FIRST))
    coeffs = polynomial_oracle_coeffs(P_SYM, spec, 0.0, FIRST)
    plain = frobenius_coeffs(p, FIRST, len(coeffs) - 1).c
    assert coeffs == pytest.approx(list(plain), rel=1e-14, abs=1e-15)


def test_graded_frobenius_uses_level_alpha():
    table = graded_frobenius_coeffs(P_210, FIRST, [P_210.alpha] * 12, 10)
    plain = frobenius_coeffs(P_210, FIRST, 10).c
    for n in range(11):
        assert math.fsum(row[n] for row in table) == pytest.approx(plain[n], rel=1e-12, abs=1e-15)

    mixed = graded_frobenius_coeffs(P_210, FIRST, [2.0, 6.0], 4)
    # level 0 only takes B-steps, at α = 2
    assert mixed[0][2] == pytest.approx(coeff_B(P_210.with_alpha(2.0), FIRST, 1))
    assert mixed[1][1] == pytest.approx(coeff_A(P_210.with_alpha(2.0), FIRST, 0))
