"""Pochhammer, beta, the Gauss series and the 2F1 kernel identity."""

import math
import warnings

import numpy as np
import pytest
from scipy import special

from lame_series.errors import (
    INDEX_CAP,
    DivergenceError,
    DivergenceWarning,
    DomainError,
    TruncationOverflowError,
)
from lame_series.hypergeometric import (
    beta_fn,
    gauss_2f1,
    hyp2f1_terms,
    infinite_kernel_identity_gap,
    kernel_identity_gap,
    leading_args,
    leading_term_check,
    pochhammer,
)
from lame_series.models import Hyp2F1Args, IndicialRoot, LameParams, TruncationSpec

FIRST = IndicialRoot.FIRST_KIND
SECOND = IndicialRoot.SECOND_KIND
LONG = TruncationSpec(i_max=400)


# ── Pochhammer / beta ────────────────────────────────────────────────

def test_pochhammer_examples():
    assert pochhammer(3, 2) == 12
    assert pochhammer(0.5, 3) == pytest.approx(1.875)
    assert pochhammer(-2, 3) == 0
    assert pochhammer(7.3, 0) == 1


def test_pochhammer_split():
    for x in (-2.5, 0.3, 1.0, 4.75):
        for m in range(5):
            for n in range(5):
                assert pochhammer(x, m + n) == pytest.approx(
                    pochhammer(x, m) * pochhammer(x + m, n), rel=1e-13, abs=1e-13
                )


def test_pochhammer_negative_n():
    with pytest.raises(DomainError):
        pochhammer(1.0, -1)


def test_beta_examples():
    assert beta_fn(1, 1) == pytest.approx(1.0)
    assert beta_fn(2, 3) == pytest.approx(1 / 12)
    assert beta_fn(0.5, 0.5) == pytest.approx(math.pi)


def test_beta_symmetry_and_recurrence():
    for p in (0.3, 1.0, 2.7):
        for q in (0.6, 1.5, 4.0):
            assert beta_fn(p, q) == pytest.approx(beta_fn(q, p), rel=1e-14)
            assert beta_fn(p + 1, q) == pytest.approx(beta_fn(p, q) * p / (p + q), rel=1e-13)


def test_beta_extended_matches_scipy():
    assert beta_fn(1.25, 3.5, precision="extended") == pytest.approx(special.beta(1.25, 3.5), rel=1e-14)


def test_beta_domain():
    with pytest.raises(DomainError):
        beta_fn(0, 1)
    with pytest.raises(DomainError):
        beta_fn(1, -0.5)


# ── Gauss 2F1 ────────────────────────────────────────────────────────

def test_gauss_log():
    z = 0.4
    assert gauss_2f1(Hyp2F1Args(1, 1, 2, z), LONG) == pytest.approx(-math.log(1 - z) / z, rel=1e-13)


def test_gauss_binomial():
    z = -0.3
    assert gauss_2f1(Hyp2F1Args(2.5, 1.7, 1.7, z), LONG) == pytest.approx((1 - z) ** -2.5, rel=1e-13)


def test_gauss_terminating_polynomial():
    b, c, z = 1.5, 0.75, 0.2
    expected = 1 - 2 * b * z / c + b * (b + 1) * z * z / (c * (c + 1))
    assert gauss_2f1(Hyp2F1Args(-2, b, c, z)) == pytest.approx(expected, rel=1e-15)


def test_gauss_terminating_independent_of_truncation():
    args = Hyp2F1Args(-4, 2.25, 0.75, 0.6)
    short = gauss_2f1(args, TruncationSpec(i_max=4))
    long = gauss_2f1(args, TruncationSpec(i_max=500, tol=1e-3))
    assert short == long
    assert len(hyp2f1_terms(args)) == 5


def test_gauss_terminating_degree_above_i_max():
    args = Hyp2F1Args(-45, 1, 1, -0.1)
    assert len(hyp2f1_terms(args)) == 46
    assert gauss_2f1(args) == pytest.approx(1.1 ** 45, rel=1e-13)
    assert gauss_2f1(args, TruncationSpec(i_max=3)) == gauss_2f1(args)
    # (1 - 0.5)^45: heavy cancellation, needs the wider context
    tiny = gauss_2f1(Hyp2F1Args(-45, 1, 1, 0.5), precision="extended")
    assert tiny == pytest.approx(0.5 ** 45, rel=1e-12)


def test_gauss_terminating_degree_capped():
    with pytest.raises(TruncationOverflowError):
        gauss_2f1(Hyp2F1Args(-(INDEX_CAP + 1), 1, 1, 0.1))


def test_gauss_terminating_outside_unit_disk():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert gauss_2f1(Hyp2F1Args(-2, 1, 1, 3.0)) == pytest.approx(4.0)


def test_gauss_divergence_warning():
    with pytest.warns(DivergenceWarning):
        gauss_2f1(Hyp2F1Args(1, 1, 2, 1.5), TruncationSpec(i_max=10))


def test_gauss_nonpositive_c():
    with pytest.raises(DomainError):
        Hyp2F1Args(1, 1, -2, 0.1)
    # terminates at n=1 before (c1)_n vanishes
    assert gauss_2f1(Hyp2F1Args(-1, 1, -2, 0.1)) == pytest.approx(1 + 0.05)


def test_gauss_matches_scipy():
    rng = np.random.default_rng(11)
    for _ in range(50):
        a1, b1 = rng.uniform(-2, 3, size=2)
        c1 = rng.uniform(0.5, 3)
        z = rng.uniform(-0.5, 0.5)
        ours = gauss_2f1(Hyp2F1Args(a1, b1, c1, z), LONG)
        assert ours == pytest.approx(special.hyp2f1(a1, b1, c1, z), rel=1e-10, abs=1e-12)


def test_gauss_extended_precision():
    args = Hyp2F1Args(0.3, 1.1, 1.9, 0.45)
    assert gauss_2f1(args, LONG, precision="extended") == pytest.approx(gauss_2f1(args, LONG), rel=1e-13)


# ── Kernel identity ──────────────────────────────────────────────────

@pytest.mark.parametrize("lam", [FIRST, SECOND])
def test_kernel_identity_grid(lam):
    for l in range(1, 5):
        for alpha_l in range(6):
            for i_prev in range(alpha_l + 1):
                for eta in np.linspace(-0.6, 0.6, 13):
                    gap = kernel_identity_gap(l, i_prev, alpha_l, lam, float(eta))
                    assert gap <= 1e-10, (l, alpha_l, i_prev, eta, gap)


def test_kernel_identity_zero_eta():
    assert kernel_identity_gap(2, 0, 3, FIRST, 0.0) < 1e-15


def test_kernel_identity_extended():
    assert kernel_identity_gap(3, 1, 5, SECOND, 0.55, precision="extended") < 1e-30


def test_kernel_identity_arguments():
    with pytest.raises(DomainError):
        kernel_identity_gap(0, 0, 1, FIRST, 0.1)
    with pytest.raises(DomainError):
        kernel_identity_gap(1, 3, 2, FIRST, 0.1)
    with pytest.raises(DivergenceError):
        kernel_identity_gap(1, 0, 2, FIRST, 1.0)


@pytest.mark.parametrize("lam", [FIRST, SECOND])
def test_infinite_kernel_identity(lam):
    for alpha in (1.3, -0.7, 2.9):
        for i_prev in range(3):
            for eta in (-0.3, 0.25):
                assert infinite_kernel_identity_gap(1, i_prev, alpha, lam, eta) <= 1e-12


def test_infinite_kernel_identity_arguments():
    with pytest.raises(DomainError):
        infinite_kernel_identity_gap(1, -1, 1.0, FIRST, 0.1)
    with pytest.raises(DivergenceError):
        infinite_kernel_identity_gap(1, 0, 1.0, FIRST, -1.2)


# ── Leading term ─────────────────────────────────────────────────────

def test_leading_args():
    args = leading_args(4.0, FIRST, 0.1)
    assert (args.a1, args.b1, args.c1, args.z) == (-1.0, 1.25, 0.75, 0.1)
    args = leading_args(1.0, SECOND, -0.2)
    assert (args.a1, args.b1, args.c1) == (0.0, 0.75, 1.25)


def test_leading_term_first_kind():
    p = LameParams(a=2, b=1, c=0, q=8, alpha=1)
    assert leading_term_check(p, FIRST, 2.1, TruncationSpec(n_max=20, i_max=40)) < 1e-13


def test_leading_term_second_kind():
    p = LameParams(a=2, b=1, c=0, q=3, alpha=0.5)
    assert leading_term_check(p, SECOND, 2.05, TruncationSpec(n_max=20, i_max=40)) < 1e-13


def test_leading_term_negative_d():
    p = LameParams(a=0, b=1, c=-1, q=0.5, alpha=2.5)
    assert leading_term_check(p, FIRST, 0.3, TruncationSpec(n_max=20, i_max=40)) < 1e-13


def _leading_cases(kind, count=50, seed=7):
    """Random (a, b, c, q, α) with x placed so that |η| ≤ 0.3."""
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < count:
        a, b, c = rng.uniform(-4, 4, size=3)
        if min(abs(a - b), abs(a - c)) < 0.5:
            continue
        p = LameParams(a=a, b=b, c=c, q=rng.uniform(-5, 5), alpha=rng.uniform(-5, 5))
        z = rng.uniform(0.05, 1.0) * math.sqrt(0.3 * abs(p.denom))
        if kind is FIRST and rng.random() < 0.5:
            z = -z
        cases.append((p, a + z))
    return cases


@pytest.mark.parametrize("kind", [FIRST, SECOND], ids=["first", "second"])
def test_leading_term_random(kind):
    t = TruncationSpec(n_max=2, i_max=80)
    for p, x in _leading_cases(kind):
        assert leading_term_check(p, kind, x, t) < 1e-9
