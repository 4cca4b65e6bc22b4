"""Numeric contexts and precision selection."""

import math

import pytest

from lame_series.errors import InvalidParamsError
from lame_series.numerics import (
    EXTENDED_DPS,
    PRECISION_ENV,
    DoubleContext,
    ExtendedContext,
    Precision,
    get_context,
    rel_err,
)


def test_resolve_explicit():
    assert Precision.resolve("double") is Precision.DOUBLE
    assert Precision.resolve(" Extended ") is Precision.EXTENDED
    assert Precision.resolve(Precision.EXTENDED) is Precision.EXTENDED


def test_resolve_environment(monkeypatch):
    monkeypatch.setenv(PRECISION_ENV, "extended")
    assert Precision.resolve() is Precision.EXTENDED
    monkeypatch.delenv(PRECISION_ENV)
    assert Precision.resolve() is Precision.DOUBLE


def test_resolve_rejects():
    with pytest.raises(InvalidParamsError):
        Precision.resolve("quad")


def test_contexts_are_shared():
    assert get_context("double") is get_context(Precision.DOUBLE)
    assert isinstance(get_context("double"), DoubleContext)
    assert isinstance(get_context("extended"), ExtendedContext)


def test_double_fsum_is_compensated():
    ctx = get_context("double")
    assert ctx.fsum([1e16, 1.0, -1e16]) == 1.0


def test_extended_context_is_private():
    from mpmath import mp

    before = mp.dps
    ctx = get_context("extended")
    assert ctx.mp.dps == EXTENDED_DPS
    assert mp.dps == before
    third = ctx.num(1) / 3
    assert ctx.to_float(third * 3) == 1.0
    assert isinstance(ctx.to_float(third), float)


def test_powers():
    ctx = get_context("double")
    assert ctx.powers(2.0, 5) == [1.0, 2.0, 4.0, 8.0, 16.0]
    assert ctx.powers(0.0, 3) == [1.0, 0.0, 0.0]


def test_sqrt():
    assert get_context("double").sqrt(2.0) == math.sqrt(2.0)
    ext = get_context("extended")
    assert ext.to_float(ext.sqrt(ext.num(2))) == pytest.approx(math.sqrt(2.0), rel=1e-16)


def test_rel_err():
    assert rel_err(1.1, 1.0) == pytest.approx(0.1)
    assert rel_err(0.0, 0.0) == 0.0
    assert rel_err(1e-290, 0.0) > 1
