"""Tests for EvalTrace and EvalTraceStore."""

import logging

import pytest

from lame_series.errors import SpecViolationError
from lame_series.eval_trace import EvalTrace, EvalTraceStore
from lame_series.models import IndicialRoot, LameParams, TruncationSpec
from lame_series.series import generic_3trf_infinite, lame_first_kind_infinite


def _trace(name="lame_first_kind_infinite", converged=True):
    trace = EvalTrace(name, kind="first")
    trace.started(params={"a": 2.0}, x=2.1, truncation={"n_max": 2}, precision="double")
    trace.level(0, value=1.0, terms=41, bound=40)
    trace.level(1, value=-0.01, terms=100, bound=40)
    trace.stopped("converged" if converged else "n_max", levels=2)
    trace.delivered(value=0.99, tail=1e-17, converged=converged)
    return trace


class TestEvalTrace:

    def test_record_shape(self):
        record = _trace().as_dict()
        assert record["evaluator"] == "lame_first_kind_infinite"
        assert record["kind"] == "first"
        assert record["inputs"]["x"] == 2.1
        assert record["stop_reason"] == "converged"
        assert record["result"]["levels"] == 2
        assert record["result"]["terms"] == 141

    def test_incomplete_trace(self):
        record = EvalTrace("x").as_dict()
        assert record["result"]["converged"] is False
        assert "error" in record["result"]

    def test_emit_levels(self, caplog):
        with caplog.at_level(logging.DEBUG, logger="lame_series.eval_trace"):
            _trace().emit()
            _trace(converged=False).emit()
        levels = [r.levelno for r in caplog.records if r.getMessage().startswith("TRACE ")]
        assert levels == [logging.DEBUG, logging.WARNING]
        assert any(r.getMessage().startswith("TRACE_DETAIL ") for r in caplog.records)

    def test_error_recorded(self, caplog):
        trace = EvalTrace("x")
        trace.stopped("error")
        trace.delivered(converged=False, error="level 2: boom")
        assert trace.as_dict()["result"]["error"] == "level 2: boom"
        with caplog.at_level(logging.WARNING, logger="lame_series.eval_trace"):
            trace.emit()
        assert any("ERROR=level 2: boom" in r.getMessage() for r in caplog.records)

    def test_failing_level_is_traced(self, caplog):
        t = TruncationSpec(n_max=5, i_max=5)
        with caplog.at_level(logging.WARNING, logger="lame_series.eval_trace"):
            with pytest.raises(SpecViolationError):
                generic_3trf_infinite([0.5, 0.5, 0.5], lambda n: 0.0, IndicialRoot.FIRST_KIND, 0.1, t)
        messages = [r.getMessage() for r in caplog.records if r.levelno == logging.WARNING]
        assert any("stop=error" in m and "ERROR=level 4: SpecViolationError" in m for m in messages)

    def test_series_result_carries_trace(self):
        p = LameParams(a=2, b=1, c=0, q=8, alpha=1)
        res = lame_first_kind_infinite(p, 2.1, TruncationSpec(n_max=10, i_max=10))
        steps = [s for s in res.trace["steps"] if s["step"] == "level"]
        assert len(steps) == len(res.sub_values)
        assert res.trace["result"]["value"] == res.value


class TestEvalTraceStore:

    def test_ring_buffer(self):
        store = EvalTraceStore(max_per_evaluator=3)
        for _ in range(5):
            store.store(_trace())
        assert len(store.get_recent("lame_first_kind_infinite", n=10)) == 3

    def test_accepts_records_and_none(self):
        store = EvalTraceStore()
        store.store(None)
        store.store(_trace().as_dict())
        assert store.summary()["lame_first_kind_infinite"]["total_traces"] == 1

    def test_failures_and_summary(self):
        store = EvalTraceStore()
        store.store(_trace())
        store.store(_trace(converged=False))
        store.store(_trace("other"))
        assert len(store.get_failures()) == 1
        assert store.get_failures("other") == []
        info = store.summary()["lame_first_kind_infinite"]
        assert info["not_converged"] == 1
        assert info["last_stop_reason"] == "n_max"
