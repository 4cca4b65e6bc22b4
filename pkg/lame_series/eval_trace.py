"""
Eval Trace - Structured audit log for one series evaluation.

Every 3TRF evaluation records a trace with full provenance:
  - Which evaluator ran, for which parameters and x
  - Truncation and numeric precision in effect
  - Each sub-series y_m as it was computed (inner terms, bound, value)
  - Why the outer sum stopped (converged, n_max reached, terminated)
  - Final value and tail estimate

Summaries go out at DEBUG (WARNING when the evaluation did not converge);
the full record goes out as a ``TRACE_DETAIL {json}`` line at DEBUG.

Usage:
    trace = EvalTrace("lame_first_kind_infinite", kind="first")
    trace.started(params=p.to_dict(), x=2.1, truncation=t.to_dict(), precision="double")
    trace.level(0, value=1.0003, terms=41, bound=40)
    trace.level(1, value=-0.002, terms=861, bound=40)
    trace.stopped("converged")
    trace.delivered(value=0.998, tail=1e-17, converged=True)
    trace.emit()

    record = trace.as_dict()
"""

from __future__ import annotations
import json
import logging
import threading
import time
from typing import Optional, Union

logger = logging.getLogger(__name__)


class EvalTrace:
    """
    Accumulates provenance for one evaluation.

    Build incrementally as levels are computed, then emit()
    to write the structured log record.
    """

    def __init__(self, evaluator: str, kind: str = ""):
        self._evaluator = evaluator
        self._kind = kind
        self._ts = time.time()
        self._inputs: dict = {}
        self._steps: list[dict] = []
        self._result: Optional[dict] = None
        self._stop_reason: str = ""
        self._duration_ms: float = 0

    # ── Recording steps ──────────────────────────────────────────

    def started(self, params: dict = None, x: float = None, truncation: dict = None,
                precision: str = "double", **extra):
        """Record the inputs of the evaluation."""
        self._inputs = {
            "params": params or {},
            "x": x,
            "truncation": truncation or {},
            "precision": precision,
        }
        self._inputs.update(extra)

    def level(self, k: int, value: float, terms: int, bound: int):
        """Record one computed sub-series y_k."""
        self._steps.append({
            "step": "level",
            "k": k,
            "value": value,
            "terms": terms,
            "bound": bound,
        })

    def stopped(self, reason: str, **details):
        """Record why the outer sum ended."""
        self._stop_reason = reason
        step = {"step": "stop", "reason": reason}
        step.update(details)
        self._steps.append(step)

    def delivered(self, value: float = None, tail: float = 0.0,
                  converged: bool = True, error: str = None):
        """Record the final result."""
        self._duration_ms = round((time.time() - self._ts) * 1000, 2)
        self._result = {
            "value": value,
            "tail": tail,
            "converged": converged,
            "levels": self.levels_computed,
            "terms": self.terms_used,
            "duration_ms": self._duration_ms,
        }
        if error:
            self._result["error"] = error

    # ── Output ───────────────────────────────────────────────────

    def as_dict(self) -> dict:
        """Return the complete trace as a dict."""
        return {
            "evaluator": self._evaluator,
            "kind": self._kind,
            "inputs": self._inputs,
            "steps": self._steps,
            "stop_reason": self._stop_reason,
            "result": self._result or {"converged": False, "error": "trace incomplete"},
            "duration_ms": self._duration_ms,
        }

    def emit(self):
        """Write the summary line and the structured detail line."""
        record = self.as_dict()
        result = record["result"]
        error = result.get("error", "")

        summary = (
            f"[{self._evaluator}] "
            f"stop={self._stop_reason or 'none'} "
            f"levels={result.get('levels', 0)} "
            f"terms={result.get('terms', 0)} "
            f"tail={result.get('tail', 0):.3g} "
            f"duration={self._duration_ms}ms"
        )
        if error:
            summary += f" ERROR={error}"

        if error or not result.get("converged"):
            logger.warning(f"TRACE {summary}")
        else:
            logger.debug(f"TRACE {summary}")

        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(f"TRACE_DETAIL {json.dumps(record, default=str)}")

    # ── Convenience ──────────────────────────────────────────────

    @property
    def levels_computed(self) -> int:
        return sum(1 for s in self._steps if s.get("step") == "level")

    @property
    def terms_used(self) -> int:
        return sum(s.get("terms", 0) for s in self._steps if s.get("step") == "level")


class EvalTraceStore:
    """
    Ring buffer of recent evaluation traces for diagnostic access.

    Keeps the last N traces per evaluator. Sweeps store from worker
    threads, so access is serialized with a lock.
    """

    def __init__(self, max_per_evaluator: int = 10):
        self._max = max_per_evaluator
        self._traces: dict[str, list[dict]] = {}
        self._lock = threading.Lock()

    def store(self, trace: Union[EvalTrace, dict, None]):
        """Store a completed trace (or its as_dict() record)."""
        if trace is None:
            return
        record = trace.as_dict() if isinstance(trace, EvalTrace) else trace
        evaluator = record.get("evaluator", "unknown")

        with self._lock:
            traces = self._traces.setdefault(evaluator, [])
            traces.append(record)
            # Ring buffer: trim to max
            if len(traces) > self._max:
                self._traces[evaluator] = traces[-self._max:]

    def get_recent(self, evaluator: str, n: int = 5) -> list[dict]:
        with self._lock:
            return list(self._traces.get(evaluator, [])[-n:])

    def get_failures(self, evaluator: str = None) -> list[dict]:
        """Recent traces that did not converge or carried an error."""
        with self._lock:
            names = [evaluator] if evaluator else list(self._traces.keys())
            failures = []
            for name in names:
                for record in self._traces.get(name, []):
                    result = record.get("result", {})
                    if result.get("error") or not result.get("converged"):
                        failures.append(record)
            return failures

    def summary(self) -> dict:
        """Per-evaluator health summary."""
        with self._lock:
            out = {}
            for name, traces in self._traces.items():
                if not traces:
                    continue
                latest = traces[-1]
                out[name] = {
                    "last_stop_reason": latest.get("stop_reason", ""),
                    "last_levels": latest.get("result", {}).get("levels", 0),
                    "last_duration_ms": latest.get("duration_ms", 0),
                    "not_converged": sum(
                        1 for t in traces if not t.get("result", {}).get("converged")
                    ),
                    "total_traces": len(traces),
                }
            return out
