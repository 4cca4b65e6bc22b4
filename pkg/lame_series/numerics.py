"""
Numeric contexts: double precision (floats + math.fsum) or extended
precision (a private mpmath context at 40 significant digits).

All series code does its arithmetic through a NumericContext so the same
algorithm runs in either precision. Results handed back to callers are
always plain floats.

Selection order: explicit ``precision=`` argument, then the
LAME_PRECISION environment variable, then double.

Usage:
    ctx = get_context("extended")
    total = ctx.fsum(ctx.num(t) for t in terms)
    value = ctx.to_float(total)
"""

from __future__ import annotations
import math
import os
import logging
from abc import ABC, abstractmethod
from enum import Enum
from functools import lru_cache
from typing import Any, Iterable, Union

from mpmath import MPContext

from .errors import InvalidParamsError

logger = logging.getLogger(__name__)

PRECISION_ENV = "LAME_PRECISION"
EXTENDED_DPS = 40

# Denominator floor for relative errors.
REL_ERR_FLOOR = 1e-300


class Precision(Enum):
    """Arithmetic used for coefficient and series evaluation."""
    DOUBLE = "double"
    EXTENDED = "extended"

    @classmethod
    def resolve(cls, value: Union["Precision", str, None] = None) -> "Precision":
        """Explicit value, else $LAME_PRECISION, else DOUBLE."""
        if isinstance(value, Precision):
            return value
        if value is None:
            value = os.environ.get(PRECISION_ENV, "") or cls.DOUBLE.value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidParamsError(
                f"precision must be 'double' or 'extended', got {value!r}"
            ) from None


class NumericContext(ABC):
    """Arithmetic primitives shared by every evaluator."""

    precision: Precision

    @abstractmethod
    def num(self, value: Any) -> Any:
        """Convert a float/int into this context's number type."""

    @abstractmethod
    def fsum(self, values: Iterable[Any]) -> Any:
        """Compensated sum."""

    @abstractmethod
    def sqrt(self, value: Any) -> Any:
        ...

    def to_float(self, value: Any) -> float:
        return float(value)

    def powers(self, base: Any, count: int) -> list:
        """[1, base, base², …] with count entries, by repeated multiplication."""
        out = []
        value = self.num(1)
        for _ in range(count):
            out.append(value)
            value = value * base
        return out

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.precision.value}>"


class DoubleContext(NumericContext):
    precision = Precision.DOUBLE

    def num(self, value: Any) -> float:
        return float(value)

    def fsum(self, values: Iterable[Any]) -> float:
        return math.fsum(values)

    def sqrt(self, value: Any) -> float:
        return math.sqrt(value)


class ExtendedContext(NumericContext):
    """
    Private mpmath context. The global ``mpmath.mp`` is never touched,
    so other code in the process keeps its own working precision.
    """
    precision = Precision.EXTENDED

    def __init__(self, dps: int = EXTENDED_DPS):
        self._mp = MPContext()
        self._mp.dps = dps

    @property
    def mp(self) -> MPContext:
        return self._mp

    def num(self, value: Any):
        return self._mp.mpf(value)

    def fsum(self, values: Iterable[Any]):
        return self._mp.fsum(values)

    def sqrt(self, value: Any):
        return self._mp.sqrt(value)


@lru_cache(maxsize=None)
def _context_for(precision: Precision) -> NumericContext:
    logger.debug(f"Creating numeric context: {precision.value}")
    if precision is Precision.EXTENDED:
        return ExtendedContext()
    return DoubleContext()


def get_context(precision: Union[Precision, str, None] = None) -> NumericContext:
    """Shared context for a precision; contexts are never mutated after creation."""
    return _context_for(Precision.resolve(precision))


def rel_err(value: float, reference: float) -> float:
    """|value - reference| / max(|reference|, REL_ERR_FLOOR)."""
    return abs(value - reference) / max(abs(reference), REL_ERR_FLOOR)
