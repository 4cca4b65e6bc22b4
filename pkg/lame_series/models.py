"""
Domain types shared by every module.

All types are frozen dataclasses: values are immutable and can be shared
between threads in a parameter sweep. Invariants are checked in
__post_init__ and raise the matching error from errors.py.
"""

from __future__ import annotations
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .errors import (
    INDEX_CAP,
    DomainError,
    InvalidParamsError,
    SpecViolationError,
    TruncationOverflowError,
)


# ── Parameters ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class LameParams:
    """
    The five real parameters of the Lamé equation in algebraic form:

        y'' + ½(1/(x−a) + 1/(x−b) + 1/(x−c)) y'
            + (−α(α+1)x + q) / (4(x−a)(x−b)(x−c)) y = 0

    Construction only requires finite fields. a = b or a = c is a valid
    value (domain_classify reports it as the degenerate row) but every
    series operation calls require_nondegenerate() first.
    """
    a: float
    b: float
    c: float
    q: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "c", "q", "alpha"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise InvalidParamsError(f"{name} must be a real number, got {value!r}") from None
            if not math.isfinite(value):
                raise InvalidParamsError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)

    @property
    def denom(self) -> float:
        """(a−b)(a−c)"""
        return (self.a - self.b) * (self.a - self.c)

    @property
    def linear(self) -> float:
        """2a−b−c"""
        return 2 * self.a - self.b - self.c

    @property
    def is_degenerate(self) -> bool:
        return self.a == self.b or self.a == self.c

    def require_nondegenerate(self) -> "LameParams":
        if self.a == self.b:
            raise InvalidParamsError(f"a = b = {self.a}: recurrence denominators vanish")
        if self.a == self.c:
            raise InvalidParamsError(f"a = c = {self.a}: recurrence denominators vanish")
        return self

    def with_alpha(self, alpha: float, q: Optional[float] = None) -> "LameParams":
        """Copy with α (and optionally q) replaced."""
        if q is None:
            return replace(self, alpha=alpha)
        return replace(self, alpha=alpha, q=q)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "q": self.q, "alpha": self.alpha}

    @classmethod
    def from_dict(cls, data: dict) -> "LameParams":
        return cls(
            a=data["a"],
            b=data["b"],
            c=data["c"],
            q=data.get("q", 0.0),
            alpha=data.get("alpha", 0.0),
        )


class IndicialRoot(Enum):
    """Exponent λ of the leading power z^λ."""
    FIRST_KIND = 0.0
    SECOND_KIND = 0.5

    @property
    def lam(self) -> float:
        return self.value

    @property
    def label(self) -> str:
        """CLI spelling: '0' or 'half'."""
        return "0" if self is IndicialRoot.FIRST_KIND else "half"

    @property
    def kind(self) -> str:
        return "first" if self is IndicialRoot.FIRST_KIND else "second"

    @classmethod
    def parse(cls, text) -> "IndicialRoot":
        """Accepts 0, 0.5, '0', 'half', '1/2', 'first', 'second' or a member."""
        if isinstance(text, IndicialRoot):
            return text
        if isinstance(text, (int, float)) and not isinstance(text, bool):
            if text == 0:
                return cls.FIRST_KIND
            if text == 0.5:
                return cls.SECOND_KIND
            raise InvalidParamsError(f"lambda must be exactly 0 or 1/2, got {text}")
        key = str(text).strip().lower()
        if key in ("0", "0.0", "first", "first_kind"):
            return cls.FIRST_KIND
        if key in ("half", "1/2", "0.5", "second", "second_kind"):
            return cls.SECOND_KIND
        raise InvalidParamsError(f"lambda must be 0 or half, got {text!r}")


# ── Truncation & series ──────────────────────────────────────────────

@dataclass(frozen=True)
class TruncationSpec:
    """
    n_max: last sub-series index (y_0 … y_{n_max})
    i_max: cutoff of every inner summation (infinite mode only)
    tol:   relative tail tolerance for adaptive stopping
    """
    n_max: int = 40
    i_max: int = 40
    tol: float = 1e-14

    def __post_init__(self):
        for name in ("n_max", "i_max"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise InvalidParamsError(f"{name} must be an integer, got {value!r}")
            value = int(value)
            if value < 0:
                raise InvalidParamsError(f"{name} must be >= 0, got {value}")
            if value > INDEX_CAP:
                raise TruncationOverflowError(f"{name}={value} exceeds cap {INDEX_CAP}")
            object.__setattr__(self, name, value)
        tol = float(self.tol)
        if not (tol > 0 and math.isfinite(tol)):
            raise InvalidParamsError(f"tol must be a positive real, got {self.tol!r}")
        object.__setattr__(self, "tol", tol)

    @property
    def depth(self) -> int:
        """Highest power of z reached by a full evaluation."""
        return 2 * self.i_max + self.n_max

    def to_dict(self) -> dict:
        return {"n_max": self.n_max, "i_max": self.i_max, "tol": self.tol}

    @classmethod
    def from_dict(cls, data: dict) -> "TruncationSpec":
        defaults = cls()
        return cls(
            n_max=data.get("n_max", defaults.n_max),
            i_max=data.get("i_max", defaults.i_max),
            tol=data.get("tol", defaults.tol),
        )


@dataclass(frozen=True)
class SeriesVariables:
    """z = x − a, μ = −z/((a−b)(a−c)), η = −z²/((a−b)(a−c)); μ·z = η."""
    z: float
    mu: float
    eta: float


class SeriesMode(Enum):
    INFINITE = "infinite"
    POLYNOMIAL = "polynomial"


class Sign(Enum):
    """Branch of the polynomial eigenvalue family."""
    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True)
class PolynomialSpec:
    """
    Eigenvalue family of the B-terminated polynomial.

    Level k of the series uses its own α_k = alpha_seq[k] and terminates
    after α_k inner steps; the number of levels is len(alpha_seq). j picks
    the level whose α_j defines the global α:

        plus:   α = 2(2α_j + j + λ)
        minus:  α = −2(2α_j + j + λ) − 1
    """
    j: int
    alpha_seq: tuple[int, ...]
    kind_sign: Sign = Sign.PLUS

    def __post_init__(self):
        seq = tuple(self.alpha_seq)
        for value in seq:
            if isinstance(value, bool) or int(value) != value or value < 0:
                raise SpecViolationError(f"alpha_seq entries must be nonneg integers, got {value!r}")
        seq = tuple(int(v) for v in seq)
        if not seq:
            raise SpecViolationError("alpha_seq must not be empty")
        for k in range(1, len(seq)):
            if seq[k] < seq[k - 1]:
                raise SpecViolationError(
                    f"alpha_seq must be nondecreasing: alpha_{k - 1}={seq[k - 1]} > alpha_{k}={seq[k]}"
                )
        if isinstance(self.j, bool) or int(self.j) != self.j or not 0 <= self.j < len(seq):
            raise SpecViolationError(f"j={self.j!r} out of range for alpha_seq of length {len(seq)}")
        object.__setattr__(self, "j", int(self.j))
        object.__setattr__(self, "alpha_seq", seq)
        if not isinstance(self.kind_sign, Sign):
            object.__setattr__(self, "kind_sign", Sign(str(self.kind_sign).lower()))

    @property
    def n_levels(self) -> int:
        return len(self.alpha_seq)

    def level_alpha(self, k: int, lam: IndicialRoot) -> float:
        """α that makes level k terminate after alpha_seq[k] steps."""
        base = 2 * (2 * self.alpha_seq[k] + k + lam.lam)
        if self.kind_sign is Sign.PLUS:
            return base
        return -base - 1

    def alpha(self, lam: IndicialRoot) -> float:
        return self.level_alpha(self.j, lam)

    def to_dict(self) -> dict:
        return {"j": self.j, "alpha_seq": list(self.alpha_seq), "sign": self.kind_sign.value}

    @classmethod
    def from_dict(cls, data: dict) -> "PolynomialSpec":
        return cls(
            j=data.get("j", 0),
            alpha_seq=tuple(data["alpha_seq"]),
            kind_sign=Sign(data.get("sign", "plus")),
        )


@dataclass(frozen=True)
class SeriesResult:
    """
    value = Σ sub_values. sub_values[m] collects the terms with exactly
    m A-factors. coefficients[n] is the coefficient of z^{n+λ} gathered
    over all computed terms (complete only up to the truncation depth).
    """
    value: float
    sub_values: tuple[float, ...]
    terms_used: int
    tail_estimate: float = 0.0
    coefficients: tuple[float, ...] = ()
    converged: bool = True
    stop_reason: str = ""
    trace: Optional[dict] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.tail_estimate >= 0:
            raise ValueError(f"tail_estimate must be >= 0, got {self.tail_estimate}")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "sub_values": list(self.sub_values),
            "terms_used": self.terms_used,
            "tail_estimate": self.tail_estimate,
            "converged": self.converged,
            "stop_reason": self.stop_reason,
        }


@dataclass(frozen=True)
class CoefficientSeq:
    """Frobenius coefficients c_0 … c_N of Σ c_n z^{n+λ}, c_0 = 1."""
    c: tuple[float, ...]
    lam: IndicialRoot

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(self.c))
        if not self.c or self.c[0] != 1:
            raise InvalidParamsError("coefficient sequence must start with c_0 = 1")

    @property
    def N(self) -> int:
        return len(self.c) - 1

    def __len__(self) -> int:
        return len(self.c)

    def __getitem__(self, n):
        return self.c[n]


# ── Hypergeometric ───────────────────────────────────────────────────

def _nonpositive_int(value: float) -> bool:
    return value <= 0 and float(value).is_integer()


@dataclass(frozen=True)
class Hyp2F1Args:
    """Arguments of 2F1(a1, b1; c1; z)."""
    a1: float
    b1: float
    c1: float
    z: float

    def __post_init__(self):
        if _nonpositive_int(self.c1):
            stop = self.terminates_at
            if stop is None or stop > -self.c1:
                raise DomainError(
                    f"c1={self.c1} is a nonpositive integer and the series "
                    f"does not terminate before (c1)_n vanishes"
                )

    @property
    def terminates_at(self) -> Optional[int]:
        """Index of the last nonzero term, or None for a nonterminating series."""
        stops = [int(-v) for v in (self.a1, self.b1) if _nonpositive_int(v)]
        return min(stops) if stops else None


# ── Convergence domain ───────────────────────────────────────────────

class DomainCase(Enum):
    """Rows of the convergence table, keyed on h² = (a−(b+c)/2)² vs D = (a−b)(a−c)."""
    DEGENERATE = "a=b or a=c"
    POSITIVE_SINGLE = "0 < (a-(b+c)/2)^2 < (a-b)(a-c)"
    POSITIVE_TOUCHING = "(a-b)(a-c) = (a-(b+c)/2)^2 > 0"
    POSITIVE_SPLIT = "0 < (a-b)(a-c) < (a-(b+c)/2)^2"
    NEGATIVE_SINGLE = "0 <= (a-(b+c)/2)^2 < -(a-b)(a-c)"
    NEGATIVE_TOUCHING = "-(a-b)(a-c) = (a-(b+c)/2)^2 > 0"
    NEGATIVE_SPLIT = "0 < -(a-b)(a-c) < (a-(b+c)/2)^2"

    @property
    def row(self) -> int:
        """1-based row number in table order."""
        return list(DomainCase).index(self) + 1


Interval = tuple[float, float]


@dataclass(frozen=True)
class DomainReport:
    """Where in x the infinite series about x = a converges."""
    case: DomainCase
    intervals: tuple[Interval, ...]
    metric_at: Optional[tuple[float, float]] = None
    radius: Optional[float] = None
    table_intervals: tuple[Interval, ...] = ()
    table_agrees: bool = True
    table_discrepancy: float = 0.0

    def __post_init__(self):
        if (self.case is DomainCase.DEGENERATE) != (not self.intervals):
            raise ValueError("intervals must be empty exactly for the degenerate case")
        for (lo, hi) in self.intervals:
            if not lo < hi:
                raise ValueError(f"empty interval ({lo}, {hi})")
        for (_, hi), (lo, _) in zip(self.intervals, self.intervals[1:]):
            if not hi <= lo:
                raise ValueError("intervals must be disjoint and ascending")

    @property
    def case_label(self) -> str:
        return self.case.value

    def contains(self, x: float) -> bool:
        return any(lo < x < hi for lo, hi in self.intervals)

    def to_dict(self) -> dict:
        return {
            "case": self.case.name.lower(),
            "row": self.case.row,
            "label": self.case.value,
            "intervals": [list(iv) for iv in self.intervals],
            "metric_at": list(self.metric_at) if self.metric_at else None,
            "radius": self.radius,
            "table_intervals": [list(iv) for iv in self.table_intervals],
            "table_agrees": self.table_agrees,
            "table_discrepancy": self.table_discrepancy,
        }
