"""
Convergence domain of the series about x = a.

With z = x − a, D = (a−b)(a−c) and S = 2a−b−c the series converges where

    metric(x) = |z²/D + S z/D| < 1

Writing u = x − (b+c)/2 and h² = (a−(b+c)/2)² this is h² − |D| < u² < h² + |D|,
which gives one interval, two intervals touching at the midpoint (b+c)/2,
or two split intervals, depending on how h² compares with ±D. Since
h² − D = ((b−c)/2)², the row "0 < h² < D" can never occur for real b, c.

Interval endpoints are the real roots of z² + Sz = ±|D|; the table's
radical formulas are evaluated separately and compared against them.

Also here: the limiting closed forms for n ≫ 1, where A_n → −S/D and
B_n → −1/D, and the radius of convergence from the nearest singular point.
"""

from __future__ import annotations
import logging
import math
from typing import Optional

from .errors import DivergenceError
from .models import DomainCase, DomainReport, Interval, LameParams

logger = logging.getLogger(__name__)

# relative tolerance for the equality rows
CASE_RTOL = 1e-12
# endpoint agreement between the table formulas and the quadratic roots
TABLE_RTOL = 1e-12


def _terms(p: LameParams, x: float) -> tuple[float, float]:
    """(z²/D, S z/D)"""
    p.require_nondegenerate()
    z = float(x) - p.a
    d = p.denom
    return z * z / d, p.linear * z / d


def convergence_metric(p: LameParams, x: float) -> float:
    """|(x−a)²/D + (2a−b−c)(x−a)/D|; the series converges where this is < 1."""
    quad, lin = _terms(p, x)
    return abs(quad + lin)


def absolute_metric(p: LameParams, x: float) -> float:
    """|(x−a)²/D| + |(2a−b−c)(x−a)/D|, the bound for absolute convergence of the regrouped sum."""
    quad, lin = _terms(p, x)
    return abs(quad) + abs(lin)


def radius_of_convergence(p: LameParams) -> float:
    """Distance from a to the nearest other finite singular point."""
    p.require_nondegenerate()
    return min(abs(p.a - p.b), abs(p.a - p.c))


def asymptotic_ratio_bound(p: LameParams) -> float:
    """
    Large-n bound on |c_{n+1}/c_n|. The characteristic roots of
    D r² + (2a−b−c) r + 1 = 0 are 1/(b−a) and 1/(c−a).
    """
    return 1.0 / radius_of_convergence(p)


# ── Limits ───────────────────────────────────────────────────────────

def limit_full(p: LameParams, x: float) -> float:
    """1 / (1 + z²/D + S z/D), the sum of the constant-coefficient recurrence."""
    quad, lin = _terms(p, x)
    if abs(quad + lin) >= 1:
        raise DivergenceError(f"limit_full: metric {abs(quad + lin):.6g} >= 1 at x={x}")
    return 1.0 / (1.0 + quad + lin)


def limit_A_dominant(p: LameParams, x: float) -> float:
    """1 / (1 + S z/D), the limit when the B terms are negligible."""
    _, lin = _terms(p, x)
    if abs(lin) >= 1:
        raise DivergenceError(f"limit_A_dominant: |S z/D| = {abs(lin):.6g} >= 1 at x={x}")
    return 1.0 / (1.0 + lin)


def limit_B_dominant(p: LameParams, x: float) -> float:
    """1 / (1 + z²/D), the limit when the A terms are negligible (c_1 = 0)."""
    quad, _ = _terms(p, x)
    if abs(quad) >= 1:
        raise DivergenceError(f"limit_B_dominant: |z²/D| = {abs(quad):.6g} >= 1 at x={x}")
    return 1.0 / (1.0 + quad)


def limit_double_sum(p: LameParams, x: float, depth: int = 40) -> float:
    """
    Σ_{n,m ≤ depth} (n+m)!/(n! m!) (B z²)^n (A z)^m with A = −S/D, B = −1/D:
    the regrouped form of the constant-coefficient series.
    """
    quad, lin = _terms(p, x)
    u, v = -quad, -lin
    terms = []
    for n in range(depth + 1):
        un = u ** n
        for m in range(depth + 1):
            terms.append(math.comb(n + m, n) * un * v ** m)
    return math.fsum(terms)


# ── Classification ───────────────────────────────────────────────────

def _stable_roots(s: float, c0: float, double: bool) -> tuple[float, ...]:
    """Real roots of z² + s z + c0 = 0, cancellation-free."""
    if double:
        return (-s / 2,)
    disc = s * s - 4 * c0
    if disc < 0:
        return ()
    root = math.sqrt(disc)
    big = -0.5 * (s + math.copysign(root, s)) if s != 0 else root / 2
    if big == 0:
        return (0.0,)
    small = c0 / big
    return tuple(sorted((big, small)))


def _classify(p: LameParams) -> DomainCase:
    if p.is_degenerate:
        return DomainCase.DEGENERATE
    h2 = (p.a - (p.b + p.c) / 2) ** 2
    d = p.denom
    if d > 0:
        if math.isclose(h2, d, rel_tol=CASE_RTOL):
            return DomainCase.POSITIVE_TOUCHING
        return DomainCase.POSITIVE_SINGLE if h2 < d else DomainCase.POSITIVE_SPLIT
    if math.isclose(h2, -d, rel_tol=CASE_RTOL):
        return DomainCase.NEGATIVE_TOUCHING
    return DomainCase.NEGATIVE_SINGLE if h2 < -d else DomainCase.NEGATIVE_SPLIT


def _root_intervals(p: LameParams, case: DomainCase) -> tuple[Interval, ...]:
    """Intervals from the roots of z² + Sz = |D| (outer) and z² + Sz = −|D| (inner)."""
    s, absd = p.linear, abs(p.denom)
    outer = _stable_roots(s, -absd, double=False)
    lo, hi = p.a + outer[0], p.a + outer[-1]
    if case in (DomainCase.POSITIVE_SINGLE, DomainCase.NEGATIVE_SINGLE):
        return ((lo, hi),)
    touching = case in (DomainCase.POSITIVE_TOUCHING, DomainCase.NEGATIVE_TOUCHING)
    inner = _stable_roots(s, absd, double=touching)
    if touching:
        mid = p.a + inner[0]
        return ((lo, mid), (mid, hi))
    return ((lo, p.a + inner[0]), (p.a + inner[-1], hi))


def _table_intervals(p: LameParams, case: DomainCase) -> tuple[Interval, ...]:
    """The table's radical formulas, row by row."""
    m = (p.b + p.c) / 2
    h2 = (p.a - m) ** 2
    d = p.denom
    if case is DomainCase.POSITIVE_SINGLE:
        r = math.sqrt(h2 + d)
        return ((m - r, m + r),)
    if case is DomainCase.POSITIVE_TOUCHING:
        r = math.sqrt(2 * d)
        return ((m - r, m), (m, m + r))
    if case is DomainCase.POSITIVE_SPLIT:
        ro, ri = math.sqrt(h2 + d), math.sqrt(h2 - d)
        return ((m - ro, m - ri), (m + ri, m + ro))
    if case is DomainCase.NEGATIVE_SINGLE:
        r = math.sqrt(h2 - d)
        return ((m - r, m + r),)
    if case is DomainCase.NEGATIVE_TOUCHING:
        r = math.sqrt(-2 * d)
        return ((m - r, m), (m, m + r))
    if case is DomainCase.NEGATIVE_SPLIT:
        ro, ri = math.sqrt(h2 - d), math.sqrt(h2 + d)
        return ((m - ro, m - ri), (m + ri, m + ro))
    return ()


def domain_classify(p: LameParams, x: Optional[float] = None) -> DomainReport:
    """
    Table row, convergence intervals and (optionally) the metric at x.
    Never raises: a = b or a = c gives the degenerate row with no intervals.
    """
    case = _classify(p)
    if case is DomainCase.DEGENERATE:
        logger.info(f"domain: a={p.a} coincides with b or c, no solution")
        return DomainReport(case=case, intervals=())

    intervals = _root_intervals(p, case)
    table = _table_intervals(p, case)
    gaps = [
        abs(r - t)
        for iv_r, iv_t in zip(intervals, table)
        for r, t in zip(iv_r, iv_t)
    ]
    scale = max(1.0, *(abs(e) for iv in intervals for e in iv))
    discrepancy = max(gaps) if gaps else 0.0
    agrees = len(intervals) == len(table) and discrepancy <= TABLE_RTOL * scale
    if not agrees:
        logger.warning(
            f"domain: table formulas disagree with quadratic roots for {p.to_dict()} "
            f"(row {case.row}, gap={discrepancy:.3e})"
        )

    metric_at = None
    if x is not None:
        metric_at = (float(x), convergence_metric(p, x))

    report = DomainReport(
        case=case,
        intervals=intervals,
        metric_at=metric_at,
        radius=radius_of_convergence(p),
        table_intervals=table,
        table_agrees=agrees,
        table_discrepancy=discrepancy,
    )
    logger.debug(f"domain: row {case.row} ({case.value}) intervals={intervals}")
    return report
