"""
Recurrence core: the three-term recurrence of the Lamé equation about x = a,

    c_{n+1} = A_n c_n + B_n c_{n−1},   c_0 = 1,   c_1 = A_0

and the direct Frobenius evaluation Σ c_n z^{n+λ} (z = x − a) that every
3TRF result is checked against.

    A_n = [¼(α(α+1)a − q) − (2a−b−c)(n+λ)²] / [(a−b)(a−c)(n+1+λ)(n+½+λ)]
    B_n = [α − (1 − 2(n+λ))][α − 2(n−1+λ)] / [4(a−b)(a−c)(n+1+λ)(n+½+λ)]

Usage:
    p = LameParams(a=2, b=1, c=0, q=8, alpha=1)
    seq = frobenius_coeffs(p, IndicialRoot.FIRST_KIND, 30)
    y = eval_frobenius(p, IndicialRoot.FIRST_KIND, 2.1, 30)
    r = ode_residual(p, IndicialRoot.FIRST_KIND, 2.1, 30)
"""

from __future__ import annotations
import logging
from typing import Callable, Optional, Sequence

from .errors import (
    BranchError,
    InvalidParamsError,
    SingularPointError,
    check_index,
)
from .models import CoefficientSeq, IndicialRoot, LameParams, PolynomialSpec, Sign
from .numerics import NumericContext, get_context

logger = logging.getLogger(__name__)


class Recurrence:
    """
    A_n and B_n for one (p, λ) in one numeric context.

    Values come back in the context's number type (float or mpf); the
    module-level coeff_A / coeff_B wrap this and return floats.
    """

    def __init__(self, p: LameParams, lam: IndicialRoot, ctx: NumericContext = None):
        p.require_nondegenerate()
        self.params = p
        self.lam = IndicialRoot.parse(lam)
        self.ctx = ctx or get_context()
        num = self.ctx.num
        a, b, c = num(p.a), num(p.b), num(p.c)
        self._alpha = num(p.alpha)
        self._denom = (a - b) * (a - c)
        self._linear = 2 * a - b - c
        self._head = (self._alpha * (self._alpha + 1) * a - num(p.q)) / 4
        self._lam = num(self.lam.lam)
        self._half = num(0.5)

    def A(self, n: int):
        check_index(n, "n")
        k = n + self._lam
        return (self._head - self._linear * k * k) / (self._denom * (k + 1) * (k + self._half))

    def B(self, n: int):
        if n < 1:
            raise InvalidParamsError(f"B_n is defined for n >= 1, got n={n}")
        check_index(n, "n")
        k = n + self._lam
        al = self._alpha
        return ((al - (1 - 2 * k)) * (al - 2 * (k - 1))
                / (4 * self._denom * (k + 1) * (k + self._half)))

    def __repr__(self) -> str:
        return f"<Recurrence {self.params} lambda={self.lam.label} {self.ctx.precision.value}>"


# ── Coefficients ─────────────────────────────────────────────────────

def coeff_A(p: LameParams, lam: IndicialRoot, n: int, precision=None) -> float:
    """A_n of the recurrence. Raises InvalidParamsError if a=b or a=c."""
    if n < 0:
        raise InvalidParamsError(f"n must be >= 0, got {n}")
    rec = Recurrence(p, lam, get_context(precision))
    return rec.ctx.to_float(rec.A(n))


def coeff_B(p: LameParams, lam: IndicialRoot, n: int, precision=None) -> float:
    """B_n of the recurrence, n >= 1."""
    rec = Recurrence(p, lam, get_context(precision))
    return rec.ctx.to_float(rec.B(n))


def recurrence_coeffs(
    A: Callable[[int], object],
    B: Callable[[int], object],
    N: int,
    c1=None,
    ctx: NumericContext = None,
) -> list:
    """
    Generic three-term recurrence: c_0 = 1, c_1 = A(0) (or c1),
    c_{n+1} = A(n)c_n + B(n)c_{n−1}. Returns c_0 … c_N in ctx's number type.
    """
    ctx = ctx or get_context()
    check_index(N, "N")
    one = ctx.num(1)
    c = [one]
    if N >= 1:
        c.append(ctx.num(A(0)) if c1 is None else ctx.num(c1))
    for n in range(1, N):
        c.append(ctx.num(A(n)) * c[n] + ctx.num(B(n)) * c[n - 1])
    return c


def frobenius_coeffs(p: LameParams, lam: IndicialRoot, N: int, precision=None) -> CoefficientSeq:
    """c_0 … c_N of the Frobenius solution with c_0 = 1."""
    if N < 1:
        raise InvalidParamsError(f"N must be >= 1, got {N}")
    rec = Recurrence(p, lam, get_context(precision))
    c = recurrence_coeffs(rec.A, rec.B, N, ctx=rec.ctx)
    return CoefficientSeq(c=tuple(rec.ctx.to_float(v) for v in c), lam=rec.lam)


def graded_recurrence(
    A_levels: Sequence[Callable[[int], object]],
    B_levels: Sequence[Callable[[int], object]],
    N: int,
    ctx: NumericContext = None,
) -> list[list]:
    """
    Level-resolved recurrence. Entry c[m][n] collects the paths to c_n
    that took exactly m A-steps; level m uses A_levels[m] when leaving
    to level m+1 and B_levels[m] for its own B-steps:

        c[m][n+1] = A_{m−1}(n)·c[m−1][n] + B_m(n)·c[m][n−1],   c[0][0] = 1

    Summing over m recovers recurrence_coeffs when all levels share the
    same A and B.
    """
    ctx = ctx or get_context()
    check_index(N, "N")
    n_levels = len(B_levels)
    if len(A_levels) < n_levels - 1:
        raise InvalidParamsError(
            f"need {n_levels - 1} A levels for {n_levels} B levels, got {len(A_levels)}"
        )
    zero = ctx.num(0)
    table = [[zero] * (N + 1) for _ in range(n_levels)]
    table[0][0] = ctx.num(1)
    for m in range(n_levels):
        row = table[m]
        A_prev = A_levels[m - 1] if m > 0 else None
        prev = table[m - 1] if m > 0 else None
        for n in range(N):
            total = zero
            if A_prev is not None and prev[n]:
                total = ctx.num(A_prev(n)) * prev[n]
            if n >= 1 and row[n - 1]:
                total = total + ctx.num(B_levels[m](n)) * row[n - 1]
            row[n + 1] = total
    return table


def graded_frobenius_coeffs(
    p: LameParams,
    lam: IndicialRoot,
    alphas: Sequence[float],
    N: int,
    precision=None,
) -> list[list[float]]:
    """graded_recurrence with level m using the Lamé A/B at α = alphas[m]."""
    ctx = get_context(precision)
    recs = [Recurrence(p.with_alpha(al), lam, ctx) for al in alphas]
    table = graded_recurrence([r.A for r in recs], [r.B for r in recs], N, ctx)
    return [[ctx.to_float(v) for v in row] for row in table]


# ── Polynomial family ────────────────────────────────────────────────

def alpha_for_polynomial(j: int, alpha_j: int, lam: IndicialRoot, sign: Sign = Sign.PLUS) -> float:
    """α = 2(2α_j + j + λ) (plus) or −2(2α_j + j + λ) − 1 (minus)."""
    base = 2 * (2 * alpha_j + j + IndicialRoot.parse(lam).lam)
    return base if Sign(sign) is Sign.PLUS else -base - 1


def termination_index(alpha: float, lam: IndicialRoot, level: int = 0) -> Optional[int]:
    """
    β >= 0 with B(2β + level + 1) = 0 for this α, or None.

    B_n vanishes when α = 2(n−1+λ) or α = 1 − 2(n+λ); with n = 2β+level+1
    both reduce to |α + ½| = 2(2β+level+λ) + ½.
    """
    lam = IndicialRoot.parse(lam)
    half_width = abs(alpha + 0.5) - 0.5
    beta2 = half_width / 2 - level - lam.lam
    if beta2 < 0 or not float(beta2).is_integer() or int(beta2) % 2:
        return None
    return int(beta2) // 2


def polynomial_oracle_coeffs(
    p: LameParams,
    spec: PolynomialSpec,
    q: float,
    lam: IndicialRoot,
    precision=None,
) -> list[float]:
    """
    Power coefficients of the polynomial-mode solution from the graded
    recurrence (level k at α from spec.level_alpha(k)), summed over levels.
    Exact: every level stops at its termination index.
    """
    lam = IndicialRoot.parse(lam)
    alphas = [spec.level_alpha(k, lam) for k in range(spec.n_levels)]
    N = 2 * max(spec.alpha_seq) + spec.n_levels
    base = p.with_alpha(spec.alpha(lam), q=q)
    ctx = get_context(precision)
    recs = [Recurrence(base.with_alpha(al), lam, ctx) for al in alphas]
    table = graded_recurrence([r.A for r in recs], [r.B for r in recs], N, ctx)
    return [ctx.to_float(ctx.fsum(table[m][n] for m in range(len(table)))) for n in range(N + 1)]


# ── Evaluation ───────────────────────────────────────────────────────

def _branch_z(p: LameParams, lam: IndicialRoot, x: float) -> float:
    z = float(x) - p.a
    if lam is IndicialRoot.SECOND_KIND and z < 0:
        raise BranchError(f"second-kind solution needs x >= a (x={x}, a={p.a})")
    return z


def eval_coefficients(coeffs: Sequence[float], lam: IndicialRoot, z: float, precision=None) -> float:
    """Σ c_n z^{n+λ}, compensated sum."""
    lam = IndicialRoot.parse(lam)
    if lam is IndicialRoot.SECOND_KIND and z < 0:
        raise BranchError(f"z^(1/2) needs z >= 0, got z={z}")
    ctx = get_context(precision)
    zc = ctx.num(z)
    powers = ctx.powers(zc, len(coeffs))
    total = ctx.fsum(ctx.num(c) * zn for c, zn in zip(coeffs, powers))
    if lam is IndicialRoot.SECOND_KIND:
        total = total * ctx.sqrt(zc)
    return ctx.to_float(total)


def eval_frobenius(p: LameParams, lam: IndicialRoot, x: float, N: int, precision=None) -> float:
    """Σ_{n=0}^{N} c_n (x−a)^{n+λ}: the oracle."""
    lam = IndicialRoot.parse(lam)
    if N < 1:
        raise InvalidParamsError(f"N must be >= 1, got {N}")
    z = _branch_z(p, lam, x)
    ctx = get_context(precision)
    rec = Recurrence(p, lam, ctx)
    c = recurrence_coeffs(rec.A, rec.B, N, ctx=ctx)
    zc = ctx.num(z)
    total = ctx.fsum(cn * zn for cn, zn in zip(c, ctx.powers(zc, N + 1)))
    if lam is IndicialRoot.SECOND_KIND:
        total = total * ctx.sqrt(zc)
    return ctx.to_float(total)


def _residual(ctx: NumericContext, p: LameParams, lam: IndicialRoot, coeffs: Sequence, x: float):
    p.require_nondegenerate()
    if x in (p.a, p.b, p.c):
        raise SingularPointError(f"x={x} is a singular point of the equation")
    z = _branch_z(p, lam, x)
    num = ctx.num
    xc, zc = num(x), num(z)
    lam_c = num(lam.lam)
    a, b, c = num(p.a), num(p.b), num(p.c)

    # integer powers only, so negative z stays real for λ = 0
    powers = ctx.powers(zc, len(coeffs))
    y_terms, dy_terms, d2y_terms = [], [], []
    for n, cn in enumerate(coeffs):
        term = num(cn) * powers[n]
        e = n + lam_c
        y_terms.append(term)
        dy_terms.append(term * e / zc)
        d2y_terms.append(term * e * (e - 1) / (zc * zc))
    scale = ctx.sqrt(zc) if lam is IndicialRoot.SECOND_KIND else num(1)
    y = ctx.fsum(y_terms) * scale
    dy = ctx.fsum(dy_terms) * scale
    d2y = ctx.fsum(d2y_terms) * scale

    al = num(p.alpha)
    friction = (1 / (xc - a) + 1 / (xc - b) + 1 / (xc - c)) / 2
    potential = (-al * (al + 1) * xc + num(p.q)) / (4 * (xc - a) * (xc - b) * (xc - c))
    return ctx.fsum([d2y, friction * dy, potential * y])


def residual_from_coefficients(
    p: LameParams,
    lam: IndicialRoot,
    coeffs: Sequence[float],
    x: float,
    precision=None,
) -> float:
    """
    ODE residual of y = Σ c_n z^{n+λ} with y', y'' differentiated term by term:

        y'' + ½(1/(x−a) + 1/(x−b) + 1/(x−c)) y' + (−α(α+1)x + q)/(4(x−a)(x−b)(x−c)) y
    """
    ctx = get_context(precision)
    return ctx.to_float(_residual(ctx, p, IndicialRoot.parse(lam), coeffs, x))


def ode_residual(p: LameParams, lam: IndicialRoot, x: float, N: int, precision=None) -> float:
    """Residual of the truncated Frobenius series at x (analytic derivatives)."""
    lam = IndicialRoot.parse(lam)
    if N < 1:
        raise InvalidParamsError(f"N must be >= 1, got {N}")
    ctx = get_context(precision)
    rec = Recurrence(p, lam, ctx)
    c = recurrence_coeffs(rec.A, rec.B, N, ctx=ctx)
    residual = _residual(ctx, p, lam, c, x)
    logger.debug(f"ode_residual N={N} x={x} lambda={lam.label} -> {float(residual):.3e}")
    return ctx.to_float(residual)
