"""
Pochhammer/beta utilities, the truncated Gauss series 2F1 and the kernel
identity that links a finite 3TRF inner sum to beta-weighted 2F1 terms.

Kernel identity, level l ≥ 1, previous inner index i_prev ≤ α_l:

    Σ_{i=i_prev}^{α_l} [(−α_l)_i (α_l+l+¼+λ)_i / ((−α_l)_{i_prev} (α_l+l+¼+λ)_{i_prev})]
                     · [(l1)_{i_prev} (l2)_{i_prev} / ((l1)_i (l2)_i)] η^i
  = η^{i_prev} Σ_j B(s1, j+1) B(s2, j+1) s1 s2 (i_prev−α_l)_j (α_l+i_prev+l+¼+λ)_j / (j!)² η^j

with l1 = 1 + l/2 + λ/2, l2 = ¾ + l/2 + λ/2, s1 = i_prev + l/2 − ¼ + λ/2,
s2 = i_prev + l/2 + λ/2. It holds term by term because B(s, j+1)·s = j!/(s+1)_j.
The infinite-series variant replaces −α_l and α_l+l+¼+λ by
−α/4 + l/2 + λ/2 and α/4 + ¼ + l/2 + λ/2.
"""

from __future__ import annotations
import logging
import warnings

from scipy import special

from .errors import DivergenceError, DivergenceWarning, DomainError, check_index
from .models import Hyp2F1Args, IndicialRoot, LameParams, SeriesMode, TruncationSpec
from .numerics import NumericContext, Precision, get_context
from .series import get_evaluator, series_vars

logger = logging.getLogger(__name__)


def _pochhammer(ctx: NumericContext, x, n: int):
    check_index(n, "n")
    value = ctx.num(1)
    for k in range(n):
        value = value * (x + k)
    return value


def pochhammer(x: float, n: int, precision=None) -> float:
    """Rising factorial (x)_n = x(x+1)…(x+n−1), (x)_0 = 1."""
    if n < 0:
        raise DomainError(f"pochhammer needs n >= 0, got {n}")
    ctx = get_context(precision)
    return ctx.to_float(_pochhammer(ctx, ctx.num(x), n))


def _beta(ctx: NumericContext, p, q):
    if not (p > 0 and q > 0):
        raise DomainError(f"beta_fn needs p, q > 0, got p={p}, q={q}")
    if ctx.precision is Precision.EXTENDED:
        return ctx.mp.beta(ctx.num(p), ctx.num(q))
    return float(special.beta(float(p), float(q)))


def beta_fn(p: float, q: float, precision=None) -> float:
    """B(p, q) = Γ(p)Γ(q)/Γ(p+q) for p, q > 0."""
    ctx = get_context(precision)
    return ctx.to_float(_beta(ctx, p, q))


# ── Gauss 2F1 ────────────────────────────────────────────────────────

def _hyp2f1_terms(ctx: NumericContext, args: Hyp2F1Args, t: TruncationSpec) -> list:
    num = ctx.num
    a1, b1, c1, z = num(args.a1), num(args.b1), num(args.c1), num(args.z)
    stop = args.terminates_at
    if stop is None and abs(args.z) >= 1:
        warnings.warn(
            f"2F1 series with |z|={abs(args.z)} >= 1 does not converge; "
            f"returning the partial sum of {t.i_max + 1} terms",
            DivergenceWarning,
            stacklevel=3,
        )
    # terminating series ignore i_max
    last = t.i_max if stop is None else check_index(stop, "2F1 degree")
    terms = [num(1)]
    running = num(1)
    small_run = 0
    for n in range(last):
        terms.append(terms[-1] * (a1 + n) * (b1 + n) / ((c1 + n) * (n + 1)) * z)
        if stop is None:
            running = running + terms[-1]
            small_run = small_run + 1 if abs(terms[-1]) <= t.tol * abs(running) else 0
            if small_run >= 2:
                break
    return terms


def hyp2f1_terms(args: Hyp2F1Args, t: TruncationSpec = None, precision=None) -> list[float]:
    """The individual terms (a1)_n (b1)_n / ((c1)_n n!) z^n that gauss_2f1 sums."""
    ctx = get_context(precision)
    return [ctx.to_float(v) for v in _hyp2f1_terms(ctx, args, t or TruncationSpec())]


def gauss_2f1(args: Hyp2F1Args, t: TruncationSpec = None, precision=None) -> float:
    """
    Truncated (or terminating) 2F1(a1, b1; c1; z).

    Terminating series are summed exactly to their degree, whatever
    t.i_max is. Otherwise at most t.i_max + 1 terms are used, stopping
    early after two terms below t.tol relative to the partial sum.
    |z| >= 1 without termination emits DivergenceWarning. A degree above
    INDEX_CAP raises TruncationOverflowError.
    """
    t = t or TruncationSpec()
    ctx = get_context(precision)
    terms = _hyp2f1_terms(ctx, args, t)
    logger.debug(f"2F1({args.a1}, {args.b1}; {args.c1}; {args.z}) summed {len(terms)} terms")
    return ctx.to_float(ctx.fsum(terms))


# ── Kernel identity ──────────────────────────────────────────────────

def _kernel_sides(
    ctx: NumericContext,
    l: int,
    i_prev: int,
    u1,
    u2,
    lam: IndicialRoot,
    eta: float,
    last: int,
) -> tuple:
    num = ctx.num
    h = (num(l) + num(lam.lam)) / 2
    l1, l2 = 1 + h, num(0.75) + h
    eta_c = num(eta)
    lead = eta_c ** i_prev

    # left: ratio form from i_prev upward, no division by (u)_{i_prev}
    left_terms = [lead]
    term = lead
    for i in range(i_prev, last):
        term = term * (i + u1) * (i + u2) / ((i + l1) * (i + l2)) * eta_c
        if not term:
            break
        left_terms.append(term)
    left = ctx.fsum(left_terms)

    # right: beta-weighted j-series
    s1 = i_prev + h - num(0.25)
    s2 = i_prev + h
    right_terms = []
    factorial = num(1)
    for j in range(last - i_prev + 1):
        if j:
            factorial = factorial * j
        weight = _beta(ctx, s1, j + 1) * _beta(ctx, s2, j + 1) * s1 * s2
        pair = _pochhammer(ctx, i_prev + u1, j) * _pochhammer(ctx, i_prev + u2, j)
        if not pair:
            break
        right_terms.append(weight * pair / (factorial * factorial) * eta_c ** j)
    right = lead * ctx.fsum(right_terms)
    return left, right


def kernel_identity_gap(
    l: int,
    i_prev: int,
    alpha_l: int,
    lam: IndicialRoot,
    eta: float,
    t: TruncationSpec = None,
    precision=None,
) -> float:
    """|left − right| of the polynomial kernel identity at level l."""
    lam = IndicialRoot.parse(lam)
    t = t or TruncationSpec()
    if l < 1:
        raise DomainError(f"level l must be >= 1, got {l}")
    if not 0 <= i_prev <= alpha_l:
        raise DomainError(f"need 0 <= i_prev <= alpha_l, got i_prev={i_prev}, alpha_l={alpha_l}")
    if abs(eta) >= 1:
        raise DivergenceError(f"kernel identity needs |eta| < 1, got {eta}")
    ctx = get_context(precision)
    num = ctx.num
    u1 = -num(alpha_l)
    u2 = num(alpha_l) + l + num(0.25) + num(lam.lam)
    left, right = _kernel_sides(ctx, l, i_prev, u1, u2, lam, eta, alpha_l)
    return ctx.to_float(abs(left - right))


def infinite_kernel_identity_gap(
    l: int,
    i_prev: int,
    alpha: float,
    lam: IndicialRoot,
    eta: float,
    t: TruncationSpec = None,
    precision=None,
) -> float:
    """Same identity for the infinite series; both sides cut at i_prev + t.i_max."""
    lam = IndicialRoot.parse(lam)
    t = t or TruncationSpec()
    if l < 1:
        raise DomainError(f"level l must be >= 1, got {l}")
    if i_prev < 0:
        raise DomainError(f"i_prev must be >= 0, got {i_prev}")
    if abs(eta) >= 1:
        raise DivergenceError(f"kernel identity needs |eta| < 1, got {eta}")
    ctx = get_context(precision)
    num = ctx.num
    h = (num(l) + num(lam.lam)) / 2
    u1 = -num(alpha) / 4 + h
    u2 = num(alpha) / 4 + num(0.25) + h
    left, right = _kernel_sides(ctx, l, i_prev, u1, u2, lam, eta, i_prev + t.i_max)
    return ctx.to_float(abs(left - right))


# ── Leading term ─────────────────────────────────────────────────────

def leading_args(alpha: float, kind: IndicialRoot, eta: float) -> Hyp2F1Args:
    """2F1 arguments of y_0: (−α/4, α/4+¼; ¾) or (−α/4+¼, α/4+½; 5/4)."""
    if IndicialRoot.parse(kind) is IndicialRoot.FIRST_KIND:
        return Hyp2F1Args(a1=-alpha / 4, b1=alpha / 4 + 0.25, c1=0.75, z=eta)
    return Hyp2F1Args(a1=-alpha / 4 + 0.25, b1=alpha / 4 + 0.5, c1=1.25, z=eta)


def leading_term_check(
    p: LameParams,
    kind: IndicialRoot,
    x: float,
    t: TruncationSpec = None,
    precision=None,
) -> float:
    """|y_0(z) − z^λ 2F1(…; η)| with y_0 taken from the infinite evaluator."""
    kind = IndicialRoot.parse(kind)
    t = t or TruncationSpec()
    result = get_evaluator(SeriesMode.INFINITE, kind)(p, x, t, precision=precision)
    v = series_vars(p, x)
    f = gauss_2f1(leading_args(p.alpha, kind, v.eta), t, precision=precision)
    ctx = get_context(precision)
    if kind is IndicialRoot.SECOND_KIND:
        f = ctx.to_float(ctx.sqrt(ctx.num(v.z)) * ctx.num(f))
    return abs(result.sub_values[0] - f)
