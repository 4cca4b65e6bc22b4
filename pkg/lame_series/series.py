"""
Series 3TRF - sub-series decomposition of three-term recurrence solutions.

A solution Σ c_n x^{n+λ} of c_{n+1} = A_n c_n + B_n c_{n−1} is regrouped as
Σ_m y_m, where y_m holds every product containing exactly m A-factors.
Inside y_m the inner indices s_0 ≤ s_1 ≤ … ≤ s_m count B-steps: level k
walks B(2i+k+1) for i in [s_{k−1}, s_k) and leaves through A(2s_k+k).

The nested sums are evaluated level by level. Row k holds, per final inner
index s, the sum over all index chains ending at s; row k+1 is built from
row k with running products, so a chain product is never formed as a
quotient of two large products.

Evaluators:
    generic_3trf_infinite / generic_3trf_polynomial   any A, B
    lame_{first,second}_kind_{infinite,polynomial}     Lamé closed forms

The Lamé closed forms are written in z = x − a, μ = −z/((a−b)(a−c)),
η = −z²/((a−b)(a−c)); level k uses the Pochhammer step ratio

    (i + u1)(i + u2) / ((i + l1)(i + l2))
    u1 = −α/4 + k/2 + λ/2     u2 = α/4 + ¼ + k/2 + λ/2
    l1 = 1 + k/2 + λ/2        l2 = ¾ + k/2 + λ/2

per η and the A-factor

    [(2a−b−c)(i + k/2 + λ/2)² − aα(α+1)/16 + q/16] / [(i + k/2 + ½ + λ/2)(i + k/2 + ¼ + λ/2)]

per μ. Polynomial mode substitutes the level's own α into the same forms.

Usage:
    p = LameParams(a=2, b=1, c=0, q=8, alpha=1)
    res = lame_first_kind_infinite(p, 2.1, TruncationSpec(n_max=30, i_max=30))
    res.value, res.sub_values, res.tail_estimate

    spec = PolynomialSpec(j=0, alpha_seq=(1, 1, 2))
    res = lame_first_kind_polynomial(p, spec, q=0.0, x=2.1)
"""

from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence, Union

from .domain import convergence_metric
from .errors import (
    BranchError,
    InvalidParamsError,
    LameError,
    SpecViolationError,
    TerminationViolationError,
    check_index,
)
from .eval_trace import EvalTrace
from .models import (
    IndicialRoot,
    LameParams,
    PolynomialSpec,
    SeriesMode,
    SeriesResult,
    SeriesVariables,
    TruncationSpec,
)
from .numerics import NumericContext, get_context
from .recurrence import Recurrence, eval_coefficients, eval_frobenius, polynomial_oracle_coeffs

logger = logging.getLogger(__name__)

# |B| at a required termination index above this is a violation
TERMINATION_ATOL = 1e-12

# A or B: one callable n -> value, a sequence indexed by n, or one callable per level
Coefficient = Union[Callable[[int], Any], Sequence[Any], Sequence[Callable[[int], Any]]]


# ── Evaluator registry ───────────────────────────────────────────────

_EVALUATOR_REGISTRY: dict[tuple[SeriesMode, IndicialRoot], Callable] = {}


def register_evaluator(mode: SeriesMode, kind: IndicialRoot):
    """
    Function decorator registering a closed-form evaluator.

    Usage:
        @register_evaluator(SeriesMode.INFINITE, IndicialRoot.FIRST_KIND)
        def lame_first_kind_infinite(p, x, t=None, precision=None):
            ...
    """
    def decorator(fn):
        _EVALUATOR_REGISTRY[(SeriesMode(mode), IndicialRoot.parse(kind))] = fn
        logger.debug(f"Registered evaluator: {SeriesMode(mode).value}/{IndicialRoot.parse(kind).kind} → {fn.__name__}")
        return fn
    return decorator


def get_evaluator(mode: Union[SeriesMode, str], kind) -> Callable:
    key = (SeriesMode(mode), IndicialRoot.parse(kind))
    fn = _EVALUATOR_REGISTRY.get(key)
    if fn is None:
        raise SpecViolationError(f"No evaluator registered for {key[0].value}/{key[1].kind}")
    return fn


def list_evaluators() -> dict[str, str]:
    return {
        f"{mode.value}/{kind.kind}": fn.__name__
        for (mode, kind), fn in _EVALUATOR_REGISTRY.items()
    }


# ── Variables ────────────────────────────────────────────────────────

def series_vars(p: LameParams, x: float) -> SeriesVariables:
    """z = x − a, μ = −z/((a−b)(a−c)), η = −z²/((a−b)(a−c))."""
    p.require_nondegenerate()
    z = float(x) - p.a
    d = p.denom
    return SeriesVariables(z=z, mu=-z / d, eta=-(z * z) / d)


# ── Level engine ─────────────────────────────────────────────────────

@dataclass
class _Plan:
    """Everything the level engine needs for one evaluation."""
    ctx: NumericContext
    enter: Callable[[int, int], Any]    # factor leaving level k at inner index s
    step: Callable[[int, int], Any]     # factor of inner step i -> i+1 on level k
    weight: Callable[[int, int], Any]   # variable part of row entry (k, s)
    scale: Callable[[int, int], Any]    # row entry (k, s) -> coefficient of z^{2s+k}
    bound: Callable[[int], int]         # last inner index on level k
    n_levels: int
    prefactor: Any                      # z^λ
    adaptive: bool
    tol: float
    metric: Optional[float] = None      # convergence metric at x, when known


def _next_row(plan: _Plan, k: int, prev: Optional[list]) -> tuple[list, int]:
    ctx = plan.ctx
    bound = check_index(plan.bound(k), "inner bound")
    steps = [ctx.num(plan.step(k, i)) for i in range(bound)]

    if k == 0:
        row = [ctx.num(1)]
        for i in range(bound):
            row.append(row[-1] * steps[i])
        return row, bound + 1

    # buckets[s] gathers every chain that ends at s, innermost index ascending
    buckets: list[list] = [[] for _ in range(bound + 1)]
    terms = 0
    for entry in range(min(len(prev) - 1, bound) + 1):
        if not prev[entry]:
            continue
        prod = prev[entry] * ctx.num(plan.enter(k - 1, entry))
        buckets[entry].append(prod)
        terms += 1
        for s in range(entry + 1, bound + 1):
            if not prod:
                break
            prod = prod * steps[s - 1]
            buckets[s].append(prod)
            terms += 1
    return [ctx.fsum(b) for b in buckets], terms


def _evaluate(plan: _Plan, trace: EvalTrace) -> SeriesResult:
    ctx = plan.ctx
    values: list = []
    coeff_parts: dict[int, list] = {}
    inner_tail: list = []
    terms_total = 0
    small_run = 0
    stop = "terminated" if not plan.adaptive else "n_max"
    row = None

    for k in range(plan.n_levels):
        try:
            row, terms = _next_row(plan, k, row)
        except LameError as e:
            trace.stopped("error", levels=len(values))
            trace.delivered(converged=False, error=f"level {k}: {type(e).__name__}: {e}")
            trace.emit()
            raise
        terms_total += terms
        y_k = plan.prefactor * ctx.fsum(row[s] * plan.weight(k, s) for s in range(len(row)))
        values.append(y_k)
        for s, entry in enumerate(row):
            if entry:
                coeff_parts.setdefault(2 * s + k, []).append(entry * plan.scale(k, s))
        last = len(row) - 1
        inner_tail.append(abs(plan.prefactor * row[last] * plan.weight(k, last)))
        trace.level(k, value=ctx.to_float(y_k), terms=terms, bound=last)

        if plan.adaptive:
            total = abs(ctx.fsum(values))
            small_run = small_run + 1 if abs(y_k) <= plan.tol * total else 0
            if small_run >= 2:
                stop = "converged"
                break

    value = ctx.fsum(values)
    if plan.adaptive:
        tail = _outer_tail(ctx, values) + ctx.fsum(inner_tail)
        converged = stop == "converged" and tail <= max(plan.tol * abs(value), 1e-300) * 1e3
    else:
        tail = ctx.num(0)
        converged = True
    if plan.metric is not None and plan.metric >= 1:
        converged = False
        stop = f"{stop},outside_domain"

    trace.stopped(stop, levels=len(values))
    tail_f = ctx.to_float(tail)
    value_f = ctx.to_float(value)
    trace.delivered(value=value_f, tail=tail_f, converged=converged)
    trace.emit()

    top = max(coeff_parts) if coeff_parts else 0
    coefficients = tuple(
        ctx.to_float(ctx.fsum(coeff_parts.get(n, []))) for n in range(top + 1)
    )
    return SeriesResult(
        value=value_f,
        sub_values=tuple(ctx.to_float(v) for v in values),
        terms_used=terms_total,
        tail_estimate=tail_f,
        coefficients=coefficients,
        converged=converged,
        stop_reason=stop,
        trace=trace.as_dict(),
    )


def _outer_tail(ctx: NumericContext, values: list):
    """Geometric estimate of Σ_{m > last} |y_m| from the last two blocks."""
    last = abs(values[-1])
    if len(values) < 2 or not values[-2]:
        return last
    ratio = last / abs(values[-2])
    if ratio < 1:
        return last * ratio / (1 - ratio)
    return last


def _level_fn(obj: Coefficient, name: str) -> Callable[[int, int], Any]:
    """Normalize A/B input to f(level, n)."""
    if callable(obj):
        return lambda k, n: obj(n)
    if len(obj) and callable(obj[0]):
        def per_level(k, n):
            if k >= len(obj):
                raise SpecViolationError(f"{name} given for {len(obj)} levels, level {k} requested")
            return obj[k](n)
        return per_level

    def indexed(k, n):
        if n >= len(obj):
            raise SpecViolationError(f"{name} sequence has {len(obj)} entries, index {n} requested")
        return obj[n]
    return indexed


def _root_factor(ctx: NumericContext, lam: IndicialRoot, var: float):
    if lam is IndicialRoot.SECOND_KIND:
        if var < 0:
            raise BranchError(f"x^(1/2) needs a nonnegative expansion variable, got {var}")
        return ctx.sqrt(ctx.num(var))
    return ctx.num(1)


# ── Generic engines ──────────────────────────────────────────────────

def generic_3trf_infinite(
    A: Coefficient,
    B: Coefficient,
    lam: IndicialRoot,
    x: float,
    t: TruncationSpec = None,
    precision=None,
) -> SeriesResult:
    """
    3TRF sum of Σ c_n x^{n+λ} with every inner sum cut at t.i_max and the
    outer sum cut at t.n_max (or earlier, once two consecutive blocks fall
    below t.tol relative to the running total).

    x is the expansion variable itself; pass z = x − a for the Lamé series.
    """
    lam = IndicialRoot.parse(lam)
    t = t or TruncationSpec()
    ctx = get_context(precision)
    A_at, B_at = _level_fn(A, "A"), _level_fn(B, "B")
    prefactor = _root_factor(ctx, lam, x)
    pw = ctx.powers(ctx.num(x), t.depth + 1)
    one = ctx.num(1)

    plan = _Plan(
        ctx=ctx,
        enter=lambda k, s: A_at(k, 2 * s + k),
        step=lambda k, i: B_at(k, 2 * i + k + 1),
        weight=lambda k, s: pw[2 * s + k],
        scale=lambda k, s: one,
        bound=lambda k: t.i_max,
        n_levels=t.n_max + 1,
        prefactor=prefactor,
        adaptive=True,
        tol=t.tol,
    )
    trace = EvalTrace("generic_3trf_infinite", kind=lam.kind)
    trace.started(x=x, truncation=t.to_dict(), precision=ctx.precision.value)
    return _evaluate(plan, trace)


def generic_3trf_polynomial(
    A: Coefficient,
    B: Coefficient,
    lam: IndicialRoot,
    betas: Sequence[int],
    x: float,
    t: TruncationSpec = None,
    precision=None,
) -> SeriesResult:
    """
    Finite 3TRF sum: level k runs its inner index up to betas[k] and there
    are len(betas) levels. Requires B(2β_k + k + 1) = 0 on every level,
    which is checked. Exact; the result does not depend on t.
    """
    lam = IndicialRoot.parse(lam)
    ctx = get_context(precision)
    betas = [int(b) for b in betas]
    if not betas:
        raise SpecViolationError("betas must not be empty")
    for b in betas:
        if b < 0:
            raise SpecViolationError(f"betas must be nonneg, got {b}")
        check_index(b, "beta")
    A_at, B_at = _level_fn(A, "A"), _level_fn(B, "B")

    for k, beta in enumerate(betas):
        value = B_at(k, 2 * beta + k + 1)
        if abs(float(value)) > TERMINATION_ATOL:
            raise TerminationViolationError(
                f"level {k}: B({2 * beta + k + 1}) = {float(value):.3e}, expected 0 for beta={beta}"
            )

    prefactor = _root_factor(ctx, lam, x)
    pw = ctx.powers(ctx.num(x), 2 * max(betas) + len(betas) + 1)
    one = ctx.num(1)
    plan = _Plan(
        ctx=ctx,
        enter=lambda k, s: A_at(k, 2 * s + k),
        step=lambda k, i: B_at(k, 2 * i + k + 1),
        weight=lambda k, s: pw[2 * s + k],
        scale=lambda k, s: one,
        bound=lambda k: betas[k],
        n_levels=len(betas),
        prefactor=prefactor,
        adaptive=False,
        tol=(t or TruncationSpec()).tol,
    )
    trace = EvalTrace("generic_3trf_polynomial", kind=lam.kind)
    trace.started(x=x, betas=betas, precision=ctx.precision.value)
    return _evaluate(plan, trace)


def generic_lame_infinite(
    p: LameParams, lam: IndicialRoot, x: float, t: TruncationSpec = None, precision=None
) -> SeriesResult:
    """generic_3trf_infinite fed the raw Lamé A_n, B_n at z = x − a."""
    lam = IndicialRoot.parse(lam)
    rec = Recurrence(p, lam, get_context(precision))
    return generic_3trf_infinite(rec.A, rec.B, lam, float(x) - p.a, t, precision=precision)


def generic_polynomial_from_spec(
    p: LameParams, spec: PolynomialSpec, q: float, lam: IndicialRoot, x: float, precision=None
) -> SeriesResult:
    """generic_3trf_polynomial fed per-level Lamé A_n, B_n at α = spec.level_alpha(k)."""
    lam = IndicialRoot.parse(lam)
    ctx = get_context(precision)
    base = p.with_alpha(spec.alpha(lam), q=q)
    recs = [
        Recurrence(base.with_alpha(spec.level_alpha(k, lam)), lam, ctx)
        for k in range(spec.n_levels)
    ]
    return generic_3trf_polynomial(
        [r.A for r in recs],
        [r.B for r in recs],
        lam,
        spec.alpha_seq,
        float(x) - p.a,
        precision=precision,
    )


# ── Lamé closed forms ────────────────────────────────────────────────

class _LameFactors:
    """Pochhammer step ratios and A-factors of the closed forms, per level."""

    def __init__(self, ctx: NumericContext, p: LameParams, lam: IndicialRoot,
                 level_alpha: Callable[[int], float]):
        self.ctx = ctx
        num = ctx.num
        self._level_alpha = level_alpha
        self._a = num(p.a)
        self._q16 = num(p.q) / 16
        self._linear = num(p.a) * 2 - num(p.b) - num(p.c)
        self._lam = num(lam.lam)
        self._quarter = num(0.25)
        self._half = num(0.5)
        self._levels: dict[int, tuple] = {}

    def _consts(self, k: int) -> tuple:
        consts = self._levels.get(k)
        if consts is None:
            num = self.ctx.num
            al = num(self._level_alpha(k))
            h = (num(k) + self._lam) / 2
            consts = (
                -al / 4 + h,                                  # u1
                al / 4 + self._quarter + h,                   # u2
                1 + h,                                        # l1
                num(0.75) + h,                                # l2
                h,
                self._a * al * (al + 1) / 16 - self._q16,
            )
            self._levels[k] = consts
        return consts

    def step(self, k: int, i: int):
        u1, u2, l1, l2, _, _ = self._consts(k)
        return (i + u1) * (i + u2) / ((i + l1) * (i + l2))

    def enter(self, k: int, i: int):
        _, _, _, _, h, shift = self._consts(k)
        w = i + h
        return (self._linear * w * w - shift) / ((w + self._half) * (w + self._quarter))


def _closed_form(
    name: str,
    p: LameParams,
    lam: IndicialRoot,
    x: float,
    level_alpha: Callable[[int], float],
    bound: Callable[[int], int],
    n_levels: int,
    adaptive: bool,
    tol: float,
    ctx: NumericContext,
    extra: dict,
) -> SeriesResult:
    p.require_nondegenerate()
    if lam is IndicialRoot.SECOND_KIND and float(x) < p.a:
        raise BranchError(f"second-kind solution needs x >= a (x={x}, a={p.a})")
    num = ctx.num
    z = num(x) - num(p.a)
    prefactor = ctx.sqrt(z) if lam is IndicialRoot.SECOND_KIND else num(1)
    inv = -1 / ((num(p.a) - num(p.b)) * (num(p.a) - num(p.c)))
    mu, eta = z * inv, z * z * inv

    max_bound = max(bound(k) for k in range(n_levels))
    mu_pw = ctx.powers(mu, n_levels + 1)
    eta_pw = ctx.powers(eta, max_bound + 1)
    inv_pw = ctx.powers(inv, n_levels + max_bound + 1)
    factors = _LameFactors(ctx, p, lam, level_alpha)

    metric = convergence_metric(p, x) if adaptive else None
    plan = _Plan(
        ctx=ctx,
        enter=factors.enter,
        step=factors.step,
        weight=lambda k, s: mu_pw[k] * eta_pw[s],
        scale=lambda k, s: inv_pw[k + s],
        bound=bound,
        n_levels=n_levels,
        prefactor=prefactor,
        adaptive=adaptive,
        tol=tol,
        metric=metric,
    )
    trace = EvalTrace(name, kind=lam.kind)
    trace.started(params=p.to_dict(), x=x, precision=ctx.precision.value, metric=metric, **extra)
    if metric is not None and metric >= 1:
        logger.warning(f"[{name}] x={x} outside the convergence domain (metric={metric:.4g})")
    return _evaluate(plan, trace)


def _lame_infinite(name: str, p: LameParams, lam: IndicialRoot, x: float,
                   t: Optional[TruncationSpec], precision) -> SeriesResult:
    t = t or TruncationSpec()
    return _closed_form(
        name, p, lam, x,
        level_alpha=lambda k: p.alpha,
        bound=lambda k: t.i_max,
        n_levels=t.n_max + 1,
        adaptive=True,
        tol=t.tol,
        ctx=get_context(precision),
        extra={"truncation": t.to_dict()},
    )


def _lame_polynomial(name: str, p: LameParams, spec: PolynomialSpec, q: float,
                     lam: IndicialRoot, x: float, precision) -> SeriesResult:
    if not isinstance(spec, PolynomialSpec):
        raise SpecViolationError(f"polynomial mode needs a PolynomialSpec, got {spec!r}")
    p = p.with_alpha(spec.alpha(lam), q=q).require_nondegenerate()
    ctx = get_context(precision)

    def level_alpha(k):
        return spec.level_alpha(k, lam)

    check = _LameFactors(ctx, p, lam, level_alpha)
    for k, beta in enumerate(spec.alpha_seq):
        if check.step(k, beta) != 0:
            raise TerminationViolationError(
                f"level {k} does not terminate at alpha_{k}={beta} (alpha={level_alpha(k)})"
            )
    return _closed_form(
        name, p, lam, x,
        level_alpha=level_alpha,
        bound=lambda k: spec.alpha_seq[k],
        n_levels=spec.n_levels,
        adaptive=False,
        tol=TruncationSpec().tol,
        ctx=ctx,
        extra={"spec": spec.to_dict()},
    )


@register_evaluator(SeriesMode.INFINITE, IndicialRoot.FIRST_KIND)
def lame_first_kind_infinite(p: LameParams, x: float, t: TruncationSpec = None,
                             precision=None) -> SeriesResult:
    """First-kind (λ = 0) infinite series about x = a."""
    return _lame_infinite("lame_first_kind_infinite", p, IndicialRoot.FIRST_KIND, x, t, precision)


@register_evaluator(SeriesMode.INFINITE, IndicialRoot.SECOND_KIND)
def lame_second_kind_infinite(p: LameParams, x: float, t: TruncationSpec = None,
                              precision=None) -> SeriesResult:
    """Second-kind (λ = ½) infinite series, z^{1/2} included. Needs x >= a."""
    return _lame_infinite("lame_second_kind_infinite", p, IndicialRoot.SECOND_KIND, x, t, precision)


@register_evaluator(SeriesMode.POLYNOMIAL, IndicialRoot.FIRST_KIND)
def lame_first_kind_polynomial(p: LameParams, spec: PolynomialSpec, q: float, x: float,
                               precision=None) -> SeriesResult:
    """
    First-kind polynomial: α = 2(2α_j + j) or −2(2α_j + j) − 1.
    p supplies a, b, c; its q and α are replaced by q and the spec's α.
    """
    return _lame_polynomial("lame_first_kind_polynomial", p, spec, q,
                            IndicialRoot.FIRST_KIND, x, precision)


@register_evaluator(SeriesMode.POLYNOMIAL, IndicialRoot.SECOND_KIND)
def lame_second_kind_polynomial(p: LameParams, spec: PolynomialSpec, q: float, x: float,
                                precision=None) -> SeriesResult:
    """Second-kind polynomial: α = 2(2α_j + j) + 1 or −2(2α_j + j + 1)."""
    return _lame_polynomial("lame_second_kind_polynomial", p, spec, q,
                            IndicialRoot.SECOND_KIND, x, precision)


# ── Dispatch ─────────────────────────────────────────────────────────

def evaluate(
    mode: Union[SeriesMode, str],
    kind,
    p: LameParams,
    x: float,
    t: TruncationSpec = None,
    spec: PolynomialSpec = None,
    precision=None,
) -> SeriesResult:
    """Run the registered evaluator for (mode, kind)."""
    mode = SeriesMode(mode)
    fn = get_evaluator(mode, kind)
    if mode is SeriesMode.POLYNOMIAL:
        if spec is None:
            raise SpecViolationError("polynomial mode needs a PolynomialSpec")
        return fn(p, spec, p.q, x, precision=precision)
    return fn(p, x, t, precision=precision)


def reference_value(
    mode: Union[SeriesMode, str],
    kind,
    p: LameParams,
    x: float,
    depth: int,
    spec: PolynomialSpec = None,
    precision=None,
) -> float:
    """
    Independent oracle for evaluate(): the Frobenius series to the given
    depth (infinite mode) or the level-resolved recurrence (polynomial).
    """
    mode = SeriesMode(mode)
    kind = IndicialRoot.parse(kind)
    if mode is SeriesMode.POLYNOMIAL:
        if spec is None:
            raise SpecViolationError("polynomial mode needs a PolynomialSpec")
        coeffs = polynomial_oracle_coeffs(p, spec, p.q, kind, precision=precision)
        return eval_coefficients(coeffs, kind, float(x) - p.a, precision=precision)
    if depth < 1:
        raise InvalidParamsError(f"oracle depth must be >= 1, got {depth}")
    return eval_frobenius(p, kind, x, depth, precision=precision)
