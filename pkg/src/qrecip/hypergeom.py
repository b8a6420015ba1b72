"""Unilateral and bilateral basic hypergeometric sums.

A :class:`SeriesSpec` describes the k-th term

    scale * prod (1 - u_i)^{p_i} * prod (x; q)_{k+s} / prod (y; q)_{k+t}
          * prod (1 - u q^{m k}) * z^k * q^{(A k^2 + B k)/2}

with every parameter a monomial expression (:mod:`qrecip.params`).  The
quadratic exponent covers the factors q^{binom(k,2)}, q^{binom(k+1,2)} and
q^{k(3k+-1)/2}; a sign (-1)^k is folded into ``z``.  Index shifts ``s`` and
``t`` give factors such as (x; q)_{k+1}.

Evaluation happens in two stages.  :func:`resolve` binds the slots and
returns a :class:`Resolved` spec whose entries are values of a field
(exact :class:`QMonomial` or mpmath numbers); the exact summation below and
the numeric one in :mod:`qrecip.numeric` both work from it.  Bilateral sums
are split at k = -1 and the negative half is rewritten with k -> -n-1 into
another unilateral spec (:func:`negative_part`).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .errors import InadmissibleSeries, NotAPerfectSquare, PoleInTerm, SingularLimit
from .params import ONE, Q, ExactField, PExpr
from .qfunctions import FactorBag
from .series import LaurentSeries, QMonomial

UNILATERAL = "unilateral"
BILATERAL = "bilateral"

# quadratic exponent shapes (A, B) meaning q^{(A k^2 + B k)/2}
NO_QUAD = (0, 0)
BINOM_K2 = (1, -1)  # q^{k(k-1)/2}
BINOM_K1 = (1, 1)  # q^{k(k+1)/2}
PENT_MINUS = (3, -1)  # q^{k(3k-1)/2}
PENT_PLUS = (3, 1)  # q^{k(3k+1)/2}


@dataclass(frozen=True)
class Poch:
    """The factor (base; q)_{k + shift}."""

    base: PExpr
    shift: int = 0


@dataclass(frozen=True)
class Kernel:
    """The factor (1 - u q^{step k})."""

    u: PExpr
    step: int = 2


def _as_poch(p) -> Poch:
    return p if isinstance(p, Poch) else Poch(p, 0)


@dataclass(frozen=True)
class SeriesSpec:
    numerators: tuple = ()
    denominators: tuple = ()
    argument: PExpr = ONE
    kind: str = UNILATERAL
    quad: tuple = NO_QUAD
    kernels: tuple = ()
    binomials: tuple = ()  # (u, power): factor (1 - u)^power
    scale: PExpr = ONE

    def __post_init__(self):
        object.__setattr__(self, "numerators", tuple(_as_poch(p) for p in self.numerators))
        object.__setattr__(self, "denominators", tuple(_as_poch(p) for p in self.denominators))
        object.__setattr__(
            self, "kernels", tuple(k if isinstance(k, Kernel) else Kernel(*k) for k in self.kernels)
        )
        object.__setattr__(self, "binomials", tuple((u, int(p)) for u, p in self.binomials))
        A, B = self.quad
        if A < 0 or (A + B) % 2:
            raise ValueError(f"quadratic shape {self.quad} does not give integer exponents")
        if self.kind not in (UNILATERAL, BILATERAL):
            raise ValueError(f"unknown series kind {self.kind!r}")
        for k in self.kernels:
            if k.step <= 0:
                raise ValueError("kernel steps must be positive")

    def slots(self) -> frozenset:
        out = set(self.argument.slots()) | self.scale.slots()
        for p in self.numerators + self.denominators:
            out |= p.base.slots()
        for k in self.kernels:
            out |= k.u.slots()
        for u, _ in self.binomials:
            out |= u.slots()
        return frozenset(out)

    def subs(self, mapping: dict) -> "SeriesSpec":
        return SeriesSpec(
            tuple(Poch(p.base.subs(mapping), p.shift) for p in self.numerators),
            tuple(Poch(p.base.subs(mapping), p.shift) for p in self.denominators),
            self.argument.subs(mapping),
            self.kind,
            self.quad,
            tuple(Kernel(k.u.subs(mapping), k.step) for k in self.kernels),
            tuple((u.subs(mapping), p) for u, p in self.binomials),
            self.scale.subs(mapping),
        )


@dataclass(frozen=True)
class VWPSpec:
    """Very-well-poised data: head ``a``, remaining parameters ``tail``, argument ``z``."""

    a: PExpr
    tail: tuple
    argument: PExpr
    kind: str = UNILATERAL


def build_vwp(vwp: VWPSpec, params: dict | None = None, quad=NO_QUAD) -> SeriesSpec:
    """Expand a very-well-poised series into a plain :class:`SeriesSpec`.

    The pairs (q sqrt(a), -q sqrt(a)) / (sqrt(a), -sqrt(a)) collapse to the
    kernel (1 - a q^{2k}) / (1 - a), so sqrt(a) is never formed.  The head
    must still be a perfect-square monomial; this is checked on the constant
    expression, or on its value when exact ``params`` are given.
    """
    head = vwp.a
    value = None
    if not head.slots():
        value = QMonomial(head.coeff, head.qexp)
    elif params is not None:
        value = resolve_value(head, params)
    if value is not None and not value.is_square():
        raise NotAPerfectSquare(f"very-well-poised head {value.render()} is not a perfect square")
    tail = tuple(vwp.tail)
    den = tuple(head * Q / b for b in tail)
    if vwp.kind == UNILATERAL:
        nums = (head,) + tail
        den = (Q,) + den
    else:
        nums = tail
    return SeriesSpec(
        nums,
        den,
        vwp.argument,
        vwp.kind,
        quad,
        kernels=(Kernel(head, 2),),
        binomials=((head, -1),),
    )


# -- zero-slot limits ----------------------------------------------------


def reduce_limits(spec: SeriesSpec, zero_slots) -> SeriesSpec:
    """Apply lim_{t->0} (u/t; q)_k t^k = (-u)^k q^{binom(k,2)} for each zero slot t.

    A numerator (u/t; q)_k is paired with one power of t taken from the
    argument.  Unpaired negative powers raise :class:`SingularLimit`.
    """
    nums = list(spec.numerators)
    z = spec.argument
    A, B = spec.quad
    for s in sorted(zero_slots):
        slot = PExpr.slot(s)
        paired = [p for p in nums if p.shift == 0 and p.base.power_of(s) == -1]
        if not paired:
            continue
        if z.power_of(s) < len(paired):
            raise SingularLimit(f"argument lacks the powers of {s} needed for the limit {s} -> 0")
        for p in paired:
            nums.remove(p)
            z = z * (-(p.base * slot)) / slot
        A += len(paired)
        B -= len(paired)
    return SeriesSpec(
        tuple(nums),
        spec.denominators,
        z,
        spec.kind,
        (A, B),
        spec.kernels,
        spec.binomials,
        spec.scale,
    )


# -- resolution -------------------------------------------------------------


@dataclass
class Resolved:
    field: object
    num: list
    den: list
    z: object
    A: int
    B: int
    kernels: list
    binomials: list
    scale: object
    meta: dict = dc_field(default_factory=dict)


def _zero_slots(env: dict, field) -> set:
    out = set()
    for k, v in env.items():
        if isinstance(v, int) and not isinstance(v, bool):
            continue
        try:
            if field.is_zero(v):
                out.add(k)
        except (AttributeError, TypeError):
            continue
    return out


def resolve(spec: SeriesSpec, env: dict, field=ExactField) -> Resolved:
    """Bind the slots of ``spec`` to values in ``field``."""
    spec = reduce_limits(spec, _zero_slots(env, field) & spec.slots())

    def ev(e):
        return e.evaluate(env, field)

    num = [(ev(p.base), p.shift) for p in spec.numerators]
    den = [(ev(p.base), p.shift) for p in spec.denominators]
    kernels = [(ev(k.u), k.step) for k in spec.kernels]
    binomials = [(ev(u), p) for u, p in spec.binomials]
    # zero bases give (0; q)_n = 1 for every integer n
    num = [(x, s) for x, s in num if not field.is_zero(x)]
    den = [(y, t) for y, t in den if not field.is_zero(y)]
    kernels = [(u, m) for u, m in kernels if not field.is_zero(u)]
    binomials = [(u, p) for u, p in binomials if not field.is_zero(u)]
    A, B = spec.quad
    return Resolved(field, num, den, ev(spec.argument), A, B, kernels, binomials, ev(spec.scale))


def resolve_value(expr: PExpr, env: dict) -> QMonomial:
    return expr.evaluate(env, ExactField)


def negative_part(res: Resolved) -> Resolved:
    """The terms k <= -1 of a bilateral sum, reindexed by k = -n-1 (n >= 0)."""
    F = res.field
    q = F.q
    if F.is_zero(res.z):
        raise ValueError("the negative half of a bilateral sum needs a nonzero argument")
    A, B = res.A, res.B
    const = res.scale / res.z * q ** ((A - B) // 2)
    z = 1 / res.z
    A2, B2 = A, 2 * A - B
    num, den, kernels = [], [], []
    for x, s in res.num:
        r = -(q / x)
        den.append((q / x, 1 - s))
        const = const * r ** (1 - s) * q ** ((s * s - s) // 2)
        z = z * r
        A2 += 1
        B2 += 1 - 2 * s
    for y, t in res.den:
        r = -(q / y)
        num.append((q / y, 1 - t))
        const = const / (r ** (1 - t) * q ** ((t * t - t) // 2))
        z = z / r
        A2 -= 1
        B2 -= 1 - 2 * t
    for u, m in res.kernels:
        u1 = u * q ** (-m)
        const = const * -u1
        z = z * q ** (-m)
        kernels.append((1 / u1, m))
    return Resolved(F, num, den, z, A2, B2, kernels, list(res.binomials), const, {"direction": "negative"})


# -- exact analysis -----------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    admissible: bool
    direction: str | None = None
    growth: object = None  # linear order gain per term, or "quadratic"
    terminates_at: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.admissible


def _q_power(x: QMonomial):
    return x.exponent if x.coeff == 1 else None


@dataclass
class _Plan:
    terminate: int | None
    pole: int | None
    admissible: bool
    growth: object
    stable_from: int  # index past which orders increase monotonically
    zero: bool
    reason: str = ""


def _plan(res: Resolved) -> _Plan:
    """Work out where the exact term orders start growing and where the sum stops."""
    if res.scale.is_zero():
        return _Plan(0, None, True, None, 0, True)
    T = None
    for x, s in res.num:
        m = _q_power(x)
        if m is not None and m <= 0:
            idx = max(0, -m + 1 - s)
            T = idx if T is None else min(T, idx)
    P = None
    for y, t in res.den:
        m = _q_power(y)
        if m is not None and m <= 0:
            idx = max(0, -m + 1 - t)
            P = idx if P is None else min(P, idx)
    if res.z.is_zero():
        T = 1 if T is None else min(T, 1)
    K0 = 0
    for x, s in res.num + res.den:
        K0 = max(K0, -s, -x.exponent - s)
    for u, m in res.kernels:
        K0 = max(K0, -(u.exponent // m))
    A, B = res.A, res.B
    if T is not None:
        return _Plan(T, P, True, None, K0, False)
    oz = res.z.exponent
    if A > 0:
        k = K0
        while A * k + (A + B) // 2 + oz <= 0:
            k += 1
        return _Plan(None, P, True, "quadratic", k, False)
    slope = oz + B // 2
    if slope > 0:
        return _Plan(None, P, True, slope, K0, False)
    return _Plan(None, P, False, slope, K0, False, f"term q-order changes by {slope} per step")


def growth_check(spec: SeriesSpec, params: dict) -> Verdict:
    """Decide whether term q-orders diverge in every summation direction."""
    res = resolve(spec, params)
    directions = [("positive", res)]
    if spec.kind == BILATERAL and not res.z.is_zero() and not res.scale.is_zero():
        directions.append(("negative", negative_part(res)))
    growth = []
    term = None
    for name, r in directions:
        plan = _plan(r)
        if not plan.admissible:
            return Verdict(False, name, plan.growth, None, plan.reason)
        growth.append(plan.growth)
        if name == "positive":
            term = plan.terminate
    g = growth[0] if len(growth) == 1 else tuple(growth)
    return Verdict(True, None, g, term)


def _term_bag(res: Resolved, k: int) -> FactorBag:
    bag = FactorBag(res.scale)
    for u, p in res.binomials:
        for _ in range(abs(p)):
            if p > 0:
                bag.mul_binomial(u)
            else:
                bag.div_binomial(u)
    if k:
        if res.z.is_zero():
            if k < 0:
                raise ZeroDivisionError("negative power of a zero argument")
            bag.zero = True
        else:
            bag.mul_mono(res.z**k)
    bag.mul_mono(QMonomial(1, (res.A * k * k + res.B * k) // 2))
    for x, s in res.num:
        bag.mul_poch(x, k + s)
    for y, t in res.den:
        bag.div_poch(y, k + t)
    for u, m in res.kernels:
        bag.mul_binomial(u, m * k)
    return bag


def term(spec: SeriesSpec, params: dict, k: int, N: int) -> LaurentSeries:
    """The raw k-th term (any integer k) through q^N, built from scratch."""
    return _term_bag(resolve(spec, params), k).expand(N)


def _sum_resolved(res: Resolved, N: int, direction: str) -> LaurentSeries:
    plan = _plan(res)
    if plan.zero:
        return LaurentSeries.zero(N)
    if plan.pole is not None and (plan.terminate is None or plan.pole < plan.terminate):
        raise PoleInTerm(f"{direction} direction: denominator vanishes at index {plan.pole}")
    if not plan.admissible:
        raise InadmissibleSeries(f"{direction} direction: {plan.reason}", direction)
    acc: dict = {}
    k = 0
    while plan.terminate is None or k < plan.terminate:
        bag = _term_bag(res, k)
        if bag.zero:
            # a kernel factor vanishes at no more than one index
            pass
        elif bag.exponent <= N:
            for e, v in bag.expand(N).items():
                acc[e] = acc.get(e, 0) + v
        elif plan.terminate is None and k >= plan.stable_from:
            break
        k += 1
    return LaurentSeries({e: v for e, v in acc.items() if v}, N)


def sum_unilateral(spec: SeriesSpec, params: dict, N: int) -> LaurentSeries:
    """Exact sum over k >= 0 through q^N."""
    return _sum_resolved(resolve(spec, params), N, "positive")


def sum_bilateral(spec: SeriesSpec, params: dict, N: int) -> LaurentSeries:
    """Exact sum over all integers k through q^N."""
    res = resolve(spec, params)
    pos = _sum_resolved(res, N, "positive")
    if res.z.is_zero() or res.scale.is_zero():
        return pos
    return pos + _sum_resolved(negative_part(res), N, "negative")


def sum_series(spec: SeriesSpec, params: dict, N: int) -> LaurentSeries:
    if spec.kind == BILATERAL:
        return sum_bilateral(spec, params, N)
    return sum_unilateral(spec, params, N)
