"""Registry of the reciprocity identities and their relatives.

Each :class:`IdentityEntry` has two independent side evaluators (``lhs``,
``rhs``) written against the context protocol of :mod:`qrecip.backends`,
optionally more sides in ``also`` that must agree with ``lhs``.  The named
functions rho (arities 2, 4, 5, several representations) and xi are
exported for direct use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Callable

import mpmath

from .backends import ExactContext, NumericContext
from .errors import ConstraintViolation, OrderExceeded, TerminationRequired, UnknownIdentity
from .hypergeom import (
    BILATERAL,
    BINOM_K1,
    BINOM_K2,
    PENT_MINUS,
    PENT_PLUS,
    Kernel,
    Poch,
    SeriesSpec,
    VWPSpec,
    build_vwp,
)
from .numeric import DEFAULT_CONFIG, NumericConfig, NumericField, relative_residual, to_complex
from .params import ONE, A, B, C, D, E, ExactField, PExpr, Q, T, W, X, Y, Z
from .qfunctions import INF
from .series import LaurentSeries, QMonomial, rational

MONOMIAL = "monomial"
INTEGER = "integer"
EXACT = "exact"
NUMERIC = "numeric"


# -- constraints ---------------------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    """A predicate on an assignment.

    ``exact`` and ``numeric`` are callables ``(env) -> bool`` (numeric ones
    also see ``q`` in the env); ``None`` means the constraint does not apply
    to that backend.  Hard constraints are enforced before evaluation;
    sampler constraints only steer the sampler.
    """

    text: str
    exact: Callable | None = None
    numeric: Callable | None = None
    hard: bool = True

    def check(self, env: dict, backend: str) -> bool:
        fn = self.exact if backend == EXACT else self.numeric
        return True if fn is None else bool(fn(env))


def _ev(expr, env):
    return expr.evaluate(env, ExactField)


def nonzero(name):
    return Constraint(f"{name} != 0", lambda env: not env[name].is_zero(), lambda env: env[name] != 0)


def min_order(expr: PExpr, v: int):
    def ok(env):
        x = _ev(expr, env)
        return not x.is_zero() and x.exponent >= v

    return Constraint(f"order({expr}) >= {v}", ok, None, hard=False)


def perfect_square(expr: PExpr):
    return Constraint(f"{expr} is a perfect square", lambda env: _ev(expr, env).is_square(), None)


def not_one(expr: PExpr):
    return Constraint(
        f"{expr} != 1",
        lambda env: _ev(expr, env) != QMonomial(1, 0),
        lambda env: abs(_num(expr, env) - 1) > mpmath.mpf(2) ** -60,
    )


def excluded_family(expr: PExpr, base: PExpr, label: str):
    """expr differs from base * q^-j for every j >= 0 (sampler-side)."""

    def ok(env):
        x, b = _ev(expr, env), _ev(base, env)
        if x.is_zero() or b.is_zero():
            return True
        r = x / b
        return not (r.coeff == 1 and r.exponent <= 0)

    return Constraint(f"{expr} != {label}", ok, None, hard=False)


def region(text: str, fn: Callable):
    return Constraint(text, None, fn)


def int_range(name, lo, hi):
    return Constraint(f"{lo} <= {name} <= {hi}", lambda env: lo <= env[name] <= hi, lambda env: lo <= env[name] <= hi)


def _num(expr: PExpr, env):
    return expr.evaluate({k: v for k, v in env.items() if k != "q"}, NumericField(env["q"]))


def _abs(expr):
    return lambda env: abs(_num(expr, env))


# -- domain types ----------------------------------------------------------------


@dataclass(frozen=True)
class ParamSlot:
    name: str
    sort: str = MONOMIAL
    constraints: tuple = ()
    exponents: tuple = (0,)
    modulus: tuple = (0.3, 0.9)
    ints: tuple = (0, 8)
    square: bool = False


@dataclass(frozen=True)
class IdentityEntry:
    id: str
    anchor: str
    slots: tuple
    lhs: Callable
    rhs: Callable
    backends: frozenset
    suggested: dict
    also: tuple = ()
    fixed: dict = field(default_factory=dict)
    note: str = ""

    def slot(self, name) -> ParamSlot:
        for s in self.slots:
            if s.name == name:
                return s
        raise KeyError(name)

    def constraints(self):
        for s in self.slots:
            yield from s.constraints

    def sides(self):
        return (self.lhs, self.rhs) + tuple(self.also)


# -- named series ------------------------------------------------------------------


def rho2_spec(a=A, b=B) -> SeriesSpec:
    return SeriesSpec((), (-a * Q,), -a / b, quad=BINOM_K1, binomials=((-1 / b, 1),))


def rho4_spec(rep: str, a=A, b=B, c=C, d=D) -> SeriesSpec:
    if rep == "RepA":
        return SeriesSpec(
            (c, -a * Q / d), (-a * Q, Poch(-c / b, 1)), -d / b, binomials=((-1 / b, 1),)
        )
    if rep == "RepB":
        return SeriesSpec(
            (Poch(-1 / b, 1), -a * Q / c, -a * Q / d),
            (-a * Q, Poch(-c / b, 1), Poch(-d / b, 1)),
            c * d / b,
            quad=BINOM_K2,
            kernels=(Kernel(a * Q / b, 2),),
        )
    if rep == "RepC":
        return SeriesSpec(
            (c, d, c * d / (a * b)),
            (-a * Q, Poch(-c / b, 1), Poch(-d / b, 1)),
            -a / b,
            quad=BINOM_K1,
            kernels=(Kernel(-c * d / b, 2),),
            binomials=((-1 / b, 1),),
        )
    raise ValueError(f"unknown arity-4 representation {rep!r}")


def rho5_spec(rep: str, a=A, b=B, c=C, d=D, e=E) -> SeriesSpec:
    tail_den = (Poch(-c / b, 1), Poch(-d / b, 1), Poch(-e / b, 1), -a * Q)
    arg = c * d * e / (a * b * Q)
    if rep == "Direct":
        return SeriesSpec(
            (Poch(-1 / b, 1), -a * Q / c, -a * Q / d, -a * Q / e),
            tail_den,
            arg,
            kernels=(Kernel(a * Q / b, 2),),
        )
    if rep == "Rho0":
        return SeriesSpec(
            (-Q / b, -a * Q / c, -a * Q / d, -a * Q / e),
            tail_den,
            arg,
            kernels=(Kernel(a * Q / b, 2),),
        )
    if rep == "Terminating":
        return SeriesSpec(
            (c, -a * Q / d, -a * Q / e),
            (-a * Q, -c * Q / b, a * b * Q**2 / (d * e)),
            Q,
            binomials=((-b, 1), (-c / b, -1), (d * e / (a * b * Q), -1)),
            scale=1 / b,
        )
    raise ValueError(f"unknown arity-5 representation {rep!r}")


def xi_spec(form: str, a=A, x=X) -> SeriesSpec:
    if form == "SumForm":
        return SeriesSpec((a,), (), x)
    if form == "BinomForm":
        return SeriesSpec((), (Poch(x, 1),), -a * x, quad=BINOM_K2)
    raise ValueError(f"unknown xi form {form!r}")


def rho_eval(ctx, arity: int, rep: str | None, a=A, b=B, c=C, d=D, e=E):
    if arity == 2:
        return ctx.sum(rho2_spec(a, b))
    if arity == 4:
        return ctx.sum(rho4_spec(rep or "RepA", a, b, c, d))
    if arity == 5:
        rep = rep or "Direct"
        if rep == "Rho0":
            return ctx.prod(bnum=[-1 / b]) * ctx.sum(rho5_spec("Rho0", a, b, c, d, e))
        if rep == "Terminating" and not any(
            ctx.is_terminating(v) for v in (c, -a * Q / d, -a * Q / e)
        ):
            raise TerminationRequired("none of c, -aq/d, -aq/e is of the form q^-m")
        return ctx.sum(rho5_spec(rep, a, b, c, d, e))
    raise ValueError(f"arity must be 2, 4 or 5, not {arity}")


def _vwp(ctx, vwp: VWPSpec) -> SeriesSpec:
    return build_vwp(vwp, ctx.env if ctx.backend == EXACT else None)


# -- side evaluators ----------------------------------------------------------------


def _recip_rhs(ctx, num, den):
    return ctx.prod(num=num, den=den, mono=1 / B, bnum=[B / A])


def recip2_lhs(ctx):
    return ctx.sum(rho2_spec(A, B)) - ctx.sum(rho2_spec(B, A))


def recip2_rhs(ctx):
    return _recip_rhs(ctx, [Q, A * Q / B, B * Q / A], [-A * Q, -B * Q])


def recip4_lhs(ctx, rep="RepA"):
    return ctx.sum(rho4_spec(rep, A, B)) - ctx.sum(rho4_spec(rep, B, A))


def recip4_rhs(ctx):
    return _recip_rhs(
        ctx,
        [Q, A * Q / B, B * Q / A, C, D, C * D / (A * B)],
        [-A * Q, -B * Q, -C / B, -D / B, -C / A, -D / A],
    )


def recip5_lhs(ctx, rep="Direct"):
    return rho_eval(ctx, 5, rep, A, B) - rho_eval(ctx, 5, rep, B, A)


def recip5_rhs(ctx):
    ab = A * B
    return _recip_rhs(
        ctx,
        [Q, A * Q / B, B * Q / A, C, D, E, C * D / ab, C * E / ab, D * E / ab],
        [-A * Q, -B * Q, -C / A, -C / B, -D / A, -D / B, -E / A, -E / B, C * D * E / (ab * Q)],
    )


def bailey_lhs(ctx):
    return ctx.sum(_vwp(ctx, VWPSpec(A, (B, C, D, E), A * A * Q / (B * C * D * E), BILATERAL)))


def bailey_rhs(ctx):
    aq = A * Q
    return ctx.prod(
        num=[Q, aq, Q / A, aq / (B * C), aq / (B * D), aq / (B * E), aq / (C * D), aq / (C * E), aq / (D * E)],
        den=[aq / B, aq / C, aq / D, aq / E, Q / B, Q / C, Q / D, Q / E, A * A * Q / (B * C * D * E)],
    )


def _w(ctx):
    return Q ** (-ctx.i("n"))


def watson_lhs(ctx):
    w = _w(ctx)
    return ctx.sum(_vwp(ctx, VWPSpec(A, (B, C, Y, Z, w), A * A * Q * Q / (B * C * Y * Z * w))))


def watson_rhs(ctx):
    w = _w(ctx)
    aq = A * Q
    front = ctx.prod(
        num=[aq, aq / (Y * Z), aq / (Y * w), aq / (Z * w)],
        den=[aq / Y, aq / Z, aq / w, aq / (Y * Z * w)],
    )
    phi = SeriesSpec((aq / (B * C), Y, Z, w), (Q, aq / B, aq / C, Y * Z * w / A), Q)
    return front * ctx.sum(phi)


def watson_limit_lhs(ctx):
    return ctx.sum(SeriesSpec((B, Y, Z), (Q, C, A * B * Q / C), A * Q / (Y * Z)))


def watson_limit_rhs(ctx):
    front = ctx.prod(num=[A * Q / Y, A * Q / Z], den=[A * Q, A * Q / (Y * Z)])
    tail = SeriesSpec(
        (A, C / B, A * Q / C, Y, Z),
        (Q, A * B * Q / C, C, A * Q / Y, A * Q / Z),
        -A * B * Q / (Y * Z),
        quad=BINOM_K2,
        kernels=(Kernel(A, 2),),
        binomials=((A, -1),),
    )
    return front * ctx.sum(tail)


def watson_zq_lhs(ctx):
    return ctx.sum(SeriesSpec((B, Y), (C, A * B * Q / C), A / Y))


def watson_zq_rhs(ctx):
    tail = SeriesSpec(
        (C / B, A * Q / C, Y),
        (A * B * Q / C, C, A * Q / Y),
        -A * B / Y,
        quad=BINOM_K2,
        kernels=(Kernel(A, 2),),
        binomials=((A / Y, -1),),
    )
    return ctx.sum(tail)


def _rep(rep):
    return lambda ctx: ctx.sum(rho4_spec(rep))


def _rho5_term_d(ctx):
    return -A * Q ** (1 + ctx.i("r"))


def rho5_term_lhs(ctx):
    return rho_eval(ctx, 5, "Direct", A, B, C, _rho5_term_d(ctx), E)


def rho5_term_rhs(ctx):
    return rho_eval(ctx, 5, "Terminating", A, B, C, _rho5_term_d(ctx), E)


def _qb_sum(ctx, top: int, n: int, other: int, body):
    """sum_{k=0}^{top} [n - k, top - k]_q * body(k) with n = top + other."""
    total = ctx.zero()
    for k in range(top + 1):
        total = total + ctx.qbinom(n - k, top - k) * body(k)
    return total


def fin_rs_lhs(ctx):
    r, s = ctx.i("r"), ctx.i("s")

    def first(k):
        return ctx.prod(num=[(C, k), (A * Q ** (-s) / B, k)], den=[(-A * Q, k), (-C * Q / B, k)], mono=Q ** ((s + 1) * k))

    def second(k):
        return ctx.prod(num=[(C, k), (B * Q ** (-r) / A, k)], den=[(-B * Q, k), (-C * Q / A, k)], mono=Q ** ((r + 1) * k))

    pre1 = ctx.prod(mono=1 / B, bnum=[-B], bden=[-C / B])
    pre2 = ctx.prod(mono=1 / A, bnum=[-A], bden=[-C / A])
    return pre1 * _qb_sum(ctx, r, r + s, s, first) - pre2 * _qb_sum(ctx, s, r + s, r, second)


def fin_rs_rhs(ctx):
    r, s = ctx.i("r"), ctx.i("s")
    return ctx.prod(
        num=[(A * Q / B, r), (B * Q / A, s), (C, 1 + r + s)],
        den=[(-A * Q, r), (-B * Q, s), (-C / B, r + 1), (-C / A, s + 1)],
        mono=1 / B,
        bnum=[B / A],
    )


def fin_a_lhs(ctx):
    r, s = ctx.i("r"), ctx.i("s")

    def first(k):
        return ctx.prod(num=[(C, k)], den=[(-A * Q, k)], mono=Q ** ((s + 1) * k))

    def second(k):
        return ctx.prod(num=[(C, k)], den=[(-C * Q / A, k)], mono=(-1 / A) ** k)

    pre = ctx.prod(mono=1 / A, bnum=[-A], bden=[-C / A])
    return _qb_sum(ctx, r, r + s, s, first) - pre * _qb_sum(ctx, s, r + s, r, second)


def fin_a_rhs(ctx):
    r, s = ctx.i("r"), ctx.i("s")
    return ctx.prod(num=[(C, 1 + r + s)], den=[(-A * Q, r), (-C / A, s + 1)], mono=(-1 / A) ** (s + 1))


def fin_c_lhs(ctx):
    r, s = ctx.i("r"), ctx.i("s")
    return _qb_sum(ctx, r, r + s, s, lambda k: ctx.prod(num=[(C, k)], mono=Q ** ((s + 1) * k)))


def fin_c_rhs(ctx):
    r, s = ctx.i("r"), ctx.i("s")
    head = ctx.prod(num=[(1 / C, 1 + s, -1), (C * Q ** (1 + s), r)])
    tail = _qb_sum(ctx, s, r + s, r, lambda k: ctx.prod(num=[(1 / C, k, -1)], mono=Q ** (-k) / C))
    return head + tail


def pfaff_lhs(ctx):
    r, s = ctx.i("r"), ctx.i("s")
    x = ctx.scalar(X)
    u = x / (x - 1)
    return ctx.const(sum(comb(r + s - k, s) * u**k for k in range(r + 1)))


def pfaff_rhs(ctx):
    r, s = ctx.i("r"), ctx.i("s")
    x = ctx.scalar(X)
    head = x ** (r + s + 1) / (x - 1) ** r
    return ctx.const(head + (1 - x) * sum(comb(r + s - k, r) * x**k for k in range(s + 1)))


def gould_lhs(ctx):
    n = ctx.i("n")
    return ctx.const(sum(comb(2 * n - k, n) * 2**k for k in range(n + 1)))


def gould_rhs(ctx):
    return ctx.const(2 ** (2 * ctx.i("n")))


def _sym_side(ctx, a, b):
    m = ctx.i("m")
    spec = SeriesSpec(
        (Q ** (-m), -a * Q / D, -a * Q / E),
        (-a * Q, -(Q ** (1 - m)) / b, A * B * Q**2 / (D * E)),
        Q,
        binomials=((-b, 1), (-b * Q**m, -1)),
    )
    return ctx.sum(spec)


def sym_lhs(ctx):
    return _sym_side(ctx, A, B)


def sym_rhs(ctx):
    return _sym_side(ctx, B, A)


def _rf_gen_side(ctx, a, b):
    spec = SeriesSpec((-a * Q / D, -a * Q / E), (-a * Q, A * B * Q**2 / (D * E)), -b, binomials=((-b, 1),))
    return ctx.sum(spec)


def _rf_sym_side(ctx, a, b):
    return ctx.sum(SeriesSpec((a * Q / D,), (a * Q,), b, binomials=((b, 1),)))


def partial_d_lhs(ctx):
    return ctx.sum(SeriesSpec((-A * Q / D,), (Poch(-A, 1),), D / Q))


def partial_d_rhs(ctx):
    return ctx.prod(bden=[D / Q])


def partial_1_lhs(ctx):
    return ctx.sum(SeriesSpec((), (Poch(-A, 1),), A, quad=BINOM_K2))


def partial_1_rhs(ctx):
    return ctx.const(1)


def _xi_product(ctx):
    return ctx.prod(num=[Q, A * X, Q / (A * X)], den=[X, Q / A])


def xi_recip_lhs(ctx):
    second = SeriesSpec((Q / X,), (), Q / A, scale=Q / (A * X))
    return ctx.sum(xi_spec("SumForm")) - ctx.sum(second)


def xi_bilateral_lhs(ctx):
    spec = xi_spec("BinomForm")
    return ctx.sum(SeriesSpec(spec.numerators, spec.denominators, spec.argument, BILATERAL, spec.quad))


def jackson_lhs(ctx):
    return ctx.sum(SeriesSpec((A, Y), (Q,), X))


def jackson_rhs(ctx):
    front = ctx.prod(num=[X * Y], den=[X])
    return front * ctx.sum(SeriesSpec((Y,), (Q, X * Y), -A * X, quad=BINOM_K2))


def three_term_lhs(ctx):
    first = SeriesSpec((X / T, Y), (Q, X * Y), T * Q)
    second = SeriesSpec((Q / (T * Y), Q / X), (Q, Q**2 / (X * Y)), T * Q)
    mid = ctx.prod(num=[X, Q**2 / (X * Y)], den=[Q / Y, X * Y], mono=Q / (X * Y))
    return ctx.sum(first) - mid * ctx.sum(second)


def three_term_rhs(ctx):
    return ctx.prod(num=[Q, Q / (X * Y)], den=[Q / Y])


def quint2_lhs(ctx):
    first = SeriesSpec((Z,), (Poch(X, 1),), -X * X * Z, quad=PENT_MINUS, kernels=(Kernel(X * Z, 2),))
    second = SeriesSpec(
        (Q / X,),
        (Poch(Q / Z, 1),),
        -(Q**3) / (Z * Z * X),
        quad=PENT_MINUS,
        kernels=(Kernel(Q**2 / (X * Z), 2),),
        scale=Q / (Z * X),
    )
    return ctx.sum(first) - ctx.sum(second)


def quint2_rhs(ctx):
    return ctx.prod(num=[Q, Z * X, Q / (Z * X)], den=[X, Q / Z])


def quint_lhs(ctx):
    return ctx.sum(SeriesSpec((), (), A**3, BILATERAL, PENT_PLUS, kernels=(Kernel(A * A * Q, 2),), scale=-A))


def quint_rhs(ctx):
    return ctx.prod(num=[Q, A, Q / A, (Q * A * A, INF, 2), (Q / (A * A), INF, 2)])


def degen54_lhs(ctx):
    return recip5_lhs(ctx)


def degen52_rhs(ctx):
    return recip2_lhs(ctx)


# -- catalog --------------------------------------------------------------------------



def _excl(*names):
    out = []
    for n in names:
        s = PExpr.slot(n)
        out.append(excluded_family(s, -A, "-a q^-m"))
        out.append(excluded_family(s, -B, "-b q^-n"))
    return tuple(out)


def _m(name, *cons, exponents=(0,), modulus=(0.3, 0.9), square=False):
    return ParamSlot(name, MONOMIAL, (nonzero(name),) + tuple(cons), tuple(exponents), modulus, square=square)


def _i(name, lo, hi):
    return ParamSlot(name, INTEGER, (int_range(name, lo, hi),), ints=(lo, hi))


BOTH = frozenset({EXACT, NUMERIC})
EXACT_ONLY = frozenset({EXACT})


def _s(**kw):
    return {k: str(v) for k, v in kw.items()}


def _build() -> dict:
    entries = []

    def add(*args, **kw):
        entries.append(IdentityEntry(*args, **kw))

    q3 = "0.3"
    add(
        "RECIP2",
        "Ramanujan's two-variable reciprocity theorem",
        (_m("a", exponents=(0, 1)), _m("b", exponents=(0, 1))),
        recip2_lhs,
        recip2_rhs,
        BOTH,
        {
            EXACT: [_s(a=2, b=3), _s(a="-1/2", b="2/3"), _s(a="3*q^1", b="5/7")],
            NUMERIC: [_s(a="0.7", b="0.4", q="0.2"), _s(a="0.5+0.2j", b="-0.6", q=q3)],
        },
    )
    add(
        "RECIP4",
        "four-variable reciprocity theorem (first representation)",
        (
            _m("a"),
            _m("b"),
            _m("c", *_excl("c"), exponents=(0, 1)),
            _m("d", *_excl("d"), region("0 < |d| < |a|, |b|", lambda env: _abs(D)(env) < min(_abs(A)(env), _abs(B)(env))), exponents=(1, 2), modulus=(0.05, 0.3)),
        ),
        recip4_lhs,
        recip4_rhs,
        BOTH,
        {
            EXACT: [_s(a=2, b=3, c="1*q^1", d="1*q^1"), _s(a="-1/2", b="2/3", c="2", d="3*q^1")],
            NUMERIC: [_s(a="0.6", b="0.35", c="0.2", d="0.15", q=q3)],
        },
    )
    add(
        "RECIP5",
        "five-variable reciprocity theorem",
        (
            _m("a"),
            _m("b"),
            _m("c", *_excl("c"), min_order(C, 1), exponents=(1, 2), modulus=(0.1, 0.6)),
            _m("d", *_excl("d"), min_order(D, 1), exponents=(1, 2), modulus=(0.1, 0.6)),
            _m(
                "e",
                *_excl("e"),
                min_order(E, 1),
                region("0 < |cde| < |abq|", lambda env: _abs(C * D * E)(env) < _abs(A * B * Q)(env)),
                exponents=(1, 2),
                modulus=(0.1, 0.6),
            ),
        ),
        recip5_lhs,
        recip5_rhs,
        BOTH,
        {
            EXACT: [_s(a=2, b=3, c="1*q^1", d="1*q^1", e="1*q^1"), _s(a="-1/2", b="2/3", c="2*q^1", d="-3*q^2", e="5/7*q^1")],
            NUMERIC: [_s(a="0.6", b="0.45", c="0.3", d="0.25", e="0.2", q=q3)],
        },
    )
    add(
        "BAILEY_6PSI6",
        "Bailey's very-well-poised 6psi6 summation",
        (
            _m("a", perfect_square(A), exponents=(0, 2), square=True, modulus=(0.3, 0.9)),
            _m("b", exponents=(-1, 0, 1), modulus=(1.2, 2.5)),
            _m("c", exponents=(-1, 0, 1), modulus=(1.2, 2.5)),
            _m("d", exponents=(-1, 0, 1), modulus=(1.2, 2.5)),
            _m(
                "e",
                region("|a^2 q/(bcde)| < 1", lambda env: _abs(A * A * Q / (B * C * D * E))(env) < 1),
                exponents=(-1, 0, 1),
                modulus=(1.2, 2.5),
            ),
        ),
        bailey_lhs,
        bailey_rhs,
        BOTH,
        {
            EXACT: [_s(a="4*q^2", b="-1*q^1", c="-2*q^1", d="-2*q^1", e="-2*q^1")],
            NUMERIC: [_s(a="0.5", b="2.1", c="1.7", d="-1.9", e="2.3", q=q3)],
        },
        note="exact use follows the specialization a -> aq/b, b -> -q/b, c -> -aq/c, ...",
    )
    add(
        "WATSON_8W7",
        "Watson's 8W7 to terminating 4phi3 transformation",
        (
            _m("a", perfect_square(A), not_one(A), exponents=(0, 2), square=True),
            _m("b"),
            _m("c"),
            _m("y"),
            _m("z"),
            _i("n", 0, 6),
        ),
        watson_lhs,
        watson_rhs,
        BOTH,
        {
            EXACT: [_s(a="4/9", b=2, c="-3", y="5/7", z="3", n=3), _s(a="4*q^2", b=1, c="-1/2", y="2/3", z=3, n=2)],
            NUMERIC: [_s(a="0.36", b="1.7", c="-0.8", y="0.9", z="1.3", n=3, q=q3)],
        },
    )
    add(
        "WATSON_LIMIT",
        "limit n -> infinity of Watson's transformation",
        (
            _m("a", not_one(A)),
            _m("b"),
            _m("c"),
            _m("y", modulus=(1.2, 2.5)),
            _m("z", region("|aq/(yz)| < 1", lambda env: _abs(A * Q / (Y * Z))(env) < 1), modulus=(1.2, 2.5)),
        ),
        watson_limit_lhs,
        watson_limit_rhs,
        BOTH,
        {
            EXACT: [_s(a=2, b=3, c="-1/2", y="2/3", z="5/7")],
            NUMERIC: [_s(a="0.4", b="0.7", c="-0.6", y="1.9", z="2.2", q=q3)],
        },
    )
    add(
        "WATSON_ZQ",
        "Watson limit specialised at z = q",
        (
            _m("a", exponents=(1,)),
            _m("b"),
            _m("c"),
            _m(
                "y",
                not_one(A / Y),
                region("max(|a/y|, |ab/y|) < 1", lambda env: max(_abs(A / Y)(env), _abs(A * B / Y)(env)) < 1),
                modulus=(1.2, 2.5),
            ),
        ),
        watson_zq_lhs,
        watson_zq_rhs,
        BOTH,
        {
            EXACT: [_s(a="2*q^1", b=3, c="-1/2", y="2/3")],
            NUMERIC: [_s(a="0.4", b="0.7", c="-0.6", y="1.9", q=q3)],
        },
    )
    add(
        "RHO4_REPS",
        "three representations of the four-variable rho",
        (
            _m("a"),
            _m("b"),
            _m("c", *_excl("c"), exponents=(0, 1)),
            _m("d", *_excl("d"), region("0 < |d| < |b|", lambda env: _abs(D)(env) < _abs(B)(env)), exponents=(1, 2), modulus=(0.05, 0.3)),
        ),
        _rep("RepA"),
        _rep("RepB"),
        BOTH,
        {
            EXACT: [_s(a=2, b=3, c="1*q^1", d="1*q^1")],
            NUMERIC: [_s(a="0.6", b="0.35", c="0.2", d="0.15", q=q3)],
        },
        also=(_rep("RepC"),),
    )
    add(
        "RHO5_TERM",
        "terminating representation of the five-variable rho, d = -a q^(1+r)",
        (
            _m("a"),
            _m("b"),
            _m("c", exponents=(0, 1)),
            _m("e", exponents=(0, 1)),
            _i("r", 0, 5),
        ),
        rho5_term_lhs,
        rho5_term_rhs,
        BOTH,
        {
            EXACT: [_s(a=2, b=3, c="1*q^1", e="1*q^1", r=2)],
            NUMERIC: [_s(a="0.6", b="0.45", c="0.3", e="0.2", r=3, q=q3)],
        },
    )
    add(
        "FIN_RS",
        "finite two-sum identity from the terminating reciprocity",
        (_m("a", exponents=(0, 1)), _m("b", exponents=(0, 1)), _m("c", exponents=(0, 1)), _i("r", 0, 8), _i("s", 0, 8)),
        fin_rs_lhs,
        fin_rs_rhs,
        BOTH,
        {
            EXACT: [_s(a=2, b=3, c="5/7", r=2, s=3)],
            NUMERIC: [_s(a="0.7", b="1.3", c="-0.4", r=2, s=2, q=q3)],
        },
    )
    add(
        "FIN_A",
        "finite identity, b -> infinity case",
        (_m("a", exponents=(0, 1)), _m("c", exponents=(0, 1)), _i("r", 0, 8), _i("s", 0, 8)),
        fin_a_lhs,
        fin_a_rhs,
        BOTH,
        {
            EXACT: [_s(a=2, c="5/7", r=2, s=3)],
            NUMERIC: [_s(a="0.7", c="-0.4", r=2, s=2, q=q3)],
        },
    )
    add(
        "FIN_C",
        "finite identity, a -> 0 case with base 1/q factorials",
        (_m("c", exponents=(0, 1, -1)), _i("r", 0, 8), _i("s", 0, 8)),
        fin_c_lhs,
        fin_c_rhs,
        BOTH,
        {
            EXACT: [_s(c="5/7", r=2, s=3)],
            NUMERIC: [_s(c="-0.4", r=2, s=2, q=q3)],
        },
    )
    add(
        "PFAFF_FIN",
        "finite supplement to the Pfaff transformation",
        (_m("x", not_one(X)), _i("r", 0, 12), _i("s", 0, 12)),
        pfaff_lhs,
        pfaff_rhs,
        BOTH,
        {
            EXACT: [_s(x=5, r=0, s=0), _s(x="5/3", r=3, s=2)],
            NUMERIC: [_s(x="0.4+0.3j", r=3, s=2, q=q3)],
        },
    )
    add(
        "GOULD_181",
        "Gould's binomial sum",
        (_i("n", 0, 12),),
        gould_lhs,
        gould_rhs,
        EXACT_ONLY,
        {EXACT: [_s(n=n) for n in range(13)]},
    )
    add(
        "SYM_QM",
        "symmetric terminating sums with c = q^-m",
        (_m("a"), _m("b"), _m("d", exponents=(0, 1)), _m("e", exponents=(0, 1)), _i("m", 0, 8)),
        sym_lhs,
        sym_rhs,
        BOTH,
        {
            EXACT: [_s(a=2, b=3, d="5/7", e="-1/2", m=3)],
            NUMERIC: [_s(a="0.6", b="0.45", d="0.25", e="0.2", m=3, q=q3)],
        },
    )
    add(
        "RF_GEN",
        "generalised Rogers-Fine symmetry",
        (
            _m("a", region("|a| < 1", lambda env: _abs(A)(env) < 1), exponents=(1, 2)),
            _m("b", region("|b| < 1", lambda env: _abs(B)(env) < 1), exponents=(1, 2)),
            _m("d"),
            _m("e"),
        ),
        lambda ctx: _rf_gen_side(ctx, A, B),
        lambda ctx: _rf_gen_side(ctx, B, A),
        BOTH,
        {
            EXACT: [_s(a="2*q^1", b="3*q^1", d="5/7", e="-1/2")],
            NUMERIC: [_s(a="0.5", b="0.5", d="0.3", e="0.7", q="0.25")],
        },
    )
    add(
        "RF_SYM",
        "Rogers-Fine symmetry",
        (
            _m("a", region("|a| < 1", lambda env: _abs(A)(env) < 1), exponents=(1, 2)),
            _m("b", region("|b| < 1", lambda env: _abs(B)(env) < 1), exponents=(1, 2)),
            _m("d"),
        ),
        lambda ctx: _rf_sym_side(ctx, A, B),
        lambda ctx: _rf_sym_side(ctx, B, A),
        BOTH,
        {
            EXACT: [_s(a="2*q^1", b="3*q^1", d="5/7")],
            NUMERIC: [_s(a="0.5", b="0.3", d="0.7", q=q3)],
        },
    )
    add(
        "PARTIAL_D",
        "partial-fraction sum equal to q/(q-d)",
        (
            _m("a", exponents=(0, 1, 2)),
            _m("d", region("|d| < |q|", lambda env: _abs(D)(env) < abs(to_complex(env["q"]))), exponents=(2, 3), modulus=(0.02, 0.25)),
        ),
        partial_d_lhs,
        partial_d_rhs,
        BOTH,
        {
            EXACT: [_s(a=2, d="2*q^2"), _s(a="1*q^1", d="2*q^2")],
            NUMERIC: [_s(a="0.5", d="0.2", q=q3)],
        },
    )
    add(
        "PARTIAL_1",
        "partial-fraction sum equal to 1",
        (_m("a", exponents=(0, 1, 2)),),
        partial_1_lhs,
        partial_1_rhs,
        BOTH,
        {
            EXACT: [_s(a=2), _s(a="1*q^1"), _s(a="3*q^2")],
            NUMERIC: [_s(a="0.4", q=q3)],
        },
    )
    add(
        "XI_RECIP",
        "reciprocity for xi(a, x)",
        (
            _m("a", region("|q| < |a|", lambda env: _abs(A)(env) > abs(to_complex(env["q"]))), exponents=(0, -1), modulus=(0.5, 0.95)),
            _m("x", region("|x| < 1", lambda env: _abs(X)(env) < 1), exponents=(1, 2)),
        ),
        xi_recip_lhs,
        _xi_product,
        BOTH,
        {
            EXACT: [_s(a=3, x="2*q^1")],
            NUMERIC: [_s(a="0.8", x="0.4", q=q3)],
        },
    )
    add(
        "XI_REPS",
        "two series forms of xi(a, x)",
        (_m("a", exponents=(0, 1, -1)), _m("x", region("|x| < 1", lambda env: _abs(X)(env) < 1), exponents=(1, 2))),
        lambda ctx: ctx.sum(xi_spec("SumForm")),
        lambda ctx: ctx.sum(xi_spec("BinomForm")),
        BOTH,
        {
            EXACT: [_s(a=3, x="1*q^1")],
            NUMERIC: [_s(a="0.8", x="0.4", q=q3)],
        },
    )
    add(
        "XI_BILATERAL",
        "bilateral xi sum and Ramanujan's 1psi1 evaluation",
        (
            _m("a", region("|q| < |a|", lambda env: _abs(A)(env) > abs(to_complex(env["q"]))), exponents=(0, -1), modulus=(0.5, 0.95)),
            _m("x", region("|x| < 1", lambda env: _abs(X)(env) < 1), exponents=(0, 1)),
        ),
        xi_bilateral_lhs,
        _xi_product,
        BOTH,
        {
            EXACT: [_s(a=3, x="2*q^1"), _s(a=2, x="1*q^1")],
            NUMERIC: [_s(a="0.8", x="0.4", q=q3)],
        },
    )
    add(
        "JACKSON",
        "c = 0 case of Jackson's transformation",
        (_m("a", exponents=(0, 1)), _m("x", region("|x| < 1", lambda env: _abs(X)(env) < 1), exponents=(1, 2)), _m("y", exponents=(0, 1))),
        jackson_lhs,
        jackson_rhs,
        BOTH,
        {
            EXACT: [_s(a=2, x="1*q^1", y=3)],
            NUMERIC: [_s(a="0.8", x="0.4", y="0.35", q=q3)],
        },
    )
    add(
        "THREE_TERM",
        "t -> 0 limit of the three-term 2phi1 transformation",
        (_m("x", exponents=(0, 1)), _m("y", exponents=(0, 1))),
        three_term_lhs,
        three_term_rhs,
        BOTH,
        {
            EXACT: [_s(x=2, y=3)],
            NUMERIC: [_s(x="0.7", y="-0.45", q=q3)],
        },
        fixed={"t": 0},
    )
    add(
        "QUINT_2VAR",
        "two-variable quintuple product identity",
        (_m("x", exponents=(1,)), _m("z", exponents=(1,))),
        quint2_lhs,
        quint2_rhs,
        BOTH,
        {
            EXACT: [_s(x="2*q^1", z="3*q^1"), _s(x="-1*q^1", z="1/2*q^1")],
            NUMERIC: [_s(x="0.5", z="0.6", q=q3)],
        },
    )
    add(
        "QUINT",
        "Watson's quintuple product identity",
        (_m("a", exponents=(1,)),),
        quint_lhs,
        quint_rhs,
        BOTH,
        {
            EXACT: [_s(a="2*q^1"), _s(a="-3*q^1"), _s(a="1/2*q^1")],
            NUMERIC: [_s(a="0.8+0.1j", q="0.35")],
        },
    )
    add(
        "DEGEN_5TO4",
        "e -> 0 degeneration of the five-variable reciprocity",
        (
            _m("a"),
            _m("b"),
            _m("c", *_excl("c"), exponents=(0, 1)),
            _m("d", *_excl("d"), region("0 < |d| < |a|, |b|", lambda env: _abs(D)(env) < min(_abs(A)(env), _abs(B)(env))), exponents=(1, 2), modulus=(0.05, 0.3)),
        ),
        degen54_lhs,
        recip4_lhs,
        BOTH,
        {
            EXACT: [_s(a=2, b=3, c="1*q^1", d="1*q^1")],
            NUMERIC: [_s(a="0.6", b="0.35", c="0.2", d="0.15", q=q3)],
        },
        fixed={"e": 0},
    )
    add(
        "DEGEN_5TO2",
        "c, d, e -> 0 degeneration of the five-variable reciprocity",
        (_m("a", exponents=(0, 1)), _m("b", exponents=(0, 1))),
        degen54_lhs,
        degen52_rhs,
        BOTH,
        {
            EXACT: [_s(a=2, b=3), _s(a="-1/2", b="2/3")],
            NUMERIC: [_s(a="0.7", b="0.4", q=q3)],
        },
        fixed={"c": 0, "d": 0, "e": 0},
    )
    return {e.id: e for e in entries}


CATALOG = _build()


def get_entry(identity_id: str) -> IdentityEntry:
    try:
        return CATALOG[identity_id]
    except KeyError:
        raise UnknownIdentity(identity_id) from None


def list_identities() -> list:
    """Catalog listing as plain dictionaries."""
    out = []
    for e in CATALOG.values():
        out.append(
            {
                "id": e.id,
                "anchor": e.anchor,
                "slots": [
                    {"name": s.name, "sort": s.sort, "constraints": [c.text for c in s.constraints]}
                    for s in e.slots
                ],
                "fixed": {k: str(v) for k, v in e.fixed.items()},
                "backends": sorted(e.backends),
                "suggested": {b: len(v) for b, v in e.suggested.items()},
            }
        )
    return out


# -- assignments ------------------------------------------------------------------------


def _exact_value(v):
    if isinstance(v, QMonomial):
        return v
    if isinstance(v, str):
        return QMonomial.parse(v)
    return QMonomial(rational(v), 0)


def coerce_assignment(entry: IdentityEntry, assignment: dict, backend: str) -> dict:
    """Typed slot environment for ``backend``, fixed slots included."""
    env = {}
    names = {s.name for s in entry.slots}
    extra = set(assignment) - names - set(entry.fixed) - ({"q"} if backend == NUMERIC else set())
    if extra:
        raise ConstraintViolation(f"{entry.id} has no slot(s) {sorted(extra)}")
    for s in entry.slots:
        if s.name not in assignment:
            raise ConstraintViolation(f"{entry.id}: slot {s.name} is not assigned")
        v = assignment[s.name]
        if s.sort == INTEGER:
            if isinstance(v, str):
                try:
                    v = int(v)
                except ValueError:
                    raise ConstraintViolation(f"{entry.id}: slot {s.name} must be an integer") from None
            if isinstance(v, bool) or int(v) != v:
                raise ConstraintViolation(f"{entry.id}: slot {s.name} must be an integer")
            env[s.name] = int(v)
        elif backend == EXACT:
            env[s.name] = _exact_value(v)
        else:
            env[s.name] = to_complex(v)
    for k, v in entry.fixed.items():
        env[k] = _exact_value(v) if backend == EXACT else to_complex(v)
    if backend == NUMERIC:
        if "q" not in assignment:
            raise ConstraintViolation("numeric assignments must give q")
        env["q"] = to_complex(assignment["q"])
    return env


def check_constraints(entry: IdentityEntry, env: dict, backend: str, include_sampler=False):
    for c in entry.constraints():
        if not c.hard and not include_sampler:
            continue
        if not c.check(env, backend):
            raise ConstraintViolation(f"{entry.id}: constraint {c.text} fails")


# -- evaluation --------------------------------------------------------------------------

DEFAULT_ORDER = 40
GUARDS = (8, 24, 64)


def run_exact(fns, env: dict, N: int) -> list:
    """Evaluate side functions exactly through q^N, widening the working order if needed."""
    last = None
    for guard in GUARDS:
        ctx = ExactContext(env, N + guard)
        vals = [f(ctx) for f in fns]
        ctx.raise_deferred()
        if all(v.trunc >= N for v in vals):
            return [v.truncate(N) for v in vals]
        last = min(v.trunc for v in vals)
    raise OrderExceeded(f"only known through q^{last} after widening; q^{N} requested")


def run_numeric(fns, env: dict, cfg: NumericConfig) -> tuple:
    with mpmath.workprec(cfg.precision_bits):
        local = {k: v for k, v in env.items() if k != "q"}
        ctx = NumericContext(local, NumericField(env["q"]), cfg)
        vals = [f(ctx) for f in fns]
        return vals, ctx.tail


def _norm_backend(backend):
    b = str(backend).lower()
    if b not in (EXACT, NUMERIC):
        raise ValueError(f"unknown backend {backend!r}")
    return b


def evaluate_sides(identity_id: str, assignment: dict, backend=EXACT, order_or_tol=None, cfg=None):
    """All sides (lhs, rhs, then any extra representations) of an entry."""
    entry = get_entry(identity_id)
    backend = _norm_backend(backend)
    if backend not in entry.backends:
        raise ConstraintViolation(f"{entry.id} does not support the {backend} backend")
    env = coerce_assignment(entry, assignment, backend)
    check_constraints(entry, env, backend)
    if backend == EXACT:
        N = DEFAULT_ORDER if order_or_tol is None else int(order_or_tol)
        return run_exact(entry.sides(), env, N)
    cfg = _numeric_cfg(cfg, order_or_tol)
    vals, _ = run_numeric(entry.sides(), env, cfg)
    return vals


def _numeric_cfg(cfg, tol):
    cfg = cfg or DEFAULT_CONFIG
    if tol is not None and tol != cfg.tol:
        cfg = NumericConfig(cfg.precision_bits, float(tol), cfg.max_terms, cfg.tail_ratio_cutoff)
    return cfg


def evaluate_identity(identity_id: str, assignment: dict, backend=EXACT, order_or_tol=None, cfg=None):
    """(lhs, rhs) of an entry, evaluated independently."""
    vals = evaluate_sides(identity_id, assignment, backend, order_or_tol, cfg)
    return vals[0], vals[1]


def residual(identity_id: str, assignment: dict, backend=EXACT, order_or_tol=None, cfg=None):
    """lhs - rhs: a LaurentSeries (exact) or a complex number (numeric)."""
    lhs, rhs = evaluate_identity(identity_id, assignment, backend, order_or_tol, cfg)
    if _norm_backend(backend) == NUMERIC:
        with mpmath.workprec(_numeric_cfg(cfg, order_or_tol).precision_bits):
            return lhs - rhs
    return lhs - rhs


def residual_num(identity_id: str, assignment: dict, cfg: NumericConfig = DEFAULT_CONFIG):
    """|lhs - rhs| / max(|lhs|, |rhs|, 1) at the numeric point ``assignment``."""
    vals = evaluate_sides(identity_id, assignment, NUMERIC, None, cfg)
    with mpmath.workprec(cfg.precision_bits):
        return max(relative_residual(vals[0], v) for v in vals[1:])


# -- public named functions -------------------------------------------------------------------


_RHO_SLOTS = {2: "ab", 4: "abcd", 5: "abcde"}


def _named_env(params: dict, names: str, backend: str) -> dict:
    env = {}
    for n in names:
        if n not in params:
            raise ConstraintViolation(f"parameter {n} is required")
        v = params[n]
        env[n] = _exact_value(v) if backend == EXACT else to_complex(v)
        if backend == EXACT and env[n].is_zero() and n in "ab":
            raise ConstraintViolation(f"{n} must be nonzero")
    if backend == NUMERIC:
        env["q"] = to_complex(params["q"])
    return env


def _run_named(fn, env, backend, order_or_tol, cfg):
    if backend == EXACT:
        N = DEFAULT_ORDER if order_or_tol is None else int(order_or_tol)
        return run_exact([fn], env, N)[0]
    vals, _ = run_numeric([fn], env, _numeric_cfg(cfg, order_or_tol))
    return vals[0]


def rho(arity: int, representation=None, params=None, backend=EXACT, order_or_tol=None, cfg=None):
    """rho of arity 2, 4 or 5 under a named representation.

    Arity 4 takes ``RepA``, ``RepB`` or ``RepC``; arity 5 takes ``Direct``,
    ``Rho0`` (returned as (1 + 1/b) rho_0, i.e. rho itself) or ``Terminating``.
    Slots that are missing from ``params`` default to the zero limit for the
    trailing parameters only when explicitly given as 0.
    """
    if arity not in _RHO_SLOTS:
        raise ValueError(f"arity must be 2, 4 or 5, not {arity}")
    backend = _norm_backend(backend)
    env = _named_env(params or {}, _RHO_SLOTS[arity], backend)
    return _run_named(lambda ctx: rho_eval(ctx, arity, representation), env, backend, order_or_tol, cfg)


def xi(a, x, representation="SumForm", backend=EXACT, order_or_tol=None, cfg=None, q=None):
    """xi(a, x) = sum_k (a; q)_k x^k in either series form."""
    backend = _norm_backend(backend)
    params = {"a": a, "x": x}
    if backend == NUMERIC:
        params["q"] = q
    env = _named_env(params, "ax", backend)
    return _run_named(lambda ctx: ctx.sum(xi_spec(representation)), env, backend, order_or_tol, cfg)


def rho0(params, backend=EXACT, order_or_tol=None, cfg=None):
    """rho_0(a, b; c, d, e), the five-parameter series with rho = (1 + 1/b) rho_0."""
    backend = _norm_backend(backend)
    env = _named_env(params or {}, "abcde", backend)
    return _run_named(lambda ctx: ctx.sum(rho5_spec("Rho0")), env, backend, order_or_tol, cfg)


def h(params, backend=EXACT, order_or_tol=None, cfg=None):
    """h(a, b; c, d) = rho(a, b; c, d) / (1 + 1/b), summed in its first form."""
    backend = _norm_backend(backend)
    env = _named_env(params or {}, "abcd", backend)
    spec = rho4_spec("RepA")
    spec = SeriesSpec(spec.numerators, spec.denominators, spec.argument)
    return _run_named(lambda ctx: ctx.sum(spec), env, backend, order_or_tol, cfg)


def f(a, d, backend=EXACT, order_or_tol=None, cfg=None, q=None):
    """f(a, d) = sum_k (-aq/d)_k / (-a)_{k+1} (d/q)^k."""
    backend = _norm_backend(backend)
    params = {"a": a, "d": d}
    if backend == NUMERIC:
        params["q"] = q
    env = _named_env(params, "ad", backend)
    return _run_named(partial_d_lhs, env, backend, order_or_tol, cfg)
