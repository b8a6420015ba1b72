"""Evaluation contexts shared by the catalog's side evaluators.

A side evaluator is a function ``f(ctx)`` that builds a value out of
``ctx.prod`` (products of q-shifted factorials, monomials and (1 - u)
factors), ``ctx.sum`` (a :class:`SeriesSpec`), ``ctx.qbinom`` and plain ring
arithmetic.  :class:`ExactContext` returns :class:`LaurentSeries`;
:class:`NumericContext` returns mpmath complex numbers.
"""

from __future__ import annotations

import mpmath
from gmpy2 import mpq

from .errors import InadmissibleSeries, PoleInTerm
from .hypergeom import SeriesSpec, sum_series
from .numeric import DEFAULT_CONFIG, NumericConfig, eval_poch_num, eval_sum_num, to_complex
from .params import ONE, ExactField, PExpr
from .qfunctions import INF, FactorBag, qbinom
from .series import LaurentSeries, QMonomial, make_monomial


def _factor_items(items):
    for it in items:
        if isinstance(it, PExpr):
            yield it, INF, 1
        elif len(it) == 2:
            yield it[0], it[1], 1
        else:
            yield it[0], it[1], it[2]


class ExactContext:
    """Exact evaluation through q^N over the rationals.

    An inadmissible sum is recorded in ``deferred`` and stands in as zero so
    that a pole elsewhere in the same evaluation is reported first; callers
    must call :meth:`raise_deferred` before trusting any value.
    """

    backend = "exact"
    field = ExactField

    def __init__(self, env: dict, N: int):
        self.env = env
        self.N = int(N)
        self.deferred: list = []

    def raise_deferred(self) -> None:
        if self.deferred:
            raise self.deferred[0]

    def v(self, expr: PExpr) -> QMonomial:
        return expr.evaluate(self.env, ExactField)

    def i(self, name: str) -> int:
        return int(self.env[name])

    def is_terminating(self, expr: PExpr) -> bool:
        x = self.v(expr)
        return x.coeff == 1 and x.exponent <= 0

    def prod(self, num=(), den=(), mono: PExpr = ONE, bnum=(), bden=()) -> LaurentSeries:
        bag = FactorBag(self.v(mono))
        for e, n, step in _factor_items(num):
            bag.mul_poch(self.v(e), n, step)
        for e, n, step in _factor_items(den):
            bag.div_poch(self.v(e), n, step)
        for u in bnum:
            bag.mul_binomial(self.v(u))
        for u in bden:
            bag.div_binomial(self.v(u))
        return bag.expand(self.N)

    def sum(self, spec: SeriesSpec) -> LaurentSeries:
        try:
            return sum_series(spec, self.env, self.N)
        except InadmissibleSeries as ex:
            self.deferred.append(ex)
            return LaurentSeries.zero(self.N)

    def qbinom(self, n: int, k: int) -> LaurentSeries:
        return qbinom(n, k, self.N)

    def scalar(self, expr: PExpr):
        x = self.v(expr)
        if x.exponent:
            raise ValueError(f"{expr} must be a q-free constant here")
        return x.coeff

    def const(self, value) -> LaurentSeries:
        return make_monomial(mpq(value), 0, self.N)

    def zero(self) -> LaurentSeries:
        return LaurentSeries.zero(self.N)


class NumericContext:
    """Complex evaluation at a numeric q."""

    backend = "numeric"

    def __init__(self, env: dict, field, cfg: NumericConfig = DEFAULT_CONFIG):
        self.env = env
        self.field = field
        self.cfg = cfg
        self.tail = mpmath.mpf(0)

    def v(self, expr: PExpr):
        return expr.evaluate(self.env, self.field)

    def i(self, name: str) -> int:
        return int(self.env[name])

    def is_terminating(self, expr: PExpr) -> bool:
        x = self.v(expr)
        q = self.field.q
        for _ in range(self.cfg.max_terms):
            if abs(x - 1) <= self.cfg.snap:
                return True
            if abs(x) < 0.5:
                return False
            x *= q
        return False

    def prod(self, num=(), den=(), mono: PExpr = ONE, bnum=(), bden=()):
        q = self.field.q
        out = self.v(mono)
        for e, n, step in _factor_items(num):
            out *= eval_poch_num(self.v(e), n, q, self.cfg, step)
        for u in bnum:
            out *= 1 - self.v(u)
        for e, n, step in _factor_items(den):
            d = eval_poch_num(self.v(e), n, q, self.cfg, step)
            if d == 0:
                raise PoleInTerm(f"denominator factorial of {e} vanishes")
            out /= d
        for u in bden:
            d = 1 - self.v(u)
            if abs(d) <= self.cfg.snap:
                raise PoleInTerm(f"denominator factor 1 - ({u}) vanishes")
            out /= d
        return out

    def sum(self, spec: SeriesSpec):
        env = dict(self.env)
        env["q"] = self.field.q
        res = eval_sum_num(spec, env, self.cfg)
        self.tail += res.tail_bound
        return res.value

    def qbinom(self, n: int, k: int):
        if k < 0 or k > n:
            return mpmath.mpc(0)
        q = self.field.q
        return (
            eval_poch_num(q, n, q, self.cfg)
            / eval_poch_num(q, k, q, self.cfg)
            / eval_poch_num(q, n - k, q, self.cfg)
        )

    def scalar(self, expr: PExpr):
        return self.v(expr)

    def const(self, value):
        return to_complex(value)

    def zero(self):
        return mpmath.mpc(0)
