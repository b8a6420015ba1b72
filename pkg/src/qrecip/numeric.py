"""Arbitrary-precision complex evaluation of the same series specs.

Parameters are mpmath numbers and ``q`` is a complex number with |q| < 1.
Sums run the term recurrence forward and stop once three consecutive
terms are negligible against the running scale; a geometric tail bound is
reported with every sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
from gmpy2 import mpq

from .errors import NoConvergence, NonFinite, PoleInTerm
from .hypergeom import BILATERAL, SeriesSpec, negative_part, resolve
from .qfunctions import is_infinite


@dataclass(frozen=True)
class NumericConfig:
    precision_bits: int = 160
    tol: float = 1e-9
    max_terms: int = 4000
    tail_ratio_cutoff: float = 1.0

    def __post_init__(self):
        if not 0 < self.tol < 1:
            raise ValueError("tol must lie strictly between 0 and 1")
        if self.max_terms < 32:
            raise ValueError("max_terms must be at least 32")
        if self.precision_bits < 53:
            raise ValueError("precision_bits must be at least 53")

    @property
    def stop_threshold(self):
        return min(mpmath.mpf(self.tol) * mpmath.mpf(2) ** -10, mpmath.mpf(2) ** -self.precision_bits)

    @property
    def snap(self):
        return mpmath.mpf(2) ** (-(3 * self.precision_bits) // 4)


DEFAULT_CONFIG = NumericConfig()


def to_complex(x):
    """Coerce ints, rationals, floats, complex numbers and strings to mpc."""
    if isinstance(x, (mpmath.mpc, mpmath.mpf)):
        return mpmath.mpc(x)
    if isinstance(x, (Fraction, type(mpq(0)))):
        return mpmath.mpc(mpmath.mpf(int(x.numerator)) / int(x.denominator))
    if isinstance(x, str):
        s = x.strip().replace(" ", "")
        if "/" in s and "j" not in s:
            p, d = s.split("/", 1)
            return mpmath.mpc(mpmath.mpf(int(p)) / int(d))
        return mpmath.mpc(complex(s)) if "j" in s else mpmath.mpc(mpmath.mpf(s))
    return mpmath.mpc(x)


class NumericField:
    """Complex values with a fixed numeric ``q``."""

    def __init__(self, q):
        self.q = to_complex(q)
        self.zero = mpmath.mpc(0)
        self.one = mpmath.mpc(1)
        if not abs(self.q) < 1 or self.q == 0:
            raise ValueError("the numeric backend needs 0 < |q| < 1")

    def monomial(self, coeff, qexp):
        return to_complex(coeff) * self.q**qexp

    @staticmethod
    def is_zero(x) -> bool:
        return x == 0


def _check(x):
    if not mpmath.isfinite(x):
        raise NonFinite("non-finite value in numeric evaluation")
    return x


def _one_minus(v, snap):
    w = 1 - v
    if abs(w) <= snap * max(1, abs(v)):
        return mpmath.mpc(0)
    return w


def eval_poch_num(a, n, q, cfg: NumericConfig = DEFAULT_CONFIG, step: int = 1):
    """(a; q^step)_n for an integer n (negative allowed) or ``INF``.

    An exactly vanishing factor (within the snapping threshold) yields 0.
    """
    with mpmath.workprec(cfg.precision_bits):
        a, q = to_complex(a), to_complex(q)
        if a == 0 or n == 0:
            return mpmath.mpc(1)
        p = q**step
        if is_infinite(n):
            if step < 1 or not abs(q) < 1:
                raise ValueError("infinite products need |q| < 1 and a positive step")
            eps = mpmath.mpf(2) ** -cfg.precision_bits
            tail_scale = 1 / (1 - abs(p))
            out = mpmath.mpc(1)
            t = a
            j = 0
            while True:
                if abs(t) * tail_scale < eps:
                    break
                out *= _one_minus(t, cfg.snap)
                t *= p
                j += 1
                if j > 10 * cfg.max_terms:
                    raise NoConvergence("infinite product did not settle")
            return _check(out)
        n = int(n)
        if n > 0:
            out = mpmath.mpc(1)
            t = a
            for _ in range(n):
                out *= _one_minus(t, cfg.snap)
                t *= p
            return _check(out)
        m = -n
        inner = eval_poch_num(p / a, m, q, cfg, step)
        if inner == 0:
            raise PoleInTerm("negative-index factorial has a vanishing denominator")
        return _check((-p / a) ** m * p ** (m * (m - 1) // 2) / inner)


@dataclass(frozen=True)
class NumSum:
    value: object
    tail_bound: object
    terms: int


def _terminates(res, cfg) -> bool:
    q = res.field.q
    for x, s in res.num:
        t = x * q**s
        for _ in range(cfg.max_terms):
            if abs(t) < 0.5:
                break
            if _one_minus(t, cfg.snap) == 0:
                return True
            t *= q
    return False


def _hump(res, cfg) -> int:
    """Index past which every Pochhammer and kernel increment is below 1/2."""
    q = res.field.q
    k = 0
    items = [(x * q**s, q) for x, s in res.num + res.den]
    items += [(u, q**m) for u, m in res.kernels]
    for v, r in items:
        j = 0
        while abs(v) >= 0.5 and j < cfg.max_terms:
            v *= r
            j += 1
        k = max(k, j)
    return k


def _sum_resolved_num(res, cfg: NumericConfig) -> NumSum:
    q = res.field.q
    snap = cfg.snap
    if res.scale == 0:
        return NumSum(mpmath.mpc(0), mpmath.mpf(0), 0)
    const = res.scale
    for u, p in res.binomials:
        w = _one_minus(u, snap)
        if w == 0:
            if p < 0:
                raise PoleInTerm("constant factor (1 - u) vanishes in a denominator")
            return NumSum(mpmath.mpc(0), mpmath.mpf(0), 0)
        const *= w**p
    P = mpmath.mpc(1)
    for x, s in res.num:
        P *= eval_poch_num(x, s, q, cfg)
    for y, t in res.den:
        d = eval_poch_num(y, t, q, cfg)
        if d == 0:
            raise PoleInTerm("denominator factorial vanishes at k = 0")
        P /= d
    if res.z == 0:
        val = const * P
        for u, m in res.kernels:
            val *= _one_minus(u, snap)
        return NumSum(_check(val), mpmath.mpf(0), 1)
    A, B = res.A, res.B
    finite = _terminates(res, cfg)
    if not finite:
        if A == 0:
            ratio = abs(res.z) * abs(q) ** (mpmath.mpf(B) / 2)
            if ratio >= cfg.tail_ratio_cutoff:
                raise NoConvergence(f"term ratio tends to {mpmath.nstr(ratio, 8)}")
    k_min = _hump(res, cfg)
    thr = cfg.stop_threshold
    total = mpmath.mpc(0)
    biggest = mpmath.mpf(0)
    small = 0
    mags = []
    k = 0
    while True:
        t = const * P
        for u, m in res.kernels:
            t *= 1 - u * q ** (m * k)
        total += t
        mag = abs(t)
        mags.append(mag)
        biggest = max(biggest, mag)
        if P == 0:
            break
        scale = max(abs(total), biggest)
        if mag <= thr * scale:
            small += 1
            if small >= 3 and k >= k_min:
                break
        else:
            small = 0
        k += 1
        if k >= cfg.max_terms:
            raise NoConvergence(f"no convergence within {cfg.max_terms} terms")
        step = res.z * q ** (A * (k - 1) + (A + B) // 2)
        for x, s in res.num:
            step *= _one_minus(x * q ** (k - 1 + s), snap)
        if step == 0:
            P = mpmath.mpc(0)
            break
        for y, t_ in res.den:
            d = _one_minus(y * q ** (k - 1 + t_), snap)
            if d == 0:
                raise PoleInTerm(f"denominator factor vanishes at k = {k}")
            step /= d
        P *= step
    tail = _tail_bound(mags)
    return NumSum(_check(total), tail, k + 1)


def _tail_bound(mags):
    if len(mags) < 2 or mags[-1] == 0:
        return mpmath.mpf(0)
    ratios = [mags[i] / mags[i - 1] for i in range(max(1, len(mags) - 3), len(mags)) if mags[i - 1]]
    rho = max(ratios) if ratios else mpmath.mpf(1)
    if rho < 1:
        return mags[-1] * rho / (1 - rho)
    return mags[-1] * len(mags)


def numeric_env(params: dict) -> tuple:
    """Split a numeric assignment into (slot values, field)."""
    if "q" not in params:
        raise ValueError("numeric assignments must include q")
    field = NumericField(params["q"])
    env = {}
    for k, v in params.items():
        if k == "q":
            continue
        env[k] = v if isinstance(v, int) and not isinstance(v, bool) else to_complex(v)
    return env, field


def eval_sum_num(spec: SeriesSpec, params: dict, cfg: NumericConfig = DEFAULT_CONFIG) -> NumSum:
    """Numeric value of ``spec``; ``params`` holds the slot values and ``q``."""
    with mpmath.workprec(cfg.precision_bits):
        env, field = numeric_env(params)
        res = resolve(spec, env, field)
        pos = _sum_resolved_num(res, cfg)
        if spec.kind != BILATERAL or res.z == 0 or res.scale == 0:
            return pos
        neg = _sum_resolved_num(negative_part(res), cfg)
        return NumSum(pos.value + neg.value, pos.tail_bound + neg.tail_bound, pos.terms + neg.terms)


def relative_residual(lhs, rhs):
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1)
