"""q-shifted factorials over the exact Laurent-series backend.

``poch(a, n, N)`` is ``(a; q)_n`` known through ``q^N``.  ``n`` is an int
(negative allowed) or :data:`INF`.  A ``step`` argument switches the base
to ``q**step`` so that products such as ``(q a^2; q^2)_inf`` and the
base-``q^-1`` factorials of the finite corollaries share one code path.
"""

from __future__ import annotations

from functools import lru_cache

from gmpy2 import mpq

from .errors import PochInfiniteZero, PoleInTerm
from .series import LaurentSeries, QMonomial, expand_units, make_monomial, rational

INF = float("inf")


def is_infinite(n) -> bool:
    return n == INF


class FactorBag:
    """Accumulates ``monomial * prod(units) / prod(units)`` with exact bookkeeping.

    Each binomial ``1 - x q^j`` with monomial ``x`` is normalised on entry:
    positive q-exponents stay as unit factors, exponent zero folds into the
    constant, negative exponents split off a monomial.  The q-order of the
    accumulated product is therefore known exactly before any expansion.
    """

    __slots__ = ("coeff", "exponent", "mul", "div", "zero", "pole", "infinite")

    def __init__(self, mono: QMonomial | None = None):
        self.coeff = mpq(1) if mono is None else mono.coeff
        self.exponent = 0 if mono is None else mono.exponent
        self.mul: list = []
        self.div: list = []
        self.zero = mono is not None and mono.is_zero()
        self.pole = False
        self.infinite: list = []

    @property
    def order(self) -> int:
        return self.exponent

    def mul_mono(self, m: QMonomial):
        if m.is_zero():
            self.zero = True
            return self
        self.coeff *= m.coeff
        self.exponent += m.exponent
        return self

    def div_mono(self, m: QMonomial):
        if m.is_zero():
            self.pole = True
            return self
        self.coeff /= m.coeff
        self.exponent -= m.exponent
        return self

    def _binomial(self, x: QMonomial, j: int, invert: bool):
        # 1 - r q^e with r, e taken from x * q^j
        r = x.coeff
        if not r:
            return
        e = x.exponent + j
        if e > 0:
            (self.div if invert else self.mul).append((r, e))
        elif e == 0:
            c = 1 - r
            if not c:
                if invert:
                    self.pole = True
                else:
                    self.zero = True
                return
            if invert:
                self.coeff /= c
            else:
                self.coeff *= c
        else:
            # 1 - r q^e = -r q^e (1 - q^{-e} / r)
            if invert:
                self.coeff /= -r
                self.exponent -= e
                self.div.append((1 / r, -e))
            else:
                self.coeff *= -r
                self.exponent += e
                self.mul.append((1 / r, -e))

    def mul_binomial(self, x: QMonomial, j: int = 0):
        self._binomial(x, j, invert=False)
        return self

    def div_binomial(self, x: QMonomial, j: int = 0):
        self._binomial(x, j, invert=True)
        return self

    def mul_poch(self, x: QMonomial, n: int, step: int = 1):
        return self._poch(x, n, step, invert=False)

    def div_poch(self, x: QMonomial, n: int, step: int = 1):
        return self._poch(x, n, step, invert=True)

    def _poch(self, x: QMonomial, n, step: int, invert: bool):
        if x.is_zero() or n == 0:
            return self
        if is_infinite(n):
            if step < 1:
                raise ValueError("infinite products need a positive step")
            self.infinite.append((x, step, invert))
            return self
        if n > 0:
            for j in range(n):
                self._binomial(x, step * j, invert)
            return self
        # (x;p)_{-m} = (-p/x)^m p^{m(m-1)/2} / (p/x;p)_m with p = q^step
        m = -n
        p = QMonomial(1, step)
        pref = (-(p / x)) ** m * QMonomial(1, step * m * (m - 1) // 2)
        if invert:
            self.div_mono(pref)
        else:
            self.mul_mono(pref)
        return self._poch(p / x, m, step, not invert)

    def _open_infinite(self, N: int):
        # factors with nonpositive q-exponent first: they fix the final order
        pending = []
        for x, step, invert in self.infinite:
            j = 0
            while x.exponent + step * j <= 0:
                before = self.zero, self.pole
                self._binomial(x, step * j, invert)
                if (self.zero, self.pole) != before:
                    raise PochInfiniteZero(f"({x.render()}; q^{step})_inf has a vanishing factor")
                j += 1
            pending.append((x, step, invert, j))
        self.infinite = []
        limit = N - self.exponent
        for x, step, invert, j in pending:
            while x.exponent + step * j <= limit:
                self._binomial(x, step * j, invert)
                j += 1

    def expand(self, N: int) -> LaurentSeries:
        if self.infinite:
            self._open_infinite(N)
        if self.pole:
            raise PoleInTerm("a denominator factor vanishes exactly")
        if self.zero or self.exponent > N:
            return LaurentSeries.zero(N)
        dense = expand_units(self.mul, self.div, N - self.exponent + 1)
        c = self.coeff
        return LaurentSeries.from_dense([v * c for v in dense], self.exponent, N)


def _as_monomial(a, N: int):
    """Return ``a`` as an exact QMonomial when it is one to the working order."""
    if isinstance(a, QMonomial):
        return a
    if isinstance(a, LaurentSeries) and a.trunc >= N and len(a.coeffs) <= 1:
        return a.leading()
    return None


def poch(a, n, N: int, step: int = 1) -> LaurentSeries:
    """``(a; q^step)_n`` through ``q^N`` for a series or monomial ``a``."""
    if not is_infinite(n):
        n = int(n)
    m = _as_monomial(a, N)
    if m is not None:
        return FactorBag().mul_poch(m, n, step).expand(N)
    if not isinstance(a, LaurentSeries):
        a = make_monomial(rational(a), 0, N)
    return _poch_series(a, n, N, step)


def _poch_series(a: LaurentSeries, n, N: int, step: int) -> LaurentSeries:
    one = LaurentSeries.one(N)
    if is_infinite(n):
        if step < 1:
            raise ValueError("infinite products need a positive step")
        result = one
        j = 0
        while a.min_order + step * j <= N:
            factor = one - a * make_monomial(1, step * j, N)
            if factor.is_zero():
                raise PochInfiniteZero("infinite product has a vanishing factor")
            result = result * factor
            j += 1
        return result
    if n >= 0:
        result = one
        for j in range(n):
            result = result * (one - a * make_monomial(1, step * j, N))
        return result
    m = -n
    p = make_monomial(1, step, N)
    ratio = p / a
    pref = (-ratio) ** m * make_monomial(1, step * m * (m - 1) // 2, N)
    return pref / _poch_series(ratio, m, N, step)


def poch_multi(bases, n, N: int, step: int = 1) -> LaurentSeries:
    """Compact product ``(a_1, ..., a_m; q)_n``."""
    result = LaurentSeries.one(N)
    for b in bases:
        result = result * poch(b, n, N, step)
    return result


@lru_cache(maxsize=None)
def _gauss_coeffs(n: int, k: int) -> tuple:
    if k < 0 or k > n:
        return ()
    if k == 0 or k == n:
        return (1,)
    # [n, k] = [n-1, k-1] + q^k [n-1, k]
    left = _gauss_coeffs(n - 1, k - 1)
    right = _gauss_coeffs(n - 1, k)
    out = [0] * (k * (n - k) + 1)
    for i, v in enumerate(left):
        out[i] += v
    for i, v in enumerate(right):
        out[i + k] += v
    return tuple(out)


def qbinom(n: int, k: int, N: int | None = None) -> LaurentSeries:
    """Gaussian polynomial ``[n, k]_q``; zero outside ``0 <= k <= n``.

    Without ``N`` the result is known through its own degree.
    """
    coeffs = _gauss_coeffs(int(n), int(k))
    deg = max(len(coeffs) - 1, 0)
    trunc = deg if N is None else N
    return LaurentSeries.from_dense(coeffs, 0, trunc)


def poch_scaled_limit(u, k: int, N: int | None = None) -> LaurentSeries:
    """``lim_{t->0} (u/t; q)_k t^k = (-u)^k q^{k(k-1)/2}``."""
    if isinstance(u, QMonomial):
        if N is None:
            raise ValueError("a monomial argument needs an explicit order N")
        u = make_monomial(u.coeff, u.exponent, N)
    if k == 0:
        return LaurentSeries.one(u.trunc if N is None else N)
    return ((-u) ** k).scale(QMonomial(1, k * (k - 1) // 2))
