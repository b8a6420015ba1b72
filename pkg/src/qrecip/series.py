"""Truncated formal Laurent series in q over the rationals.

A :class:`LaurentSeries` knows its coefficients exactly through ``trunc``
and nothing above it.  Every operation computes the largest order through
which its result is still guaranteed, so order loss is visible to callers
instead of silently producing wrong high coefficients.

Coefficients are :class:`gmpy2.mpq`.  Anything ``rational()`` accepts (int,
Fraction, mpq, ``"p/q"`` strings) may be mixed in.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from gmpy2 import mpq

from .errors import DivisionByZeroSeries, OrderExceeded

Rational = mpq

_ZERO = mpq(0)
_ONE = mpq(1)


def rational(x) -> mpq:
    """Coerce ``x`` to an exact rational."""
    if isinstance(x, str):
        x = x.strip()
        if "/" in x:
            p, d = x.split("/", 1)
            return mpq(int(p), int(d))
        return mpq(Fraction(x))
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction or string")
    return mpq(x)


def render_rational(r) -> str:
    r = mpq(r)
    if r.denominator == 1:
        return str(r.numerator)
    return f"{r.numerator}/{r.denominator}"


class QMonomial:
    """An exact parameter value ``coeff * q**exponent``.

    The zero monomial is stored as ``(0, 0)``.
    """

    __slots__ = ("coeff", "exponent")

    def __init__(self, coeff=1, exponent: int = 0):
        c = rational(coeff)
        self.coeff = c
        self.exponent = int(exponent) if c else 0

    @classmethod
    def zero(cls) -> "QMonomial":
        return cls(0, 0)

    def is_zero(self) -> bool:
        return not self.coeff

    @property
    def order(self) -> int:
        if not self.coeff:
            raise ValueError("the zero monomial has no q-order")
        return self.exponent

    def q_power(self):
        """Return m when this monomial is exactly q**m, else None."""
        if self.coeff == 1:
            return self.exponent
        return None

    def is_square(self) -> bool:
        if not self.coeff or self.exponent % 2:
            return False
        c = self.coeff
        if c < 0:
            return False
        return _is_square_int(c.numerator) and _is_square_int(c.denominator)

    def __mul__(self, other):
        if isinstance(other, QMonomial):
            return QMonomial(self.coeff * other.coeff, self.exponent + other.exponent)
        if isinstance(other, LaurentSeries):
            return other.scale(self)
        return QMonomial(self.coeff * rational(other), self.exponent)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, QMonomial):
            if not other.coeff:
                raise ZeroDivisionError("division by the zero monomial")
            return QMonomial(self.coeff / other.coeff, self.exponent - other.exponent)
        return QMonomial(self.coeff / rational(other), self.exponent)

    def __rtruediv__(self, other):
        return QMonomial(rational(other), 0) / self

    def __neg__(self):
        return QMonomial(-self.coeff, self.exponent)

    def __pow__(self, n: int):
        n = int(n)
        if n < 0:
            if not self.coeff:
                raise ZeroDivisionError("negative power of the zero monomial")
            return QMonomial(1 / self.coeff ** (-n), self.exponent * n)
        return QMonomial(self.coeff**n, self.exponent * n)

    def __eq__(self, other):
        if isinstance(other, QMonomial):
            return self.coeff == other.coeff and self.exponent == other.exponent
        return NotImplemented

    def __hash__(self):
        return hash((self.coeff, self.exponent))

    def render(self) -> str:
        return f"{render_rational(self.coeff)}*q^{self.exponent}"

    __str__ = render

    def __repr__(self):
        return f"QMonomial({render_rational(self.coeff)!r}, {self.exponent})"

    @classmethod
    def parse(cls, text: str) -> "QMonomial":
        """Parse ``r*q^m``, ``r``, ``q^m``, ``-q`` and similar spellings."""
        s = text.replace(" ", "").replace("**", "^")
        m = re.fullmatch(r"([+-]?[0-9/]*)\*?(q(\^\(?([+-]?\d+)\)?)?)?", s)
        if not m or s in ("", "+", "-"):
            raise ValueError(f"cannot parse monomial {text!r}")
        coeff_txt, qpart, _, exp_txt = m.groups()
        if coeff_txt in ("", "+"):
            coeff = _ONE
        elif coeff_txt == "-":
            coeff = -_ONE
        else:
            coeff = rational(coeff_txt)
        exp = 0
        if qpart:
            exp = int(exp_txt) if exp_txt is not None else 1
        return cls(coeff, exp)


def _is_square_int(n: int) -> bool:
    from gmpy2 import is_square

    return bool(is_square(int(n)))


class LaurentSeries:
    """Sparse truncated Laurent series ``sum c_e q^e`` valid for ``e <= trunc``.

    Immutable.  Stored exponents never exceed ``trunc`` and stored
    coefficients are never zero.  ``min_order`` is the lowest stored exponent,
    or ``trunc + 1`` for the zero series.
    """

    __slots__ = ("_c", "trunc")

    def __init__(self, coeffs: Mapping[int, object] | Iterable = (), trunc: int = 0):
        trunc = int(trunc)
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        c = {}
        for e, v in items:
            e = int(e)
            if e > trunc:
                continue
            v = rational(v)
            if v:
                c[e] = c.get(e, _ZERO) + v
                if not c[e]:
                    del c[e]
        self._c = c
        self.trunc = trunc

    @classmethod
    def _raw(cls, c: dict, trunc: int) -> "LaurentSeries":
        s = object.__new__(cls)
        s._c = c
        s.trunc = trunc
        return s

    @classmethod
    def zero(cls, trunc: int) -> "LaurentSeries":
        return cls._raw({}, int(trunc))

    @classmethod
    def one(cls, trunc: int) -> "LaurentSeries":
        return cls._raw({0: _ONE} if trunc >= 0 else {}, int(trunc))

    @classmethod
    def from_dense(cls, coeffs, offset: int, trunc: int) -> "LaurentSeries":
        c = {}
        for i, v in enumerate(coeffs):
            e = offset + i
            if e > trunc:
                break
            if v:
                c[e] = mpq(v)
        return cls._raw(c, trunc)

    # -- inspection -------------------------------------------------------
    @property
    def min_order(self) -> int:
        return min(self._c) if self._c else self.trunc + 1

    @property
    def coeffs(self) -> dict:
        return dict(self._c)

    def items(self) -> Iterator[tuple[int, mpq]]:
        return iter(sorted(self._c.items()))

    def is_zero(self) -> bool:
        """True when every known coefficient vanishes."""
        return not self._c

    def is_monomial(self) -> bool:
        return len(self._c) == 1

    def leading(self) -> QMonomial:
        if not self._c:
            return QMonomial.zero()
        e = min(self._c)
        return QMonomial(self._c[e], e)

    def coeff_through(self, n: int) -> mpq:
        if n > self.trunc:
            raise OrderExceeded(f"coefficient of q^{n} requested; series known through q^{self.trunc}")
        return self._c.get(n, _ZERO)

    __getitem__ = coeff_through

    def is_zero_through(self, n: int) -> bool:
        if n > self.trunc:
            raise OrderExceeded(f"zero test through q^{n}; series known through q^{self.trunc}")
        return all(e > n for e in self._c)

    def first_nonzero_order(self):
        return min(self._c) if self._c else None

    def truncate(self, n: int) -> "LaurentSeries":
        if n > self.trunc:
            raise OrderExceeded(f"cannot extend a series known through q^{self.trunc} to q^{n}")
        return LaurentSeries._raw({e: v for e, v in self._c.items() if e <= n}, n)

    def evaluate(self, q0):
        """Sum the known coefficients at a numeric point (mpmath or exact)."""
        total = 0
        for e, v in self._c.items():
            total += _to_number(v, q0) * q0**e
        return total

    # -- ring operations --------------------------------------------------
    def __add__(self, other):
        other = _coerce(other, self.trunc)
        if other is NotImplemented:
            return other
        trunc = min(self.trunc, other.trunc)
        c = {e: v for e, v in self._c.items() if e <= trunc}
        for e, v in other._c.items():
            if e > trunc:
                continue
            s = c.get(e, _ZERO) + v
            if s:
                c[e] = s
            else:
                c.pop(e, None)
        return LaurentSeries._raw(c, trunc)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries._raw({e: -v for e, v in self._c.items()}, self.trunc)

    def __sub__(self, other):
        other = _coerce(other, self.trunc)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, m) -> "LaurentSeries":
        """Multiply by an exact scalar or monomial; the order budget shifts with it."""
        if isinstance(m, QMonomial):
            r, k = m.coeff, m.exponent
        else:
            r, k = rational(m), 0
        if not r:
            return LaurentSeries.zero(self.trunc + k)
        return LaurentSeries._raw({e + k: v * r for e, v in self._c.items()}, self.trunc + k)

    def __mul__(self, other):
        if isinstance(other, QMonomial) or _is_scalar(other):
            return self.scale(other)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return series_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, QMonomial):
            if other.is_zero():
                raise DivisionByZeroSeries("division by the zero monomial")
            return self.scale(1 / other)
        if _is_scalar(other):
            r = rational(other)
            if not r:
                raise DivisionByZeroSeries("division by zero")
            return self.scale(1 / r)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return series_div(self, other)

    def __rtruediv__(self, other):
        if isinstance(other, QMonomial) or _is_scalar(other):
            num = other if isinstance(other, QMonomial) else QMonomial(other, 0)
            return series_div(make_monomial(num.coeff, num.exponent, self.trunc), self)
        return NotImplemented

    def __pow__(self, n: int):
        n = int(n)
        if n < 0:
            return LaurentSeries.one(self.trunc) / (self ** (-n))
        result = LaurentSeries.one(self.trunc)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, LaurentSeries):
            return self.trunc == other.trunc and self._c == other._c
        return NotImplemented

    def __hash__(self):
        return hash((self.trunc, tuple(sorted(self._c.items()))))

    def __repr__(self):
        if not self._c:
            return f"LaurentSeries(0 + O(q^{self.trunc + 1}))"
        terms = " + ".join(f"{render_rational(v)}*q^{e}" for e, v in self.items())
        return f"LaurentSeries({terms} + O(q^{self.trunc + 1}))"


def _is_scalar(x) -> bool:
    return isinstance(x, (int, Fraction, type(_ZERO))) and not isinstance(x, bool)


def _coerce(x, trunc):
    if isinstance(x, LaurentSeries):
        return x
    if isinstance(x, QMonomial):
        return make_monomial(x.coeff, x.exponent, trunc)
    if _is_scalar(x):
        return make_monomial(x, 0, trunc)
    return NotImplemented


def _to_number(v: mpq, q0):
    import mpmath

    if isinstance(q0, (mpmath.mpf, mpmath.mpc)):
        return mpmath.mpf(int(v.numerator)) / int(v.denominator)
    return v


def make_monomial(r, m: int, N: int) -> LaurentSeries:
    """The series ``r q^m`` known through ``q^N`` (zero series if r == 0)."""
    r = rational(r)
    if not r or m > N:
        return LaurentSeries.zero(N)
    return LaurentSeries._raw({int(m): r}, int(N))


def series_add(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    return a + b


def series_neg(a: LaurentSeries) -> LaurentSeries:
    return -a


def series_mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    va, vb = a.min_order, b.min_order
    trunc = min(va + b.trunc, vb + a.trunc)
    if not a._c or not b._c:
        return LaurentSeries.zero(trunc)
    if len(a._c) > len(b._c):
        a, b = b, a
    bitems = sorted(b._c.items())
    c: dict = {}
    for ea, ca in a._c.items():
        lim = trunc - ea
        for eb, cb in bitems:
            if eb > lim:
                break
            e = ea + eb
            c[e] = c.get(e, _ZERO) + ca * cb
    return LaurentSeries._raw({e: v for e, v in c.items() if v}, trunc)


def unit_inverse(u: LaurentSeries) -> LaurentSeries:
    """Inverse of a power series with nonzero constant term, through ``u.trunc``."""
    n = u.trunc
    c0 = u._c.get(0)
    if not c0 or u.min_order < 0:
        raise ValueError("unit_inverse needs a power series with nonzero constant term")
    inv0 = 1 / c0
    terms = [(e, v * inv0) for e, v in sorted(u._c.items()) if e > 0]
    out = [_ZERO] * (n + 1)
    out[0] = inv0
    for k in range(1, n + 1):
        s = _ZERO
        for e, v in terms:
            if e > k:
                break
            s += v * out[k - e]
        out[k] = -s
    return LaurentSeries.from_dense(out, 0, n)


def series_div(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    """Laurent division: split off ``b``'s leading monomial, invert the unit part."""
    if not b._c:
        raise DivisionByZeroSeries(f"divisor vanishes through q^{b.trunc}")
    lead = b.leading()
    if len(b._c) == 1:
        # unit part is 1 + O(q^{trunc - v + 1})
        return series_mul(a.scale(1 / lead), LaurentSeries.one(b.trunc - lead.exponent))
    unit = b.scale(1 / lead)
    return series_mul(a.scale(1 / lead), unit_inverse(unit))


def expand_units(mul: Iterable[tuple], div: Iterable[tuple], length: int) -> list:
    """Dense coefficients of ``prod(1 - r q^e) / prod(1 - r q^e)`` below ``q^length``.

    Every factor must have ``e >= 1``; constants are the caller's business.
    Runs in O(length) per factor, which is what makes per-term evaluation cheap.
    """
    if length <= 0:
        return []
    c = [_ZERO] * length
    c[0] = _ONE
    deg = 0
    for r, e in mul:
        if e >= length:
            continue
        top = min(length - 1, deg + e)
        for i in range(top, e - 1, -1):
            if c[i - e]:
                c[i] -= r * c[i - e]
        deg = top
    for r, e in div:
        if e >= length:
            continue
        for i in range(e, length):
            if c[i - e]:
                c[i] += r * c[i - e]
    return c


def coeff_through(s: LaurentSeries, n: int) -> mpq:
    return s.coeff_through(n)


def is_zero_through(s: LaurentSeries, n: int) -> bool:
    return s.is_zero_through(n)
