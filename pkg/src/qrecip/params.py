"""Monomial parameter expressions such as ``-a*q/c`` or ``cd/(ab)``.

Series specs are written over these so one description serves both the
exact backend (values are :class:`QMonomial`) and the numeric one (values
are mpmath complex numbers).  Only products, quotients, negation and
integer powers exist; a sum of parameters is not a parameter.

A slot bound to zero means "take the limit as this parameter goes to 0".
Positive powers of such a slot evaluate to zero; negative powers raise
:class:`SingularLimit` unless the series engine pairs them into a scaled
Pochhammer limit first.
"""

from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq

from .errors import SingularLimit
from .series import QMonomial, rational, render_rational


class PExpr:
    __slots__ = ("coeff", "qexp", "powers")

    def __init__(self, coeff=1, qexp: int = 0, powers=()):
        self.coeff = rational(coeff)
        self.qexp = int(qexp)
        items = dict(powers) if not isinstance(powers, dict) else powers
        self.powers = tuple(sorted((k, int(v)) for k, v in items.items() if v))

    @classmethod
    def slot(cls, name: str) -> "PExpr":
        return cls(1, 0, {name: 1})

    # -- algebra ----------------------------------------------------------
    def _combine(self, other: "PExpr", sign: int) -> "PExpr":
        pw = dict(self.powers)
        for k, v in other.powers:
            pw[k] = pw.get(k, 0) + sign * v
        coeff = self.coeff * other.coeff if sign > 0 else self.coeff / other.coeff
        return PExpr(coeff, self.qexp + sign * other.qexp, pw)

    def __mul__(self, other):
        if isinstance(other, PExpr):
            return self._combine(other, 1)
        if isinstance(other, (int, Fraction, type(mpq(0)))):
            return PExpr(self.coeff * rational(other), self.qexp, self.powers)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PExpr):
            return self._combine(other, -1)
        if isinstance(other, (int, Fraction, type(mpq(0)))):
            return PExpr(self.coeff / rational(other), self.qexp, self.powers)
        return NotImplemented

    def __rtruediv__(self, other):
        return PExpr(rational(other)) / self

    def __neg__(self):
        return PExpr(-self.coeff, self.qexp, self.powers)

    def __pow__(self, n: int):
        n = int(n)
        c = self.coeff**n if n >= 0 else 1 / self.coeff ** (-n)
        return PExpr(c, self.qexp * n, {k: v * n for k, v in self.powers})

    def __eq__(self, other):
        if isinstance(other, PExpr):
            return (self.coeff, self.qexp, self.powers) == (other.coeff, other.qexp, other.powers)
        return NotImplemented

    def __hash__(self):
        return hash((self.coeff, self.qexp, self.powers))

    # -- structure --------------------------------------------------------
    def power_of(self, name: str) -> int:
        return dict(self.powers).get(name, 0)

    def slots(self) -> frozenset:
        return frozenset(k for k, _ in self.powers)

    def without(self, names) -> "PExpr":
        return PExpr(self.coeff, self.qexp, {k: v for k, v in self.powers if k not in names})

    def subs(self, mapping: dict) -> "PExpr":
        """Substitute slots by other expressions (monomial composition)."""
        out = PExpr(self.coeff, self.qexp)
        for k, v in self.powers:
            out = out * (mapping[k] ** v if k in mapping else PExpr.slot(k) ** v)
        return out

    def evaluate(self, env: dict, field):
        """Value of the expression with slots from ``env`` in ``field``."""
        val = field.monomial(self.coeff, self.qexp)
        for k, v in self.powers:
            x = env[k]
            if field.is_zero(x):
                if v < 0:
                    raise SingularLimit(f"slot {k} -> 0 appears as {k}^{v} in {self}")
                return field.zero
            val = val * x**v
        return val

    def __repr__(self):
        parts = []
        for k, v in self.powers:
            parts.append(k if v == 1 else f"{k}^{v}")
        if self.qexp:
            parts.append("q" if self.qexp == 1 else f"q^{self.qexp}")
        c = self.coeff
        body = "*".join(parts)
        if not body:
            return render_rational(c)
        if c == 1:
            return body
        if c == -1:
            return "-" + body
        return f"{render_rational(c)}*{body}"


class ExactField:
    """QMonomial arithmetic with q = q^1."""

    zero = QMonomial.zero()
    one = QMonomial(1, 0)
    q = QMonomial(1, 1)

    @staticmethod
    def monomial(coeff, qexp):
        return QMonomial(coeff, qexp)

    @staticmethod
    def is_zero(x) -> bool:
        return x.is_zero()

    @staticmethod
    def coerce(x):
        if isinstance(x, QMonomial):
            return x
        if isinstance(x, str):
            return QMonomial.parse(x)
        return QMonomial(x, 0)


A, B, C, D, E = (PExpr.slot(s) for s in "abcde")
X, Y, Z, W, T = (PExpr.slot(s) for s in "xyzwt")
Q = PExpr(1, 1)
ONE = PExpr(1, 0)
