from fractions import Fraction

import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_from, num_poch, num_poch_recip, pmul, poch_dense
from qrecip.catalog import rho4_spec, rho5_spec, xi_spec
from qrecip.errors import InadmissibleSeries, NotAPerfectSquare, PoleInTerm, SingularLimit
from qrecip.hypergeom import (
    BILATERAL,
    BINOM_K2,
    Kernel,
    Poch,
    SeriesSpec,
    VWPSpec,
    build_vwp,
    growth_check,
    negative_part,
    reduce_limits,
    resolve,
    sum_bilateral,
    sum_series,
    sum_unilateral,
    term,
)
from qrecip.numeric import NumericField
from qrecip.params import A, B, C, D, E, ONE, Q, X, Y, PExpr
from qrecip.qfunctions import INF, poch
from qrecip.series import LaurentSeries, QMonomial, make_monomial


def env(**kw):
    return {k: v if isinstance(v, QMonomial) else QMonomial.parse(str(v)) for k, v in kw.items()}


def test_growth_direct_rho5():
    v = growth_check(rho5_spec("Direct"), env(a=2, b=3, c="q", d="q", e="q"))
    assert v.admissible and v.growth == 2


def test_growth_direct_rho5_constants_inadmissible():
    v = growth_check(rho5_spec("Direct"), env(a=2, b=3, c=5, d=7, e=11))
    assert not v.admissible and v.direction == "positive"


def test_growth_quadratic_beats_linear():
    v = growth_check(rho4_spec("RepC"), env(a=2, b=3, c=5, d=7))
    assert v.admissible and v.growth == "quadratic"


def test_growth_bilateral_reports_direction():
    spec = SeriesSpec((), (), X, BILATERAL)
    v = growth_check(spec, env(x="q"))
    assert not v.admissible and v.direction == "negative"


def test_partial_sum_to_one():
    spec = SeriesSpec((), (Poch(-A, 1),), A, quad=BINOM_K2)
    assert sum_unilateral(spec, env(a=2), 30) == LaurentSeries.one(30)


def test_zero_argument_leaves_first_term():
    spec = SeriesSpec((A,), (B,), PExpr(0))
    assert sum_unilateral(spec, env(a=2, b=3), 10) == LaurentSeries.one(10)
    bil = SeriesSpec((A,), (B,), PExpr(0), BILATERAL)
    assert sum_bilateral(bil, env(a=2, b=3), 10) == LaurentSeries.one(10)


def test_xi_against_termwise_oracle():
    N = 5
    got = sum_unilateral(xi_spec("SumForm"), env(a=2, x="q"), N)
    ref = [Fraction(0)] * (N + 1)
    for k in range(N + 1):
        t = pmul(poch_dense(2, 0, k, N + 1), [0] * k + [1] + [0] * N, N + 1)
        ref = [x + y for x, y in zip(ref, t)]
    assert dense_from(got, N + 1) == ref


def test_bilateral_psi_against_product():
    N = 30
    spec = SeriesSpec((), (Poch(X, 1),), -A * X, BILATERAL, BINOM_K2)
    p = env(a=2, x="q")
    lhs = sum_bilateral(spec, p, N)
    q, a = QMonomial(1, 1), QMonomial(2, 0)
    rhs = (poch(q, INF, N) * poch(a * q, INF, N) * poch(q / (a * q), INF, N)) / (
        poch(q, INF, N) * poch(q / a, INF, N)
    )
    assert (lhs - rhs).is_zero_through(N)


def _raw_term(res, k, q):
    """Term k of a numeric Resolved straight from the definitions."""
    t = res.scale
    for u, p in res.binomials:
        t *= (1 - u) ** p
    for x, s in res.num:
        t *= num_poch(x, k + s, q)
    for y, s in res.den:
        t *= num_poch_recip(y, k + s, q)
    for u, m in res.kernels:
        t *= 1 - u * q ** (m * k)
    return t * res.z**k * q ** ((res.A * k * k + res.B * k) // 2)


def test_bilateral_negative_terms_vanish():
    # 1/(q;q)_{k+1} kills every k <= -2; oracle sums raw terms numerically
    spec = SeriesSpec((), (Poch(X, 1),), -A * X, BILATERAL, BINOM_K2)
    p = env(a=2, x="q")
    with mpmath.workprec(200):
        q0 = mpmath.mpf(1) / 5
        res = resolve(spec, {"a": mpmath.mpf(2), "x": q0}, NumericField(q0))
        for k in range(-10, -1):
            assert abs(_raw_term(res, k, q0)) < mpmath.mpf(10) ** -50
        total = sum(_raw_term(res, k, q0) for k in range(-10, 60))
        exact = sum_bilateral(spec, p, 120)
        assert abs(exact.evaluate(q0) - total) < mpmath.mpf(10) ** -40
    for k in range(-6, -1):
        assert term(spec, p, k, 20).is_zero()


def test_bilateral_with_empty_negative_half_equals_unilateral():
    uni = SeriesSpec((), (Poch(Q, 0),), A, quad=BINOM_K2)
    bil = SeriesSpec((), (Poch(Q, 0),), A, BILATERAL, BINOM_K2)
    p = env(a=3)
    assert sum_bilateral(bil, p, 30) == sum_unilateral(uni, p, 30)


@pytest.mark.parametrize("q_str", ["1/7"])
def test_reindexing_is_an_involution(q_str):
    spec = SeriesSpec((A, Poch(C, 1)), (Poch(B, -1), D), X, BILATERAL, (1, 1), kernels=(Kernel(Y, 2),))
    with mpmath.workprec(200):
        q0 = mpmath.mpf(1) / 7
        vals = {"a": mpmath.mpf(2), "b": mpmath.mpf(3), "c": mpmath.mpf(5), "d": mpmath.mpf(-7), "x": mpmath.mpf(1) / 3, "y": mpmath.mpf(11)}
        res = resolve(spec, vals, NumericField(q0))
        neg = negative_part(res)
        back = negative_part(neg)
        for k in range(-6, 0):
            orig = _raw_term(res, k, q0)
            assert abs(_raw_term(neg, -k - 1, q0) - orig) <= abs(orig) * mpmath.mpf(10) ** -45
            assert abs(_raw_term(back, k, q0) - orig) <= abs(orig) * mpmath.mpf(10) ** -45


def test_terms_match_scratch_construction():
    spec = rho5_spec("Direct")
    p = env(a=2, b=3, c="q", d="-2*q", e="1/2*q")
    a, b, c, d, e = (p[s] for s in "abcde")
    q = QMonomial(1, 1)
    N = 25
    for k in range(11):
        one = LaurentSeries.one(N)
        ref = (one - make_monomial((a * q ** (2 * k + 1) / b).coeff, (a * q ** (2 * k + 1) / b).exponent, N))
        ref = ref * poch(-1 / b, k + 1, N)
        for x in (-a * q / c, -a * q / d, -a * q / e):
            ref = ref * poch(x, k, N)
        for y in (-c / b, -d / b, -e / b):
            ref = ref / poch(y, k + 1, N)
        ref = ref / poch(-a * q, k, N)
        z = (c * d * e / (a * b * q)) ** k
        ref = ref * make_monomial(z.coeff, z.exponent, N)
        got = term(spec, p, k, N)
        assert (got - ref).is_zero_through(min(got.trunc, ref.trunc))


def test_refinement_stability():
    spec = rho4_spec("RepB")
    p = env(a=2, b=3, c="q", d="q")
    small, big = sum_series(spec, p, 20), sum_series(spec, p, 35)
    assert small == big.truncate(20)


def test_pole_detection():
    spec = SeriesSpec((A,), (B,), X)
    with pytest.raises(PoleInTerm):
        sum_unilateral(spec, env(a=2, b="q^-3", x="q"), 20)
    # a terminating numerator before the pole is harmless
    assert not sum_unilateral(spec, env(a="q^-1", b="q^-3", x="q"), 20).is_zero()


def test_inadmissible_raises():
    with pytest.raises(InadmissibleSeries) as info:
        sum_unilateral(SeriesSpec((A,), (), X), env(a=2, x=3), 10)
    assert info.value.direction == "positive"


def test_vwp_examples():
    # 8W7(aq/b; -q/b, -aq/c, -aq/d, -aq/e; q) with a = 4q, b = 1: head 4q^2
    vwp = VWPSpec(A * Q / B, (-Q / B, -A * Q / C, -A * Q / D, -A * Q / E, Q), Q)
    spec = build_vwp(vwp, env(a="4*q", b=1, c="q", d="q", e="q"))
    assert spec.kernels[0].u == A * Q / B
    nine = build_vwp(VWPSpec(PExpr(9, 2), (X,), Q))
    assert nine.kernels == (Kernel(PExpr(9, 2), 2),)
    assert nine.binomials == ((PExpr(9, 2), -1),)
    with pytest.raises(NotAPerfectSquare):
        build_vwp(VWPSpec(PExpr(2, 1), (X,), Q))
    with pytest.raises(NotAPerfectSquare):
        build_vwp(VWPSpec(A, (X,), Q), env(a="2*q"))


def test_vwp_kernel_equals_square_root_pairs():
    # (q sqrt a, -q sqrt a)_k / (sqrt a, -sqrt a)_k = (1 - a q^2k)/(1 - a) with sqrt a = 3q
    N = 25
    sa = QMonomial(3, 1)
    q = QMonomial(1, 1)
    for k in range(6):
        pairs = poch(q * sa, k, N) * poch(-q * sa, k, N) / (poch(sa, k, N) * poch(-sa, k, N))
        spec = build_vwp(VWPSpec(PExpr(9, 2), (), ONE * 0))
        one = LaurentSeries.one(N)
        kern = (one - make_monomial(9, 2 + 2 * k, N)) / (one - make_monomial(9, 2, N))
        assert (pairs - kern).is_zero_through(N)
        assert spec.kernels[0].step == 2


def test_zero_slot_limit_rule():
    spec = SeriesSpec((-A * Q / E,), (), C * E / B)
    reduced = reduce_limits(spec, {"e"})
    assert reduced.numerators == () and reduced.quad == (1, -1)
    assert reduced.argument == A * C * Q / B
    with pytest.raises(SingularLimit):
        reduce_limits(SeriesSpec((-A * Q / E,), (), C / B), {"e"})


def test_spec_validation():
    with pytest.raises(ValueError):
        SeriesSpec((), (), X, quad=(1, 0))
    with pytest.raises(ValueError):
        SeriesSpec((), (), X, kernels=(Kernel(A, 0),))
    with pytest.raises(ValueError):
        SeriesSpec((), (), X, kind="sideways")


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(["2", "-1/2", "2/3", "3", "5/7"]),
    st.sampled_from(["2", "-1/2", "2/3", "-3", "5/7"]),
    st.integers(1, 2),
)
def test_refinement_never_changes_known_coefficients(a, b, ez):
    spec = SeriesSpec((A,), (Poch(B, 1),), X)
    p = env(a=a, b=b, x=f"{b}*q^{ez}")
    small, big = sum_series(spec, p, 12), sum_series(spec, p, 24)
    assert small == big.truncate(12)


def test_sum_coefficients_are_rationals():
    s = sum_series(rho4_spec("RepA"), env(a=2, b=3, c="q", d="q"), 6)
    assert all(isinstance(v, type(mpq(1))) for _, v in s.items())
