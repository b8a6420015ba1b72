"""Acceptance criteria 1 to 9, one pass/fail line each.

Under pytest the lines appear in the terminal summary; run this file
directly (``python3 tests/test_acceptance.py``) to print them alone.
"""

import contextlib
import io
import json
import os
import random
import subprocess
import sys
import time
from dataclasses import replace
from math import comb

import mpmath
from gmpy2 import mpq

sys.path.insert(0, os.path.dirname(__file__))

from conftest import ACCEPTANCE, TITLES, record  # noqa: E402
from qrecip import cli  # noqa: E402
from qrecip.catalog import (  # noqa: E402
    CATALOG,
    evaluate_identity,
    evaluate_sides,
    get_entry,
    rho4_spec,
    rho5_spec,
)
from qrecip.errors import QSeriesError  # noqa: E402
from qrecip.harness import SampleConfig, compare_rho, sample_params, verify  # noqa: E402
from qrecip.hypergeom import reduce_limits, term  # noqa: E402
from qrecip.qfunctions import poch, poch_scaled_limit, qbinom  # noqa: E402
from qrecip.series import LaurentSeries, QMonomial, make_monomial  # noqa: E402

Q = QMonomial(1, 1)


def _zero_through(lhs, rhs, N):
    return (lhs - rhs).is_zero_through(N)


def _sides_agree(identity_id, assignment, N):
    vals = evaluate_sides(identity_id, assignment, "exact", N)
    return all(_zero_through(vals[0], v, N) for v in vals[1:])


def _failures(report):
    return [f"{r.id}#{r.sample_index}:{r.verdict}" for r in report.records if r.verdict != "pass"]


# -- 1 ---------------------------------------------------------------------------------


def test_criterion_1_reciprocity_suite():
    start = time.perf_counter()
    report = verify(["RECIP2", "RECIP4", "RECIP5"], SampleConfig(seed=7, count=20, exact_order=40), "exact")
    elapsed = time.perf_counter() - start
    per_id = {}
    for r in report.records:
        if r.verdict == "pass":
            per_id.setdefault(r.id, set()).add(json.dumps(r.assignment, sort_keys=True))
    orders_ok = all(
        QMonomial.parse(r.assignment[s]).exponent >= 1 for r in report.records if r.id == "RECIP5" for s in "cde"
    )
    counts = {i: len(per_id.get(i, ())) for i in ("RECIP2", "RECIP4", "RECIP5")}
    ok = all(c >= 20 for c in counts.values()) and not _failures(report) and orders_ok and elapsed < 60
    record(1, ok, f"distinct passes {counts} through q^40 in {elapsed:.1f}s")
    assert ok, _failures(report)


# -- 2 ---------------------------------------------------------------------------------


def test_criterion_2_representation_suite():
    cfg = SampleConfig(seed=7, count=10, exact_order=40)
    four, five = compare_rho(4, cfg), compare_rho(5, cfg)
    n4 = sum(r.verdict == "pass" for r in four.records)
    n5 = sum(r.verdict == "pass" and r.id.startswith("RHO5") for r in five.records)
    bad = _failures(four) + _failures(five)
    # terminating form with d = -a q^(1+r) forced for each r <= 5
    term_points = [
        {"a": "2", "b": "3", "c": "q", "e": "q"},
        {"a": "-1/2", "b": "2/3", "c": "2*q", "e": "-3*q^2"},
        {"a": "5/7", "b": "-2", "c": "-2/3*q", "e": "3*q"},
    ]
    checked = 0
    for r in range(6):
        for p in term_points:
            if _sides_agree("RHO5_TERM", dict(p, r=str(r)), 40):
                checked += 1
            else:
                bad.append(f"RHO5_TERM r={r} {p}")
    ok = n4 >= 10 and n5 >= 10 and checked == 18 and not bad
    record(2, ok, f"arity 4: {n4} agree, arity 5: {n5} agree, terminating: {checked}/18")
    assert ok, bad


# -- 3 ---------------------------------------------------------------------------------


def _degen_oracle_term(p, k, N):
    """Term k of the five-parameter series with (-aq/e)_k e^k replaced by its limit."""
    a, b, c, d = (p[s] for s in "abcd")
    out = poch(-1 / b, k + 1, N) * poch(-a * Q / c, k, N) * poch(-a * Q / d, k, N)
    out = out * poch_scaled_limit(-a * Q, k, N)
    out = out / (poch(-c / b, k + 1, N) * poch(-d / b, k + 1, N) * poch(-a * Q, k, N))
    z = (c * d / (a * b * Q)) ** k
    kern = LaurentSeries.one(N) - make_monomial((a * Q ** (2 * k + 1) / b).coeff, (a * Q ** (2 * k + 1) / b).exponent, N)
    return out * kern * make_monomial(z.coeff, z.exponent, N)


def test_criterion_3_degeneration_suite():
    N = 30
    cfg = SampleConfig(seed=7, count=5, exact_order=N)
    entry = get_entry("DEGEN_5TO4")
    limit_spec = reduce_limits(rho5_spec("Direct"), {"e"})
    bad = []
    termwise = 0
    for a in sample_params(entry, cfg):
        p = {s: QMonomial.parse(a[s]) for s in "abcd"}
        p["e"] = QMonomial.zero()
        for k in range(13):
            got = term(limit_spec, p, k, N)
            repb = term(rho4_spec("RepB"), p, k, N)
            oracle = _degen_oracle_term(p, k, N)
            n = min(got.trunc, repb.trunc, oracle.trunc)
            if (got - repb).is_zero_through(n) and (got - oracle).is_zero_through(n):
                termwise += 1
            else:
                bad.append(f"term k={k} at {a}")
        lhs4, _ = evaluate_identity("RECIP4", a, "exact", N)
        lhs5, _ = evaluate_identity("DEGEN_5TO4", a, "exact", N)
        if not _zero_through(lhs4, lhs5, N):
            bad.append(f"series at {a}")
    rep54 = verify("DEGEN_5TO4", cfg, "exact")
    rep52 = verify("DEGEN_5TO2", cfg, "exact")
    bad += _failures(rep54) + _failures(rep52)
    # against the product side of the two-parameter theorem wherever that product exists
    against_two = 0
    for a in sample_params(get_entry("DEGEN_5TO2"), SampleConfig(seed=7, count=12, exact_order=N)):
        try:
            _, prod2 = evaluate_identity("RECIP2", a, "exact", N)
        except QSeriesError:
            continue
        deg, _ = evaluate_identity("DEGEN_5TO2", a, "exact", N)
        against_two += 1
        if not _zero_through(prod2, deg, N):
            bad.append(f"5to2 series at {a}")
    ok = not bad and termwise == 13 * len(sample_params(entry, cfg)) and against_two >= 3
    record(3, ok, f"{termwise} termwise matches (k <= 12), series through q^{N}, {against_two} points against the two-parameter products")
    assert ok, bad


# -- 4 ---------------------------------------------------------------------------------

FIN_POINTS = [
    {"a": "2", "b": "3", "c": "5/7"},
    {"a": "-1/2", "b": "2/3", "c": "3"},
    {"a": "2/3", "b": "-3", "c": "-1/2"},
    {"a": "5/7", "b": "2", "c": "-2/3"},
    {"a": "-3", "b": "1/2", "c": "2"},
]
SYM_POINTS = [
    {"a": "2", "b": "3", "d": "5/7", "e": "-1/2"},
    {"a": "-1/2", "b": "2/3", "d": "3", "e": "2"},
    {"a": "2/3", "b": "-3", "d": "-1/2", "e": "5/7"},
    {"a": "5/7", "b": "2", "d": "-2/3", "e": "3"},
    {"a": "-3", "b": "1/2", "d": "2", "e": "-2/3"},
]


def test_criterion_4_finite_identity_suite():
    N = 20
    bad = []
    cases = 0
    for p in FIN_POINTS:
        for r in range(9):
            for s in range(9):
                for ident, slots in (("FIN_RS", "abc"), ("FIN_A", "ac"), ("FIN_C", "c")):
                    a = {k: p[k] for k in slots}
                    a.update(r=str(r), s=str(s))
                    cases += 1
                    if not _sides_agree(ident, a, N):
                        bad.append(f"{ident} {a}")
    for p in SYM_POINTS:
        for m in range(9):
            cases += 1
            if not _sides_agree("SYM_QM", dict(p, m=str(m)), N):
                bad.append(f"SYM_QM {p} m={m}")
    for x in ("-3", "-1/2", "2", "5/3"):
        for r in range(13):
            for s in range(13):
                cases += 1
                if not _sides_agree("PFAFF_FIN", {"x": x, "r": str(r), "s": str(s)}, 0):
                    bad.append(f"PFAFF_FIN x={x} r={r} s={s}")
    for n in range(13):
        cases += 1
        lhs, rhs = evaluate_identity("GOULD_181", {"n": str(n)}, "exact", 0)
        if not (lhs.coeff_through(0) == rhs.coeff_through(0) == 4**n):
            bad.append(f"GOULD_181 n={n}")
    ok = not bad
    record(4, ok, f"{cases} exact finite cases, {len(bad)} failures")
    assert ok, bad[:10]


# -- 5 ---------------------------------------------------------------------------------


def test_criterion_5_product_identity_suite():
    bad = []
    for a in ("2*q", "-3*q", "1/2*q"):
        if not _sides_agree("QUINT", {"a": a}, 50):
            bad.append(f"QUINT a={a}")
    for x, z in (("2*q", "3*q"), ("-q", "1/2*q")):
        if not _sides_agree("QUINT_2VAR", {"x": x, "z": z}, 40):
            bad.append(f"QUINT_2VAR x={x} z={z}")
    rep = verify("XI_BILATERAL", SampleConfig(seed=7, count=5, exact_order=40), "exact")
    n = sum(r.verdict == "pass" for r in rep.records)
    bad += _failures(rep)
    ok = not bad and n >= 5
    record(5, ok, f"QUINT x3 through q^50, QUINT_2VAR x2 through q^40, XI_BILATERAL {n} samples through q^40")
    assert ok, bad


# -- 6 ---------------------------------------------------------------------------------


def test_criterion_6_partial_sum_to_one():
    N = 60
    bad = []
    for a in ("2", "q", "3*q^2"):
        lhs, rhs = evaluate_identity("PARTIAL_1", {"a": a}, "exact", N)
        if not (_zero_through(lhs, LaurentSeries.one(N), N) and _zero_through(rhs, LaurentSeries.one(N), N)):
            bad.append(f"PARTIAL_1 a={a}")
    record(6, not bad, "PARTIAL_1 = 1 through q^60 for a in {2, q, 3q^2}")
    assert not bad, bad


def _partial_d(d):
    N = 40
    dm = QMonomial.parse(d)
    one = LaurentSeries.one(N + 2)
    bad = []
    for a in ("2", "q", "-1/2"):
        try:
            lhs, _ = evaluate_identity("PARTIAL_D", {"a": a, "d": d}, "exact", N)
            # q/(q - d) = 1/(1 - d/q) expanded independently of the catalog
            target = one / (one - make_monomial((dm / Q).coeff, (dm / Q).exponent, N + 2))
            if not _zero_through(lhs, target, N):
                bad.append(f"a={a}: series differs")
        except Exception as ex:
            bad.append(f"a={a}: {type(ex).__name__}")
    return bad


def test_criterion_6_partial_d_two_q_squared():
    bad = _partial_d("2*q^2")
    record(6, not bad, "PARTIAL_D = q/(q-d) through q^40 at d = 2q^2 for 3 values of a")
    assert not bad, bad


def test_criterion_6_partial_d_at_q():
    # at d = q the right side q/(q - d) has a pole and every term of f(a, q) has a nonzero constant term
    bad = _partial_d("q")
    record(6, not bad, "PARTIAL_D at d = q: " + ("holds" if not bad else "undefined, " + "; ".join(bad)))
    assert not bad, bad


# -- 7 ---------------------------------------------------------------------------------

CROSS_POINTS = [
    ("RECIP2", {"a": "2", "b": "3"}),
    ("RECIP2", {"a": "-1/2", "b": "2/3"}),
    ("RECIP4", {"a": "2", "b": "3", "c": "q", "d": "q"}),
    ("RECIP4", {"a": "2", "b": "-3", "c": "2*q", "d": "-q"}),
    ("RECIP5", {"a": "2", "b": "3", "c": "q", "d": "q", "e": "q"}),
    ("RECIP5", {"a": "-2", "b": "3", "c": "2*q", "d": "-q", "e": "1/2*q^2"}),
    ("RECIP5", {"a": "3", "b": "-2", "c": "-q", "d": "2/3*q", "e": "q^2"}),
    ("PARTIAL_1", {"a": "2"}),
    ("QUINT", {"a": "2*q"}),
    ("QUINT_2VAR", {"x": "2*q", "z": "3*q"}),
    ("XI_RECIP", {"a": "3", "x": "2*q"}),
    ("RHO4_REPS", {"a": "2", "b": "3", "c": "q", "d": "q"}),
    ("JACKSON", {"a": "2", "x": "q", "y": "3"}),
    ("XI_BILATERAL", {"a": "3", "x": "2*q"}),
    ("PARTIAL_D", {"a": "2", "d": "2*q^2"}),
]


def test_criterion_7_numeric_suite():
    ids = sorted(i for i, e in CATALOG.items() if "numeric" in e.backends)
    rep = verify(ids, SampleConfig(seed=7, count=10), "numeric")
    bad = _failures(rep)
    per = {}
    for r in rep.records:
        if r.verdict == "pass":
            per.setdefault((r.id, r.assignment["q"]), 0)
            per[(r.id, r.assignment["q"])] += 1
    thin = [f"{i}@{q}" for i in ids for q in ("0.3", "0.35+0.1j") if per.get((i, q), 0) < 5]
    worst = max(float(r.residual_magnitude) for r in rep.records if r.verdict == "pass")
    cross = 0
    with mpmath.workprec(160):
        q0 = mpmath.mpf(1) / 4
        for ident, a in CROSS_POINTS:
            exact = evaluate_sides(ident, a, "exact", 120)
            num = {}
            for k, v in a.items():
                m = QMonomial.parse(v)
                num[k] = mpmath.mpf(int(m.coeff.numerator)) / int(m.coeff.denominator) * q0**m.exponent
            num["q"] = q0
            nvals = evaluate_sides(ident, num, "numeric")
            for e, n in zip(exact, nvals):
                ev = e.evaluate(q0)
                if abs(ev - n) > mpmath.mpf(10) ** -12 * max(abs(n), 1):
                    bad.append(f"cross {ident} {a}")
                    break
            else:
                cross += 1
    ok = not bad and not thin and cross >= 10
    record(7, ok, f"{len(ids)} entries, worst residual {worst:.1e}, cross-backend {cross}/{len(CROSS_POINTS)} within 1e-12")
    assert ok, bad + thin


# -- 8 ---------------------------------------------------------------------------------


def test_criterion_8_primitive_property_suite():
    rng = random.Random(20240801)
    pool = [mpq(-1, 2), mpq(2, 3), mpq(-2, 3), mpq(2), mpq(-2), mpq(3), mpq(-3), mpq(5, 7)]
    N = 16
    cases = failures = 0

    def check(flag):
        nonlocal cases, failures
        cases += 1
        failures += not flag

    def rand_series():
        off = rng.randint(-2, 2)
        cs = [rng.choice(pool + [mpq(0)]) for _ in range(rng.randint(1, 5))]
        cs[0] = cs[0] or mpq(1)
        return LaurentSeries({off + i: c for i, c in enumerate(cs)}, off + len(cs) + rng.randint(0, 5))

    for _ in range(60):
        a = QMonomial(rng.choice(pool), rng.randint(-2, 3))
        n, m = rng.randint(0, 10), rng.randint(0, 8)
        lhs, rhs = poch(a, n + 1, N), poch(a, n, N) * (LaurentSeries.one(N) - make_monomial(a.coeff, a.exponent + n, N))
        check((lhs - rhs).is_zero_through(min(lhs.trunc, rhs.trunc)))
        lhs, rhs = poch(a, n + m, N), poch(a, n, N) * poch(a * Q**n, m, N)
        check((lhs - rhs).is_zero_through(min(lhs.trunc, rhs.trunc)))
        j = rng.randint(1, 7)
        prod = poch(a, -j, N) * poch(a * Q ** (-j), j, N)
        check((prod - LaurentSeries.one(N)).is_zero_through(prod.trunc))
    for _ in range(40):
        n = rng.randint(0, 14)
        k = rng.randint(-1, 15)
        g = qbinom(n, k)
        check(g == qbinom(n, n - k))
        check(sum(v for _, v in g.items()) == (comb(n, k) if 0 <= k <= n else 0))
    for _ in range(40):
        x, y, z = rand_series(), rand_series(), rand_series()

        def eq(u, v):
            return (u - v).is_zero_through(min(u.trunc, v.trunc))

        check(eq((x + y) + z, x + (y + z)) and eq(x + y, y + x))
        check(eq((x * y) * z, x * (y * z)) and eq(x * y, y * x) and eq(x * (y + z), x * y + x * z))
    ok = failures == 0 and cases >= 200
    record(8, ok, f"{cases} randomized cases, {failures} failures")
    assert ok


# -- 9 ---------------------------------------------------------------------------------


def _run_cli(path):
    return subprocess.run(
        [sys.executable, "-m", "qrecip", "verify", "all", "--seed", "7", "--json", str(path)],
        capture_output=True,
        text=True,
        timeout=600,
    )


def _strip_timing(path):
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            rec.pop("wall_time", None)
            out.append(rec)
    return out


def test_criterion_9_harness_determinism(tmp_path=None):
    import tempfile

    base = tmp_path or tempfile.mkdtemp()
    p1, p2 = os.path.join(base, "run1.jsonl"), os.path.join(base, "run2.jsonl")
    r1, r2 = _run_cli(p1), _run_cli(p2)
    same = _strip_timing(p1) == _strip_timing(p2)
    header = _strip_timing(p1)[0]
    covered = set(header["ids"]) == set(CATALOG)
    fails = header["totals"]["fail"]
    contract = r1.returncode == r2.returncode == (1 if fails else 0)
    # an entry made to disagree must flip the exit code
    good = CATALOG["RECIP2"]
    CATALOG["RECIP2"] = replace(good, lhs=lambda ctx: good.lhs(ctx) + ctx.const(1))
    try:
        with contextlib.redirect_stdout(io.StringIO()):
            broken = cli.main(["verify", "RECIP2", "--samples", "1", "--order", "8", "--backend", "exact"])
    finally:
        CATALOG["RECIP2"] = good
    ok = same and covered and contract and broken == 1 and fails == 0
    record(9, ok, f"identical reports: {same}, exit codes {r1.returncode}/{r2.returncode}, broken entry exit {broken}")
    assert ok


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    for t in tests:
        try:
            t()
        except AssertionError:
            pass
    for n in sorted(TITLES):
        if n in ACCEPTANCE:
            passed, detail = ACCEPTANCE[n]
            print(f"criterion {n} ({TITLES[n]}): {'PASS' if passed else 'FAIL'} - {detail}")
    sys.exit(0 if all(p for p, _ in ACCEPTANCE.values()) else 1)
