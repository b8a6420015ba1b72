"""Seeded parameter sampling, batch verification and JSON Lines reports."""

from __future__ import annotations

import hashlib
import json
import platform
import random
import time
from dataclasses import dataclass, field, replace

import gmpy2
import mpmath

from . import __version__
from .catalog import (
    CATALOG,
    EXACT,
    INTEGER,
    NUMERIC,
    ConstraintViolation,
    IdentityEntry,
    check_constraints,
    coerce_assignment,
    get_entry,
    rho_eval,
    run_exact,
    run_numeric,
)
from .errors import NoAdmissibleSample, QSeriesError
from .numeric import DEFAULT_CONFIG, NumericConfig, relative_residual
from .series import LaurentSeries, QMonomial, make_monomial, rational, render_rational

DEFAULT_POOL = ("-1/2", "2/3", "-2/3", "2", "-2", "3", "-3", "5/7", "1/2")
NUMERIC_QS = ("0.3", "0.35+0.1j")
PROBE_ORDER = 6


@dataclass(frozen=True)
class SampleConfig:
    seed: int = 7
    count: int = 5
    exact_order: int = 40
    numeric: NumericConfig = DEFAULT_CONFIG
    coeff_pool: tuple = DEFAULT_POOL
    numeric_qs: tuple = NUMERIC_QS
    attempts_per_sample: int = 40

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.exact_order < 0:
            raise ValueError("exact_order must be nonnegative")
        if not self.coeff_pool:
            raise ValueError("coeff_pool must not be empty")
        object.__setattr__(self, "coeff_pool", tuple(render_rational(rational(c)) for c in self.coeff_pool))

    @classmethod
    def from_dict(cls, data: dict) -> "SampleConfig":
        data = dict(data)
        num = data.pop("numeric", None)
        unknown = set(data) - {"seed", "count", "exact_order", "coeff_pool", "numeric_qs", "attempts_per_sample"}
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        cfg = cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in data.items()})
        if num is not None:
            cfg = replace(cfg, numeric=NumericConfig(**num))
        return cfg

    def to_dict(self) -> dict:
        n = self.numeric
        return {
            "seed": self.seed,
            "count": self.count,
            "exact_order": self.exact_order,
            "numeric": {
                "precision_bits": n.precision_bits,
                "tol": n.tol,
                "max_terms": n.max_terms,
                "tail_ratio_cutoff": n.tail_ratio_cutoff,
            },
            "coeff_pool": list(self.coeff_pool),
            "numeric_qs": list(self.numeric_qs),
        }


def _rng(cfg: SampleConfig, entry_id: str, backend: str) -> random.Random:
    digest = hashlib.sha256(f"{cfg.seed}:{entry_id}:{backend}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _render_num(z) -> str:
    z = complex(z)
    if z.imag == 0:
        return repr(round(z.real, 12))
    return f"{z.real:.12g}{z.imag:+.12g}j"


def render_assignment(assignment: dict) -> dict:
    """Backend-agnostic strings: monomials as r*q^m, integers plainly."""
    out = {}
    for k in sorted(assignment):
        v = assignment[k]
        if isinstance(v, QMonomial):
            out[k] = v.render()
        elif isinstance(v, bool):
            raise TypeError(f"{k} must not be a bool")
        elif isinstance(v, int):
            out[k] = str(v)
        elif isinstance(v, str):
            out[k] = v
        elif isinstance(v, (mpmath.mpc, mpmath.mpf, complex, float)):
            out[k] = _render_num(v)
        else:
            out[k] = render_rational(rational(v))
    return out


def _draw_exact(entry: IdentityEntry, cfg: SampleConfig, rng: random.Random) -> dict:
    out = {}
    for s in entry.slots:
        if s.sort == INTEGER:
            out[s.name] = rng.randint(*s.ints)
            continue
        c = rational(rng.choice(cfg.coeff_pool))
        if s.square:
            c = c * c
        out[s.name] = QMonomial(c, rng.choice(s.exponents))
    return out


def _draw_numeric(entry: IdentityEntry, cfg: SampleConfig, rng: random.Random, index: int) -> dict:
    out = {}
    for s in entry.slots:
        if s.sort == INTEGER:
            out[s.name] = rng.randint(*s.ints)
            continue
        lo, hi = s.modulus
        r = round(rng.uniform(lo, hi), 6)
        if rng.random() < 0.5:
            out[s.name] = str(r if rng.random() < 0.5 else -r)
        else:
            phase = rng.uniform(0, 2 * mpmath.pi)
            z = complex(round(r * float(mpmath.cos(phase)), 6), round(r * float(mpmath.sin(phase)), 6))
            out[s.name] = _render_num(z)
    out["q"] = cfg.numeric_qs[index % len(cfg.numeric_qs)]
    return out


def probe(entry: IdentityEntry, assignment: dict, backend: str, cfg: SampleConfig) -> bool:
    """True when ``assignment`` passes every constraint and all sides evaluate."""
    try:
        env = coerce_assignment(entry, assignment, backend)
        check_constraints(entry, env, backend, include_sampler=True)
        if backend == EXACT:
            run_exact(entry.sides(), env, PROBE_ORDER)
        else:
            run_numeric(entry.sides(), env, cfg.numeric)
    except (QSeriesError, ValueError, ZeroDivisionError):
        return False
    return True


def sample_params(entry: IdentityEntry, cfg: SampleConfig, backend: str = EXACT) -> list:
    """Deterministic admissible assignments for ``entry`` (rendered as strings).

    Draws come from the coefficient pool and the slot's exponent pool
    (exact) or modulus range (numeric), filtered by the constraints and an
    evaluation probe.  Too few admissible draws fall back to the entry's
    suggested assignments; duplicates are dropped, so small parameter
    spaces may yield fewer than ``cfg.count`` assignments.
    """
    rng = _rng(cfg, entry.id, backend)
    seen, out = set(), []
    tries = 0
    budget = cfg.attempts_per_sample * cfg.count
    while len(out) < cfg.count and tries < budget:
        tries += 1
        if backend == EXACT:
            raw = _draw_exact(entry, cfg, rng)
        else:
            raw = _draw_numeric(entry, cfg, rng, len(out))
        rendered = render_assignment(raw)
        key = tuple(sorted(rendered.items()))
        if key in seen:
            continue
        seen.add(key)
        if probe(entry, rendered, backend, cfg):
            out.append(rendered)
    if len(out) < cfg.count:
        for a in entry.suggested.get(backend, []):
            rendered = render_assignment(a)
            key = tuple(sorted(rendered.items()))
            if key not in {tuple(sorted(o.items())) for o in out}:
                out.append(rendered)
            if len(out) >= cfg.count:
                break
    if not out:
        raise NoAdmissibleSample(f"{entry.id}: no admissible {backend} assignment")
    return out


# -- verification -------------------------------------------------------------------------


@dataclass
class Record:
    id: str
    anchor: str
    backend: str
    assignment: dict
    verdict: str
    order_or_tol: object
    seed: int
    sample_index: int
    residual_first_nonzero_order: object = None
    residual_magnitude: object = None
    detail: str = ""
    wall_time: float = 0.0

    def to_json(self) -> dict:
        d = {
            "id": self.id,
            "anchor": self.anchor,
            "backend": self.backend,
            "assignment": self.assignment,
            "verdict": self.verdict,
            "order_or_tol": self.order_or_tol,
            "seed": self.seed,
            "sample_index": self.sample_index,
        }
        if self.backend == NUMERIC:
            d["residual_magnitude"] = self.residual_magnitude
        else:
            d["residual_first_nonzero_order"] = self.residual_first_nonzero_order
        if self.detail:
            d["detail"] = self.detail
        d["wall_time"] = self.wall_time
        return d

    @property
    def failed(self) -> bool:
        return self.verdict == "fail"


@dataclass
class VerificationReport:
    header: dict
    records: list = field(default_factory=list)

    @property
    def totals(self) -> dict:
        t = {"pass": 0, "fail": 0, "skipped": 0}
        for r in self.records:
            t["skipped" if r.verdict.startswith("skipped") else r.verdict] += 1
        return t

    @property
    def exit_code(self) -> int:
        return 1 if any(r.failed for r in self.records) else 0

    def lines(self) -> list:
        head = dict(self.header, totals=self.totals)
        out = [json.dumps(head, sort_keys=True)]
        out += [json.dumps(r.to_json(), sort_keys=True) for r in self.records]
        return out

    def write_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.lines():
                fh.write(line + "\n")

    def summary(self) -> str:
        rows = {}
        for r in self.records:
            key = (r.id, r.backend)
            row = rows.setdefault(key, {"pass": 0, "fail": 0, "skipped": 0})
            row["skipped" if r.verdict.startswith("skipped") else r.verdict] += 1
        width = max([len(k[0]) for k in rows] + [8])
        lines = [f"{'identity':<{width}}  backend  pass  fail  skip"]
        for (i, b), row in sorted(rows.items()):
            lines.append(f"{i:<{width}}  {b:<7}  {row['pass']:>4}  {row['fail']:>4}  {row['skipped']:>4}")
        t = self.totals
        lines.append(f"total: {t['pass']} pass, {t['fail']} fail, {t['skipped']} skipped")
        return "\n".join(lines)


SKIP_ERRORS = (QSeriesError,)


def _check_one(entry: IdentityEntry, assignment: dict, backend: str, cfg: SampleConfig, index: int) -> Record:
    order_or_tol = cfg.exact_order if backend == EXACT else cfg.numeric.tol
    rec = Record(entry.id, entry.anchor, backend, dict(assignment), "pass", order_or_tol, cfg.seed, index)
    start = time.perf_counter()
    try:
        env = coerce_assignment(entry, assignment, backend)
        check_constraints(entry, env, backend)
        if backend == EXACT:
            vals = run_exact(entry.sides(), env, cfg.exact_order)
            diffs = [vals[0] - v for v in vals[1:]]
            orders = [d.first_nonzero_order() for d in diffs if not d.is_zero()]
            if orders:
                rec.verdict = "fail"
                rec.residual_first_nonzero_order = min(orders)
        else:
            vals, _ = run_numeric(entry.sides(), env, cfg.numeric)
            with mpmath.workprec(cfg.numeric.precision_bits):
                mag = max(relative_residual(vals[0], v) for v in vals[1:])
            rec.residual_magnitude = mpmath.nstr(mag, 6, min_fixed=1, max_fixed=0)
            if not mag < cfg.numeric.tol:
                rec.verdict = "fail"
    except ConstraintViolation as ex:
        rec.verdict, rec.detail = "skipped(ConstraintViolation)", str(ex)
    except SKIP_ERRORS as ex:
        rec.verdict, rec.detail = f"skipped({type(ex).__name__})", str(ex)
    except Exception as ex:  # an evaluator bug is a failed check, not a crash
        rec.verdict, rec.detail = "fail", f"{type(ex).__name__}: {ex}"
    rec.wall_time = round(time.perf_counter() - start, 6)
    return rec


def _backends(selector: str) -> tuple:
    sel = selector.lower()
    if sel == "both":
        return (EXACT, NUMERIC)
    if sel in (EXACT, NUMERIC):
        return (sel,)
    raise ValueError(f"backend must be exact, numeric or both, not {selector!r}")


def _ids(ids) -> list:
    if ids == "all" or ids == ["all"]:
        return sorted(CATALOG)
    if isinstance(ids, str):
        ids = [ids]
    for i in ids:
        get_entry(i)
    return sorted(set(ids))


def verify(ids="all", cfg: SampleConfig | None = None, backend: str = "both", forced: dict | None = None) -> VerificationReport:
    """Check every (entry, sample, supported backend) and collect records.

    ``forced`` maps an identity id to extra assignments appended after the
    sampled ones (for example, points that a constraint excludes).
    """
    cfg = cfg or SampleConfig()
    header = {
        "type": "header",
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "backend": backend,
        "versions": {
            "qrecip": __version__,
            "python": platform.python_version(),
            "gmpy2": gmpy2.version(),
            "mpmath": mpmath.__version__,
        },
    }
    records = []
    for i in _ids(ids):
        entry = get_entry(i)
        header.setdefault("ids", []).append(i)
        for b in _backends(backend):
            if b not in entry.backends:
                records.append(
                    Record(entry.id, entry.anchor, b, {}, "skipped(unsupported backend)",
                           None, cfg.seed, 0, detail=f"{entry.id} has no {b} evaluator")
                )
                continue
            samples = sample_params(entry, cfg, b)
            extra = [render_assignment(a) for a in (forced or {}).get(i, [])]
            for idx, a in enumerate(samples + extra):
                records.append(_check_one(entry, a, b, cfg, idx))
    records.sort(key=lambda r: (r.id, r.sample_index, r.backend))
    return VerificationReport(header, records)


# -- coefficient tables ---------------------------------------------------------------------


def coeffs(target: str, assignment: dict | None = None, N: int = 10) -> list:
    """Rows (exponent, lhs, rhs, residual) of exact coefficients through q^N.

    ``target`` is an identity id or a single monomial such as ``3*q^2``;
    only exponents where some column is nonzero are listed.
    """
    if target in CATALOG:
        entry = get_entry(target)
        if EXACT not in entry.backends:
            raise ConstraintViolation(f"{entry.id} has no exact evaluator")
        base = dict(render_assignment(entry.suggested[EXACT][0]))
        base.update(render_assignment(assignment or {}))
        env = coerce_assignment(entry, base, EXACT)
        check_constraints(entry, env, EXACT)
        lhs, rhs = run_exact((entry.lhs, entry.rhs), env, N)
    else:
        m = QMonomial.parse(target)
        lhs = rhs = LaurentSeries.zero(N) if m.is_zero() else _mono_series(m, N)
    res = lhs - rhs
    exps = sorted(set(lhs.coeffs) | set(rhs.coeffs))
    return [
        (e, render_rational(lhs.coeff_through(e)), render_rational(rhs.coeff_through(e)), render_rational(res.coeff_through(e)))
        for e in exps
        if e <= N
    ]


def _mono_series(m: QMonomial, N: int) -> LaurentSeries:
    return make_monomial(m.coeff, m.exponent, N)


def format_coeffs(rows: list) -> str:
    if not rows:
        return "exponent  lhs  rhs  residual\n(no nonzero coefficients)"
    cols = [("exponent", "lhs", "rhs", "residual")] + [(str(e), l, r, d) for e, l, r, d in rows]
    widths = [max(len(c[i]) for c in cols) for i in range(4)]
    return "\n".join("  ".join(c[i].rjust(widths[i]) for i in range(4)) for c in cols)


# -- representation comparison -----------------------------------------------------------------

_REPS = {4: ("RepA", "RepB", "RepC"), 5: ("Direct", "Rho0")}
_REP_SOURCE = {4: "RHO4_REPS", 5: "RECIP5"}


def compare_rho(arity: int, cfg: SampleConfig | None = None) -> VerificationReport:
    """Agreement of the representations of rho through the exact order.

    Arity 5 compares Direct and (1 + 1/b) rho_0 on sampled points and the
    terminating form on the forced family d = -a q^(1+r).
    """
    if arity not in _REPS:
        raise ValueError("compare-rho takes arity 4 or 5")
    cfg = cfg or SampleConfig()
    header = {"type": "header", "seed": cfg.seed, "config": cfg.to_dict(), "arity": arity, "versions": {"qrecip": __version__}}
    records = []
    reps = _REPS[arity]
    sides = [(lambda rep: lambda ctx: rho_eval(ctx, arity, rep))(rep) for rep in reps]
    entry = get_entry(_REP_SOURCE[arity])
    for idx, a in enumerate(sample_params(entry, cfg, EXACT)):
        records.append(_compare_one(f"RHO{arity}:" + "=".join(reps), entry, a, sides, cfg, idx))
    if arity == 5:
        term = get_entry("RHO5_TERM")
        for idx, a in enumerate(sample_params(term, cfg, EXACT)):
            records.append(_check_one(term, a, EXACT, cfg, idx))
    return VerificationReport(header, records)


def _compare_one(label, entry, assignment, sides, cfg, idx) -> Record:
    rec = Record(label, entry.anchor, EXACT, dict(assignment), "pass", cfg.exact_order, cfg.seed, idx)
    start = time.perf_counter()
    try:
        env = coerce_assignment(entry, assignment, EXACT)
        vals = run_exact(sides, env, cfg.exact_order)
        orders = [(vals[0] - v).first_nonzero_order() for v in vals[1:] if not (vals[0] - v).is_zero()]
        if orders:
            rec.verdict, rec.residual_first_nonzero_order = "fail", min(orders)
    except QSeriesError as ex:
        rec.verdict, rec.detail = f"skipped({type(ex).__name__})", str(ex)
    rec.wall_time = round(time.perf_counter() - start, 6)
    return rec


def parse_assign(text: str) -> dict:
    """``a=2*q^1,b=3`` -> {'a': '2*q^1', 'b': '3'}."""
    out = {}
    for part in filter(None, (p.strip() for p in (text or "").split(","))):
        if "=" not in part:
            raise ValueError(f"expected name=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


__all__ = [
    "SampleConfig",
    "VerificationReport",
    "Record",
    "sample_params",
    "verify",
    "coeffs",
    "format_coeffs",
    "compare_rho",
    "render_assignment",
    "parse_assign",
]
