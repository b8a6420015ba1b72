"""Command-line interface: ``qrecip list|verify|coeffs|compare-rho``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .catalog import list_identities
from .errors import QSeriesError
from .harness import SampleConfig, coeffs, compare_rho, format_coeffs, parse_assign, verify
from .numeric import NumericConfig


def _config(args) -> SampleConfig:
    cfg = SampleConfig()
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = SampleConfig.from_dict(json.load(fh))
    over = {}
    if getattr(args, "seed", None) is not None:
        over["seed"] = args.seed
    if getattr(args, "samples", None) is not None:
        over["count"] = args.samples
    if getattr(args, "order", None) is not None:
        over["exact_order"] = args.order
    if getattr(args, "tol", None) is not None:
        n = cfg.numeric
        over["numeric"] = NumericConfig(n.precision_bits, args.tol, n.max_terms, n.tail_ratio_cutoff)
    return replace(cfg, **over) if over else cfg


def _cmd_list(args) -> int:
    rows = list_identities()
    if args.json:
        print(json.dumps(rows, indent=2, sort_keys=True))
        return 0
    for r in rows:
        slots = ", ".join(s["name"] for s in r["slots"])
        print(f"{r['id']:<14} [{'/'.join(r['backends'])}] ({slots})  {r['anchor']}")
    return 0


def _cmd_verify(args) -> int:
    cfg = _config(args)
    ids = "all" if args.id == "all" else [args.id]
    report = verify(ids, cfg, args.backend)
    if args.json:
        report.write_jsonl(args.json)
    print(report.summary())
    return report.exit_code


def _cmd_coeffs(args) -> int:
    rows = coeffs(args.id, parse_assign(args.assign), args.order)
    print(format_coeffs(rows))
    return 0


def _cmd_compare(args) -> int:
    cfg = _config(args)
    report = compare_rho(args.arity, cfg)
    if args.json:
        report.write_jsonl(args.json)
    print(report.summary())
    return report.exit_code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qrecip", description="Verify q-series reciprocity identities.")
    p.add_argument("--config", help="JSON file with sampling settings; flags override it")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("list", help="print the identity catalog")
    s.add_argument("--json", action="store_true", help="machine-readable listing")
    s.set_defaults(func=_cmd_list)

    s = sub.add_parser("verify", help="check identities on seeded samples")
    s.add_argument("id", help="identity id or 'all'")
    s.add_argument("--backend", choices=("exact", "numeric", "both"), default="both")
    s.add_argument("--order", type=int)
    s.add_argument("--tol", type=float)
    s.add_argument("--samples", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--json", metavar="PATH", help="write a JSON Lines report")
    s.set_defaults(func=_cmd_verify)

    s = sub.add_parser("coeffs", help="coefficient table of both sides")
    s.add_argument("id", help="identity id or a monomial such as 3*q^2")
    s.add_argument("--assign", default="", help="name=r*q^m,... (defaults to the first suggested point)")
    s.add_argument("--order", type=int, default=10)
    s.set_defaults(func=_cmd_coeffs)

    s = sub.add_parser("compare-rho", help="agreement of the rho representations")
    s.add_argument("--arity", type=int, choices=(4, 5), required=True)
    s.add_argument("--order", type=int)
    s.add_argument("--samples", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--json", metavar="PATH")
    s.set_defaults(func=_cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (QSeriesError, ValueError, OSError) as ex:
        print(f"error: {type(ex).__name__}: {ex}", file=sys.stderr)
        return 2
