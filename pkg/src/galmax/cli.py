"""Command-line interface.

Subcommands map one-to-one onto the library operations: group-audit,
omega-dist, weil-count, serre-scan, certify, sieve-bound.  Reports are JSON
(default) or CSV; exit codes: 0 success, 2 usage error, 3 resource cap.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import __version__, audits, certify, ecff, numfield, sieve
from .errors import GalmaxError, InvalidInputError, ResourceCapError


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.run(args)
    except ResourceCapError as e:
        print(f"resource cap exceeded: {e}", file=sys.stderr)
        return 3
    except (InvalidInputError, GalmaxError, ValueError) as e:
        parser.error(str(e))  # exits 2
        return 2
    _emit(report, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="write the report to a file instead of stdout")
    parser = argparse.ArgumentParser(prog="galmax", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add_parser("group-audit", help="run the lemma audits at a modulus")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(run=_run_group_audit)

    p = add_parser("omega-dist", help="splitting-class equidistribution over F_p^2")
    p.add_argument("--p", type=_int_list, required=True, help="comma-separated primes")
    p.add_argument("--m", type=int, default=2)
    p.set_defaults(run=_run_omega)

    p = add_parser("weil-count", help="count coefficient pairs with Delta in a power class")
    p.add_argument("--p", type=_int_list, required=True)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--gamma", type=int, default=1)
    p.set_defaults(run=_run_weil)

    p = add_parser("serre-scan", help="box scan of a certification check")
    p.add_argument("--x", type=_int_list, required=True)
    p.add_argument("--check", choices=("serre", "mod-ell", "disc-square"), default="serre")
    p.add_argument("--ell", type=int, default=5)
    p.add_argument("--prime-bound", type=int, default=500)
    p.add_argument("--l-max", type=int, default=13)
    p.set_defaults(run=_run_scan)

    p = add_parser("certify", help="certify one curve (Serre over Q; maximality over a field)")
    p.add_argument("--curve", required=True, help="a,b over Q or [..],[..] power-basis lists over a field")
    p.add_argument("--field", default=None, help="f=[c0,c1,...,1] monic integer polynomial")
    p.add_argument("--prime-bound", type=int, default=10**4)
    p.add_argument("--l-max", type=int, default=37)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(run=_run_certify)

    p = add_parser("sieve-bound", help="large sieve denominator L(Q) and bound shape")
    p.add_argument("--Q", type=int, required=True)
    p.add_argument("--omega", default="", help="comma list p=num/den, e.g. 2=1/2,3=1/2")
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--rank", type=int, default=2)
    p.set_defaults(run=_run_sieve_bound)
    return parser


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


# ---------------------------------------------------------------------------
# subcommand bodies; each returns {params, rows, caveats}


def _run_group_audit(args) -> dict:
    m = args.m
    reports = [audits.coverage_implies_sl2_audit(m, trials=args.trials, seed=args.seed)]
    pe = _prime_power(m)
    if pe and pe[1] >= 2:
        reports.append(audits.reduction_lemma_audit(pe[0], pe[1], trials=args.trials, seed=args.seed))
    co = _coprime_split(m)
    if co:
        reports.append(audits.goursat_audit(co[0], co[1], trials=args.trials, seed=args.seed))
    return {
        "params": {"m": m, "trials": args.trials, "seed": args.seed},
        "rows": [r.to_json() for r in reports],
        "caveats": [],
        "ok": all(r.ok for r in reports),
    }


def _prime_power(m: int):
    for p in (2, 3, 5, 7):
        if m % p == 0:
            e = 0
            n = m
            while n % p == 0:
                n //= p
                e += 1
            return (p, e) if n == 1 else None
    return None


def _coprime_split(m: int):
    for p in (2, 3):
        if m % p == 0:
            q = 1
            n = m
            while n % p == 0:
                n //= p
                q *= p
            if n > 1:
                return (q, n)
    return None


def _run_omega(args) -> dict:
    rows = sieve.omega_report(args.p, m=args.m)
    return {"params": {"p": args.p, "m": args.m}, "rows": [r.to_json() for r in rows], "caveats": []}


def _run_weil(args) -> dict:
    rows = []
    for p in args.p:
        count, dev = ecff.weil_count(args.r, args.gamma, p)
        rows.append({"p": p, "r": args.r, "gamma": args.gamma, "count": count,
                     "expected": p * p / args.r, "deviation_norm": dev})
    return {"params": {"r": args.r, "gamma": args.gamma}, "rows": rows, "caveats": []}


def _run_scan(args) -> dict:
    params = certify.CertParams(prime_bound=args.prime_bound, l_max=args.l_max)
    rep = sieve.density_scan(args.x, check=args.check, params=params, ell=args.ell)
    return rep.to_json()


def _run_certify(args) -> dict:
    params = certify.CertParams(prime_bound=args.prime_bound, l_max=args.l_max, seed=args.seed)
    if args.field:
        K = _parse_field(args.field)
        a, b = _parse_field_curve(args.curve, K)
        curve = ecff.validate(a, b)
        report = certify.certify_maximal(curve, K, params)
        return report.to_json()
    a_str, b_str = args.curve.split(",")
    curve = ecff.validate(Fraction(a_str), Fraction(b_str))
    report = certify.serre_check(curve, params)
    return report.to_json()


def _parse_field(text: str) -> numfield.MonogenicField:
    if text.startswith("f="):
        text = text[2:]
    coeffs = json.loads(text)
    return numfield.MonogenicField(coeffs)


def _parse_field_curve(text: str, K: numfield.MonogenicField):
    lists = json.loads(f"[{text}]")
    if len(lists) != 2:
        raise InvalidInputError("field curve needs two coefficient lists, e.g. [0,1296],[0,0,11664]")
    return K.elem(lists[0]), K.elem(lists[1])


def _run_sieve_bound(args) -> dict:
    omega = {}
    if args.omega:
        for part in args.omega.split(","):
            key, _, val = part.partition("=")
            omega[int(key)] = Fraction(val)
    L, bound = sieve.sieve_bound(omega, args.Q, x=args.x, degree=args.degree, rank=args.rank)
    return {
        "params": {"Q": args.Q, "omega": {str(k): str(v) for k, v in omega.items()},
                   "x": args.x, "degree": args.degree, "rank": args.rank},
        "rows": [{"L": str(L), "L_float": float(L), "bound": bound}],
        "caveats": ["the implied constant of the sieve inequality is reported as 1 (shape only)"],
    }


# ---------------------------------------------------------------------------
# output plumbing


def _emit(report: dict, args) -> None:
    payload = {"tool_version": __version__}
    payload.update(report)
    if args.format == "json":
        text = json.dumps(payload, indent=2, default=str)
    else:
        rows = payload.get("rows", [])
        buf = io.StringIO()
        if rows:
            headers = sorted({k for row in rows for k in row}) if isinstance(rows[0], dict) else ["value"]
            writer = csv.DictWriter(buf, fieldnames=headers)
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _csv_cell(v) for k, v in row.items()} if isinstance(row, dict) else {"value": row})
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text)


def _csv_cell(v):
    if isinstance(v, (dict, list)):
        return json.dumps(v, default=str)
    return v


if __name__ == "__main__":
    raise SystemExit(main())
