"""Command-line entry point: ``fermat-hasse <command> ...``; every command prints JSON."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .arith import PROBABILISTIC_ROUNDS, prime_divisors
from .classgroup import BackendConfig, BackendFailure, class_data
from .density import ConditionError, density_certificate
from .exceptional import cached_exceptional_primes, default_cache_dir
from .field import field_data
from .hunter import (
    CertificateError,
    CounterexampleCertificate,
    analyze,
    certificate_problems,
    load_certificates,
    run_hunt,
)
from .local import DiagonalCurve, local_report_for_curve

DESCRIPTION = f"""\
Local solvability, exceptional primes, density certificates and class-group
tests for the curves x^p + ell*y^p + c*z^p = 0.

Primality is deterministic below 3.3e24 (fixed Miller-Rabin bases); larger
inputs use {PROBABILISTIC_ROUNDS} random-base rounds (PROBABILISTIC_ROUNDS).
"""


def _backend_args(ap: argparse.ArgumentParser):
    ap.add_argument("--backend", choices=("declared", "oracle", "builtin"),
                    help="default: oracle when --oracle-cmd is given, else declared")
    ap.add_argument("--oracle-cmd", help="command speaking the JSON-lines oracle protocol")
    ap.add_argument("--oracle-pool", type=int, default=1, help="number of oracle processes")
    ap.add_argument("--declared", help="JSON file with extra declared class groups")


def _backend(ns) -> BackendConfig:
    kind = ns.backend or ("oracle" if ns.oracle_cmd else "declared")
    return BackendConfig(kind, declared_path=ns.declared, oracle_cmd=ns.oracle_cmd,
                         oracle_pool=ns.oracle_pool, cache_dir=str(ns.cache_dir))


def _class_filter(s: str | None):
    if not s:
        return None
    try:
        a, m = s.split(":")
        return int(a), int(m)
    except ValueError:
        raise argparse.ArgumentTypeError("expected A:M") from None


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")


def cmd_analyze(ns) -> int:
    rep = analyze(ns.p, ns.c, _backend(ns), ns.cache_dir)
    _emit(rep.to_json())
    return 0 if rep.verdict else 3


def cmd_exceptional(ns) -> int:
    es = cached_exceptional_primes(ns.p, ns.cache_dir, refresh=ns.refresh, jobs=ns.jobs)
    _emit(es.to_json())
    return 0


def cmd_density(ns) -> int:
    fld = field_data(ns.p, ns.c)
    cd = class_data(fld, _backend(ns))
    cert = density_certificate(fld, cd, cached_exceptional_primes(ns.p, ns.cache_dir))
    _emit(cert.to_json())
    return 0


def cmd_local(ns) -> int:
    curve = DiagonalCurve(ns.p, ns.a, ns.b, ns.c)
    if ns.q:
        primes = ns.q
    else:
        primes = [ns.p]
        for k in curve.coeffs:
            primes += [q for q in prime_divisors(abs(k)) if q not in primes]
        primes += [q for q in cached_exceptional_primes(ns.p, ns.cache_dir).primes if q not in primes]
    rep = local_report_for_curve(curve, primes)
    _emit(rep.to_json())
    return 0 if rep.obstruction_free else 3


def cmd_hunt(ns) -> int:
    st = run_hunt(ns.p, ns.c, ns.min, ns.max, ns.cls, _backend(ns), out=ns.out, checkpoint=ns.checkpoint,
                  force=ns.force, jobs=ns.jobs, interval=ns.interval, cache_dir=ns.cache_dir)
    _emit(st.to_json())
    return 0


def cmd_verify(ns) -> int:
    backend = _backend(ns) if (ns.oracle_cmd or ns.backend) else None
    failures = 0
    for lineno, obj, err in load_certificates(ns.file):
        if err is None:
            try:
                cert = CounterexampleCertificate.from_json(obj)
                problems = certificate_problems(cert, backend, ns.cache_dir)
            except CertificateError as exc:
                problems = [f"malformed: {exc}"]
            ell = obj.get("ell") if isinstance(obj, dict) else None
        else:
            problems, ell = [err], None
        status = "PASS" if not problems else "FAIL"
        failures += bool(problems)
        print(f"line {lineno}: {status} ell={ell}" + ("" if not problems else " (" + "; ".join(problems) + ")"))
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fermat-hasse", description=DESCRIPTION,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--cache-dir", type=Path, default=None, help="default: $FERMAT_HASSE_CACHE or ~/.cache/fermat_hasse")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="conditions, class group, density verdict for (p, c)")
    a.add_argument("--p", type=int, required=True)
    a.add_argument("--c", type=int, required=True)
    _backend_args(a)
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("exceptional", help="exceptional primes for p")
    e.add_argument("--p", type=int, required=True)
    e.add_argument("--refresh", action="store_true")
    e.add_argument("--jobs", type=int, default=1)
    e.set_defaults(func=cmd_exceptional)

    d = sub.add_parser("density", help="exact density certificate")
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--c", type=int, required=True)
    _backend_args(d)
    d.set_defaults(func=cmd_density)

    lo = sub.add_parser("local", help="Q_q-solvability of a*x^p + b*y^p + c*z^p")
    for k in ("p", "a", "b", "c"):
        lo.add_argument(f"--{k}", type=int, required=True)
    lo.add_argument("--q", type=int, action="append", help="prime to check (repeatable)")
    lo.set_defaults(func=cmd_local)

    h = sub.add_parser("hunt", help="search ell and write certificates")
    h.add_argument("--p", type=int, required=True)
    h.add_argument("--c", type=int, required=True)
    h.add_argument("--max", type=int, required=True)
    h.add_argument("--min", type=int, default=2)
    h.add_argument("--class", dest="cls", type=_class_filter, help="restrict to ell = A mod M")
    h.add_argument("--out", type=Path)
    h.add_argument("--checkpoint", type=Path)
    h.add_argument("--jobs", type=int, default=1)
    h.add_argument("--interval", type=int, default=20000, help="width of one work unit in ell")
    h.add_argument("--force", action="store_true", help="hunt even when the analysis is negative")
    _backend_args(h)
    h.set_defaults(func=cmd_hunt)

    v = sub.add_parser("verify", help="replay certificates from a JSON-lines file")
    v.add_argument("file", type=Path)
    _backend_args(v)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, stream=sys.stderr)
    if ns.cache_dir is None:
        ns.cache_dir = default_cache_dir()
    try:
        return ns.func(ns)
    except (BackendFailure, ConditionError, CertificateError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
