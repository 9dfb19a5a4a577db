#!/usr/bin/env python3
"""JSON-lines class-group oracle backed by PARI (through cypari).

Usage: pass ``python3 adapters/pari_oracle.py`` as --oracle-cmd.

PARI's class groups from bnfinit are correct under GRH; this adapter does not
call bnfcertify, so its answers inherit that assumption.
"""

import json
import sys
from math import gcd

import cypari

pari = cypari.pari
_stdout = sys.stdout
sys.stdout = sys.stderr  # keep PARI's stack messages off the wire
pari.allocatemem(1 << 28, 1 << 32)
sys.stdout = _stdout

_bnf = {}


def bnf(p, c):
    key = (p, c)
    if key not in _bnf:
        _bnf[key] = pari(f"bnfinit(x^{p} - {c}, 1)")
    return _bnf[key]


def order_of(vec, cyc_):
    out = 1
    for v, d in zip(vec, cyc_):
        k = d // gcd(int(v), d)
        out = out * k // gcd(out, k)
    return out


def ideal_from_power_columns(b, p, cols):
    polys = ["(" + "+".join(f"({a})*x^{i}" for i, a in enumerate(col)) + ")" for col in cols]
    return pari("(b, v) -> my(I = idealhnf(b, v[1])); for(i = 2, #v, I = idealadd(b, I, v[i])); I")(b, pari("[" + ",".join(polys) + "]"))


def handle(req):
    op = req["op"]
    p, c = int(req["p"]), int(req["c"])
    b = bnf(p, c)
    cy = [int(d) for d in pari("(b) -> b.cyc")(b)]
    if op == "class_group":
        return {"invariants": cy}
    if op == "ideal_class_order":
        ell, a = int(req["ell"]), int(req["root"])
        I = pari(f"(b) -> idealhnf(b, {ell}, x - {a})")(b)
        v = pari("(b, I) -> bnfisprincipal(b, I, 0)")(b, I)
        return {"order": order_of(list(v), cy)}
    if op == "is_principal":
        rows = req["hnf"]
        n = len(rows)
        cols = [[int(rows[i][j]) for i in range(n)] for j in range(n)]
        I = ideal_from_power_columns(b, p, cols)
        res = pari("(b, I) -> bnfisprincipal(b, I, 1)")(b, I)
        v = list(res[0])
        if any(int(t) for t in v):
            return {"principal": False, "generator": None, "order": order_of(v, cy)}
        g = pari("(b, g) -> Vecrev(lift(nfbasistoalg(b, g)), %d)" % p)(b, res[1])
        return {"principal": True, "generator": [str(t) for t in g]}
    raise ValueError(f"unknown op {op}")


def main():
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        rid = None
        try:
            req = json.loads(line)
            rid = req.get("id")
            out = {"id": rid, "ok": True}
            out.update(handle(req))
        except Exception as exc:  # reported on the wire, never swallowed
            out = {"id": rid, "ok": False, "error": f"{type(exc).__name__}: {exc}"}
        sys.stdout.write(json.dumps(out) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
