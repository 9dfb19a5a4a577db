"""Regenerate pari_reference.json straight from PARI (cypari), bypassing the package.

For each field, the class order of the degree-1 prime (ell, x - a) for every
admissible ell below the bound.  Assumes GRH (bnfinit without bnfcertify).
"""

import json
from math import gcd
from pathlib import Path

import cypari

pari = cypari.pari
FIELDS = [(3, 921, 3000), (5, 19, 3000)]


def main():
    out = {}
    for p, c, bound in FIELDS:
        bnf = pari(f"bnfinit(x^{p} - {c}, 1)")
        cyc = [int(d) for d in pari("(b) -> b.cyc")(bnf)]
        orders = {}
        for ell in pari(f"primes([2, {bound}])"):
            ell = int(ell)
            if ell % p == 1 or ell == p or c % ell == 0:
                continue
            a = next(r for r in range(ell) if (pow(r, p, ell) - c) % ell == 0)
            I = pari(f"(b) -> idealhnf(b, {ell}, x - {a})")(bnf)
            v = [int(t) for t in pari("(b, I) -> bnfisprincipal(b, I, 0)")(bnf, I)]
            m = 1
            for t, d in zip(v, cyc):
                k = d // gcd(t, d)
                m = m * k // gcd(m, k)
            orders[str(ell)] = m
        out[f"{p},{c}"] = {"cyc": cyc, "orders": orders}
    Path(__file__).with_name("pari_reference.json").write_text(json.dumps(out, indent=1, sort_keys=True))


if __name__ == "__main__":
    main()
