#!/usr/bin/env python3
"""Writes the problem and manifold fixtures under fixtures/."""
import json
import pathlib
from fractions import Fraction as Fr

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def s(x):
    return str(Fr(x))


def series_mul(a, b, n):
    return [sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n + 1)]


def series_exp(g, n):
    # exp of a series with g[0] = 0 via e' = g' e
    e = [Fr(0)] * (n + 1)
    e[0] = Fr(1)
    dg = [(k + 1) * g[k + 1] for k in range(n)] + [Fr(0)]
    for k in range(n):
        e[k + 1] = sum(dg[i] * e[k - i] for i in range(k + 1)) / (k + 1)
    return e


def poly_str(coeffs, var):
    terms = []
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        body = str(abs(c)) if not mono else (mono if abs(c) == 1 else f"{abs(c)}*{mono}")
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def ip_problem(c1, c2, d2, mutated=False):
    c1, c2, d2 = Fr(c1), Fr(c2), Fr(d2)
    coords = ["t", "w", "s", "P", "Q"]
    basis = [
        {"name": "Gamma0", "kind": "splitting", "splits": "t"},
        {"name": "W1", "kind": "splitting", "splits": "w"},
        {"name": "H1", "kind": "kernel"},
        {"name": "Ds", "kind": "splitting", "splits": "s"},
        {"name": "DP", "kind": "splitting", "splits": "P"},
        {"name": "DQ", "kind": "splitting", "splits": "Q"},
    ]
    brackets = {"Gamma0,W1": {"H1": "-1"}}
    if mutated:
        brackets["H1,Ds"] = {"H1": "-1"}
    z = {"t": "0", "w": "0", "s": s(c1), "P": s(c2), "Q": "0"}
    h1 = ["0", "0", "1", "0", "0", "0"]
    g0 = ["1", "0", "0", "0", "0", "0"]
    y = ["0", "1", "0", s(-c2), s(d2), "0"]
    g0y = ["1", "1", "0", s(-c2), s(d2), "0"]
    lit = ["0", "1", "1", s(-c2), s(d2), "0"]
    elements = {
        "E1": {"base_point": z, "span": [h1], "chart": ["H1"]},
        "E2": {"base_point": z, "span": [h1, g0y]},
        "E2_literal": {"base_point": z, "span": [g0, lit]},
        "E2_tilde": {"base_point": z, "span": [g0, h1]},
        "E_z": {"base_point": z, "span": [h1, g0, y]},
    }
    top = [h1, g0y, y]
    flags = {
        "main": {"base_point": z, "members": [[h1], [h1, g0y], top]},
        "tilde": {"base_point": z, "members": [[h1], [g0, h1], top]},
        "literal": {"base_point": z, "members": [[h1], [g0, lit], top]},
    }
    return {
        "algebroid": {"coords": coords, "basis": basis, "brackets": brackets},
        "ideal": {
            "generators": [
                {
                    "name": "sigma11",
                    "degree": 1,
                    "terms": [
                        {"index": ["Ds"], "coeff": "1"},
                        {"index": ["W1"], "coeff": "P"},
                        {"index": ["H1"], "coeff": "Q"},
                    ],
                }
            ]
        },
        "queries": {"elements": elements, "flags": flags, "extensions": {"E1": elements["E1"]}},
    }


def simple_r3(z=(0, 1, 2)):
    zp = {"x1": s(z[0]), "x2": s(z[1]), "x3": s(z[2])}
    k1 = ["0", "0", "0", "1"]
    e = ["1", "0", s(z[1]), "0"]
    return {
        "algebroid": {
            "coords": ["x1", "x2", "x3"],
            "basis": [
                {"name": "d1", "kind": "splitting", "splits": "x1"},
                {"name": "d2", "kind": "splitting", "splits": "x2"},
                {"name": "d3", "kind": "splitting", "splits": "x3"},
                {"name": "k1", "kind": "kernel"},
            ],
            "brackets": {},
        },
        "ideal": {
            "generators": [
                {"name": "theta1", "degree": 1, "terms": [{"index": ["d3"], "coeff": "1"}, {"index": ["d1"], "coeff": "-x2"}]},
                {"name": "theta2", "degree": 1, "terms": [{"index": ["d2"], "coeff": "1"}]},
            ]
        },
        "queries": {
            "elements": {
                "E1": {"base_point": zp, "span": [k1], "chart": ["k1"]},
                "E_z": {"base_point": zp, "span": [k1, e]},
                "off": {"base_point": zp, "span": [["1", "0", "0", "0"]]},
            },
            "flags": {"main": {"base_point": zp, "members": [[k1], [k1, e]]}},
            "extensions": {"E1": {"base_point": zp, "span": [k1]}},
        },
    }


def h_family(c1, c2, d2, n):
    c1, c2, d2 = Fr(c1), Fr(c2), Fr(d2)
    h = [Fr(0), c2 / c1, (d2 * c1 + c2 * c2) / (2 * c1 * c1)] + [Fr(0)] * (n - 2)
    sv = [c1 * x for x in series_exp([-x for x in h], n)]
    dh = [(k + 1) * h[k + 1] for k in range(n)] + [Fr(0)]
    P = series_mul(sv, dh, n)
    return sv, P


def write(name, doc):
    (OUT / name).write_text(json.dumps(doc, indent=2) + "\n")


def main():
    OUT.mkdir(exist_ok=True)
    write("simple-r3.json", simple_r3())
    write("ip-r1-prolonged.json", ip_problem(1, 1, 0))
    write("ip-r1-c2zero.json", ip_problem(1, 0, 0))
    write("ip-r1-mutated.json", ip_problem(1, 1, 0, mutated=True))
    write("simple-r3-j.manifold.json", {"domain": ["x"], "order": None, "components": {"x1": "x", "x2": "1", "x3": "x + 2"}})
    sv, P = h_family(1, 1, 0, 6)
    comps = {"t": "t", "w": "w", "s": poly_str(sv, "w"), "P": poly_str(P, "w"), "Q": "0"}
    write("ip-r1-h-family.manifold.json", {"domain": ["t", "w"], "order": 6, "components": comps})
    bad = list(sv)
    bad[3] += 1
    comps = dict(comps, s=poly_str(bad, "w"))
    write("ip-r1-tampered.manifold.json", {"domain": ["t", "w"], "order": 6, "components": comps})


if __name__ == "__main__":
    main()
