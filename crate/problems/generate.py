#!/usr/bin/env python3
"""Writes the multi-chart problem files of this directory."""

import json
import math
from pathlib import Path

HERE = Path(__file__).parent
TWO_PI = 2 * math.pi


def arc_map(a, b):
    """(region, shift) components carrying the arc (a, a+2pi) into (b, b+2pi)."""
    out = []
    for k in (-1, 0, 1):
        shift = TWO_PI * k
        lo = max(a, b - shift)
        hi = min(a + TWO_PI, b + TWO_PI - shift)
        if hi - lo > 1e-9:
            out.append(((lo, hi), k))
    return out


def shifted(name, k):
    return name if k == 0 else f"{name} + {2 * k}*pi"


def arc_exprs(starts):
    table = {}
    for s, v in starts:
        table[v] = s if s != "0" else 0
        table[v + TWO_PI] = f"{s} + 2*pi" if s != "0" else "2*pi"
        table[v - TWO_PI] = f"{s} - 2*pi" if s != "0" else "-2*pi"
    return table


def snap(x, table):
    for v, e in table.items():
        if abs(v - x) < 1e-12:
            return e
    raise ValueError(x)


def write(name, doc):
    (HERE / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")


def monopole(g, arcs, partition=None, name=None):
    table = arc_exprs(arcs)
    charts = []
    for i, (s, v) in enumerate(arcs):
        charts.append({
            "name": f"C{i}",
            "bounds": [[None, None], [snap(v, table), snap(v + TWO_PI, table)], [-1, 1]],
            "center": {"fiber": [f"{s} + pi" if s != "0" else "pi", "0"]},
            "embedding": ["z", "(1 - z^2)*cos(p)", "(1 - z^2)*sin(p)"],
        })
    transitions = []
    for i, (_, a) in enumerate(arcs):
        for j, (_, b) in enumerate(arcs):
            if i == j:
                continue
            for (lo, hi), k in arc_map(a, b):
                transitions.append({
                    "label": f"C{i}->C{j}[{k}]",
                    "from": f"C{i}",
                    "to": f"C{j}",
                    "base": ["t"],
                    "fiber": [shifted("p", k), "z"],
                    "region": [[None, None], [snap(lo, table), snap(hi, table)], [-1, 1]],
                })
    doc = {
        "schema": "vjp-schema-1",
        "name": name,
        "space": {"base": ["t"], "fields": ["p", "z"], "order": 1, "constants": {"g": g}},
        "charts": charts,
        "transitions": transitions,
        "source": ["g*z_t", "-g*p_t"],
        "symmetries": [
            {"name": "rotation", "fiber": ["1", "0"]},
            {"name": "lift", "fiber": ["0", "1"]},
        ],
        "sections": [{"name": "rest", "charts": {"C0": ["1", "0"]}}],
        "cycles": [
            {
                "name": "sphere",
                "dim": 2,
                "pieces": [{"chart": "C0", "map": {"p": "2*pi*s1", "z": "2*s2 - 1"}}],
                "faces": [
                    {"glued": {"a": {"axis": 0, "side": 0}, "b": {"axis": 0, "side": 1}}},
                    {"collapsed": {"axis": 1, "side": 0}},
                    {"collapsed": {"axis": 1, "side": 1}},
                ],
            },
            {
                "name": "parallel",
                "dim": 1,
                "pieces": [{"chart": "C0", "map": {"p": "2*pi*s1", "z": "1/2"}}],
                "faces": [{"glued": {"a": {"axis": 0, "side": 0}, "b": {"axis": 0, "side": 1}}}],
            },
        ],
        "bundle": {"kind": "product", "fiber_betti": [1, 1]},
        "seed": 7,
    }
    if partition:
        doc["partition"] = partition
    return doc


def two_arcs():
    return [("0", 0.0), ("-pi", -math.pi)]


def three_arcs():
    return [("0", 0.0), ("2*pi/3", TWO_PI / 3), ("4*pi/3", 2 * TWO_PI / 3)]


def circle_charts(fiber_bounds, embedding, fiber_center="0"):
    arcs = two_arcs()
    table = arc_exprs(arcs)
    charts = []
    for i, (s, v) in enumerate(arcs):
        charts.append({
            "name": "AB"[i],
            "bounds": [[snap(v, table), snap(v + TWO_PI, table)], fiber_bounds],
            "center": {"base": ["pi" if i == 0 else "0"], "fiber": [fiber_center]},
            "embedding": embedding,
        })
    transitions = []
    for i, (_, a) in enumerate(arcs):
        for j, (_, b) in enumerate(arcs):
            if i == j:
                continue
            for (lo, hi), k in arc_map(a, b):
                transitions.append({
                    "label": f"{'AB'[i]}->{'AB'[j]}[{k}]",
                    "from": "AB"[i],
                    "to": "AB"[j],
                    "base": [shifted("x", k)],
                    "fiber": ["u"],
                    "region": [[snap(lo, table), snap(hi, table)], fiber_bounds],
                })
    return charts, transitions


def base_loop(chart="A"):
    return {
        "name": "X",
        "dim": 1,
        "pieces": [{"chart": chart, "map": {"x": "2*pi*s1"}}],
        "faces": [{"glued": {"a": {"axis": 0, "side": 0}, "b": {"axis": 0, "side": 1}}}],
    }


def proposition(c):
    charts, transitions = circle_charts([None, None], ["cos(x)", "sin(x)", "u"])
    sections = [{"name": "zero", "charts": {"A": ["0"], "B": ["0"]}}]
    homotopies = []
    if c == 0:
        sections.append({"name": "one", "charts": {"A": ["1"], "B": ["1"]}})
        homotopies.append({"from": "zero", "to": "one", "charts": {"A": ["h"], "B": ["h"]}})
    return {
        "schema": "vjp-schema-1",
        "name": f"affine-circle-c{c}",
        "space": {"base": ["x"], "fields": ["u"], "order": 2, "constants": {"c": c}},
        "charts": charts,
        "transitions": transitions,
        "source": ["-u_xx + c"],
        "symmetries": [
            {"name": "shift", "fiber": ["1"]},
            {"name": "translation", "base": ["1"]},
        ],
        "sections": sections,
        "homotopies": homotopies,
        "cycles": [
            base_loop(),
            {
                "name": "loop-in-Y",
                "dim": 1,
                "role": "current",
                "pieces": [{"chart": "A", "map": {"x": "2*pi*s1", "u": "0"}}],
                "faces": [{"glued": {"a": {"axis": 0, "side": 0}, "b": {"axis": 0, "side": 1}}}],
            },
        ],
        "bundle": {"kind": "affine"},
        "seed": 11,
    }


def torus():
    arcs = two_arcs()
    table = arc_exprs(arcs)
    names = ["AA", "AB", "BA", "BB"]
    charts = []
    for i, (sx, vx) in enumerate(arcs):
        for j, (su, vu) in enumerate(arcs):
            charts.append({
                "name": names[2 * i + j],
                "bounds": [[snap(vx, table), snap(vx + TWO_PI, table)], [snap(vu, table), snap(vu + TWO_PI, table)]],
                "center": {"base": ["pi" if i == 0 else "0"], "fiber": ["pi" if j == 0 else "0"]},
                "embedding": ["cos(x)", "sin(x)", "cos(u)", "sin(u)"],
            })
    transitions = []
    for f in range(4):
        for t in range(4):
            if f == t:
                continue
            xa = (arcs[f // 2][1], arcs[t // 2][1])
            ua = (arcs[f % 2][1], arcs[t % 2][1])
            for (xl, xh), kx in arc_map(*xa):
                for (ul, uh), ku in arc_map(*ua):
                    transitions.append({
                        "label": f"{names[f]}->{names[t]}[{kx},{ku}]",
                        "from": names[f],
                        "to": names[t],
                        "base": [shifted("x", kx)],
                        "fiber": [shifted("u", ku)],
                        "region": [[snap(xl, table), snap(xh, table)], [snap(ul, table), snap(uh, table)]],
                    })
    loop = lambda name, m: {
        "name": name,
        "dim": 1,
        "role": "current",
        "pieces": [{"chart": "AA", "map": m}],
        "faces": [{"glued": {"a": {"axis": 0, "side": 0}, "b": {"axis": 0, "side": 1}}}],
    }
    return {
        "schema": "vjp-schema-1",
        "name": "torus",
        "space": {"base": ["x"], "fields": ["u"], "order": 1},
        "charts": charts,
        "transitions": transitions,
        "source": ["-1"],
        "symmetries": [{"name": "d_x", "base": ["1"]}],
        "sections": [
            {"name": "winding0", "charts": {n: ["1"] for n in names}},
            {"name": "winding1", "charts": {"AA": ["x"], "BB": ["x"]}},
            {"name": "winding1-bent", "charts": {"AA": ["x + 1/4*sin(x)"], "BB": ["x + 1/4*sin(x)"]}},
        ],
        "homotopies": [
            {"from": "winding1", "to": "winding1-bent", "charts": {"AA": ["x + h/4*sin(x)"], "BB": ["x + h/4*sin(x)"]}}
        ],
        "cycles": [
            base_loop("AA"),
            loop("fiber-loop", {"x": "pi", "u": "2*pi*s1"}),
            loop("base-loop", {"x": "2*pi*s1", "u": "1"}),
            loop("diagonal", {"x": "2*pi*s1", "u": "2*pi*s1"}),
        ],
        "bundle": {"kind": "product", "fiber_betti": [1, 1]},
        "seed": 3,
    }


def main():
    for g, tag in [(1.0, "1"), (2.0, "2"), (0.5, "half")]:
        write(f"monopole_2chart_g{tag}", monopole(g, two_arcs(), name=f"monopole-2chart-g{tag}"))
        rho = {f"C{k}": f"(1 - cos(p - {2 * k}*pi/3))/3" for k in range(3)}
        write(f"monopole_3chart_g{tag}", monopole(g, three_arcs(), rho, name=f"monopole-3chart-g{tag}"))
    write("torus", torus())
    write("affine_circle_c0", proposition(0))
    write("affine_circle_c1", proposition(1))


if __name__ == "__main__":
    main()
