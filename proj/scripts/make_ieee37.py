#!/usr/bin/env python3
"""Builds a balanced single-phase equivalent of the IEEE 37-node test feeder.

Phase impedance matrices (ohm/mile) are reduced to positive sequence as
mean(self) - mean(mutual). Spot loads are summed over phases. Loads are
scaled and the substation voltage raised so that injections congest the
feeder; the result is a synthetic reconstruction, not the published case.

Writes data/feeders/ieee37.json and data/feeders/ieee37.csv.
"""

import argparse
import json
import math
from collections import deque
from pathlib import Path

# Upper triangle (aa, ab, ac, bb, bc, cc) of each configuration, ohm/mile.
CONFIGS = {
    "721": [0.2926 + 0.1973j, 0.0673 - 0.0368j, 0.0337 - 0.0417j,
            0.2646 + 0.1900j, 0.0673 - 0.0368j, 0.2926 + 0.1973j],
    "722": [0.4751 + 0.2973j, 0.1629 - 0.0326j, 0.1234 - 0.0607j,
            0.4488 + 0.2678j, 0.1629 - 0.0326j, 0.4751 + 0.2973j],
    "723": [1.2936 + 0.6713j, 0.4871 + 0.2111j, 0.4585 + 0.1521j,
            1.3022 + 0.6326j, 0.4871 + 0.2111j, 1.2936 + 0.6713j],
    "724": [2.0952 + 0.7758j, 0.5204 + 0.2738j, 0.4926 + 0.2123j,
            2.1068 + 0.7398j, 0.5204 + 0.2738j, 2.0952 + 0.7758j],
}

# Approximate cable ampacities (A).
AMPACITY = {"721": 600.0, "722": 480.0, "723": 230.0, "724": 156.0}

# (from, to, length ft, config)
SEGMENTS = [
    ("799", "701", 1850, "721"), ("701", "702", 960, "722"), ("702", "705", 400, "724"),
    ("702", "713", 360, "723"), ("702", "703", 1320, "722"), ("703", "727", 240, "724"),
    ("703", "730", 600, "723"), ("704", "714", 80, "724"), ("704", "720", 800, "723"),
    ("705", "742", 320, "724"), ("705", "712", 240, "724"), ("706", "725", 280, "724"),
    ("707", "724", 760, "724"), ("707", "722", 120, "724"), ("708", "733", 320, "723"),
    ("708", "732", 320, "724"), ("709", "731", 600, "723"), ("709", "708", 320, "723"),
    ("710", "735", 200, "724"), ("710", "736", 1280, "724"), ("711", "741", 400, "723"),
    ("711", "740", 200, "724"), ("713", "704", 520, "723"), ("714", "718", 520, "724"),
    ("720", "707", 920, "724"), ("720", "706", 600, "723"), ("727", "744", 280, "723"),
    ("730", "709", 200, "723"), ("733", "734", 560, "723"), ("734", "737", 640, "723"),
    ("734", "710", 520, "724"), ("737", "738", 400, "723"), ("738", "711", 400, "723"),
    ("744", "728", 200, "724"), ("744", "729", 280, "724"),
]

# Substation transformer XFM-1 to node 775: 500 kVA, R = 0.09 %, X = 1.81 %.
XFM = ("709", "775", 0.5, 0.0009, 0.0181)

# Spot loads summed over phases (kW, kvar).
LOADS = {
    "701": (630, 315), "712": (85, 40), "713": (85, 40), "714": (38, 18), "718": (85, 40),
    "720": (85, 40), "722": (161, 80), "724": (42, 21), "725": (42, 21), "727": (42, 21),
    "728": (126, 63), "729": (42, 21), "730": (85, 40), "731": (85, 40), "732": (42, 21),
    "733": (85, 40), "734": (42, 21), "735": (85, 40), "736": (42, 21), "737": (140, 70),
    "738": (126, 62), "740": (85, 40), "741": (42, 21), "742": (93, 44), "744": (42, 21),
}

FLEXIBLE = ["701", "702", "703", "730", "709", "733", "734", "738"]
UNCERTAINTY_MW = [0.2, 0.1, 0.02, 0.1, 0.2, 0.03, 0.02, 0.03]


def positive_sequence(config):
    aa, ab, ac, bb, bc, cc = CONFIGS[config]
    return (aa + bb + cc) / 3.0 - (ab + ac + bc) / 3.0


def build(base_mva, base_kv, v0, load_scale, vmin, vmax, ampacity_scale):
    z_base = base_kv ** 2 / base_mva
    i_base = base_mva * 1e3 / (math.sqrt(3.0) * base_kv)

    edges = []
    for a, b, ft, cfg in SEGMENTS:
        z = positive_sequence(cfg) * ft / 5280.0 / z_base
        l_max = (ampacity_scale * AMPACITY[cfg] / i_base) ** 2
        edges.append((a, b, z.real, z.imag, l_max))
    a, b, kva, r, x = XFM
    edges.append((a, b, r * base_mva / kva, x * base_mva / kva, (kva / base_mva) ** 2))

    # Number nodes breadth-first from the source, children in label order.
    adj = {}
    for a, b, *_ in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    ids = {"799": 0}
    queue = deque(["799"])
    while queue:
        u = queue.popleft()
        for w in sorted(adj[u]):
            if w not in ids:
                ids[w] = len(ids)
                queue.append(w)

    nodes = [{"id": 0, "name": "799"}]
    for label, idx in sorted(ids.items(), key=lambda kv: kv[1]):
        if idx == 0:
            continue
        p, q = LOADS.get(label, (0, 0))
        node = {"id": idx, "name": label, "v_min_pu2": vmin, "v_max_pu2": vmax,
                "p_load_mw": round(p * load_scale / 1e3, 6), "q_load_mvar": round(q * load_scale / 1e3, 6),
                "d_plus_mw": 0.0, "d_minus_mw": 0.0}
        if label in FLEXIBLE:
            node["d_plus_mw"] = UNCERTAINTY_MW[FLEXIBLE.index(label)]
            node["d_minus_mw"] = UNCERTAINTY_MW[FLEXIBLE.index(label)]
        nodes.append(node)

    branches = []
    for a, b, r, x, l_max in edges:
        branches.append({"from": ids[a], "to": ids[b], "r_pu": round(r, 10), "x_pu": round(x, 10),
                         "l_max_pu2": round(l_max, 8)})
    branches.sort(key=lambda br: br["to"])
    return {
        "description": "Synthetic balanced single-phase equivalent of the IEEE 37-node feeder "
                       f"(loads x{load_scale}, ampacities x{ampacity_scale}, v0 {v0} p.u.^2); not the published case.",
        "base_mva": base_mva, "base_kv": base_kv, "v0_pu2": v0,
        "nodes": nodes, "branches": branches,
        "flexible_nodes": [ids[label] for label in FLEXIBLE],
    }


def to_csv(feeder):
    lines = ["# record,fields...", f"base,{feeder['base_mva']},{feeder['base_kv']},{feeder['v0_pu2']}"]
    for n in feeder["nodes"]:
        if n["id"] == 0:
            continue
        lines.append(f"node,{n['id']},{n['v_min_pu2']},{n['v_max_pu2']},{n['p_load_mw']},{n['q_load_mvar']},"
                     f"{n['d_plus_mw']},{n['d_minus_mw']},{n['name']}")
    for b in feeder["branches"]:
        lines.append(f"branch,{b['from']},{b['to']},{b['r_pu']},{b['x_pu']},{b['l_max_pu2']}")
    return "\n".join(lines) + "\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default=str(Path(__file__).resolve().parent.parent / "data" / "feeders"))
    ap.add_argument("--base-mva", type=float, default=1.0)
    ap.add_argument("--base-kv", type=float, default=4.8)
    ap.add_argument("--v0", type=float, default=1.0609)
    ap.add_argument("--load-scale", type=float, default=0.5)
    ap.add_argument("--ampacity-scale", type=float, default=3.0)
    ap.add_argument("--vmin", type=float, default=0.9025)
    ap.add_argument("--vmax", type=float, default=1.1025)
    args = ap.parse_args()
    feeder = build(args.base_mva, args.base_kv, args.v0, args.load_scale, args.vmin, args.vmax, args.ampacity_scale)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "ieee37.json").write_text(json.dumps(feeder, indent=2) + "\n")
    (out / "ieee37.csv").write_text(to_csv(feeder))


if __name__ == "__main__":
    main()
