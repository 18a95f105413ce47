#!/usr/bin/env python3
"""Writes the aggregator bid files for the 37-node case studies.

Prices are demand-charge style, in $/kW. Bid magnitudes are synthetic.
"""

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

# Flexible nodes of data/feeders/ieee37.json, nearest to the substation first.
NODES = [1, 2, 3, 7, 12, 24, 28, 33]

# MW offered by each aggregator at each flexible node.
CAPACITY_MW = {
    "agg1": [0.50, 0.45, 0.40, 0.45, 0.50, 0.35, 0.40, 0.35],
    "agg2": [0.60, 0.55, 0.50, 0.45, 0.55, 0.50, 0.45, 0.40],
    "agg3": [0.40, 0.50, 0.55, 0.60, 0.45, 0.55, 0.50, 0.60],
    "agg4": [0.55, 0.50, 0.45, 0.40, 0.50, 0.45, 0.55, 0.50],
}

# One price per aggregator for the whole feeder ($/kW).
FEEDER_PRICE = {"agg1": 14.2, "agg2": 11.6, "agg3": 9.7, "agg4": 6.3}

# Nodal prices ($/kW), one row per aggregator, columns follow NODES.
NODAL_PRICE = {
    "agg1": [9.8, 10.9, 1.2, 2.5, 12.9, 13.5, 13.4, 4.1],
    "agg2": [4.6, 6.1, 5.6, 1.6, 3.60, 7.0, 4.6, 2.6],
    "agg3": [29.1, 9.0, 6.8, 14.0, 21.0, 2.7, 0.9, 15.6],
    "agg4": [13.2, 1.6, 11.4, 12.7, 1.3, 4.8, 2.5, 12.7],
}


def bids(price_of):
    aggs = []
    for agg, caps in CAPACITY_MW.items():
        nodal = [{"node": node, "p_bid_mw": cap, "k_per_kw": price_of(agg, i)}
                 for i, (node, cap) in enumerate(zip(NODES, caps))]
        aggs.append({"id": agg, "nodal": nodal})
    return {"aggregators": aggs}


def to_csv(doc):
    lines = ["aggregator_id,node,p_bid_mw,k_per_mw"]
    for agg in doc["aggregators"]:
        for e in agg["nodal"]:
            lines.append(f"{agg['id']},{e['node']},{e['p_bid_mw']},{round(e['k_per_kw'] * 1000.0, 6)}")
    return "\n".join(lines) + "\n"


def main():
    out = ROOT / "data" / "bids"
    out.mkdir(parents=True, exist_ok=True)
    cases = {
        "ieee37_case1": bids(lambda agg, i: FEEDER_PRICE[agg]),
        "ieee37_case2": bids(lambda agg, i: NODAL_PRICE[agg][i]),
    }
    for name, doc in cases.items():
        (out / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")
        (out / f"{name}.csv").write_text(to_csv(doc))


if __name__ == "__main__":
    main()
