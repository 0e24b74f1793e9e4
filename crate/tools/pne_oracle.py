#!/usr/bin/env python3
"""Brute-force equilibria for instance documents (dense rank arrays only).

Usage: pne_oracle.py INSTANCE.json > EXPECTED.json

Writes every pure Nash equilibrium (as count vectors, in lexicographic
order), the number of strategies per player and the improvement-move bound.
Shares no code with the Rust crate.
"""
import itertools
import json
import sys


def strategies(rank, m, demand):
    out = []
    for x in itertools.product(range(demand + 1), repeat=m):
        if sum(x) != demand:
            continue
        if all(sum(x[r] for r in range(m) if u >> r & 1) <= rank[u] for u in range(1 << m)):
            out.append(list(x))
    return out


def cost(player, names, loads, x):
    return sum(x[r] * player["costs"][names[r]][loads[r]] for r in range(len(names)))


def main(path):
    doc = json.load(open(path))
    names, players = doc["resources"], doc["players"]
    m, n = len(names), len(players)
    spaces = [strategies(p["rank"], m, p["demand"]) for p in players]
    equilibria = []
    for profile in itertools.product(*spaces):
        loads = [sum(x[r] for x in profile) for r in range(m)]
        stable = True
        for i, p in enumerate(players):
            others = [loads[r] - profile[i][r] for r in range(m)]
            now = cost(p, names, loads, profile[i])
            for y in spaces[i]:
                if cost(p, names, [others[r] + y[r] for r in range(m)], y) < now:
                    stable = False
                    break
            if not stable:
                break
        if stable:
            equilibria.append([list(x) for x in profile])
    delta = max((p["demand"] for p in players), default=0)
    bound = 0 if delta == 0 else n ** (delta + 1) * m ** delta * delta ** (delta + 1)
    json.dump(
        {"strategies": [len(s) for s in spaces], "equilibria": equilibria, "bound": str(bound)},
        sys.stdout,
    )
    sys.stdout.write("\n")


if __name__ == "__main__":
    main(sys.argv[1])
