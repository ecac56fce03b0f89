#!/usr/bin/env python3
"""Writes data/default_building.txt: a synthetic three-storey layout, 40 nodes per floor.

Each floor has two parallel 9-node corridors (south at y=0, north at y=1200) joined by
cross corridors at both ends and in the middle, a stairwell node at each end, and rooms
hanging off the corridors. The ground floor replaces its two mid-block rooms with exits
beyond the stairwells. Coordinates and lengths are in cm; rooms hold 1 person, every other
node 3.
"""

import math
import pathlib

SPACING = 600
CORRIDOR_GAP = 1200
FLOOR_HEIGHT = 400
STAIR_LENGTH = 1000
FLOORS = 3

nodes = []  # (id, x, y, z, floor, capacity, is_exit)
edges = []  # (a, b, length)


def add_node(x, y, floor, capacity, is_exit=False):
    nid = len(nodes)
    nodes.append((nid, x, y, (floor - 1) * FLOOR_HEIGHT, floor, capacity, is_exit))
    return nid


def connect(a, b, length=None):
    if length is None:
        _, xa, ya, za, *_ = nodes[a]
        _, xb, yb, zb, *_ = nodes[b]
        length = round(math.dist((xa, ya, za), (xb, yb, zb)), 1)
    edges.append((a, b, length))


stair_w, stair_e = [], []
for floor in range(1, FLOORS + 1):
    south = [add_node(SPACING * k, 0, floor, 3) for k in range(9)]
    north = [add_node(SPACING * k, CORRIDOR_GAP, floor, 3) for k in range(9)]
    for row in (south, north):
        for a, b in zip(row, row[1:]):
            connect(a, b)
    for k in (0, 4, 8):
        connect(south[k], north[k])

    w = add_node(-SPACING, CORRIDOR_GAP / 2, floor, 3)
    e = add_node(SPACING * 9, CORRIDOR_GAP / 2, floor, 3)
    connect(w, south[0])
    connect(w, north[0])
    connect(e, south[8])
    connect(e, north[8])
    stair_w.append(w)
    stair_e.append(e)

    for k in range(9):
        connect(add_node(SPACING * k, -500, floor, 1), south[k])
        connect(add_node(SPACING * k, CORRIDOR_GAP + 500, floor, 1), north[k])

    if floor == 1:
        connect(add_node(-2 * SPACING, CORRIDOR_GAP / 2, floor, 3, True), w)
        connect(add_node(SPACING * 10, CORRIDOR_GAP / 2, floor, 3, True), e)
    else:
        connect(add_node(SPACING * 2, CORRIDOR_GAP / 2, floor, 1), south[2])
        connect(add_node(SPACING * 6, CORRIDOR_GAP / 2, floor, 1), north[6])

for stairs in (stair_w, stair_e):
    for a, b in zip(stairs, stairs[1:]):
        connect(a, b, STAIR_LENGTH)

assert len(nodes) == 40 * FLOORS


def fmt(v):
    return str(int(v)) if float(v).is_integer() else str(v)


lines = [
    "# Synthetic three-storey evacuation layout (generated by make_default_building.py).",
    "# node <id> <x> <y> <z> <floor> <capacity> [exit]   edge <id1> <id2> <length_cm>",
    "building default-3-floor",
]
for nid, x, y, z, floor, cap, is_exit in nodes:
    lines.append(f"node {nid} {fmt(x)} {fmt(y)} {fmt(z)} {floor} {cap}" + (" exit" if is_exit else ""))
for a, b, length in edges:
    lines.append(f"edge {a} {b} {fmt(length)}")

out = pathlib.Path(__file__).with_name("default_building.txt")
out.write_text("\n".join(lines) + "\n")
print(f"wrote {out} ({len(nodes)} nodes, {len(edges)} edges)")
