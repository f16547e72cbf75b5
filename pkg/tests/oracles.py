"""Independent reference implementations used as test oracles.

Written as plain double loops over Python floats so they share no code
path with the vectorised engine.
"""

import math


def coords_contacts(points, threshold):
    n = len(points)
    out = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                out[i][j] = True
                continue
            d = math.sqrt(sum((points[i][k] - points[j][k]) ** 2 for k in range(3)))
            out[i][j] = d < threshold
    return out


def prob_contacts(probs, threshold=0.5):
    n = len(probs)
    out = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            p = probs[i][j] if probs[i][j] > probs[j][i] else probs[j][i]
            out[i][j] = i == j or p >= threshold
    return out


def distance_contacts(dist, threshold=10.0):
    n = len(dist)
    return [[i == j or dist[i][j] < threshold for j in range(n)] for i in range(n)]


def block_average(bits, grid):
    n = len(bits)
    block = max(1, -(-n // grid))
    out = [[0.0] * grid for _ in range(grid)]
    for gi in range(grid):
        for gj in range(grid):
            total = count = 0
            for i in range(gi * block, min((gi + 1) * block, n)):
                for j in range(gj * block, min((gj + 1) * block, n)):
                    total += 1 if bits[i][j] else 0
                    count += 1
            out[gi][gj] = total / count if count else 0.0
    return out


def pdb_line(serial, name, resname, chain, resseq, x, y, z, record="ATOM", altloc=" "):
    return (f"{record:<6s}{serial:5d} {name:<4s}{altloc}{resname:>3s} {chain}{resseq:4d}    "
            f"{x:8.3f}{y:8.3f}{z:8.3f}  1.00  0.00           C")
