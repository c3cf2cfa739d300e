"""Search small single-qubit circuits containing a T gate for E[L_X L_Y] = 1/8.

Each candidate is a sequence of at most three gates drawn from single-qubit
rotations (one fresh parameter each) and the fixed gates T, H and S, acting on
|0>. The loss terms are trigonometric polynomials of degree at most one per
parameter, so their product has degree at most two and the uniform average is
exact on a 5-point grid per parameter.

Usage: python scripts/search_t_fixture.py
"""
import itertools
import json

import numpy as np

from pqcbounds.circuit import Gate, ParameterizedCircuit, zero_state
from pqcbounds.oracle import term_losses
from pqcbounds.pauli import PauliString

TARGET = 0.125
ALPHABET = ["RX", "RY", "RZ", "T", "H", "S"]


def build(seq):
    gates, m = [], 0
    for name in seq:
        if name.startswith("R"):
            gates.append(Gate.rotation(name[1], 0, m))
            m += 1
        else:
            gates.append(Gate(name, (0,)))
    return ParameterizedCircuit(1, tuple(gates), m)


def grid_average(c):
    if c.m == 0:
        return None
    nodes = -np.pi + 2 * np.pi * np.arange(5) / 5
    pts = np.array(list(itertools.product(nodes, repeat=c.m)))
    vals = term_losses(c, pts, [PauliString.from_label("X"), PauliString.from_label("Y")], zero_state(1))
    return float(np.mean(vals[:, 0] * vals[:, 1]))


def main():
    hits = []
    for length in range(1, 4):
        for seq in itertools.product(ALPHABET, repeat=length):
            if "T" not in seq:
                continue
            val = grid_average(build(seq))
            if val is not None and abs(val - TARGET) < 1e-12:
                hits.append(seq)
    for seq in hits:
        print(" ".join(seq))
    if hits:
        print(json.dumps(build(hits[0]).to_dict()))


if __name__ == "__main__":
    main()
