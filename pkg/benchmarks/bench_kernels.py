"""Compare the compiled propagation kernels with the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--n 16] [--depth 4] [--batch 4096] [--repeat 5]

Both backends are run on the same EfficientSU2 circuit and Clifford points,
their outputs are checked for equality, and the best-of-``repeat`` wall time
of the propagate + loss + cone pipeline is reported for each.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from pqcbounds import _kernels_py
from pqcbounds.circuit import build_efficient_su2, zero_state
from pqcbounds.pauli import PauliString
from pqcbounds.propagation import CompiledCircuit, _to_words
from pqcbounds.sampling import discrete_points

try:
    from pqcbounds import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def _pipeline(mod, comp: CompiledCircuit, turns: np.ndarray, p: PauliString, bloch: np.ndarray):
    W = comp.n_words
    x, z, ph = mod.propagate_batch(
        comp.kinds, comp.q0, comp.q1, comp.pidx, comp.gx, comp.gz,
        _to_words(p.x, W), _to_words(p.z, W), p.phase, turns,
    )
    return mod.loss_batch(x, z, ph, bloch), mod.cone_batch(x, z)


def _best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--depth", type=int, default=4)
    ap.add_argument("--batch", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    c = build_efficient_su2(args.n, args.depth)
    comp = CompiledCircuit(c)
    p = PauliString.single(args.n, 0, "Z")
    bloch = zero_state(args.n).bloch
    turns = next(discrete_points(0, args.batch, c.m))
    print(f"circuit: n={c.n} m={c.m} gates={len(c.gates)} batch={args.batch}")

    backends = {"numpy": _kernels_py}
    if _compiled is not None:
        backends["cython"] = _compiled
    else:
        print("compiled extension not available; timing the fallback only")

    results, times = {}, {}
    for name, mod in backends.items():
        results[name] = _pipeline(mod, comp, turns, p, bloch)
        times[name] = _best_time(lambda: _pipeline(mod, comp, turns, p, bloch), args.repeat)
        rate = args.batch / times[name]
        print(f"{name:>7}: {times[name] * 1e3:9.2f} ms  ({rate:,.0f} points/s)")

    if "cython" in results:
        same = all(np.array_equal(a, b) for a, b in zip(results["numpy"], results["cython"]))
        print(f"outputs identical: {same}")
        print(f"speed-up: {times['numpy'] / times['cython']:.1f}x")


if __name__ == "__main__":
    main()
