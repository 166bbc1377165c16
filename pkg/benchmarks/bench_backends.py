"""Wall-clock comparison of the numba and numpy kernel paths.

    python benchmarks/bench_backends.py [--nq 4] [--steps 5] [--shots 20000]

Every case also checks that both paths return identical results.
"""
import argparse
import time

import numpy as np

from catsim import _kernels, rng
from catsim.circuit import build_step_circuit
from catsim.coherent import NoiseModel, from_density, sample_shots
from catsim.lattice import gauss
from catsim.stochastic import sample_trajectories


def timed(fn, reps=3):
    fn()  # warm-up, includes jit compilation
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nq", type=int, default=4)
    ap.add_argument("--steps", type=int, default=5)
    ap.add_argument("--shots", type=int, default=20_000)
    ap.add_argument("--px", type=float, default=0.01)
    args = ap.parse_args()

    n = 1 << args.nq
    d = gauss(n / 4, n / 4, n / 8, args.nq)
    step = build_step_circuit(args.nq)
    program = step.repeat(args.steps)
    noise = NoiseModel(args.px, 0.0, 1)
    state = from_density(d)
    wide = np.zeros(1 << program.width, complex)
    wide[: n * n] = state.amplitudes
    tables = _kernels.prefix_tables(program.table, wide.size)
    keys = rng.trajectory_keys(1, 0, args.shots)
    u = rng.uniforms(1, rng.SHOT, args.shots)

    cases = {
        "classical trajectories": lambda b: sample_trajectories(d, step, noise, args.shots, 1,
                                                               steps=args.steps, backend=b),
        "coherent noiseless evolve": lambda b: _kernels.coherent_noiseless(wide, program.table, b),
        "coherent shots, windowed": lambda b: _kernels.coherent_shots(wide, program.table, keys, args.px,
                                                                      0.0, u, tables, b),
        "coherent shots, gate-by-gate": lambda b: _kernels.coherent_shots(wide, program.table, keys[:2000],
                                                                          args.px, 0.0, u[:2000], None, b),
        "full quantum protocol": lambda b: sample_shots(state, step, noise, args.shots, 1,
                                                        steps=args.steps, backend=b).outcomes,
    }
    print(f"nq={args.nq} steps={args.steps} gates={len(program)} shots={args.shots} p_x={args.px}")
    print(f"{'case':32s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}  same")
    for name, fn in cases.items():
        t_np, r_np = timed(lambda: fn("numpy"), reps=1)
        if _kernels.numba_available():
            t_nb, r_nb = timed(lambda: fn("numba"))
            same = np.array_equal(r_np, r_nb)
            print(f"{name:32s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}  {same}")
        else:
            print(f"{name:32s} {t_np:10.4f} {'-':>10s}")


if __name__ == "__main__":
    main()
