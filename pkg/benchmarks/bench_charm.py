"""Compare the compiled snake kernels against the pure-numpy fallback.

The fallback is selected by the ALGMECH_NO_NUMBA environment variable, which
must be set before the package is imported, so this script re-executes itself
once with the flag set and reports both timings.

Usage: python benchmarks/bench_charm.py [N_SEGMENTS] [T_END]
"""

import os
import subprocess
import sys
import time


def bench(n_segments, t_end):
    import numpy as np

    from algmech.snake import HeadCurve, SnakeConfig, charm
    from algmech._snake_kernels import USING_NUMBA

    rng = np.random.default_rng(0)
    u = rng.normal(size=(n_segments, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    cfg = SnakeConfig.of(3, n_segments, [1.0] * n_segments, u)
    e0 = cfg.length_array() @ cfg.matrix()
    head = HeadCurve(
        exprs=[
            f"{float(e0[0])!r} + 0.3*t",
            f"{float(e0[1])!r} - 0.1*t",
            f"{float(e0[2])!r} + 0.2*t",
        ]
    )

    charm(cfg, head, 0.01, 1e-3)  # warm-up (includes JIT compilation)
    t0 = time.perf_counter()
    traj = charm(cfg, head, t_end, 1e-3)
    elapsed = time.perf_counter() - t0
    label = "numba" if USING_NUMBA else "numpy fallback"
    steps = len(traj) - 1
    print(
        f"{label:>14}: {elapsed:.3f} s for {steps} steps "
        f"of N={n_segments} charm ({1e6 * elapsed / steps:.1f} us/step)",
        flush=True,
    )


def main():
    n_segments = int(sys.argv[1]) if len(sys.argv) > 1 else 20
    t_end = float(sys.argv[2]) if len(sys.argv) > 2 else 2.0
    bench(n_segments, t_end)
    if not os.environ.get("ALGMECH_NO_NUMBA"):
        env = dict(os.environ, ALGMECH_NO_NUMBA="1")
        subprocess.run(
            [sys.executable, os.path.abspath(__file__), str(n_segments), str(t_end)],
            env=env,
            check=True,
        )


if __name__ == "__main__":
    main()
