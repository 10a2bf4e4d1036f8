"""Compare the numba-compiled direct circular convolution against the pure
numpy fallback (and, for context, the FFT path used for power-of-two sizes).

The accelerated path is selected at import time from the DTK_NO_NUMBA
environment flag, so each variant runs in its own subprocess.

Usage: python3 benchmarks/accel_benchmark.py [--dims 256,512,1024,2048] [--reps 20]
"""
from __future__ import annotations

import argparse
import json
import subprocess
import sys
import textwrap

_WORKER = textwrap.dedent("""
    import json, sys, time
    import numpy as np
    from dtk._accel import USING_NUMBA, conv_direct
    from dtk.embedding import circular_convolution

    dims = json.loads(sys.argv[1])
    reps = int(sys.argv[2])
    rng = np.random.default_rng(0)
    rows = []
    for d in dims:
        a = rng.standard_normal(d)
        b = rng.standard_normal(d)
        conv_direct(a, b)  # warm up (triggers JIT compilation if enabled)
        best = min_fft = float("inf")
        for _ in range(5):
            t0 = time.perf_counter()
            for _ in range(reps):
                conv_direct(a, b)
            best = min(best, (time.perf_counter() - t0) / reps)
            t0 = time.perf_counter()
            for _ in range(reps):
                circular_convolution(a, b, method="fast")
            min_fft = min(min_fft, (time.perf_counter() - t0) / reps)
        rows.append({"dim": d, "direct_s": best, "fft_s": min_fft})
    print(json.dumps({"using_numba": USING_NUMBA, "rows": rows}))
""")


def run_variant(no_numba: bool, dims, reps):
    env = {"DTK_NO_NUMBA": "1"} if no_numba else {}
    out = subprocess.run(
        [sys.executable, "-c", _WORKER, json.dumps(dims), str(reps)],
        capture_output=True, text=True, check=True,
        env={**__import__("os").environ, **env})
    return json.loads(out.stdout)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", default="256,512,1024,2048")
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()
    dims = [int(x) for x in args.dims.split(",")]

    numba_res = run_variant(no_numba=False, dims=dims, reps=args.reps)
    numpy_res = run_variant(no_numba=True, dims=dims, reps=args.reps)
    if not numba_res["using_numba"]:
        print("warning: numba unavailable; both columns use the numpy path",
              file=sys.stderr)

    print(f"{'dim':>6} {'numba (ms)':>12} {'numpy (ms)':>12} "
          f"{'speedup':>8} {'fft (ms)':>10}")
    for nb, np_ in zip(numba_res["rows"], numpy_res["rows"]):
        speedup = np_["direct_s"] / nb["direct_s"]
        print(f"{nb['dim']:>6} {nb['direct_s']*1e3:>12.3f} "
              f"{np_['direct_s']*1e3:>12.3f} {speedup:>7.2f}x "
              f"{nb['fft_s']*1e3:>10.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
