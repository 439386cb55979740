"""Time the numba kernels against the numpy fallback.

Each backend runs in its own interpreter because the choice is made at
import time from HOMOVAR_NUMBA. Outputs of both are compared elementwise.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys
import tempfile

import numpy as np

WORKER = r"""
import json, sys, time
import numpy as np
from homovar import _kernels

def best(fn, repeat):
    fn()  # warm-up, includes jit compilation
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out

rng = np.random.default_rng(0)
repeat = int(sys.argv[1])
dump = sys.argv[2]
pts = rng.random((256, 2)) * 2 * np.pi
w = np.full(256, 1 / 256, dtype=np.complex128)
freqs = (np.indices((33, 33)).reshape(2, -1).T - 16).astype(np.float64)
batch = rng.random((512, 16, 1)) * 2 * np.pi
f1 = np.arange(-32, 33, dtype=np.float64)[:, None]
ct = rng.uniform(-1, 1, 4000)
st = np.sqrt(1 - ct * ct)
phi = rng.uniform(0, 2 * np.pi, 4000)

cases = {
    "nudft 256 pts x 1089 freqs": lambda: _kernels.nudft(pts, w, freqs),
    "nudft_batch 512 x 16 pts x 65 freqs": lambda: _kernels.nudft_batch(batch, f1),
    "sh_table 4000 pts lmax 32": lambda: _kernels.sh_table(ct, st, phi, 32),
}
res, outs = {}, {}
for name, fn in cases.items():
    t, out = best(fn, repeat)
    res[name] = t
    outs[name] = out
np.savez(dump, **{str(i): o for i, o in enumerate(outs.values())})
print(json.dumps({"backend": _kernels.BACKEND, "times": res}))
"""


def run(flag, repeat, dump):
    env = dict(os.environ, HOMOVAR_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", WORKER, str(repeat), dump], env=env,
                         check=True, capture_output=True, text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    with tempfile.TemporaryDirectory() as tmp:
        a = run("1", args.repeat, os.path.join(tmp, "numba.npz"))
        b = run("0", args.repeat, os.path.join(tmp, "numpy.npz"))
        za, zb = np.load(os.path.join(tmp, "numba.npz")), np.load(os.path.join(tmp, "numpy.npz"))
        diffs = [float(np.max(np.abs(za[k] - zb[k]))) for k in sorted(za.files, key=int)]
    print(f"{'kernel':<40} {a['backend']:>10} {b['backend']:>10} {'speedup':>8} {'max diff':>10}")
    for (name, ta), diff in zip(a["times"].items(), diffs):
        tb = b["times"][name]
        print(f"{name:<40} {ta * 1e3:>8.2f}ms {tb * 1e3:>8.2f}ms {tb / ta:>7.1f}x {diff:>10.1e}")


if __name__ == "__main__":
    main()
