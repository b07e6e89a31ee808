"""Compare the compiled marking kernel with the pure-Python fallback.

Each backend runs in its own interpreter so that ``PRSBUCHI_PURE`` is
honoured at import time.

    python benchmarks/bench_kernel.py [--repeat N]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, random, time
from prsbuchi.petri import kernel
from prsbuchi.petri.net import Net, Transition
from prsbuchi.petri.engine import coverability, explore

rng = random.Random(7)
nets = []
for _ in range(200):
    n = rng.randint(2, 4)
    ts = []
    for i in range(rng.randint(2, 5)):
        pre = [rng.randint(0, 1) for _ in range(n)]
        pre[rng.randrange(n)] = 1
        ts.append(Transition(tuple(pre), tuple(rng.randint(0, 2) for _ in range(n)), "a", False, f"t{i}"))
    nets.append(Net(tuple(f"p{k}" for k in range(n)), tuple(ts)))

def run():
    for net in nets:
        n = len(net.places)
        init = tuple([1] + [0] * (n - 1))
        explore(net, init, budget=20000)
        coverability(net, init, tuple([0] * (n - 1) + [2]))
    ms = [tuple(rng.randint(0, 5) for _ in range(4)) for _ in range(200000)]
    pre, post = (1, 0, 1, 0), (0, 2, 0, 1)
    for m in ms:
        kernel.fire(m, pre, post)
        kernel.leq(pre, m)

best = float("inf")
for _ in range(REPEAT):
    t0 = time.perf_counter()
    run()
    best = min(best, time.perf_counter() - t0)
print(json.dumps({"backend": kernel.BACKEND, "seconds": best}))
"""


def measure(pure: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("PRSBUCHI_PURE", None)
    if pure:
        env["PRSBUCHI_PURE"] = "1"
    out = subprocess.run([sys.executable, "-c", WORKLOAD.replace("REPEAT", str(repeat))],
                         env=env, check=True, capture_output=True, text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    pure = measure(True, args.repeat)
    fast = measure(False, args.repeat)
    print(f"{pure['backend']:>9}: {pure['seconds']:.3f} s")
    print(f"{fast['backend']:>9}: {fast['seconds']:.3f} s")
    if fast["backend"] == "compiled":
        print(f"  speedup: {pure['seconds'] / fast['seconds']:.2f}x")
    else:
        print("  compiled kernel not built; both runs used the pure-Python kernel")


if __name__ == "__main__":
    main()
