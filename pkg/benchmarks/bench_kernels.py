"""Compare the numba kernels with the plain-Python fallback.

Each mode runs in its own interpreter because the switch is read at
import time. Outputs are hashed so the table also confirms the two paths
agree bit for bit.

    python benchmarks/bench_kernels.py [--samples 2000] [--repeat 3]
"""
import argparse
import hashlib
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import hashlib, json, sys, time
import numpy as np
from rwcollide.chain import SpeedTriple
from rwcollide.families import build_family
from rwcollide.montecarlo import USE_NUMBA, occupation_check, simulate_races

samples, repeat = int(sys.argv[1]), int(sys.argv[2])
cases = [
    ("race complete(16) (1,1,0)", lambda n: simulate_races(build_family("complete", 16), SpeedTriple(1, 1, 0), n, seed=1, t_max=1e6)),
    ("race cycle(32) (1,0.5,2)", lambda n: simulate_races(build_family("cycle", 32), SpeedTriple(1, 0.5, 2), n, seed=2, t_max=1e6)),
    ("race trap(20) (1,0,1)", lambda n: simulate_races(build_family("trap", 20), SpeedTriple(1, 0, 1), n, seed=3, t_max=1e8)),
    ("occupation hypercube(3)", lambda n: occupation_check(build_family("hypercube", 3), SpeedTriple(1, 1, 1), n, seed=4, t_max=1e6)),
]
out = {"numba": USE_NUMBA, "cases": []}
for name, fn in cases:
    fn(200)  # compile / warm caches
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = fn(samples)
        best = min(best, time.perf_counter() - t0)
    if hasattr(res, "codes"):
        blob = res.codes.tobytes() + res.t_good.tobytes() + res.t_bad.tobytes()
        events = int(res.events.sum())
    else:
        blob = res.occupation.tobytes() + np.float64(res.tau.mean).tobytes()
        events = None
    out["cases"].append({"name": name, "seconds": best, "digest": hashlib.sha256(blob).hexdigest()[:16], "events": events})
print(json.dumps(out))
"""


def run_mode(disable: bool, samples: int, repeat: int) -> dict:
    env = dict(os.environ, RWCOLLIDE_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", WORKER, str(samples), str(repeat)], env=env,
                          capture_output=True, text=True)
    if proc.returncode:
        raise SystemExit(f"worker failed ({'fallback' if disable else 'numba'}):\n{proc.stderr}")
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="also write the raw timings here")
    args = ap.parse_args(argv)

    fast = run_mode(False, args.samples, args.repeat)
    slow = run_mode(True, args.samples, args.repeat)
    if not fast["numba"]:
        print("numba is not importable; both columns use the fallback")
    print(f"{'case':32s} {'numba s':>10s} {'python s':>10s} {'speedup':>8s}  same output")
    same_all = True
    for f, s in zip(fast["cases"], slow["cases"]):
        same = f["digest"] == s["digest"]
        same_all &= same
        print(f"{f['name']:32s} {f['seconds']:10.4f} {s['seconds']:10.4f} {s['seconds'] / f['seconds']:8.1f}x  {same}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"samples": args.samples, "numba": fast, "python": slow}, fh, indent=2)
    digest = hashlib.sha256(json.dumps([c["digest"] for c in fast["cases"]]).encode()).hexdigest()[:12]
    print(f"outputs identical across paths: {same_all} (digest {digest})")
    return 0 if same_all else 1


if __name__ == "__main__":
    sys.exit(main())
