"""Regenerate the stored preset parameters (slow; run once).

Each preset is a dyadic parameter inside the cylinder of a long cutting-time
prefix, found by twisted-order bisection and stored as an exact fraction.
The package re-verifies the prefix on load.
"""

import json
import sys
import time
from pathlib import Path

from unimodal_complexity.kneading import parameter_bisection, wild_cutting_times

TARGETS = {
    "fibonacci": ("fibonacci", 27),
    "wild": ("wild", 33),
    "feigenbaum": ("doubling", 19),
}


def target_S(kind: str, K: int):
    if kind == "fibonacci":
        S = [1, 2]
        while len(S) <= K:
            S.append(S[-1] + S[-2])
        return S[: K + 1]
    if kind == "wild":
        return wild_cutting_times(K)[: K + 1]
    return [2**k for k in range(K + 1)]


def main(names):
    out_path = Path(__file__).resolve().parent.parent / "src" / "unimodal_complexity" / "data" / "presets.json"
    for name in names:
        kind, K = TARGETS[name]
        S = target_S(kind, K)
        t0 = time.time()
        enc = parameter_bisection(2, target_S=S, tol=1, prec_cap=8192)
        entry = {"a": f"{enc.a.numerator}/{enc.a.denominator}", "ell": "2", "K": K, "S_K": S[-1]}
        print(name, K, S[-1], float(enc.a), enc.steps, round(time.time() - t0, 1), flush=True)
        # re-read so that concurrent runs for different presets do not clobber
        data = json.loads(out_path.read_text()) if out_path.exists() else {}
        data[name] = entry
        out_path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main(sys.argv[1:] or list(TARGETS))
