"""Compare the compiled and pure-Python kernel backends.

Run as: python benchmarks/bench_kernel.py
"""

import time

from nestcast.kernel import _purepy

try:
    from nestcast.kernel import _speedups
except ImportError:
    _speedups = None

from nestcast.model import build_special_case
from nestcast.plan import EvalPlan


def bench(label, fn, repeat=3):
    best = None
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    print(f"{label:<32} {best:10.4f}s")
    return result


def main():
    model = build_special_case(
        2, 2, 2, nx=2, ny=2, nz=2,
        inner=[["9/10", "1/10"], ["1/10", "9/10"]],
        outer=[["4/5", "1/5"], ["1/5", "4/5"]],
    )
    plan = EvalPlan(model)
    n = plan.markov_class_size()
    print(f"binary instance, horizon 2: {n} encoders, {plan.C} combos per eval")

    enc = [[0] * plan.mdom[t] for t in range(plan.T)]
    reps = 2000
    bench(
        f"eval_cost x{reps} (python)",
        lambda: [_purepy.eval_cost(plan, enc) for _ in range(reps)],
    )
    if _speedups is not None:
        arrays = plan.as_numpy()
        flat = [d for table in enc for d in table]
        bench(
            f"eval_cost x{reps} (compiled)",
            lambda: [
                _speedups.eval_cost_arrays(arrays, "midx", "doffs", flat)
                for _ in range(reps)
            ],
        )

    # full enumeration: restrict the pure backend to a 1/16 slice so the
    # comparison finishes quickly, then scale.
    prefix = (0, 0, 0, 0)
    slice_n = n // plan.nx ** len(prefix)
    r_py = bench(
        f"enumerate {slice_n} encoders (python)",
        lambda: _purepy.enumerate_markov(plan, prefix=prefix),
        repeat=1,
    )
    if _speedups is not None:
        r_cy = bench(
            f"enumerate {n} encoders (compiled)",
            lambda: _speedups.enumerate_markov_arrays(plan.as_numpy(), (), plan.nx),
            repeat=1,
        )
        sliced = _speedups.enumerate_markov_arrays(plan.as_numpy(), prefix, plan.nx)
        assert sliced[:2] == tuple(r_py[:2]), "backends disagree"
        print("backends agree on the shared slice")


if __name__ == "__main__":
    main()
