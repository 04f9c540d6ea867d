"""Compare the compiled kernels against the pure-Python fallback.

Usage:  python benchmarks/bench_kernels.py [--repeats 7]

Prints one row per kernel with the best-of-N wall time for each backend
and the speedup factor.  Both backends are imported directly, so this
works no matter which one the package selected at import time.
"""

import argparse
import time

import numpy as np

from sosplab._kernels import _fallback

try:
    from sosplab._kernels import _core
except ImportError:
    _core = None


def best_of(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--size", type=int, default=200_000,
                        help="number of scalar evaluations per component call")
    args = parser.parse_args()

    if _core is None:
        print("compiled backend is not available; showing fallback only")

    rng = np.random.default_rng(0)
    xs = rng.uniform(-4.0, 4.0, args.size)
    Y = rng.uniform(-1.2, 1.2, (2000, 25))
    X = rng.uniform(-2.0, 2.0, (2000, 25))
    c = rng.uniform(-0.5, 0.5, 25)

    def loop_1pt(mod, name):
        fn = getattr(mod, name)
        rows = [np.ascontiguousarray(r) for r in Y[:1000]]

        def run():
            for r in rows:
                fn(r, 1)
        return run

    cases = [
        ("psi_arr(order=1)", "psi_arr", (xs, 1)),
        ("phi_arr(order=2)", "phi_arr", (xs, 2)),
        ("lam_arr(order=2)", "lam_arr", (xs, 2)),
        ("chain_value(eps)", "chain_value", (Y, 0)),
        ("chain_grad(gamma)", "chain_grad", (Y, 1)),
        ("chain_bands(eps)", "chain_bands", (Y, 0)),
        ("lamsum_value", "lamsum_value", (X, c, 0.5)),
        ("lamsum_grad", "lamsum_grad", (X, c, 0.5)),
        # the solvers call the single-point variants in tight loops, which
        # is where interpreter overhead bites the fallback hardest
        ("chain_grad1 x1000", loop_1pt, None),
    ]

    header = f"{'kernel':<20} {'fallback':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for label, name, call_args in cases:
        if call_args is None:
            t_fb = best_of(name(_fallback, "chain_grad1"), (), args.repeats)
            t_c = None if _core is None else best_of(
                name(_core, "chain_grad1"), (), args.repeats)
        else:
            t_fb = best_of(getattr(_fallback, name), call_args, args.repeats)
            t_c = None if _core is None else best_of(
                getattr(_core, name), call_args, args.repeats)
        if t_c is None:
            print(f"{label:<20} {t_fb * 1e3:>10.2f}ms {'-':>12} {'-':>9}")
            continue
        print(f"{label:<20} {t_fb * 1e3:>10.2f}ms {t_c * 1e3:>10.2f}ms "
              f"{t_fb / t_c:>8.1f}x")


if __name__ == "__main__":
    main()
