"""Compiled vs pure-Python graph kernels on SL_2(F_q).

    python benchmarks/bench_kernels.py [--repeat N] [--q 13,31,61]

Each kernel runs on both backends with identical inputs; results must agree.
"""
import argparse
import time

from ugrowth.finitegrp import sl2q_make
from ugrowth.finitegrp.kernels import backend


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--q", default="13,31,61")
    ap.add_argument("--expansion-size", type=int, default=3)
    args = ap.parse_args()
    try:
        c = backend("cython")
    except ImportError:
        print("compiled kernels not built; nothing to compare")
        return
    py = backend("python")

    print(f"{'kernel':<16}{'q':>5}{'|G|':>10}{'cython s':>12}{'python s':>12}{'speedup':>10}")
    for q in [int(t) for t in args.q.split(",")]:
        ctx = sl2q_make(q)
        gens = [ctx.mat([[1, 1], [0, 1]]), ctx.mat([[1, 0], [1, 1]])]
        P = ctx.perms(gens)
        e = ctx.index(ctx.identity)
        for name in ("girth", "collision_depth", "orbit_size"):
            tc, rc = best_of(lambda: getattr(c, name)(P, e), args.repeat)
            tp, rp = best_of(lambda: getattr(py, name)(P, e), args.repeat)
            assert rc == rp, (name, q, rc, rp)
            print(f"{name:<16}{q:>5}{ctx.order:>10}{tc:>12.5f}{tp:>12.5f}{tp / tc:>10.1f}")

    ctx = sl2q_make(5)
    gens = [ctx.mat([[1, 2], [0, 1]]), ctx.mat([[1, 0], [2, 1]])]
    P = ctx.perms(gens + [ctx.inv(g) for g in gens], side="left")
    k = args.expansion_size
    tc, rc = best_of(lambda: c.min_expansion(P, k), 1)
    tp, rp = best_of(lambda: py.min_expansion(P, k), 1)
    assert rc == rp, (rc, rp)
    print(f"{'min_expansion':<16}{5:>5}{ctx.order:>10}{tc:>12.5f}{tp:>12.5f}{tp / tc:>10.1f}   |B| <= {k}")


if __name__ == "__main__":
    main()
