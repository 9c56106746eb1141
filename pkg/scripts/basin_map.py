"""Basins of attraction of the scalar eigenvalue flow, as CSV on stdout."""
import argparse

import numpy as np

from attractor_lab import prequantum as pq


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eigenvalues", default="1,2")
    ap.add_argument("--kappa", type=float, default=1.0)
    ap.add_argument("--range", default="0,3", help="omega0 interval")
    ap.add_argument("--n", type=int, default=301)
    ap.add_argument("--t-max", type=float, default=80.0)
    args = ap.parse_args()

    H = pq.FiniteQuantumSystem.from_eigenvalues([float(e) for e in args.eigenvalues.split(",")])
    lo, hi = map(float, args.range.split(","))
    bm = pq.basin_map(H, args.kappa, np.linspace(lo, hi, args.n), args.t_max)
    print("# repellers: " + " ".join(f"{r:.12g}" for r in H.repellers()))
    print("omega0,fixed_point_index,convergence_time,final_omega")
    for (w, i, t), final in zip(bm.rows(), bm.final_omega):
        print(f"{w:.12g},{i},{t:.6g},{final:.15g}")


if __name__ == "__main__":
    main()
