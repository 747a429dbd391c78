"""Normal vs first- and second-order approximations on the bundled experiments.

Runs each preset over its sample-size ladder and prints the sup distances,
writing CSV/SVG artifacts under ``demo-out/``.  Pass ``--reps`` to trade
accuracy for speed.
"""
import argparse

from edgeworth import simulate
from edgeworth.config import PRESETS
from edgeworth.report import write_simulation


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=20000)
    ap.add_argument("--out", default="demo-out")
    args = ap.parse_args()
    print(f"{'preset':26s} {'n':>4s} {'D_normal':>9s} {'D_order1':>9s} {'D_order2':>9s}")
    for name, preset in PRESETS.items():
        for n in preset.n_values:
            rep = simulate(preset.config(n, seed=0, reps=args.reps))
            d = rep.distances
            print(f"{name:26s} {n:4d} {d['normal']:9.4f} {d['order1']:9.4f} {d['order2']:9.4f}")
            write_simulation(rep, f"{args.out}/{name}", stem=f"n{n}")


if __name__ == "__main__":
    main()
