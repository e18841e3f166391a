"""Curves I-IV of the combined Q bounds against t = tau(f ln f), as CSV."""

import argparse

import numpy as np

from opcap.bounds import figure1


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=16, help="output dimension")
    ap.add_argument("--ln-dm", type=float, default=None, help="ln d_M, default ln(m)/4")
    ap.add_argument("--steps", type=int, default=101)
    ap.add_argument("-o", "--output", default="figure1.csv")
    args = ap.parse_args()
    ln_dm = args.ln_dm if args.ln_dm is not None else 0.25 * np.log(args.m)
    table = figure1(ln_dm, args.m, np.linspace(0.0, np.log(args.m), args.steps))
    table.to_csv(args.output)
    print(f"wrote {len(table.grid)} rows to {args.output}")


if __name__ == "__main__":
    main()
