"""Qubit dephasing: closed-form Q against the optimizer's coherent information."""

import argparse

import numpy as np

from opcap.bounds import dephasing_formula
from opcap.channels import dephasing
from opcap.infomeasures import OptimizerConfig, maximize_information


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=21)
    ap.add_argument("--restarts", type=int, default=4)
    ap.add_argument("-o", "--output", default="dephasing.csv")
    args = ap.parse_args()
    cfg = OptimizerConfig(restarts=args.restarts)
    worst = 0.0
    with open(args.output, "w") as fh:
        fh.write("q,formula,optimizer\n")
        for q in np.linspace(0.0, 1.0, args.steps):
            exact = dephasing_formula(q)
            found = maximize_information(dephasing(q), "coherent", cfg).value
            worst = max(worst, abs(found - exact))
            fh.write(f"{q:.12g},{exact:.12g},{found:.12g}\n")
    print(f"wrote {args.steps} rows to {args.output}; max deviation {worst:.3e}")


if __name__ == "__main__":
    main()
