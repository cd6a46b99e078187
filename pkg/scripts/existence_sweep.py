#!/usr/bin/env python3
"""Sweep the memory exponent and tabulate verdicts against integral flags.

Runs the existence conditions and the dyadic-shell integral for a range of
scalar exponents over white-noise and AR(1) base models; the two columns
should flip together at the 1/2 boundary.
"""
import argparse
import sys

import numpy as np

from fiarma_lab import (
    ArmaModel,
    FracIntegrationSpec,
    HilbertGrid,
    OperatorPolynomial,
    check_conditions,
    existence_integral,
    identity,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d-min", type=float, default=-0.4)
    ap.add_argument("--d-max", type=float, default=0.9)
    ap.add_argument("--steps", type=int, default=14)
    ap.add_argument("--eta", type=float, default=1.0)
    ap.add_argument("--ar", type=float, default=0.5)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    grid = HilbertGrid(np.array([0.0]), np.array([1.0]))
    models = {
        "white": ArmaModel(OperatorPolynomial(grid), OperatorPolynomial(grid), identity(grid)),
        "ar1": ArmaModel(
            OperatorPolynomial.scalar(grid, args.ar), OperatorPolynomial(grid), identity(grid)
        ),
    }
    rows = ["model,d,verdict,integral,diverges"]
    for d in np.linspace(args.d_min, args.d_max, args.steps):
        spec = FracIntegrationSpec.scalar(grid, float(d))
        for label, model in models.items():
            report = check_conditions(model, spec)
            integral = existence_integral(model, spec, eta=args.eta)
            rows.append(
                f"{label},{d:.4f},{report.verdict},{integral.value:.6g},{integral.diverges}"
            )

    text = "\n".join(rows) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
