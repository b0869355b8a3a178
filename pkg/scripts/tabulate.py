"""Print a family's polynomials P_0..P_n on a grid, with the exact
monomial coefficients of P_n at a rational q."""

import argparse
from fractions import Fraction

import numpy as np

from qortho.polyfam import FamilySpec, coeffs, sequence
from qortho.qcore import support_radius


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("family")
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--q", type=Fraction, default=Fraction(1, 2))
    ap.add_argument("--param", "-p", action="append", default=[], metavar="NAME=VALUE")
    ap.add_argument("--points", type=int, default=9)
    args = ap.parse_args()

    params = {}
    for item in args.param:
        name, _, value = item.partition("=")
        params[name] = Fraction(value)
    exact = FamilySpec.of(args.family, args.q, **params)
    print(f"{args.family} P_{args.n} coefficients (x^0 .. x^{args.n}):")
    print("  " + ", ".join(str(c) for c in coeffs(exact, args.n)))

    spec = FamilySpec.of(args.family, float(args.q), **{k: float(v) for k, v in params.items()})
    r = support_radius(float(args.q)) if args.q != 1 else 4.0
    xs = np.linspace(-0.95 * r, 0.95 * r, args.points)
    vals = np.real(np.array(sequence(spec, args.n, xs)))
    print("x".rjust(10) + "".join(f"P{j}".rjust(14) for j in range(args.n + 1)))
    for i, x in enumerate(xs):
        print(f"{x:10.4f}" + "".join(f"{vals[j, i]:14.6g}" for j in range(args.n + 1)))


if __name__ == "__main__":
    main()
