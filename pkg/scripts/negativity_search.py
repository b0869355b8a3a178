"""Grid search for a positive definite correlation triple at which the
q-Kibble-Slepian sum g(x1, x2, x3) is negative."""

import argparse

from qortho.kernels.kibble import REPRESENTATIONS, kibble_slepian, negativity_search


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=0.5)
    ap.add_argument("--rho", type=float, nargs="+", default=[-0.6, -0.3, 0.0, 0.3, 0.6],
                    help="candidate values for each rho_ij")
    ap.add_argument("--x-points", type=int, default=9, help="grid points per coordinate")
    args = ap.parse_args()

    pt = negativity_search(q=args.q, rho_values=tuple(args.rho), x_points=args.x_points)
    if pt is None:
        print("no negative value found on the grid")
        return 1
    ks = pt.ks
    print(f"rho = ({ks.rho12}, {ks.rho13}, {ks.rho23}), positive definite: {ks.gaussian_pd}")
    print(f"x = {tuple(round(v, 6) for v in pt.x)}")
    for rep in REPRESENTATIONS:
        v = kibble_slepian(*pt.x, ks, args.q, representation=rep)
        print(f"  {rep:11s} g = {v.value:.12g}  ({v.terms} terms, converged={v.converged})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
