#!/usr/bin/env python3
"""Fourier coefficients of an even Maass cusp form for SL(2,Z) by Hejhal's method.

The spectral parameter is an input (default: the first even form). For a fixed
height Y below the fundamental domain, phi(x + iY) sampled at Q points is
pulled back into the fundamental domain; equating the two Fourier expansions
gives a linear system for a_2..a_M with a_1 = 1. Two heights are solved and
compared; the output keeps the n where they agree.

usage: gen_maass_sample.py [--r R] [--n N] [--out data/maass_even_r13.78.txt]
"""
import argparse
import sys

import mpmath as mp


def pullback(x, y):
    # reduce x + iy into |x| <= 1/2, |z| >= 1
    while True:
        x = x - mp.floor(x + mp.mpf(1) / 2)
        if x * x + y * y >= 1:
            return x, y
        d = x * x + y * y
        x, y = -x / d, y / d


def solve(r, M, Y, Q):
    ir = mp.mpc(0, r)
    scale = mp.e ** (mp.pi * r / 2)

    def W(n, y):
        return mp.sqrt(y) * mp.re(mp.besselk(ir, 2 * mp.pi * n * y)) * scale

    xs = [(m - mp.mpf(1) / 2) / (2 * Q) for m in range(1, 2 * Q + 1)]
    xs = [x - mp.mpf(1) / 2 for x in xs]
    pts = [pullback(x, Y) for x in xs]
    # V[n][l] = (1/2Q) sum_m W(l, y*) cos(2 pi l x*) cos(2 pi n x_m)
    Wstar = [[W(l, y) * mp.cos(2 * mp.pi * l * x) for (x, y) in pts] for l in range(1, M + 1)]
    A = mp.matrix(M - 1, M - 1)
    b = mp.matrix(M - 1, 1)
    for ni, n in enumerate(range(2, M + 1)):
        cn = [mp.cos(2 * mp.pi * n * x) for x in xs]
        for l in range(1, M + 1):
            v = mp.fsum(Wstar[l - 1][m] * cn[m] for m in range(2 * Q)) / Q
            if l == n:
                v -= W(n, Y)
            if l == 1:
                b[ni] = -v
            else:
                A[ni, l - 2] = v
    sol = mp.lu_solve(A, b)
    return [mp.mpf(1)] + [sol[i] for i in range(M - 1)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--r", default="13.779751351890738")
    ap.add_argument("--n", type=int, default=130)
    ap.add_argument("--dps", type=int, default=20)
    ap.add_argument("--heights", default="0.04,0.037")
    ap.add_argument("--out", default="data/maass_even_r13.78.txt")
    args = ap.parse_args()
    mp.mp.dps = args.dps
    r = mp.mpf(args.r)

    runs = []
    heights = [mp.mpf(h) for h in args.heights.split(",")]
    for Y in heights:
        M = int(mp.ceil((r + 45) / (2 * mp.pi * Y)))
        runs.append(solve(r, M, Y, M + 16))
        print("Y=%s M=%d done" % (Y, M), file=sys.stderr)
    N = min(args.n, len(runs[0]), len(runs[1]))
    worst = max(abs(runs[0][i] - runs[1][i]) for i in range(N))
    print("max difference between heights over n <= %d: %s" % (N, mp.nstr(worst, 3)), file=sys.stderr)

    with open(args.out, "w") as f:
        f.write("# source: first even Maass cusp form for SL(2,Z); spectral parameter from "
                "D. A. Hejhal, 'Eigenvalues of the Laplacian for Hecke triangle groups', "
                "Mem. AMS 469 (1992) and the LMFDB tables of Maass forms on SL(2,Z) (r = 13.7797513518907...)\n")
        f.write("# source: coefficients recomputed by tools/gen_maass_sample.py (Hejhal's method, heights %s, "
                "agreement %s)\n" % (" and ".join(args.heights.split(",")), mp.nstr(worst, 3)))
        f.write("r %s\n" % args.r)
        f.write("parity even\n")
        for n in range(1, N + 1):
            f.write("%d %s\n" % (n, mp.nstr(runs[0][n - 1], 16, min_fixed=-mp.inf, max_fixed=mp.inf)))


if __name__ == "__main__":
    main()
