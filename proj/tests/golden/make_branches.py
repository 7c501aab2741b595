"""Regenerates branches_m3_s100.csv from the closed form, without the C++ code.

lambda_m(r) / hbar = m for r < ell and m / (1 - (4/pi) arccos(ell/r)) beyond,
sampled at r/ell = k sqrt(2) / samples, k = 0..samples-1.
"""

import math
import sys


def mu(rho):
    if rho < 1.0:
        return 1.0
    return max(0.0, 1.0 - (4.0 / math.pi) * math.acos(min(1.0, 1.0 / rho)))


def fmt(x):
    if x == 0.0:
        x = 0.0
    return "%.12e" % x


def main(m_max=3, samples=100, out=sys.stdout):
    out.write("m,r_over_ell,lambda_over_hbar\n")
    for m in range(-m_max, m_max + 1):
        for k in range(samples):
            rho = math.sqrt(2.0) * k / samples
            lam = 0.0 if m == 0 else m / mu(rho)
            out.write("%d,%s,%s\n" % (m, fmt(rho), fmt(lam)))


if __name__ == "__main__":
    main()
