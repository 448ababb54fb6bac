"""Reference values for the first-exit analytics.

Survival comes from integrating the wedge transition density over the wedge
(scipy dblquad), not from the closed-form series, so it checks the series
independently. Bessel values come from mpmath at 30 digits.

Run: python3 tests/oracles/wedge_oracle.py
"""

import math

import mpmath as mp
import numpy as np
from scipy import integrate, special

mp.mp.dps = 30


def geometry(x, y, sb, sa, rho):
    zb, za = x / sb, y / sa
    s = math.sqrt(1 - rho * rho)
    alpha = math.atan2(s, -rho)
    # W-space: W1 = (Zb - rho Za)/s, W2 = Za; ask axis (Za = 0) on angle 0
    w1, w2 = (zb - rho * za) / s, za
    return alpha, math.atan2(w2, w1), math.hypot(w1, w2), np.array([w1, w2])


def density_survival(t, x, y, sb=1.0, sa=1.0, rho=0.0, drift=(0.0, 0.0), nmax=400):
    alpha, th0, r0, w0 = geometry(x, y, sb, sa, rho)
    s = math.sqrt(1 - rho * rho)
    mb, ma = drift[0] / sb, drift[1] / sa
    c = np.array([(mb - rho * ma) / s, ma])

    def kernel(theta, r):
        tot = 0.0
        for n in range(1, nmax + 1):
            nu = n * math.pi / alpha
            term = math.sin(nu * th0) * math.sin(nu * theta) * special.ive(nu, r * r0 / t)
            tot += term
            if n > 10 and abs(term) < 1e-16:
                break
        g = 2.0 / (alpha * t) * r * math.exp(-(r - r0) ** 2 / (2 * t)) * tot
        if c.any():
            w = np.array([r * math.cos(theta), r * math.sin(theta)])
            g *= math.exp(c @ (w - w0) - c @ c * t / 2)
        return g

    top = r0 + abs(np.linalg.norm(c)) * t + 12 * math.sqrt(t)
    lo = max(0.0, r0 - np.linalg.norm(c) * t - 12 * math.sqrt(t))
    val, err = integrate.dblquad(kernel, lo, top, 0.0, alpha, epsabs=1e-11, epsrel=1e-10)
    return val


def p_up(x, y, sb, sa, rho):
    alpha, th0, _, _ = geometry(x, y, sb, sa, rho)
    return 1 - th0 / alpha


def main():
    print("# bessel_ie(nu, z) from mpmath")
    for nu, z in [(0.0, 0.0), (0.5, 1e-3), (1.5, 0.7), (2.0 / 3, 3.0), (7.3, 12.0), (40.5, 5.0),
                  (3.25, 80.0), (0.75, 400.0), (120.0, 900.0)]:
        v = mp.besseli(nu, z) * mp.e ** (-z)
        print(f"  {{{nu!r}, {z!r}, {mp.nstr(v, 20)}}},")

    print("# p_up(x, y) closed form, unit scales")
    for x, y, rho in [(1, 1, 0.0), (math.sqrt(3), 1, 0.0), (1, 2, -0.7), (2, 0.5, 0.5), (0.7, 3.1, 0.3)]:
        print(f"  {{{x!r}, {y!r}, {rho!r}, {p_up(x, y, 1, 1, rho)!r}}},")

    print("# driftless survival, density integration")
    for t, x, y, rho in [(1.0, 1.0, 1.0, 0.0), (0.5, 1.0, 1.7, -0.5), (2.0, 1.5, 0.8, 0.5), (4.0, 1.0, 1.0, -0.7)]:
        print(f"  {{{t!r}, {x!r}, {y!r}, {rho!r}, {density_survival(t, x, y, rho=rho)!r}}},")

    print("# drifted survival, sigma_b=0.6 sigma_a=0.5 rho=-0.4 drift=(-0.3, 0.2)")
    for t, x, y in [(0.5, 1.0, 1.2), (1.0, 1.0, 1.2), (2.0, 1.0, 1.2), (1.0, 2.0, 0.7)]:
        v = density_survival(t, x, y, sb=0.6, sa=0.5, rho=-0.4, drift=(-0.3, 0.2))
        print(f"  {{{t!r}, {x!r}, {y!r}, {v!r}}},")


if __name__ == "__main__":
    main()
