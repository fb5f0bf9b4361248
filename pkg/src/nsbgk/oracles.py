"""Closed-form and brute-force reference values.

Nothing here calls the solver; the tests compare the numerical path against
these values.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def unit_ball_volume(d):
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def gaussian_moments(rho=1.0, U=0.0, T=1.0, d=3):
    """(m0, m1, m2) of rho (2 pi T)^(-d/2) exp(-|v-U|^2/2T); U is taken along the first axis."""
    d = int(d)
    m1 = [rho * U] + [0.0] * (d - 1)
    return {"m0": rho, "m1": m1, "m2": rho * (U**2 + d * T)}


def mixture_moments(w=0.5, s=2.0, T=1.0, d=1):
    """Moments of w G(s e1, T) + (1 - w) G(-s e1, T) with unit total mass."""
    d = int(d)
    U = w * s - (1 - w) * s
    m2 = s**2 + d * T
    T_mix = (m2 - U**2) / d
    return {"m0": 1.0, "m1": [U] + [0.0] * (d - 1), "m2": m2, "T": T_mix}


def taylor_green(mu=0.1, t=1.0):
    return {"amplitude": math.exp(-2 * mu * t)}


def ball_moments(k=1.0, d=3):
    """int_{|v| <= 1} |v|^k dv."""
    d = int(d)
    return {"value": d * unit_ball_volume(d) / (k + d)}


def bgk_homogeneous(t=1.0, s=2.0, T=1.0, v=0.0):
    """Relaxation of a symmetric two-bump 1-D mixture towards its Maxwellian."""

    def g(vv, m, TT):
        return math.exp(-((vv - m) ** 2) / (2 * TT)) / math.sqrt(2 * math.pi * TT)

    f0 = 0.5 * (g(v, s, T) + g(v, -s, T))
    M = g(v, 0.0, T + s**2)
    return {"f": math.exp(-t) * f0 + (1 - math.exp(-t)) * M, "f0": f0, "M": M}


def lemma_constant(d=3, samples=200001):
    """Constant in rho <= C ||f||_inf T^(d/2): closed form and a brute-force radius scan.

    For T = 1 the split bound is w_d R^d / (1 - d / R^2), minimized over R > sqrt(d).
    """
    d = int(d)
    w = unit_ball_volume(d)
    closed = w * 2 ** (d / 2) * (1 + d / 2) ** ((d + 2) / 2)
    R = np.linspace(math.sqrt(d) * 1.0001, 10.0 * math.sqrt(d), int(samples))
    scan = float(np.min(w * R**d / (1 - d / R**2)))
    return {"closed_form": closed, "radius_scan": scan}


def gaussian_entropy(rho=1.0, T=1.0, d=3, volume=1.0):
    """int f ln f for a spatially uniform Maxwellian on a box of the given volume."""
    d = int(d)
    return {"H": rho * (math.log(rho * (2 * math.pi * T) ** (-d / 2)) - d / 2) * volume}


def cutoff_mass(epsilon=0.25, T=1.0):
    """1-D int gamma(v) G(0, T) dv with the quintic smoothstep cut-off, by adaptive quadrature."""

    def gamma(v):
        r = min(max(2 * epsilon * abs(v) - 1, 0.0), 1.0)
        return 1 - r**3 * (10 - 15 * r + 6 * r**2)

    def integrand(v):
        return gamma(v) * math.exp(-v * v / (2 * T)) / math.sqrt(2 * math.pi * T)

    lim = 1 / epsilon
    val, _ = integrate.quad(integrand, -lim, lim, points=[-lim / 2, lim / 2], epsabs=1e-14, epsrel=1e-13)
    return {"value": val}


ORACLES = {
    "gaussian_moments": gaussian_moments,
    "mixture_moments": mixture_moments,
    "taylor_green": taylor_green,
    "ball_moments": ball_moments,
    "bgk_homogeneous": bgk_homogeneous,
    "lemma_constant": lemma_constant,
    "gaussian_entropy": gaussian_entropy,
    "cutoff_mass": cutoff_mass,
}
