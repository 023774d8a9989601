"""Deterministic reference values for the nonlocal functionals.

These are quadrature results, independent of the Monte Carlo estimators
in ``functionals``; the test suite holds the two against each other.

For a convex body E and an interior point x, integrating the kernel
|x - y|^(-(N+s)) radially over the complement gives exit-distance
formulas: with r(x, theta) the distance from x to the boundary along
theta,

    integral over E^c of |x-y|^(-(N+s)) dy
        = (1/s) * integral over S^(N-1) of r(x, theta)^(-s) dtheta.

For the unit square the remaining 3-dim integral collapses further: for
a fixed direction the x-integral of r^(-s) has a closed form, leaving a
single smooth 1-dim integral in the angle. The Riesz self-energy of the
square reduces the same way with kernel exponent alpha - N.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad


def _square_angular_terms(theta, expo):
    """integral over the unit square of r_exit(x, theta)^expo dx.

    Valid for theta in (0, pi/4]; the exit side is x1 = 1 or x2 = 1 and
    both contributions are elementary. expo > -1.
    """
    co = math.cos(theta)
    si = math.sin(theta)
    ta = si / co
    # int_0^1 u^expo (1 - u t) du and the mirrored strip below the diagonal
    term_a = co ** (-expo) * (1.0 / (expo + 1.0) - ta / (expo + 2.0))
    term_b = si ** (-expo) * ta ** (expo + 1.0) * (1.0 / (expo + 1.0) - 1.0 / (expo + 2.0))
    return term_a + term_b


def fractional_perimeter_unit_square(s: float) -> float:
    """Fractional s-perimeter of the unit square, s in (0, 1)."""
    if not 0.0 < s < 1.0:
        raise ValueError("s must be in (0, 1)")
    val, _ = quad(lambda th: _square_angular_terms(th, -s), 0.0, math.pi / 4.0, epsabs=1e-12)
    return 8.0 * val / s


def riesz_energy_unit_square(alpha: float) -> float:
    """Riesz self-energy of the unit square with kernel |x-y|^(alpha-2)."""
    if not 0.0 < alpha < 2.0:
        raise ValueError("alpha must be in (0, 2)")
    val, _ = quad(lambda th: _square_angular_terms(th, alpha), 0.0, math.pi / 4.0, epsabs=1e-12)
    return 8.0 * val / alpha


def fractional_perimeter_ball(s: float, radius: float = 1.0, dim: int = 3) -> float:
    """Fractional s-perimeter of a ball in R^3 by 2-dim quadrature."""
    if dim != 3:
        raise ValueError("only the 3-dimensional ball is tabulated")
    if not 0.0 < s < 1.0:
        raise ValueError("s must be in (0, 1)")
    R = float(radius)

    def exit_dist(a, psi):
        # |x| = a, direction at angle psi from the outward radial direction
        return math.sqrt(R * R - (a * math.sin(psi)) ** 2) - a * math.cos(psi)

    def shell(a):
        inner, _ = quad(
            lambda psi: exit_dist(a, psi) ** (-s) * math.sin(psi),
            0.0,
            math.pi,
            epsabs=1e-11,
            limit=200,
        )
        return 4.0 * math.pi * a * a * 2.0 * math.pi * inner

    val, _ = quad(shell, 0.0, R, epsabs=1e-10, limit=200)
    return val / s


def monte_carlo_volume(P, samples: int, seed: int):
    """Rejection-sampling volume estimate (value, stderr) for a Polytope."""
    from .polytope import contains

    rng = np.random.default_rng(seed)
    lo = P.vertices.min(axis=0)
    hi = P.vertices.max(axis=0)
    box_vol = float(np.prod(hi - lo))
    pts = rng.random((samples, P.dim)) * (hi - lo) + lo
    frac = float(contains(P, pts).mean())
    stderr = box_vol * math.sqrt(max(frac * (1 - frac), 1e-12) / samples)
    return box_vol * frac, stderr
