"""Independent reference computations used only by the tests.

These deliberately use different enumeration orders, different accumulation
strategies, and plain-Python arithmetic where feasible, so that agreement
with the package code is evidence rather than tautology.
"""

import itertools
import math

import numpy as np


def curvature_squared(u: complex, v: complex, w: complex) -> float:
    """Squared inverse circumradius via (4 * area / (a * b * c))^2."""
    a = abs(u - v)
    b = abs(v - w)
    c = abs(w - u)
    twice_area = abs(
        (v.real - u.real) * (w.imag - u.imag)
        - (v.imag - u.imag) * (w.real - u.real)
    )
    den = a * b * c
    return (2.0 * twice_area / den) ** 2


def energy_python_loop(points, weights) -> float:
    """Ordered-convention curvature energy by brute itertools enumeration."""
    pts = [complex(p) for p in points]
    ws = [float(x) for x in weights]
    terms = []
    for i, j, k in itertools.combinations(range(len(pts)), 3):
        terms.append(ws[i] * ws[j] * ws[k] * curvature_squared(pts[i], pts[j], pts[k]))
    return 6.0 * math.fsum(terms)


def energy_numpy_loop(points, weights) -> float:
    """Same quantity via a first-index loop with pairwise numpy reductions.

    For each first index i the contribution of all triples i < j < k is a
    masked upper-triangular sum over the remaining points; per-i totals are
    combined with compensated summation.
    """
    z = np.asarray(points, dtype=complex)
    w = np.asarray(weights, dtype=float)
    n = len(z)
    totals = []
    for i in range(n - 2):
        rest = z[i + 1 :]
        wr = w[i + 1 :]
        d = rest - z[i]
        cross = d.real[:, None] * d.imag[None, :] - d.imag[:, None] * d.real[None, :]
        la = np.abs(d)
        lb = np.abs(rest[:, None] - rest[None, :])
        den = (la[:, None] * la[None, :] * lb) ** 2
        num = 4.0 * cross**2 * (wr[:, None] * wr[None, :])
        np.fill_diagonal(den, np.inf)
        # the (j, k) and (k, j) off-diagonal terms coincide, so the full sum
        # is twice the sum over unordered pairs beyond index i
        totals.append(float(w[i] * np.sum(num / den) / 2.0))
    return 6.0 * math.fsum(totals)


def arcsine_cdf(x: np.ndarray) -> np.ndarray:
    """Equilibrium distribution of [-1, 1]: F(x) = 1/2 + arcsin(x) / pi."""
    return 0.5 + np.arcsin(np.clip(x, -1.0, 1.0)) / np.pi


def weighted_ks_distance(positions, weights, cdf) -> float:
    """sup |F_empirical - F| for an atomic distribution on the line."""
    order = np.argsort(positions)
    x = np.asarray(positions)[order]
    cum = np.cumsum(np.asarray(weights)[order])
    target = cdf(x)
    below = np.abs(np.concatenate([[0.0], cum[:-1]]) - target)
    above = np.abs(cum - target)
    return float(max(below.max(), above.max()))


def segment_green_exact(z: complex) -> float:
    """Green's function of the complement of [-1, 1] with pole at infinity."""
    val = z + np.sqrt(z - 1) * np.sqrt(z + 1)
    return float(np.log(np.abs(val)))
