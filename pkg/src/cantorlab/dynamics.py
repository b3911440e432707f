"""Symbolic dynamics of sampled measures: entropy, Lyapunov exponent, dimension.

Atom codes are finite words in the branch alphabet, so any empirical measure
induces mass tables on the cylinder partitions of every coarser generation.
Shannon entropies of those tables and the exactly computable Lyapunov
exponent (mean of log 1/scale along words) combine into the dimension
estimate dim = h / lambda, extrapolated over generations and bootstrapped
over walk resamples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BootstrapError, DepthError, FitDegeneracyError
from .geometry import Repeller
from .potential import EmpiricalMeasure, rng_stream

#: a generation enters the extrapolation fit only while its occupied
#: cylinder count stays below samples / OCCUPANCY_FACTOR
OCCUPANCY_FACTOR = 50

#: walk count below which bootstrap intervals are refused
MIN_BOOTSTRAP_SAMPLES = 10_000


@dataclass(frozen=True)
class CylinderMassTable:
    """Masses of the generation-k cylinders under one measure."""

    generation: int
    entries: dict[tuple[int, ...], float]

    @property
    def occupied(self) -> int:
        return len(self.entries)

    @property
    def total(self) -> float:
        return float(sum(self.entries.values()))


def _prefix_index(em: EmpiricalMeasure, k: int):
    if not 1 <= k <= em.code_depth:
        raise DepthError(
            f"generation {k} outside the coded depth 1..{em.code_depth}"
        )
    prefixes, inverse = np.unique(em.codes[:, :k], axis=0, return_inverse=True)
    return prefixes, inverse.ravel()


def cylinder_masses(em: EmpiricalMeasure, k: int) -> CylinderMassTable:
    """Sum atom weights by length-k code prefix."""
    prefixes, inverse = _prefix_index(em, k)
    masses = np.bincount(inverse, weights=em.weights, minlength=len(prefixes))
    entries = {
        tuple(int(c) for c in prefixes[i]): float(masses[i])
        for i in range(len(prefixes))
    }
    return CylinderMassTable(generation=k, entries=entries)


def _plugin_entropy(masses: np.ndarray) -> float:
    m = masses[masses > 0]
    return float(-np.sum(m * np.log(m)))


def entropy_sequence(
    em: EmpiricalMeasure, kmax: int, correction: bool = True
) -> list[float]:
    """Per-letter entropies h_k = H(generation-k masses) / k, in nats.

    With correction on and a sampled measure, the Miller-Madow bias term
    (occupied - 1) / (2 * samples) is added to each H before dividing.
    """
    out = []
    for k in range(1, kmax + 1):
        _, inverse = _prefix_index(em, k)
        masses = np.bincount(inverse, weights=em.weights)
        h = _plugin_entropy(masses)
        if correction and em.samples:
            h += (np.count_nonzero(masses) - 1) / (2.0 * em.samples)
        out.append(h / k)
    return out


def lyapunov_exponent(rep: Repeller, em: EmpiricalMeasure, kmax: int) -> list[float]:
    """Per-letter stretching rates lambda_k for k = 1..kmax.

    lambda_k is the measure-weighted mean of log(1/scale) per letter over
    length-k code words; exact for similarity systems, so any probability
    measure on an equal-scale system gives the same constant.
    """
    if not 1 <= kmax <= em.code_depth:
        raise DepthError(
            f"generation {kmax} outside the coded depth 1..{em.code_depth}"
        )
    log_inv = np.array([-math.log(b.scale) for b in rep.branches])
    codes = em.codes.astype(np.int64)
    out = []
    for k in range(1, kmax + 1):
        word_sum = log_inv[codes[:, :k]].sum(axis=1)
        out.append(float(np.dot(em.weights, word_sum)) / k)
    return out


@dataclass(frozen=True)
class DimensionEstimate:
    """Entropy-over-Lyapunov dimension with bootstrap uncertainty.

    dim is the ratio of the fitted growth slopes of total entropy k * h_k
    and total stretching k * lambda_k over the usable generations; ci is a
    bootstrap 95% interval (degenerate for exact measures).
    """

    ks: tuple[int, ...]
    h: tuple[float, ...]
    lam: tuple[float, ...]
    dim_k: tuple[float, ...]
    fit_ks: tuple[int, ...]
    dim: float
    ci: tuple[float, float]


def _slope_dimension(ks, H_tot, L_tot):
    ks = np.asarray(ks, dtype=float)
    hs = np.polyfit(ks, np.asarray(H_tot), 1)[0]
    ls = np.polyfit(ks, np.asarray(L_tot), 1)[0]
    return float(hs / ls)


def manning_dimension(
    rep: Repeller,
    em: EmpiricalMeasure,
    kmax: int | None = None,
    n_boot: int = 200,
    seed: int = 0,
    correction: bool = True,
) -> DimensionEstimate:
    """Dimension of a measure as entropy rate over Lyapunov exponent.

    Fits total entropy and total stretching linearly in k over generations
    k >= 2 whose occupied-cylinder count stays below samples / 50 (all
    generations for exact measures), and takes the slope ratio.  Sampled
    measures get a 95% bootstrap interval (point estimate +- 1.96 times the
    spread of multinomial walk resamples); fewer than 10^4 walks raise
    BootstrapError.
    """
    if kmax is None:
        kmax = em.code_depth
    if kmax < 2:
        raise FitDegeneracyError("need kmax >= 2 to fit growth slopes")
    ks = list(range(1, kmax + 1))
    log_inv = np.array([-math.log(b.scale) for b in rep.branches])
    codes = em.codes.astype(np.int64)
    inverses, occupied = [], []
    for k in ks:
        _, inv = _prefix_index(em, k)
        inverses.append(inv)
        occupied.append(int(len(np.unique(inv))))

    def profile(weights: np.ndarray):
        hs, ls = [], []
        for k in ks:
            masses = np.bincount(inverses[k - 1], weights=weights)
            h = _plugin_entropy(masses)
            if correction and em.samples:
                h += (np.count_nonzero(masses) - 1) / (2.0 * em.samples)
            hs.append(h)
            ls.append(float(np.dot(weights, log_inv[codes[:, :k]].sum(axis=1))))
        return np.array(hs), np.array(ls)

    H_tot, L_tot = profile(em.weights)
    usable = [
        k
        for k in ks
        if k >= 2
        and (em.samples is None or occupied[k - 1] < em.samples / OCCUPANCY_FACTOR)
    ]
    if len(usable) < 2:
        raise FitDegeneracyError(
            "fewer than 2 generations usable for the slope fit; "
            "raise samples or lower kmax"
        )
    sel = [k - 1 for k in usable]
    dim = _slope_dimension(usable, H_tot[sel], L_tot[sel])
    h_k = tuple(float(H_tot[k - 1] / k) for k in ks)
    lam_k = tuple(float(L_tot[k - 1] / k) for k in ks)
    dim_k = tuple(
        float(H_tot[k - 1] / L_tot[k - 1]) if L_tot[k - 1] > 0 else float("nan")
        for k in ks
    )
    if em.samples is None:
        ci = (dim, dim)
    else:
        if em.samples < MIN_BOOTSTRAP_SAMPLES:
            raise BootstrapError(
                f"{em.samples} walks are too few to bootstrap "
                f"(need {MIN_BOOTSTRAP_SAMPLES})"
            )
        rng = rng_stream(seed, 1)
        dims = np.empty(n_boot)
        for b in range(n_boot):
            counts = rng.multinomial(em.samples, em.weights)
            wb = counts / em.samples
            Hb, Lb = profile(wb)
            dims[b] = _slope_dimension(usable, Hb[sel], Lb[sel])
        # normal-approximation interval: resampling adds a second layer of
        # plug-in entropy bias, so the replicate spread is trustworthy but
        # the replicate location is not; center on the point estimate
        half = 1.96 * float(dims.std(ddof=1))
        ci = (dim - half, dim + half)
    return DimensionEstimate(
        ks=tuple(ks),
        h=h_k,
        lam=lam_k,
        dim_k=dim_k,
        fit_ks=tuple(usable),
        dim=dim,
        ci=ci,
    )
