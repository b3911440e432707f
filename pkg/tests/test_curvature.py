"""Menger curvature kernel, triple-integral energies, Cauchy transforms."""

import math
from math import comb

import numpy as np
import pytest

from cantorlab import (
    ResourceLimitError,
    SingularityError,
    SimilarityMap,
    build_ifs,
    cauchy_transform,
    cauchy_truncations,
    curvature_energy,
    curvature_profile,
    default_r_grid,
    maximal_cauchy,
    menger_curvature,
    natural_measure,
    preset,
)
from cantorlab.potential import rng_stream

from _oracles import curvature_squared, energy_numpy_loop, energy_python_loop
from test_potential import uniform_circle_measure


def golden_repeller():
    return build_ifs(
        [SimilarityMap(0.5, 0.0, -0.5 + 0j), SimilarityMap(0.25, 0.0, 0.75 + 0j)],
        root_center=0j,
        root_radius=1.3,
    )


# -- kernel -------------------------------------------------------------------


def test_collinear_points_have_zero_curvature():
    assert menger_curvature(0j, 0.5 + 0j, 1.0 + 0j) == 0.0
    assert menger_curvature(1j, 2j, 5j) == 0.0


def test_equilateral_triangle_curvature():
    third = complex(0.5, math.sqrt(3.0) / 2.0)
    assert menger_curvature(0j, 1.0 + 0j, third) == pytest.approx(
        math.sqrt(3.0), rel=1e-12
    )


def test_right_isoceles_curvature_is_inverse_circumradius():
    assert menger_curvature(0j, 1.0 + 0j, 1j) == pytest.approx(
        math.sqrt(2.0), rel=1e-12
    )


def test_coincident_points_raise():
    with pytest.raises(SingularityError):
        menger_curvature(1j, 1j, 2j)


def test_kernel_matches_area_formula_and_symmetries():
    rng = rng_stream(21, 0)
    pts = rng.normal(size=(10_000, 3)) + 1j * rng.normal(size=(10_000, 3))
    c = menger_curvature(pts[:, 0], pts[:, 1], pts[:, 2])
    expected = np.array(
        [curvature_squared(u, v, w) for u, v, w in pts]
    )
    assert np.allclose(c**2, expected, rtol=1e-10, atol=1e-12)
    permuted = menger_curvature(pts[:, 2], pts[:, 0], pts[:, 1])
    assert np.allclose(c, permuted, rtol=1e-12)
    scaled = menger_curvature(2.5 * pts[:, 0], 2.5 * pts[:, 1], 2.5 * pts[:, 2])
    assert np.allclose(scaled, c / 2.5, rtol=1e-12)


# -- exact energy ----------------------------------------------------------------


def test_four_corner_generation_one_energy(corner):
    est = curvature_energy(natural_measure(corner, 1))
    assert est.mode == "exact"
    assert est.triples == 4
    assert est.stderr == 0.0
    assert est.value == pytest.approx(4.0 / 3.0, rel=1e-12)


def test_collinear_measure_has_zero_energy(thirds):
    est = curvature_energy(natural_measure(thirds, 3))
    assert est.value == 0.0


def test_uniform_circle_energy_counts_triples():
    em = uniform_circle_measure(0)
    em50 = em.__class__(
        codes=np.zeros((50, 1), dtype=np.uint8),
        points=np.exp(2j * np.pi * np.arange(50) / 50.0),
        weights=np.full(50, 0.02),
        shape_name="circle",
    )
    est = curvature_energy(em50)
    expected = 6.0 * comb(50, 3) / 50.0**3
    assert est.value == pytest.approx(expected, rel=1e-12)


def test_exact_energy_agrees_with_independent_loops(corner):
    em = natural_measure(corner, 2)
    est = curvature_energy(em)
    assert est.value == pytest.approx(energy_python_loop(em.points, em.weights),
                                      rel=1e-12)
    em_uneven = natural_measure(golden_repeller(), 3)
    assert len(set(np.round(em_uneven.weights, 12))) > 1
    est2 = curvature_energy(em_uneven)
    assert est2.value == pytest.approx(
        energy_python_loop(em_uneven.points, em_uneven.weights), rel=1e-12
    )
    assert est2.value == pytest.approx(
        energy_numpy_loop(em_uneven.points, em_uneven.weights), rel=1e-12
    )


def test_exact_energy_thread_count_is_invisible(corner):
    em = natural_measure(corner, 3)
    one = curvature_energy(em, threads=1)
    four = curvature_energy(em, threads=4)
    assert one.value == four.value


def test_exact_mode_atom_cap(corner):
    with pytest.raises(ResourceLimitError):
        curvature_energy(natural_measure(corner, 6))


def test_energy_needs_three_atoms(corner):
    with pytest.raises(ValueError):
        curvature_energy(natural_measure(corner, 0))
    with pytest.raises(ValueError):
        curvature_energy(natural_measure(corner, 2), mode="midpoint")


# -- sampled energy ----------------------------------------------------------------


def test_sampled_energy_is_consistent_with_exact(corner):
    em = natural_measure(corner, 3)
    exact = curvature_energy(em)
    sampled = curvature_energy(em, mode="sampled", n_triples=200_000, seed=0)
    assert sampled.mode == "sampled"
    assert sampled.stderr > 0.0
    assert abs(sampled.value - exact.value) < 4.0 * sampled.stderr
    assert sampled.stderr < 0.05 * exact.value


def test_sampled_energy_is_seed_deterministic(corner):
    em = natural_measure(corner, 3)
    a = curvature_energy(em, mode="sampled", n_triples=20_000, seed=7)
    b = curvature_energy(em, mode="sampled", n_triples=20_000, seed=7)
    c = curvature_energy(em, mode="sampled", n_triples=20_000, seed=8)
    assert a.value == b.value
    assert a.value != c.value


# -- generation profile ---------------------------------------------------------------


def test_profile_grows_on_plane_filling_corners(corner):
    prof = curvature_profile(corner, 3)
    assert prof.ks == (1, 2, 3)
    assert all(e.mode == "exact" for e in prof.estimates)
    assert prof.values[0] == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert all(d > 0 for d in prof.increments)


def test_profile_stays_zero_on_a_line(thirds):
    prof = curvature_profile(thirds, 4)
    assert prof.ks == (2, 3, 4)
    assert prof.values == (0.0, 0.0, 0.0)


def test_profile_skips_generations_with_too_few_atoms():
    prof = curvature_profile(golden_repeller(), 3)
    assert prof.ks == (2, 3)


# -- Cauchy transform -------------------------------------------------------------------


def test_cauchy_transform_closed_form_on_circle():
    em = uniform_circle_measure(6)
    n = em.atom_count
    for z in (2.0 + 0j, 1.2 + 0.7j, -0.2 + 0.1j):
        expected = z ** (n - 1) / (z**n + 1.0)
        assert cauchy_transform(em, z) == pytest.approx(expected, rel=1e-12)
    zs = np.array([2.0 + 0j, 3.0 + 1j])
    vals = cauchy_transform(em, zs)
    assert vals.shape == (2,)
    assert vals[0] == pytest.approx(cauchy_transform(em, zs[0]), rel=1e-14)


def test_cauchy_transform_rejects_atom_hit():
    em = uniform_circle_measure(4)
    with pytest.raises(SingularityError):
        cauchy_transform(em, complex(em.points[0]))


def test_truncation_grid_spans_spacing_to_diameter(corner):
    em = natural_measure(corner, 3)
    grid = default_r_grid(em)
    assert np.allclose(grid[1:] / grid[:-1], 2.0)
    assert grid[-1] >= em.diameter
    pts = em.points
    gaps = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(gaps, np.inf)
    assert grid[0] == pytest.approx(gaps.min(), rel=1e-12)


def test_truncations_interpolate_full_and_empty_sums(corner):
    em = natural_measure(corner, 3)
    z = 2.0 + 0.5j
    r_grid = np.array([1e-9, 10.0])
    _, vals = cauchy_truncations(em, z, r_grid)
    assert vals[0] == pytest.approx(cauchy_transform(em, z), rel=1e-12)
    assert vals[1] == 0.0


def test_truncations_match_direct_masked_sums(corner):
    em = natural_measure(corner, 3)
    z = complex(em.points[5]) + 0.01 + 0.003j
    r_grid = default_r_grid(em)
    _, vals = cauchy_truncations(em, z, r_grid)
    for r, v in zip(r_grid, vals):
        keep = np.abs(em.points - z) > r
        direct = np.sum(em.weights[keep] / (z - em.points[keep]))
        assert v == pytest.approx(direct, abs=1e-12)


def test_truncations_tolerate_atom_hit(corner):
    em = natural_measure(corner, 2)
    z = complex(em.points[3])
    r_grid, vals = cauchy_truncations(em, z)
    assert np.isfinite(vals).all()
    keep = np.abs(em.points - z) > r_grid[0]
    direct = np.sum(em.weights[keep] / (z - em.points[keep]))
    assert vals[0] == pytest.approx(direct, abs=1e-12)


def test_maximal_cauchy_is_grid_maximum(corner):
    em = natural_measure(corner, 3)
    z = 0.31 + 0.17j
    r_grid = default_r_grid(em)
    _, vals = cauchy_truncations(em, z, r_grid)
    assert maximal_cauchy(em, z, r_grid) == pytest.approx(
        np.max(np.abs(vals)), rel=1e-14
    )
