"""Analytic disk-field correlation: geometry roots, ring integrals, presets.

The reference values are geometry (lens areas, uniform baselines) and
brute-force Monte Carlo estimates computed in the tests themselves.
"""

import math

import numpy as np
import numpy.testing as npt
import pytest

from corrpeaks import (
    CenterCorrelation,
    DiskProfile,
    clustered_centers,
    correlation_toy1,
    exponential_disk,
    hard_core_centers,
    integrate_Io,
    integrate_Is,
    poisson_centers,
    preset_case,
    theta_j_roots,
    top_hat_disk,
)

R = math.radians(1.0)
N_C = 1000.0


def lens_area(theta, radius):
    theta = np.asarray(theta, dtype=float)
    out = np.zeros_like(theta)
    m = theta < 2 * radius
    t = theta[m]
    out[m] = 2 * radius**2 * np.arccos(t / (2 * radius)) - 0.5 * t * np.sqrt(
        4 * radius**2 - t * t
    )
    return out


def case_a_closed_form(theta):
    # top-hat disks, uncorrelated centers: same-disk lens term plus the
    # constant uncorrelated-pair baseline N_c^2 R^4 / 16
    return N_C * lens_area(theta, R) / (4 * math.pi) + N_C**2 * R**4 / 16.0


# ---------------------------------------------------------------------------
# chord geometry


def test_theta_j_roots_lie_on_both_circles():
    rng = np.random.default_rng(3)
    checked = 0
    for _ in range(600):
        theta = rng.uniform(0.0, 2.5) * R
        theta_i = rng.uniform(0.0, 1.0) * R
        theta_o = rng.uniform(0.0, 3.0) * R
        phi_o = rng.uniform(0.0, 2 * math.pi)
        phi_j = rng.uniform(0.0, 2 * math.pi)
        roots = theta_j_roots(theta, theta_i, phi_j, theta_o, phi_o, R)
        x_i = np.array([theta_i, 0.0])
        center = theta_o * np.array([math.cos(phi_o), math.sin(phi_o)])
        for r in roots:
            assert 0.0 <= r <= R
            x_j = center + r * np.array([math.cos(phi_j), math.sin(phi_j)])
            assert abs(np.linalg.norm(x_j - x_i) - theta) < 1e-12
            checked += 1
    assert checked > 80  # the geometry must actually produce solutions


def test_theta_j_roots_single_and_none():
    # separation along the ray: x_i at origin, other center at distance d
    # on the phi_j axis; |x_j - x_i| = d + r = theta has one solution
    d = 0.5 * R
    roots = theta_j_roots(d + 0.25 * R, 0.0, 0.0, d, 0.0, R)
    npt.assert_allclose(roots, [0.25 * R], atol=1e-15)

    # far separation: no point of the other disk can reach
    assert theta_j_roots(4.0 * R, 0.5 * R, 1.0, 1.5 * R, 2.0, R).size == 0


def test_theta_j_roots_empty_beyond_reach():
    rng = np.random.default_rng(9)
    for _ in range(100):
        theta_i = rng.uniform(0, R)
        theta_o = rng.uniform(0, 3 * R)
        theta = theta_i + theta_o + R + rng.uniform(1e-12, R)
        assert theta_j_roots(theta, theta_i, rng.uniform(0, 7), theta_o, 1.3, R).size == 0


# ---------------------------------------------------------------------------
# same-disk ring integral


def test_ring_integral_from_disk_center():
    # from the center, the whole ring of radius theta <= R stays inside:
    # the top-hat integrand is 1 over 2 pi theta of arc length
    for theta in (0.1 * R, 0.5 * R, 0.999 * R):
        assert integrate_Is(theta, 0.0, top_hat_disk(R)) == pytest.approx(
            2 * math.pi * theta, rel=1e-12
        )
    assert integrate_Is(2.0 * R + 1e-9, 0.5 * R, top_hat_disk(R)) == 0.0
    assert integrate_Is(0.0, 0.5 * R, top_hat_disk(R)) == 0.0


def test_ring_integral_against_angular_monte_carlo():
    # I_s(theta; theta_i) = theta * Integral_0^{2 pi} f(|x_i + theta e(psi)|) dpsi
    # restricted to the disk; estimate the angular average by plain MC
    prof = exponential_disk(R)
    rng = np.random.default_rng(12)
    psi = rng.uniform(0.0, 2 * math.pi, 2_000_000)
    for theta, theta_i in ((0.6 * R, 0.5 * R), (1.3 * R, 0.8 * R)):
        d = np.sqrt(theta_i**2 + theta**2 + 2 * theta_i * theta * np.cos(psi))
        inside = d <= R
        mc = theta * 2 * math.pi * np.mean(prof.f(np.where(inside, d, R)) * inside)
        exact = integrate_Is(theta, theta_i, prof)
        assert exact == pytest.approx(mc, rel=7e-3), (theta, theta_i)


def test_ring_integral_rejects_outside_sources():
    with pytest.raises(ValueError):
        integrate_Is(0.5 * R, 1.5 * R, top_hat_disk(R))


# ---------------------------------------------------------------------------
# other-disk term


def test_fully_anticorrelated_centers_kill_the_cross_term():
    dead = CenterCorrelation(lambda t: np.full_like(t, -1.0), (), "empty")
    assert integrate_Io(0.5 * R, 0.3 * R, top_hat_disk(R), dead, N_C) == 0.0


def test_hard_core_exclusion_zone():
    # centers at least 2R apart: a point theta_i from its center cannot
    # see any other-disk point closer than R - theta_i
    centers = hard_core_centers(R)
    prof = top_hat_disk(R)
    theta_i = 0.3 * R
    assert integrate_Io(0.55 * R, theta_i, prof, centers, N_C) == pytest.approx(0.0, abs=1e-30)
    # ...but does beyond that
    assert integrate_Io(1.2 * R, theta_i, prof, centers, N_C) > 0.0


def test_cross_term_positive_for_poisson():
    val = integrate_Io(0.7 * R, 0.4 * R, top_hat_disk(R), poisson_centers(), N_C)
    assert val > 0.0


# ---------------------------------------------------------------------------
# assembled correlation


def test_case_a_matches_closed_form():
    prof, centers = preset_case("a")
    theta = np.linspace(0.05 * R, 4.0 * R, 36)
    tab = correlation_toy1(theta, prof, centers, N_C)
    ref = case_a_closed_form(theta)
    npt.assert_allclose(tab.values, ref, rtol=2e-4)


def test_case_a_baseline_is_flat_beyond_the_disk_diameter():
    prof, centers = preset_case("a")
    theta = np.array([2.2 * R, 3.0 * R, 3.7 * R])
    tab = correlation_toy1(theta, prof, centers, N_C)
    npt.assert_allclose(tab.values, N_C**2 * R**4 / 16.0, rtol=1e-4)


def test_same_disk_term_only_dies_beyond_2r():
    prof, _ = preset_case("a")
    theta = np.array([0.5 * R, 1.9 * R, 2.1 * R, 3.0 * R])
    tab = correlation_toy1(theta, prof, None, N_C)
    assert np.all(tab.values[:2] > 0)
    npt.assert_array_equal(tab.values[2:], 0.0)


def test_hard_core_case_sits_below_poisson_case():
    prof_a, cent_a = preset_case("a")
    prof_b, cent_b = preset_case("b")
    theta = np.linspace(0.1 * R, 3.5 * R, 18)
    a = correlation_toy1(theta, prof_a, cent_a, N_C).values
    b = correlation_toy1(theta, prof_b, cent_b, N_C).values
    assert np.all(b <= a + 1e-9 * np.abs(a))
    # the deficit concentrates around theta ~ 2R where exclusion bites
    mid = (theta > 1.2 * R) & (theta < 2.8 * R)
    assert np.max((a - b)[mid]) > np.max(a - b) * 0.5


def test_clustering_enhances_the_cross_term_when_its_range_dominates():
    # with a clustering scale much larger than everything else, every
    # contributing center separation sees density ~ 2 exp(-u/s) > 1
    prof = top_hat_disk(R)
    wide = clustered_centers(10.0 * R)
    flat = poisson_centers()
    for theta, theta_i in ((0.7 * R, 0.4 * R), (1.5 * R, 0.2 * R)):
        enhanced = integrate_Io(theta, theta_i, prof, wide, N_C)
        plain = integrate_Io(theta, theta_i, prof, flat, N_C)
        assert plain < enhanced < 2.0 * plain


def test_scale_r_clustering_drains_the_large_angle_baseline():
    # omega = 2 exp(-theta/R) - 1 anticorrelates centers beyond R ln 2,
    # so unlike the uncorrelated case there is no flat plateau: the
    # curve undershoots the Poisson one and decays toward zero
    prof_a, cent_a = preset_case("a")
    prof_c, cent_c = preset_case("c")
    assert cent_c.omega(np.array([0.0]))[0] == pytest.approx(1.0)
    theta = np.array([0.5 * R, 1.0 * R, 2.0 * R, 3.5 * R])
    a = correlation_toy1(theta, prof_a, cent_a, N_C).values
    c = correlation_toy1(theta, prof_c, cent_c, N_C).values
    assert np.all(c < a)
    baseline = N_C**2 * R**4 / 16.0
    assert c[-1] < 0.5 * baseline


def test_exponential_profile_case_differs_from_top_hat():
    prof_d, cent_d = preset_case("d")
    assert prof_d.f(np.array([0.0]))[0] == pytest.approx(1.0)
    # same centers as case c, softer profile: less weight everywhere
    theta = np.array([0.5 * R, 1.5 * R])
    d = correlation_toy1(theta, prof_d, cent_d, N_C).values
    c = correlation_toy1(theta, *preset_case("c"), N_C).values
    assert np.all(d < c)


def test_correlation_toy1_input_validation():
    prof, centers = preset_case("a")
    with pytest.raises(ValueError):
        correlation_toy1(np.array([0.0, 0.1]), prof, centers, N_C)  # zero angle
    with pytest.raises(ValueError):
        correlation_toy1(np.array([0.2, 0.1]), prof, centers, N_C)  # not increasing
    with pytest.raises(ValueError):
        correlation_toy1(np.array([0.1, 0.2]), prof, centers, -5.0)


def test_profile_and_center_factories_validate():
    with pytest.raises(ValueError):
        top_hat_disk(-1.0)
    with pytest.raises(ValueError):
        DiskProfile(lambda t: -np.ones_like(t), R, (), "negative")
    with pytest.raises(ValueError):
        CenterCorrelation(lambda t: np.full_like(t, -2.0), (), "subunitary")
    assert clustered_centers(R).omega(np.array([0.0]))[0] == pytest.approx(1.0)
