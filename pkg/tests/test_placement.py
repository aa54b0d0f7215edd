import numpy as np
import pytest

from rismimo.channels import (bs_array_response, complex_normal,
                              covariance_factor, ris_reflected_covariance)
from rismimo.placement import (AngularGrid, PlacementExhaustedError,
                               build_angle_grid, normalized_interference,
                               snap_to_grid, steering_inner_product_magnitude,
                               validate_placement)

WAVELENGTH = 0.1
HALF = WAVELENGTH / 2


class TestSteeringInnerProduct:
    def test_equal_angles_give_m(self):
        assert steering_inner_product_magnitude(0.4, 0.4, 16, HALF,
                                                WAVELENGTH) == pytest.approx(16.0)

    def test_orthogonality_condition(self):
        # sines one lattice step apart: the coherent sum nulls out
        m = 16
        theta = 0.3
        other = np.arcsin(np.sin(theta) + WAVELENGTH / (m * HALF))
        value = steering_inner_product_magnitude(theta, other, m, HALF,
                                                 WAVELENGTH)
        assert value < 1e-9 * m

    def test_matches_direct_summation(self):
        rng = np.random.default_rng(80)
        m = 32
        for _ in range(25):
            a, b = rng.uniform(-np.pi / 2, np.pi / 2, 2)
            direct = np.abs(sum(
                np.exp(2j * np.pi * HALF / WAVELENGTH * n
                       * (np.sin(a) - np.sin(b))) for n in range(m)))
            closed = steering_inner_product_magnitude(a, b, m, HALF, WAVELENGTH)
            assert closed == pytest.approx(direct, rel=1e-9, abs=1e-9)


class TestBuildAngleGrid:
    def test_small_array_count(self):
        grid = build_angle_grid(16, HALF, WAVELENGTH)
        assert len(grid.angles) == 32

    def test_large_array_count_and_worst_gap(self):
        grid = build_angle_grid(128, HALF, WAVELENGTH)
        assert len(grid.angles) == 256
        gap = np.pi / 2 - np.arcsin(1.0 - WAVELENGTH / (128 * HALF))
        assert gap == pytest.approx(0.177, abs=1e-3)
        first_quadrant = grid.angles[(grid.angles >= 0)
                                     & (grid.angles <= np.pi / 2)]
        assert np.max(np.diff(np.sort(first_quadrant))) == pytest.approx(gap)

    def test_contains_cardinal_angles(self):
        grid = build_angle_grid(16, HALF, WAVELENGTH)
        for target in (0.0, np.pi / 2, -np.pi / 2):
            assert np.min(np.abs(grid.angles - target)) < 1e-12

    def test_sub_wavelength_aperture_rejected(self):
        with pytest.raises(ValueError):
            build_angle_grid(1, HALF, WAVELENGTH)

    def test_valid_pairs_are_orthogonal(self):
        m = 64
        grid = build_angle_grid(m, HALF, WAVELENGTH)
        sines = grid.sines
        for i in range(len(grid.angles)):
            for j in range(i + 1, len(grid.angles)):
                diff = sines[i] - sines[j]
                lattice = diff * HALF / WAVELENGTH
                if abs(lattice - round(lattice)) < 1e-9:
                    continue  # maximal-interference pair, excluded by rule
                value = steering_inner_product_magnitude(
                    grid.angles[i], grid.angles[j], m, HALF, WAVELENGTH)
                assert value < 1e-6 * m


class TestValidatePlacement:
    def test_opposite_boresight_pair(self):
        report = validate_placement([0.0, np.pi], 16, HALF, WAVELENGTH)
        lattice = [v for v in report if v.rule == "aligned-sine"]
        assert len(lattice) == 1
        assert lattice[0].first == 0 and lattice[0].second == 1

    def test_mirror_rule(self):
        m = 16
        phi = np.arcsin(2.0 * 3 / m)
        report = validate_placement([phi, np.pi - phi], m, HALF, WAVELENGTH)
        assert any(v.rule == "mirror" for v in report)

    def test_half_pi_pair(self):
        report = validate_placement([np.pi / 2, -np.pi / 2], 16, HALF,
                                    WAVELENGTH)
        assert any(v.rule == "opposite-half-pi" for v in report)
        assert any(v.rule == "grating-sine" for v in report)

    def test_distinct_grid_angles_clean(self):
        m = 32
        grid = build_angle_grid(m, HALF, WAVELENGTH)
        pair = [float(grid.angles[3]), float(grid.angles[7])]
        assert validate_placement(pair, m, HALF, WAVELENGTH) == []
        value = steering_inner_product_magnitude(pair[0], pair[1], m, HALF,
                                                 WAVELENGTH)
        assert value < 1e-9 * m

    def test_wide_spacing_warns(self):
        with pytest.warns(UserWarning):
            validate_placement([0.1, 0.2], 8, WAVELENGTH, WAVELENGTH)


class TestSnapToGrid:
    def test_on_grid_angle_kept(self):
        grid = build_angle_grid(16, HALF, WAVELENGTH)
        angle = float(grid.angles[5])
        assert snap_to_grid(angle, grid) == pytest.approx(angle)

    def test_tie_breaks_toward_smaller_angle(self):
        grid = build_angle_grid(16, HALF, WAVELENGTH)
        lo, hi = float(grid.angles[3]), float(grid.angles[4])
        midpoint = 0.5 * (lo + hi)
        assert snap_to_grid(midpoint, grid) == pytest.approx(lo)

    def test_conflicting_nearest_is_skipped(self):
        grid = build_angle_grid(16, HALF, WAVELENGTH)
        target = float(grid.angles[5])
        occupied = [target]
        snapped = snap_to_grid(target, grid, occupied)
        assert snapped != pytest.approx(target)
        # next-nearest by wrapped distance among conflict-free angles
        distances = np.abs(grid.angles - target)
        order = np.lexsort((grid.angles, np.round(distances, 12)))
        alternatives = [float(grid.angles[i]) for i in order
                        if not validate_placement(
                            occupied + [float(grid.angles[i])], 16, HALF,
                            WAVELENGTH)]
        assert snapped == pytest.approx(alternatives[0])

    def test_exhausted_grid(self):
        tiny = AngularGrid(np.array([0.3]), 16, HALF, WAVELENGTH)
        with pytest.raises(PlacementExhaustedError):
            snap_to_grid(0.1, tiny, occupied=[0.3])


class TestNormalizedInterference:
    def test_identity_matrices(self):
        eye = np.eye(6)
        assert normalized_interference(eye, eye) == pytest.approx(1.0 / 6)

    def test_disjoint_support(self):
        a = np.diag([1.0, 1.0, 0.0, 0.0])
        b = np.diag([0.0, 0.0, 2.0, 2.0])
        assert normalized_interference(a, b) == 0.0

    def test_zero_trace_rejected(self):
        with pytest.raises(ValueError):
            normalized_interference(np.zeros((3, 3)), np.eye(3))

    def test_symmetry_and_scale_invariance(self):
        rng = np.random.default_rng(81)
        root_a = complex_normal(rng, 5, 5)
        root_b = complex_normal(rng, 5, 5)
        cov_a = root_a @ root_a.conj().T
        cov_b = root_b @ root_b.conj().T
        ab = normalized_interference(cov_a, cov_b)
        assert ab == pytest.approx(normalized_interference(cov_b, cov_a),
                                   rel=1e-12)
        assert ab == pytest.approx(
            normalized_interference(3.7 * cov_a, 0.2 * cov_b), rel=1e-12)

    def test_monte_carlo_cross_product(self):
        # mean squared inner product of independent correlated channels
        rng = np.random.default_rng(82)
        m, draws = 16, 100_000
        root_a = complex_normal(rng, m, m) / np.sqrt(m)
        root_b = complex_normal(rng, m, m) / np.sqrt(m)
        cov_a = root_a @ root_a.conj().T
        cov_b = root_b @ root_b.conj().T
        ha = complex_normal(rng, draws, m) @ covariance_factor(cov_a).T
        hb = complex_normal(rng, draws, m) @ covariance_factor(cov_b).T
        cross = np.abs(np.einsum("sm,sm->s", ha.conj(), hb)) ** 2
        expected = np.vdot(cov_b, cov_a).real  # tr(A B)
        assert cross.mean() == pytest.approx(expected, rel=0.03)
        assert normalized_interference(cov_a, cov_b) == pytest.approx(
            expected / (np.trace(cov_a).real * np.trace(cov_b).real), rel=1e-12)


class TestLosDominance:
    def test_grid_placement_suppresses_los_interference(self):
        # pure LoS surface channels, negligible direct links: grid-snapped
        # azimuths beat an aligned-sine placement by far more than 10x
        rng = np.random.default_rng(83)
        m, rows, cols = 32, 4, 4
        from rismimo.channels import ArrayGeometry, ris_correlation_kernel
        geom = ArrayGeometry(m, HALF, rows, cols, HALF, WAVELENGTH)
        kernel = ris_correlation_kernel(geom)
        grid = build_angle_grid(m, HALF, WAVELENGTH)
        angle_a, angle_b = float(grid.angles[4]), float(grid.angles[9])
        aligned_b = float(np.arcsin(np.sin(angle_a)))  # same sine as angle_a

        def los_cov(angle):
            response = bs_array_response(angle, geom)
            surface = np.exp(1j * rng.uniform(0, 2 * np.pi, rows * cols))
            bs_ris = np.outer(response, surface.conj())
            phases = np.exp(1j * rng.uniform(0, 2 * np.pi, rows * cols))
            tiny_direct = 1e-12 * np.eye(m)
            return ris_reflected_covariance(bs_ris, phases, kernel) + tiny_direct

        separated = normalized_interference(los_cov(angle_a), los_cov(angle_b))
        clashing = normalized_interference(los_cov(angle_a), los_cov(aligned_b))
        assert clashing >= 10.0 * separated
