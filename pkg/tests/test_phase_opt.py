import numpy as np
import pytest

from rismimo.channels import complex_normal
from rismimo.phase_opt import (QuadraticForm, build_quadratic,
                               euclidean_gradient, objective, random_phases,
                               riemannian_ascent)


def random_unit_phases(rng, n):
    return np.exp(1j * rng.uniform(0, 2 * np.pi, n))


def random_psd(rng, n):
    root = complex_normal(rng, n, n)
    return root @ root.conj().T / n


def brute_force_reflected_trace(bs_ris, phases, kernel):
    # tr(H diag(phi) K diag(phi)^H H^H) assembled explicitly
    scaled = bs_ris @ np.diag(phases)
    return np.trace(scaled @ kernel @ scaled.conj().T).real


class TestBuildQuadratic:
    def test_identity_kernel_gives_column_norms(self):
        rng = np.random.default_rng(60)
        bs_ris = complex_normal(rng, 6, 4)
        form = build_quadratic(bs_ris, np.eye(4))
        expected = np.diag(np.linalg.norm(bs_ris, axis=0) ** 2)
        assert np.allclose(form.matrix, expected)

    def test_trace_identity_on_random_instances(self):
        # the central oracle: quadratic form equals the reflected-path trace
        rng = np.random.default_rng(61)
        bs_ris = complex_normal(rng, 8, 16)
        kernel = random_psd(rng, 16).real  # real symmetric PSD
        kernel = 0.5 * (kernel + kernel.T)
        form = build_quadratic(bs_ris, kernel)
        for _ in range(100):
            phases = random_unit_phases(rng, 16)
            direct = brute_force_reflected_trace(bs_ris, phases, kernel)
            quad = objective(phases, form)
            assert quad == pytest.approx(direct, rel=1e-9)

    def test_hermitian_psd(self):
        rng = np.random.default_rng(62)
        bs_ris = complex_normal(rng, 8, 12)
        kernel = random_psd(rng, 12).real
        kernel = 0.5 * (kernel + kernel.T)
        mat = build_quadratic(bs_ris, kernel).matrix
        assert np.allclose(mat, mat.conj().T)
        eigvals = np.linalg.eigvalsh(mat)
        assert eigvals[0] >= -1e-9 * max(eigvals[-1], 1e-300)

    def test_dimension_mismatch_rejected(self):
        rng = np.random.default_rng(63)
        with pytest.raises(ValueError):
            build_quadratic(complex_normal(rng, 4, 5), np.eye(6))


class TestObjective:
    def test_identity_matrix_gives_n(self):
        rng = np.random.default_rng(64)
        phases = random_unit_phases(rng, 12)
        assert objective(phases, QuadraticForm(np.eye(12))) == pytest.approx(12.0)

    def test_rayleigh_upper_bound(self):
        rng = np.random.default_rng(65)
        mat = random_psd(rng, 10)
        lam_max = np.linalg.eigvalsh(mat)[-1]
        form = QuadraticForm(mat)
        top = np.linalg.eigh(mat)[1][:, -1]
        phases = np.exp(1j * np.angle(top))
        assert objective(phases, form) <= 10 * lam_max * (1 + 1e-9)

    def test_global_phase_invariance(self):
        rng = np.random.default_rng(66)
        mat = random_psd(rng, 8)
        form = QuadraticForm(mat)
        phases = random_unit_phases(rng, 8)
        rotated = np.exp(1j * 1.234) * phases
        assert objective(phases, form) == pytest.approx(objective(rotated, form),
                                                        rel=1e-12)

    def test_nonunit_modulus_rejected(self):
        with pytest.raises(ValueError):
            objective(np.array([1.0, 2.0], complex), QuadraticForm(np.eye(2)))


class TestEuclideanGradient:
    def test_zero_matrix(self):
        phases = np.exp(1j * np.linspace(0, 1, 5))
        out = euclidean_gradient(phases, QuadraticForm(np.zeros((5, 5))))
        assert np.allclose(out, 0.0)

    def test_identity_matrix(self):
        rng = np.random.default_rng(67)
        phases = random_unit_phases(rng, 7)
        out = euclidean_gradient(phases, QuadraticForm(np.eye(7)))
        assert np.allclose(out, 2.0 * phases)

    def test_finite_differences(self):
        rng = np.random.default_rng(68)
        n, step = 16, 1e-6
        mat = random_psd(rng, n)
        form = QuadraticForm(mat)
        phases = random_unit_phases(rng, n)
        grad = euclidean_gradient(phases, form)

        def raw(vec):
            return np.vdot(vec, mat @ vec).real

        fd = np.zeros(n, dtype=complex)
        for i in range(n):
            bump = np.zeros(n, dtype=complex)
            bump[i] = step
            re_part = (raw(phases + bump) - raw(phases - bump)) / (2 * step)
            im_part = (raw(phases + 1j * bump) - raw(phases - 1j * bump)) / (2 * step)
            fd[i] = re_part + 1j * im_part
        assert np.linalg.norm(fd - grad) / np.linalg.norm(grad) < 1e-4


class TestRiemannianAscent:
    def test_diagonal_form_terminates_immediately(self):
        rng = np.random.default_rng(69)
        diag = np.diag(np.linspace(1.0, 3.0, 6))
        init = random_unit_phases(rng, 6)
        report = riemannian_ascent(QuadraticForm(diag), phases_init=init)
        assert report.iterations == 0
        assert report.converged
        assert report.gradient_norm < 1e-9
        assert report.objective == pytest.approx(np.trace(diag))

    def test_rank_one_reaches_closed_form(self):
        rng = np.random.default_rng(70)
        coeff = complex_normal(rng, 32) * np.linspace(0.2, 1.5, 32)
        mat = np.outer(coeff, coeff.conj())
        form = QuadraticForm(mat)
        target = np.sum(np.abs(coeff)) ** 2
        for trial in range(5):
            init = random_unit_phases(rng, 32)
            report = riemannian_ascent(form, phases_init=init)
            assert report.objective == pytest.approx(target, rel=1e-6)
            assert np.max(np.abs(np.abs(report.phases) - 1.0)) < 1e-12

    def test_monotone_trace(self):
        rng = np.random.default_rng(71)
        mat = random_psd(rng, 16)
        report = riemannian_ascent(QuadraticForm(mat))
        diffs = np.diff(report.objective_trace)
        assert np.all(diffs >= -1e-9 * max(report.objective, 1.0))

    def test_beats_random_sampling(self):
        rng = np.random.default_rng(72)
        mat = random_psd(rng, 8)
        form = QuadraticForm(mat)
        report = riemannian_ascent(form, restarts=4,
                                   rng=np.random.default_rng(1))
        best = 0.0
        sampler = np.random.default_rng(2)
        for _ in range(100):
            block = np.exp(1j * sampler.uniform(0, 2 * np.pi, (10_000, 8)))
            values = np.einsum("si,ij,sj->s", block.conj(), mat, block).real
            best = max(best, values.max())
        assert report.objective >= best

    def test_matches_exhaustive_quantized_search(self):
        rng = np.random.default_rng(73)
        mat = random_psd(rng, 4)
        form = QuadraticForm(mat)
        report = riemannian_ascent(form, restarts=4,
                                   rng=np.random.default_rng(3))
        levels = np.exp(2j * np.pi * np.arange(16) / 16)
        grid = np.stack(np.meshgrid(*[levels] * 4, indexing="ij"), axis=-1)
        grid = grid.reshape(-1, 4)
        values = np.einsum("si,ij,sj->s", grid.conj(), mat, grid).real
        assert report.objective >= 0.999 * values.max()

    def test_upper_bound_respected(self):
        rng = np.random.default_rng(74)
        mat = random_psd(rng, 12)
        lam_max = np.linalg.eigvalsh(mat)[-1]
        report = riemannian_ascent(QuadraticForm(mat))
        assert report.objective <= 12 * lam_max * (1 + 1e-9)

    def test_optimizer_is_ue_independent(self):
        # the objective depends on the surface channel and kernel only, so
        # any per-UE scale leaves the maximizer identical
        rng = np.random.default_rng(75)
        bs_ris = complex_normal(rng, 8, 12)
        kernel = random_psd(rng, 12).real
        kernel = 0.5 * (kernel + kernel.T)
        form = build_quadratic(bs_ris, kernel)
        reports = [riemannian_ascent(form) for _ in range(3)]
        for other in reports[1:]:
            assert np.array_equal(reports[0].phases, other.phases)

    def test_optimized_at_least_random_baseline(self):
        rng = np.random.default_rng(76)
        wins = 0
        for _ in range(100):
            mat = random_psd(rng, 10)
            form = QuadraticForm(mat)
            opt = riemannian_ascent(form).objective
            base = objective(random_phases(10, rng), form)
            wins += opt >= base
        assert wins == 100

    def test_nonunit_init_rejected(self):
        with pytest.raises(ValueError):
            riemannian_ascent(QuadraticForm(np.eye(3)),
                              phases_init=np.array([1.0, 0.5, 1.0], complex))

    def test_restarts_require_rng(self):
        with pytest.raises(ValueError):
            riemannian_ascent(QuadraticForm(np.eye(3)), restarts=2)


class TestRandomPhases:
    def test_unit_modulus(self):
        out = random_phases(64, np.random.default_rng(77))
        assert np.max(np.abs(np.abs(out) - 1.0)) < 1e-12

    def test_mean_is_zero(self):
        out = random_phases(100_000, np.random.default_rng(78))
        assert np.abs(out.mean()) < 0.01

    def test_seed_reproducibility(self):
        a = random_phases(32, np.random.default_rng(79))
        b = random_phases(32, np.random.default_rng(79))
        assert np.array_equal(a, b)
