"""Unit-modulus quadratic maximization for the surface phase profiles.

The average reflected-path channel gain of every UE served by one surface
is, up to a per-UE scale, the quadratic form phi^H D phi with
D = conj(K) .* (H^H H), where K is the element correlation kernel and H the
BS-surface channel. D is a Hadamard product of positive semidefinite
matrices and therefore positive semidefinite itself. The profile phi is
constrained to the complex circle manifold (|phi_i| = 1), on which the form
is maximized by projected conjugate-gradient ascent with an Armijo line
search and elementwise-normalization retraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import _check_unit_modulus, hermitize


@dataclass(frozen=True)
class QuadraticForm:
    """Hermitian matrix of the phase-profile objective, with a provenance tag."""

    matrix: np.ndarray
    label: str = ""


@dataclass
class AscentReport:
    """Outcome of one manifold ascent run."""

    iterations: int
    objective_trace: np.ndarray
    phases: np.ndarray
    converged: bool
    gradient_norm: float

    @property
    def objective(self):
        return float(self.objective_trace[-1])


def build_quadratic(bs_ris, kernel, label=""):
    """Objective matrix conj(kernel) .* (H^H H) of one surface.

    When the surface serves several UEs whose element covariances differ,
    pass their (Hermitian) sum as the kernel; the maximizer is unchanged by
    positive scaling.
    """
    bs_ris = np.asarray(bs_ris)
    kernel = np.asarray(kernel)
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1]:
        raise ValueError("kernel must be square")
    if bs_ris.ndim != 2 or bs_ris.shape[1] != kernel.shape[0]:
        raise ValueError("channel matrix columns must match the kernel size")
    gram = bs_ris.conj().T @ bs_ris
    return QuadraticForm(hermitize(kernel.conj() * gram), label)


def objective(phases, form):
    """Real value of phi^H D phi for a unit-modulus phi."""
    phases = np.asarray(phases)
    _check_unit_modulus(phases)
    return float(np.vdot(phases, form.matrix @ phases).real)


def euclidean_gradient(phases, form):
    """Euclidean gradient 2 D phi of the quadratic objective."""
    return 2.0 * (form.matrix @ np.asarray(phases))


def random_phases(length, rng):
    """Independent uniform phase shifts, one per surface element."""
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, length))


def _project(vec, phases):
    # tangent space of the complex circle at phi: remove the radial component
    return vec - np.real(vec * phases.conj()) * phases


def _spectral_scale(matrix, iters=30):
    """Cheap largest-eigenvalue estimate of a PSD matrix (power iteration)."""
    n = matrix.shape[0]
    vec = np.ones(n, dtype=complex) + 1e-3 * np.linspace(0.0, 1.0, n)
    vec /= np.linalg.norm(vec)
    for _ in range(iters):
        nxt = matrix @ vec
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            break
        vec = nxt / norm
    rayleigh = np.vdot(vec, matrix @ vec).real
    diag_max = float(np.max(matrix.diagonal().real, initial=0.0))
    return max(rayleigh, diag_max, 0.0)


def _ascend(matrix, phases_init, max_iter, grad_tol, scale):
    armijo = 1e-4
    floor = max(scale, np.finfo(float).tiny)
    grad_threshold = grad_tol * matrix.shape[0] * floor
    phases = phases_init / np.abs(phases_init)
    image = matrix @ phases
    value = np.vdot(phases, image).real
    trace = [value]
    rgrad = _project(2.0 * image, phases)
    grad_norm = np.linalg.norm(rgrad)
    direction = rgrad
    step = 1.0 / floor
    iterations = 0
    while iterations < max_iter and grad_norm > grad_threshold:
        slope = np.vdot(direction, rgrad).real
        if slope <= 0.0:  # transported direction lost ascent; restart on gradient
            direction = rgrad
            slope = grad_norm ** 2
        trial = step
        accepted = False
        for _ in range(50):
            candidate = phases + trial * direction
            candidate /= np.abs(candidate)
            cand_image = matrix @ candidate
            cand_value = np.vdot(candidate, cand_image).real
            if cand_value >= value + armijo * trial * slope:
                accepted = True
                break
            trial *= 0.5
        if not accepted:
            if direction is not rgrad:
                direction = rgrad  # retry the iteration along the gradient
                continue
            break  # no ascent possible along the gradient either
        new_rgrad = _project(2.0 * cand_image, candidate)
        # Polak-Ribiere coefficient with projection transport
        prev_sq = grad_norm ** 2
        transported_grad = _project(rgrad, candidate)
        transported_dir = _project(direction, candidate)
        beta = 0.0
        if prev_sq > 0.0:
            beta = max(0.0, np.vdot(new_rgrad - transported_grad,
                                    new_rgrad).real / prev_sq)
        direction = new_rgrad + beta * transported_dir
        phases, value, rgrad = candidate, cand_value, new_rgrad
        grad_norm = np.linalg.norm(rgrad)
        trace.append(value)
        step = 2.0 * trial
        iterations += 1
    return AscentReport(iterations, np.asarray(trace), phases,
                        grad_norm <= grad_threshold, float(grad_norm))


def riemannian_ascent(form, phases_init=None, max_iter=500, grad_tol=1e-8,
                      restarts=0, rng=None):
    """Maximize phi^H D phi over unit-modulus phi by manifold ascent.

    Starts from the all-ones profile unless phases_init is given; with
    restarts > 0, additionally runs from seeded random profiles and keeps
    the best outcome. Accepted steps never decrease the objective, iterates
    stay exactly unit modulus, and the run stops once the Riemannian
    gradient norm falls below grad_tol scaled by the problem size and a
    largest-eigenvalue estimate.
    """
    matrix = np.asarray(form.matrix)
    size = matrix.shape[0]
    if phases_init is None:
        phases_init = np.ones(size, dtype=complex)
    else:
        phases_init = np.asarray(phases_init, dtype=complex)
        _check_unit_modulus(phases_init)
    if restarts > 0 and rng is None:
        raise ValueError("random restarts need an explicit rng")
    scale = _spectral_scale(matrix)
    report = _ascend(matrix, phases_init, max_iter, grad_tol, scale)
    for _ in range(restarts):
        rerun = _ascend(matrix, random_phases(size, rng), max_iter, grad_tol, scale)
        if rerun.objective > report.objective:
            report = rerun
    return report
