"""Deterministic angular grid for surface deployment and interference scoring.

BS steering vectors of two azimuths are orthogonal exactly when the
difference of their sines is a nonzero-modulo-M multiple of
wavelength / (M * spacing). Restricting deployment azimuths to the grid of
arcsines of those lattice points makes the line-of-sight parts of the
BS-surface channels of distinct surfaces orthogonal, which suppresses (but
does not null) the interference between UEs served by different surfaces:
the direct-link and diffuse cross terms survive, so scores are computed on
the full covariances.

Lattice arithmetic is done on sines, converting to angles only at the
boundary, because arcsine round-trips destroy the exact spacing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

SINE_TOL = 1e-9  # tolerance for lattice comparisons in the sine domain
ANGLE_TOL = 1e-9


class PlacementExhaustedError(RuntimeError):
    """Every grid angle conflicts with the already-occupied ones."""


@dataclass(frozen=True)
class AngularGrid:
    """Sorted deployment azimuths in (-pi, pi] plus the generating parameters."""

    angles: np.ndarray
    bs_antennas: int
    bs_spacing: float
    wavelength: float

    @property
    def sines(self):
        return np.sin(self.angles)


@dataclass(frozen=True)
class Violation:
    """One conflicting pair in a proposed placement."""

    first: int
    second: int
    rule: str  # aligned-sine | grating-sine | mirror | opposite-half-pi
    detail: str


def wrap_angle(angle):
    """Wrap to (-pi, pi]."""
    wrapped = np.mod(np.asarray(angle) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def steering_inner_product_magnitude(angle_a, angle_b, m_antennas, spacing,
                                     wavelength):
    """|a(angle_a)^H a(angle_b)| for the BS ULA, in closed form.

    Evaluates the sine-ratio expression; at the removable singularities
    (sine difference an integer multiple of wavelength/spacing) the limit
    value M is returned.
    """
    u = spacing / wavelength * (np.sin(angle_a) - np.sin(angle_b))
    num = np.sin(np.pi * m_antennas * u)
    den = np.sin(np.pi * u)
    singular = den == 0.0
    ratio = np.abs(np.divide(num, np.where(singular, 1.0, den)))
    result = np.where(singular, float(m_antennas), ratio)
    return float(result) if np.ndim(result) == 0 else result


def build_angle_grid(m_antennas, spacing, wavelength):
    """Azimuth grid whose distinct members have orthogonal BS steering vectors.

    First-quadrant angles are the arcsines of l * wavelength / (M * spacing)
    for l = 0 .. M * spacing / wavelength, mirrored across the x axis and
    then the y axis, with the duplicates at the 0 / pi and +-pi/2 seams
    removed. For an integral M * spacing / wavelength the grid holds exactly
    4 * M * spacing / wavelength angles.
    """
    ratio = m_antennas * spacing / wavelength
    if ratio < 1.0:
        raise ValueError("array aperture shorter than one wavelength; no grid")
    sines = np.arange(int(np.floor(ratio + SINE_TOL)) + 1) / ratio
    first = np.arcsin(np.minimum(sines, 1.0))
    candidates = np.sort(wrap_angle(np.concatenate(
        [first, -first, np.pi - first, first - np.pi])))
    # seam duplicates (0, +-pi/2, pi) are bitwise equal after wrapping
    keep = np.concatenate(([True], np.diff(candidates) > 1e-12))
    return AngularGrid(candidates[keep], m_antennas, spacing, wavelength)


def validate_placement(angles, m_antennas, spacing, wavelength):
    """Conflict report for a proposed set of deployment azimuths.

    Flags every pair whose sine difference is an integer multiple of
    wavelength/spacing (the maximal-interference configurations, including
    coinciding sines), mirror pairs (phi vs pi - phi), and simultaneous
    +pi/2 / -pi/2 deployments. Returns a list of Violation records, possibly
    several per pair.
    """
    if spacing > wavelength / 2.0 + SINE_TOL:
        warnings.warn("element spacing above half a wavelength: grating lobes "
                      "beyond the mirror and half-pi rules are not checked",
                      stacklevel=2)
    angles = np.asarray(angles, dtype=float)
    sines = np.sin(angles)
    period = wavelength / spacing  # sine-domain distance between gratings
    violations = []
    for i in range(len(angles)):
        for j in range(i + 1, len(angles)):
            diff = sines[i] - sines[j]
            multiple = round(diff / period)
            if abs(diff - multiple * period) < SINE_TOL:
                rule = "aligned-sine" if multiple == 0 else "grating-sine"
                violations.append(Violation(
                    i, j, rule,
                    f"sine difference {diff:.3e} is {multiple} x "
                    f"wavelength/spacing"))
            mirrored = float(wrap_angle(np.pi - angles[i]))
            apart = abs(float(wrap_angle(angles[i] - angles[j])))
            if abs(float(wrap_angle(mirrored - angles[j]))) < ANGLE_TOL \
                    and apart > ANGLE_TOL:
                violations.append(Violation(
                    i, j, "mirror", "angles are mirror images across the y axis"))
            pair = sorted((angles[i], angles[j]))
            if abs(pair[0] + np.pi / 2) < ANGLE_TOL \
                    and abs(pair[1] - np.pi / 2) < ANGLE_TOL:
                violations.append(Violation(
                    i, j, "opposite-half-pi",
                    "+pi/2 and -pi/2 deployed simultaneously"))
    return violations


def snap_to_grid(angle, grid, occupied=()):
    """Nearest grid azimuth that conflicts with none of the occupied ones.

    Candidates are ordered by absolute (wrapped) angular distance, ties
    broken toward the smaller angle. Raises PlacementExhaustedError when
    every grid angle conflicts.
    """
    if len(grid.angles) == 0:
        raise PlacementExhaustedError("empty deployment grid")
    occupied = list(occupied)
    distances = np.abs(wrap_angle(grid.angles - angle))
    order = np.lexsort((grid.angles, np.round(distances, 12)))
    for idx in order:
        candidate = float(grid.angles[idx])
        report = validate_placement(occupied + [candidate], grid.bs_antennas,
                                    grid.bs_spacing, grid.wavelength)
        slot = len(occupied)
        if not any(slot in (v.first, v.second) for v in report):
            return candidate
    raise PlacementExhaustedError(
        f"no conflict-free grid angle left for target {angle:.4f} rad")


def normalized_interference(cov_a, cov_b):
    """tr(A B) / (tr(A) tr(B)) for two channel covariances.

    Equals the mean squared inner product of two independent zero-mean
    Gaussian channels with these covariances, normalized by their average
    gains.
    """
    cov_a = np.asarray(cov_a)
    cov_b = np.asarray(cov_b)
    trace_a = np.trace(cov_a).real
    trace_b = np.trace(cov_b).real
    if trace_a <= 0.0 or trace_b <= 0.0:
        raise ValueError("covariance traces must be positive")
    # tr(A B) = sum_ij A_ij conj(B_ij) for Hermitian B
    return float(np.vdot(cov_b, cov_a).real) / (trace_a * trace_b)
