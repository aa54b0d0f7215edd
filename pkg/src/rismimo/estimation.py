"""Pilot bookkeeping under intra-cell reuse and MMSE channel estimation.

Pilots are never materialized as sequences. The simulation works directly
with the despread per-pilot statistic, which is distribution-equivalent to
correlating the received pilot block with each orthogonal sequence and
cheaper to generate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.linalg.blas import zherk

from .channels import complex_normal


class InfeasibleScheduleError(ValueError):
    """No pilot assignment can keep pilots unique inside an association set."""


@dataclass(frozen=True)
class PilotAssignment:
    """Pilot indices per UE plus the induced sharing sets.

    Invariant: each sharing set intersects each association set in at most
    one UE, so UEs reusing a pilot are always served by different surfaces
    (or by none).
    """

    pilot_count: int
    pilot_of: tuple  # UE index -> pilot index
    share_sets: tuple  # pilot index -> tuple of UE indices
    reuse_factor: int


@dataclass
class EstimationOutput:
    """MMSE estimates and second-order statistics for all UEs."""

    estimates: np.ndarray  # (K, M)
    estimate_cov: np.ndarray  # (K, M, M)
    error_cov: np.ndarray  # (K, M, M)
    despread: np.ndarray  # (pilot_count, M)


def assign_pilots(association, pilot_count):
    """Cycle the pilots through the UEs of the association sets in order.

    UEs are visited set by set (unaided set first, then each surface) and by
    index inside a set, receiving pilots 0, 1, ..., pilot_count-1, 0, ...
    consecutively. Because no set may hold more than pilot_count UEs, a
    pilot never repeats inside one set, which is exactly the sharing
    condition the surfaces need. Association sets must partition 0..K-1.
    """
    if pilot_count < 1:
        raise ValueError("pilot count must be positive")
    members_all = sorted(k for members in association for k in members)
    total = len(members_all)
    if members_all != list(range(total)):
        raise ValueError("association sets must partition the UE indices 0..K-1")
    pilot_of = [-1] * total
    counter = 0
    for members in association:
        if len(members) > pilot_count:
            raise InfeasibleScheduleError(
                f"association set with {len(members)} UEs cannot share "
                f"{pilot_count} pilots without an intra-set repeat")
        for k in sorted(members):
            pilot_of[k] = counter % pilot_count
            counter += 1
    share_sets = tuple(tuple(k for k in range(total) if pilot_of[k] == t)
                       for t in range(pilot_count))
    reuse_factor = -(-total // pilot_count)
    return PilotAssignment(pilot_count, tuple(pilot_of), share_sets, reuse_factor)


def simulate_pilot_phase(overall, assignment, tx_snr, rng, noiseless=False):
    """Despread observations of one pilot transmission.

    Returns a (pilot_count, M) array whose row t is the sum of the scaled
    channels of the UEs sharing pilot t plus effective noise of covariance
    I/pilot_count.
    """
    overall = np.asarray(overall)
    n_antennas = overall.shape[1]
    despread = np.zeros((assignment.pilot_count, n_antennas), dtype=complex)
    amp = np.sqrt(tx_snr)
    for t, members in enumerate(assignment.share_sets):
        for k in members:
            despread[t] += amp * overall[k]
    if not noiseless:
        despread += complex_normal(rng, assignment.pilot_count, n_antennas) \
            / np.sqrt(assignment.pilot_count)
    return despread


def _pilot_cholesky(cov_overall, assignment, pilot, tx_snr):
    """Lower Cholesky factor of the despread-observation covariance / tx_snr."""
    n_antennas = np.asarray(cov_overall[0]).shape[0]
    gram = np.zeros((n_antennas, n_antennas), dtype=complex)
    for i in assignment.share_sets[pilot]:
        gram += cov_overall[i]
    gram[np.diag_indices(n_antennas)] += 1.0 / (tx_snr * assignment.pilot_count)
    return cholesky(gram, lower=True, check_finite=False)


def _gram_of_columns(half):
    # X^H X through a Hermitian rank-k update; positive by construction
    upper = zherk(1.0, half, trans=2, lower=0)
    return upper + np.triu(upper, 1).conj().T


def _estimate_one(chol, solved_obs, cov_k, tx_snr):
    # hhat = R Q^-1 y / sqrt(snr) and Phi = R Q^-1 R, both through the
    # half-solve X = L^-1 R
    half = solve_triangular(chol, cov_k, lower=True, check_finite=False)
    estimate = half.conj().T @ solved_obs / np.sqrt(tx_snr)
    return estimate, _gram_of_columns(half)


def mmse_estimate(despread_t, k, cov_overall, assignment, tx_snr):
    """MMSE channel estimate of UE k from its pilot's despread observation.

    despread_t is the (M,) observation of pilot c(k). cov_overall holds the
    overall-channel covariance of every UE (indexable by UE). Returns the
    estimate and its covariance; the estimation error has covariance
    cov_overall[k] minus the returned covariance.
    """
    despread_t = np.asarray(despread_t)
    cov_k = np.asarray(cov_overall[k])
    if despread_t.shape != cov_k.shape[:1]:
        raise ValueError("despread observation and covariance sizes disagree")
    chol = _pilot_cholesky(cov_overall, assignment, assignment.pilot_of[k], tx_snr)
    solved_obs = solve_triangular(chol, despread_t, lower=True,
                                  check_finite=False)
    return _estimate_one(chol, solved_obs, cov_k, tx_snr)


def estimate_all(despread, cov_overall, assignment, tx_snr):
    """MMSE estimates for every UE, factorizing each pilot's Gram matrix once."""
    despread = np.asarray(despread)
    n_ues = len(assignment.pilot_of)
    n_antennas = despread.shape[1]
    estimates = np.zeros((n_ues, n_antennas), dtype=complex)
    estimate_cov = np.zeros((n_ues, n_antennas, n_antennas), dtype=complex)
    error_cov = np.zeros_like(estimate_cov)
    inv_amp = 1.0 / np.sqrt(tx_snr)
    for pilot, members in enumerate(assignment.share_sets):
        if not members:
            continue
        chol = _pilot_cholesky(cov_overall, assignment, pilot, tx_snr)
        # one triangular solve for the observation and every member
        # covariance; Fortran order keeps the per-UE column blocks
        # contiguous for the rank-k updates below
        rhs = np.asfortranarray(np.concatenate(
            [despread[pilot][:, None]]
            + [np.asarray(cov_overall[k]) for k in members], axis=1))
        solved = solve_triangular(chol, rhs, lower=True, check_finite=False,
                                  overwrite_b=True)
        solved_obs = solved[:, 0]
        for pos, k in enumerate(members):
            half = solved[:, 1 + pos * n_antennas:1 + (pos + 1) * n_antennas]
            estimates[k] = inv_amp * (half.conj().T @ solved_obs)
            estimate_cov[k] = _gram_of_columns(half)
            error_cov[k] = np.asarray(cov_overall[k]) - estimate_cov[k]
    return EstimationOutput(estimates, estimate_cov, error_cov, despread)
